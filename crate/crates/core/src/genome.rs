//! Genomes: the per-synapse parameters of one network plus the constants
//! shared by every neuron.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::topology::NetworkTopology;

/// The four per-synapse parameter families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ParamKind {
    /// Synaptic weight `W`, mV per spike.
    Weight,
    /// Signed change in conduction delay `dD`, ms.
    Delay,
    /// Synaptic time constant `tau_syn`, ms.
    TimeConstant,
    /// Afterpotential scale `beta`, mV, never positive.
    Afterpotential,
}

impl ParamKind {
    pub const ALL: [ParamKind; 4] =
        [ParamKind::Weight, ParamKind::Delay, ParamKind::TimeConstant, ParamKind::Afterpotential];

    /// Token used in condition labels such as `WDtc`.
    pub fn token(self) -> &'static str {
        match self {
            ParamKind::Weight => "W",
            ParamKind::Delay => "D",
            ParamKind::TimeConstant => "tc",
            ParamKind::Afterpotential => "b",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// A value for each parameter family.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PerKind<T> {
    pub weight: T,
    pub delay: T,
    pub time_constant: T,
    pub afterpotential: T,
}

impl<T> PerKind<T> {
    pub fn get(&self, kind: ParamKind) -> &T {
        match kind {
            ParamKind::Weight => &self.weight,
            ParamKind::Delay => &self.delay,
            ParamKind::TimeConstant => &self.time_constant,
            ParamKind::Afterpotential => &self.afterpotential,
        }
    }

    pub fn get_mut(&mut self, kind: ParamKind) -> &mut T {
        match kind {
            ParamKind::Weight => &mut self.weight,
            ParamKind::Delay => &mut self.delay,
            ParamKind::TimeConstant => &mut self.time_constant,
            ParamKind::Afterpotential => &mut self.afterpotential,
        }
    }
}

/// Subset of [`ParamKind`]s that evolution may change.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ParamMask(u8);

impl ParamMask {
    pub const NONE: ParamMask = ParamMask(0);

    pub fn of(kinds: &[ParamKind]) -> Self {
        ParamMask(kinds.iter().fold(0, |acc, k| acc | k.bit()))
    }

    pub fn contains(self, kind: ParamKind) -> bool {
        self.0 & kind.bit() != 0
    }

    pub fn with(self, kind: ParamKind) -> Self {
        ParamMask(self.0 | kind.bit())
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn kinds(self) -> impl Iterator<Item = ParamKind> {
        ParamKind::ALL.into_iter().filter(move |k| self.contains(*k))
    }
}

impl fmt::Display for ParamMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        for k in self.kinds() {
            f.write_str(k.token())?;
        }
        Ok(())
    }
}

impl fmt::Debug for ParamMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ParamMask({self})")
    }
}

/// Parses labels such as `W`, `Dtc`, `WDtcb` (tokens in any order).
impl FromStr for ParamMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut mask = ParamMask::NONE;
        let mut rest = s.trim();
        if rest == "-" {
            return Ok(mask);
        }
        while !rest.is_empty() {
            let kind = ParamKind::ALL
                .into_iter()
                .find(|k| rest.starts_with(k.token()))
                .ok_or_else(|| Error::Config(alloc::format!("bad parameter mask {s:?}")))?;
            if mask.contains(kind) {
                return Err(Error::Config(alloc::format!("duplicate {} in mask {s:?}", kind.token())));
            }
            mask = mask.with(kind);
            rest = &rest[kind.token().len()..];
        }
        Ok(mask)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for ParamMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for ParamMask {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Closed interval `[min, max]` every value of one parameter kind is held in.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClipRange {
    pub min: f64,
    pub max: f64,
}

impl ClipRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(self.min, self.max)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.min <= x && x <= self.max
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }
}

/// Which afterpotential value enters the somatic sum at step `t + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AfterpotentialTiming {
    /// `A(t)` as stored at the end of the previous step.
    #[default]
    Stored,
    /// `exp(-1/tau_ap) * A(t)`, i.e. decayed but before the new spike's kick.
    Decayed,
}

/// Fixed per-network constants.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ModelConstants {
    /// Delay shared by every synapse before the adaptable change, ms.
    pub default_delay: f64,
    /// Upper clamp on effective delays, steps.
    pub max_delay: u32,
    /// Afterpotential decay constant, ms.
    pub tau_ap: f64,
    /// Firing threshold, mV. Comparison is strict.
    pub v_th: f64,
    /// Afterpotential feedback instead of hard reset.
    pub ap_enabled: bool,
    pub ap_timing: AfterpotentialTiming,
}

impl Default for ModelConstants {
    fn default() -> Self {
        Self {
            default_delay: 5.0,
            max_delay: 25,
            tau_ap: 4.0,
            v_th: 1.1,
            ap_enabled: false,
            ap_timing: AfterpotentialTiming::Stored,
        }
    }
}

impl ModelConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.default_delay.is_finite() && self.default_delay >= 0.0) {
            return Err(Error::Genome("default delay must be finite and non-negative".into()));
        }
        if !(self.tau_ap.is_finite() && self.tau_ap > 0.0) {
            return Err(Error::Genome("tau_ap must be positive".into()));
        }
        if !self.v_th.is_finite() {
            return Err(Error::Genome("threshold must be finite".into()));
        }
        Ok(())
    }
}

/// Parameters of one network. Every per-synapse vector is indexed by
/// [`NetworkTopology::synapse_index`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Genome {
    pub topology: NetworkTopology,
    pub constants: ModelConstants,
    pub weights: Vec<f64>,
    pub delay_deltas: Vec<f64>,
    pub tau_syn: Vec<f64>,
    pub ap_scale: Vec<f64>,
}

impl Genome {
    /// A genome with every synapse set to the same values.
    pub fn uniform(
        topology: NetworkTopology,
        constants: ModelConstants,
        values: PerKind<f64>,
    ) -> Self {
        let n = topology.num_synapses();
        Self {
            topology,
            constants,
            weights: alloc::vec![values.weight; n],
            delay_deltas: alloc::vec![values.delay; n],
            tau_syn: alloc::vec![values.time_constant; n],
            ap_scale: alloc::vec![values.afterpotential; n],
        }
    }

    pub fn num_synapses(&self) -> usize {
        self.weights.len()
    }

    pub fn params(&self, kind: ParamKind) -> &[f64] {
        match kind {
            ParamKind::Weight => &self.weights,
            ParamKind::Delay => &self.delay_deltas,
            ParamKind::TimeConstant => &self.tau_syn,
            ParamKind::Afterpotential => &self.ap_scale,
        }
    }

    pub fn params_mut(&mut self, kind: ParamKind) -> &mut [f64] {
        match kind {
            ParamKind::Weight => &mut self.weights,
            ParamKind::Delay => &mut self.delay_deltas,
            ParamKind::TimeConstant => &mut self.tau_syn,
            ParamKind::Afterpotential => &mut self.ap_scale,
        }
    }

    /// Checks lengths, finiteness and the sign/positivity constraints.
    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        let n = self.topology.num_synapses();
        for kind in ParamKind::ALL {
            let p = self.params(kind);
            if p.len() != n {
                return Err(Error::Genome(alloc::format!(
                    "{kind:?} has {} values, topology has {n} synapses",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Genome(alloc::format!("{kind:?} contains a non-finite value")));
            }
        }
        if self.tau_syn.iter().any(|&t| t <= 0.0) {
            return Err(Error::Genome("synaptic time constants must be positive".into()));
        }
        if self.ap_scale.iter().any(|&b| b > 0.0) {
            return Err(Error::Genome("afterpotential scales must not be positive".into()));
        }
        Ok(())
    }

    /// True when every parameter of every kind lies inside `clips`.
    pub fn within(&self, clips: &PerKind<ClipRange>) -> bool {
        ParamKind::ALL
            .into_iter()
            .all(|k| self.params(k).iter().all(|&x| clips.get(k).contains(x)))
    }

    /// Effective delay of every synapse, in steps.
    pub fn effective_delays(&self) -> Vec<u32> {
        self.delay_deltas
            .iter()
            .map(|&dd| crate::model::delay_steps(self.constants.default_delay, dd, self.constants.max_delay))
            .collect()
    }
}

/// Human readable one-line-per-synapse dump, handy in test failures.
pub fn describe(genome: &Genome) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (k, s) in genome.topology.synapses().enumerate() {
        let _ = writeln!(
            out,
            "L{} {}<-{}: W={:.4} dD={:.3} tau={:.3} beta={:.3}",
            s.layer,
            s.post,
            s.pre,
            genome.weights[k],
            genome.delay_deltas[k],
            genome.tau_syn[k],
            genome.ap_scale[k]
        );
    }
    out
}
