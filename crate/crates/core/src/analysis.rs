//! Statistics over solution populations and the weight/time-constant
//! compensation relation.
//!
//! For one presynaptic neuron firing twice, `T` ms apart, into a synapse of
//! weight `w` and time constant `tau`, the somatic voltage at the second
//! spike is `v_s = w (1 + exp(-T/tau))`. Holding `v_s` fixed, the implicit
//! function theorem gives the time-constant change that compensates a
//! weight change:
//!
//! ```text
//! dtau/dw = -(dv_s/dw) / (dv_s/dtau) = -(tau^2 / (w T)) (1 + exp(T/tau))
//! ```

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::evolution::EvolutionConfig;
use crate::genome::{ClipRange, Genome};

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(alloc::format!("{name} must be positive and finite, got {x}")))
    }
}

/// Somatic voltage after two spikes `interval` ms apart.
pub fn v_s(w: f64, tau: f64, interval: f64) -> Result<f64> {
    check_positive("tau", tau)?;
    check_positive("interval", interval)?;
    Ok(w * (1.0 + libm::exp(-interval / tau)))
}

/// Change in time constant per unit weight change at constant [`v_s`].
pub fn dtau_dw(w: f64, tau: f64, interval: f64) -> Result<f64> {
    check_positive("tau", tau)?;
    check_positive("interval", interval)?;
    if w == 0.0 || !w.is_finite() {
        return Err(Error::Domain("weight must be non-zero and finite".into()));
    }
    Ok(-(tau * tau / (w * interval)) * (1.0 + libm::exp(interval / tau)))
}

/// Fixed-width histogram over a closed range. Values outside the range fall
/// into the first or last bin.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Histogram {
    pub origin: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(range: ClipRange, bin_width: f64) -> Result<Self> {
        check_positive("bin width", bin_width)?;
        if !(range.max > range.min) {
            return Err(Error::Domain("histogram range is empty".into()));
        }
        let bins = libm::ceil(range.width() / bin_width).max(1.0) as usize;
        Ok(Self { origin: range.min, bin_width, counts: alloc::vec![0; bins] })
    }

    pub fn bin_of(&self, x: f64) -> usize {
        let k = libm::floor((x - self.origin) / self.bin_width);
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.counts.len() - 1)
        }
    }

    pub fn add(&mut self, x: f64) {
        let k = self.bin_of(x);
        self.counts[k] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Lower edge of bin `k`.
    pub fn edge(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.bin_width
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StatsConfig {
    pub weight_range: ClipRange,
    pub weight_bin: f64,
    pub delay_range: ClipRange,
    pub delay_bin: f64,
    pub tau_range: ClipRange,
    pub tau_bin: f64,
    /// Time constants strictly above this count as long.
    pub tau_split: f64,
}

impl StatsConfig {
    /// Ranges from the run's clip ranges; the long/short split sits at the
    /// middle of the time-constant range.
    pub fn from_evolution(config: &EvolutionConfig) -> Self {
        Self {
            weight_range: config.clip.weight,
            weight_bin: config.clip.weight.width() / 20.0,
            delay_range: config.clip.delay,
            delay_bin: 1.0,
            tau_range: config.clip.time_constant,
            tau_bin: 1.0,
            tau_split: config.clip.time_constant.midpoint(),
        }
    }
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self::from_evolution(&EvolutionConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolutionStats {
    pub genomes: usize,
    pub synapses: u64,
    pub excitatory: u64,
    pub inhibitory: u64,
    /// Share of strictly positive weights among non-zero ones.
    pub ei_fraction: Option<f64>,
    /// Excitatory over inhibitory count.
    pub ei_ratio: Option<f64>,
    /// Share of time constants above the split point.
    pub tc_long_fraction: f64,
    pub weights: Histogram,
    pub delay_deltas: Histogram,
    pub tau_syn: Histogram,
}

/// Aggregates every synapse of every genome.
pub fn stats(genomes: &[Genome], config: &StatsConfig) -> Result<SolutionStats> {
    if genomes.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let mut weights = Histogram::new(config.weight_range, config.weight_bin)?;
    let mut delay_deltas = Histogram::new(config.delay_range, config.delay_bin)?;
    let mut tau_syn = Histogram::new(config.tau_range, config.tau_bin)?;
    let (mut excitatory, mut inhibitory, mut long, mut synapses) = (0u64, 0u64, 0u64, 0u64);
    for g in genomes {
        for k in 0..g.num_synapses() {
            let w = g.weights[k];
            if w > 0.0 {
                excitatory += 1;
            } else if w < 0.0 {
                inhibitory += 1;
            }
            if g.tau_syn[k] > config.tau_split {
                long += 1;
            }
            weights.add(w);
            delay_deltas.add(g.delay_deltas[k]);
            tau_syn.add(g.tau_syn[k]);
            synapses += 1;
        }
    }
    let nonzero = excitatory + inhibitory;
    Ok(SolutionStats {
        genomes: genomes.len(),
        synapses,
        excitatory,
        inhibitory,
        ei_fraction: (nonzero > 0).then(|| excitatory as f64 / nonzero as f64),
        ei_ratio: (inhibitory > 0).then(|| excitatory as f64 / inhibitory as f64),
        tc_long_fraction: long as f64 / synapses.max(1) as f64,
        weights,
        delay_deltas,
        tau_syn,
    })
}

/// Sample-corrected skewness and excess kurtosis.
pub fn skew_kurtosis(xs: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 4 {
        return None;
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 == 0.0 {
        return None;
    }
    let g1 = m3 / libm::pow(m2, 1.5);
    let g2 = m4 / (m2 * m2) - 3.0;
    let skew = g1 * libm::sqrt(nf * (nf - 1.0)) / (nf - 2.0);
    let kurt = ((nf + 1.0) * g2 + 6.0) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0));
    Some((skew, kurt))
}

/// Threshold above which [`bimodality_coefficient`] suggests bimodality
/// (the value of a uniform distribution).
pub const BIMODALITY_THRESHOLD: f64 = 5.0 / 9.0;

/// Sarle's bimodality coefficient `(g^2 + 1) / (k + 3 (n-1)^2 / ((n-2)(n-3)))`.
pub fn bimodality_coefficient(xs: &[f64]) -> Option<f64> {
    let (g, k) = skew_kurtosis(xs)?;
    let n = xs.len() as f64;
    Some((g * g + 1.0) / (k + 3.0 * (n - 1.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0))))
}
