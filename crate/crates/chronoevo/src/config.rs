//! JSON experiment configuration.
//!
//! A grid file names a base evolution setup and either an explicit list of
//! conditions or a set of axes whose cartesian product becomes the
//! conditions. Axes expand in a fixed order (encoding, gate, weight clip,
//! mask, then noise points), so cell indices are stable across runs.

use std::path::Path;

use chronoevo_core::genome::ClipRange;
use chronoevo_core::loss::LossConfig;
use chronoevo_core::noise::{InputNoiseSpec, WeightNoiseSpec};
use chronoevo_core::{BitCode, EvolutionConfig, Gate, NetworkTopology, OutputMode, ParamKind, ParamMask, TaskSpec};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// A burst code written either as a bare bit string (default padding) or
/// with explicit padding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodeSpec {
    Bits(String),
    Padded { bits: String, pad_left: u32, pad_right: u32 },
}

impl CodeSpec {
    pub fn resolve(&self) -> Result<BitCode> {
        Ok(match self {
            CodeSpec::Bits(b) => BitCode::padded(b)?,
            CodeSpec::Padded { bits, pad_left, pad_right } => BitCode::parse(bits, *pad_left, *pad_right)?,
        })
    }
}

impl From<&str> for CodeSpec {
    fn from(s: &str) -> Self {
        CodeSpec::Bits(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputSpec {
    /// Spike counts for false and true.
    Count([u32; 2]),
    /// Burst codes for false and true.
    Train([CodeSpec; 2]),
}

/// Input codes for false/true plus the output targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    pub inputs: [CodeSpec; 2],
    pub output: OutputSpec,
}

impl Encoding {
    pub fn count(f: &str, t: &str, on_false: u32, on_true: u32) -> Self {
        Self { inputs: [f.into(), t.into()], output: OutputSpec::Count([on_false, on_true]) }
    }

    pub fn train(f: &str, t: &str, on_false: &str, on_true: &str) -> Self {
        Self { inputs: [f.into(), t.into()], output: OutputSpec::Train([on_false.into(), on_true.into()]) }
    }

    pub fn task(&self, gate: Gate) -> Result<TaskSpec> {
        let output = match &self.output {
            OutputSpec::Count([f, t]) => OutputMode::Count { on_false: *f, on_true: *t },
            OutputSpec::Train([f, t]) => OutputMode::Train { on_false: f.resolve()?, on_true: t.resolve()? },
        };
        let spec = TaskSpec {
            gate,
            input_false: self.inputs[0].resolve()?,
            input_true: self.inputs[1].resolve()?,
            output,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Short label such as `001/011->0/1`.
    pub fn label(&self) -> String {
        let code = |c: &CodeSpec| match c {
            CodeSpec::Bits(b) => b.clone(),
            CodeSpec::Padded { bits, pad_left, pad_right } => format!("{pad_left}+{bits}+{pad_right}"),
        };
        let out = match &self.output {
            OutputSpec::Count([f, t]) => format!("{f}/{t}"),
            OutputSpec::Train([f, t]) => format!("{}/{}", code(f), code(t)),
        };
        format!("{}/{}->{}", code(&self.inputs[0]), code(&self.inputs[1]), out)
    }
}

/// One fully specified experimental condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub gate: Gate,
    pub encoding: Encoding,
    pub mask: ParamMask,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_clip: Option<ClipRange>,
    /// Afterpotential mode; when absent it follows whether the mask
    /// contains the afterpotential scale.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub afterpotential: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_noise: Option<InputNoiseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_noise: Option<WeightNoiseSpec>,
}

impl Condition {
    pub fn label(&self) -> String {
        let mut s = format!("{} {} {}", self.gate, self.encoding.label(), self.mask);
        if let Some(c) = self.weight_clip {
            s += &format!(" W[{},{}]", c.min, c.max);
        }
        if let Some(n) = self.input_noise {
            s += &format!(" p={} sigma={}", n.insertion_prob, n.jitter_sigma);
        }
        if let Some(n) = self.weight_noise {
            s += &format!(" sigma_w={} R={}", n.sigma, n.replicates);
        }
        s
    }

    /// Evolution settings of this condition on top of `base`.
    pub fn evolution(&self, base: &EvolutionConfig) -> EvolutionConfig {
        let mut c = base.clone();
        c.mask = self.mask;
        if let Some(w) = self.weight_clip {
            c.clip.weight = w;
        }
        c.constants.ap_enabled = self.afterpotential.unwrap_or(self.mask.contains(ParamKind::Afterpotential));
        c
    }

    pub fn task(&self) -> Result<TaskSpec> {
        self.encoding.task(self.gate)
    }
}

/// Axes whose cartesian product forms the conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axes {
    pub gates: Vec<Gate>,
    pub encodings: Vec<Encoding>,
    pub masks: Vec<ParamMask>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weight_clips: Vec<ClipRange>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub input_noise: Vec<InputNoiseSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weight_noise: Vec<WeightNoiseSpec>,
}

impl Axes {
    pub fn expand(&self) -> Vec<Condition> {
        fn or_none<T: Copy>(v: &[T]) -> Vec<Option<T>> {
            if v.is_empty() {
                vec![None]
            } else {
                v.iter().copied().map(Some).collect()
            }
        }
        let mut out = Vec::new();
        for encoding in &self.encodings {
            for &gate in &self.gates {
                for weight_clip in or_none(&self.weight_clips) {
                    for &mask in &self.masks {
                        for input_noise in or_none(&self.input_noise) {
                            for weight_noise in or_none(&self.weight_noise) {
                                out.push(Condition {
                                    gate,
                                    encoding: encoding.clone(),
                                    mask,
                                    weight_clip,
                                    afterpotential: None,
                                    input_noise,
                                    weight_noise,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// A grid experiment as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    /// Master seed; every trial seed derives from it.
    #[serde(default)]
    pub seed: u64,
    /// Trials per cell.
    pub trials: u32,
    #[serde(default)]
    pub topology: NetworkTopology,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub loss: LossConfig,
    /// Fixed noise draws used to score each generation's champion in noisy
    /// cells.
    #[serde(default = "default_assessment_draws")]
    pub assessment_draws: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Axes>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conditions: Vec<Condition>,
}

pub const DEFAULT_ASSESSMENT_DRAWS: u32 = 100;

fn default_assessment_draws() -> u32 {
    DEFAULT_ASSESSMENT_DRAWS
}

impl GridConfig {
    pub fn new(name: &str, trials: u32, evolution: EvolutionConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: name.to_string(),
            seed: 0,
            trials,
            topology: NetworkTopology::default(),
            evolution,
            loss: LossConfig::default(),
            assessment_draws: DEFAULT_ASSESSMENT_DRAWS,
            axes: None,
            conditions: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.check_version()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises") + "\n"
    }

    fn check_version(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        Ok(())
    }

    /// Explicit conditions first, then the expanded axes.
    pub fn cells(&self) -> Vec<Condition> {
        let mut cells = self.conditions.clone();
        if let Some(axes) = &self.axes {
            cells.extend(axes.expand());
        }
        cells
    }

    /// Checks every cell up front so that a bad cell fails before any run.
    pub fn validate(&self) -> Result<()> {
        self.check_version()?;
        for (i, cell) in self.cells().iter().enumerate() {
            let ctx = |e: chronoevo_core::Error| Error::Config(format!("cell {i} ({}): {e}", cell.label()));
            let task = cell.task()?.cases().map_err(ctx)?;
            cell.evolution(&self.evolution).validate_for(&task).map_err(ctx)?;
            if let Some(n) = cell.input_noise {
                n.validate().map_err(ctx)?;
            }
            if let Some(n) = cell.weight_noise {
                n.validate().map_err(ctx)?;
            }
        }
        if self.assessment_draws == 0 {
            return Err(Error::Config("assessment_draws must be at least 1".into()));
        }
        if self.topology.num_inputs() != 2 || self.topology.num_outputs() != 1 {
            return Err(Error::Config("logic tasks need a topology with 2 inputs and 1 output".into()));
        }
        Ok(())
    }
}
