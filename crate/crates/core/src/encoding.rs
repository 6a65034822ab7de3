//! Burst codes, logic gates and the four input cases of a task.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::spike::SpikeTrain;

/// Longest silent padding on either side of a burst, ms.
pub const MAX_PAD: u32 = 20;
/// Most spikes an input burst may carry.
pub const MAX_INPUT_SPIKES: usize = 5;

/// A single burst: one symbol per step, padded with silence on both sides.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawCode", into = "RawCode"))]
pub struct BitCode {
    bits: Vec<bool>,
    pad_left: u32,
    pad_right: u32,
}

impl BitCode {
    pub fn new(bits: Vec<bool>, pad_left: u32, pad_right: u32) -> Result<Self> {
        if pad_left > MAX_PAD || pad_right > MAX_PAD {
            return Err(Error::Task(alloc::format!(
                "padding ({pad_left}, {pad_right}) exceeds {MAX_PAD} steps"
            )));
        }
        Ok(Self { bits, pad_left, pad_right })
    }

    /// Parses a `0`/`1` string such as `"011"`.
    pub fn parse(bits: &str, pad_left: u32, pad_right: u32) -> Result<Self> {
        let bits = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Task(alloc::format!("bad bit {c:?} in code {bits:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits, pad_left, pad_right)
    }

    /// `bits` with the default 20-step padding on both sides.
    pub fn padded(bits: &str) -> Result<Self> {
        Self::parse(bits, MAX_PAD, MAX_PAD)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn pad_left(&self) -> u32 {
        self.pad_left
    }

    pub fn pad_right(&self) -> u32 {
        self.pad_right
    }

    pub fn num_spikes(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Window length of the rendered code.
    pub fn window(&self) -> u32 {
        self.pad_left + self.bits.len() as u32 + self.pad_right
    }

    /// Bit `k` set becomes a spike at `pad_left + k`.
    pub fn render(&self) -> SpikeTrain {
        let times = self
            .bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| self.pad_left + k as u32)
            .collect();
        SpikeTrain::new(self.window(), times).expect("rendered codes are sorted and in window")
    }

    /// Renders into a window at least as long as the code's own; the extra
    /// steps are silence on the right.
    pub fn render_in(&self, window: u32) -> Result<SpikeTrain> {
        self.render().with_window(window)
    }
}

impl fmt::Display for BitCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitCode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::padded(s)
    }
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct RawCode {
    bits: String,
    #[serde(default = "default_pad")]
    pad_left: u32,
    #[serde(default = "default_pad")]
    pad_right: u32,
}

#[cfg(feature = "serde")]
fn default_pad() -> u32 {
    MAX_PAD
}

#[cfg(feature = "serde")]
impl TryFrom<RawCode> for BitCode {
    type Error = Error;
    fn try_from(raw: RawCode) -> Result<Self> {
        BitCode::parse(&raw.bits, raw.pad_left, raw.pad_right)
    }
}

#[cfg(feature = "serde")]
impl From<BitCode> for RawCode {
    fn from(code: BitCode) -> Self {
        RawCode { bits: alloc::format!("{code}"), pad_left: code.pad_left, pad_right: code.pad_right }
    }
}

/// Two-input boolean gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "UPPERCASE"))]
pub enum Gate {
    Xor,
    Xnor,
    Or,
    Nor,
    And,
    Nand,
}

impl Gate {
    pub const ALL: [Gate; 6] = [Gate::Xor, Gate::Xnor, Gate::Or, Gate::Nor, Gate::And, Gate::Nand];

    pub fn eval(self, a: bool, b: bool) -> bool {
        match self {
            Gate::Xor => a ^ b,
            Gate::Xnor => !(a ^ b),
            Gate::Or => a | b,
            Gate::Nor => !(a | b),
            Gate::And => a & b,
            Gate::Nand => !(a & b),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::Xor => "XOR",
            Gate::Xnor => "XNOR",
            Gate::Or => "OR",
            Gate::Nor => "NOR",
            Gate::And => "AND",
            Gate::Nand => "NAND",
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Gate::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Task(alloc::format!("unknown gate {s:?}")))
    }
}

/// How the output neuron's response is scored, with the target for each
/// truth value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OutputMode {
    /// Only the number of output spikes matters.
    Count { on_false: u32, on_true: u32 },
    /// The output must reproduce a burst.
    Train { on_false: BitCode, on_true: BitCode },
}

impl fmt::Display for OutputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputMode::Count { on_false, on_true } => write!(f, "{on_false}/{on_true}"),
            OutputMode::Train { on_false, on_true } => write!(
                f,
                "{}+{}/{}+{}",
                on_false.pad_left(),
                on_false,
                on_true.pad_left(),
                on_true
            ),
        }
    }
}

/// A logic task: gate, input codes for false/true, and output targets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TaskSpec {
    pub gate: Gate,
    pub input_false: BitCode,
    pub input_true: BitCode,
    pub output: OutputMode,
}

/// Expected response of the output neuron for one case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Count(u32),
    Train(SpikeTrain),
}

/// One row of the gate's truth table, rendered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case {
    pub a: bool,
    pub b: bool,
    pub inputs: [SpikeTrain; 2],
    pub target: Target,
}

impl Case {
    /// `FF`, `FT`, `TF` or `TT`.
    pub fn label(&self) -> &'static str {
        match (self.a, self.b) {
            (false, false) => "FF",
            (false, true) => "FT",
            (true, false) => "TF",
            (true, true) => "TT",
        }
    }
}

/// All four cases of a task in one shared window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedTask {
    pub window: u32,
    pub cases: [Case; 4],
}

impl TaskSpec {
    pub fn count(gate: Gate, input_false: &str, input_true: &str, on_false: u32, on_true: u32) -> Result<Self> {
        let spec = Self {
            gate,
            input_false: BitCode::padded(input_false)?,
            input_true: BitCode::padded(input_true)?,
            output: OutputMode::Count { on_false, on_true },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn train(gate: Gate, input_false: &str, input_true: &str, on_false: BitCode, on_true: BitCode) -> Result<Self> {
        let spec = Self {
            gate,
            input_false: BitCode::padded(input_false)?,
            input_true: BitCode::padded(input_true)?,
            output: OutputMode::Train { on_false, on_true },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for code in [&self.input_false, &self.input_true] {
            if code.num_spikes() > MAX_INPUT_SPIKES {
                return Err(Error::Task(alloc::format!(
                    "input code {code} has more than {MAX_INPUT_SPIKES} spikes"
                )));
            }
        }
        Ok(())
    }

    /// Shared window: the longest of every rendered code.
    pub fn window(&self) -> u32 {
        let mut w = self.input_false.window().max(self.input_true.window());
        if let OutputMode::Train { on_false, on_true } = &self.output {
            w = w.max(on_false.window()).max(on_true.window());
        }
        w
    }

    /// Last step carrying an input spike, if any code has one.
    pub fn last_input_spike(&self) -> Option<u32> {
        [&self.input_false, &self.input_true]
            .iter()
            .filter_map(|c| c.render().times().last().copied())
            .max()
    }

    /// Enumerates FF, FT, TF, TT; the gate picks each target.
    pub fn cases(&self) -> Result<ResolvedTask> {
        self.validate()?;
        let window = self.window();
        let render = |v: bool| {
            if v {
                self.input_true.render_in(window)
            } else {
                self.input_false.render_in(window)
            }
        };
        let target = |v: bool| -> Result<Target> {
            Ok(match &self.output {
                OutputMode::Count { on_false, on_true } => Target::Count(if v { *on_true } else { *on_false }),
                OutputMode::Train { on_false, on_true } => {
                    Target::Train(if v { on_true } else { on_false }.render_in(window)?)
                }
            })
        };
        let case = |a: bool, b: bool| -> Result<Case> {
            Ok(Case { a, b, inputs: [render(a)?, render(b)?], target: target(self.gate.eval(a, b))? })
        };
        Ok(ResolvedTask {
            window,
            cases: [case(false, false)?, case(false, true)?, case(true, false)?, case(true, true)?],
        })
    }

    /// Compact description, e.g. `XOR 001/011 -> 1/0`.
    pub fn label(&self) -> String {
        alloc::format!("{} {}/{} -> {}", self.gate, self.input_false, self.input_true, self.output)
    }
}

/// Free-function form of [`TaskSpec::cases`].
pub fn task_cases(spec: &TaskSpec) -> Result<ResolvedTask> {
    spec.cases()
}

/// Free-function form of [`BitCode::render`].
pub fn render(code: &BitCode) -> SpikeTrain {
    code.render()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_examples() {
        let t = BitCode::parse("011", 8, 10).unwrap().render();
        assert_eq!(t.times(), &[9, 10]);
        assert_eq!(t.window(), 21);
        assert!(BitCode::parse("000", 3, 7).unwrap().render().is_empty());
        let t = BitCode::parse("10001", 0, 0).unwrap().render();
        assert_eq!(t.times(), &[0, 4]);
        assert_eq!(t.window(), 5);
    }

    #[test]
    fn padding_bounds() {
        assert!(BitCode::parse("1", 21, 0).is_err());
        assert!(BitCode::parse("1", 0, 21).is_err());
        assert!(BitCode::parse("12", 0, 0).is_err());
    }

    #[test]
    fn xor_counts() {
        let spec = TaskSpec::count(Gate::Xor, "001", "011", 0, 1).unwrap();
        let r = spec.cases().unwrap();
        let targets: Vec<_> = r.cases.iter().map(|c| c.target.clone()).collect();
        assert_eq!(
            targets,
            [Target::Count(0), Target::Count(1), Target::Count(1), Target::Count(0)]
        );
        let labels: Vec<_> = r.cases.iter().map(|c| c.label()).collect();
        assert_eq!(labels, ["FF", "FT", "TF", "TT"]);
    }

    #[test]
    fn and_counts() {
        let spec = TaskSpec::count(Gate::And, "001", "011", 1, 2).unwrap();
        let r = spec.cases().unwrap();
        let counts: Vec<_> = r
            .cases
            .iter()
            .map(|c| match c.target {
                Target::Count(n) => n,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(counts, [1, 1, 1, 2]);
    }

    #[test]
    fn xnor_trains_share_the_window() {
        let on_true = BitCode::parse("11", 20, 20).unwrap();
        let on_false = BitCode::parse("01", 20, 20).unwrap();
        let spec = TaskSpec::train(Gate::Xnor, "1", "0011", on_false.clone(), on_true.clone()).unwrap();
        let r = spec.cases().unwrap();
        assert_eq!(r.window, 44);
        assert_eq!(r.cases[0].target, Target::Train(on_true.render_in(44).unwrap()));
        assert_eq!(r.cases[1].target, Target::Train(on_false.render_in(44).unwrap()));
        for c in &r.cases {
            assert!(c.inputs.iter().all(|t| t.window() == 44));
        }
    }

    #[test]
    fn rejects_long_bursts() {
        assert!(TaskSpec::count(Gate::Or, "111111", "1", 0, 1).is_err());
    }
}
