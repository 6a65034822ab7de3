//! Task losses: squared spike-count error, and mean squared error between
//! spike trains filtered by a causal exponential kernel.

use crate::encoding::{ResolvedTask, TaskSpec, Target};
use crate::error::{Error, Result};
use crate::genome::Genome;
use crate::model::Simulator;
use crate::spike::SpikeTrain;

/// Kernel time constant for spike-train targets, ms.
pub const DEFAULT_KERNEL_TAU: f64 = 5.0;

/// Scale of the exponential kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum KernelNorm {
    /// `k(0) = 1`.
    #[default]
    UnitHeight,
    /// The sampled kernel sums to one.
    UnitArea,
}

/// How the four per-case losses are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Aggregation {
    #[default]
    Mean,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct LossConfig {
    pub kernel_tau: f64,
    pub kernel_norm: KernelNorm,
    pub aggregation: Aggregation,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { kernel_tau: DEFAULT_KERNEL_TAU, kernel_norm: KernelNorm::UnitHeight, aggregation: Aggregation::Mean }
    }
}

/// Loss of one genome on one task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossValue {
    pub value: f64,
    /// FF, FT, TF, TT.
    pub per_case: [f64; 4],
}

/// `(|output| - target)^2`.
pub fn count_loss(output: &SpikeTrain, target_count: u32) -> f64 {
    count_loss_n(output.len(), target_count)
}

fn count_loss_n(spikes: usize, target: u32) -> f64 {
    let d = spikes as f64 - target as f64;
    d * d
}

/// Kernel-filtered MSE with the default 5 ms unit-height kernel.
pub fn train_loss(output: &SpikeTrain, target: &SpikeTrain) -> Result<f64> {
    train_loss_with(output, target, &LossConfig::default())
}

pub fn train_loss_with(output: &SpikeTrain, target: &SpikeTrain, config: &LossConfig) -> Result<f64> {
    if output.window() != target.window() {
        return Err(Error::WindowMismatch { left: output.window(), right: target.window() });
    }
    if !(config.kernel_tau > 0.0) {
        return Err(Error::Domain("kernel time constant must be positive".into()));
    }
    Ok(filtered_mse(output.window(), output.times(), target.times(), config))
}

/// Both trains are filtered with `k(t) = exp(-t / tau)`, `t >= 0`, sampled
/// on the step grid; returns the mean squared difference over the window.
fn filtered_mse(window: u32, a: &[u32], b: &[u32], config: &LossConfig) -> f64 {
    if window == 0 {
        return 0.0;
    }
    let decay = libm::exp(-1.0 / config.kernel_tau);
    let height = match config.kernel_norm {
        KernelNorm::UnitHeight => 1.0,
        KernelNorm::UnitArea => 1.0 - decay,
    };
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let (mut ia, mut ib) = (0, 0);
    let mut sum = 0.0;
    for t in 0..window {
        fa *= decay;
        fb *= decay;
        if a.get(ia) == Some(&t) {
            fa += height;
            ia += 1;
        }
        if b.get(ib) == Some(&t) {
            fb += height;
            ib += 1;
        }
        let d = fa - fb;
        sum += d * d;
    }
    sum / window as f64
}

/// Scores genomes on a resolved task, reusing one [`Simulator`].
#[derive(Debug, Clone)]
pub struct TaskFitness {
    task: ResolvedTask,
    config: LossConfig,
}

impl TaskFitness {
    pub fn new(spec: &TaskSpec, config: LossConfig) -> Result<Self> {
        Ok(Self { task: spec.cases()?, config })
    }

    pub fn from_resolved(task: ResolvedTask, config: LossConfig) -> Self {
        Self { task, config }
    }

    pub fn task(&self) -> &ResolvedTask {
        &self.task
    }

    pub fn config(&self) -> &LossConfig {
        &self.config
    }

    /// Loss of the output neuron's response to `inputs` for one case.
    pub fn case_loss(
        &self,
        sim: &mut Simulator,
        inputs: &[SpikeTrain],
        target: &Target,
    ) -> Result<f64> {
        sim.run(inputs, self.task.window)?;
        Ok(self.score_output(sim, target))
    }

    /// [`TaskFitness::case_loss`] for perturbed inputs, whose late spikes may
    /// arrive past the window.
    pub fn noisy_case_loss(&self, sim: &mut Simulator, inputs: &[SpikeTrain], target: &Target) -> Result<f64> {
        sim.run_truncated(inputs, self.task.window)?;
        Ok(self.score_output(sim, target))
    }

    fn score_output(&self, sim: &Simulator, target: &Target) -> f64 {
        let out = sim.output(0);
        match target {
            Target::Count(n) => count_loss_n(out.len(), *n),
            Target::Train(t) => filtered_mse(self.task.window, out, t.times(), &self.config),
        }
    }

    /// Loss with per-case breakdown. `sim` must already hold `genome`.
    pub fn evaluate_loaded(&self, sim: &mut Simulator) -> Result<LossValue> {
        let mut per_case = [0.0; 4];
        for (k, case) in self.task.cases.iter().enumerate() {
            per_case[k] = self.case_loss(sim, &case.inputs, &case.target)?;
        }
        Ok(LossValue { value: aggregate(&per_case, self.config.aggregation), per_case })
    }

    pub fn evaluate(&self, sim: &mut Simulator, genome: &Genome) -> Result<LossValue> {
        check_shape(genome)?;
        sim.load(genome);
        self.evaluate_loaded(sim)
    }
}

pub(crate) fn aggregate(per_case: &[f64; 4], aggregation: Aggregation) -> f64 {
    let sum: f64 = per_case.iter().sum();
    match aggregation {
        Aggregation::Mean => sum / 4.0,
        Aggregation::Sum => sum,
    }
}

pub(crate) fn check_shape(genome: &Genome) -> Result<()> {
    let t = &genome.topology;
    if t.num_inputs() != 2 || t.num_outputs() != 1 {
        return Err(Error::Task(alloc::format!(
            "logic tasks need 2 inputs and 1 output, topology is {:?}",
            t.layer_sizes()
        )));
    }
    Ok(())
}

/// Simulates all four cases and aggregates their losses.
pub fn genome_loss(genome: &Genome, spec: &TaskSpec) -> Result<LossValue> {
    genome.validate()?;
    let fitness = TaskFitness::new(spec, LossConfig::default())?;
    fitness.evaluate(&mut Simulator::new(), genome)
}
