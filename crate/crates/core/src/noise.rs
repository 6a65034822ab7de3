//! Input noise (spike insertion and jitter) and weight uncertainty.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::evolution::{EvalKey, Fitness};
use crate::genome::Genome;
use crate::loss::{aggregate, TaskFitness};
use crate::model::Simulator;
use crate::rng::{domain, stream};
use crate::spike::SpikeTrain;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InputNoiseSpec {
    /// Chance that a silent step gains a spike.
    pub insertion_prob: f64,
    /// Standard deviation of the Gaussian jitter on each spike time, ms.
    pub jitter_sigma: f64,
}

impl InputNoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.insertion_prob) {
            return Err(Error::Config("insertion probability must lie in [0, 1]".into()));
        }
        if !(self.jitter_sigma >= 0.0 && self.jitter_sigma.is_finite()) {
            return Err(Error::Config("jitter sigma must be finite and non-negative".into()));
        }
        Ok(())
    }

    pub fn is_clean(&self) -> bool {
        self.insertion_prob == 0.0 && self.jitter_sigma == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightNoiseSpec {
    /// Standard deviation of the additive weight perturbation, mV.
    pub sigma: f64,
    /// Noisy copies averaged per evaluation.
    pub replicates: u32,
}

impl Default for WeightNoiseSpec {
    fn default() -> Self {
        Self { sigma: 0.0, replicates: 100 }
    }
}

impl WeightNoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("weight noise needs at least one replicate".into()));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config("weight noise sigma must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Jitters every spike by `round(N(0, sigma^2))` (clamped to the window),
/// then adds a spike to each still-silent step with the insertion
/// probability. Colliding spikes merge.
pub fn perturb_input<R: Rng + ?Sized>(train: &SpikeTrain, spec: &InputNoiseSpec, rng: &mut R) -> SpikeTrain {
    let window = train.window();
    if window == 0 {
        return train.clone();
    }
    let mut occupied = alloc::vec![false; window as usize];
    let last = (window - 1) as f64;
    for &t in train.times() {
        let moved = if spec.jitter_sigma > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            (t as f64 + libm::round(spec.jitter_sigma * z)).clamp(0.0, last) as u32
        } else {
            t
        };
        occupied[moved as usize] = true;
    }
    if spec.insertion_prob > 0.0 {
        for slot in occupied.iter_mut().filter(|s| !**s) {
            *slot = rng.random::<f64>() < spec.insertion_prob;
        }
    }
    let times: Vec<u32> = (0..window).filter(|&t| occupied[t as usize]).collect();
    SpikeTrain::new(window, times).expect("built from a dense mask")
}

/// Fitness under fresh input noise on every evaluation; targets stay clean.
#[derive(Debug, Clone)]
pub struct InputNoiseFitness {
    base: TaskFitness,
    spec: InputNoiseSpec,
    seed: u64,
}

impl InputNoiseFitness {
    pub fn new(base: TaskFitness, spec: InputNoiseSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        Ok(Self { base, spec, seed })
    }
}

impl Fitness for InputNoiseFitness {
    fn loss(&self, genome: &Genome, key: EvalKey, sim: &mut Simulator) -> f64 {
        if self.spec.is_clean() {
            return self.base.loss(genome, key, sim);
        }
        let mut rng = stream(self.seed, domain::INPUT_NOISE, key.generation as u64, key.index as u64);
        sim.load(genome);
        let mut per_case = [0.0; 4];
        for (k, case) in self.base.task().cases.iter().enumerate() {
            let noisy = [
                perturb_input(&case.inputs[0], &self.spec, &mut rng),
                perturb_input(&case.inputs[1], &self.spec, &mut rng),
            ];
            per_case[k] = match self.base.noisy_case_loss(sim, &noisy, &case.target) {
                Ok(l) => l,
                Err(_) => return f64::INFINITY,
            };
        }
        aggregate(&per_case, self.base.config().aggregation)
    }
}

/// Mean task loss over `replicates` copies of `genome` whose weights (only)
/// get independent `N(0, sigma^2)` offsets. Offsets are not clipped.
pub fn noisy_genome_loss<R: Rng + ?Sized>(
    genome: &Genome,
    fitness: &TaskFitness,
    spec: &WeightNoiseSpec,
    rng: &mut R,
    sim: &mut Simulator,
) -> Result<f64> {
    spec.validate()?;
    if spec.sigma == 0.0 {
        return fitness.evaluate(sim, genome).map(|l| l.value);
    }
    let mut copy = genome.clone();
    let mut total = 0.0;
    for _ in 0..spec.replicates {
        for (w, &w0) in copy.weights.iter_mut().zip(&genome.weights) {
            let z: f64 = StandardNormal.sample(rng);
            *w = w0 + spec.sigma * z;
        }
        total += fitness.evaluate(sim, &copy)?.value;
    }
    Ok(total / spec.replicates as f64)
}

/// Fitness averaged over weight-perturbed replicates, redrawn every
/// evaluation (elites included).
#[derive(Debug, Clone)]
pub struct WeightNoiseFitness {
    base: TaskFitness,
    spec: WeightNoiseSpec,
    seed: u64,
}

impl WeightNoiseFitness {
    pub fn new(base: TaskFitness, spec: WeightNoiseSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        Ok(Self { base, spec, seed })
    }
}

impl Fitness for WeightNoiseFitness {
    fn loss(&self, genome: &Genome, key: EvalKey, sim: &mut Simulator) -> f64 {
        let mut rng = stream(self.seed, domain::WEIGHT_NOISE, key.generation as u64, key.index as u64);
        noisy_genome_loss(genome, &self.base, &self.spec, &mut rng, sim).unwrap_or(f64::INFINITY)
    }
}

/// Generation index reserved for assessment draws. Evolution never reaches
/// it, so assessment noise is disjoint from training noise.
pub const ASSESSMENT_GENERATION: u32 = u32::MAX;

/// Mean loss of `genome` over `draws` fixed noise draws.
///
/// Under noise the best loss of a generation is the minimum over many
/// independent draws and is biased low. Scoring each generation's champion
/// on the same fixed draws gives an unbiased, comparable figure.
pub fn assess<F: Fitness + ?Sized>(fitness: &F, genome: &Genome, draws: u32, sim: &mut Simulator) -> f64 {
    let draws = draws.max(1);
    let total: f64 = (0..draws)
        .map(|k| fitness.loss(genome, EvalKey { generation: ASSESSMENT_GENERATION, index: k as usize }, sim))
        .sum();
    total / draws as f64
}
