//! Truncation-selection evolution strategy.
//!
//! Each generation the whole population is evaluated, ranked by loss (ties
//! broken by position), the best `elite_count` genomes are carried over
//! unchanged, and the rest of the next population is filled with Gaussian
//! mutants of the elites, assigned round-robin. Mutation only touches the
//! masked parameter kinds and clips each kind to its range.
//!
//! Every random draw comes from a stream keyed by `(seed, generation,
//! child)`, so a run is reproducible regardless of how evaluation is
//! parallelised.

use alloc::vec::Vec;
use core::time::Duration;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::encoding::ResolvedTask;
use crate::error::{Error, Result};
use crate::genome::{ClipRange, Genome, ModelConstants, ParamKind, ParamMask, PerKind};
use crate::loss::{check_shape, LossConfig, TaskFitness};
use crate::model::{delay_steps, Simulator};
use crate::rng::{domain, stream};
use crate::topology::NetworkTopology;
use crate::TaskSpec;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub elite_count: usize,
    /// Scale of the unit Gaussian added to each kind on mutation.
    pub mutation_rate: PerKind<f64>,
    /// Generation budget; generation 0 is the random initial population.
    pub max_generations: u32,
    pub clip: PerKind<ClipRange>,
    /// Kinds evolution may change.
    pub mask: ParamMask,
    /// Values of kinds outside the mask.
    pub fixed: PerKind<f64>,
    pub constants: ModelConstants,
    pub seed: u64,
    /// A best loss at or below this counts as solved.
    pub zero_loss_tol: f64,
    /// End the run at the first solved generation. Noisy fitness turns this
    /// off, since one lucky draw says little about the genome.
    pub stop_on_solve: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population_size: 100_000,
            elite_count: 1_000,
            mutation_rate: PerKind { weight: 0.3, delay: 1.0, time_constant: 1.0, afterpotential: 0.3 },
            max_generations: 20,
            clip: PerKind {
                weight: ClipRange::new(-2.0, 2.0),
                delay: ClipRange::new(-5.0, 15.0),
                time_constant: ClipRange::new(1.0, 20.0),
                afterpotential: ClipRange::new(-2.0, 0.0),
            },
            mask: ParamMask::of(&[ParamKind::Weight, ParamKind::Delay, ParamKind::TimeConstant]),
            fixed: PerKind { weight: 1.0, delay: 0.0, time_constant: 10.0, afterpotential: 0.0 },
            constants: ModelConstants::default(),
            seed: 0,
            zero_loss_tol: 1e-12,
            stop_on_solve: true,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: alloc::string::String| Err(Error::Config(msg));
        if self.elite_count == 0 || self.elite_count >= self.population_size {
            return fail(alloc::format!(
                "need 0 < elite_count ({}) < population_size ({})",
                self.elite_count,
                self.population_size
            ));
        }
        if self.max_generations == 0 {
            return fail("max_generations must be at least 1".into());
        }
        if !(self.zero_loss_tol >= 0.0) {
            return fail("zero_loss_tol must be non-negative".into());
        }
        self.constants.validate()?;
        for kind in ParamKind::ALL {
            let clip = self.clip.get(kind);
            if !(clip.min.is_finite() && clip.max.is_finite() && clip.min < clip.max) {
                return fail(alloc::format!("{kind:?} clip range [{}, {}] is degenerate", clip.min, clip.max));
            }
            let rate = *self.mutation_rate.get(kind);
            if !(rate.is_finite() && rate >= 0.0) {
                return fail(alloc::format!("{kind:?} mutation rate must be finite and non-negative"));
            }
            let fixed = *self.fixed.get(kind);
            if !self.mask.contains(kind) && !clip.contains(fixed) {
                return fail(alloc::format!("fixed {kind:?} value {fixed} lies outside its clip range"));
            }
        }
        if self.clip.time_constant.min <= 0.0 {
            return fail("time constant clip range must stay positive".into());
        }
        if self.clip.afterpotential.max > 0.0 {
            return fail("afterpotential clip range must not exceed zero".into());
        }
        Ok(())
    }

    /// Longest effective delay any genome of this run can have.
    pub fn max_reachable_delay(&self) -> u32 {
        let delta = if self.mask.contains(ParamKind::Delay) { self.clip.delay.max } else { self.fixed.delay };
        delay_steps(self.constants.default_delay, delta, self.constants.max_delay)
    }

    /// Checks that no genome of this run can push an input arrival out of
    /// the task window.
    pub fn validate_for(&self, task: &ResolvedTask) -> Result<()> {
        self.validate()?;
        let max_delay = self.max_reachable_delay();
        for case in &task.cases {
            for input in &case.inputs {
                if let Some(&last) = input.times().last() {
                    if last + max_delay >= task.window {
                        return Err(Error::Config(alloc::format!(
                            "input spike at {last} plus delay {max_delay} overflows the {}-step window",
                            task.window
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Draws one genome: masked kinds uniform in their clip range, the rest at
/// their fixed value.
pub fn random_genome<R: Rng + ?Sized>(config: &EvolutionConfig, topology: &NetworkTopology, rng: &mut R) -> Genome {
    let mut g = Genome::uniform(topology.clone(), config.constants, config.fixed);
    for kind in config.mask.kinds() {
        let clip = *config.clip.get(kind);
        for x in g.params_mut(kind) {
            *x = rng.random_range(clip.min..=clip.max);
        }
    }
    g
}

pub fn init_population(config: &EvolutionConfig, topology: &NetworkTopology) -> Vec<Genome> {
    (0..config.population_size)
        .map(|i| random_genome(config, topology, &mut stream(config.seed, domain::INIT, 0, i as u64)))
        .collect()
}

/// `parent + rate * N(0, 1)` on masked kinds, clipped per kind.
pub fn mutate<R: Rng + ?Sized>(parent: &Genome, config: &EvolutionConfig, rng: &mut R) -> Genome {
    let mut child = parent.clone();
    for kind in config.mask.kinds() {
        let rate = *config.mutation_rate.get(kind);
        let clip = *config.clip.get(kind);
        for x in child.params_mut(kind) {
            let z: f64 = StandardNormal.sample(rng);
            *x = clip.clip(*x + rate * z);
        }
    }
    child
}

/// Identifies one fitness evaluation; noisy fitness functions key their
/// random streams on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalKey {
    pub generation: u32,
    pub index: usize,
}

/// Loss of a single genome.
pub trait Fitness {
    fn loss(&self, genome: &Genome, key: EvalKey, sim: &mut Simulator) -> f64;
}

impl Fitness for TaskFitness {
    fn loss(&self, genome: &Genome, _key: EvalKey, sim: &mut Simulator) -> f64 {
        sim.load(genome);
        self.evaluate_loaded(sim).map_or(f64::INFINITY, |l| l.value)
    }
}

impl<F: Fitness + ?Sized> Fitness for &F {
    fn loss(&self, genome: &Genome, key: EvalKey, sim: &mut Simulator) -> f64 {
        (**self).loss(genome, key, sim)
    }
}

/// Scores a whole population.
pub trait Evaluator {
    fn evaluate(&mut self, generation: u32, population: &[Genome], losses: &mut [f64]);
}

/// Evaluates genomes one after another on the calling thread.
#[derive(Debug, Clone)]
pub struct SequentialEvaluator<F> {
    fitness: F,
    sim: Simulator,
}

impl<F: Fitness> SequentialEvaluator<F> {
    pub fn new(fitness: F) -> Self {
        Self { fitness, sim: Simulator::new() }
    }
}

impl<F: Fitness> Evaluator for SequentialEvaluator<F> {
    fn evaluate(&mut self, generation: u32, population: &[Genome], losses: &mut [f64]) {
        for (index, (genome, loss)) in population.iter().zip(losses.iter_mut()).enumerate() {
            *loss = self.fitness.loss(genome, EvalKey { generation, index }, &mut self.sim);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationReport {
    pub generation: u32,
    pub best_loss: f64,
    /// Minimum, lower quartile, median, upper quartile and maximum loss.
    pub quantiles: [f64; 5],
    pub best: Genome,
    /// Time since the run started, when a clock was supplied.
    pub wall_time: Option<Duration>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub reports: Vec<GenerationReport>,
    /// Lowest-loss genome seen in any generation (earliest on ties).
    pub best: Genome,
    pub best_loss: f64,
    /// First generation whose best loss reached the zero-loss tolerance.
    pub solved_at: Option<u32>,
    /// Last evaluated population, best first, with its losses.
    pub final_population: Vec<Genome>,
    pub final_losses: Vec<f64>,
}

impl RunOutcome {
    /// Genomes of the last generation that reached zero loss.
    pub fn solutions(&self, tol: f64) -> impl Iterator<Item = &Genome> {
        self.final_population
            .iter()
            .zip(&self.final_losses)
            .take_while(move |(_, &l)| l <= tol)
            .map(|(g, _)| g)
    }
}

/// Ranks `0..losses.len()` by `(loss, index)`.
pub fn rank(losses: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..losses.len()).collect();
    order.sort_unstable_by(|&a, &b| losses[a].total_cmp(&losses[b]).then(a.cmp(&b)));
    order
}

fn quantiles(sorted: &[f64]) -> [f64; 5] {
    let n = sorted.len();
    let at = |p: f64| sorted[libm::round(p * (n - 1) as f64) as usize];
    [at(0.0), at(0.25), at(0.5), at(0.75), at(1.0)]
}

/// One evolutionary run.
pub struct Evolution<'a> {
    config: EvolutionConfig,
    topology: NetworkTopology,
    clock: Option<&'a dyn Fn() -> Duration>,
}

impl<'a> Evolution<'a> {
    pub fn new(config: EvolutionConfig, topology: NetworkTopology) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, topology, clock: None })
    }

    /// Supplies a monotonic clock used to stamp reports.
    pub fn with_clock(mut self, clock: &'a dyn Fn() -> Duration) -> Self {
        self.clock = Some(clock);
        self
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.config
    }

    /// Runs until the budget is spent or the best loss reaches the zero-loss
    /// tolerance, calling `on_report` after every generation.
    pub fn run<E: Evaluator + ?Sized>(
        &self,
        evaluator: &mut E,
        mut on_report: impl FnMut(&GenerationReport),
    ) -> RunOutcome {
        let config = &self.config;
        let start = self.clock.map(|c| c());
        let mut population = init_population(config, &self.topology);
        let mut losses = alloc::vec![0.0; population.len()];
        let mut reports = Vec::new();
        let mut best: Option<(f64, Genome)> = None;
        let mut solved_at = None;

        for generation in 0..config.max_generations {
            evaluator.evaluate(generation, &population, &mut losses);
            let order = rank(&losses);
            let sorted: Vec<f64> = order.iter().map(|&i| losses[i]).collect();
            let best_loss = sorted[0];
            let champion = &population[order[0]];
            if best.as_ref().map_or(true, |(l, _)| best_loss < *l) {
                best = Some((best_loss, champion.clone()));
            }
            let report = GenerationReport {
                generation,
                best_loss,
                quantiles: quantiles(&sorted),
                best: champion.clone(),
                wall_time: self.clock.zip(start).map(|(c, s)| c().saturating_sub(s)),
            };
            on_report(&report);
            reports.push(report);

            let last = generation + 1 == config.max_generations;
            if best_loss <= config.zero_loss_tol && solved_at.is_none() {
                solved_at = Some(generation);
            }
            if (solved_at.is_some() && config.stop_on_solve) || last {
                let final_population = order.iter().map(|&i| population[i].clone()).collect();
                let (best_loss, best) = best.expect("at least one generation ran");
                return RunOutcome {
                    reports,
                    best,
                    best_loss,
                    solved_at,
                    final_population,
                    final_losses: sorted,
                };
            }
            population = next_generation(config, &population, &order, generation);
        }
        unreachable!("max_generations >= 1 is validated")
    }
}

/// Elites in rank order, then `P - E` mutants assigned round-robin.
pub fn next_generation(
    config: &EvolutionConfig,
    population: &[Genome],
    order: &[usize],
    generation: u32,
) -> Vec<Genome> {
    let elites = &order[..config.elite_count];
    let mut next = Vec::with_capacity(config.population_size);
    next.extend(elites.iter().map(|&i| population[i].clone()));
    for child in 0..config.population_size - config.elite_count {
        let parent = &population[elites[child % elites.len()]];
        let mut rng = stream(config.seed, domain::MUTATION, generation as u64, child as u64);
        next.push(mutate(parent, config, &mut rng));
    }
    next
}

/// Evolves `topology` on `spec` with sequential evaluation.
pub fn run(config: &EvolutionConfig, topology: &NetworkTopology, spec: &TaskSpec) -> Result<RunOutcome> {
    let fitness = TaskFitness::new(spec, LossConfig::default())?;
    config.validate_for(fitness.task())?;
    check_shape(&Genome::uniform(topology.clone(), config.constants, config.fixed))?;
    let evolution = Evolution::new(config.clone(), topology.clone())?;
    Ok(evolution.run(&mut SequentialEvaluator::new(fitness), |_| {}))
}
