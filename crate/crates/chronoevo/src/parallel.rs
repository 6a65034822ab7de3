//! Multi-threaded population evaluation.

use chronoevo_core::evolution::{EvalKey, Evaluator, Fitness};
use chronoevo_core::{Genome, Simulator};
use rayon::prelude::*;

/// Evaluates a population on a dedicated thread pool. Each worker keeps its
/// own [`Simulator`]. Losses do not depend on the worker count because
/// fitness functions key any randomness on the genome's [`EvalKey`].
pub struct ParallelEvaluator<F> {
    fitness: F,
    pool: rayon::ThreadPool,
}

impl<F: Fitness + Sync> ParallelEvaluator<F> {
    /// `workers == 0` picks the number of available cores.
    pub fn new(fitness: F, workers: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("chronoevo-eval-{i}"))
            .build()
            .expect("thread pool");
        Self { fitness, pool }
    }

    pub fn fitness(&self) -> &F {
        &self.fitness
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl<F: Fitness + Sync> Evaluator for ParallelEvaluator<F> {
    fn evaluate(&mut self, generation: u32, population: &[Genome], losses: &mut [f64]) {
        let fitness = &self.fitness;
        self.pool.install(|| {
            population
                .par_iter()
                .zip(losses.par_iter_mut())
                .enumerate()
                .with_min_len(64)
                .for_each_init(Simulator::new, |sim, (index, (genome, loss))| {
                    *loss = fitness.loss(genome, EvalKey { generation, index }, sim);
                });
        });
    }
}
