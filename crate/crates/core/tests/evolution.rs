use chronoevo_core::evolution::{self, next_generation, rank, Evaluator, Evolution, SequentialEvaluator};
use chronoevo_core::loss::{LossConfig, TaskFitness};
use chronoevo_core::{EvolutionConfig, Gate, Genome, NetworkTopology, ParamKind, PerKind, TaskSpec};
use proptest::prelude::*;

fn xor() -> TaskSpec {
    TaskSpec::count(Gate::Xor, "001", "011", 0, 1).unwrap()
}

fn small(mask: &str, seed: u64) -> EvolutionConfig {
    EvolutionConfig {
        population_size: 120,
        elite_count: 12,
        max_generations: 8,
        mask: mask.parse().unwrap(),
        seed,
        ..EvolutionConfig::default()
    }
}

/// Wraps an evaluator and checks population invariants between generations.
struct Checked<E> {
    inner: E,
    config: EvolutionConfig,
    previous: Option<(Vec<Genome>, Vec<f64>)>,
    generations: u32,
}

impl<E: Evaluator> Evaluator for Checked<E> {
    fn evaluate(&mut self, generation: u32, population: &[Genome], losses: &mut [f64]) {
        let c = &self.config;
        assert_eq!(population.len(), c.population_size);
        for g in population {
            assert!(g.within(&c.clip));
            for kind in ParamKind::ALL {
                if !c.mask.contains(kind) {
                    assert!(g.params(kind).iter().all(|&x| x == *c.fixed.get(kind)), "{kind:?} moved");
                }
            }
        }
        if let Some((prev, prev_losses)) = &self.previous {
            let order = rank(prev_losses);
            for (slot, &i) in order[..c.elite_count].iter().enumerate() {
                assert_eq!(&population[slot], &prev[i], "elite {slot} changed");
            }
        }
        self.inner.evaluate(generation, population, losses);
        self.previous = Some((population.to_vec(), losses.to_vec()));
        self.generations += 1;
    }
}

fn fitness() -> TaskFitness {
    TaskFitness::new(&xor(), LossConfig::default()).unwrap()
}

#[test]
fn populations_keep_their_invariants() {
    for mask in ["W", "D", "tc", "WDtc", "Dtc"] {
        let config = small(mask, 11);
        let mut ev = Checked { inner: SequentialEvaluator::new(fitness()), config: config.clone(), previous: None, generations: 0 };
        let out = Evolution::new(config.clone(), NetworkTopology::default()).unwrap().run(&mut ev, |_| {});
        assert_eq!(ev.generations as usize, out.reports.len());
        for pair in out.reports.windows(2) {
            assert!(pair[1].best_loss <= pair[0].best_loss, "{mask}: best loss rose");
        }
        assert!(out.final_losses.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(out.best_loss, out.reports.last().unwrap().best_loss);
    }
}

#[test]
fn runs_are_reproducible() {
    let topo = NetworkTopology::default();
    let a = evolution::run(&small("WDtc", 5), &topo, &xor()).unwrap();
    let b = evolution::run(&small("WDtc", 5), &topo, &xor()).unwrap();
    assert_eq!(a.reports, b.reports);
    assert_eq!(a.final_population, b.final_population);
    let c = evolution::run(&small("WDtc", 6), &topo, &xor()).unwrap();
    assert_ne!(a.final_population, c.final_population);
}

#[test]
fn stops_at_zero_loss() {
    // Every genome is silent, so FF and TT are right and the constant
    // target 0 is met from the start.
    let spec = TaskSpec::count(Gate::Xor, "001", "011", 0, 0).unwrap();
    let mut config = small("D", 1);
    config.fixed.weight = 0.0;
    let out = evolution::run(&config, &NetworkTopology::default(), &spec).unwrap();
    assert_eq!(out.solved_at, Some(0));
    assert_eq!(out.reports.len(), 1);
    assert_eq!(out.solutions(config.zero_loss_tol).count(), config.population_size);

    config.stop_on_solve = false;
    let out = evolution::run(&config, &NetworkTopology::default(), &spec).unwrap();
    assert_eq!(out.solved_at, Some(0));
    assert_eq!(out.reports.len(), config.max_generations as usize);
}

#[test]
fn children_cycle_through_elites() {
    let mut config = small("WDtc", 2);
    config.mutation_rate = PerKind { weight: 0.0, delay: 0.0, time_constant: 0.0, afterpotential: 0.0 };
    let pop = evolution::init_population(&config, &NetworkTopology::default());
    let losses: Vec<f64> = (0..pop.len()).map(|i| ((i * 37) % 101) as f64).collect();
    let order = rank(&losses);
    let next = next_generation(&config, &pop, &order, 0);
    let e = config.elite_count;
    for (k, child) in next[e..].iter().enumerate() {
        assert_eq!(child, &pop[order[k % e]]);
    }
}

#[test]
fn small_population_makes_progress() {
    let mut config = small("WDtc", 21);
    config.population_size = 1000;
    config.elite_count = 50;
    config.max_generations = 30;
    let out = evolution::run(&config, &NetworkTopology::default(), &xor()).unwrap();
    assert!(out.best_loss < out.reports[0].quantiles[2]);
}

proptest! {
    #[test]
    fn rank_is_a_stable_sort(losses in prop::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0f64..3.0], 1..60)) {
        let order = rank(&losses);
        let mut seen = order.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..losses.len()).collect::<Vec<_>>());
        for w in order.windows(2) {
            let (a, b) = (w[0], w[1]);
            prop_assert!(losses[a] < losses[b] || (losses[a] == losses[b] && a < b));
        }
    }
}
