use std::fs;
use std::path::Path;

use chronoevo::config::{Axes, Encoding, GridConfig};
use chronoevo::experiments::{input_noise_conditions, run_noise_surface};
use chronoevo::grid::{run_grid, trial_path, RunOptions};
use chronoevo::trace::export_trace;
use chronoevo::ParallelEvaluator;
use chronoevo_core::evolution::{Evolution, SequentialEvaluator};
use chronoevo_core::loss::{LossConfig, TaskFitness};
use chronoevo_core::{EvolutionConfig, Gate, Genome, ModelConstants, NetworkTopology, PerKind, TaskSpec};

fn small_grid() -> GridConfig {
    let evolution = EvolutionConfig { population_size: 300, elite_count: 20, max_generations: 4, ..Default::default() };
    let mut g = GridConfig::new("small", 2, evolution);
    g.seed = 11;
    g.axes = Some(Axes {
        gates: vec![Gate::Xor, Gate::And],
        encodings: vec![Encoding::count("001", "011", 0, 1)],
        masks: vec!["W".parse().unwrap(), "WDtc".parse().unwrap()],
        weight_clips: Vec::new(),
        input_noise: Vec::new(),
        weight_noise: Vec::new(),
    });
    g
}

fn csvs(dir: &Path) -> (Vec<u8>, Vec<u8>) {
    (fs::read(dir.join("cells.csv")).unwrap(), fs::read(dir.join("trials.csv")).unwrap())
}

#[test]
fn rerun_and_worker_count_give_identical_csvs() {
    let g = small_grid();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_grid(&g, Some(a.path()), &RunOptions { workers: 1, trial_limit: None }).unwrap();
    run_grid(&g, Some(b.path()), &RunOptions { workers: 3, trial_limit: None }).unwrap();
    assert_eq!(csvs(a.path()), csvs(b.path()));
    // Rerunning into a finished directory loads every trial.
    let again = run_grid(&g, Some(a.path()), &RunOptions::default()).unwrap();
    assert_eq!(again.trials_run, 0);
    assert_eq!(csvs(a.path()), csvs(b.path()));
}

#[test]
fn interrupted_grid_resumes_to_the_same_result() {
    let g = small_grid();
    let full = tempfile::tempdir().unwrap();
    run_grid(&g, Some(full.path()), &RunOptions::default()).unwrap();

    let part = tempfile::tempdir().unwrap();
    let first = run_grid(&g, Some(part.path()), &RunOptions { workers: 2, trial_limit: Some(3) }).unwrap();
    assert!(!first.complete);
    assert_eq!(first.trials_run, 3);
    assert!(!part.path().join("cells.csv").exists());
    // A half-written record left by a kill is rerun.
    fs::write(trial_path(part.path(), 1, 1), b"{\"cell\": 1, \"tri").unwrap();
    let second = run_grid(&g, Some(part.path()), &RunOptions::default()).unwrap();
    assert!(second.complete);
    assert_eq!(second.trials_run, 8 - 3);
    assert_eq!(csvs(full.path()), csvs(part.path()));
}

#[test]
fn changed_config_is_refused() {
    let g = small_grid();
    let dir = tempfile::tempdir().unwrap();
    run_grid(&g, Some(dir.path()), &RunOptions { workers: 1, trial_limit: Some(1) }).unwrap();
    let mut other = g.clone();
    other.seed += 1;
    assert!(run_grid(&other, Some(dir.path()), &RunOptions::default()).is_err());
}

#[test]
fn zero_trials_write_nothing() {
    let mut g = small_grid();
    g.trials = 0;
    let dir = tempfile::tempdir().unwrap();
    let out = run_grid(&g, Some(dir.path()), &RunOptions::default()).unwrap();
    assert!(out.cells.is_empty());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn noise_surface_lists_every_point() {
    let mut g = small_grid();
    let base = g.cells();
    g.axes = None;
    g.trials = 1;
    g.conditions = input_noise_conditions(&base[..1], &[0.0, 0.1], &[0.0, 1.0]);
    let dir = tempfile::tempdir().unwrap();
    run_noise_surface(&g, Some(dir.path()), &RunOptions::default()).unwrap();
    let text = fs::read_to_string(dir.path().join("surface.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 4);
    assert!(text.lines().nth(4).unwrap().contains(",0.1,1,"));
}

#[test]
fn parallel_and_sequential_evolution_agree() {
    let spec = TaskSpec::count(Gate::Xor, "001", "011", 0, 1).unwrap();
    let config = EvolutionConfig { population_size: 500, elite_count: 25, max_generations: 5, seed: 5, ..Default::default() };
    let fitness = || TaskFitness::new(&spec, LossConfig::default()).unwrap();
    let topo = NetworkTopology::default();
    let seq = Evolution::new(config.clone(), topo.clone()).unwrap().run(&mut SequentialEvaluator::new(fitness()), |_| {});
    let par = Evolution::new(config, topo).unwrap().run(&mut ParallelEvaluator::new(fitness(), 4), |_| {});
    assert_eq!(seq.best, par.best);
    assert_eq!(seq.best_loss.to_bits(), par.best_loss.to_bits());
    let history = |o: &chronoevo_core::RunOutcome| o.reports.iter().map(|r| r.best_loss.to_bits()).collect::<Vec<_>>();
    assert_eq!(history(&seq), history(&par));
}

fn driven_genome() -> Genome {
    let values = PerKind { weight: 0.7, delay: 1.0, time_constant: 6.0, afterpotential: 0.0 };
    Genome::uniform(NetworkTopology::default(), ModelConstants::default(), values)
}

#[test]
fn exported_voltage_is_sum_of_components() {
    let spec = TaskSpec::count(Gate::Xor, "101", "111", 0, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let trace = export_trace(&driven_genome(), &spec, "TT", dir.path()).unwrap();
    assert!(!trace.output(0).is_empty(), "the test genome should fire");

    let mut reader = csv::Reader::from_path(dir.path().join("traces.csv")).unwrap();
    let mut groups: std::collections::BTreeMap<(u32, u32), (f64, f64)> = Default::default();
    for row in reader.records() {
        let row = row.unwrap();
        let f = |i: usize| row[i].parse::<f64>().unwrap();
        let entry = groups.entry((f(0) as u32, f(1) as u32)).or_insert((0.0, f(6)));
        entry.0 += f(4) + f(5);
        assert_eq!(entry.1, f(6));
    }
    assert!(!groups.is_empty());
    for ((step, neuron), (sum, v)) in groups {
        assert!((sum - v).abs() < 1e-9, "step {step} neuron {neuron}: {sum} vs {v}");
    }

    let spikes = fs::read_to_string(dir.path().join("spikes.csv")).unwrap();
    assert_eq!(spikes.lines().next().unwrap(), "neuron,layer,index,time");
    assert!(spikes.lines().count() > 1);
}

#[test]
fn silent_inputs_export_header_only_rasters() {
    let spec = TaskSpec::count(Gate::Xor, "0", "1", 0, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    export_trace(&driven_genome(), &spec, "FF", dir.path()).unwrap();
    assert_eq!(fs::read_to_string(dir.path().join("spikes.csv")).unwrap(), "neuron,layer,index,time\n");
    assert_eq!(
        fs::read_to_string(dir.path().join("arrivals.csv")).unwrap(),
        "synapse,layer,post,pre,emitted,arrival\n"
    );
    assert!(export_trace(&driven_genome(), &spec, "XY", dir.path()).is_err());
}
