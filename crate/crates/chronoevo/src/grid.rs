//! Resumable grid runner.
//!
//! Output layout under the grid directory:
//!
//! ```text
//! grid.json                      resolved configuration (conditions expanded)
//! cells.csv                      one row per cell
//! trials.csv                     one row per trial
//! cell_<id>/trial_<k>.json       full trial record, written atomically
//! best_genomes/cell_<id>_trial_<k>.json
//! ```
//!
//! A trial whose record already exists is loaded instead of rerun, so an
//! interrupted grid picks up where it stopped. Wall-clock time only appears
//! in the trial records, never in the CSV files, so a finished grid's CSVs
//! are byte-identical however it was scheduled.

use std::path::{Path, PathBuf};
use std::time::Instant;

use chronoevo_core::evolution::{EvalKey, Evolution, Fitness};
use chronoevo_core::noise::{assess, InputNoiseFitness, WeightNoiseFitness};
use chronoevo_core::rng::{derive_seed, domain};
use chronoevo_core::{loss::TaskFitness, Genome, Simulator};
use serde::{Deserialize, Serialize};

use crate::config::{Condition, GridConfig};
use crate::error::{Error, Result};
use crate::io::{opt, read_json, write_csv, write_json};
use crate::parallel::ParallelEvaluator;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Evaluation threads; 0 means one per core.
    pub workers: usize,
    /// Stop after running this many new trials, leaving the grid
    /// incomplete. Used to exercise resumption.
    pub trial_limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub cell: usize,
    pub trial: u32,
    pub label: String,
    pub seed: u64,
    /// First generation (0 = the random population) holding a zero-loss
    /// genome. In noisy cells this uses the assessed loss.
    pub solved_at: Option<u32>,
    pub generations_run: u32,
    pub max_generations: u32,
    /// Lowest loss over the run: the best-of-generation loss in clean cells,
    /// the assessed champion loss in noisy ones.
    pub min_loss: f64,
    /// Best loss of each generation as seen by selection.
    pub best_loss_history: Vec<f64>,
    /// Noisy cells only: each generation's champion scored on fixed draws.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assessed_loss_history: Vec<f64>,
    pub best_genome: Genome,
    pub runtime_secs: f64,
}

impl TrialRecord {
    /// Generations to solution, or the budget when unsolved.
    pub fn generations(&self) -> u32 {
        self.solved_at.unwrap_or(self.max_generations)
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub index: usize,
    pub condition: Condition,
    pub trials: Vec<TrialRecord>,
}

impl CellResult {
    pub fn solved(&self) -> usize {
        self.trials.iter().filter(|t| t.solved_at.is_some()).count()
    }

    /// Mean generations to solution over solved trials.
    pub fn mean_generations(&self) -> Option<f64> {
        let solved: Vec<f64> = self.trials.iter().filter_map(|t| t.solved_at.map(f64::from)).collect();
        (!solved.is_empty()).then(|| solved.iter().sum::<f64>() / solved.len() as f64)
    }

    pub fn mean_min_loss(&self) -> Option<f64> {
        (!self.trials.is_empty())
            .then(|| self.trials.iter().map(|t| t.min_loss).sum::<f64>() / self.trials.len() as f64)
    }

    pub fn min_losses(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.min_loss).collect()
    }
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub cells: Vec<CellResult>,
    /// False when the trial limit stopped the run early.
    pub complete: bool,
    pub trials_run: usize,
}

/// Fitness of one cell: clean, input-noise or weight-noise.
enum CellFitness {
    Clean(TaskFitness),
    Input(InputNoiseFitness),
    Weight(WeightNoiseFitness),
}

impl Fitness for CellFitness {
    fn loss(&self, genome: &Genome, key: EvalKey, sim: &mut Simulator) -> f64 {
        match self {
            CellFitness::Clean(f) => f.loss(genome, key, sim),
            CellFitness::Input(f) => f.loss(genome, key, sim),
            CellFitness::Weight(f) => f.loss(genome, key, sim),
        }
    }
}

/// Seed of one trial, from the grid seed, cell index and trial index.
pub fn trial_seed(grid_seed: u64, cell: usize, trial: u32) -> u64 {
    derive_seed(grid_seed, domain::CELL, cell as u64, trial as u64)
}

/// Runs one trial of `condition` in memory.
pub fn run_trial(
    config: &GridConfig,
    cell: usize,
    condition: &Condition,
    trial: u32,
    workers: usize,
) -> Result<TrialRecord> {
    let seed = trial_seed(config.seed, cell, trial);
    let mut evolution = condition.evolution(&config.evolution);
    evolution.seed = seed;
    let base = TaskFitness::new(&condition.task()?, config.loss)?;
    evolution.validate_for(base.task())?;
    let fitness = match (condition.input_noise, condition.weight_noise) {
        (Some(_), Some(_)) => return Err(Error::Config("a cell takes input noise or weight noise, not both".into())),
        (Some(n), None) => CellFitness::Input(InputNoiseFitness::new(base, n, seed)?),
        (None, Some(n)) => CellFitness::Weight(WeightNoiseFitness::new(base, n, seed)?),
        (None, None) => CellFitness::Clean(base),
    };
    let noisy = !matches!(fitness, CellFitness::Clean(_));
    evolution.stop_on_solve = !noisy;
    let max_generations = evolution.max_generations;
    let tol = evolution.zero_loss_tol;
    let start = Instant::now();
    let mut evaluator = ParallelEvaluator::new(fitness, workers);
    let outcome = Evolution::new(evolution, config.topology.clone())?.run(&mut evaluator, |r| {
        log::debug!("cell {cell} trial {trial} generation {} best {}", r.generation, r.best_loss);
    });
    let best_loss_history: Vec<f64> = outcome.reports.iter().map(|r| r.best_loss).collect();
    let (solved_at, min_loss, best_genome, assessed_loss_history) = if noisy {
        let mut sim = Simulator::new();
        let mut assessed: Vec<f64> = Vec::with_capacity(outcome.reports.len());
        for (g, r) in outcome.reports.iter().enumerate() {
            // Elites survive unchanged, so the champion often repeats.
            let loss = match g.checked_sub(1) {
                Some(p) if outcome.reports[p].best == r.best => assessed[p],
                _ => assess(evaluator.fitness(), &r.best, config.assessment_draws, &mut sim),
            };
            assessed.push(loss);
        }
        let (at, &min) = assessed
            .iter()
            .enumerate()
            .reduce(|a, b| if b.1 < a.1 { b } else { a })
            .expect("at least one generation ran");
        let solved = assessed.iter().position(|&l| l <= tol).map(|g| g as u32);
        (solved, min, outcome.reports[at].best.clone(), assessed)
    } else {
        (outcome.solved_at, outcome.best_loss, outcome.best, Vec::new())
    };
    Ok(TrialRecord {
        cell,
        trial,
        label: condition.label(),
        seed,
        solved_at,
        generations_run: best_loss_history.len() as u32,
        max_generations,
        min_loss,
        best_loss_history,
        assessed_loss_history,
        best_genome,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

pub fn cell_dir(out: &Path, cell: usize) -> PathBuf {
    out.join(format!("cell_{cell:04}"))
}

pub fn trial_path(out: &Path, cell: usize, trial: u32) -> PathBuf {
    cell_dir(out, cell).join(format!("trial_{trial}.json"))
}

/// The configuration as written to `grid.json`: axes expanded into
/// explicit conditions.
pub fn resolved(config: &GridConfig) -> GridConfig {
    let mut r = config.clone();
    r.conditions = config.cells();
    r.axes = None;
    r
}

fn load_existing(path: &Path, seed: u64, label: &str) -> Result<Option<TrialRecord>> {
    if !path.exists() {
        return Ok(None);
    }
    match read_json::<TrialRecord>(path) {
        Ok(r) if r.seed == seed && r.label == label => Ok(Some(r)),
        Ok(_) => Err(Error::Config(format!("{} belongs to a different grid", path.display()))),
        // A record that fails to parse was never finalised; rerun it.
        Err(Error::Json(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Runs (or resumes) every trial of every cell, persisting as it goes when
/// `out` is given.
pub fn run_grid(config: &GridConfig, out: Option<&Path>, options: &RunOptions) -> Result<GridOutcome> {
    config.validate()?;
    let cells = config.cells();
    if config.trials == 0 || cells.is_empty() {
        return Ok(GridOutcome { cells: Vec::new(), complete: true, trials_run: 0 });
    }
    let resolved = resolved(config);
    if let Some(out) = out {
        let grid_json = out.join("grid.json");
        if grid_json.exists() {
            let previous = GridConfig::load(&grid_json)?;
            if previous != resolved {
                return Err(Error::Config(format!(
                    "{} holds a different grid; use a fresh output directory",
                    out.display()
                )));
            }
        } else {
            write_json(&grid_json, &resolved)?;
        }
    }

    let mut results = Vec::with_capacity(cells.len());
    let mut trials_run = 0;
    let mut complete = true;
    'cells: for (index, condition) in cells.into_iter().enumerate() {
        let label = condition.label();
        let mut trials = Vec::new();
        for k in 0..config.trials {
            let seed = trial_seed(config.seed, index, k);
            let existing = match out {
                Some(out) => load_existing(&trial_path(out, index, k), seed, &label)?,
                None => None,
            };
            let record = match existing {
                Some(r) => r,
                None => {
                    if options.trial_limit.is_some_and(|limit| trials_run >= limit) {
                        complete = false;
                        results.push(CellResult { index, condition, trials });
                        break 'cells;
                    }
                    let r = run_trial(config, index, &condition, k, options.workers)?;
                    log::info!(
                        "cell {index} [{label}] trial {k}: {} min loss {} ({:.1}s)",
                        r.solved_at.map_or("unsolved".to_string(), |g| format!("solved at {g}")),
                        r.min_loss,
                        r.runtime_secs
                    );
                    if let Some(out) = out {
                        write_json(&out.join("best_genomes").join(format!("cell_{index:04}_trial_{k}.json")), &r.best_genome)?;
                        write_json(&trial_path(out, index, k), &r)?;
                    }
                    trials_run += 1;
                    r
                }
            };
            trials.push(record);
        }
        results.push(CellResult { index, condition, trials });
    }

    let outcome = GridOutcome { cells: results, complete, trials_run };
    if let (Some(out), true) = (out, complete) {
        write_summaries(out, &outcome.cells)?;
    }
    Ok(outcome)
}

pub const CELLS_HEADER: &[&str] = &[
    "cell",
    "gate",
    "encoding",
    "mask",
    "weight_clip",
    "insertion_prob",
    "jitter_sigma",
    "weight_sigma",
    "trials",
    "solved",
    "mean_generations",
    "mean_min_loss",
    "best_min_loss",
    "generations",
];

pub const TRIALS_HEADER: &[&str] = &["cell", "trial", "seed", "solved", "generation", "min_loss"];

fn cell_row(c: &CellResult) -> Vec<String> {
    let cond = &c.condition;
    let losses = c.min_losses();
    vec![
        c.index.to_string(),
        cond.gate.to_string(),
        cond.encoding.label(),
        cond.mask.to_string(),
        cond.weight_clip.map(|w| format!("[{},{}]", w.min, w.max)).unwrap_or_default(),
        opt(cond.input_noise.map(|n| n.insertion_prob)),
        opt(cond.input_noise.map(|n| n.jitter_sigma)),
        opt(cond.weight_noise.map(|n| n.sigma)),
        c.trials.len().to_string(),
        c.solved().to_string(),
        opt(c.mean_generations()),
        opt(c.mean_min_loss()),
        opt(losses.iter().copied().reduce(f64::min)),
        c.trials.iter().map(|t| t.generations().to_string()).collect::<Vec<_>>().join(";"),
    ]
}

/// Writes `cells.csv` and `trials.csv`.
pub fn write_summaries(out: &Path, cells: &[CellResult]) -> Result<()> {
    write_csv(&out.join("cells.csv"), CELLS_HEADER, cells.iter().map(cell_row))?;
    let trials = cells.iter().flat_map(|c| {
        c.trials.iter().map(|t| {
            vec![
                t.cell.to_string(),
                t.trial.to_string(),
                t.seed.to_string(),
                u8::from(t.solved_at.is_some()).to_string(),
                t.generations().to_string(),
                t.min_loss.to_string(),
            ]
        })
    });
    write_csv(&out.join("trials.csv"), TRIALS_HEADER, trials)
}
