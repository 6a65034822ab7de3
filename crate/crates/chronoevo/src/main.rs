use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use chronoevo::config::{Condition, Encoding, GridConfig, OutputSpec};
use chronoevo::experiments::{run_noise_surface, run_weight_noise};
use chronoevo::grid::{run_grid, GridOutcome, RunOptions};
use chronoevo::io::{read_json, write_json};
use chronoevo::parallel::ParallelEvaluator;
use chronoevo::{presets, stats, trace};
use chronoevo_core::analysis::StatsConfig;
use chronoevo_core::evolution::Evolution;
use chronoevo_core::genome::ClipRange;
use chronoevo_core::loss::{LossConfig, TaskFitness};
use chronoevo_core::{EvolutionConfig, Gate, Genome, NetworkTopology, ParamMask};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chronoevo", version, about = "Evolve spiking networks with adaptable delays and time constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a single condition and report every generation.
    Evolve(EvolveArgs),
    /// Run (or resume) a condition grid.
    Grid(GridArgs),
    /// Run an input-noise grid and write surface.csv.
    Noise(GridArgs),
    /// Run a weight-noise grid and write weight_noise.csv.
    WeightNoise(GridArgs),
    /// Export spike rasters and voltage traces of one genome on one case.
    Trace(TraceArgs),
    /// Tabulate parameter statistics over a set of genomes.
    Stats(StatsArgs),
    /// Print a built-in grid configuration as JSON.
    Preset {
        /// One of semi-temporal, spatio-temporal, noise-surface, weight-noise.
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct TaskArgs {
    /// XOR, XNOR, OR, NOR, AND or NAND.
    #[arg(long, default_value = "XOR")]
    gate: Gate,
    /// Input codes for false and true.
    #[arg(long, value_delimiter = ',', default_values = ["001", "011"])]
    inputs: Vec<String>,
    /// Spike-count targets for false and true.
    #[arg(long, value_delimiter = ',', conflicts_with = "train")]
    count: Option<Vec<u32>>,
    /// Burst-code targets for false and true.
    #[arg(long, value_delimiter = ',')]
    train: Option<Vec<String>>,
}

impl TaskArgs {
    fn encoding(&self) -> anyhow::Result<Encoding> {
        let pairs = [Some(self.inputs.len()), self.count.as_ref().map(Vec::len), self.train.as_ref().map(Vec::len)];
        if pairs.into_iter().flatten().any(|n| n != 2) {
            bail!("--inputs, --count and --train each take two comma-separated values (false,true)");
        }
        let inputs = [self.inputs[0].as_str().into(), self.inputs[1].as_str().into()];
        let output = match (&self.count, &self.train) {
            (_, Some(t)) => OutputSpec::Train([t[0].as_str().into(), t[1].as_str().into()]),
            (Some(c), None) => OutputSpec::Count([c[0], c[1]]),
            (None, None) => OutputSpec::Count([0, 1]),
        };
        Ok(Encoding { inputs, output })
    }
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    task: TaskArgs,
    /// Evolvable parameter kinds, e.g. W, Dtc, WDtcb.
    #[arg(long, default_value = "WDtc")]
    mask: ParamMask,
    #[arg(long, default_value_t = 100_000)]
    population: usize,
    #[arg(long, default_value_t = 1_000)]
    elites: usize,
    #[arg(long, default_value_t = 20)]
    generations: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weight clip range as min,max.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    weight_clip: Option<Vec<f64>>,
    /// Evaluation threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Write the best genome here as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// Grid configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; rerunning into it resumes.
    #[arg(long)]
    out: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override trials per cell.
    #[arg(long)]
    trials: Option<u32>,
    /// Override the generation budget.
    #[arg(long)]
    generations: Option<u32>,
    /// Override the population size.
    #[arg(long)]
    population: Option<usize>,
    /// Override the elite count.
    #[arg(long)]
    elites: Option<usize>,
    /// Evaluation threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl GridArgs {
    fn load(&self) -> anyhow::Result<GridConfig> {
        let mut g = GridConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            g.seed = s;
        }
        if let Some(t) = self.trials {
            g.trials = t;
        }
        if let Some(n) = self.generations {
            g.evolution.max_generations = n;
        }
        if let Some(p) = self.population {
            g.evolution.population_size = p;
        }
        if let Some(e) = self.elites {
            g.evolution.elite_count = e;
        }
        Ok(g)
    }

    fn options(&self) -> RunOptions {
        RunOptions { workers: self.workers, trial_limit: None }
    }
}

#[derive(Args)]
struct TraceArgs {
    /// Genome JSON (as written by `evolve --out` or a grid's best_genomes/).
    #[arg(long)]
    genome: PathBuf,
    #[command(flatten)]
    task: TaskArgs,
    /// FF, FT, TF or TT.
    #[arg(long, default_value = "FT")]
    case: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    /// Genome JSON files or directories of them.
    #[arg(required = true)]
    genomes: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Evolution config whose clip ranges set the histogram ranges.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn evolve(args: &EvolveArgs) -> anyhow::Result<()> {
    let condition = Condition {
        gate: args.task.gate,
        encoding: args.task.encoding()?,
        mask: args.mask,
        weight_clip: match args.weight_clip.as_deref() {
            None => None,
            Some(&[min, max]) => Some(ClipRange::new(min, max)),
            Some(_) => bail!("--weight-clip takes min,max"),
        },
        afterpotential: None,
        input_noise: None,
        weight_noise: None,
    };
    let base = EvolutionConfig {
        population_size: args.population,
        elite_count: args.elites,
        max_generations: args.generations,
        seed: args.seed,
        ..Default::default()
    };
    let config = condition.evolution(&base);
    let fitness = TaskFitness::new(&condition.task()?, LossConfig::default())?;
    config.validate_for(fitness.task())?;
    println!("condition: {}", condition.label());
    let start = Instant::now();
    let clock = move || start.elapsed();
    let mut evaluator = ParallelEvaluator::new(fitness, args.workers);
    let outcome = Evolution::new(config, NetworkTopology::default())?.with_clock(&clock).run(&mut evaluator, |r| {
        let q = r.quantiles;
        println!(
            "gen {:>4}  best {:<10.6} q1 {:<10.6} median {:<10.6} ({:.2}s)",
            r.generation,
            r.best_loss,
            q[1],
            q[2],
            r.wall_time.unwrap_or_default().as_secs_f64()
        );
    });
    match outcome.solved_at {
        Some(g) => println!("solved at generation {g}"),
        None => println!("unsolved; best loss {}", outcome.best_loss),
    }
    if let Some(out) = &args.out {
        write_json(out, &outcome.best)?;
        println!("best genome written to {}", out.display());
    }
    Ok(())
}

fn report(outcome: &GridOutcome, out: &Path) {
    let solved: usize = outcome.cells.iter().map(|c| c.solved()).sum();
    let trials: usize = outcome.cells.iter().map(|c| c.trials.len()).sum();
    println!(
        "{} cells, {solved}/{trials} trials solved, {} run now; results in {}",
        outcome.cells.len(),
        outcome.trials_run,
        out.display()
    );
}

fn collect_genomes(paths: &[PathBuf]) -> anyhow::Result<Vec<Genome>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("reading {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(p.clone());
        }
    }
    files.iter().map(|f| read_json::<Genome>(f).with_context(|| format!("reading {}", f.display()))).collect()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Evolve(args) => evolve(&args)?,
        Command::Grid(args) => {
            let outcome = run_grid(&args.load()?, Some(&args.out), &args.options())?;
            report(&outcome, &args.out);
        }
        Command::Noise(args) => {
            let outcome = run_noise_surface(&args.load()?, Some(&args.out), &args.options())?;
            report(&outcome, &args.out);
        }
        Command::WeightNoise(args) => {
            let outcome = run_weight_noise(&args.load()?, Some(&args.out), &args.options())?;
            report(&outcome, &args.out);
        }
        Command::Trace(args) => {
            let genome: Genome = read_json(&args.genome)?;
            let spec = args.task.encoding()?.task(args.task.gate)?;
            let t = trace::export_trace(&genome, &spec, &args.case, &args.out)?;
            println!("output spikes {:?}; CSVs in {}", t.output(0).times(), args.out.display());
        }
        Command::Stats(args) => {
            let genomes = collect_genomes(&args.genomes)?;
            let cfg = match &args.config {
                Some(p) => StatsConfig::from_evolution(&GridConfig::load(p)?.evolution),
                None => StatsConfig::default(),
            };
            let s = stats::write_stats(&genomes, &cfg, &args.out)?;
            println!(
                "{} genomes, {} synapses, E/I fraction {:?}; CSVs in {}",
                s.genomes,
                s.synapses,
                s.ei_fraction,
                args.out.display()
            );
        }
        Command::Preset { name, out } => {
            let Some(g) = presets::by_name(&name) else {
                bail!("unknown preset {name:?}; choose from {}", presets::NAMES.join(", "));
            };
            match out {
                Some(p) => write_json(&p, &g)?,
                None => print!("{}", g.to_json()),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
