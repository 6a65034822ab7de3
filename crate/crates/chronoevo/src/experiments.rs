//! Noise experiments built on the grid runner.

use std::path::Path;

use chronoevo_core::noise::{InputNoiseSpec, WeightNoiseSpec};

use crate::config::{Condition, GridConfig};
use crate::error::Result;
use crate::grid::{run_grid, CellResult, GridOutcome, RunOptions};
use crate::io::{opt, write_csv};

/// Crosses each base condition with every (insertion probability, jitter)
/// pair, in that order.
pub fn input_noise_conditions(base: &[Condition], insertion_probs: &[f64], jitter_sigmas: &[f64]) -> Vec<Condition> {
    let mut out = Vec::new();
    for c in base {
        for &insertion_prob in insertion_probs {
            for &jitter_sigma in jitter_sigmas {
                let mut c = c.clone();
                c.weight_noise = None;
                c.input_noise = Some(InputNoiseSpec { insertion_prob, jitter_sigma });
                out.push(c);
            }
        }
    }
    out
}

/// Crosses each base condition with every weight-noise level.
pub fn weight_noise_conditions(base: &[Condition], sigmas: &[f64], replicates: u32) -> Vec<Condition> {
    let mut out = Vec::new();
    for c in base {
        for &sigma in sigmas {
            let mut c = c.clone();
            c.input_noise = None;
            c.weight_noise = Some(WeightNoiseSpec { sigma, replicates });
            out.push(c);
        }
    }
    out
}

fn sd(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    Some((xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt())
}

pub const SURFACE_HEADER: &[&str] =
    &["cell", "gate", "encoding", "mask", "insertion_prob", "jitter_sigma", "trials", "mean_min_loss", "sd_min_loss"];

fn surface_row(c: &CellResult) -> Vec<String> {
    let n = c.condition.input_noise.unwrap_or_default();
    vec![
        c.index.to_string(),
        c.condition.gate.to_string(),
        c.condition.encoding.label(),
        c.condition.mask.to_string(),
        n.insertion_prob.to_string(),
        n.jitter_sigma.to_string(),
        c.trials.len().to_string(),
        opt(c.mean_min_loss()),
        opt(sd(&c.min_losses())),
    ]
}

/// Runs a grid of input-noise cells and writes `surface.csv`: the minimum
/// loss reached within the budget for every noise point.
pub fn run_noise_surface(config: &GridConfig, out: Option<&Path>, options: &RunOptions) -> Result<GridOutcome> {
    let outcome = run_grid(config, out, options)?;
    if let (Some(out), true) = (out, outcome.complete && !outcome.cells.is_empty()) {
        write_csv(&out.join("surface.csv"), SURFACE_HEADER, outcome.cells.iter().map(surface_row))?;
    }
    Ok(outcome)
}

pub const WEIGHT_NOISE_HEADER: &[&str] =
    &["cell", "gate", "encoding", "mask", "weight_sigma", "replicates", "trials", "mean_min_loss", "sd_min_loss"];

fn weight_row(c: &CellResult) -> Vec<String> {
    let n = c.condition.weight_noise.unwrap_or(WeightNoiseSpec { sigma: 0.0, replicates: 1 });
    vec![
        c.index.to_string(),
        c.condition.gate.to_string(),
        c.condition.encoding.label(),
        c.condition.mask.to_string(),
        n.sigma.to_string(),
        n.replicates.to_string(),
        c.trials.len().to_string(),
        opt(c.mean_min_loss()),
        opt(sd(&c.min_losses())),
    ]
}

/// Runs a grid of weight-noise cells and writes `weight_noise.csv`.
pub fn run_weight_noise(config: &GridConfig, out: Option<&Path>, options: &RunOptions) -> Result<GridOutcome> {
    let outcome = run_grid(config, out, options)?;
    if let (Some(out), true) = (out, outcome.complete && !outcome.cells.is_empty()) {
        write_csv(&out.join("weight_noise.csv"), WEIGHT_NOISE_HEADER, outcome.cells.iter().map(weight_row))?;
    }
    Ok(outcome)
}
