//! CSV tables for solution statistics.

use std::path::Path;

use chronoevo_core::analysis::{bimodality_coefficient, stats, Histogram, SolutionStats, StatsConfig};
use chronoevo_core::Genome;

use crate::error::Result;
use crate::io::{opt, write_csv};

pub const SUMMARY_HEADER: &[&str] = &[
    "genomes",
    "synapses",
    "excitatory",
    "inhibitory",
    "ei_fraction",
    "ei_ratio",
    "tc_long_fraction",
    "bimodality_weight",
    "bimodality_delay",
    "bimodality_tau",
];

pub const HISTOGRAM_HEADER: &[&str] = &["parameter", "bin_start", "bin_end", "count"];

fn hist_rows<'a>(name: &'a str, h: &'a Histogram) -> impl Iterator<Item = (&'a str, f64, f64, u64)> + 'a {
    h.counts.iter().enumerate().map(move |(k, &c)| (name, h.edge(k), h.edge(k + 1), c))
}

/// Computes statistics over `genomes` and writes `stats_summary.csv` and
/// `stats_histograms.csv` into `dir`.
pub fn write_stats(genomes: &[Genome], config: &StatsConfig, dir: &Path) -> Result<SolutionStats> {
    let s = stats(genomes, config)?;
    let all = |f: fn(&Genome) -> &[f64]| genomes.iter().flat_map(|g| f(g).iter().copied()).collect::<Vec<_>>();
    let row = (
        s.genomes,
        s.synapses,
        s.excitatory,
        s.inhibitory,
        opt(s.ei_fraction),
        opt(s.ei_ratio),
        s.tc_long_fraction,
        opt(bimodality_coefficient(&all(|g| &g.weights))),
        opt(bimodality_coefficient(&all(|g| &g.delay_deltas))),
        opt(bimodality_coefficient(&all(|g| &g.tau_syn))),
    );
    write_csv(&dir.join("stats_summary.csv"), SUMMARY_HEADER, [row])?;
    let rows = hist_rows("weight", &s.weights)
        .chain(hist_rows("delay_delta", &s.delay_deltas))
        .chain(hist_rows("tau_syn", &s.tau_syn));
    write_csv(&dir.join("stats_histograms.csv"), HISTOGRAM_HEADER, rows)?;
    Ok(s)
}
