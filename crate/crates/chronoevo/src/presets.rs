//! Built-in experiment grids. Encoding lists approximate the original
//! experiment tables, which are not reproduced here; every value can be
//! overridden in the written config.

use chronoevo_core::genome::ClipRange;
use chronoevo_core::{EvolutionConfig, Gate, ParamMask};

use crate::config::{Axes, Encoding, GridConfig};
use crate::experiments::{input_noise_conditions, weight_noise_conditions};

pub const NAMES: &[&str] = &["semi-temporal", "spatio-temporal", "noise-surface", "weight-noise"];

fn masks(labels: &[&str]) -> Vec<ParamMask> {
    labels.iter().map(|m| m.parse().expect("preset masks are valid")).collect()
}

/// Spike-count encodings for the semi-temporal grid.
pub fn count_encodings() -> Vec<Encoding> {
    vec![
        Encoding::count("001", "011", 1, 0),
        Encoding::count("1001", "0110", 0, 1),
        Encoding::count("100001", "001100", 0, 2),
        Encoding::count("10001", "01010", 2, 0),
    ]
}

/// Burst-output encodings for the spatio-temporal grid.
pub fn train_encodings() -> Vec<Encoding> {
    vec![
        Encoding::train("001", "011", "0", "0000001"),
        Encoding::train("1001", "0110", "0", "0000001"),
        Encoding::train("1", "11", "0", "00000111"),
    ]
}

/// Logic gates with spike-count outputs; 20 generations.
pub fn semi_temporal() -> GridConfig {
    let evolution = EvolutionConfig { population_size: 100_000, elite_count: 1_000, max_generations: 20, ..Default::default() };
    let mut g = GridConfig::new("semi-temporal", 5, evolution);
    g.axes = Some(Axes {
        gates: Gate::ALL.to_vec(),
        encodings: count_encodings(),
        masks: masks(&["W", "Wtc", "Dtc", "WD", "WDtc"]),
        weight_clips: vec![ClipRange::new(-2.0, 2.0), ClipRange::new(-1.0, 1.0)],
        input_noise: Vec::new(),
        weight_noise: Vec::new(),
    });
    g
}

/// Logic gates with burst outputs; 200 generations.
pub fn spatio_temporal() -> GridConfig {
    let evolution = EvolutionConfig { population_size: 10_000, elite_count: 200, max_generations: 200, ..Default::default() };
    let mut g = GridConfig::new("spatio-temporal", 5, evolution);
    g.axes = Some(Axes {
        gates: Gate::ALL.to_vec(),
        encodings: train_encodings(),
        masks: masks(&["Wtc", "Dtc", "WD", "WDtc", "WDtcb"]),
        weight_clips: Vec::new(),
        input_noise: Vec::new(),
        weight_noise: Vec::new(),
    });
    g
}

fn xor_base(mask_labels: &[&str]) -> Vec<crate::config::Condition> {
    let axes = Axes {
        gates: vec![Gate::Xor],
        encodings: vec![Encoding::count("001", "011", 0, 1)],
        masks: masks(mask_labels),
        weight_clips: Vec::new(),
        input_noise: Vec::new(),
        weight_noise: Vec::new(),
    };
    axes.expand()
}

/// Input insertion/jitter surface on XOR; 100 generations.
pub fn noise_surface() -> GridConfig {
    let evolution = EvolutionConfig { population_size: 10_000, elite_count: 200, max_generations: 100, ..Default::default() };
    let mut g = GridConfig::new("noise-surface", 5, evolution);
    g.conditions = input_noise_conditions(
        &xor_base(&["WD", "Wtc", "Dtc", "WDtc"]),
        &[0.0, 0.02, 0.05, 0.1],
        &[0.0, 0.5, 1.0, 2.0],
    );
    g
}

/// Weight uncertainty on XOR; averaged over 10 replicates, 1000 generations.
pub fn weight_noise() -> GridConfig {
    let evolution = EvolutionConfig { population_size: 200, elite_count: 10, max_generations: 1000, ..Default::default() };
    let mut g = GridConfig::new("weight-noise", 5, evolution);
    g.conditions = weight_noise_conditions(&xor_base(&["W", "WD", "Wtc", "WDtc"]), &[0.0, 0.1, 0.2, 0.4], 10);
    g
}

pub fn by_name(name: &str) -> Option<GridConfig> {
    Some(match name {
        "semi-temporal" => semi_temporal(),
        "spatio-temporal" => spatio_temporal(),
        "noise-surface" => noise_surface(),
        "weight-noise" => weight_noise(),
        _ => return None,
    })
}
