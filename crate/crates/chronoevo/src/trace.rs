//! Raster and voltage export for external plotting.

use std::path::Path;

use chronoevo_core::{simulate, Case, Genome, SimTrace, TaskSpec};

use crate::error::{Error, Result};
use crate::io::write_csv;

pub const SPIKES_HEADER: &[&str] = &["neuron", "layer", "index", "time"];
pub const ARRIVALS_HEADER: &[&str] = &["synapse", "layer", "post", "pre", "emitted", "arrival"];
/// One row per step and synapse; `v` repeats across the synapses of a
/// neuron and equals the sum of their `u` and `ap`.
pub const TRACES_HEADER: &[&str] = &["step", "neuron", "synapse", "pre", "u", "ap", "v"];

/// Picks a case by its label (`FF`, `FT`, `TF`, `TT`).
pub fn find_case(spec: &TaskSpec, label: &str) -> Result<Case> {
    let task = spec.cases()?;
    task.cases
        .iter()
        .find(|c| c.label().eq_ignore_ascii_case(label))
        .cloned()
        .ok_or_else(|| Error::Config(format!("unknown case {label:?}; expected FF, FT, TF or TT")))
}

/// Simulates one case with traces and writes `spikes.csv`, `arrivals.csv`
/// and `traces.csv` into `dir`.
pub fn export_trace(genome: &Genome, spec: &TaskSpec, case: &str, dir: &Path) -> Result<SimTrace> {
    let window = spec.window();
    let case = find_case(spec, case)?;
    let trace = simulate(genome, &case.inputs, window, true)?;
    write_trace(genome, &trace, dir)?;
    Ok(trace)
}

pub fn write_trace(genome: &Genome, trace: &SimTrace, dir: &Path) -> Result<()> {
    let topo = &genome.topology;
    let spikes = trace.spikes.iter().enumerate().flat_map(|(n, train)| {
        let (layer, index) = topo.locate_neuron(n);
        train.times().iter().map(move |&t| (n, layer, index, t))
    });
    write_csv(&dir.join("spikes.csv"), SPIKES_HEADER, spikes)?;

    let delays = genome.effective_delays();
    let mut arrivals = Vec::new();
    for (s, syn) in topo.synapses().enumerate() {
        let pre = topo.neuron(syn.layer, syn.pre);
        for &t in trace.spikes[pre].times() {
            let arrival = t + delays[s];
            if arrival < trace.window {
                arrivals.push((s, syn.layer, syn.post, syn.pre, t, arrival));
            }
        }
    }
    write_csv(&dir.join("arrivals.csv"), ARRIVALS_HEADER, arrivals)?;

    let v = trace.voltages.as_ref().expect("traces were recorded");
    let n_in = topo.num_inputs();
    let mut rows = Vec::new();
    for step in 0..trace.window as usize {
        for (s, syn) in topo.synapses().enumerate() {
            let post = topo.neuron(syn.layer + 1, syn.post);
            rows.push((step, post, s, topo.neuron(syn.layer, syn.pre), v.u(s)[step], v.ap(s)[step], v.v(post - n_in)[step]));
        }
    }
    write_csv(&dir.join("traces.csv"), TRACES_HEADER, rows)
}
