//! Fixed-step simulation of the feedforward network.
//!
//! Two engines share one arithmetic contract:
//!
//! * [`simulate`] steps the whole network one millisecond at a time through
//!   [`SimState::step`], keeping an explicit arrival buffer. It can record
//!   voltage traces.
//! * [`Simulator`] evaluates one layer at a time, skips steps while a neuron
//!   is at rest and reuses its buffers. Evolution uses it.
//!
//! Both sum the somatic voltage as `(sum_j u_ij) + (sum_j A_ij)`, each sum
//! running over presynaptic neurons in ascending order from `0.0`, so they
//! agree bit for bit.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::genome::{AfterpotentialTiming, Genome};
use crate::spike::SpikeTrain;
use crate::topology::NetworkTopology;

/// `clamp(round(default + delta), 0, max)`, rounding half away from zero.
pub fn delay_steps(default_delay: f64, delta: f64, max_delay: u32) -> u32 {
    let d = libm::round(default_delay + delta);
    if d <= 0.0 {
        0
    } else if d >= max_delay as f64 {
        max_delay
    } else {
        d as u32
    }
}

/// Effective conduction delay, in steps, of synapse `pre -> post` projecting
/// from `layer` into `layer + 1`.
pub fn effective_delay(genome: &Genome, layer: usize, post: usize, pre: usize) -> u32 {
    let s = genome.topology.synapse_index(layer, post, pre);
    delay_steps(genome.constants.default_delay, genome.delay_deltas[s], genome.constants.max_delay)
}

/// Per-synapse quantities derived once from a genome.
#[derive(Debug, Clone, Default)]
pub struct Dynamics {
    weights: Vec<f64>,
    decay: Vec<f64>,
    ap_scale: Vec<f64>,
    delays: Vec<u32>,
    ap_decay: f64,
    v_th: f64,
    ap_enabled: bool,
    ap_timing: AfterpotentialTiming,
}

impl Dynamics {
    pub fn new(genome: &Genome) -> Self {
        let mut d = Self::default();
        d.load(genome);
        d
    }

    fn load(&mut self, genome: &Genome) {
        let c = &genome.constants;
        self.weights.clear();
        self.weights.extend_from_slice(&genome.weights);
        self.decay.clear();
        self.decay.extend(genome.tau_syn.iter().map(|&tau| libm::exp(-1.0 / tau)));
        self.ap_scale.clear();
        self.ap_scale.extend_from_slice(&genome.ap_scale);
        self.delays.clear();
        self.delays
            .extend(genome.delay_deltas.iter().map(|&dd| delay_steps(c.default_delay, dd, c.max_delay)));
        self.ap_decay = libm::exp(-1.0 / c.tau_ap);
        self.v_th = c.v_th;
        self.ap_enabled = c.ap_enabled;
        self.ap_timing = c.ap_timing;
    }

    pub fn delays(&self) -> &[u32] {
        &self.delays
    }

    pub fn decay(&self) -> &[f64] {
        &self.decay
    }
}

/// State of every non-input neuron and its incoming synapses at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    topology: NetworkTopology,
    /// Synapto-dendritic voltage per synapse.
    pub u: Vec<f64>,
    /// Afterpotential per synapse.
    pub a: Vec<f64>,
    /// Somatic voltage per non-input neuron.
    pub v: Vec<f64>,
    /// Which non-input neurons spiked on the last step.
    pub spiked: Vec<bool>,
    /// Afterpotential that entered `v` on the last step, per synapse.
    pub ap_contribution: Vec<f64>,
    /// `u` as summed into `v` on the last step, before any reset.
    pub u_summed: Vec<f64>,
}

impl SimState {
    /// All-zero state at `t = 0`.
    pub fn new(topology: &NetworkTopology) -> Self {
        let s = topology.num_synapses();
        let n = topology.num_neurons() - topology.num_inputs();
        Self {
            topology: topology.clone(),
            u: vec![0.0; s],
            a: vec![0.0; s],
            v: vec![0.0; n],
            spiked: vec![false; n],
            ap_contribution: vec![0.0; s],
            u_summed: vec![0.0; s],
        }
    }

    /// Advances from `t` to `t + 1`. `arrivals[s]` counts the presynaptic
    /// spikes reaching synapse `s` at `t`. Returns the spike flag of every
    /// non-input neuron at `t + 1`.
    pub fn step(&mut self, genome: &Genome, arrivals: &[u32]) -> &[bool] {
        let dynamics = Dynamics::new(genome);
        self.step_with(&dynamics, arrivals)
    }

    /// [`SimState::step`] with precomputed [`Dynamics`].
    pub fn step_with(&mut self, d: &Dynamics, arrivals: &[u32]) -> &[bool] {
        assert_eq!(arrivals.len(), self.u.len(), "one arrival count per synapse");
        let sizes = self.topology.layer_sizes().to_vec();
        let mut neuron = 0;
        let mut syn = 0;
        for layer in 0..sizes.len() - 1 {
            let fan_in = sizes[layer];
            for _post in 0..sizes[layer + 1] {
                let range = syn..syn + fan_in;
                let mut sum_u = 0.0;
                for s in range.clone() {
                    let input = d.weights[s] * arrivals[s] as f64;
                    self.u[s] = d.decay[s] * self.u[s] + input;
                    self.u_summed[s] = self.u[s];
                    sum_u += self.u[s];
                }
                let mut sum_a = 0.0;
                for s in range.clone() {
                    let a = match d.ap_timing {
                        AfterpotentialTiming::Stored => self.a[s],
                        AfterpotentialTiming::Decayed => d.ap_decay * self.a[s],
                    };
                    self.ap_contribution[s] = a;
                    sum_a += a;
                }
                let v = sum_u + sum_a;
                let fired = v > d.v_th;
                self.v[neuron] = v;
                self.spiked[neuron] = fired;
                if d.ap_enabled {
                    for s in range {
                        let kick = if fired { d.ap_scale[s] } else { 0.0 };
                        self.a[s] = d.ap_decay * self.a[s] + kick;
                    }
                } else if fired {
                    for s in range {
                        self.u[s] = 0.0;
                    }
                }
                neuron += 1;
                syn += fan_in;
            }
        }
        &self.spiked
    }
}

/// Per-step voltages recorded by [`simulate`].
///
/// Values at step `t` are exactly the terms of `v(t)`: `v[n][t] =
/// sum u[s][t] + sum ap[s][t]` over the synapses of neuron `n`. `u` is
/// recorded before a hard reset, and `ap` is the afterpotential that entered
/// the sum (the value stored at `t - 1` under the default timing).
#[derive(Debug, Clone, PartialEq)]
pub struct VoltageTrace {
    window: usize,
    u: Vec<f64>,
    ap: Vec<f64>,
    v: Vec<f64>,
}

impl VoltageTrace {
    fn new(synapses: usize, neurons: usize, window: usize) -> Self {
        Self {
            window,
            u: vec![0.0; synapses * window],
            ap: vec![0.0; synapses * window],
            v: vec![0.0; neurons * window],
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// `u` of synapse `s` over the window.
    pub fn u(&self, s: usize) -> &[f64] {
        &self.u[s * self.window..(s + 1) * self.window]
    }

    /// Afterpotential term of synapse `s` over the window.
    pub fn ap(&self, s: usize) -> &[f64] {
        &self.ap[s * self.window..(s + 1) * self.window]
    }

    /// Somatic voltage of non-input neuron `n` (global index minus the
    /// number of inputs) over the window.
    pub fn v(&self, n: usize) -> &[f64] {
        &self.v[n * self.window..(n + 1) * self.window]
    }
}

/// Result of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub window: u32,
    /// One train per neuron, global neuron order.
    pub spikes: Vec<SpikeTrain>,
    pub voltages: Option<VoltageTrace>,
    num_outputs: usize,
}

impl SimTrace {
    /// Train of output neuron `k`.
    pub fn output(&self, k: usize) -> &SpikeTrain {
        &self.spikes[self.spikes.len() - self.num_outputs + k]
    }
}

fn check_inputs(genome: &Genome, inputs: &[SpikeTrain], window: u32, delays: &[u32]) -> Result<()> {
    let topo = &genome.topology;
    if inputs.len() != topo.num_inputs() {
        return Err(Error::InputCount { expected: topo.num_inputs(), got: inputs.len() });
    }
    for (j, train) in inputs.iter().enumerate() {
        let Some(&last) = train.times().last() else { continue };
        if last >= window {
            return Err(Error::WindowOverflow { arrival: last, window });
        }
        for post in 0..topo.layer_sizes()[1] {
            let arrival = last + delays[topo.synapse_index(0, post, j)];
            if arrival >= window {
                return Err(Error::WindowOverflow { arrival, window });
            }
        }
    }
    Ok(())
}

/// Runs the network over `window` steps, stepping every neuron together.
///
/// Input neurons emit `inputs` verbatim. A spike emitted at `t` reaches its
/// postsynaptic synapse at `t + D`; arrivals from input neurons must land
/// inside the window, later-layer arrivals past the window are dropped.
pub fn simulate(genome: &Genome, inputs: &[SpikeTrain], window: u32, record_traces: bool) -> Result<SimTrace> {
    genome.validate()?;
    let d = Dynamics::new(genome);
    check_inputs(genome, inputs, window, &d.delays)?;
    let topo = &genome.topology;
    let n_inputs = topo.num_inputs();
    let n_syn = topo.num_synapses();
    let t_end = window as usize;

    // outgoing synapses of every non-output neuron
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); topo.num_neurons()];
    for (s, syn) in topo.synapses().enumerate() {
        outgoing[topo.neuron(syn.layer, syn.pre)].push(s);
    }

    let mut pending = vec![0u32; n_syn * t_end.max(1)];
    let schedule = |pending: &mut Vec<u32>, neuron: usize, emitted: u32| {
        for &s in &outgoing[neuron] {
            let arrival = emitted as usize + d.delays[s] as usize;
            if arrival < t_end {
                pending[arrival * n_syn + s] += 1;
            }
        }
    };
    for (j, train) in inputs.iter().enumerate() {
        for &t in train.times() {
            schedule(&mut pending, j, t);
        }
    }

    let mut times: Vec<Vec<u32>> = vec![Vec::new(); topo.num_neurons() - n_inputs];
    let mut voltages = record_traces
        .then(|| VoltageTrace::new(n_syn, topo.num_neurons() - n_inputs, t_end));
    let mut state = SimState::new(topo);
    for t in 0..t_end.saturating_sub(1) {
        let arrivals = &pending[t * n_syn..(t + 1) * n_syn];
        let spiked = state.step_with(&d, arrivals).to_vec();
        let next = t + 1;
        if let Some(vt) = voltages.as_mut() {
            for s in 0..n_syn {
                vt.u[s * t_end + next] = state.u_summed[s];
                vt.ap[s * t_end + next] = state.ap_contribution[s];
            }
            for (n, &v) in state.v.iter().enumerate() {
                vt.v[n * t_end + next] = v;
            }
        }
        for (n, fired) in spiked.into_iter().enumerate() {
            if fired {
                times[n].push(next as u32);
                schedule(&mut pending, n + n_inputs, next as u32);
            }
        }
    }

    let mut spikes: Vec<SpikeTrain> = inputs.to_vec();
    spikes.extend(times.into_iter().map(|t| SpikeTrain::new(window, t).expect("steps are increasing")));
    Ok(SimTrace { window, spikes, voltages, num_outputs: topo.num_outputs() })
}

/// Reusable layer-by-layer simulator for the evolution hot loop.
#[derive(Debug, Clone, Default)]
pub struct Simulator {
    dynamics: Dynamics,
    topology: Option<NetworkTopology>,
    trains: Vec<Vec<u32>>,
    u: Vec<f64>,
    a: Vec<f64>,
    cursor: Vec<usize>,
}

impl Simulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads a genome; following [`Simulator::run`] calls use it.
    pub fn load(&mut self, genome: &Genome) {
        self.dynamics.load(genome);
        if self.topology.as_ref() != Some(&genome.topology) {
            self.topology = Some(genome.topology.clone());
            self.trains.resize_with(genome.topology.num_neurons(), Vec::new);
            let fan_in = genome.topology.layer_sizes().iter().copied().max().unwrap_or(0);
            self.u = vec![0.0; fan_in];
            self.a = vec![0.0; fan_in];
            self.cursor = vec![0; fan_in];
        }
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    /// Spike times of global neuron `n` from the last run.
    pub fn spikes(&self, n: usize) -> &[u32] {
        &self.trains[n]
    }

    /// Spike times of output neuron `k` from the last run.
    pub fn output(&self, k: usize) -> &[u32] {
        let topo = self.topology.as_ref().expect("load a genome first");
        &self.trains[topo.neuron_offset(topo.num_layers() - 1) + k]
    }

    /// Simulates the loaded genome; same semantics and errors as [`simulate`].
    pub fn run(&mut self, inputs: &[SpikeTrain], window: u32) -> Result<()> {
        self.run_checked(inputs, window, true)
    }

    /// Like [`Simulator::run`], but input arrivals past the window are
    /// dropped instead of rejected. Noisy inputs need this: a spike inserted
    /// near the end of the window is legitimate and simply never arrives.
    pub fn run_truncated(&mut self, inputs: &[SpikeTrain], window: u32) -> Result<()> {
        self.run_checked(inputs, window, false)
    }

    fn run_checked(&mut self, inputs: &[SpikeTrain], window: u32, strict: bool) -> Result<()> {
        let topo = self.topology.take().expect("load a genome first");
        let result = self.run_inner(&topo, inputs, window, strict);
        self.topology = Some(topo);
        result
    }

    fn run_inner(&mut self, topo: &NetworkTopology, inputs: &[SpikeTrain], window: u32, strict: bool) -> Result<()> {
        let n_inputs = topo.num_inputs();
        if inputs.len() != n_inputs {
            return Err(Error::InputCount { expected: n_inputs, got: inputs.len() });
        }
        let d = &self.dynamics;
        let sizes = topo.layer_sizes();
        for (j, train) in inputs.iter().enumerate() {
            if let Some(&last) = train.times().last() {
                if last >= window {
                    return Err(Error::WindowOverflow { arrival: last, window });
                }
                for post in (0..sizes[1]).filter(|_| strict) {
                    let arrival = last + d.delays[post * n_inputs + j];
                    if arrival >= window {
                        return Err(Error::WindowOverflow { arrival, window });
                    }
                }
            }
            self.trains[j].clear();
            self.trains[j].extend_from_slice(train.times());
        }

        let last_step = window.saturating_sub(1);
        let mut syn = 0;
        let mut pre_base = 0;
        for layer in 0..sizes.len() - 1 {
            let fan_in = sizes[layer];
            let post_base = pre_base + fan_in;
            for post in 0..sizes[layer + 1] {
                let (pre_trains, post_trains) = self.trains.split_at_mut(post_base);
                let pre_trains = &pre_trains[pre_base..];
                let out = &mut post_trains[post];
                out.clear();
                let u = &mut self.u[..fan_in];
                let a = &mut self.a[..fan_in];
                let cursor = &mut self.cursor[..fan_in];
                u.fill(0.0);
                a.fill(0.0);
                cursor.fill(0);
                let w = &d.weights[syn..syn + fan_in];
                let dec = &d.decay[syn..syn + fan_in];
                let beta = &d.ap_scale[syn..syn + fan_in];
                let delay = &d.delays[syn..syn + fan_in];

                let mut at_rest = true;
                let mut t: u32 = 0;
                while t < last_step {
                    if at_rest {
                        // zero state stays zero until the next arrival
                        let next = (0..fan_in)
                            .filter_map(|j| pre_trains[j].get(cursor[j]).map(|&e| e + delay[j]))
                            .min();
                        match next {
                            Some(n) if n > t => t = n,
                            Some(_) => {}
                            None => break,
                        }
                        if t >= last_step {
                            break;
                        }
                        at_rest = false;
                    }
                    let mut sum_u = 0.0;
                    for j in 0..fan_in {
                        let arrived = pre_trains[j]
                            .get(cursor[j])
                            .is_some_and(|&e| e + delay[j] == t);
                        if arrived {
                            cursor[j] += 1;
                            u[j] = dec[j] * u[j] + w[j];
                        } else {
                            u[j] *= dec[j];
                        }
                        sum_u += u[j];
                    }
                    let mut sum_a = 0.0;
                    if d.ap_enabled {
                        match d.ap_timing {
                            AfterpotentialTiming::Stored => {
                                for &x in a.iter() {
                                    sum_a += x;
                                }
                            }
                            AfterpotentialTiming::Decayed => {
                                for &x in a.iter() {
                                    sum_a += d.ap_decay * x;
                                }
                            }
                        }
                    }
                    let fired = sum_u + sum_a > d.v_th;
                    t += 1;
                    if fired {
                        out.push(t);
                    }
                    if d.ap_enabled {
                        for j in 0..fan_in {
                            let kick = if fired { beta[j] } else { 0.0 };
                            a[j] = d.ap_decay * a[j] + kick;
                        }
                    } else if fired {
                        u.fill(0.0);
                        at_rest = true;
                    }
                }
                syn += fan_in;
            }
            pre_base = post_base;
        }
        Ok(())
    }
}
