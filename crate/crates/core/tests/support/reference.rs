//! Naive reference evaluator: steps every neuron globally and recounts
//! arrivals by scanning all emitted spikes at every step. Shares nothing
//! with the library beyond the genome data type.

use chronoevo_core::genome::AfterpotentialTiming;
use chronoevo_core::Genome;

pub struct Reference {
    /// Spike times per global neuron.
    pub spikes: Vec<Vec<u32>>,
    /// `[synapse][t]`, the `u` summed into `v(t)`.
    pub u: Vec<Vec<f64>>,
    /// `[synapse][t]`, the afterpotential summed into `v(t)`.
    pub ap: Vec<Vec<f64>>,
    /// `[non-input neuron][t]`.
    pub v: Vec<Vec<f64>>,
}

struct Syn {
    pre: usize,
    post: usize,
    w: f64,
    decay: f64,
    beta: f64,
    delay: u32,
}

pub fn reference(genome: &Genome, inputs: &[Vec<u32>], window: u32) -> Reference {
    let sizes = genome.topology.layer_sizes().to_vec();
    let c = genome.constants;
    let n_in = sizes[0];
    let n_neurons: usize = sizes.iter().sum();

    let mut syns = Vec::new();
    let mut k = 0;
    let mut base = 0;
    for l in 0..sizes.len() - 1 {
        for i in 0..sizes[l + 1] {
            for j in 0..sizes[l] {
                let raw = (c.default_delay + genome.delay_deltas[k]).round();
                let delay = raw.max(0.0).min(c.max_delay as f64) as u32;
                syns.push(Syn {
                    pre: base + j,
                    post: base + sizes[l] + i,
                    w: genome.weights[k],
                    decay: libm::exp(-1.0 / genome.tau_syn[k]),
                    beta: genome.ap_scale[k],
                    delay,
                });
                k += 1;
            }
        }
        base += sizes[l];
    }
    let ap_decay = libm::exp(-1.0 / c.tau_ap);

    let t_end = window as usize;
    let mut spikes: Vec<Vec<u32>> = vec![Vec::new(); n_neurons];
    for (j, t) in inputs.iter().enumerate() {
        spikes[j] = t.clone();
    }
    let mut u = vec![0.0; syns.len()];
    let mut a = vec![0.0; syns.len()];
    let mut u_tr = vec![vec![0.0; t_end]; syns.len()];
    let mut ap_tr = vec![vec![0.0; t_end]; syns.len()];
    let mut v_tr = vec![vec![0.0; t_end]; n_neurons - n_in];

    for t in 0..t_end.saturating_sub(1) {
        let mut fired_now = Vec::new();
        for n in n_in..n_neurons {
            let mine: Vec<usize> = (0..syns.len()).filter(|&s| syns[s].post == n).collect();
            let mut sum_u = 0.0;
            for &s in &mine {
                let count = spikes[syns[s].pre]
                    .iter()
                    .filter(|&&e| e + syns[s].delay == t as u32)
                    .count();
                u[s] = syns[s].decay * u[s] + syns[s].w * count as f64;
                u_tr[s][t + 1] = u[s];
                sum_u += u[s];
            }
            let mut sum_a = 0.0;
            for &s in &mine {
                let term = match c.ap_timing {
                    AfterpotentialTiming::Stored => a[s],
                    AfterpotentialTiming::Decayed => ap_decay * a[s],
                };
                ap_tr[s][t + 1] = term;
                sum_a += term;
            }
            let v = sum_u + sum_a;
            v_tr[n - n_in][t + 1] = v;
            let fired = v > c.v_th;
            if c.ap_enabled {
                for &s in &mine {
                    a[s] = ap_decay * a[s] + if fired { syns[s].beta } else { 0.0 };
                }
            } else if fired {
                for &s in &mine {
                    u[s] = 0.0;
                }
            }
            if fired {
                fired_now.push(n);
            }
        }
        for n in fired_now {
            spikes[n].push(t as u32 + 1);
        }
    }
    Reference { spikes, u: u_tr, ap: ap_tr, v: v_tr }
}
