mod support;

use chronoevo_core::genome::AfterpotentialTiming;
use chronoevo_core::{simulate, Genome, ModelConstants, NetworkTopology, PerKind, SimTrace, Simulator, SpikeTrain};
use proptest::prelude::*;
use support::reference::reference;

const WINDOW: u32 = 64;
/// Inputs stay early enough that every input arrival fits the window.
const LAST_INPUT: u32 = WINDOW - 26;

fn topologies() -> impl Strategy<Value = NetworkTopology> {
    prop_oneof![
        Just(vec![2, 4, 1]),
        Just(vec![2, 3, 2]),
        Just(vec![3, 2, 2, 1]),
        Just(vec![1, 1]),
    ]
    .prop_map(|s| NetworkTopology::new(s).unwrap())
}

fn genome_for(topo: NetworkTopology) -> impl Strategy<Value = Genome> {
    let n = topo.num_synapses();
    (
        prop::collection::vec(-2.0f64..2.0, n),
        prop::collection::vec(-8.0f64..22.0, n),
        prop::collection::vec(0.3f64..25.0, n),
        prop::collection::vec(-2.0f64..=0.0, n),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(move |(weights, delay_deltas, tau_syn, ap_scale, ap, decayed)| {
            let constants = ModelConstants {
                ap_enabled: ap,
                ap_timing: if decayed { AfterpotentialTiming::Decayed } else { AfterpotentialTiming::Stored },
                ..ModelConstants::default()
            };
            Genome { topology: topo.clone(), constants, weights, delay_deltas, tau_syn, ap_scale }
        })
}

fn genomes() -> impl Strategy<Value = Genome> {
    topologies().prop_flat_map(genome_for)
}

fn input_trains(n: usize) -> impl Strategy<Value = Vec<SpikeTrain>> {
    prop::collection::vec(prop::collection::vec(0..LAST_INPUT, 0..=5), n)
        .prop_map(|ts| ts.into_iter().map(|t| SpikeTrain::from_unsorted(WINDOW, t)).collect())
}

fn case() -> impl Strategy<Value = (Genome, Vec<SpikeTrain>)> {
    genomes().prop_flat_map(|g| {
        let n = g.topology.num_inputs();
        (Just(g), input_trains(n))
    })
}

fn assert_matches_reference(g: &Genome, inputs: &[SpikeTrain], trace: &SimTrace) {
    let raw: Vec<Vec<u32>> = inputs.iter().map(|t| t.times().to_vec()).collect();
    let r = reference(g, &raw, WINDOW);
    for (n, train) in trace.spikes.iter().enumerate() {
        assert_eq!(train.times(), r.spikes[n].as_slice(), "neuron {n}");
    }
    let vt = trace.voltages.as_ref().unwrap();
    for s in 0..g.topology.num_synapses() {
        assert_eq!(vt.u(s), r.u[s].as_slice(), "u of synapse {s}");
        assert_eq!(vt.ap(s), r.ap[s].as_slice(), "ap of synapse {s}");
    }
    for n in 0..r.v.len() {
        assert_eq!(vt.v(n), r.v[n].as_slice(), "v of neuron {n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn global_engine_matches_reference((g, inputs) in case()) {
        let trace = simulate(&g, &inputs, WINDOW, true).unwrap();
        assert_matches_reference(&g, &inputs, &trace);
    }

    #[test]
    fn fast_engine_matches_global((g, inputs) in case()) {
        let trace = simulate(&g, &inputs, WINDOW, false).unwrap();
        let mut sim = Simulator::new();
        sim.load(&g);
        sim.run(&inputs, WINDOW).unwrap();
        for n in 0..g.topology.num_neurons() {
            prop_assert_eq!(sim.spikes(n), trace.spikes[n].times());
        }
    }

    #[test]
    fn simulator_reuse_is_stateless((g1, in1) in case(), (g2, in2) in case()) {
        let mut shared = Simulator::new();
        shared.load(&g1);
        shared.run(&in1, WINDOW).unwrap();
        shared.load(&g2);
        shared.run(&in2, WINDOW).unwrap();
        let mut fresh = Simulator::new();
        fresh.load(&g2);
        fresh.run(&in2, WINDOW).unwrap();
        for n in 0..g2.topology.num_neurons() {
            prop_assert_eq!(shared.spikes(n), fresh.spikes(n));
        }
    }

    #[test]
    fn deterministic((g, inputs) in case()) {
        prop_assert_eq!(simulate(&g, &inputs, WINDOW, true).unwrap(), simulate(&g, &inputs, WINDOW, true).unwrap());
    }

    #[test]
    fn causal((g, inputs) in case()) {
        // Nothing happens before the first input arrival; the first
        // possible output spike is one step after it.
        let trace = simulate(&g, &inputs, WINDOW, false).unwrap();
        let delays = g.effective_delays();
        let first_arrival = g.topology.synapses().enumerate()
            .filter(|(_, syn)| syn.layer == 0)
            .filter_map(|(s, syn)| inputs[syn.pre].times().first().map(|&t| t + delays[s]))
            .min();
        for n in g.topology.num_inputs()..g.topology.num_neurons() {
            if let Some(&first) = trace.spikes[n].times().first() {
                prop_assert!(first > first_arrival.unwrap());
            }
        }
        if first_arrival.is_none() {
            prop_assert!(trace.spikes[g.topology.num_inputs()..].iter().all(|t| t.is_empty()));
        }
    }

    #[test]
    fn shifting_inputs_shifts_outputs((g, inputs) in case(), k in 0u32..20) {
        let base = simulate(&g, &inputs, WINDOW, false).unwrap();
        let shifted: Vec<SpikeTrain> = inputs.iter().map(|t| t.shifted(k)).collect();
        let later = simulate(&g, &shifted, WINDOW + k, false).unwrap();
        for n in 0..g.topology.num_neurons() {
            let expect: Vec<u32> = base.spikes[n].times().iter().map(|t| t + k).collect();
            prop_assert_eq!(later.spikes[n].times(), expect.as_slice());
        }
    }

    #[test]
    fn subthreshold_response_is_linear_in_weights((g, inputs) in case(), p in -2i32..=2) {
        // Powers of two scale floating-point values exactly.
        let c = 2f64.powi(p);
        let mut quiet = g.clone();
        quiet.constants.v_th = 1e12;
        let mut scaled = quiet.clone();
        scaled.weights.iter_mut().for_each(|w| *w *= c);
        let a = simulate(&quiet, &inputs, WINDOW, true).unwrap();
        let b = simulate(&scaled, &inputs, WINDOW, true).unwrap();
        let (va, vb) = (a.voltages.unwrap(), b.voltages.unwrap());
        for n in 0..g.topology.num_neurons() - g.topology.num_inputs() {
            let expect: Vec<f64> = va.v(n).iter().map(|v| v * c).collect();
            prop_assert_eq!(vb.v(n), expect.as_slice());
        }
    }

    #[test]
    fn zero_afterpotential_agrees_with_hard_reset_until_first_spike((g, inputs) in case()) {
        let mut reset = g.clone();
        reset.constants.ap_enabled = false;
        let mut ap = g.clone();
        ap.constants.ap_enabled = true;
        ap.ap_scale.iter_mut().for_each(|b| *b = 0.0);
        let a = simulate(&reset, &inputs, WINDOW, true).unwrap();
        let b = simulate(&ap, &inputs, WINDOW, true).unwrap();
        let first = a.spikes[g.topology.num_inputs()..].iter().filter_map(|t| t.times().first()).min().copied();
        match first {
            None => prop_assert_eq!(a, b),
            Some(t0) => {
                let (va, vb) = (a.voltages.unwrap(), b.voltages.unwrap());
                for n in 0..g.topology.num_neurons() - g.topology.num_inputs() {
                    prop_assert_eq!(&va.v(n)[..=t0 as usize], &vb.v(n)[..=t0 as usize]);
                }
            }
        }
    }

    #[test]
    fn hard_reset_forgets_history((g, inputs) in case()) {
        // After a spike at t, v(t + 1) only sees the arrivals at t.
        let mut g = g;
        g.constants.ap_enabled = false;
        let trace = simulate(&g, &inputs, WINDOW, true).unwrap();
        let vt = trace.voltages.as_ref().unwrap();
        let topo = &g.topology;
        let delays = g.effective_delays();
        for (s, syn) in topo.synapses().enumerate() {
            let post = topo.neuron(syn.layer + 1, syn.post);
            let pre = topo.neuron(syn.layer, syn.pre);
            for &t in trace.spikes[post].times() {
                if t + 1 >= WINDOW {
                    continue;
                }
                let count = trace.spikes[pre].times().iter().filter(|&&e| e + delays[s] == t).count();
                prop_assert_eq!(vt.u(s)[t as usize + 1], g.weights[s] * count as f64);
            }
        }
    }
}

fn single(weights: &[f64], taus: &[f64], deltas: &[f64]) -> Genome {
    let topo = NetworkTopology::new(vec![weights.len(), 1]).unwrap();
    let mut g = Genome::uniform(
        topo,
        ModelConstants::default(),
        PerKind { weight: 0.0, delay: 0.0, time_constant: 10.0, afterpotential: 0.0 },
    );
    g.weights.copy_from_slice(weights);
    g.tau_syn.copy_from_slice(taus);
    g.delay_deltas.copy_from_slice(deltas);
    g
}

#[test]
fn inhibition_with_fast_decay_delays_the_crossing() {
    // A strong slow excitatory input cancelled by a fast inhibitory one
    // crosses threshold only once the inhibition has decayed away.
    let g = single(&[2.0, -1.0], &[20.0, 0.5], &[0.0, 0.0]);
    let inputs = [SpikeTrain::new(40, vec![3]).unwrap(), SpikeTrain::new(40, vec![3]).unwrap()];
    let trace = simulate(&g, &inputs, 40, true).unwrap();
    let arrival = 3 + 5;
    assert_eq!(trace.output(0).times(), &[arrival + 2]);
    let v = trace.voltages.unwrap();
    assert!(v.v(0)[arrival as usize + 1] <= 1.1);
    assert!(v.v(0)[arrival as usize + 2] > 1.1);

    // Without the inhibitory synapse the crossing is immediate.
    let alone = single(&[2.0, 0.0], &[20.0, 0.5], &[0.0, 0.0]);
    let trace = simulate(&alone, &inputs, 40, false).unwrap();
    assert_eq!(trace.output(0).times(), &[arrival + 1]);
}

#[test]
fn longer_time_constant_integrates_spaced_spikes() {
    // Two spikes 4 ms apart at W = 0.62 sum past threshold only when the
    // synapse remembers long enough.
    let inputs = [SpikeTrain::new(40, vec![2, 6]).unwrap()];
    let short = simulate(&single(&[0.62], &[2.0], &[0.0]), &inputs, 40, false).unwrap();
    assert!(short.output(0).is_empty());
    let long = simulate(&single(&[0.62], &[20.0], &[0.0]), &inputs, 40, false).unwrap();
    assert_eq!(long.output(0).times(), &[12]);
}

#[test]
fn delays_shift_the_output() {
    let inputs = [SpikeTrain::new(50, vec![10]).unwrap()];
    for dd in [-5.0, -2.4, 0.0, 3.5, 10.0, 20.0] {
        let g = single(&[1.5], &[5.0], &[dd]);
        let d = g.effective_delays()[0];
        let trace = simulate(&g, &inputs, 50, false).unwrap();
        assert_eq!(trace.output(0).times(), &[10 + d + 1], "delta {dd}");
    }
}
