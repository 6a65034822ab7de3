//! Discrete-time spiking networks whose neurons carry per-synapse time
//! constants, adaptable conduction delays and an optional inhibitory spike
//! afterpotential, together with the truncation-selection evolution strategy
//! used to fit them to temporally encoded logic tasks.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! evaluation and the experiment harness live in the `chronoevo` crate.
//!
//! The model advances in 1 ms steps. For a postsynaptic neuron `i` with
//! presynaptic neurons `j`:
//!
//! ```text
//! I_ij(t)   = W_ij * (spikes of j emitted at t - D_ij)
//! u_ij(t+1) = exp(-1/tau_ij) * u_ij(t) + I_ij(t)
//! v_i(t+1)  = sum_j u_ij(t+1) + sum_j A_ij(t)
//! S_i(t+1)  = v_i(t+1) > v_th
//! A_ij(t+1) = exp(-1/tau_ap) * A_ij(t) + beta_ij * S_i(t+1)
//! ```
//!
//! Without the afterpotential a spike hard-resets every `u_ij` of the
//! firing neuron to zero.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod encoding;
pub mod error;
pub mod evolution;
pub mod genome;
pub mod loss;
pub mod model;
pub mod noise;
pub mod rng;
pub mod spike;
pub mod topology;

pub use encoding::{BitCode, Case, Gate, OutputMode, ResolvedTask, TaskSpec};
pub use error::{Error, Result};
pub use evolution::{EvolutionConfig, GenerationReport, RunOutcome};
pub use genome::{ClipRange, Genome, ModelConstants, ParamKind, ParamMask, PerKind};
pub use loss::LossValue;
pub use model::{effective_delay, simulate, SimState, SimTrace, Simulator};
pub use spike::SpikeTrain;
pub use topology::NetworkTopology;
