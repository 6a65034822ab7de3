//! Layered feedforward topologies and the flat synapse/neuron indexing used
//! by genomes and simulation state.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Neuron counts per layer, input first. Adjacent layers are fully connected.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<usize>", into = "Vec<usize>"))]
pub struct NetworkTopology {
    layer_sizes: Vec<usize>,
}

/// One synapse `pre -> post` between layer `layer` and `layer + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Synapse {
    /// Index of the presynaptic layer.
    pub layer: usize,
    /// Postsynaptic neuron within layer `layer + 1`.
    pub post: usize,
    /// Presynaptic neuron within layer `layer`.
    pub pre: usize,
}

impl NetworkTopology {
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Topology("need at least an input and an output layer".into()));
        }
        if layer_sizes.iter().any(|&n| n == 0) {
            return Err(Error::Topology("every layer needs at least one neuron".into()));
        }
        Ok(Self { layer_sizes })
    }

    /// Two inputs, `hidden` hidden neurons, one output.
    pub fn two_hidden_one(hidden: usize) -> Self {
        Self::new(alloc::vec![2, hidden, 1]).expect("hidden layer must be non-empty")
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn num_outputs(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn num_neurons(&self) -> usize {
        self.layer_sizes.iter().sum()
    }

    pub fn num_synapses(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[0] * w[1]).sum()
    }

    /// Global index of the first neuron of `layer`.
    pub fn neuron_offset(&self, layer: usize) -> usize {
        self.layer_sizes[..layer].iter().sum()
    }

    /// Global neuron index of `(layer, index)`.
    pub fn neuron(&self, layer: usize, index: usize) -> usize {
        debug_assert!(index < self.layer_sizes[layer]);
        self.neuron_offset(layer) + index
    }

    /// Layer and in-layer index of a global neuron index.
    pub fn locate_neuron(&self, neuron: usize) -> (usize, usize) {
        let mut rest = neuron;
        for (layer, &n) in self.layer_sizes.iter().enumerate() {
            if rest < n {
                return (layer, rest);
            }
            rest -= n;
        }
        panic!("neuron {neuron} out of range");
    }

    /// Index of the first synapse projecting from `layer` into `layer + 1`.
    pub fn synapse_offset(&self, layer: usize) -> usize {
        self.layer_sizes[..=layer].windows(2).map(|w| w[0] * w[1]).sum()
    }

    /// Flat synapse index; ordered by layer, then postsynaptic, then
    /// presynaptic neuron.
    pub fn synapse_index(&self, layer: usize, post: usize, pre: usize) -> usize {
        let pre_n = self.layer_sizes[layer];
        debug_assert!(pre < pre_n && post < self.layer_sizes[layer + 1]);
        self.synapse_offset(layer) + post * pre_n + pre
    }

    /// All synapses in flat index order.
    pub fn synapses(&self) -> impl Iterator<Item = Synapse> + '_ {
        self.layer_sizes.windows(2).enumerate().flat_map(|(layer, w)| {
            let (pre_n, post_n) = (w[0], w[1]);
            (0..post_n).flat_map(move |post| (0..pre_n).map(move |pre| Synapse { layer, post, pre }))
        })
    }
}

impl Default for NetworkTopology {
    fn default() -> Self {
        Self::two_hidden_one(4)
    }
}

impl TryFrom<Vec<usize>> for NetworkTopology {
    type Error = Error;
    fn try_from(sizes: Vec<usize>) -> Result<Self> {
        Self::new(sizes)
    }
}

impl From<NetworkTopology> for Vec<usize> {
    fn from(t: NetworkTopology) -> Self {
        t.layer_sizes
    }
}
