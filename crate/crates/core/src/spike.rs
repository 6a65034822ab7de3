//! Spike trains on the 1 ms step grid.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Strictly increasing spike times inside a window of `window` steps.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawTrain", into = "RawTrain"))]
pub struct SpikeTrain {
    window: u32,
    times: Vec<u32>,
}

impl SpikeTrain {
    pub fn new(window: u32, times: Vec<u32>) -> Result<Self> {
        if let Some(w) = times.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::SpikeTrain(alloc::format!(
                "times must be strictly increasing, found {} then {}",
                w[0],
                w[1]
            )));
        }
        if let Some(&last) = times.last() {
            if last >= window {
                return Err(Error::SpikeTrain(alloc::format!(
                    "spike at {last} outside window of {window} steps"
                )));
            }
        }
        Ok(Self { window, times })
    }

    /// Builds a train from arbitrary times, sorting, merging duplicates and
    /// clamping to the window.
    pub fn from_unsorted(window: u32, mut times: Vec<u32>) -> Self {
        assert!(window > 0 || times.is_empty(), "non-empty train needs a window");
        for t in times.iter_mut() {
            *t = (*t).min(window.saturating_sub(1));
        }
        times.sort_unstable();
        times.dedup();
        Self { window, times }
    }

    pub fn empty(window: u32) -> Self {
        Self { window, times: Vec::new() }
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn times(&self) -> &[u32] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn contains(&self, t: u32) -> bool {
        self.times.binary_search(&t).is_ok()
    }

    /// Per-step 0/1 occupancy.
    pub fn to_dense(&self) -> Vec<bool> {
        let mut dense = alloc::vec![false; self.window as usize];
        for &t in &self.times {
            dense[t as usize] = true;
        }
        dense
    }

    /// Same spikes in a longer (or equal) window.
    pub fn with_window(&self, window: u32) -> Result<Self> {
        Self::new(window, self.times.clone())
    }

    /// Shifts every spike and the window end by `k` steps.
    pub fn shifted(&self, k: u32) -> Self {
        Self {
            window: self.window + k,
            times: self.times.iter().map(|t| t + k).collect(),
        }
    }
}

impl fmt::Debug for SpikeTrain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpikeTrain({}; {:?})", self.window, self.times)
    }
}

/// Renders the train as `.` / `|` per step.
impl fmt::Display for SpikeTrain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut next = self.times.iter().peekable();
        for t in 0..self.window {
            if next.peek() == Some(&&t) {
                next.next();
                f.write_str("|")?;
            } else {
                f.write_str(".")?;
            }
        }
        Ok(())
    }
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct RawTrain {
    window: u32,
    times: Vec<u32>,
}

#[cfg(feature = "serde")]
impl TryFrom<RawTrain> for SpikeTrain {
    type Error = Error;
    fn try_from(raw: RawTrain) -> Result<Self> {
        SpikeTrain::new(raw.window, raw.times)
    }
}

#[cfg(feature = "serde")]
impl From<SpikeTrain> for RawTrain {
    fn from(train: SpikeTrain) -> Self {
        RawTrain { window: train.window, times: train.times }
    }
}
