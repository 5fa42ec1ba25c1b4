//! Uplink MIMO capacity under quantization noise and the search for the
//! quantization widths that maximize it while keeping every edge switch
//! schedulable.

mod channel;
mod search;

pub use channel::{ergodic_capacity, per_realization_capacity, ChannelEnsemble, QuantNoiseModel};
pub use search::{
    bfs_search, brute_force_oracle, e2e_under_q, enum_next, schedulable_under_q, ExploredNode, QuantSearch,
    SearchReport, DEFAULT_ORACLE_CAP,
};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::TopologyError;

#[derive(Debug, Error)]
pub enum CapacityError {
    #[error("quantization ladder is empty")]
    EmptyLadder,
    #[error("quantization ladder must be strictly increasing positive integers, got {0:?}")]
    BadLadder(Vec<u32>),
    #[error("{0} bits is not a ladder level")]
    NotOnLadder(u32),
    #[error("quantization vector has {found} entries, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error("channel ensemble has no realizations")]
    EmptyEnsemble,
    #[error("channel dimensions must be positive")]
    ZeroDimension,
    #[error("realization {index} is {rows}x{cols}, expected {n}x{m}")]
    Shape { index: usize, rows: usize, cols: usize, n: usize, m: usize },
    #[error("{name} must be positive and finite, got {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error("capacity evaluation produced a non-finite value")]
    NonFinite,
    #[error("lattice of {size} vectors exceeds the oracle cap {cap}")]
    OracleCap { size: u128, cap: u128 },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Traffic(#[from] crate::traffic::TrafficError),
}

/// Admissible ADC widths, strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantLadder(Vec<u32>);

impl QuantLadder {
    pub fn new(levels: Vec<u32>) -> Result<Self, CapacityError> {
        if levels.is_empty() {
            return Err(CapacityError::EmptyLadder);
        }
        if levels[0] == 0 || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CapacityError::BadLadder(levels));
        }
        Ok(QuantLadder(levels))
    }

    pub fn levels(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn lowest(&self) -> u32 {
        self.0[0]
    }

    pub fn highest(&self) -> u32 {
        self.0[self.0.len() - 1]
    }

    pub fn index_of(&self, bits: u32) -> Option<usize> {
        self.0.binary_search(&bits).ok()
    }

    /// Next lower level, `None` at the bottom or off the ladder.
    pub fn below(&self, bits: u32) -> Option<u32> {
        self.index_of(bits).and_then(|k| k.checked_sub(1)).map(|k| self.0[k])
    }

    pub fn above(&self, bits: u32) -> Option<u32> {
        self.index_of(bits).and_then(|k| self.0.get(k + 1).copied())
    }
}

/// Per-radio widths, each a ladder level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuantizationVector(Vec<u32>);

impl QuantizationVector {
    pub fn new(bits: Vec<u32>, ladder: &QuantLadder) -> Result<Self, CapacityError> {
        if let Some(&b) = bits.iter().find(|&&b| ladder.index_of(b).is_none()) {
            return Err(CapacityError::NotOnLadder(b));
        }
        Ok(QuantizationVector(bits))
    }

    pub fn uniform(n: usize, bits: u32, ladder: &QuantLadder) -> Result<Self, CapacityError> {
        QuantizationVector::new(vec![bits; n], ladder)
    }

    pub fn bits(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Coordinate-wise `self ≤ other`.
    pub fn dominated_by(&self, other: &QuantizationVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub(crate) fn with(&self, i: usize, bits: u32) -> Self {
        let mut v = self.0.clone();
        v[i] = bits;
        QuantizationVector(v)
    }
}

impl fmt::Display for QuantizationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}
