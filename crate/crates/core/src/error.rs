//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The parent relation of a network contains a directed cycle.
    #[error("cycle detected in parent relation involving node `{0}`")]
    Cycle(String),

    /// A conditional probability table failed validation.
    #[error("invalid CPT for node `{node}`: {reason}")]
    InvalidCpt { node: String, reason: String },

    /// An exact enumeration was requested over a state space above the cap.
    #[error("joint state space of {states} states exceeds enumeration cap {cap}")]
    TooLarge { states: u128, cap: u128 },

    /// The evidence configuration has probability zero.
    #[error("evidence has probability zero; posterior undefined")]
    ZeroEvidence,

    /// A conditional distribution is identically zero and cannot be normalized.
    #[error("degenerate conditional for node `{0}`: unnormalized vector is identically zero")]
    Degenerate(String),

    /// Every importance sample was rejected; the total weight is zero.
    #[error("all {0} samples rejected; total weight is zero")]
    AllRejected(u64),

    /// A Metropolis-Hastings proposal assigned zero probability to the value it drew.
    #[error("proposal for node `{node}` drew value {value} with zero probability")]
    ZeroProposal { node: String, value: usize },

    /// A matrix expected to be unitary is not, within tolerance.
    #[error("matrix is not unitary: max |U^dag U - I| = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    /// A qubit index is out of range or a gate references a qubit twice.
    #[error("bad qubit index: {0}")]
    Index(String),

    /// A circuit would need more qubits than the simulator cap allows.
    #[error("circuit needs {needed} qubits, above the cap of {cap} (override with QBN_MAX_QUBITS)")]
    Width { needed: usize, cap: usize },

    /// A file or text format failed to parse.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
