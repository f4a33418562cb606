//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An instance specification or instance file violates a model invariant.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A caller-supplied argument is out of range for the operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Adjacency input to the Laplacian is not symmetric.
    #[error("adjacency matrix is asymmetric at ({0}, {1})")]
    AsymmetricAdjacency(usize, usize),

    /// The Jacobi eigensolver did not reach the residual tolerance.
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {offdiag:.3e})")]
    EigenNoConvergence { sweeps: usize, offdiag: f64 },

    /// k-means could not produce k non-empty clusters within the restart cap.
    #[error("k-means failed to fill {k} clusters after {restarts} restarts")]
    EmptyCluster { k: usize, restarts: usize },

    /// A subgraph has neither a base station nor a cluster head to act as sink.
    #[error("subgraph has no sink candidate (no base station or cluster head)")]
    NoSink,

    /// Bitstring length does not match the number of model variables.
    #[error("bitstring length {got} does not match {expected} variables")]
    LengthMismatch { got: usize, expected: usize },

    /// Problem size exceeds an enumeration or simulation cap.
    #[error("{what}: size {n} exceeds cap {cap}")]
    TooLarge { what: &'static str, n: usize, cap: usize },

    /// The requested operation is not defined for the model's configuration.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A set of sub-circuits cannot be packed onto the given hardware.
    #[error("infeasible packing: sub-circuit {circuit} with {spins} spins does not fit")]
    InfeasiblePacking { circuit: usize, spins: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
