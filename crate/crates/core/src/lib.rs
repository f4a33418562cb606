//! Hybrid classical-quantum routing optimization for wireless sensor networks.
//!
//! The library models a WSN as a range-limited geometric graph, partitions it
//! with spectral clustering, formulates per-cluster routing as a QUBO with
//! flow-conservation and energy penalties, solves each subproblem either by
//! exact QAOA statevector simulation or by a classical fallback, reassembles a
//! globally connected solution, and reports energy metrics. A companion module
//! estimates the compilation cost of each sub-circuit on heavy-hexagonal
//! quantum hardware.
//!
//! Pipeline stages map onto modules:
//!
//! | stage                                   | module       |
//! |-----------------------------------------|--------------|
//! | network model, instance generation      | [`netmodel`] |
//! | spectral partitioning                   | [`cluster`]  |
//! | QUBO / Ising formulation                | [`qubo`]     |
//! | QAOA statevector solver                 | [`qaoa`]     |
//! | greedy classical baseline               | [`baseline`] |
//! | merge, repair, metrics, full pipeline   | [`assembly`] |
//! | heavy-hex compilation cost estimates    | [`hexcompile`] |
//!
//! All randomness flows from a single top-level seed through
//! [`seeding::derive_seed`], so identical configurations reproduce identical
//! outputs byte for byte.

pub mod assembly;
pub mod baseline;
pub mod cluster;
pub mod error;
pub mod hexcompile;
pub mod netmodel;
pub mod qaoa;
pub mod qubo;
pub mod seeding;

pub use error::{Error, Result};
