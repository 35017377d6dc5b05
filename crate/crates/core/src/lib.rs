//! Exact simulation of Lambda-coalescents.
//!
//! The crate covers four layers:
//!
//! - [`measure`]: finite measures on [0,1] (atoms + named density pieces) and
//!   all integral functionals: merger rates lambda_{b,k}, total rates g_b and
//!   the normalizers mu^(n), mu-bar^(n).
//! - [`partition`]: labelled partitions of {1..n}, the refinement order and
//!   restriction by the smallest element.
//! - [`simulator`]: precomputed rate tables and the exact jump-chain engine,
//!   in full-partition and block-count-only modes, plus branch statistics.
//! - [`coupling`] and [`analysis`]: the pathwise constructions (measure
//!   division, two-type marking, monotone coupling, tripling) and the
//!   deterministic numerics (condition diagnostics, branch-length recurrences,
//!   goodness-of-fit tests) used to verify them.
//!
//! All randomness flows from a single u64 seed through counter-derived
//! substreams ([`rng::substream`]), so replicated experiments are
//! bit-reproducible regardless of how many worker threads run them.

pub mod analysis;
pub mod coupling;
pub mod error;
pub mod measure;
pub mod partition;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
pub use measure::FiniteMeasure;
pub use partition::LabeledPartition;
pub use simulator::RateTable;
