//! Grid discretization of real functions into qubit amplitudes, matrix product
//! state encodings, entanglement profiles, and the bounds relating them.
//!
//! Qubit 0 is the most significant bit of the grid index, and cut `k`
//! separates qubits `0..k` from `k..N`.

pub mod bounds;
pub mod entropy;
pub mod error;
pub mod funcgrid;
pub mod harness;
mod linalg;
pub mod mps;
pub mod polyapprox;

pub use bounds::{BoundReport, Corollary2, DegreeGrowth, TrendRow};
pub use entropy::{CutEntropy, EntropyProfile, FannesCheck, SchmidtSource};
pub use error::{Error, Result};
pub use funcgrid::{discretize, DerivBound, DiscretizedState, Domain, Family, FunctionSpec};
pub use mps::{Canonical, MatrixProductState, MpsCore, Truncation, TruncationPolicy};
pub use polyapprox::{ApproxReport, ChebyshevPoly};
