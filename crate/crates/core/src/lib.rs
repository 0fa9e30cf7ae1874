//! Posit arithmetic and mixed-precision iterative refinement.
//!
//! The crate has three layers:
//!
//! * [`posit`] — bit-exact software posits of configurable width with the
//!   16n-bit quire accumulator,
//! * [`linalg`] and [`cast`] — dense LU with partial pivoting, quire-fused
//!   residuals and norms, condition estimates, and the three
//!   working-to-low-precision conversion strategies,
//! * [`ir`], [`market`], [`suite`], [`bench`] — the refinement solver, Matrix
//!   Market ingestion, the test-suite manifest, and the benchmark harness.

pub mod bench;
pub mod cast;
pub mod ir;
pub mod linalg;
pub mod market;
pub mod posit;
pub mod suite;

pub use cast::{CastError, CastReport, Ratio64, ScalingRecord};
pub use ir::{CastMode, RefinementReport, SolveError, SolveSettings};
pub use linalg::{DenseMatrix, DenseVector, LUFactors, LinalgError};
pub use posit::{PositConfig, PositValue, Quire, P16, P24, P32, P64, P8};
