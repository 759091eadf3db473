//! Certified randomness bounds for sequential maximum-confidence measurements.
//!
//! The crate builds the guessing-probability and Shannon-entropy programs for
//! two sequential receivers, solves them with a self-contained interior-point
//! method and turns the dual multipliers into rigorous bounds.

pub mod analytic;
pub mod certify;
pub mod error;
pub mod gaussradau;
pub mod matops;
pub mod quantum;
pub mod sdp;

pub use error::{Error, Result};
pub use matops::{frobenius_inner, min_eigenvalue, ComplexMatrix, HermitianOperator};
pub use quantum::{Ensemble, JointDistribution, MCMChain, ObservedStats, ScenarioParams};
pub use sdp::{DualCertificate, SdpProblem, SdpSolution};
