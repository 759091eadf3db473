//! Block-diagonal semidefinite programs: representation, solver and certificates.

pub mod certificate;
mod dense;
pub mod dump;
mod facial;
pub mod problem;
pub mod solver;

pub use certificate::{dual_slacks, verify_certificate, DualCertificate};
pub use problem::{
    hermitian_basis, place, traceless_basis, BlockSpec, Constraint, MatrixRows, Objective, Part, Placement, RepairMove,
    SdpProblem, Sense, Tag, Term,
};
pub use solver::{solve, solve_with, SdpSolution, SolveStatus, SolverOptions};
