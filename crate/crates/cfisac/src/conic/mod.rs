//! Numerical kernels: a real second-order cone solver and a largest
//! generalized eigenpair solver, plus the complex-to-real lifting used to
//! feed complex beamforming problems into the real solver.

pub mod geig;
pub mod lift;
pub mod socp;

pub use geig::max_generalized_eigenpair;
pub use lift::{lift_functional, lift_vector, unlift_vector};
pub use socp::{solve_socp, SocConstraint, SocpProblem, SocpSolution, SocpStatus};
