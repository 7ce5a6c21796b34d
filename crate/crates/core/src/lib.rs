//! Structure-preserving solver for the "good" Boussinesq equation
//! `u_tt = -u_xxxx + (u²)_xx` with periodic boundary conditions.
//!
//! Space is discretized by a Fourier-Galerkin method that keeps the
//! Hamiltonian structure; time is integrated by energy-conserving HBVM(k, s)
//! Runge-Kutta methods solved with a blended iteration whose preconditioner
//! is applied in `O(N)`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod hbvm;
pub mod integrator;
pub mod legendre;
pub mod problems;
pub mod system;

pub use error::{Error, Result};
pub use hbvm::HbvmMethod;
pub use integrator::{BlendedWorkspace, IterationStats, Stepper, StepperConfig};
pub use legendre::{gauss_rule, QuadratureRule};
pub use problems::{ErrorMetrics, ProblemKind, ProblemSpec, Trajectory};
pub use system::{project_initial, SpectralGrid, SpectralState};
