//! Titchmarsh–Weyl m-function of the half-line Schrödinger operator
//! `-d²/dx² + q(x)` with a Dirichlet condition at the origin, computed
//! through the boundary-control A-amplitude.
//!
//! The pipeline is:
//!
//! 1. [`amplitude`]: solve the linear Volterra equation for the kernel
//!    `A(x, y)` and read `A(α) = A(α, α)` off its diagonal.
//! 2. [`spectral`]: evaluate `m(-k²) = -k - ∫ A(α) e^{-2αk} dα` with a
//!    certified bound on the truncated tail.
//!
//! Independent routes are provided for cross-checking: the Goursat problem
//! for the wave kernel ([`goursat`]), the response operator ([`response`]),
//! a backward Riccati integrator and closed forms ([`oracle`]), and the
//! a-priori amplitude estimates ([`bounds`]).

pub mod amplitude;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod goursat;
pub mod oracle;
pub mod output;
pub mod potential;
pub mod quad;
pub mod response;
pub mod spectral;

pub use amplitude::{AmplitudeProfile, KernelGrid, Method};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use potential::Potential;
pub use response::{BoundaryControl, ResponseKernel};
pub use spectral::MEvaluation;
