//! Tight convex conjugates of f-divergences, exact f-divergences and
//! Wasserstein-1 on finite metric spaces, and the Moreau-Yosida
//! approximation of f-divergences with respect to Wasserstein-1.
//!
//! Modules, bottom-up:
//!
//! - [`catalog`]: generator tables (`φ₊`, `φ₊*` and derivatives, `φ'(∞)`) and Lambert W.
//! - [`conjugate`]: the optimal shift `γ` by safeguarded Newton iteration with
//!   its implicit gradient, and the stabilized tight conjugate `D_φ*(f‖ν)`.
//! - [`measures`]: finite metric spaces, discrete measures, exact `D_φ(μ‖ν)`.
//! - [`transport`]: `W₁` by the transportation simplex, Kantorovich potentials,
//!   Lipschitz norms.
//! - [`moreau_yosida`]: `D_{φ,λ,α}(μ‖ν)` by primal and dual routes.
//! - [`estimator`]: variational estimation of `D_φ` by gradient ascent on a
//!   potential vector, and the discretized Gaussian potential experiment.
//! - [`acceptance`]: the validation suite shared by tests and the CLI.

#![forbid(unsafe_code)]

pub mod acceptance;
pub mod catalog;
pub mod conjugate;
pub mod error;
pub mod estimator;
mod linalg;
pub mod measures;
pub mod moreau_yosida;
pub mod rng;
pub mod transport;

pub use catalog::{get_spec, Catalog, Generator, GeneratorSpec};
pub use error::{Error, Result};
