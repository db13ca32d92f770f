//! Subordinated fractional Brownian motion on the flat torus.
//!
//! The crate simulates `X_t = X^H(S_t)` where `X^H` is a fractional Brownian
//! motion and `S` an independent subordinator, projects the path onto
//! `T^d = R^d / Z^d`, and measures how fast the occupation measure of the path
//! approaches the uniform law in Wasserstein distance.
//!
//! Layout:
//!
//! - [`bernstein`]: Laplace exponents of the supported subordinators.
//! - [`subordinator`]: exact increment samplers and Laplace/moment estimators.
//! - [`fbm`]: fractional Brownian motion at arbitrary or uniform times.
//! - [`torus_spectral`]: torus geometry, heat kernel and Fourier coefficients
//!   of empirical measures.
//! - [`wasserstein`]: exact transport solvers and the Poisson-equation
//!   functionals that bracket `W_p`.
//! - [`verification`]: numeric checks of the auxiliary moment estimates.
//! - [`harness`]: rate experiments, exponent predictions and output files.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod bernstein;
pub mod error;
pub mod fbm;
pub mod harness;
pub mod rng;
pub mod stats;
pub mod subordinator;
pub mod torus_spectral;
pub mod verification;
pub mod wasserstein;

pub use bernstein::{BernsteinFunction, BernsteinKind};
pub use error::{Error, Result};
pub use torus_spectral::{SpectralEmpiricalMeasure, TorusPoint};
pub use wasserstein::{Method, WassersteinEstimate};
