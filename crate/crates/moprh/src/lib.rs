//! Matrix biorthogonal polynomials for Pearson–Sylvester matrix weights, the
//! Riemann–Hilbert frames they generate, their differential systems, and the
//! non-Abelian discrete Painlevé lattices satisfied by the recursion
//! coefficients — everything cross-validated against contour-quadrature oracles.
//!
//! Layers, bottom to top:
//! - [`scalar`], [`mxcore`]: generic-precision complex matrix algebra.
//! - [`contour`]: support curves, composite Gauss–Legendre rules, moments,
//!   Cauchy transforms.
//! - [`weights`]: matrix weights defined by Pearson data W′ = hᴸW + Whᴿ, evaluated in
//!   closed form or by ODE sweeps along the contour.
//! - [`biorth`]: block-Hankel solves for monic biorthogonal pairs and their
//!   three-term recursion data.
//! - [`secondkind`]: Cauchy-transform companions, jump identities,
//!   Hermite–Padé decompositions.
//! - [`rhframe`]: fundamental/transfer/constant-jump matrices, structure
//!   matrices, Christoffel–Darboux and zero-curvature identities.
//! - [`odesys`]: Sylvester and second-order systems, adjoint pairs, eigenvalue
//!   extraction for the Hermite class.
//! - [`painleve`]: the nonlinear lattices for β_n, γ_n with oracle comparison.
//! - [`config`], [`report`], [`suites`]: the experiment runner behind the CLI.

pub mod biorth;
pub mod config;
pub mod contour;
pub mod error;
pub mod mxcore;
pub mod odesys;
pub mod painleve;
pub mod report;
pub mod rhframe;
pub mod scalar;
pub mod secondkind;
pub mod suites;
pub mod weights;

#[cfg(test)]
pub(crate) mod testkit;

pub use error::MoprhError;
