//! Sign analytics for Hecke eigenvalues of classical modular forms, with the
//! special-function and polynomial machinery the analysis leans on:
//!
//! - [`forms`]: exact coefficient tables for a small menu of forms (the
//!   weight-12/16/20 level-1 newforms, elliptic-curve weight-2 forms, and the
//!   weight-4 Eisenstein series) with multiplicative extension.
//! - [`signs`]: first sign changes, sign-agreement densities, squarefree
//!   coefficient sums and their combinatorial lower-bound engine,
//!   Rankin-Selberg style diagnostics and angle histograms.
//! - [`specfun`]: the Dickman function, the root kappa of rho(2u) = 2 log u,
//!   and the delay integral equation u^2 b(u) = int_0^u t b(t) alpha(u-t) dt
//!   solved both by product integration and by an inclusion-exclusion series,
//!   including the search for the first zero.
//! - [`chebst`]: Chebyshev functions, Sato-Tate quadrature, an exact-rational
//!   sextic polynomial suite, and trigonometric minorant pairs for products of
//!   half-interval indicators.
//! - [`lab`]: deterministic families of forms, experiment drivers, report
//!   serialization and coefficient caching.

pub mod chebst;
pub mod error;
pub mod forms;
pub mod lab;
pub mod sieve;
pub mod signs;
pub mod specfun;

pub use error::{Error, Result};
