//! Workbench for quantum resource inequalities.
//!
//! The symbolic side ([`calculus`]) parses, canonicalizes and replays proof
//! scripts over resource expressions whose coefficients are exact-rational
//! linear combinations of joint entropies. The numeric side ([`quantum`],
//! [`entropy`], [`region`], [`protocols`]) grounds those coefficients on
//! concrete density operators: labeled multipartite linear algebra, entropic
//! functionals, rate-region exploration and exact finite-n protocol checks.

pub mod calculus;
pub mod entropy;
pub mod error;
pub mod protocols;
pub mod quantum;
pub mod region;

pub use error::{Error, Result};

/// Trace and norm tolerance for states.
pub const TOL_TRACE: f64 = 1e-9;
/// Hermiticity defect tolerance.
pub const TOL_HERM: f64 = 1e-9;
/// Entrywise tolerance for V†V = 1 on isometries.
pub const TOL_ISO: f64 = 1e-9;
/// Allowed negativity of the smallest eigenvalue of a density operator.
pub const TOL_PSD: f64 = 1e-9;
/// Generic numeric comparison tolerance.
pub const TOL_NUM: f64 = 1e-9;
/// Eigenvalues below this are clamped to zero before x*log(x).
pub const EIG_CLAMP: f64 = 1e-12;

/// Default cap on the total Hilbert-space dimension of any constructed value.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Dimension cap, overridable through the `RT_MAX_DIM` environment variable.
pub fn max_dim() -> usize {
    std::env::var("RT_MAX_DIM")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_DIM)
}
