//! Numerical tolerances used across the crate.
//!
//! Every threshold that decides a pass/fail, a tie, or a degeneracy lives
//! here so that tests and library code agree on the same numbers.

/// Maximum |ρ_ij − conj(ρ_ji)| accepted for a reduced density matrix.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Slack on spectra: eigenvalue sums, negativity of PSD spectra, purity symmetry.
pub const SPECTRUM_TOL: f64 = 1e-10;

/// Two bipartitions whose squared Schmidt coefficients differ by less than
/// this are reported as ties.
pub const TIE_TOL: f64 = 1e-9;

/// A split with λ² ≥ 1 − this is treated as a product split (GGM = 0).
pub const PRODUCT_TOL: f64 = 1e-9;

/// Lanczos: default tolerance on the change of the lowest Ritz value.
pub const LANCZOS_RITZ_TOL: f64 = 1e-10;

/// Lanczos: accepted residual ‖Hψ − Eψ‖ relative to the spectral-norm estimate.
pub const LANCZOS_RESIDUAL_REL: f64 = 1e-8;

/// Lanczos: second Ritz value within this fraction of |E0| raises the
/// degeneracy warning.
pub const DEGENERACY_REL: f64 = 1e-6;

/// Least-squares residual threshold for the singlet-combination expansion.
pub const GAMMA_RESIDUAL_TOL: f64 = 1e-10;

/// Oracle agreement threshold for recursion-versus-enumeration checks.
pub const ORACLE_TOL: f64 = 1e-9;

/// Variational slack: RVB energy may dip below E0 by at most this much.
pub const VARIATIONAL_SLACK: f64 = 1e-10;
