//! Numerical tolerances shared across the crate.

/// Amplitudes (and density-matrix entries) below this magnitude are dropped.
pub const PRUNE_EPS: f64 = 1e-15;
/// Norms at or below this are treated as the zero vector.
pub const ZERO_NORM_EPS: f64 = 1e-14;
/// Equality tolerance for normalization, Hermiticity and trace checks.
pub const EQ_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_FLOOR: f64 = -1e-10;
/// Normalization slack for source amplitudes read from circuit scripts.
pub const SCRIPT_NORM_TOL: f64 = 1e-9;
/// Default cap on photons per (mode, polarization).
pub const DEFAULT_N_MAX: u32 = 2;
