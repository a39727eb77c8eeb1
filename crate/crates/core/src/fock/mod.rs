//! Sparse Fock-space states, density matrices and the primitives built on them.
//!
//! A basis ket records `(n_H, n_V)` for every spatial mode. Kets are ordered
//! by mode label and, within a mode, by photon number with `H` before `V`,
//! which makes iteration order and serialized output deterministic.
//!
//! Two photons of different polarization in one spatial mode, `|HV>`, are
//! `a_H^dagger a_V^dagger |0>` and carry unit norm.

mod density;
mod ket;
mod serial;
mod state;

pub use density::DensityMatrix;
pub use ket::{photon_number, ModeLabel, Occupation, OccupationKet, Polarization};
pub use serial::{DensityEntry, StateTerm};
pub use state::{PureState, SourceSpec};

pub(crate) use state::single_polarization;

use crate::Result;
use num_complex::Complex64;

pub fn make_single_photon(mode: impl Into<ModeLabel>, spec: &SourceSpec) -> Result<PureState> {
    PureState::single_photon(mode, spec)
}

pub fn tensor(a: &PureState, b: &PureState) -> Result<PureState> {
    a.tensor(b)
}

pub fn inner(a: &PureState, b: &PureState) -> Result<Complex64> {
    a.inner(b)
}

pub fn normalize(s: &PureState) -> Result<(PureState, f64)> {
    s.normalize()
}

pub fn to_density(s: &PureState) -> DensityMatrix {
    DensityMatrix::from_pure(s)
}

pub fn mix(parts: &[(f64, DensityMatrix)]) -> Result<DensityMatrix> {
    DensityMatrix::mix(parts)
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[ModeLabel]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

pub fn fidelity_pure(rho: &DensityMatrix, target: &PureState) -> Result<f64> {
    rho.fidelity_pure(target)
}

/// `f|H><H| + (1 - f)|V><V|` on one mode.
pub fn dephased_photon(mode: impl Into<ModeLabel>, f: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&f) {
        return Err(crate::Error::InvalidArgument(format!("fraction {f} outside [0, 1]")));
    }
    let mode = mode.into();
    DensityMatrix::diagonal(
        [mode.clone()],
        [
            (OccupationKet::from_pairs([(mode.clone(), Occupation::H)]), f),
            (OccupationKet::from_pairs([(mode, Occupation::V)]), 1.0 - f),
        ],
    )
}
