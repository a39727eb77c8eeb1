//! Single-photon quantum non-demolition measurement and destructive polarization readout.
//!
//! Two views of the QNDM are provided. [`qndm_herald`] is the ideal
//! projector onto "exactly one photon in the mode". [`meter_qndm`] models the
//! atom-cavity meter: a meter atom `c_g|g> + c_d|d>` passes the cavity, its
//! `|g>` component picks up a phase `e^{i pi}` when one photon is present,
//! and the atom is read out in the `(|g> +- |d>)/sqrt 2` basis. For
//! `c_g = c_d = 1/sqrt 2` the `minus` outcome reproduces the projector.
//! The excited level is not represented; only the net phase of the 2 pi pulse.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fock::{single_polarization, DensityMatrix, ModeLabel, OccupationKet, Polarization, PureState};
use crate::tol::{EQ_TOL, ZERO_NORM_EPS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeraldOutcome {
    Success,
    Failure,
}

/// One branch of a herald: normalized post-state (absent when the branch has zero probability).
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldResult {
    pub outcome: HeraldOutcome,
    pub state: Option<PureState>,
    pub probability: f64,
}

/// Both branches of a single-photon herald.
#[derive(Debug, Clone, PartialEq)]
pub struct Herald {
    pub success: HeraldResult,
    pub failure: HeraldResult,
}

fn n_in(k: &OccupationKet, mode: &ModeLabel) -> u32 {
    k.get(mode).map(|o| o.total()).unwrap_or(0)
}

/// Keeps the kets holding exactly `n` photons in `mode`. Returns the unnormalized
/// part and its probability relative to the input norm.
pub fn number_projector(s: &PureState, mode: &ModeLabel, n: u32) -> Result<(PureState, f64)> {
    s.require_mode(mode)?;
    let kept = s.filter(|k| n_in(k, mode) == n);
    let total = s.norm_sqr();
    let p = if total > 0.0 { kept.norm_sqr() / total } else { 0.0 };
    Ok((kept, p))
}

pub fn number_projector_density(rho: &DensityMatrix, mode: &ModeLabel, n: u32) -> Result<(DensityMatrix, f64)> {
    if !rho.modes().contains(mode) {
        return Err(Error::UnknownMode(mode.to_string()));
    }
    let kept = rho.filter(|k| n_in(k, mode) == n);
    let total = rho.trace();
    let p = if total > 0.0 { kept.trace() / total } else { 0.0 };
    Ok((kept, p))
}

fn branch(outcome: HeraldOutcome, part: &PureState, total: f64) -> HeraldResult {
    let state = part.normalize().ok().map(|(u, _)| u);
    HeraldResult { outcome, state, probability: part.norm_sqr() / total }
}

/// Ideal SP-QNDM on `mode`: success keeps the one-photon component, failure the rest.
/// Polarization amplitudes are untouched in both branches.
pub fn qndm_herald(s: &PureState, mode: &ModeLabel) -> Result<Herald> {
    s.require_mode(mode)?;
    let total = s.norm_sqr();
    if total <= ZERO_NORM_EPS * ZERO_NORM_EPS {
        return Err(Error::ZeroNorm);
    }
    let hit = s.filter(|k| n_in(k, mode) == 1);
    let miss = s.filter(|k| n_in(k, mode) != 1);
    Ok(Herald {
        success: branch(HeraldOutcome::Success, &hit, total),
        failure: branch(HeraldOutcome::Failure, &miss, total),
    })
}

/// How the cavity phase behaves for more than one photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiPhotonModel {
    /// Phase `pi` for exactly one photon, none otherwise.
    #[default]
    IdealNoShift,
    /// Phase `pi sqrt(n)` for `n` photons.
    SqrtRabi,
}

impl MultiPhotonModel {
    fn phase(self, n: u32) -> f64 {
        match self {
            MultiPhotonModel::IdealNoShift => {
                if n == 1 {
                    PI
                } else {
                    0.0
                }
            }
            MultiPhotonModel::SqrtRabi => PI * (n as f64).sqrt(),
        }
    }
}

/// Initial meter-atom state `c_g|g> + c_d|d>` and cavity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeterSpec {
    pub c_g: Complex64,
    pub c_d: Complex64,
    pub model: MultiPhotonModel,
}

impl MeterSpec {
    pub fn new(c_g: Complex64, c_d: Complex64, model: MultiPhotonModel) -> Result<Self> {
        let norm_sq = c_g.norm_sqr() + c_d.norm_sqr();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > EQ_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(MeterSpec { c_g, c_d, model })
    }

    /// `(|g> + |d>)/sqrt 2`, ideal cavity.
    pub fn balanced() -> Self {
        let a = Complex64::new(FRAC_1_SQRT_2, 0.0);
        MeterSpec { c_g: a, c_d: a, model: MultiPhotonModel::IdealNoShift }
    }

    /// Whether the `minus` outcome is exactly the one-photon projector.
    pub fn is_exact_projector(&self) -> bool {
        self.model == MultiPhotonModel::IdealNoShift && (self.c_g - self.c_d).norm() <= EQ_TOL
    }

    /// Amplitude of meter outcome `outcome` when `n` photons sit in the cavity.
    pub fn kraus_factor(&self, outcome: MeterOutcome, n: u32) -> Complex64 {
        let g = self.c_g * Complex64::from_polar(1.0, self.model.phase(n));
        let s = match outcome {
            MeterOutcome::Plus => g + self.c_d,
            MeterOutcome::Minus => g - self.c_d,
        };
        s * FRAC_1_SQRT_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeterOutcome {
    Plus,
    Minus,
}

/// A measurement branch: Born probability and normalized post-state.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<O, S> {
    pub outcome: O,
    pub probability: f64,
    pub state: Option<S>,
}

/// Atom-cavity QNDM on `cavity_mode`; returns the `plus` and `minus` branches.
pub fn meter_qndm(
    s: &PureState,
    cavity_mode: &ModeLabel,
    meter: &MeterSpec,
) -> Result<Vec<Branch<MeterOutcome, PureState>>> {
    s.require_mode(cavity_mode)?;
    MeterSpec::new(meter.c_g, meter.c_d, meter.model)?;
    let total = s.norm_sqr();
    if total <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok([MeterOutcome::Plus, MeterOutcome::Minus]
        .into_iter()
        .map(|o| {
            let part = s.scale_by(|k| meter.kraus_factor(o, n_in(k, cavity_mode)));
            let probability = part.norm_sqr() / total;
            Branch { outcome: o, probability, state: part.normalize().ok().map(|(u, _)| u) }
        })
        .collect())
}

pub fn meter_qndm_density(
    rho: &DensityMatrix,
    cavity_mode: &ModeLabel,
    meter: &MeterSpec,
) -> Result<Vec<Branch<MeterOutcome, DensityMatrix>>> {
    if !rho.modes().contains(cavity_mode) {
        return Err(Error::UnknownMode(cavity_mode.to_string()));
    }
    MeterSpec::new(meter.c_g, meter.c_d, meter.model)?;
    let total = rho.trace();
    if total <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok([MeterOutcome::Plus, MeterOutcome::Minus]
        .into_iter()
        .map(|o| {
            let part = rho.scale_by(|k| meter.kraus_factor(o, n_in(k, cavity_mode)));
            let probability = part.trace() / total;
            Branch { outcome: o, probability, state: part.normalize().ok().map(|(u, _)| u) }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Hv,
    PlusMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolOutcome {
    #[serde(rename = "H")]
    H,
    #[serde(rename = "V")]
    V,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Basis {
    /// Outcomes with their `(H, V)` components.
    pub fn vectors(self) -> [(PolOutcome, [Complex64; 2]); 2] {
        let c = |x: f64| Complex64::new(x, 0.0);
        match self {
            Basis::Hv => [(PolOutcome::H, [c(1.0), c(0.0)]), (PolOutcome::V, [c(0.0), c(1.0)])],
            Basis::PlusMinus => [
                (PolOutcome::Plus, [c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]),
                (PolOutcome::Minus, [c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)]),
            ],
        }
    }
}

fn single_pol(k: &OccupationKet, mode: &ModeLabel) -> Result<Polarization> {
    single_polarization(k, mode).ok_or_else(|| Error::NotSinglePhoton { mode: mode.to_string(), photons: n_in(k, mode) })
}

fn component(v: &[Complex64; 2], p: Polarization) -> Complex64 {
    match p {
        Polarization::H => v[0],
        Polarization::V => v[1],
    }
}

/// Destructive single-photon polarization measurement of `mode`; the mode is removed
/// from the post-states.
pub fn measure_polarization(
    s: &PureState,
    mode: &ModeLabel,
    basis: Basis,
) -> Result<Vec<Branch<PolOutcome, PureState>>> {
    s.require_mode(mode)?;
    for (k, _) in s.terms() {
        single_pol(k, mode)?;
    }
    let total = s.norm_sqr();
    if total <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let rest: Vec<ModeLabel> = s.modes().iter().filter(|m| *m != mode).cloned().collect();
    basis
        .vectors()
        .into_iter()
        .map(|(outcome, e)| {
            let part = s.map_kets(rest.clone(), |k| {
                let p = single_pol(k, mode)?;
                let mut r = k.clone();
                r.remove(mode);
                Ok(vec![(r, component(&e, p).conj())])
            })?;
            let probability = part.norm_sqr() / total;
            Ok(Branch { outcome, probability, state: part.normalize().ok().map(|(u, _)| u) })
        })
        .collect()
}

pub fn measure_polarization_density(
    rho: &DensityMatrix,
    mode: &ModeLabel,
    basis: Basis,
) -> Result<Vec<Branch<PolOutcome, DensityMatrix>>> {
    if !rho.modes().contains(mode) {
        return Err(Error::UnknownMode(mode.to_string()));
    }
    for k in rho.basis() {
        single_pol(&k, mode)?;
    }
    let total = rho.trace();
    if total <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let rest: Vec<ModeLabel> = rho.modes().iter().filter(|m| *m != mode).cloned().collect();
    basis
        .vectors()
        .into_iter()
        .map(|(outcome, e)| {
            let part = rho.map_kets(rest.clone(), |k| {
                let p = single_pol(k, mode)?;
                let mut r = k.clone();
                r.remove(mode);
                Ok(vec![(r, component(&e, p).conj())])
            })?;
            let probability = part.trace() / total;
            Ok(Branch { outcome, probability, state: part.normalize().ok().map(|(u, _)| u) })
        })
        .collect()
}
