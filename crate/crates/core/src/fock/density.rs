//! Sparse density operators over occupation kets.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ket::{ModeLabel, OccupationKet};
use super::state::{sorted_unique, PureState};
use crate::tol::{EQ_TOL, PRUNE_EPS, PSD_FLOOR, ZERO_NORM_EPS};
use crate::{Error, Result};

type Entries = BTreeMap<(OccupationKet, OccupationKet), Complex64>;

/// Density operator stored as a sparse map `(row ket, column ket) -> entry`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    modes: Vec<ModeLabel>,
    entries: Entries,
}

impl DensityMatrix {
    /// `|s><s|`.
    pub fn from_pure(s: &PureState) -> DensityMatrix {
        let mut entries = Entries::new();
        for (a, ca) in s.terms() {
            for (b, cb) in s.terms() {
                entries.insert((a.clone(), b.clone()), ca * cb.conj());
            }
        }
        DensityMatrix::from_parts(s.modes().to_vec(), entries)
    }

    /// Diagonal operator `sum_i w_i |k_i><k_i|`.
    pub fn diagonal(
        modes: impl IntoIterator<Item = ModeLabel>,
        diag: impl IntoIterator<Item = (OccupationKet, f64)>,
    ) -> Result<DensityMatrix> {
        let modes = sorted_unique(modes)?;
        let mut entries = Entries::new();
        for (k, w) in diag {
            if k.modes().ne(modes.iter()) {
                return Err(Error::ModeMismatch {
                    left: modes.iter().map(|m| m.to_string()).collect(),
                    right: k.modes().map(|m| m.to_string()).collect(),
                });
            }
            *entries.entry((k.clone(), k)).or_default() += Complex64::new(w, 0.0);
        }
        Ok(DensityMatrix::from_parts(modes, entries))
    }

    /// Convex combination of density matrices over a common mode set.
    pub fn mix(parts: &[(f64, DensityMatrix)]) -> Result<DensityMatrix> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidWeights("empty mixture".into()))?;
        let mut total = 0.0;
        let mut entries = Entries::new();
        for (w, rho) in parts {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidWeights(format!("negative or non-finite weight {w}")));
            }
            rho.require_same_modes(&first.1.modes)?;
            total += w;
            for (k, v) in &rho.entries {
                *entries.entry(k.clone()).or_default() += v * *w;
            }
        }
        if (total - 1.0).abs() > EQ_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {total}")));
        }
        Ok(DensityMatrix::from_parts(first.1.modes.clone(), entries))
    }

    pub(crate) fn from_parts(modes: Vec<ModeLabel>, mut entries: Entries) -> DensityMatrix {
        entries.retain(|_, v| v.norm() >= PRUNE_EPS);
        DensityMatrix { modes, entries }
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn entries(&self) -> impl Iterator<Item = (&OccupationKet, &OccupationKet, Complex64)> {
        self.entries.iter().map(|((a, b), v)| (a, b, *v))
    }

    pub fn entry(&self, row: &OccupationKet, col: &OccupationKet) -> Complex64 {
        self.entries.get(&(row.clone(), col.clone())).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.entries.iter().filter(|((a, b), _)| a == b).map(|(_, v)| v.re).sum()
    }

    /// Returns the trace-one operator and the original trace.
    pub fn normalize(&self) -> Result<(DensityMatrix, f64)> {
        let t = self.trace();
        if t <= ZERO_NORM_EPS {
            return Err(Error::ZeroNorm);
        }
        Ok((self.scale(1.0 / t), t))
    }

    pub fn scale(&self, s: f64) -> DensityMatrix {
        let entries = self.entries.iter().map(|(k, v)| (k.clone(), v * s)).collect();
        DensityMatrix::from_parts(self.modes.clone(), entries)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        if let Some(m) = self.modes.iter().find(|m| other.modes.contains(m)) {
            return Err(Error::ModeCollision(m.to_string()));
        }
        let modes = sorted_unique(self.modes.iter().chain(&other.modes).cloned())?;
        let mut entries = Entries::new();
        for ((a1, b1), v1) in &self.entries {
            for ((a2, b2), v2) in &other.entries {
                entries.insert((a1.join(a2), b1.join(b2)), v1 * v2);
            }
        }
        Ok(DensityMatrix::from_parts(modes, entries))
    }

    /// Reduced operator on `keep`; every other mode is traced out.
    pub fn partial_trace(&self, keep: &[ModeLabel]) -> Result<DensityMatrix> {
        for m in keep {
            if !self.modes.contains(m) {
                return Err(Error::UnknownMode(m.to_string()));
            }
        }
        let keep_set: BTreeSet<&ModeLabel> = keep.iter().collect();
        let is_kept = |m: &ModeLabel| keep_set.contains(m);
        let mut entries = Entries::new();
        for ((a, b), v) in &self.entries {
            let (ak, at) = a.split(&is_kept);
            let (bk, bt) = b.split(&is_kept);
            if at == bt {
                *entries.entry((ak, bk)).or_default() += v;
            }
        }
        let modes = sorted_unique(keep.iter().cloned())?;
        Ok(DensityMatrix::from_parts(modes, entries))
    }

    /// `<target|rho|target>`.
    pub fn fidelity_pure(&self, target: &PureState) -> Result<f64> {
        target.require_same_modes(&self.modes)?;
        let mut acc = Complex64::default();
        for ((a, b), v) in &self.entries {
            let ta = target.amplitude(a);
            if ta == Complex64::default() {
                continue;
            }
            acc += ta.conj() * v * target.amplitude(b);
        }
        Ok(acc.re)
    }

    /// Keeps entries whose row and column kets both satisfy `keep` (a projector sandwich).
    pub fn filter(&self, keep: impl Fn(&OccupationKet) -> bool) -> DensityMatrix {
        let entries = self
            .entries
            .iter()
            .filter(|((a, b), _)| keep(a) && keep(b))
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        DensityMatrix::from_parts(self.modes.clone(), entries)
    }

    /// `K rho K^dagger` for an operator `K` diagonal in the occupation basis.
    pub fn scale_by(&self, factor: impl Fn(&OccupationKet) -> Complex64) -> DensityMatrix {
        let entries = self
            .entries
            .iter()
            .map(|((a, b), v)| ((a.clone(), b.clone()), factor(a) * v * factor(b).conj()))
            .collect();
        DensityMatrix::from_parts(self.modes.clone(), entries)
    }

    /// `U rho U^dagger` for a linear map given on basis kets.
    pub fn map_kets(
        &self,
        modes: Vec<ModeLabel>,
        map: impl Fn(&OccupationKet) -> Result<Vec<(OccupationKet, Complex64)>>,
    ) -> Result<DensityMatrix> {
        let modes = sorted_unique(modes)?;
        let mut cache: BTreeMap<OccupationKet, Vec<(OccupationKet, Complex64)>> = BTreeMap::new();
        for (a, b) in self.entries.keys() {
            for k in [a, b] {
                if !cache.contains_key(k) {
                    cache.insert(k.clone(), map(k)?);
                }
            }
        }
        let mut entries = Entries::new();
        for ((a, b), v) in &self.entries {
            for (a2, ca) in &cache[a] {
                for (b2, cb) in &cache[b] {
                    *entries.entry((a2.clone(), b2.clone())).or_default() += ca * v * cb.conj();
                }
            }
        }
        Ok(DensityMatrix::from_parts(modes, entries))
    }

    pub fn relabel(&self, map: &BTreeMap<ModeLabel, ModeLabel>) -> Result<DensityMatrix> {
        let rename = |m: &ModeLabel| map.get(m).cloned().unwrap_or_else(|| m.clone());
        let rk = |k: &OccupationKet| OccupationKet::from_pairs(k.iter().map(|(m, o)| (rename(m), o)));
        let modes = sorted_unique(self.modes.iter().map(rename))?;
        let entries = self.entries.iter().map(|((a, b), v)| ((rk(a), rk(b)), *v)).collect();
        Ok(DensityMatrix::from_parts(modes, entries))
    }

    /// Kets appearing as a row or column index, in canonical order.
    pub fn basis(&self) -> Vec<OccupationKet> {
        let set: BTreeSet<&OccupationKet> = self.entries.keys().flat_map(|(a, b)| [a, b]).collect();
        set.into_iter().cloned().collect()
    }

    pub fn to_dense(&self, basis: &[OccupationKet]) -> DMatrix<Complex64> {
        let index: BTreeMap<&OccupationKet, usize> = basis.iter().enumerate().map(|(i, k)| (k, i)).collect();
        let mut m = DMatrix::zeros(basis.len(), basis.len());
        for ((a, b), v) in &self.entries {
            if let (Some(&i), Some(&j)) = (index.get(a), index.get(b)) {
                m[(i, j)] = *v;
            }
        }
        m
    }

    /// Largest `|rho_ab - conj(rho_ba)|`.
    pub fn hermiticity_error(&self) -> f64 {
        self.entries
            .iter()
            .map(|((a, b), v)| (v - self.entry(b, a).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let basis = self.basis();
        if basis.is_empty() {
            return Vec::new();
        }
        let m = self.to_dense(&basis);
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|((a, b), v)| (v * self.entry(b, a)).re).sum()
    }

    /// Checks Hermiticity, unit trace and positive semidefiniteness.
    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_error();
        if h > EQ_TOL {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (deviation {h:e})")));
        }
        let t = self.trace();
        if (t - 1.0).abs() > EQ_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {t} != 1")));
        }
        if let Some(&min) = self.eigenvalues().first() {
            if min < PSD_FLOOR {
                return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(())
    }

    /// `||a - b||_1 / 2`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.require_same_modes(&other.modes)?;
        let mut diff = self.entries.clone();
        for (k, v) in &other.entries {
            *diff.entry(k.clone()).or_default() -= v;
        }
        let d = DensityMatrix { modes: self.modes.clone(), entries: diff };
        Ok(0.5 * d.eigenvalues().iter().map(|e| e.abs()).sum::<f64>())
    }

    pub(crate) fn require_same_modes(&self, modes: &[ModeLabel]) -> Result<()> {
        if self.modes.as_slice() == modes {
            Ok(())
        } else {
            Err(Error::ModeMismatch {
                left: self.modes.iter().map(|m| m.to_string()).collect(),
                right: modes.iter().map(|m| m.to_string()).collect(),
            })
        }
    }
}
