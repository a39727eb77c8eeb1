use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ket::{ModeLabel, Occupation, OccupationKet, Polarization};
use crate::tol::{DEFAULT_N_MAX, EQ_TOL, PRUNE_EPS, ZERO_NORM_EPS};
use crate::{Error, Result};

/// Amplitudes `(alpha, beta)` of a single-photon source emitting `alpha|H> + beta|V>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl SourceSpec {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > EQ_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(SourceSpec { alpha, beta })
    }

    pub fn real(alpha: f64, beta: f64) -> Result<Self> {
        SourceSpec::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    /// Rescales arbitrary non-zero amplitudes onto the unit sphere.
    pub fn normalized(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !n.is_finite() || n <= ZERO_NORM_EPS {
            return Err(Error::ZeroNorm);
        }
        Ok(SourceSpec { alpha: alpha / n, beta: beta / n })
    }

    pub fn balanced() -> Self {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        SourceSpec { alpha: a, beta: a }
    }

    pub fn horizontal() -> Self {
        SourceSpec { alpha: Complex64::new(1.0, 0.0), beta: Complex64::new(0.0, 0.0) }
    }

    pub fn vertical() -> Self {
        SourceSpec { alpha: Complex64::new(0.0, 0.0), beta: Complex64::new(1.0, 0.0) }
    }
}

/// Sparse superposition of occupation kets over a fixed set of modes.
///
/// The zero vector is a valid value (no stored terms); it arises from
/// projections with vanishing probability.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    modes: Vec<ModeLabel>,
    terms: BTreeMap<OccupationKet, Complex64>,
    n_max: u32,
}

impl PureState {
    pub fn zero(modes: impl IntoIterator<Item = ModeLabel>) -> Result<Self> {
        let modes = sorted_unique(modes)?;
        Ok(PureState { modes, terms: BTreeMap::new(), n_max: DEFAULT_N_MAX })
    }

    pub fn vacuum(modes: impl IntoIterator<Item = ModeLabel>) -> Result<Self> {
        let mut s = PureState::zero(modes)?;
        s.terms.insert(OccupationKet::vacuum(&s.modes), Complex64::new(1.0, 0.0));
        Ok(s)
    }

    /// Builds a state from explicit terms. Repeated kets accumulate.
    pub fn from_terms(
        modes: impl IntoIterator<Item = ModeLabel>,
        terms: impl IntoIterator<Item = (OccupationKet, Complex64)>,
    ) -> Result<Self> {
        PureState::from_terms_with_cap(modes, terms, DEFAULT_N_MAX)
    }

    pub fn from_terms_with_cap(
        modes: impl IntoIterator<Item = ModeLabel>,
        terms: impl IntoIterator<Item = (OccupationKet, Complex64)>,
        n_max: u32,
    ) -> Result<Self> {
        let mut s = PureState::zero(modes)?;
        s.n_max = n_max;
        for (ket, amp) in terms {
            s.check_ket(&ket)?;
            *s.terms.entry(ket).or_default() += amp;
        }
        s.prune();
        Ok(s)
    }

    pub(crate) fn from_parts_unchecked(
        modes: Vec<ModeLabel>,
        terms: BTreeMap<OccupationKet, Complex64>,
        n_max: u32,
    ) -> Self {
        let mut s = PureState { modes, terms, n_max };
        s.prune();
        s
    }

    /// `alpha|H>_mode + beta|V>_mode`.
    pub fn single_photon(mode: impl Into<ModeLabel>, spec: &SourceSpec) -> Result<Self> {
        SourceSpec::new(spec.alpha, spec.beta)?;
        let mode = mode.into();
        PureState::from_terms(
            [mode.clone()],
            [
                (OccupationKet::from_pairs([(mode.clone(), Occupation::H)]), spec.alpha),
                (OccupationKet::from_pairs([(mode, Occupation::V)]), spec.beta),
            ],
        )
    }

    pub fn with_n_max(mut self, n_max: u32) -> Result<Self> {
        self.n_max = n_max;
        for ket in self.terms.keys() {
            self.check_occupation(ket)?;
        }
        Ok(self)
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn has_mode(&self, mode: &ModeLabel) -> bool {
        self.modes.binary_search(mode).is_ok()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OccupationKet, Complex64)> {
        self.terms.iter().map(|(k, a)| (k, *a))
    }

    pub fn amplitude(&self, ket: &OccupationKet) -> Complex64 {
        self.terms.get(ket).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Same as [`PureState::is_zero`]: no stored terms.
    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        if let Some(m) = self.modes.iter().find(|m| other.has_mode(m)) {
            return Err(Error::ModeCollision(m.to_string()));
        }
        let modes = self.modes.iter().chain(&other.modes).cloned();
        let mut terms = BTreeMap::new();
        for (ka, aa) in &self.terms {
            for (kb, ab) in &other.terms {
                terms.insert(ka.join(kb), aa * ab);
            }
        }
        let mut out = PureState::from_parts_unchecked(
            sorted_unique(modes)?,
            terms,
            self.n_max.max(other.n_max),
        );
        out.prune();
        Ok(out)
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        self.require_same_modes(&other.modes)?;
        let (small, large, flip) = if self.terms.len() <= other.terms.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::default();
        for (k, a) in &small.terms {
            if let Some(b) = large.terms.get(k) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        Ok(acc)
    }

    /// Returns the unit-norm state and the original norm.
    pub fn normalize(&self) -> Result<(PureState, f64)> {
        let n = self.norm();
        if n <= ZERO_NORM_EPS {
            return Err(Error::ZeroNorm);
        }
        Ok((self.scale(Complex64::new(1.0 / n, 0.0)), n))
    }

    pub fn scale(&self, c: Complex64) -> PureState {
        let terms = self.terms.iter().map(|(k, a)| (k.clone(), a * c)).collect();
        PureState::from_parts_unchecked(self.modes.clone(), terms, self.n_max)
    }

    /// Sum of two states over the same modes.
    pub fn add(&self, other: &PureState) -> Result<PureState> {
        self.require_same_modes(&other.modes)?;
        let mut terms = self.terms.clone();
        for (k, a) in &other.terms {
            *terms.entry(k.clone()).or_default() += a;
        }
        Ok(PureState::from_parts_unchecked(self.modes.clone(), terms, self.n_max.max(other.n_max)))
    }

    /// `|<self|other>|^2` for unit-norm states.
    pub fn overlap_sqr(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Keeps only kets satisfying `keep`, without renormalizing.
    pub fn filter(&self, keep: impl Fn(&OccupationKet) -> bool) -> PureState {
        let terms = self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, a)| (k.clone(), *a)).collect();
        PureState::from_parts_unchecked(self.modes.clone(), terms, self.n_max)
    }

    /// Multiplies each amplitude by a ket-dependent factor.
    pub fn scale_by(&self, factor: impl Fn(&OccupationKet) -> Complex64) -> PureState {
        let terms = self.terms.iter().map(|(k, a)| (k.clone(), a * factor(k))).collect();
        PureState::from_parts_unchecked(self.modes.clone(), terms, self.n_max)
    }

    /// Applies a linear map defined on basis kets. `modes` is the output mode set.
    pub fn map_kets(
        &self,
        modes: Vec<ModeLabel>,
        map: impl Fn(&OccupationKet) -> Result<Vec<(OccupationKet, Complex64)>>,
    ) -> Result<PureState> {
        let modes = sorted_unique(modes)?;
        let mut terms: BTreeMap<OccupationKet, Complex64> = BTreeMap::new();
        for (k, a) in &self.terms {
            for (k2, c) in map(k)? {
                *terms.entry(k2).or_default() += a * c;
            }
        }
        let out = PureState::from_parts_unchecked(modes, terms, self.n_max);
        for ket in out.terms.keys() {
            out.check_ket(ket)?;
        }
        Ok(out)
    }

    /// Renames modes; labels absent from `map` are kept.
    pub fn relabel(&self, map: &BTreeMap<ModeLabel, ModeLabel>) -> Result<PureState> {
        let rename = |m: &ModeLabel| map.get(m).cloned().unwrap_or_else(|| m.clone());
        let modes: Vec<ModeLabel> = self.modes.iter().map(rename).collect();
        let terms = self
            .terms
            .iter()
            .map(|(k, a)| (OccupationKet::from_pairs(k.iter().map(|(m, o)| (rename(m), o))), *a))
            .collect();
        Ok(PureState::from_parts_unchecked(sorted_unique(modes)?, terms, self.n_max))
    }

    /// Singular values of the amplitude matrix across the `left` / rest cut, descending.
    pub fn schmidt_coefficients(&self, left: &[ModeLabel]) -> Result<Vec<f64>> {
        for m in left {
            self.require_mode(m)?;
        }
        let is_left = |m: &ModeLabel| left.contains(m);
        let mut rows = BTreeMap::new();
        let mut cols = BTreeMap::new();
        let mut entries = Vec::new();
        for (k, a) in &self.terms {
            let (l, r) = k.split(&is_left);
            let nr = rows.len();
            let i = *rows.entry(l).or_insert(nr);
            let nc = cols.len();
            let j = *cols.entry(r).or_insert(nc);
            entries.push((i, j, *a));
        }
        if entries.is_empty() {
            return Ok(Vec::new());
        }
        let mut m = DMatrix::<Complex64>::zeros(rows.len(), cols.len());
        for (i, j, a) in entries {
            m[(i, j)] = a;
        }
        let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        Ok(sv)
    }

    /// Total photon number of every stored ket, deduplicated.
    pub fn photon_numbers(&self) -> BTreeSet<u32> {
        self.terms.keys().map(|k| k.total_photons()).collect()
    }

    pub fn require_mode(&self, mode: &ModeLabel) -> Result<()> {
        if self.has_mode(mode) {
            Ok(())
        } else {
            Err(Error::UnknownMode(mode.to_string()))
        }
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

    fn check_ket(&self, ket: &OccupationKet) -> Result<()> {
        if ket.len() != self.modes.len() || !ket.modes().zip(&self.modes).all(|(a, b)| a == b) {
            return Err(Error::ModeMismatch {
                left: self.modes.iter().map(|m| m.to_string()).collect(),
                right: ket.modes().map(|m| m.to_string()).collect(),
            });
        }
        self.check_occupation(ket)
    }

    fn check_occupation(&self, ket: &OccupationKet) -> Result<()> {
        for (m, o) in ket.iter() {
            if o.h > self.n_max || o.v > self.n_max {
                return Err(Error::OccupationOverflow { mode: m.to_string(), n_max: self.n_max });
            }
        }
        Ok(())
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE_EPS);
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, k)?;
        }
        Ok(())
    }
}

/// Polarization amplitudes of a one-photon ket: which polarization occupies `mode`.
pub(crate) fn single_polarization(ket: &OccupationKet, mode: &ModeLabel) -> Option<Polarization> {
    match ket.get(mode)? {
        Occupation { h: 1, v: 0 } => Some(Polarization::H),
        Occupation { h: 0, v: 1 } => Some(Polarization::V),
        _ => None,
    }
}

pub(crate) fn sorted_unique(modes: impl IntoIterator<Item = ModeLabel>) -> Result<Vec<ModeLabel>> {
    let mut v: Vec<ModeLabel> = modes.into_iter().collect();
    v.sort();
    for w in v.windows(2) {
        if w[0] == w[1] {
            return Err(Error::ModeCollision(w[0].to_string()));
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ket(pairs: &[(&str, Occupation)]) -> OccupationKet {
        OccupationKet::from_pairs(pairs.iter().map(|(m, o)| (*m, *o)))
    }

    #[test]
    fn single_photon_examples() {
        let s = PureState::single_photon("1", &SourceSpec::real(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.amplitude(&ket(&[("1", Occupation::H)])), c(1.0, 0.0));

        let s = PureState::single_photon("1", &SourceSpec::balanced()).unwrap();
        assert!((s.amplitude(&ket(&[("1", Occupation::V)])).re - FRAC_1_SQRT_2).abs() < 1e-15);

        let spec = SourceSpec::new(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let s = PureState::single_photon("2", &spec).unwrap();
        assert_eq!(s.amplitude(&ket(&[("2", Occupation::V)])), c(0.0, 0.8));
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_source_rejected() {
        let err = SourceSpec::real(1.0, 1.0).unwrap_err();
        assert_eq!(err, Error::NotNormalized { norm_sq: 2.0 });
    }

    #[test]
    fn tensor_examples() {
        let h1 = PureState::single_photon("1", &SourceSpec::horizontal()).unwrap();
        let v2 = PureState::single_photon("2", &SourceSpec::vertical()).unwrap();
        let hv = h1.tensor(&v2).unwrap();
        assert_eq!(hv.len(), 1);
        assert_eq!(hv.amplitude(&ket(&[("1", Occupation::H), ("2", Occupation::V)])), c(1.0, 0.0));

        let b1 = PureState::single_photon("1", &SourceSpec::balanced()).unwrap();
        let b2 = PureState::single_photon("2", &SourceSpec::balanced()).unwrap();
        let p = b1.tensor(&b2).unwrap();
        assert_eq!(p.len(), 4);
        for (_, a) in p.terms() {
            assert!((a - c(0.5, 0.0)).norm() < 1e-15);
        }
        assert!(matches!(h1.tensor(&h1), Err(Error::ModeCollision(_))));
    }

    #[test]
    fn inner_examples() {
        let h = PureState::single_photon("1", &SourceSpec::horizontal()).unwrap();
        let v = PureState::single_photon("1", &SourceSpec::vertical()).unwrap();
        assert_eq!(h.inner(&h).unwrap(), c(1.0, 0.0));
        assert_eq!(h.inner(&v).unwrap(), c(0.0, 0.0));
        let other = PureState::single_photon("2", &SourceSpec::horizontal()).unwrap();
        assert!(matches!(h.inner(&other), Err(Error::ModeMismatch { .. })));
    }

    #[test]
    fn inner_is_conjugate_linear_in_left() {
        let a = PureState::single_photon("1", &SourceSpec::new(c(0.6, 0.0), c(0.0, 0.8)).unwrap()).unwrap();
        let b = PureState::single_photon("1", &SourceSpec::balanced()).unwrap();
        let z = c(0.3, -1.2);
        let lhs = a.scale(z).inner(&b).unwrap();
        let rhs = z.conj() * a.inner(&b).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn normalize_examples() {
        let s = PureState::from_terms(["1".into()], [(ket(&[("1", Occupation::H)]), c(2.0, 0.0))]).unwrap();
        let (u, n) = s.normalize().unwrap();
        assert_eq!(n, 2.0);
        assert_eq!(u.amplitude(&ket(&[("1", Occupation::H)])), c(1.0, 0.0));

        // alpha|HHV> - beta|VVH> with |alpha|^2 + |beta|^2 = 1/2
        let (a1, b1) = (0.6 * FRAC_1_SQRT_2, 0.8 * FRAC_1_SQRT_2);
        let s = PureState::from_terms(
            ["1'".into(), "2'".into(), "3".into()],
            [
                (ket(&[("1'", Occupation::H), ("2'", Occupation::H), ("3", Occupation::V)]), c(a1, 0.0)),
                (ket(&[("1'", Occupation::V), ("2'", Occupation::V), ("3", Occupation::H)]), c(-b1, 0.0)),
            ],
        )
        .unwrap();
        let (u, n) = s.normalize().unwrap();
        assert!((n - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((u.norm() - 1.0).abs() < 1e-15);

        let (again, n1) = u.normalize().unwrap();
        assert!((n1 - 1.0).abs() < 1e-15);
        assert!((again.inner(&u).unwrap().re - 1.0).abs() < 1e-15);

        let zero = PureState::zero(["1".into()]).unwrap();
        assert_eq!(zero.normalize().unwrap_err(), Error::ZeroNorm);
    }

    #[test]
    fn occupation_cap_enforced() {
        let s = PureState::from_terms(["1".into()], [(ket(&[("1", Occupation::new(3, 0))]), c(1.0, 0.0))]);
        assert!(matches!(s, Err(Error::OccupationOverflow { .. })));
        let s = PureState::vacuum(["1".into()]).unwrap().with_n_max(4).unwrap();
        assert_eq!(s.n_max(), 4);
    }

    #[test]
    fn schmidt_of_product_and_bell() {
        let b1 = PureState::single_photon("1", &SourceSpec::balanced()).unwrap();
        let b2 = PureState::single_photon("2", &SourceSpec::balanced()).unwrap();
        let sv = b1.tensor(&b2).unwrap().schmidt_coefficients(&["1".into()]).unwrap();
        assert!((sv[0] - 1.0).abs() < 1e-12 && sv[1].abs() < 1e-12);
    }
}
