//! Unitary linear-optical elements acting on [`PureState`]s and [`DensityMatrix`]es.
//!
//! The polarizing beam splitter transmits `H` and reflects `V`. With inputs
//! `a`, `b` and outputs `a'`, `b'` the creation operators map as
//!
//! ```text
//! a_H -> b'_H    b_H -> a'_H    a_V -> r a'_V    b_V -> r b'_V
//! ```
//!
//! where `r` is the reflection phase (default `+1`). Because each input slot
//! lands in exactly one output slot, multi-photon kets map to single kets
//! with no bosonic `sqrt(n!)` factors.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fock::{DensityMatrix, ModeLabel, Occupation, OccupationKet, Polarization, PureState};
use crate::tol::EQ_TOL;
use crate::{Error, Result};

/// Port wiring and reflection phase of a polarizing beam splitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbsSpec {
    pub in_a: ModeLabel,
    pub in_b: ModeLabel,
    pub out_a: ModeLabel,
    pub out_b: ModeLabel,
    pub reflect_phase: Complex64,
    /// Exchanges the two output ports (the opposite port-labelling convention).
    pub swap_outputs: bool,
}

impl PbsSpec {
    pub fn new(
        in_a: impl Into<ModeLabel>,
        in_b: impl Into<ModeLabel>,
        out_a: impl Into<ModeLabel>,
        out_b: impl Into<ModeLabel>,
    ) -> Result<Self> {
        let spec = PbsSpec {
            in_a: in_a.into(),
            in_b: in_b.into(),
            out_a: out_a.into(),
            out_b: out_b.into(),
            reflect_phase: Complex64::new(1.0, 0.0),
            swap_outputs: false,
        };
        if spec.in_a == spec.in_b {
            return Err(Error::ModeCollision(spec.in_a.to_string()));
        }
        if spec.out_a == spec.out_b {
            return Err(Error::ModeCollision(spec.out_a.to_string()));
        }
        Ok(spec)
    }

    pub fn with_reflect_phase(mut self, phase: Complex64) -> Result<Self> {
        if (phase.norm() - 1.0).abs() > EQ_TOL {
            return Err(Error::InvalidArgument(format!("reflection phase {phase} is not unimodular")));
        }
        self.reflect_phase = phase;
        Ok(self)
    }

    pub fn with_swapped_outputs(mut self) -> Self {
        self.swap_outputs = !self.swap_outputs;
        self
    }

    fn ports(&self) -> (&ModeLabel, &ModeLabel) {
        if self.swap_outputs {
            (&self.out_b, &self.out_a)
        } else {
            (&self.out_a, &self.out_b)
        }
    }

    fn output_modes(&self, modes: &[ModeLabel]) -> Result<Vec<ModeLabel>> {
        for m in [&self.in_a, &self.in_b] {
            if !modes.contains(m) {
                return Err(Error::UnknownMode(m.to_string()));
            }
        }
        let mut out: Vec<ModeLabel> =
            modes.iter().filter(|m| **m != self.in_a && **m != self.in_b).cloned().collect();
        for m in [&self.out_a, &self.out_b] {
            if out.contains(m) {
                return Err(Error::ModeCollision(m.to_string()));
            }
            out.push(m.clone());
        }
        Ok(out)
    }

    fn map_ket(&self, ket: &OccupationKet) -> (OccupationKet, Complex64) {
        let mut k = ket.clone();
        let a = k.remove(&self.in_a).unwrap_or_default();
        let b = k.remove(&self.in_b).unwrap_or_default();
        let (pa, pb) = self.ports();
        k.set(pa.clone(), Occupation::new(b.h, a.v));
        k.set(pb.clone(), Occupation::new(a.h, b.v));
        (k, self.reflect_phase.powu(a.v + b.v))
    }
}

/// Sends `s` through the beam splitter described by `spec`.
pub fn pbs_apply(s: &PureState, spec: &PbsSpec) -> Result<PureState> {
    let modes = spec.output_modes(s.modes())?;
    s.map_kets(modes, |k| Ok(vec![spec.map_ket(k)]))
}

/// `U rho U^dagger` for the beam-splitter unitary.
pub fn pbs_channel(rho: &DensityMatrix, spec: &PbsSpec) -> Result<DensityMatrix> {
    pbs_channel_capped(rho, spec, crate::tol::DEFAULT_N_MAX)
}

/// [`pbs_channel`] with an explicit per-polarization occupation cap.
pub fn pbs_channel_capped(rho: &DensityMatrix, spec: &PbsSpec, n_max: u32) -> Result<DensityMatrix> {
    let modes = spec.output_modes(rho.modes())?;
    let out = rho.map_kets(modes, |k| Ok(vec![spec.map_ket(k)]))?;
    for k in out.basis() {
        if k.max_occupation() > n_max {
            return Err(Error::OccupationOverflow { mode: first_overflow(&k, n_max), n_max });
        }
    }
    Ok(out)
}

fn first_overflow(k: &OccupationKet, n_max: u32) -> String {
    k.iter()
        .find(|(_, o)| o.h > n_max || o.v > n_max)
        .map(|(m, _)| m.to_string())
        .unwrap_or_default()
}

/// A 2x2 unitary on the `(H, V)` amplitudes of one spatial mode.
///
/// Column `j` is the image of basis state `j`: `U|H> = u[0][0]|H> + u[1][0]|V>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationUnitary([[Complex64; 2]; 2]);

impl PolarizationUnitary {
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let u = PolarizationUnitary(m);
        let p = u.adjoint().mul(&u).0;
        let id = [[1.0, 0.0], [0.0, 1.0]];
        let mut deviation = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                deviation = deviation.max((p[i][j] - Complex64::new(id[i][j], 0.0)).norm());
            }
        }
        if deviation.is_nan() || deviation > EQ_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(u)
    }

    fn real(m: [[f64; 2]; 2]) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        PolarizationUnitary([[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]])
    }

    pub fn identity() -> Self {
        Self::real([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn pauli_x() -> Self {
        Self::real([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::i();
        let z = Complex64::default();
        PolarizationUnitary([[z, -i], [i, z]])
    }

    pub fn pauli_z() -> Self {
        Self::real([[1.0, 0.0], [0.0, -1.0]])
    }

    pub fn hadamard() -> Self {
        Self::real([[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]])
    }

    /// Half-wave plate with fast axis at `theta` radians from horizontal.
    pub fn half_wave_plate(theta: f64) -> Self {
        let (s, c) = (2.0 * theta).sin_cos();
        Self::real([[c, s], [s, -c]])
    }

    /// Quarter-wave plate with fast axis at `theta` radians from horizontal.
    pub fn quarter_wave_plate(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let m = [
            [one * (c * c) + i * (s * s), (one - i) * (s * c)],
            [(one - i) * (s * c), one * (s * s) + i * (c * c)],
        ];
        PolarizationUnitary(m)
    }

    /// `diag(1, e^{i phi})`.
    pub fn phase_v(phi: f64) -> Self {
        let z = Complex64::default();
        PolarizationUnitary([[Complex64::new(1.0, 0.0), z], [z, Complex64::from_polar(1.0, phi)]])
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        let m = self.0;
        PolarizationUnitary([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    /// Matrix product `self * rhs` (apply `rhs` first).
    pub fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[Complex64::default(); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        PolarizationUnitary(out)
    }

    pub fn is_diagonal(&self) -> bool {
        self.0[0][1].norm() <= EQ_TOL && self.0[1][0].norm() <= EQ_TOL
    }

    fn map_ket(&self, ket: &OccupationKet, mode: &ModeLabel) -> Result<Vec<(OccupationKet, Complex64)>> {
        let occ = ket.get(mode).ok_or_else(|| Error::UnknownMode(mode.to_string()))?;
        let with = |o: Occupation| {
            let mut k = ket.clone();
            k.set(mode.clone(), o);
            k
        };
        let m = self.0;
        Ok(match (occ.h, occ.v) {
            (0, 0) => vec![(ket.clone(), Complex64::new(1.0, 0.0))],
            (1, 0) => vec![(with(Occupation::H), m[0][0]), (with(Occupation::V), m[1][0])],
            (0, 1) => vec![(with(Occupation::H), m[0][1]), (with(Occupation::V), m[1][1])],
            (h, v) if self.is_diagonal() => vec![(ket.clone(), m[0][0].powu(h) * m[1][1].powu(v))],
            _ => return Err(Error::UnsupportedMultiPhoton(mode.to_string())),
        })
    }
}

/// Applies `u` to the polarization of `mode`.
pub fn local_unitary(s: &PureState, mode: &ModeLabel, u: &PolarizationUnitary) -> Result<PureState> {
    s.require_mode(mode)?;
    s.map_kets(s.modes().to_vec(), |k| u.map_ket(k, mode))
}

pub fn local_unitary_density(rho: &DensityMatrix, mode: &ModeLabel, u: &PolarizationUnitary) -> Result<DensityMatrix> {
    if !rho.modes().contains(mode) {
        return Err(Error::UnknownMode(mode.to_string()));
    }
    rho.map_kets(rho.modes().to_vec(), |k| u.map_ket(k, mode))
}

/// Multiplies each ket by `e^{i phi n_pol(mode)}`.
pub fn phase_shift(s: &PureState, mode: &ModeLabel, pol: Polarization, phi: f64) -> Result<PureState> {
    s.require_mode(mode)?;
    Ok(s.scale_by(|k| phase_factor(k, mode, pol, phi)))
}

pub fn phase_shift_density(rho: &DensityMatrix, mode: &ModeLabel, pol: Polarization, phi: f64) -> Result<DensityMatrix> {
    if !rho.modes().contains(mode) {
        return Err(Error::UnknownMode(mode.to_string()));
    }
    Ok(rho.scale_by(|k| phase_factor(k, mode, pol, phi)))
}

fn phase_factor(k: &OccupationKet, mode: &ModeLabel, pol: Polarization, phi: f64) -> Complex64 {
    let n = k.get(mode).map(|o| o.count(pol)).unwrap_or(0);
    Complex64::from_polar(1.0, phi * n as f64)
}

/// Renames modes in a state; convenience for wiring protocol stages.
pub fn relabel(s: &PureState, pairs: &[(&str, &str)]) -> Result<PureState> {
    let map: BTreeMap<ModeLabel, ModeLabel> = pairs.iter().map(|(a, b)| ((*a).into(), (*b).into())).collect();
    s.relabel(&map)
}
