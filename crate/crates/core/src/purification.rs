//! Purification of mixed single-photon polarization states with a PBS, a
//! two-mode herald and a `+/-` measurement.
//!
//! One round takes two photons drawn from the same ensemble `rho`, overlaps
//! them on a PBS, keeps the events with one photon in each output, measures
//! output `2'` in the `+/-` basis and applies a correction to `1'`
//! (identity on `+`, `sigma_z` on `-`). For `rho = f|H><H| + (1-f)|V><V|` the
//! survivor has `f' = f^2 / (f^2 + (1-f)^2)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::elements::{local_unitary_density, pbs_channel, PbsSpec, PolarizationUnitary};
use crate::fock::{DensityMatrix, ModeLabel, PureState, SourceSpec};
use crate::qndm::{measure_polarization_density, number_projector_density, Basis, PolOutcome};
use crate::{Error, Result};

/// `f^2 / (f^2 + (1 - f)^2)`.
pub fn f_update(f: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidArgument(format!("fraction {f} outside [0, 1]")));
    }
    let g = 1.0 - f;
    Ok(f * f / (f * f + g * g))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeBranch {
    pub outcome: PolOutcome,
    pub probability: f64,
    /// Corrected single-photon state on `1'`.
    pub state: Option<DensityMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundReport {
    pub input_f: f64,
    pub post_selection_probability: f64,
    pub outcome_branches: Vec<OutcomeBranch>,
    /// Probability-weighted output over both outcomes.
    pub output: DensityMatrix,
    pub output_f: f64,
    /// Surviving photons per input photon: two inputs per attempt.
    pub yield_fraction: f64,
}

fn horizontal_fraction(rho: &DensityMatrix, mode: &ModeLabel) -> Result<f64> {
    rho.fidelity_pure(&PureState::single_photon(mode.clone(), &SourceSpec::horizontal())?)
}

fn single_photon_mode(rho: &DensityMatrix) -> Result<ModeLabel> {
    let [mode] = rho.modes() else {
        return Err(Error::InvalidDensityMatrix(format!("expected one mode, got {}", rho.modes().len())));
    };
    for k in rho.basis() {
        if k.total_photons() != 1 {
            return Err(Error::InvalidDensityMatrix("expected exactly one photon".into()));
        }
    }
    rho.validate()?;
    Ok(mode.clone())
}

fn copies(rho: &DensityMatrix, mode: &ModeLabel) -> Result<DensityMatrix> {
    let to = |l: &str| BTreeMap::from([(mode.clone(), ModeLabel::from(l))]);
    rho.relabel(&to("1"))?.tensor(&rho.relabel(&to("2"))?)
}

/// Normalized two-photon state after the PBS and the two-mode post-selection,
/// with its selection probability.
fn post_selected_pair(rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    let mode = single_photon_mode(rho)?;
    let mixed = pbs_channel(&copies(rho, &mode)?, &PbsSpec::new("1", "2", "1'", "2'")?)?;
    let (kept, p) = number_projector_density(&mixed, &"1'".into(), 1)?;
    if p <= 0.0 {
        return Err(Error::DegenerateProtocol("post-selection probability is zero".into()));
    }
    let (pair, _) = kept.normalize()?;
    Ok((pair, p))
}

/// The post-selected two-mode ensemble on `1'`, `2'`, before any measurement.
pub fn entangled_mixture_check(rho: &DensityMatrix) -> Result<DensityMatrix> {
    post_selected_pair(rho).map(|(pair, _)| pair)
}

/// One purification round, simulated as an exact channel.
pub fn purify_round(rho: &DensityMatrix) -> Result<RoundReport> {
    let mode = single_photon_mode(rho)?;
    let input_f = horizontal_fraction(rho, &mode)?;
    let (pair, p_sel) = post_selected_pair(rho)?;
    let out_mode: ModeLabel = "1'".into();
    let mut outcome_branches = Vec::new();
    let mut parts = Vec::new();
    for b in measure_polarization_density(&pair, &"2'".into(), Basis::PlusMinus)? {
        let state = match b.state {
            Some(s) if b.outcome == PolOutcome::Minus => {
                Some(local_unitary_density(&s, &out_mode, &PolarizationUnitary::pauli_z())?)
            }
            other => other,
        };
        if let Some(s) = &state {
            parts.push((b.probability, s.clone()));
        }
        outcome_branches.push(OutcomeBranch { outcome: b.outcome, probability: b.probability, state });
    }
    let total: f64 = parts.iter().map(|(w, _)| w).sum();
    for part in &mut parts {
        part.0 /= total;
    }
    let output = DensityMatrix::mix(&parts)?;
    let output_f = horizontal_fraction(&output, &out_mode)?;
    Ok(RoundReport {
        input_f,
        post_selection_probability: p_sel,
        outcome_branches,
        output,
        output_f,
        yield_fraction: p_sel / 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Purifying,
    /// `f0 <= 1/2`: rounds cannot raise the dominant fraction toward `|H>`.
    NonPurifying,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub round: usize,
    pub f: f64,
    /// Two-mode selection probability of the round that produced this row; absent for round 0.
    pub selection_probability: Option<f64>,
    pub cumulative_yield: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub regime: Regime,
    pub rows: Vec<TrajectoryRow>,
}

/// Iterates the fraction recurrence `rounds` times from `f0`, tracking yield.
pub fn iterate(f0: f64, rounds: usize) -> Result<Trajectory> {
    let mut f = f0;
    f_update(f)?;
    let regime = if f0 > 0.5 { Regime::Purifying } else { Regime::NonPurifying };
    let mut cumulative = 1.0;
    let mut rows = vec![TrajectoryRow { round: 0, f, selection_probability: None, cumulative_yield: 1.0 }];
    for round in 1..=rounds {
        let p = f * f + (1.0 - f) * (1.0 - f);
        cumulative *= p / 2.0;
        f = f_update(f)?;
        rows.push(TrajectoryRow { round, f, selection_probability: Some(p), cumulative_yield: cumulative });
    }
    Ok(Trajectory { regime, rows })
}
