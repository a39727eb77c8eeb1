//! Herald-all-branches execution of a compiled pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::validate::{CompiledPipeline, Factor, StepKind};
use crate::elements::{pbs_apply, pbs_channel_capped};
use crate::fock::{dephased_photon, DensityEntry, DensityMatrix, ModeLabel, PureState, StateTerm};
use crate::protocols::{bell_state, RateEstimate};
use crate::qndm::{
    measure_polarization, measure_polarization_density, meter_qndm, meter_qndm_density, number_projector,
    number_projector_density, MeterOutcome, PolOutcome,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Monte Carlo shots; `None` runs the exact branch calculation only.
    pub shots: Option<u64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub index: usize,
    pub kind: String,
    pub lines: Vec<usize>,
    /// Probability of surviving this step given that the previous steps succeeded.
    pub probability: f64,
}

/// One surviving combination of measurement outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub outcomes: Vec<PolOutcome>,
    pub probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<StateTerm>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<DensityEntry>>,
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub seed: u64,
    #[serde(flatten)]
    pub rate: RateEstimate,
    /// Hits per branch, in branch order.
    pub branch_counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub modes: Vec<String>,
    pub steps: Vec<StepReport>,
    pub success_probability: f64,
    pub branches: Vec<BranchReport>,
    /// The final state when exactly one pure branch survives.
    pub state: Option<Vec<StateTerm>>,
    pub target: Option<String>,
    /// Branch-weighted fidelity against the target.
    pub fidelity: Option<f64>,
    pub monte_carlo: Option<MonteCarloReport>,
}

#[derive(Debug, Clone)]
enum Amp {
    Pure(PureState),
    Mixed(DensityMatrix),
}

#[derive(Debug, Clone)]
struct Live {
    outcomes: Vec<PolOutcome>,
    weight: f64,
    state: Amp,
}

fn drop_vacuum(a: &Amp, mode: &ModeLabel) -> Result<Amp> {
    Ok(match a {
        Amp::Pure(s) => {
            let rest: Vec<ModeLabel> = s.modes().iter().filter(|m| *m != mode).cloned().collect();
            Amp::Pure(s.map_kets(rest, |k| {
                let mut r = k.clone();
                r.remove(mode);
                Ok(vec![(r, num_complex::Complex64::new(1.0, 0.0))])
            })?)
        }
        Amp::Mixed(r) => {
            let rest: Vec<ModeLabel> = r.modes().iter().filter(|m| *m != mode).cloned().collect();
            Amp::Mixed(r.partial_trace(&rest)?)
        }
    })
}

fn factor_state(f: &Factor, mixed: bool) -> Result<Amp> {
    let pure = match f {
        Factor::Vacuum { mode } => PureState::vacuum([mode.clone()])?,
        Factor::Pure { mode, spec } => PureState::single_photon(mode.clone(), spec)?,
        Factor::Bell { kind, a, b } => bell_state(*kind, a.clone(), b.clone())?,
        Factor::Mixed { mode, f } => return Ok(Amp::Mixed(dephased_photon(mode.clone(), *f)?)),
    };
    Ok(if mixed { Amp::Mixed(DensityMatrix::from_pure(&pure)) } else { Amp::Pure(pure) })
}

fn tensor(a: &Amp, b: &Amp, n_max: u32) -> Result<Amp> {
    Ok(match (a, b) {
        (Amp::Pure(x), Amp::Pure(y)) => Amp::Pure(x.tensor(y)?.with_n_max(n_max)?),
        (Amp::Mixed(x), Amp::Mixed(y)) => Amp::Mixed(x.tensor(y)?),
        _ => return Err(Error::InvalidArgument("internal: mixed pure and density branches".into())),
    })
}

/// Applies one step to one branch, returning the surviving sub-branches with
/// their conditional probabilities.
fn apply(kind: &StepKind, a: &Amp, n_max: u32, mixed: bool) -> Result<Vec<(Option<PolOutcome>, f64, Amp)>> {
    let one = |a: Amp| Ok(vec![(None, 1.0, a)]);
    match (kind, a) {
        (StepKind::Prepare { factors, fills }, _) => {
            let mut s = a.clone();
            for m in fills {
                s = drop_vacuum(&s, m)?;
            }
            for f in factors {
                s = tensor(&s, &factor_state(f, mixed)?, n_max)?;
            }
            one(s)
        }
        (StepKind::Pbs(spec), Amp::Pure(s)) => one(Amp::Pure(pbs_apply(s, spec)?)),
        (StepKind::Pbs(spec), Amp::Mixed(r)) => one(Amp::Mixed(pbs_channel_capped(r, spec, n_max)?)),
        (StepKind::Herald { mode }, Amp::Pure(s)) => {
            let (part, p) = number_projector(s, mode, 1)?;
            Ok(part.normalize().ok().map(|(u, _)| (None, p, Amp::Pure(u))).into_iter().collect())
        }
        (StepKind::Herald { mode }, Amp::Mixed(r)) => {
            let (part, p) = number_projector_density(r, mode, 1)?;
            Ok(part.normalize().ok().map(|(u, _)| (None, p, Amp::Mixed(u))).into_iter().collect())
        }
        (StepKind::Meter { mode, meter }, Amp::Pure(s)) => Ok(meter_qndm(s, mode, meter)?
            .into_iter()
            .filter(|b| b.outcome == MeterOutcome::Minus)
            .filter_map(|b| b.state.map(|u| (None, b.probability, Amp::Pure(u))))
            .collect()),
        (StepKind::Meter { mode, meter }, Amp::Mixed(r)) => Ok(meter_qndm_density(r, mode, meter)?
            .into_iter()
            .filter(|b| b.outcome == MeterOutcome::Minus)
            .filter_map(|b| b.state.map(|u| (None, b.probability, Amp::Mixed(u))))
            .collect()),
        (StepKind::Measure { mode, basis }, Amp::Pure(s)) => Ok(measure_polarization(s, mode, *basis)?
            .into_iter()
            .filter_map(|b| b.state.map(|u| (Some(b.outcome), b.probability, Amp::Pure(u))))
            .collect()),
        (StepKind::Measure { mode, basis }, Amp::Mixed(r)) => Ok(measure_polarization_density(r, mode, *basis)?
            .into_iter()
            .filter_map(|b| b.state.map(|u| (Some(b.outcome), b.probability, Amp::Mixed(u))))
            .collect()),
    }
}

fn runtime(e: Error) -> Error {
    match e {
        Error::OccupationOverflow { .. } | Error::NotSinglePhoton { .. } => {
            Error::InvalidArgument(format!("internal inconsistency: photon budget violated ({e})"))
        }
        e => e,
    }
}

fn total_weight(live: &[Live]) -> f64 {
    live.iter().fold(0.0, |acc, b| acc + b.weight)
}

/// Runs every branch exactly; with `options.shots` also samples outcomes.
pub fn run(p: &CompiledPipeline, options: &RunOptions) -> Result<RunReport> {
    let start = if p.mixed {
        Amp::Mixed(DensityMatrix::from_pure(&PureState::vacuum([])?))
    } else {
        Amp::Pure(PureState::vacuum([])?.with_n_max(p.n_max)?)
    };
    let mut live = vec![Live { outcomes: Vec::new(), weight: 1.0, state: start }];
    let mut steps = Vec::new();
    for (index, step) in p.steps.iter().enumerate() {
        let before = total_weight(&live);
        let mut next = Vec::new();
        for b in &live {
            for (outcome, prob, state) in apply(&step.kind, &b.state, p.n_max, p.mixed).map_err(runtime)? {
                let weight = b.weight * prob;
                if weight <= 0.0 {
                    continue;
                }
                let mut outcomes = b.outcomes.clone();
                outcomes.extend(outcome);
                next.push(Live { outcomes, weight, state });
            }
        }
        live = next;
        let after = total_weight(&live);
        let probability = if before > 0.0 { (after / before).min(1.0) } else { 0.0 };
        steps.push(StepReport { index, kind: step.kind.name().to_owned(), lines: step.lines.clone(), probability });
    }

    let success_probability = total_weight(&live).min(1.0);
    let mut branches = Vec::new();
    for b in &live {
        let fidelity = match &p.target {
            Some(t) => Some(match &b.state {
                Amp::Pure(s) => s.overlap_sqr(&t.state)?,
                Amp::Mixed(r) => r.fidelity_pure(&t.state)?,
            }),
            None => None,
        };
        let (state, density) = match &b.state {
            Amp::Pure(s) => (Some(s.to_terms()), None),
            Amp::Mixed(r) => (None, Some(r.to_entries())),
        };
        branches.push(BranchReport { outcomes: b.outcomes.clone(), probability: b.weight, state, density, fidelity });
    }
    let fidelity = if p.target.is_some() && success_probability > 0.0 {
        Some(branches.iter().map(|b| b.probability * b.fidelity.unwrap_or(0.0)).sum::<f64>() / success_probability)
    } else {
        None
    };
    let state = match branches.as_slice() {
        [only] => only.state.clone(),
        _ => None,
    };
    let monte_carlo = match options.shots {
        Some(shots) => Some(sample_branches(&branches, shots, options.seed)?),
        None => None,
    };
    Ok(RunReport {
        modes: p.final_modes.iter().map(|m| m.to_string()).collect(),
        steps,
        success_probability,
        branches,
        state,
        target: p.target.as_ref().map(|t| t.name.clone()),
        fidelity,
        monte_carlo,
    })
}

/// Born-rule sampling over the branch weights; weight left over is failure.
fn sample_branches(branches: &[BranchReport], shots: u64, seed: u64) -> Result<MonteCarloReport> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let mut cumulative = Vec::with_capacity(branches.len());
    let mut acc = 0.0;
    for b in branches {
        acc += b.probability;
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut branch_counts = vec![0u64; branches.len()];
    for _ in 0..shots {
        let u = rng.random::<f64>();
        if let Some(i) = cumulative.iter().position(|&c| u < c) {
            branch_counts[i] += 1;
        }
    }
    let successes = branch_counts.iter().sum();
    Ok(MonteCarloReport { seed, rate: RateEstimate::from_counts(shots, successes), branch_counts })
}
