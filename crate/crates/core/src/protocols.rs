//! Entanglement-generation protocols assembled from beam splitters and heralds.
//!
//! Mode naming: sources emit into `1`, `2`, ...; beam-splitter outputs carry a
//! prime (`1'`, `2'`). The herald always watches the first output port.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::elements::{local_unitary, pbs_apply, phase_shift, PbsSpec, PolarizationUnitary};
use crate::fock::{ModeLabel, Occupation, OccupationKet, Polarization, PureState, SourceSpec};
use crate::qndm::{qndm_herald, HeraldOutcome};
use crate::tol::EQ_TOL;
use crate::{Error, Result};

/// What an audit-trail entry did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "element", rename_all = "snake_case")]
pub enum Element {
    Source { mode: ModeLabel, alpha: Complex64, beta: Complex64 },
    Pbs { in_a: ModeLabel, in_b: ModeLabel, out_a: ModeLabel, out_b: ModeLabel },
    Qndm { mode: ModeLabel },
    LocalUnitary { mode: ModeLabel, gate: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditStep {
    #[serde(flatten)]
    pub element: Element,
    pub outcome: Option<HeraldOutcome>,
    pub probability: f64,
}

impl AuditStep {
    fn unconditional(element: Element) -> Self {
        AuditStep { element, outcome: None, probability: 1.0 }
    }
}

/// Heralded output of a protocol together with its audit trail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolResult {
    pub heralded_state: PureState,
    pub success_probability: f64,
    pub steps: Vec<AuditStep>,
    /// `arg(a_2 / a_1)` for two-term outputs, terms in canonical order.
    pub relative_phase: Option<f64>,
}

impl ProtocolResult {
    pub fn pbs_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s.element, Element::Pbs { .. })).count()
    }

    pub fn herald_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s.element, Element::Qndm { .. })).count()
    }

    /// Conditional success probability of each herald, in order.
    pub fn herald_probabilities(&self) -> Vec<f64> {
        self.steps
            .iter()
            .filter(|s| matches!(s.element, Element::Qndm { .. }))
            .map(|s| s.probability)
            .collect()
    }

    /// Removes a relative sign of `-1` between the two output terms with a recorded
    /// `sigma_z` on the first mode where the terms differ in polarization.
    pub fn with_sign_correction(mut self) -> Result<Self> {
        let Some(phase) = self.relative_phase else {
            return Ok(self);
        };
        if (phase.abs() - PI).abs() > 1e-9 {
            return Ok(self);
        }
        let kets: Vec<OccupationKet> = self.heralded_state.terms().map(|(k, _)| k.clone()).collect();
        let mode = kets[0]
            .iter()
            .zip(kets[1].iter())
            .find(|((_, a), (_, b))| a != b && a.total() == 1 && b.total() == 1)
            .map(|((m, _), _)| m.clone())
            .ok_or_else(|| Error::InvalidArgument("no mode distinguishes the two terms".into()))?;
        self.heralded_state = phase_shift(&self.heralded_state, &mode, Polarization::V, PI)?;
        self.steps.push(AuditStep::unconditional(Element::LocalUnitary { mode, gate: "sigma_z".into() }));
        self.relative_phase = relative_phase(&self.heralded_state);
        Ok(self)
    }
}

fn relative_phase(s: &PureState) -> Option<f64> {
    let amps: Vec<Complex64> = s.terms().map(|(_, a)| a).collect();
    match amps.as_slice() {
        [a, b] => Some((b / a).arg()),
        _ => None,
    }
}

fn source_step(mode: &str, spec: &SourceSpec) -> AuditStep {
    AuditStep::unconditional(Element::Source { mode: mode.into(), alpha: spec.alpha, beta: spec.beta })
}

fn pbs_step(spec: &PbsSpec) -> AuditStep {
    AuditStep::unconditional(Element::Pbs {
        in_a: spec.in_a.clone(),
        in_b: spec.in_b.clone(),
        out_a: spec.out_a.clone(),
        out_b: spec.out_b.clone(),
    })
}

/// Beam splitter followed by a success herald on `spec.out_a`.
fn pbs_and_herald(state: &PureState, spec: &PbsSpec, steps: &mut Vec<AuditStep>) -> Result<(PureState, f64)> {
    let mixed = pbs_apply(state, spec)?;
    steps.push(pbs_step(spec));
    let herald = qndm_herald(&mixed, &spec.out_a)?;
    let p = herald.success.probability;
    steps.push(AuditStep {
        element: Element::Qndm { mode: spec.out_a.clone() },
        outcome: Some(HeraldOutcome::Success),
        probability: p,
    });
    let post = herald
        .success
        .state
        .ok_or_else(|| Error::DegenerateProtocol(format!("herald on '{}' has zero success probability", spec.out_a)))?;
    Ok((post, p))
}

/// Two independent single photons on a PBS, heralded on output `1'`.
pub fn entangle_two(s1: &SourceSpec, s2: &SourceSpec) -> Result<ProtocolResult> {
    let a = s1.alpha * s2.alpha;
    let b = s1.beta * s2.beta;
    if a.norm_sqr() + b.norm_sqr() == 0.0 {
        return Err(Error::DegenerateProtocol("alpha1*alpha2 and beta1*beta2 both vanish".into()));
    }
    let input = PureState::single_photon("1", s1)?.tensor(&PureState::single_photon("2", s2)?)?;
    let mut steps = vec![source_step("1", s1), source_step("2", s2)];
    let spec = PbsSpec::new("1", "2", "1'", "2'")?;
    let (state, p) = pbs_and_herald(&input, &spec, &mut steps)?;
    Ok(ProtocolResult { relative_phase: relative_phase(&state), heralded_state: state, success_probability: p, steps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellKind {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus];

    /// Local correction on the second photon that turns `phi+` into this state.
    pub fn correction(self) -> (PolarizationUnitary, &'static str) {
        match self {
            BellKind::PhiPlus => (PolarizationUnitary::identity(), "identity"),
            BellKind::PhiMinus => (PolarizationUnitary::pauli_z(), "sigma_z"),
            BellKind::PsiPlus => (PolarizationUnitary::pauli_x(), "sigma_x"),
            BellKind::PsiMinus => (PolarizationUnitary::pauli_x().mul(&PolarizationUnitary::pauli_z()), "sigma_x*sigma_z"),
        }
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
        })
    }
}

impl FromStr for BellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi+" => Ok(BellKind::PhiPlus),
            "phi-" => Ok(BellKind::PhiMinus),
            "psi+" => Ok(BellKind::PsiPlus),
            "psi-" => Ok(BellKind::PsiMinus),
            _ => Err(Error::InvalidArgument(format!("unknown Bell state '{s}'"))),
        }
    }
}

/// Ideal Bell state on modes `(a, b)`, `a` being the first photon.
pub fn bell_state(kind: BellKind, a: impl Into<ModeLabel>, b: impl Into<ModeLabel>) -> Result<PureState> {
    let (a, b) = (a.into(), b.into());
    let (flip, sign) = match kind {
        BellKind::PhiPlus => (false, 1.0),
        BellKind::PhiMinus => (false, -1.0),
        BellKind::PsiPlus => (true, 1.0),
        BellKind::PsiMinus => (true, -1.0),
    };
    let (with_h, with_v) = if flip { (Occupation::V, Occupation::H) } else { (Occupation::H, Occupation::V) };
    let k1 = OccupationKet::from_pairs([(a.clone(), Occupation::H), (b.clone(), with_h)]);
    let k2 = OccupationKet::from_pairs([(a.clone(), Occupation::V), (b.clone(), with_v)]);
    PureState::from_terms(
        [a, b],
        [(k1, Complex64::new(FRAC_1_SQRT_2, 0.0)), (k2, Complex64::new(sign * FRAC_1_SQRT_2, 0.0))],
    )
}

/// `(|H...H> + e^{i phase}|V...V>)/sqrt 2` over `modes`.
pub fn ghz_state(modes: &[ModeLabel], phase: f64) -> Result<PureState> {
    let all = |o: Occupation| OccupationKet::from_pairs(modes.iter().map(|m| (m.clone(), o)));
    PureState::from_terms(
        modes.iter().cloned(),
        [
            (all(Occupation::H), Complex64::new(FRAC_1_SQRT_2, 0.0)),
            (all(Occupation::V), Complex64::from_polar(FRAC_1_SQRT_2, phase)),
        ],
    )
}

/// Heralds `phi+` from balanced sources and applies the local correction for `kind`
/// on mode `2'`.
pub fn make_bell(kind: BellKind) -> PureState {
    let r = entangle_two(&SourceSpec::balanced(), &SourceSpec::balanced()).expect("balanced sources herald with p = 1/2");
    let (u, _) = kind.correction();
    local_unitary(&r.heralded_state, &"2'".into(), &u).expect("single-photon mode accepts any unitary")
}

/// Source photon in mode `1` combined with a two-photon pair on modes `2`, `3`:
/// PBS on `1`, `2` and a herald on `1'`.
pub fn ghz_three(s1: &SourceSpec, pair: &PureState) -> Result<ProtocolResult> {
    let (m2, m3): (ModeLabel, ModeLabel) = ("2".into(), "3".into());
    if pair.modes() != [m2.clone(), m3.clone()] {
        return Err(Error::InvalidArgument(format!(
            "pair must live on modes 2 and 3, got {:?}",
            pair.modes().iter().map(|m| m.as_str()).collect::<Vec<_>>()
        )));
    }
    for (k, _) in pair.terms() {
        for m in [&m2, &m3] {
            let n = crate::fock::photon_number(k, m)?;
            if n != 1 {
                return Err(Error::NotSinglePhoton { mode: m.to_string(), photons: n });
            }
        }
    }
    let (pair, _) = pair.normalize()?;
    let input = PureState::single_photon("1", s1)?.tensor(&pair)?;
    let mut steps = vec![source_step("1", s1)];
    let spec = PbsSpec::new("1", "2", "1'", "2'")?;
    let (state, p) = pbs_and_herald(&input, &spec, &mut steps)?;
    Ok(ProtocolResult { relative_phase: relative_phase(&state), heralded_state: state, success_probability: p, steps })
}

/// Step-by-step n-photon chain: two sources are entangled, then each further source
/// photon meets the highest-index arm on a PBS and is heralded.
/// Uses `n` sources, `n - 1` beam splitters and `n - 1` heralds.
pub fn chain_n(specs: &[SourceSpec]) -> Result<ProtocolResult> {
    if specs.len() < 2 {
        return Err(Error::InvalidArgument(format!("chain needs at least 2 sources, got {}", specs.len())));
    }
    let first = entangle_two(&specs[0], &specs[1])?;
    let mut state = first.heralded_state;
    let mut steps = first.steps;
    let mut probability = first.success_probability;
    for (i, spec) in specs.iter().enumerate().skip(2) {
        let k = i + 1;
        let src = k.to_string();
        let arm = format!("{}'", k - 1);
        let fresh = format!("{k}'");
        steps.push(source_step(&src, spec));
        let input = PureState::single_photon(src.as_str(), spec)?.tensor(&state)?;
        let pbs = PbsSpec::new(src.as_str(), arm.as_str(), fresh.as_str(), arm.as_str())?;
        let (next, p) = pbs_and_herald(&input, &pbs, &mut steps)?;
        state = next;
        probability *= p;
    }
    Ok(ProtocolResult { relative_phase: relative_phase(&state), heralded_state: state, success_probability: probability, steps })
}

/// A built-in protocol with its inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Protocol {
    EntangleTwo { s1: SourceSpec, s2: SourceSpec },
    GhzThree { s1: SourceSpec, pair: PureState },
    Chain { specs: Vec<SourceSpec> },
}

impl Protocol {
    pub fn run(&self) -> Result<ProtocolResult> {
        match self {
            Protocol::EntangleTwo { s1, s2 } => entangle_two(s1, s2),
            Protocol::GhzThree { s1, pair } => ghz_three(s1, pair),
            Protocol::Chain { specs } => chain_n(specs),
        }
    }
}

/// Closed-form success probability, without simulating.
pub fn success_probability_analytic(protocol: &Protocol) -> Result<f64> {
    match protocol {
        Protocol::EntangleTwo { s1, s2 } => Ok((s1.alpha * s2.alpha).norm_sqr() + (s1.beta * s2.beta).norm_sqr()),
        Protocol::GhzThree { s1, pair } => {
            let is_bell = BellKind::ALL.iter().any(|&k| {
                bell_state(k, "2", "3")
                    .and_then(|b| b.overlap_sqr(pair))
                    .map(|f| (f - 1.0).abs() <= EQ_TOL)
                    .unwrap_or(false)
            });
            if !is_bell {
                return Err(Error::UnsupportedProtocol("GHZ step closed form needs a Bell-state pair".into()));
            }
            Ok((s1.alpha.norm_sqr() + s1.beta.norm_sqr()) / 2.0)
        }
        Protocol::Chain { specs } => {
            if specs.len() < 2 {
                return Err(Error::InvalidArgument(format!("chain needs at least 2 sources, got {}", specs.len())));
            }
            let a: Complex64 = specs.iter().map(|s| s.alpha).product();
            let b: Complex64 = specs.iter().map(|s| s.beta).product();
            Ok(a.norm_sqr() + b.norm_sqr())
        }
    }
}

/// Empirical success rate from repeated sampled runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub shots: u64,
    pub successes: u64,
    pub estimate: f64,
    pub std_error: f64,
}

impl RateEstimate {
    pub fn from_counts(shots: u64, successes: u64) -> Self {
        let estimate = successes as f64 / shots as f64;
        let std_error = (estimate * (1.0 - estimate) / shots as f64).sqrt();
        RateEstimate { shots, successes, estimate, std_error }
    }
}

/// Samples a sequence of heralds whose conditional success probabilities are
/// `steps`; a shot succeeds when every herald fires.
pub fn sample_heralds(steps: &[f64], shots: u64, seed: u64) -> Result<RateEstimate> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut successes = 0;
    for _ in 0..shots {
        if steps.iter().all(|&p| rng.random::<f64>() < p) {
            successes += 1;
        }
    }
    Ok(RateEstimate::from_counts(shots, successes))
}

/// Seeded Monte Carlo estimate of a protocol's success rate, one Born-rule
/// decision per herald.
pub fn monte_carlo(protocol: &Protocol, shots: u64, seed: u64) -> Result<RateEstimate> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let steps = match protocol.run() {
        Ok(r) => r.herald_probabilities(),
        Err(Error::DegenerateProtocol(_)) => vec![0.0],
        Err(e) => return Err(e),
    };
    sample_heralds(&steps, shots, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn modes(labels: &[&str]) -> Vec<ModeLabel> {
        labels.iter().map(|&l| l.into()).collect()
    }

    #[test]
    fn entangle_two_examples() {
        let r = entangle_two(&SourceSpec::balanced(), &SourceSpec::balanced()).unwrap();
        assert!((r.success_probability - 0.5).abs() < 1e-15);
        let phi = bell_state(BellKind::PhiPlus, "1'", "2'").unwrap();
        assert!((r.heralded_state.overlap_sqr(&phi).unwrap() - 1.0).abs() < 1e-12);

        let r = entangle_two(&SourceSpec::horizontal(), &SourceSpec::horizontal()).unwrap();
        assert_eq!(r.success_probability, 1.0);
        assert_eq!(r.heralded_state.len(), 1);

        let s = SourceSpec::real(0.6, 0.8).unwrap();
        let r = entangle_two(&s, &s).unwrap();
        assert!((r.success_probability - 0.5392).abs() < 1e-12);
        let vv = OccupationKet::from_pairs([("1'", Occupation::V), ("2'", Occupation::V)]);
        assert!((r.heralded_state.amplitude(&vv).re - 0.64 / 0.5392f64.sqrt()).abs() < 1e-12);

        let err = entangle_two(&SourceSpec::horizontal(), &SourceSpec::vertical()).unwrap_err();
        assert!(matches!(err, Error::DegenerateProtocol(_)));
    }

    #[test]
    fn relative_phase_is_recoverable() {
        let phi = 0.7;
        let s2 = SourceSpec::new(c(FRAC_1_SQRT_2, 0.0), Complex64::from_polar(FRAC_1_SQRT_2, phi)).unwrap();
        let r = entangle_two(&SourceSpec::balanced(), &s2).unwrap();
        assert!((r.relative_phase.unwrap() - phi).abs() < 1e-12);
        let target = ghz_state(&modes(&["1'", "2'"]), phi).unwrap();
        assert!((r.heralded_state.overlap_sqr(&target).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_factory() {
        let expected = [
            (BellKind::PhiPlus, bell_state(BellKind::PhiPlus, "1'", "2'").unwrap()),
            (BellKind::PsiMinus, bell_state(BellKind::PsiMinus, "1'", "2'").unwrap()),
        ];
        for (k, e) in expected {
            assert!((make_bell(k).inner(&e).unwrap().re - 1.0).abs() < 1e-12, "{k}");
        }
        let all: Vec<PureState> = BellKind::ALL.iter().map(|&k| make_bell(k)).collect();
        for i in 0..4 {
            for j in 0..4 {
                let o = all[i].inner(&all[j]).unwrap().norm();
                assert!((o - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert_eq!("psi-".parse::<BellKind>().unwrap(), BellKind::PsiMinus);
        assert!("chi".parse::<BellKind>().is_err());
    }

    fn hhv_vvh(a: f64, b: f64) -> PureState {
        PureState::from_terms(
            modes(&["1'", "2'", "3"]),
            [
                (OccupationKet::from_pairs([("1'", Occupation::H), ("2'", Occupation::H), ("3", Occupation::V)]), c(a, 0.0)),
                (OccupationKet::from_pairs([("1'", Occupation::V), ("2'", Occupation::V), ("3", Occupation::H)]), c(b, 0.0)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn ghz_three_examples() {
        let pair = bell_state(BellKind::PsiMinus, "2", "3").unwrap();
        let r = ghz_three(&SourceSpec::balanced(), &pair).unwrap();
        assert!((r.success_probability - 0.5).abs() < 1e-12);
        let t = hhv_vvh(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
        assert!((r.heralded_state.overlap_sqr(&t).unwrap() - 1.0).abs() < 1e-12);
        assert!((r.relative_phase.unwrap().abs() - PI).abs() < 1e-12);

        let r = ghz_three(&SourceSpec::horizontal(), &pair).unwrap();
        assert!((r.success_probability - 0.5).abs() < 1e-12);
        assert_eq!(r.heralded_state.len(), 1);

        let r = ghz_three(&SourceSpec::real(0.6, 0.8).unwrap(), &pair).unwrap();
        assert!((r.heralded_state.inner(&hhv_vvh(0.6, -0.8)).unwrap().re - 1.0).abs() < 1e-12);

        let bad = PureState::single_photon("2", &SourceSpec::horizontal())
            .unwrap()
            .tensor(&PureState::vacuum(["3".into()]).unwrap())
            .unwrap();
        assert!(matches!(ghz_three(&SourceSpec::balanced(), &bad), Err(Error::NotSinglePhoton { .. })));
    }

    #[test]
    fn sign_correction_is_recorded() {
        let pair = bell_state(BellKind::PsiMinus, "2", "3").unwrap();
        let r = ghz_three(&SourceSpec::balanced(), &pair).unwrap().with_sign_correction().unwrap();
        assert!(r.relative_phase.unwrap().abs() < 1e-12);
        assert!(matches!(r.steps.last().unwrap().element, Element::LocalUnitary { .. }));
        let t = hhv_vvh(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        assert!((r.heralded_state.inner(&t).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_examples() {
        let two = chain_n(&[SourceSpec::balanced(), SourceSpec::balanced()]).unwrap();
        let direct = entangle_two(&SourceSpec::balanced(), &SourceSpec::balanced()).unwrap();
        assert_eq!(two.heralded_state, direct.heralded_state);
        assert_eq!(two.success_probability, direct.success_probability);

        let r = chain_n(&[SourceSpec::balanced(); 3]).unwrap();
        assert!((r.success_probability - 0.25).abs() < 1e-12);
        let ghz = ghz_state(r.heralded_state.modes(), 0.0).unwrap();
        assert!((r.heralded_state.overlap_sqr(&ghz).unwrap() - 1.0).abs() < 1e-12);

        let r = chain_n(&[SourceSpec::balanced(); 5]).unwrap();
        assert!((r.success_probability - 0.0625).abs() < 1e-12);
        assert_eq!((r.pbs_count(), r.herald_count()), (4, 4));

        assert!(chain_n(&[SourceSpec::balanced()]).is_err());
        let err = chain_n(&[SourceSpec::balanced(), SourceSpec::balanced(), SourceSpec::horizontal(), SourceSpec::vertical()]);
        assert!(matches!(err, Err(Error::DegenerateProtocol(_))));
    }

    #[test]
    fn analytic_probabilities() {
        let b = SourceSpec::balanced();
        assert!((success_probability_analytic(&Protocol::EntangleTwo { s1: b, s2: b }).unwrap() - 0.5).abs() < 1e-15);
        let pair = bell_state(BellKind::PsiMinus, "2", "3").unwrap();
        let p = success_probability_analytic(&Protocol::GhzThree { s1: SourceSpec::real(0.6, 0.8).unwrap(), pair }).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        let p = success_probability_analytic(&Protocol::Chain { specs: vec![b; 4] }).unwrap();
        assert!((p - 0.125).abs() < 1e-15);

        let product = PureState::single_photon("2", &b).unwrap().tensor(&PureState::single_photon("3", &b).unwrap()).unwrap();
        let err = success_probability_analytic(&Protocol::GhzThree { s1: b, pair: product });
        assert!(matches!(err, Err(Error::UnsupportedProtocol(_))));
    }

    #[test]
    fn monte_carlo_examples() {
        let b = SourceSpec::balanced();
        let p = Protocol::EntangleTwo { s1: b, s2: b };
        let est = monte_carlo(&p, 100_000, 7).unwrap();
        assert!((est.estimate - 0.5).abs() <= 4.0 * est.std_error);
        assert_eq!(est, monte_carlo(&p, 100_000, 7).unwrap());

        let sure = Protocol::EntangleTwo { s1: SourceSpec::horizontal(), s2: SourceSpec::horizontal() };
        let est = monte_carlo(&sure, 1000, 1).unwrap();
        assert_eq!(est.successes, 1000);
        assert!(monte_carlo(&p, 0, 1).is_err());

        let never = Protocol::EntangleTwo { s1: SourceSpec::horizontal(), s2: SourceSpec::vertical() };
        assert_eq!(monte_carlo(&never, 100, 1).unwrap().successes, 0);
    }
}
