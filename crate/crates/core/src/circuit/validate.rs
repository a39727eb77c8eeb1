//! Semantic checks and compilation of a syntax tree into an executable pipeline.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use super::ast::{CircuitAst, ComplexLit, Directive, NamedTarget, Position, SourceAmps, Statement, TargetSpec};
use super::Diagnostic;
use crate::elements::PbsSpec;
use crate::fock::{ModeLabel, OccupationKet, PureState, SourceSpec};
use crate::protocols::{bell_state, ghz_state, BellKind};
use crate::qndm::{Basis, MeterSpec, MultiPhotonModel};
use crate::tol::{DEFAULT_N_MAX, SCRIPT_NORM_TOL};

/// Statically known photon number of a mode, as an inclusive range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PhotonRange {
    pub min: u32,
    pub max: u32,
}

impl PhotonRange {
    pub const fn exact(n: u32) -> Self {
        PhotonRange { min: n, max: n }
    }

    pub fn is_exact(self, n: u32) -> bool {
        self.min == n && self.max == n
    }
}

impl fmt::Display for PhotonRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.min == self.max {
            write!(f, "{}", self.min)
        } else {
            write!(f, "{}..{}", self.min, self.max)
        }
    }
}

/// One tensor factor of the initial state.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    Vacuum { mode: ModeLabel },
    Pure { mode: ModeLabel, spec: SourceSpec },
    Mixed { mode: ModeLabel, f: f64 },
    Bell { kind: BellKind, a: ModeLabel, b: ModeLabel },
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepKind {
    /// Tensors new factors onto the state; `fills` are vacuum modes replaced by a source.
    Prepare { factors: Vec<Factor>, fills: Vec<ModeLabel> },
    Pbs(PbsSpec),
    /// Ideal single-photon projector; the success branch is kept.
    Herald { mode: ModeLabel },
    /// Atom-cavity meter; the `minus` branch is kept.
    Meter { mode: ModeLabel, meter: MeterSpec },
    Measure { mode: ModeLabel, basis: Basis },
}

impl StepKind {
    pub fn name(&self) -> &'static str {
        match self {
            StepKind::Prepare { .. } => "prepare",
            StepKind::Pbs(_) => "pbs",
            StepKind::Herald { .. } | StepKind::Meter { .. } => "qndm",
            StepKind::Measure { .. } => "measure",
        }
    }
}

/// A compiled step with its source lines and the photon budget after it.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub kind: StepKind,
    pub lines: Vec<usize>,
    pub budget: BTreeMap<ModeLabel, PhotonRange>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledTarget {
    pub name: String,
    pub state: PureState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledPipeline {
    pub steps: Vec<Step>,
    pub target: Option<CompiledTarget>,
    /// Modes alive at the end, canonical order.
    pub final_modes: Vec<ModeLabel>,
    /// Whether any source is mixed, forcing density-matrix execution.
    pub mixed: bool,
    /// Per-polarization occupation cap large enough for every reachable ket.
    pub n_max: u32,
}

impl CompiledPipeline {
    pub fn step_names(&self) -> Vec<&'static str> {
        self.steps.iter().map(|s| s.kind.name()).collect()
    }
}

fn fmt_num(x: f64) -> String {
    let r = (x * 1e6).round() / 1e6;
    format!("{}", if r == 0.0 { 0.0 } else { r })
}

#[derive(Default)]
struct Validator {
    live: BTreeMap<String, PhotonRange>,
    fillable: BTreeSet<String>,
    measured: BTreeMap<String, usize>,
    /// PBS output pairs whose joint photon number is known.
    pairs: BTreeMap<String, (String, PhotonRange)>,
    errors: Vec<Diagnostic>,
    steps: Vec<Step>,
    pending: Option<(Vec<Factor>, Vec<ModeLabel>, Vec<usize>)>,
    prepared_photons: u32,
    mixed: bool,
    target: Option<CompiledTarget>,
}

impl Validator {
    fn err(&mut self, pos: Position, message: String) {
        self.errors.push(Diagnostic::new(pos, message));
    }

    fn budget(&self) -> BTreeMap<ModeLabel, PhotonRange> {
        self.live.iter().map(|(m, r)| (ModeLabel::new(m.as_str()), *r)).collect()
    }

    fn push(&mut self, kind: StepKind, line: usize) {
        self.flush();
        let budget = self.budget();
        self.steps.push(Step { kind, lines: vec![line], budget });
    }

    fn flush(&mut self) {
        if let Some((factors, fills, lines)) = self.pending.take() {
            let budget = self.budget();
            self.steps.push(Step { kind: StepKind::Prepare { factors, fills }, lines, budget });
        }
    }

    fn add_factor(&mut self, factor: Factor, line: usize) {
        let (factors, _, lines) = self.pending.get_or_insert_with(|| (Vec::new(), Vec::new(), Vec::new()));
        factors.push(factor);
        if lines.last() != Some(&line) {
            lines.push(line);
        }
    }

    fn break_pair(&mut self, mode: &str) {
        if let Some((partner, _)) = self.pairs.remove(mode) {
            self.pairs.remove(&partner);
        }
    }

    /// An existing mode consumed by an operation.
    fn use_mode(&mut self, label: &str, pos: Position, kw: &str) -> bool {
        if self.live.contains_key(label) {
            self.fillable.remove(label);
            true
        } else if let Some(line) = self.measured.get(label).copied() {
            self.err(pos, format!("mode '{label}' used after destructive measurement at line {line}"));
            false
        } else {
            self.err(pos, format!("undeclared mode '{label}' in {kw}"));
            false
        }
    }

    /// A mode introduced by `mode`, `source` or `bell`.
    fn new_mode(&mut self, label: &str, pos: Position, photons: u32, may_fill: bool) -> bool {
        if let Some(line) = self.measured.get(label).copied() {
            self.err(pos, format!("mode '{label}' used after destructive measurement at line {line}"));
            return false;
        }
        if self.live.contains_key(label) {
            if !(may_fill && self.fillable.remove(label)) {
                self.err(pos, format!("mode '{label}' already declared"));
                return false;
            }
            let mode = ModeLabel::new(label);
            let (factors, fills, _) = self.pending.get_or_insert_with(Default::default);
            let before = factors.len();
            factors.retain(|f| !matches!(f, Factor::Vacuum { mode: m } if *m == mode));
            if factors.len() == before {
                fills.push(mode);
            }
        }
        self.live.insert(label.to_owned(), PhotonRange::exact(photons));
        self.prepared_photons += photons;
        true
    }

    fn complex_unit(&mut self, lit: ComplexLit, pos: Position, what: &str) -> Option<Complex64> {
        let v = lit.value();
        let n = v.norm_sqr();
        if (n - 1.0).abs() > SCRIPT_NORM_TOL {
            self.err(pos, format!("{what} must be unimodular: |{what}|² = {}", fmt_num(n)));
            return None;
        }
        Some(v / v.norm())
    }

    fn statement(&mut self, st: &Statement, is_last: bool) {
        let line = st.pos.line;
        match &st.directive {
            Directive::Mode { labels } => {
                for (i, l) in labels.iter().enumerate() {
                    if self.new_mode(l, st.arg_pos(i), 0, false) {
                        self.fillable.insert(l.clone());
                        self.add_factor(Factor::Vacuum { mode: ModeLabel::new(l.as_str()) }, line);
                    }
                }
            }
            Directive::Source { mode, amps } => match amps {
                SourceAmps::Pure { alpha, beta } => {
                    let (a, b) = (alpha.value(), beta.value());
                    let n = a.norm_sqr() + b.norm_sqr();
                    if (n - 1.0).abs() > SCRIPT_NORM_TOL {
                        self.err(st.arg_pos(1), format!("unnormalized source: |α|²+|β|² = {}", fmt_num(n)));
                        self.new_mode(mode, st.arg_pos(0), 1, true);
                        return;
                    }
                    let spec = SourceSpec::normalized(a, b).expect("norm is close to one");
                    if self.new_mode(mode, st.arg_pos(0), 1, true) {
                        self.add_factor(Factor::Pure { mode: ModeLabel::new(mode.as_str()), spec }, line);
                    }
                }
                SourceAmps::Mixed { f } => {
                    let f = f.value();
                    if !(0.0..=1.0).contains(&f) {
                        self.err(st.arg_pos(2), format!("mixed source weight {} outside [0, 1]", fmt_num(f)));
                        self.new_mode(mode, st.arg_pos(0), 1, true);
                        return;
                    }
                    if self.new_mode(mode, st.arg_pos(0), 1, true) {
                        self.mixed = true;
                        self.add_factor(Factor::Mixed { mode: ModeLabel::new(mode.as_str()), f }, line);
                    }
                }
            },
            Directive::Bell { kind, mode_a, mode_b } => {
                if mode_a == mode_b {
                    self.err(st.arg_pos(2), format!("bell pair needs two distinct modes, got '{mode_a}' twice"));
                    return;
                }
                let ok_a = self.new_mode(mode_a, st.arg_pos(1), 1, true);
                let ok_b = self.new_mode(mode_b, st.arg_pos(2), 1, true);
                if ok_a && ok_b {
                    let (a, b) = (ModeLabel::new(mode_a.as_str()), ModeLabel::new(mode_b.as_str()));
                    self.add_factor(Factor::Bell { kind: *kind, a, b }, line);
                }
            }
            Directive::Pbs { in_a, in_b, out_a, out_b, reflect_phase } => self.pbs(st, in_a, in_b, out_a, out_b, *reflect_phase),
            Directive::Qndm { mode, model, c_g, c_d } => self.qndm(st, mode, *model, *c_g, *c_d),
            Directive::Measure { mode, basis } => {
                if !self.use_mode(mode, st.arg_pos(0), "measure") {
                    return;
                }
                let r = self.live[mode.as_str()];
                if !r.is_exact(1) {
                    self.err(st.arg_pos(0), format!("measure needs exactly one photon in mode '{mode}', static count is {r}"));
                    return;
                }
                self.break_pair(mode);
                self.live.remove(mode.as_str());
                self.measured.insert(mode.clone(), line);
                self.push(StepKind::Measure { mode: ModeLabel::new(mode.as_str()), basis: *basis }, line);
            }
            Directive::Target(spec) => {
                if !is_last {
                    self.err(st.pos, "target must be the last directive".into());
                    return;
                }
                self.flush();
                self.compile_target(st, spec);
            }
        }
    }

    fn pbs(&mut self, st: &Statement, in_a: &str, in_b: &str, out_a: &str, out_b: &str, phase: Option<ComplexLit>) {
        let line = st.pos.line;
        let mut ok = true;
        if in_a == in_b {
            self.err(st.arg_pos(1), format!("pbs inputs must differ, got '{in_a}' twice"));
            return;
        }
        if out_a == out_b {
            self.err(st.arg_pos(4), format!("double use of output label '{out_b}'"));
            ok = false;
        }
        ok &= self.use_mode(in_a, st.arg_pos(0), "pbs");
        ok &= self.use_mode(in_b, st.arg_pos(1), "pbs");
        for (i, out) in [(3, out_a), (4, out_b)] {
            if out == in_a || out == in_b {
                continue;
            }
            if self.live.contains_key(out) {
                self.err(st.arg_pos(i), format!("double use of output label '{out}'"));
                ok = false;
            } else if let Some(l) = self.measured.get(out).copied() {
                self.err(st.arg_pos(i), format!("mode '{out}' used after destructive measurement at line {l}"));
                ok = false;
            }
        }
        let phase = match phase {
            Some(p) => self.complex_unit(p, st.arg_pos(5), "phase"),
            None => Some(Complex64::new(1.0, 0.0)),
        };
        if !ok {
            return;
        }
        let Some(phase) = phase else { return };
        let spec = PbsSpec::new(in_a, in_b, out_a, out_b)
            .and_then(|s| s.with_reflect_phase(phase))
            .expect("labels and phase checked above");
        let (ra, rb) = (self.live[in_a], self.live[in_b]);
        self.break_pair(in_a);
        self.break_pair(in_b);
        self.live.remove(in_a);
        self.live.remove(in_b);
        let total = PhotonRange { min: ra.min + rb.min, max: ra.max + rb.max };
        let spread = PhotonRange { min: 0, max: total.max };
        self.live.insert(out_a.to_owned(), spread);
        self.live.insert(out_b.to_owned(), spread);
        self.pairs.insert(out_a.to_owned(), (out_b.to_owned(), total));
        self.pairs.insert(out_b.to_owned(), (out_a.to_owned(), total));
        self.push(StepKind::Pbs(spec), line);
    }

    fn qndm(
        &mut self,
        st: &Statement,
        mode: &str,
        model: Option<MultiPhotonModel>,
        c_g: Option<ComplexLit>,
        c_d: Option<ComplexLit>,
    ) {
        let line = st.pos.line;
        let label = ModeLabel::new(mode);
        let kind = if model.is_none() && c_g.is_none() && c_d.is_none() {
            Some(StepKind::Herald { mode: label })
        } else {
            let model = model.unwrap_or_default();
            let amps = match (c_g, c_d) {
                (None, None) => Some(MeterSpec::balanced()).map(|m| (m.c_g, m.c_d)),
                (Some(g), Some(d)) => {
                    let (g, d) = (g.value(), d.value());
                    let n = g.norm_sqr() + d.norm_sqr();
                    if (n - 1.0).abs() > SCRIPT_NORM_TOL {
                        self.err(st.pos, format!("unnormalized meter: |cg|²+|cd|² = {}", fmt_num(n)));
                        None
                    } else {
                        Some((g / n.sqrt(), d / n.sqrt()))
                    }
                }
                _ => {
                    self.err(st.pos, "qndm needs both cg and cd, or neither".into());
                    None
                }
            };
            amps.map(|(g, d)| StepKind::Meter {
                mode: label,
                meter: MeterSpec::new(g, d, model).expect("meter amplitudes normalized above"),
            })
        };
        if !self.use_mode(mode, st.arg_pos(0), "qndm") {
            return;
        }
        let Some(kind) = kind else { return };
        let exact = match &kind {
            StepKind::Herald { .. } => true,
            StepKind::Meter { meter, .. } => meter.is_exact_projector(),
            _ => unreachable!(),
        };
        if exact {
            if let Some((partner, total)) = self.pairs.get(mode).cloned() {
                let rest = PhotonRange { min: total.min.max(1) - 1, max: total.max.max(1) - 1 };
                self.live.insert(partner.clone(), rest);
                self.pairs.remove(mode);
                self.pairs.remove(&partner);
            }
            self.live.insert(mode.to_owned(), PhotonRange::exact(1));
        }
        self.push(kind, line);
    }

    fn compile_target(&mut self, st: &Statement, spec: &TargetSpec) {
        let modes: Vec<ModeLabel> = self.live.keys().map(|m| ModeLabel::new(m.as_str())).collect();
        let n_max = self.n_max();
        let need = |n: usize, name: &str, this: &mut Validator| {
            if modes.len() != n {
                this.err(st.arg_pos(0), format!("target {name} needs {n} live modes, found {}", modes.len()));
                false
            } else {
                true
            }
        };
        let state = match spec {
            TargetSpec::Named(NamedTarget::Bell(kind)) => {
                if !need(2, &kind.to_string(), self) {
                    return;
                }
                bell_state(*kind, modes[0].clone(), modes[1].clone())
            }
            TargetSpec::Named(NamedTarget::Ghz(n)) => {
                if !need(*n, &format!("ghz{n}"), self) {
                    return;
                }
                ghz_state(&modes, 0.0)
            }
            TargetSpec::Kets(terms) => {
                let mut kets = Vec::new();
                let mut ok = true;
                for (i, t) in terms.iter().enumerate() {
                    let pos = st.arg_pos(2 + 2 * i);
                    let mut ket = OccupationKet::vacuum(&modes);
                    let mut seen = BTreeSet::new();
                    for (m, o) in &t.occupations {
                        let label = ModeLabel::new(m.as_str());
                        if !seen.insert(m.as_str()) {
                            self.err(pos, format!("target ket repeats mode '{m}'"));
                            ok = false;
                        } else if !modes.contains(&label) {
                            self.err(pos, format!("target ket names mode '{m}', which is not live"));
                            ok = false;
                        } else if o.h > n_max || o.v > n_max {
                            self.err(pos, format!("target ket occupation '{o}' exceeds the photon budget"));
                            ok = false;
                        } else {
                            ket.set(label, *o);
                        }
                    }
                    kets.push((ket, t.amplitude.value()));
                }
                if !ok {
                    return;
                }
                match PureState::from_terms_with_cap(modes.clone(), kets, n_max).and_then(|s| s.normalize()) {
                    Ok((s, _)) => Ok(s),
                    Err(_) => {
                        self.err(st.arg_pos(0), "target ket has zero norm".into());
                        return;
                    }
                }
            }
        };
        let state = state.and_then(|s| s.with_n_max(n_max)).expect("target built on live modes");
        let name = match spec {
            TargetSpec::Named(n) => n.to_string(),
            TargetSpec::Kets(_) => "ket".to_owned(),
        };
        self.target = Some(CompiledTarget { name, state });
    }

    fn n_max(&self) -> u32 {
        DEFAULT_N_MAX.max(self.prepared_photons)
    }
}

/// Checks a parsed script and compiles it. Every semantic error is reported.
pub fn validate(ast: &CircuitAst) -> Result<CompiledPipeline, Vec<Diagnostic>> {
    let mut v = Validator::default();
    if ast.statements.is_empty() {
        v.err(Position { line: 1, column: 1 }, "empty circuit".into());
    }
    let last = ast.statements.len().saturating_sub(1);
    let mut target_seen = false;
    for (i, st) in ast.statements.iter().enumerate() {
        if matches!(st.directive, Directive::Target(_)) {
            if target_seen {
                v.err(st.pos, "duplicate target".into());
                continue;
            }
            target_seen = true;
        }
        v.statement(st, i == last);
    }
    v.flush();
    if !v.errors.is_empty() {
        return Err(v.errors);
    }
    let n_max = v.n_max();
    Ok(CompiledPipeline {
        final_modes: v.live.keys().map(|m| ModeLabel::new(m.as_str())).collect(),
        steps: v.steps,
        target: v.target,
        mixed: v.mixed,
        n_max,
    })
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn check(text: &str) -> Result<CompiledPipeline, Vec<String>> {
        validate(&parse(text).unwrap()).map_err(|e| e.iter().map(|d| d.to_string()).collect())
    }

    #[test]
    fn entangler_compiles_to_three_steps() {
        let p = check("source 1 sqrt(0.5) sqrt(0.5)\nsource 2 sqrt(0.5) sqrt(0.5)\npbs 1 2 -> 1' 2'\nqndm 1'\ntarget phi+\n").unwrap();
        assert_eq!(p.step_names(), ["prepare", "pbs", "qndm"]);
        assert_eq!(p.steps[0].lines, [1, 2]);
        assert_eq!(p.steps[2].budget[&ModeLabel::new("2'")], PhotonRange::exact(1));
        assert_eq!(p.target.unwrap().name, "phi+");
        assert!(!p.mixed);
    }

    #[test]
    fn undeclared_mode_is_named_with_position() {
        let e = check("source 1 1 0\npbs 1 7 -> a b\n").unwrap_err();
        assert_eq!(e, ["undeclared mode '7' in pbs at line 2, column 7"]);
    }

    #[test]
    fn unnormalized_source_message() {
        let e = check("source 1 1 1\n").unwrap_err();
        assert_eq!(e, ["unnormalized source: |α|²+|β|² = 2 at line 1, column 10"]);
    }

    #[test]
    fn source_normalization_tolerance() {
        assert!(check("source 1 sqrt(0.5) sqrt(0.5)\n").is_ok());
        assert!(check("source 1 0.6 0.8i\n").is_ok());
        assert!(check("source 1 0.7071067812 0.7071067812\n").is_ok());
        let e = check("source 1 0.707107 0.707107\n").unwrap_err();
        assert_eq!(e, ["unnormalized source: |α|²+|β|² = 1.000001 at line 1, column 10"]);
    }

    #[test]
    fn use_after_measure() {
        let text = "source 1 1 0\nsource 2 0 1\nsource 3 1 0\npbs 1 2 -> a b\nqndm a\nmeasure b pm\nqndm b\npbs a 3 -> b c\n";
        let e = check(text).unwrap_err();
        assert_eq!(
            e,
            [
                "mode 'b' used after destructive measurement at line 6 at line 7, column 6",
                "mode 'b' used after destructive measurement at line 6 at line 8, column 12",
            ]
        );
    }

    #[test]
    fn pbs_output_collisions() {
        let e = check("source 1 1 0\nsource 2 1 0\nsource 3 1 0\npbs 1 2 -> 3 x\npbs 1 1 -> a b\n").unwrap_err();
        assert_eq!(e.len(), 2);
        assert!(e[0].starts_with("double use of output label '3'"));
        assert!(e[1].starts_with("pbs inputs must differ"));
    }

    #[test]
    fn measure_needs_a_heralded_photon() {
        let e = check("source 1 1 0\nsource 2 1 0\npbs 1 2 -> a b\nmeasure b hv\n").unwrap_err();
        assert_eq!(e, ["measure needs exactly one photon in mode 'b', static count is 0..2 at line 4, column 9"]);
        assert!(check("source 1 1 0\nsource 2 1 0\npbs 1 2 -> a b\nqndm a\nmeasure b hv\n").is_ok());
    }

    #[test]
    fn mode_declarations_can_be_filled() {
        let p = check("mode a b\nsource a 1 0\nbell phi+ x y\npbs a b -> c d\nsource c 0 1\n").unwrap_err();
        assert_eq!(p, ["mode 'c' already declared at line 5, column 8"]);
        let p = check("mode a b\nsource a 1 0\npbs a b -> c d\n").unwrap();
        match &p.steps[0].kind {
            StepKind::Prepare { factors, fills } => {
                assert_eq!(factors.len(), 2);
                assert!(fills.is_empty());
            }
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn target_checks() {
        let e = check("source 1 1 0\ntarget phi+\n").unwrap_err();
        assert_eq!(e, ["target phi+ needs 2 live modes, found 1 at line 2, column 8"]);
        let e = check("source 1 1 0\ntarget ket 1 1=H\nqndm 1\n").unwrap_err();
        assert_eq!(e, ["target must be the last directive at line 2, column 1"]);
        let p = check("source 1 1 0\nsource 2 0 1\ntarget ket 3 1=H,2=V\n").unwrap();
        let t = p.target.unwrap();
        assert!((t.state.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn meter_options() {
        assert!(check("source 1 1 0\nqndm 1 cg=0.6\n").is_err());
        let p = check("source 1 1 0\nqndm 1 model=sqrt_rabi cg=0.6 cd=0.8\n").unwrap();
        assert!(matches!(p.steps[1].kind, StepKind::Meter { .. }));
        let e = check("source 1 1 0\nqndm 1 cg=1 cd=1\n").unwrap_err();
        assert!(e[0].starts_with("unnormalized meter: |cg|²+|cd|² = 2"));
    }

    #[test]
    fn mixed_sources_select_density_mode() {
        let p = check("source 1 mixed 0.6\nsource 2 mixed 0.6\n").unwrap();
        assert!(p.mixed);
        assert!(check("source 1 mixed 1.5\n").is_err());
    }
}
