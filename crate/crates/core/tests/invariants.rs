mod common;

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use heraldlab::circuit::{self, parse, pretty_print, RunOptions};
use heraldlab::elements::{pbs_apply, PbsSpec};
use heraldlab::fock::{dephased_photon, SourceSpec};
use heraldlab::protocols::entangle_two;
use heraldlab::purification::{f_update, purify_round};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::strategy::ValueTree;

use common::{random_state, rng};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 500, ..ProptestConfig::default() }
}

#[derive(Debug, Clone)]
enum Op {
    Pbs { pick_a: usize, pick_b: usize, phase: Option<f64>, meter: Option<f64> },
    Measure { pick: usize, pm: bool },
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (any::<usize>(), any::<usize>(), proptest::option::of(0.0..TAU), proptest::option::of(0.0..1.57f64))
            .prop_map(|(pick_a, pick_b, phase, meter)| Op::Pbs { pick_a, pick_b, phase, meter }),
        1 => (any::<usize>(), any::<bool>()).prop_map(|(pick, pm)| Op::Measure { pick, pm }),
    ]
}

/// Builds a script from source angles and operations, tracking exact photon
/// counts so that every emitted directive is statically valid.
fn build_script(angles: &[(f64, f64)], ops: &[Op]) -> String {
    let mut text = String::from("# generated\n");
    let mut live: Vec<(String, Option<u32>)> = Vec::new();
    for (i, (theta, phi)) in angles.iter().enumerate() {
        let label = format!("s{i}");
        writeln!(text, "source {label} {:?} {:?}@{:?}", theta.cos(), theta.sin(), phi).unwrap();
        live.push((label, Some(1)));
    }
    let mut fresh = 0;
    for op in ops {
        match *op {
            Op::Pbs { pick_a, pick_b, phase, meter } if live.len() >= 2 => {
                let ia = pick_a % live.len();
                let (a, na) = live.remove(ia);
                let (b, nb) = live.remove(pick_b % live.len());
                let (oa, ob) = (format!("m{fresh}"), format!("m{}", fresh + 1));
                fresh += 2;
                match phase {
                    Some(p) => writeln!(text, "pbs {a} {b} -> {oa} {ob} phase=1@{p:?}").unwrap(),
                    None => writeln!(text, "pbs {a} {b} -> {oa} {ob}").unwrap(),
                }
                let total = na.zip(nb).map(|(x, y)| x + y);
                match meter {
                    None => {
                        writeln!(text, "qndm {oa}").unwrap();
                        live.push((oa, Some(1)));
                        live.push((ob, total.map(|t| t - 1)));
                    }
                    Some(t) => {
                        writeln!(text, "qndm {oa} model=sqrt_rabi cg={:?} cd={:?}", t.cos(), t.sin()).unwrap();
                        live.push((oa, None));
                        live.push((ob, None));
                    }
                }
            }
            Op::Measure { pick, pm } => {
                let exact: Vec<usize> = (0..live.len()).filter(|&i| live[i].1 == Some(1)).collect();
                if exact.is_empty() || live.len() < 2 {
                    continue;
                }
                let (m, _) = live.remove(exact[pick % exact.len()]);
                writeln!(text, "measure {m} {}", if pm { "pm" } else { "hv" }).unwrap();
            }
            _ => {}
        }
    }
    text
}

fn script() -> impl Strategy<Value = String> {
    (
        prop::collection::vec((0.0..1.57f64, 0.0..TAU), 2..5),
        prop::collection::vec(op(), 0..5),
    )
        .prop_map(|(angles, ops)| build_script(&angles, &ops))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn pbs_preserves_inner_products(seed in any::<u64>(), phase in 0.0..TAU) {
        let mut r = rng(seed);
        let x = random_state(&mut r, &["a", "b", "c"], 4);
        let y = random_state(&mut r, &["a", "b", "c"], 4);
        let spec = PbsSpec::new("b", "a", "p", "q").unwrap().with_reflect_phase(Complex64::from_polar(1.0, phase)).unwrap();
        let (px, py) = (pbs_apply(&x, &spec).unwrap(), pbs_apply(&y, &spec).unwrap());
        prop_assert!((px.inner(&py).unwrap() - x.inner(&y).unwrap()).norm() <= 1e-12);
        prop_assert_eq!(px.photon_numbers(), x.photon_numbers());
    }

    #[test]
    fn entangler_probability_matches_amplitudes(t1 in 0.0..1.57f64, t2 in 0.0..1.57f64, phi in 0.0..TAU) {
        let s1 = SourceSpec::new(Complex64::new(t1.cos(), 0.0), Complex64::from_polar(t1.sin(), phi)).unwrap();
        let s2 = SourceSpec::real(t2.cos(), t2.sin()).unwrap();
        let expected = (t1.cos() * t2.cos()).powi(2) + (t1.sin() * t2.sin()).powi(2);
        prop_assume!(expected > 1e-9);
        let r = entangle_two(&s1, &s2).unwrap();
        prop_assert!((r.success_probability - expected).abs() <= 1e-12);
        prop_assert!((r.heralded_state.norm_sqr() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn recurrence_is_bounded_symmetric_and_attracting(f in 0.0..=1.0f64) {
        let g = f_update(f).unwrap();
        prop_assert!((0.0..=1.0).contains(&g));
        prop_assert!((f_update(1.0 - f).unwrap() - (1.0 - g)).abs() <= 1e-12);
        if f > 0.5 {
            prop_assert!(g >= f);
        } else {
            prop_assert!(g <= f);
        }
    }

    #[test]
    fn purification_channel_follows_recurrence(f in 0.0..=1.0f64) {
        let round = purify_round(&dephased_photon("x", f).unwrap()).unwrap();
        prop_assert!((round.output_f - f_update(f).unwrap()).abs() <= 1e-12);
        prop_assert!((round.post_selection_probability - (f * f + (1.0 - f) * (1.0 - f))).abs() <= 1e-12);
        round.output.validate().unwrap();
    }

    #[test]
    fn accepted_scripts_run_cleanly(text in script(), seed in any::<u64>()) {
        let pipeline = circuit::compile(&text);
        prop_assert!(pipeline.is_ok(), "rejected:\n{}\n{:?}", text, pipeline.err());
        let options = RunOptions { shots: Some(200), seed };
        let report = circuit::simulate(&text, &options).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&report.success_probability));
        let total: f64 = report.branches.iter().map(|b| b.probability).sum();
        prop_assert!((total - report.success_probability).abs() <= 1e-12);
        for s in &report.steps {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&s.probability));
        }
        let again = circuit::simulate(&text, &options).unwrap();
        prop_assert_eq!(serde_json::to_string(&report).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn printed_scripts_parse_to_the_same_structure(text in script()) {
        let ast = parse(&text).unwrap();
        let printed = pretty_print(&ast);
        let again = parse(&printed).unwrap();
        prop_assert_eq!(ast.structure(), again.structure());
        prop_assert_eq!(pretty_print(&again), printed);
    }
}

#[test]
fn generated_scripts_cover_every_directive() {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..200 {
        let text = script().new_tree(&mut runner).unwrap().current();
        for kw in ["source", "pbs", "qndm", "measure", "phase=", "model="] {
            if text.contains(kw) {
                *seen.entry(kw).or_default() += 1;
            }
        }
    }
    assert_eq!(seen.len(), 6, "{seen:?}");
}
