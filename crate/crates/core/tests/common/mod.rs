#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use heraldlab::circuit::{self, parse, pretty_print, CircuitError, RunOptions};
use heraldlab::fock::{ModeLabel, Occupation, OccupationKet, PureState, SourceSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

/// Float tolerance for golden report comparison.
pub const GOLDEN_TOL: f64 = 1e-12;

/// Options every valid corpus script is run with.
pub const CORPUS_OPTIONS: RunOptions = RunOptions { shots: Some(1000), seed: 7 };

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("corpus")
}

pub fn corpus_scripts() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "hl"))
        .collect();
    v.sort();
    v
}

fn blessing() -> bool {
    std::env::var("HERALDLAB_BLESS").is_ok_and(|v| v == "1")
}

/// Walks two JSON values in lockstep; numbers compare within `tol`, everything
/// else exactly. Returns the first mismatch as a JSON-pointer-like path.
pub fn json_diff(expected: &Value, actual: &Value, tol: f64, path: &str) -> Option<String> {
    match (expected, actual) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            ((a - b).abs() > tol).then(|| format!("{path}: expected {a}, got {b}"))
        }
        (Value::Array(a), Value::Array(b)) => {
            if a.len() != b.len() {
                return Some(format!("{path}: expected {} items, got {}", a.len(), b.len()));
            }
            a.iter().zip(b).enumerate().find_map(|(i, (x, y))| json_diff(x, y, tol, &format!("{path}/{i}")))
        }
        (Value::Object(a), Value::Object(b)) => {
            let ka: Vec<_> = a.keys().collect();
            let kb: Vec<_> = b.keys().collect();
            if ka != kb {
                return Some(format!("{path}: expected keys {ka:?}, got {kb:?}"));
            }
            a.iter().find_map(|(k, x)| json_diff(x, &b[k], tol, &format!("{path}/{k}")))
        }
        _ => (expected != actual).then(|| format!("{path}: expected {expected}, got {actual}")),
    }
}

/// Outcome of checking one corpus file against its golden.
pub struct CorpusCheck {
    pub name: String,
    pub valid: bool,
    pub problem: Option<String>,
}

fn render_errors(err: &CircuitError) -> String {
    err.diagnostics().iter().map(|d| format!("{}:{}: {}\n", d.line, d.column, d.message)).collect()
}

/// Runs one script and compares it with `<name>.expected.json` (valid scripts)
/// or `<name>.errors` (rejected scripts). With `HERALDLAB_BLESS=1` the goldens
/// are rewritten instead.
pub fn check_script(path: &Path) -> CorpusCheck {
    let name = path.file_stem().unwrap().to_string_lossy().into_owned();
    let text = fs::read_to_string(path).expect("read script");
    let json_path = path.with_extension("expected.json");
    let err_path = path.with_extension("errors");
    match circuit::simulate(&text, &CORPUS_OPTIONS) {
        Ok(report) => {
            let actual = serde_json::to_value(&report).unwrap();
            if blessing() {
                fs::write(&json_path, serde_json::to_string_pretty(&actual).unwrap() + "\n").unwrap();
            }
            let problem = match fs::read_to_string(&json_path) {
                Err(_) if err_path.exists() => Some("expected errors, script was accepted".to_string()),
                Err(e) => Some(format!("missing golden: {e}")),
                Ok(g) => {
                    let expected: Value = serde_json::from_str(&g).expect("golden json");
                    json_diff(&expected, &actual, GOLDEN_TOL, "")
                }
            }
            .or_else(|| round_trip_problem(&text));
            CorpusCheck { name, valid: true, problem }
        }
        Err(err) => {
            let actual = render_errors(&err);
            if blessing() {
                fs::write(&err_path, &actual).unwrap();
            }
            let problem = match fs::read_to_string(&err_path) {
                Err(_) => Some(format!("unexpected rejection:\n{actual}")),
                Ok(expected) if expected == actual => None,
                Ok(expected) => Some(format!("expected:\n{expected}got:\n{actual}")),
            };
            CorpusCheck { name, valid: false, problem }
        }
    }
}

/// Parse, print, parse again: the directive structure must survive.
pub fn round_trip_problem(text: &str) -> Option<String> {
    let ast = match parse(text) {
        Ok(a) => a,
        Err(e) => return Some(format!("parse failed: {e:?}")),
    };
    let printed = pretty_print(&ast);
    match parse(&printed) {
        Ok(again) if again.structure() == ast.structure() => None,
        Ok(_) => Some(format!("round trip changed structure:\n{printed}")),
        Err(e) => Some(format!("printed script does not parse: {e:?}\n{printed}")),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_source(rng: &mut impl Rng) -> SourceSpec {
    loop {
        let (a, b) = (random_complex(rng), random_complex(rng));
        if a.norm_sqr() + b.norm_sqr() > 1e-3 {
            return SourceSpec::normalized(a, b).unwrap();
        }
    }
}

pub fn random_occupation(rng: &mut impl Rng, max_total: u32) -> Occupation {
    let total = rng.random_range(0..=max_total);
    let h = rng.random_range(0..=total);
    Occupation::new(h, total - h)
}

/// Normalized random state over `modes` with up to `terms` kets, each mode
/// holding 0 to 2 photons, so number-changing components are present.
pub fn random_state(rng: &mut impl Rng, modes: &[&str], terms: usize) -> PureState {
    loop {
        let labels: Vec<ModeLabel> = modes.iter().map(|&m| m.into()).collect();
        let kets: Vec<(OccupationKet, Complex64)> = (0..terms)
            .map(|_| {
                let ket = OccupationKet::from_pairs(labels.iter().map(|m| (m.clone(), random_occupation(rng, 2))));
                (ket, random_complex(rng))
            })
            .collect();
        let s = PureState::from_terms_with_cap(labels.clone(), kets, 4).unwrap();
        if let Ok((n, _)) = s.normalize() {
            return n;
        }
    }
}

pub fn ket(pairs: &[(&str, Occupation)]) -> OccupationKet {
    OccupationKet::from_pairs(pairs.iter().map(|(m, o)| (*m, *o)))
}
