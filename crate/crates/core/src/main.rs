use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use heraldlab::circuit::{self, CircuitError, ComplexLit, RunOptions, RunReport};
use heraldlab::fock::{ModeLabel, SourceSpec, StateTerm};
use heraldlab::protocols::{
    bell_state, chain_n, entangle_two, ghz_state, monte_carlo, success_probability_analytic, AuditStep, BellKind,
    Protocol, RateEstimate,
};
use heraldlab::purification::{iterate, Regime, Trajectory};
use heraldlab::report::Report;
use heraldlab::tol::SCRIPT_NORM_TOL;

const TOP_AMPLITUDES: usize = 8;

#[derive(Parser)]
#[command(name = "heraldlab", version, about = "Heralded polarization-entanglement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, validate and run a circuit script.
    Simulate {
        file: PathBuf,
        /// Monte Carlo shots on top of the exact branch calculation.
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, env = "HERALDLAB_SEED", default_value_t = 0)]
        seed: u64,
        /// Write the full JSON report to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run a built-in protocol with identical sources.
    Protocol {
        #[arg(value_enum)]
        name: ProtocolName,
        /// Number of photons (ghz: 2..=10, default 3; bell: 2).
        #[arg(long)]
        n: Option<usize>,
        /// H amplitude of every source, e.g. `0.6`, `sqrt(0.5)`, `0.6+0.1i`, `1@0.3`.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        /// V amplitude of every source; derived from `--alpha` when omitted.
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, env = "HERALDLAB_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Iterate single-photon purification from `f|H><H| + (1-f)|V><V|`.
    Purify {
        #[arg(long, allow_hyphen_values = true)]
        f: f64,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ProtocolName {
    Bell,
    Ghz,
}

/// Failure with its exit status: 1 runtime or I/O, 2 usage, parse or semantic.
struct Failure {
    code: u8,
    lines: Vec<String>,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: 2, lines: vec![msg.into()] }
    }

    fn runtime(msg: impl Into<String>) -> Self {
        Failure { code: 1, lines: vec![msg.into()] }
    }
}

impl From<heraldlab::Error> for Failure {
    fn from(e: heraldlab::Error) -> Self {
        Failure::runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { file, shots, seed, json } => simulate(&file, shots, seed, json.as_deref()),
        Command::Protocol { name, n, alpha, beta, shots, seed, json } => {
            protocol(name, n, alpha.as_deref(), beta.as_deref(), shots, seed, json.as_deref())
        }
        Command::Purify { f, rounds, json } => purify(f, rounds, json.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(fail) => {
            for l in &fail.lines {
                eprintln!("error: {l}");
            }
            ExitCode::from(fail.code)
        }
    }
}

fn write_report<T: Serialize>(path: Option<&Path>, command: Value, result: T, started: Instant) -> Result<(), Failure> {
    let Some(path) = path else { return Ok(()) };
    let report = Report::new(command, result, started.elapsed().as_secs_f64() * 1e3);
    let text = report.to_json() + "\n";
    fs::write(path, text).map_err(|e| Failure::runtime(format!("cannot write '{}': {e}", path.display())))
}

fn ket_text(ket: &std::collections::BTreeMap<String, String>) -> String {
    ket.iter().map(|(m, o)| format!("|{o}>_{m}")).collect()
}

fn print_amplitudes(terms: &[StateTerm], indent: &str) {
    let mut order: Vec<&StateTerm> = terms.iter().collect();
    order.sort_by(|a, b| (b.re.hypot(b.im)).total_cmp(&a.re.hypot(a.im)));
    let shown = order.len().min(TOP_AMPLITUDES);
    println!("{indent}state (top {shown} of {} amplitudes):", order.len());
    for t in &order[..shown] {
        println!("{indent}  {:+.6}{:+.6}i  {}", t.re, t.im, ket_text(&t.ket));
    }
}

fn simulate(file: &Path, shots: Option<u64>, seed: u64, json: Option<&Path>) -> Result<(), Failure> {
    let started = Instant::now();
    if shots == Some(0) {
        return Err(Failure::usage("--shots must be at least 1"));
    }
    let text = fs::read_to_string(file).map_err(|e| Failure::runtime(format!("cannot read '{}': {e}", file.display())))?;
    let report = match circuit::simulate(&text, &RunOptions { shots, seed }) {
        Ok(r) => r,
        Err(CircuitError::Runtime(e)) => return Err(Failure::runtime(format!("{}: {e}", file.display()))),
        Err(e) => {
            let lines = e
                .diagnostics()
                .iter()
                .map(|d| format!("{}:{}:{}: {}", file.display(), d.line, d.column, d.message))
                .collect();
            return Err(Failure { code: 2, lines });
        }
    };
    print_run(&report);
    let command = json!({"name": "simulate", "file": file.display().to_string(), "shots": shots, "seed": seed});
    write_report(json, command, &report, started)
}

fn print_run(r: &RunReport) {
    let steps: Vec<String> = r.steps.iter().map(|s| format!("{} {:.6}", s.kind, s.probability)).collect();
    println!("steps: {}", steps.join(", "));
    println!("success probability: {:.6}", r.success_probability);
    if let (Some(t), Some(f)) = (&r.target, r.fidelity) {
        println!("fidelity vs {t}: {f:.6}");
    }
    for b in &r.branches {
        let outcomes: Vec<String> =
            b.outcomes.iter().map(|o| serde_json::to_value(o).unwrap().as_str().unwrap().to_owned()).collect();
        if r.branches.len() > 1 || !outcomes.is_empty() {
            println!("branch [{}] probability {:.6}", outcomes.join(","), b.probability);
        }
        if let Some(terms) = &b.state {
            print_amplitudes(terms, "  ");
        } else if let Some(entries) = &b.density {
            let mut diag: Vec<_> = entries.iter().filter(|e| e.row == e.col).collect();
            diag.sort_by(|a, b| b.re.total_cmp(&a.re));
            let shown = diag.len().min(TOP_AMPLITUDES);
            println!("  populations (top {shown} of {}):", diag.len());
            for e in &diag[..shown] {
                println!("    {:.6}  {}", e.re, ket_text(&e.row));
            }
        }
    }
    if let Some(mc) = &r.monte_carlo {
        println!(
            "monte carlo: {} / {} shots, estimate {:.6} +- {:.6} (seed {})",
            mc.rate.successes, mc.rate.shots, mc.rate.estimate, mc.rate.std_error, mc.seed
        );
    }
}

fn parse_amp(flag: &str, text: &str) -> Result<Complex64, Failure> {
    ComplexLit::parse(text)
        .filter(|c| c.is_finite())
        .map(|c| c.value())
        .ok_or_else(|| Failure::usage(format!("--{flag}: malformed number '{text}'")))
}

fn source_spec(alpha: Option<&str>, beta: Option<&str>) -> Result<SourceSpec, Failure> {
    let complement = |flag: &str, x: Complex64| {
        let rest = 1.0 - x.norm_sqr();
        if rest < -SCRIPT_NORM_TOL {
            Err(Failure::usage(format!("--{flag}: |{flag}|² = {} exceeds 1", x.norm_sqr())))
        } else {
            Ok(Complex64::new(rest.max(0.0).sqrt(), 0.0))
        }
    };
    let (a, b) = match (alpha, beta) {
        (None, None) => return Ok(SourceSpec::balanced()),
        (Some(a), None) => {
            let a = parse_amp("alpha", a)?;
            (a, complement("alpha", a)?)
        }
        (None, Some(b)) => {
            let b = parse_amp("beta", b)?;
            (complement("beta", b)?, b)
        }
        (Some(a), Some(b)) => (parse_amp("alpha", a)?, parse_amp("beta", b)?),
    };
    let n = a.norm_sqr() + b.norm_sqr();
    if (n - 1.0).abs() > SCRIPT_NORM_TOL {
        return Err(Failure::usage(format!("unnormalized source: |α|²+|β|² = {n}")));
    }
    SourceSpec::normalized(a, b).map_err(|e| Failure::usage(e.to_string()))
}

#[derive(Serialize)]
struct ProtocolPayload {
    protocol: ProtocolName,
    n: usize,
    source: SourceSpec,
    state: Vec<StateTerm>,
    success_probability: f64,
    analytic_probability: f64,
    target: String,
    fidelity: f64,
    relative_phase: Option<f64>,
    pbs_count: usize,
    herald_count: usize,
    steps: Vec<AuditStep>,
    monte_carlo: Option<MonteCarlo>,
}

#[derive(Serialize)]
struct MonteCarlo {
    seed: u64,
    #[serde(flatten)]
    rate: RateEstimate,
}

fn protocol(
    name: ProtocolName,
    n: Option<usize>,
    alpha: Option<&str>,
    beta: Option<&str>,
    shots: Option<u64>,
    seed: u64,
    json: Option<&Path>,
) -> Result<(), Failure> {
    let started = Instant::now();
    let n = match (name, n) {
        (ProtocolName::Bell, None | Some(2)) => 2,
        (ProtocolName::Bell, Some(k)) => return Err(Failure::usage(format!("--n: bell uses 2 photons, got {k}"))),
        (ProtocolName::Ghz, None) => 3,
        (ProtocolName::Ghz, Some(k)) if (2..=10).contains(&k) => k,
        (ProtocolName::Ghz, Some(k)) => return Err(Failure::usage(format!("--n: ghz needs 2 <= n <= 10, got {k}"))),
    };
    if shots == Some(0) {
        return Err(Failure::usage("--shots must be at least 1"));
    }
    let spec = source_spec(alpha, beta)?;
    let specs = vec![spec; n];
    let (result, proto, target_name, target) = match name {
        ProtocolName::Bell => {
            let r = entangle_two(&spec, &spec)?;
            (r, Protocol::EntangleTwo { s1: spec, s2: spec }, "phi+".to_owned(), bell_state(BellKind::PhiPlus, "1'", "2'")?)
        }
        ProtocolName::Ghz => {
            let r = chain_n(&specs)?;
            let modes: Vec<ModeLabel> = r.heralded_state.modes().to_vec();
            (r, Protocol::Chain { specs }, format!("ghz{n}"), ghz_state(&modes, 0.0)?)
        }
    };
    let fidelity = result.heralded_state.overlap_sqr(&target)?;
    let analytic = success_probability_analytic(&proto)?;
    let mc = match shots {
        Some(s) => Some(MonteCarlo { seed, rate: monte_carlo(&proto, s, seed)? }),
        None => None,
    };
    let payload = ProtocolPayload {
        protocol: name,
        n,
        source: spec,
        state: result.heralded_state.to_terms(),
        success_probability: result.success_probability,
        analytic_probability: analytic,
        fidelity,
        relative_phase: result.relative_phase,
        pbs_count: result.pbs_count(),
        herald_count: result.herald_count(),
        steps: result.steps.clone(),
        target: target_name,
        monte_carlo: mc,
    };
    println!("protocol {}, n = {n}", serde_json::to_value(name).unwrap().as_str().unwrap());
    println!("success probability: {:.6} (analytic {:.6})", payload.success_probability, analytic);
    println!("fidelity vs {}: {:.6}", payload.target, fidelity);
    println!("resources: {} sources, {} pbs, {} heralds", n, payload.pbs_count, payload.herald_count);
    print_amplitudes(&payload.state, "");
    if let Some(mc) = &payload.monte_carlo {
        println!(
            "monte carlo: {} / {} shots, estimate {:.6} +- {:.6} (seed {})",
            mc.rate.successes, mc.rate.shots, mc.rate.estimate, mc.rate.std_error, mc.seed
        );
    }
    let command = json!({
        "name": "protocol", "protocol": name, "n": n, "alpha": alpha, "beta": beta, "shots": shots, "seed": seed,
    });
    write_report(json, command, &payload, started)
}

fn purify(f: f64, rounds: usize, json: Option<&Path>) -> Result<(), Failure> {
    let started = Instant::now();
    if !(0.0..=1.0).contains(&f) {
        return Err(Failure::usage(format!("--f: fraction {f} outside [0, 1]")));
    }
    let t: Trajectory = iterate(f, rounds)?;
    if t.regime == Regime::NonPurifying {
        eprintln!("warning: non-purifying regime: f = {f} <= 1/2 does not move toward |H>");
    }
    println!("{:>5}  {:>10}  {:>21}  {:>16}", "round", "f", "selection_probability", "cumulative_yield");
    for r in &t.rows {
        let p = r.selection_probability.map(|p| format!("{p:.6}")).unwrap_or_else(|| "-".into());
        println!("{:>5}  {:>10.6}  {:>21}  {:>16.6}", r.round, r.f, p, r.cumulative_yield);
    }
    let command = json!({"name": "purify", "f": f, "rounds": rounds});
    write_report(json, command, &t, started)
}
