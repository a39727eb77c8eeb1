//! Circuit scripts: one directive per line, `#` comments.
//!
//! ```text
//! source 1 sqrt(0.5) sqrt(0.5)
//! source 2 sqrt(0.5) sqrt(0.5)
//! pbs 1 2 -> 1' 2'
//! qndm 1'
//! target phi+
//! ```
//!
//! Directives:
//!
//! - `mode L...` declares vacuum modes; a later `source` or `bell` may fill an untouched one.
//! - `source L A B` emits `A|H> + B|V>`; `source L mixed F` emits `F|H><H| + (1-F)|V><V|`.
//! - `bell KIND L1 L2` with `KIND` one of `phi+`, `phi-`, `psi+`, `psi-`.
//! - `pbs IN_A IN_B -> OUT_A OUT_B [phase=R]`: `H` crosses, `V` is reflected with phase `R`.
//! - `qndm L [model=ideal|sqrt_rabi] [cg=C cd=C]`: bare form is the ideal one-photon herald;
//!   with options the atom-cavity meter is simulated and its `minus` outcome kept.
//! - `measure L hv|pm` destroys the photon in `L`; every outcome is kept as a branch.
//! - `target NAME` (`phi+`, ..., `ghzN`) or `target ket AMP L=OCC,... ...`; must come last.
//!
//! Numbers: decimals with optional exponent, `sqrt(x)`, `re+imi`, `imi`, `mag@phase`.

mod ast;
mod parser;
mod run;
mod validate;

use std::fmt;

pub use ast::{
    basis_name, model_name, parse_real, pretty_print, CircuitAst, ComplexLit, Directive, KetTerm, NamedTarget,
    Position, Real, SourceAmps, Statement, TargetSpec,
};
pub use parser::parse;
pub use run::{run, BranchReport, MonteCarloReport, RunOptions, RunReport, StepReport};
pub use validate::{validate, CompiledPipeline, CompiledTarget, Factor, PhotonRange, Step, StepKind};

/// A positioned parse or semantic error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn new(pos: Position, message: impl Into<String>) -> Self {
        Diagnostic { line: pos.line, column: pos.column, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at line {}, column {}", self.message, self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("{} parse error(s)", .0.len())]
    Parse(Vec<Diagnostic>),
    #[error("{} semantic error(s)", .0.len())]
    Semantic(Vec<Diagnostic>),
    #[error("runtime failure: {0}")]
    Runtime(#[from] crate::Error),
}

impl CircuitError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            CircuitError::Parse(d) | CircuitError::Semantic(d) => d,
            CircuitError::Runtime(_) => &[],
        }
    }
}

/// Parses and validates.
pub fn compile(text: &str) -> Result<CompiledPipeline, CircuitError> {
    let ast = parse(text).map_err(CircuitError::Parse)?;
    validate(&ast).map_err(CircuitError::Semantic)
}

/// Parses, validates and runs.
pub fn simulate(text: &str, options: &RunOptions) -> Result<RunReport, CircuitError> {
    Ok(run(&compile(text)?, options)?)
}
