//! Syntax tree, numeric literals and the canonical printer.

use std::fmt::{self, Write as _};

use num_complex::Complex64;

use crate::fock::Occupation;
use crate::protocols::BellKind;
use crate::qndm::{Basis, MultiPhotonModel};

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

/// A real literal. `sqrt(x)` keeps exact square roots such as `1/sqrt 2` writable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Real {
    Dec(f64),
    Sqrt(f64),
    NegSqrt(f64),
}

impl Real {
    pub fn value(self) -> f64 {
        match self {
            Real::Dec(x) => x,
            Real::Sqrt(x) => x.sqrt(),
            Real::NegSqrt(x) => -x.sqrt(),
        }
    }

    fn is_negative(self) -> bool {
        match self {
            Real::Dec(x) => x.is_sign_negative(),
            Real::Sqrt(_) => false,
            Real::NegSqrt(_) => true,
        }
    }

    fn abs(self) -> Real {
        match self {
            Real::Dec(x) => Real::Dec(x.abs()),
            Real::Sqrt(x) | Real::NegSqrt(x) => Real::Sqrt(x),
        }
    }

    fn negate(self) -> Real {
        match self {
            Real::Dec(x) => Real::Dec(-x),
            Real::Sqrt(x) => Real::NegSqrt(x),
            Real::NegSqrt(x) => Real::Sqrt(x),
        }
    }
}

/// Six decimals when that is exact, otherwise the shortest string that parses back to `x`.
struct Num(f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let six = format!("{:.6}", self.0);
        if six.parse::<f64>() == Ok(self.0) {
            f.write_str(&six)
        } else {
            write!(f, "{:?}", self.0)
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Dec(x) => write!(f, "{}", Num(*x)),
            Real::Sqrt(x) => write!(f, "sqrt({})", Num(*x)),
            Real::NegSqrt(x) => write!(f, "-sqrt({})", Num(*x)),
        }
    }
}

/// Complex literal: `re`, `imi`, `re+imi`, `re-imi` or polar `mag@phase`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComplexLit {
    Real(Real),
    Imag(Real),
    Cartesian(Real, Real),
    Polar(Real, Real),
}

impl ComplexLit {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexLit::Real(r) => Complex64::new(r.value(), 0.0),
            ComplexLit::Imag(i) => Complex64::new(0.0, i.value()),
            ComplexLit::Cartesian(r, i) => Complex64::new(r.value(), i.value()),
            ComplexLit::Polar(m, p) => Complex64::from_polar(m.value(), p.value()),
        }
    }

    pub fn is_finite(self) -> bool {
        let v = self.value();
        v.re.is_finite() && v.im.is_finite()
    }

    /// Parses a whole token as a complex literal.
    pub fn parse(token: &str) -> Option<ComplexLit> {
        match token {
            "i" => return Some(ComplexLit::Imag(Real::Dec(1.0))),
            "-i" => return Some(ComplexLit::Imag(Real::Dec(-1.0))),
            _ => {}
        }
        let (re, rest) = real_prefix(token)?;
        if rest.is_empty() {
            return Some(ComplexLit::Real(re));
        }
        if rest == "i" {
            return Some(ComplexLit::Imag(re));
        }
        if let Some(phase) = rest.strip_prefix('@') {
            return Some(ComplexLit::Polar(re, parse_real(phase)?));
        }
        let (neg, tail) = match rest.as_bytes()[0] {
            b'+' => (false, &rest[1..]),
            b'-' => (true, &rest[1..]),
            _ => return None,
        };
        let (im, tail) = unsigned_real_prefix(tail)?;
        if tail != "i" {
            return None;
        }
        Some(ComplexLit::Cartesian(re, if neg { im.negate() } else { im }))
    }
}

impl fmt::Display for ComplexLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexLit::Real(r) => write!(f, "{r}"),
            ComplexLit::Imag(i) => write!(f, "{i}i"),
            ComplexLit::Cartesian(r, i) => {
                let sign = if i.is_negative() { '-' } else { '+' };
                write!(f, "{r}{sign}{}i", i.abs())
            }
            ComplexLit::Polar(m, p) => write!(f, "{m}@{p}"),
        }
    }
}

/// Parses a whole token as a real literal.
pub fn parse_real(token: &str) -> Option<Real> {
    match real_prefix(token)? {
        (r, "") => Some(r),
        _ => None,
    }
}

fn real_prefix(s: &str) -> Option<(Real, &str)> {
    match s.strip_prefix('-') {
        Some(rest) => unsigned_real_prefix(rest).map(|(r, t)| (r.negate(), t)),
        None => unsigned_real_prefix(s),
    }
}

fn unsigned_real_prefix(s: &str) -> Option<(Real, &str)> {
    if let Some(rest) = s.strip_prefix("sqrt(") {
        let close = rest.find(')')?;
        let (arg, tail) = decimal_prefix(&rest[..close])?;
        if !tail.is_empty() || arg < 0.0 {
            return None;
        }
        return Some((Real::Sqrt(arg), &rest[close + 1..]));
    }
    decimal_prefix(s).map(|(x, t)| (Real::Dec(x), t))
}

/// Unsigned decimal with optional fraction and exponent.
fn decimal_prefix(s: &str) -> Option<(f64, &str)> {
    let b = s.as_bytes();
    let mut i = 0;
    let digits = |i: &mut usize| {
        let start = *i;
        while *i < b.len() && b[*i].is_ascii_digit() {
            *i += 1;
        }
        *i - start
    };
    let int = digits(&mut i);
    let mut frac = 0;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        frac = digits(&mut i);
    }
    if int + frac == 0 {
        return None;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        let mut k = j;
        if digits(&mut k) > 0 {
            i = k;
        }
    }
    let x: f64 = s[..i].parse().ok()?;
    Some((x, &s[i..]))
}

/// Amplitudes of a `source` directive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceAmps {
    Pure { alpha: ComplexLit, beta: ComplexLit },
    Mixed { f: Real },
}

/// Built-in target names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedTarget {
    Bell(BellKind),
    Ghz(usize),
}

impl fmt::Display for NamedTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedTarget::Bell(k) => write!(f, "{k}"),
            NamedTarget::Ghz(n) => write!(f, "ghz{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KetTerm {
    pub amplitude: ComplexLit,
    pub occupations: Vec<(String, Occupation)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    Named(NamedTarget),
    Kets(Vec<KetTerm>),
}

/// One line of a circuit script, without position information.
#[derive(Debug, Clone, PartialEq)]
pub enum Directive {
    Mode { labels: Vec<String> },
    Source { mode: String, amps: SourceAmps },
    Bell { kind: BellKind, mode_a: String, mode_b: String },
    Pbs { in_a: String, in_b: String, out_a: String, out_b: String, reflect_phase: Option<ComplexLit> },
    Qndm { mode: String, model: Option<MultiPhotonModel>, c_g: Option<ComplexLit>, c_d: Option<ComplexLit> },
    Measure { mode: String, basis: Basis },
    Target(TargetSpec),
}

impl Directive {
    pub fn keyword(&self) -> &'static str {
        match self {
            Directive::Mode { .. } => "mode",
            Directive::Source { .. } => "source",
            Directive::Bell { .. } => "bell",
            Directive::Pbs { .. } => "pbs",
            Directive::Qndm { .. } => "qndm",
            Directive::Measure { .. } => "measure",
            Directive::Target(_) => "target",
        }
    }
}

/// A directive with the position of its keyword and of each argument token.
#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub pos: Position,
    pub directive: Directive,
    pub args: Vec<Position>,
}

impl Statement {
    /// Position of argument `i`, falling back to the keyword.
    pub fn arg_pos(&self, i: usize) -> Position {
        self.args.get(i).copied().unwrap_or(self.pos)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CircuitAst {
    pub statements: Vec<Statement>,
}

impl CircuitAst {
    /// The directive sequence, ignoring positions; two scripts with equal
    /// structure describe the same circuit.
    pub fn structure(&self) -> Vec<&Directive> {
        self.statements.iter().map(|s| &s.directive).collect()
    }
}

pub fn model_name(m: MultiPhotonModel) -> &'static str {
    match m {
        MultiPhotonModel::IdealNoShift => "ideal",
        MultiPhotonModel::SqrtRabi => "sqrt_rabi",
    }
}

pub fn basis_name(b: Basis) -> &'static str {
    match b {
        Basis::Hv => "hv",
        Basis::PlusMinus => "pm",
    }
}

/// Canonical text: one directive per line, single spaces, six-decimal numbers, LF endings.
pub fn pretty_print(ast: &CircuitAst) -> String {
    let mut out = String::new();
    for st in &ast.statements {
        out.push_str(&print_directive(&st.directive));
        out.push('\n');
    }
    out
}

fn print_directive(d: &Directive) -> String {
    let mut s = String::from(d.keyword());
    match d {
        Directive::Mode { labels } => {
            for l in labels {
                write!(s, " {l}").unwrap();
            }
        }
        Directive::Source { mode, amps } => match amps {
            SourceAmps::Pure { alpha, beta } => write!(s, " {mode} {alpha} {beta}").unwrap(),
            SourceAmps::Mixed { f } => write!(s, " {mode} mixed {f}").unwrap(),
        },
        Directive::Bell { kind, mode_a, mode_b } => write!(s, " {kind} {mode_a} {mode_b}").unwrap(),
        Directive::Pbs { in_a, in_b, out_a, out_b, reflect_phase } => {
            write!(s, " {in_a} {in_b} -> {out_a} {out_b}").unwrap();
            if let Some(p) = reflect_phase {
                write!(s, " phase={p}").unwrap();
            }
        }
        Directive::Qndm { mode, model, c_g, c_d } => {
            write!(s, " {mode}").unwrap();
            if let Some(m) = model {
                write!(s, " model={}", model_name(*m)).unwrap();
            }
            if let Some(c) = c_g {
                write!(s, " cg={c}").unwrap();
            }
            if let Some(c) = c_d {
                write!(s, " cd={c}").unwrap();
            }
        }
        Directive::Measure { mode, basis } => write!(s, " {mode} {}", basis_name(*basis)).unwrap(),
        Directive::Target(TargetSpec::Named(n)) => write!(s, " {n}").unwrap(),
        Directive::Target(TargetSpec::Kets(terms)) => {
            s.push_str(" ket");
            for t in terms {
                let occ: Vec<String> = t.occupations.iter().map(|(m, o)| format!("{m}={o}")).collect();
                write!(s, " {} {}", t.amplitude, occ.join(",")).unwrap();
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literal_forms() {
        let v = |t: &str| ComplexLit::parse(t).unwrap().value();
        assert_eq!(v("0.6"), Complex64::new(0.6, 0.0));
        assert_eq!(v("0.8i"), Complex64::new(0.0, 0.8));
        assert_eq!(v("0.6-0.8i"), Complex64::new(0.6, -0.8));
        assert_eq!(v("-1e-3+2i"), Complex64::new(-1e-3, 2.0));
        assert_eq!(v("i"), Complex64::new(0.0, 1.0));
        assert!((v("sqrt(0.5)") - Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);
        assert!((v("1@3.141592653589793") - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((v("0-sqrt(0.5)i").im + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-16);
        for bad in ["", "abc", "1..2", "0.6+", "0.6+0.8", "sqrt(-1)", "1@", "+1", "0.6*2"] {
            assert!(ComplexLit::parse(bad).is_none(), "{bad}");
        }
    }

    #[test]
    fn literal_printing_is_canonical() {
        let p = |t: &str| ComplexLit::parse(t).unwrap().to_string();
        assert_eq!(p("0.7071"), "0.707100");
        assert_eq!(p("0.7071067811"), "0.7071067811");
        assert_eq!(p("1e-9"), "1e-9");
        assert_eq!(p("0.6-0.8i"), "0.600000-0.800000i");
        assert_eq!(p("-sqrt(0.5)"), "-sqrt(0.500000)");
        assert_eq!(p("1-sqrt(0.5)i"), "1.000000-sqrt(0.500000)i");
        assert_eq!(p("i"), "1.000000i");
        for t in ["0.600000-0.800000i", "1.000000-sqrt(0.500000)i", "2.000000@-1.500000", "-0.000000"] {
            let once = ComplexLit::parse(t).unwrap();
            assert_eq!(ComplexLit::parse(&once.to_string()).unwrap(), once, "{t}");
        }
    }
}
