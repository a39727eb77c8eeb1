//! Line-oriented lexer and parser. Errors are collected for the whole file.

use super::ast::{
    parse_real, CircuitAst, ComplexLit, Directive, KetTerm, NamedTarget, Position, SourceAmps, Statement,
    TargetSpec,
};
use super::Diagnostic;
use crate::fock::Occupation;
use crate::protocols::BellKind;
use crate::qndm::{Basis, MultiPhotonModel};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token<'a> {
    pub text: &'a str,
    pub pos: Position,
}

/// Splits one line into whitespace-separated tokens, dropping any `#` comment.
pub(crate) fn tokenize(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let code = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in code.char_indices().chain(std::iter::once((code.len(), ' '))) {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                let column = code[..s].chars().count() + 1;
                out.push(Token { text: &code[s..i], pos: Position { line: line_no, column } });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    out
}

fn is_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

struct LineParser<'a> {
    keyword: Token<'a>,
    args: Vec<Token<'a>>,
    errors: Vec<Diagnostic>,
}

impl<'a> LineParser<'a> {
    fn err(&mut self, pos: Position, message: String) {
        self.errors.push(Diagnostic::new(pos, message));
    }

    fn arity(&mut self, min: usize, max: Option<usize>) -> bool {
        let n = self.args.len();
        let kw = self.keyword.text;
        if n < min {
            let expect = match max {
                Some(m) if m == min => format!("{min}"),
                _ => format!("at least {min}"),
            };
            let pos = self.keyword.pos;
            self.err(pos, format!("'{kw}' expects {expect} arguments, found {n}"));
            return false;
        }
        if let Some(m) = max {
            if n > m {
                let pos = self.args[m].pos;
                self.err(pos, format!("'{kw}' expects at most {m} arguments, found {n}"));
                return false;
            }
        }
        true
    }

    fn label(&mut self, i: usize) -> Option<String> {
        let t = self.args[i].clone();
        if is_label(t.text) {
            Some(t.text.to_owned())
        } else {
            self.err(t.pos, format!("invalid mode label '{}'", t.text));
            None
        }
    }

    fn complex(&mut self, text: &str, pos: Position) -> Option<ComplexLit> {
        match ComplexLit::parse(text) {
            Some(c) if c.is_finite() => Some(c),
            Some(_) => {
                self.err(pos, format!("non-finite number '{text}'"));
                None
            }
            None => {
                self.err(pos, format!("malformed number '{text}'"));
                None
            }
        }
    }

    fn complex_arg(&mut self, i: usize) -> Option<ComplexLit> {
        let t = self.args[i].clone();
        self.complex(t.text, t.pos)
    }

    fn real_arg(&mut self, i: usize) -> Option<super::ast::Real> {
        let t = self.args[i].clone();
        match parse_real(t.text) {
            Some(r) if r.value().is_finite() => Some(r),
            _ => {
                self.err(t.pos, format!("malformed number '{}'", t.text));
                None
            }
        }
    }

    fn parse(&mut self) -> Option<Directive> {
        match self.keyword.text {
            "mode" => {
                if !self.arity(1, None) {
                    return None;
                }
                let labels: Vec<Option<String>> = (0..self.args.len()).map(|i| self.label(i)).collect();
                labels.into_iter().collect::<Option<Vec<_>>>().map(|labels| Directive::Mode { labels })
            }
            "source" => {
                if !self.arity(3, Some(3)) {
                    return None;
                }
                let mode = self.label(0);
                let amps = if self.args[1].text == "mixed" {
                    self.real_arg(2).map(|f| SourceAmps::Mixed { f })
                } else {
                    let alpha = self.complex_arg(1);
                    let beta = self.complex_arg(2);
                    alpha.zip(beta).map(|(alpha, beta)| SourceAmps::Pure { alpha, beta })
                };
                Some(Directive::Source { mode: mode?, amps: amps? })
            }
            "bell" => {
                if !self.arity(3, Some(3)) {
                    return None;
                }
                let kind = match self.args[0].text.parse::<BellKind>() {
                    Ok(k) => Some(k),
                    Err(_) => {
                        let t = self.args[0].clone();
                        self.err(t.pos, format!("unknown Bell state '{}' (expected phi+, phi-, psi+ or psi-)", t.text));
                        None
                    }
                };
                let a = self.label(1);
                let b = self.label(2);
                Some(Directive::Bell { kind: kind?, mode_a: a?, mode_b: b? })
            }
            "pbs" => {
                if !self.arity(5, Some(6)) {
                    return None;
                }
                if self.args[2].text != "->" {
                    let t = self.args[2].clone();
                    self.err(t.pos, format!("expected '->', found '{}'", t.text));
                }
                let in_a = self.label(0);
                let in_b = self.label(1);
                let out_a = self.label(3);
                let out_b = self.label(4);
                let mut reflect_phase = None;
                if self.args.len() == 6 {
                    let t = self.args[5].clone();
                    match t.text.strip_prefix("phase=") {
                        Some(v) => {
                            let col = Position { line: t.pos.line, column: t.pos.column + 6 };
                            reflect_phase = Some(self.complex(v, col)?);
                        }
                        None => {
                            self.err(t.pos, format!("unknown pbs option '{}'", t.text));
                            return None;
                        }
                    }
                }
                if self.args[2].text != "->" {
                    return None;
                }
                Some(Directive::Pbs { in_a: in_a?, in_b: in_b?, out_a: out_a?, out_b: out_b?, reflect_phase })
            }
            "qndm" => {
                if !self.arity(1, Some(4)) {
                    return None;
                }
                let mode = self.label(0);
                let (mut model, mut c_g, mut c_d) = (None, None, None);
                let mut ok = true;
                for i in 1..self.args.len() {
                    let t = self.args[i].clone();
                    let (key, val) = t.text.split_once('=').unwrap_or((t.text, ""));
                    let vpos = Position { line: t.pos.line, column: t.pos.column + key.chars().count() + 1 };
                    match key {
                        "model" => match val {
                            "ideal" => model = Some(MultiPhotonModel::IdealNoShift),
                            "sqrt_rabi" => model = Some(MultiPhotonModel::SqrtRabi),
                            _ => {
                                self.err(vpos, format!("unknown qndm model '{val}' (expected ideal or sqrt_rabi)"));
                                ok = false;
                            }
                        },
                        "cg" => {
                            c_g = self.complex(val, vpos);
                            ok &= c_g.is_some();
                        }
                        "cd" => {
                            c_d = self.complex(val, vpos);
                            ok &= c_d.is_some();
                        }
                        _ => {
                            self.err(t.pos, format!("unknown qndm option '{}'", t.text));
                            ok = false;
                        }
                    }
                }
                if !ok {
                    return None;
                }
                Some(Directive::Qndm { mode: mode?, model, c_g, c_d })
            }
            "measure" => {
                if !self.arity(2, Some(2)) {
                    return None;
                }
                let mode = self.label(0);
                let basis = match self.args[1].text {
                    "hv" => Some(Basis::Hv),
                    "pm" => Some(Basis::PlusMinus),
                    other => {
                        let pos = self.args[1].pos;
                        self.err(pos, format!("unknown basis '{other}' (expected hv or pm)"));
                        None
                    }
                };
                Some(Directive::Measure { mode: mode?, basis: basis? })
            }
            "target" => {
                if !self.arity(1, None) {
                    return None;
                }
                let t = self.args[0].clone();
                if t.text == "ket" {
                    return self.parse_ket_target();
                }
                if !self.arity(1, Some(1)) {
                    return None;
                }
                let named = match t.text.parse::<BellKind>() {
                    Ok(k) => Some(NamedTarget::Bell(k)),
                    Err(_) => t
                        .text
                        .strip_prefix("ghz")
                        .and_then(|n| n.parse::<usize>().ok())
                        .filter(|&n| n >= 2)
                        .map(NamedTarget::Ghz),
                };
                match named {
                    Some(n) => Some(Directive::Target(TargetSpec::Named(n))),
                    None => {
                        self.err(t.pos, format!("unknown target '{}'", t.text));
                        None
                    }
                }
            }
            other => {
                let pos = self.keyword.pos;
                self.err(pos, format!("unknown directive '{other}'"));
                None
            }
        }
    }

    fn parse_ket_target(&mut self) -> Option<Directive> {
        let rest = self.args.len() - 1;
        if rest == 0 || !rest.is_multiple_of(2) {
            let pos = self.keyword.pos;
            self.err(pos, "'target ket' expects amplitude/ket pairs".into());
            return None;
        }
        let mut terms = Vec::new();
        let mut ok = true;
        for i in (1..self.args.len()).step_by(2) {
            let amp = self.complex_arg(i);
            let t = self.args[i + 1].clone();
            let mut occupations = Vec::new();
            for part in t.text.split(',') {
                match part.split_once('=') {
                    Some((m, o)) if is_label(m) && Occupation::parse(o).is_some() => {
                        occupations.push((m.to_owned(), Occupation::parse(o).unwrap()));
                    }
                    _ => {
                        self.err(t.pos, format!("malformed ket '{}' (expected mode=OCC,...)", t.text));
                        ok = false;
                        break;
                    }
                }
            }
            match amp {
                Some(amplitude) => terms.push(KetTerm { amplitude, occupations }),
                None => ok = false,
            }
        }
        ok.then_some(Directive::Target(TargetSpec::Kets(terms)))
    }
}

/// Parses a whole script; returns every syntax error found.
pub fn parse(text: &str) -> Result<CircuitAst, Vec<Diagnostic>> {
    let mut statements = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let mut tokens = tokenize(line, i + 1);
        if tokens.is_empty() {
            continue;
        }
        let keyword = tokens.remove(0);
        let mut p = LineParser { keyword: keyword.clone(), args: tokens, errors: Vec::new() };
        let directive = p.parse();
        errors.append(&mut p.errors);
        if let Some(directive) = directive {
            statements.push(Statement { pos: keyword.pos, directive, args: p.args.iter().map(|t| t.pos).collect() });
        }
    }
    if errors.is_empty() {
        Ok(CircuitAst { statements })
    } else {
        Err(errors)
    }
}
