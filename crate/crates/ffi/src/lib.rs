//! C ABI over `heraldlab`.
//!
//! States and density matrices are opaque heap handles released with
//! `hl_state_free` / `hl_density_free`. Every fallible call returns an
//! [`HlStatus`]; on failure `hl_last_error_message` describes the cause for
//! the calling thread. Strings returned through out-parameters are owned by
//! the caller and released with `hl_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use heraldlab::circuit::{self, CircuitError, RunOptions};
use heraldlab::elements::{pbs_apply, PbsSpec};
use heraldlab::fock::{dephased_photon, DensityMatrix, ModeLabel, PureState, SourceSpec};
use heraldlab::protocols::{chain_n, entangle_two};
use heraldlab::purification::{iterate, purify_round};
use heraldlab::qndm::qndm_herald;
use heraldlab::report::Report;
use heraldlab::Error;
use num_complex::Complex64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    NotNormalized = 4,
    UnknownMode = 5,
    ModeCollision = 6,
    ZeroNorm = 7,
    ParseError = 8,
    SemanticError = 9,
    Runtime = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HlComplex {
    pub re: f64,
    pub im: f64,
}

impl From<HlComplex> for Complex64 {
    fn from(c: HlComplex) -> Self {
        Complex64::new(c.re, c.im)
    }
}

/// Opaque pure state.
pub struct HlState(PureState);

/// Opaque density matrix.
pub struct HlDensity(DensityMatrix);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(HlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::NotNormalized { .. } => HlStatus::NotNormalized,
            Error::UnknownMode(_) | Error::ModeMismatch { .. } => HlStatus::UnknownMode,
            Error::ModeCollision(_) => HlStatus::ModeCollision,
            Error::ZeroNorm => HlStatus::ZeroNorm,
            Error::InvalidArgument(_) | Error::InvalidWeights(_) | Error::InvalidDensityMatrix(_) => {
                HlStatus::InvalidArgument
            }
            _ => HlStatus::Runtime,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(HlStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HlStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HlStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(HlStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn label(p: *const c_char, what: &str) -> Result<ModeLabel, Fail> {
    text(p, what).map(ModeLabel::new)
}

unsafe fn state<'a>(p: *const HlState, what: &str) -> Result<&'a PureState, Fail> {
    p.as_ref().map(|s| &s.0).ok_or_else(|| null(what))
}

unsafe fn density<'a>(p: *const HlDensity, what: &str) -> Result<&'a DensityMatrix, Fail> {
    p.as_ref().map(|s| &s.0).ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed_state(s: PureState) -> *mut HlState {
    Box::into_raw(Box::new(HlState(s)))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON output has no NUL bytes").into_raw()
}

fn spec(alpha: HlComplex, beta: HlComplex) -> Result<SourceSpec, Fail> {
    Ok(SourceSpec::new(alpha.into(), beta.into())?)
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `alpha|H> + beta|V>` in `mode`.
///
/// # Safety
/// `mode` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_state_single_photon(
    mode: *const c_char,
    alpha: HlComplex,
    beta: HlComplex,
    out: *mut *mut HlState,
) -> HlStatus {
    guard(|| {
        let s = PureState::single_photon(label(mode, "mode")?, &spec(alpha, beta)?)?;
        put(out, boxed_state(s), "out")
    })
}

/// # Safety
/// `a`, `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_state_tensor(a: *const HlState, b: *const HlState, out: *mut *mut HlState) -> HlStatus {
    guard(|| {
        let s = state(a, "a")?.tensor(state(b, "b")?)?;
        put(out, boxed_state(s), "out")
    })
}

/// Polarizing beam splitter with reflection phase +1: `H` of `in_a` goes to `out_b`,
/// `H` of `in_b` to `out_a`, `V` stays on its side.
///
/// # Safety
/// `s` must be a live handle, labels NUL-terminated strings, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hl_state_pbs(
    s: *const HlState,
    in_a: *const c_char,
    in_b: *const c_char,
    out_a: *const c_char,
    out_b: *const c_char,
    out: *mut *mut HlState,
) -> HlStatus {
    guard(|| {
        let spec = PbsSpec::new(label(in_a, "in_a")?, label(in_b, "in_b")?, label(out_a, "out_a")?, label(out_b, "out_b")?)?;
        let r = pbs_apply(state(s, "s")?, &spec)?;
        put(out, boxed_state(r), "out")
    })
}

/// Ideal one-photon herald on `mode`. Writes the success probability and the
/// normalized success state, or null when the probability is zero.
///
/// # Safety
/// `s` must be a live handle, `mode` a NUL-terminated string, outputs writable.
#[no_mangle]
pub unsafe extern "C" fn hl_state_herald(
    s: *const HlState,
    mode: *const c_char,
    out_state: *mut *mut HlState,
    out_probability: *mut f64,
) -> HlStatus {
    guard(|| {
        let h = qndm_herald(state(s, "s")?, &label(mode, "mode")?)?;
        let post = h.success.state.map(boxed_state).unwrap_or(ptr::null_mut());
        if out_probability.is_null() {
            hl_state_free(post);
            return Err(null("out_probability"));
        }
        out_probability.write(h.success.probability);
        put(out_state, post, "out_state").inspect_err(|_| hl_state_free(post))
    })
}

/// # Safety
/// `s` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hl_state_norm_sqr(s: *const HlState, out: *mut f64) -> HlStatus {
    guard(|| put(out, state(s, "s")?.norm_sqr(), "out"))
}

/// `|<a|b>|^2`; both states must live on the same modes.
///
/// # Safety
/// `a`, `b` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hl_state_overlap(a: *const HlState, b: *const HlState, out: *mut f64) -> HlStatus {
    guard(|| put(out, state(a, "a")?.overlap_sqr(state(b, "b")?)?, "out"))
}

/// Canonical JSON list of `{ket, re, im}` terms.
///
/// # Safety
/// `s` must be a live handle; `out` writable. Free the result with `hl_string_free`.
#[no_mangle]
pub unsafe extern "C" fn hl_state_to_json(s: *const HlState, out: *mut *mut c_char) -> HlStatus {
    guard(|| {
        let json = serde_json::to_string(state(s, "s")?).expect("state terms serialize");
        put(out, c_string(json), "out")
    })
}

/// # Safety
/// `s` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn hl_state_free(s: *mut HlState) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// `f|H><H| + (1-f)|V><V|` in `mode`.
///
/// # Safety
/// `mode` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hl_density_dephased(mode: *const c_char, f: f64, out: *mut *mut HlDensity) -> HlStatus {
    guard(|| {
        let rho = dephased_photon(label(mode, "mode")?, f)?;
        put(out, Box::into_raw(Box::new(HlDensity(rho))), "out")
    })
}

/// One purification round on two copies of `rho`. Writes the corrected output
/// state, its `|H>` fraction and the two-mode selection probability.
///
/// # Safety
/// `rho` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn hl_purify_round(
    rho: *const HlDensity,
    out_state: *mut *mut HlDensity,
    out_f: *mut f64,
    out_selection_probability: *mut f64,
) -> HlStatus {
    guard(|| {
        let r = purify_round(density(rho, "rho")?)?;
        if out_f.is_null() || out_selection_probability.is_null() {
            return Err(null("out_f or out_selection_probability"));
        }
        out_f.write(r.output_f);
        out_selection_probability.write(r.post_selection_probability);
        put(out_state, Box::into_raw(Box::new(HlDensity(r.output))), "out_state")
    })
}

/// # Safety
/// `rho` must be a live handle; `out` writable. Free the result with `hl_string_free`.
#[no_mangle]
pub unsafe extern "C" fn hl_density_to_json(rho: *const HlDensity, out: *mut *mut c_char) -> HlStatus {
    guard(|| {
        let json = serde_json::to_string(density(rho, "rho")?).expect("density entries serialize");
        put(out, c_string(json), "out")
    })
}

/// # Safety
/// `rho` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn hl_density_free(rho: *mut HlDensity) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// Two-photon entangler: sources on modes `1`, `2`, herald on `1'`.
///
/// # Safety
/// Outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_protocol_entangle_two(
    alpha1: HlComplex,
    beta1: HlComplex,
    alpha2: HlComplex,
    beta2: HlComplex,
    out_state: *mut *mut HlState,
    out_probability: *mut f64,
) -> HlStatus {
    guard(|| {
        let r = entangle_two(&spec(alpha1, beta1)?, &spec(alpha2, beta2)?)?;
        put(out_probability, r.success_probability, "out_probability")?;
        put(out_state, boxed_state(r.heralded_state), "out_state")
    })
}

/// `n`-photon chain with identical sources `alpha|H> + beta|V>`.
///
/// # Safety
/// Outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_protocol_chain(
    n: usize,
    alpha: HlComplex,
    beta: HlComplex,
    out_state: *mut *mut HlState,
    out_probability: *mut f64,
) -> HlStatus {
    guard(|| {
        let r = chain_n(&vec![spec(alpha, beta)?; n])?;
        put(out_probability, r.success_probability, "out_probability")?;
        put(out_state, boxed_state(r.heralded_state), "out_state")
    })
}

/// Purification trajectory from `f` as a versioned JSON report.
///
/// # Safety
/// `out` must be writable. Free the result with `hl_string_free`.
#[no_mangle]
pub unsafe extern "C" fn hl_purify_trajectory_json(f: f64, rounds: usize, out: *mut *mut c_char) -> HlStatus {
    guard(|| {
        let t = iterate(f, rounds)?;
        let command = serde_json::json!({"name": "purify", "f": f, "rounds": rounds});
        put(out, c_string(Report::new(command, t, 0.0).to_json()), "out")
    })
}

/// Runs a circuit script. `shots <= 0` skips Monte Carlo sampling. On parse or
/// semantic errors the status says which pass failed and the last-error
/// message lists every `line:column: message`, one per line.
///
/// # Safety
/// `script` must be a NUL-terminated string; `out` writable. Free the result with `hl_string_free`.
#[no_mangle]
pub unsafe extern "C" fn hl_simulate_script(
    script: *const c_char,
    shots: i64,
    seed: u64,
    out: *mut *mut c_char,
) -> HlStatus {
    guard(|| {
        let src = text(script, "script")?;
        let options = RunOptions { shots: u64::try_from(shots).ok().filter(|&s| s > 0), seed };
        match circuit::simulate(src, &options) {
            Ok(r) => {
                let command = serde_json::json!({"name": "simulate", "shots": options.shots, "seed": seed});
                put(out, c_string(Report::new(command, r, 0.0).to_json()), "out")
            }
            Err(CircuitError::Runtime(e)) => Err(e.into()),
            Err(e) => {
                let status = match e {
                    CircuitError::Parse(_) => HlStatus::ParseError,
                    _ => HlStatus::SemanticError,
                };
                let lines: Vec<String> =
                    e.diagnostics().iter().map(|d| format!("{}:{}: {}", d.line, d.column, d.message)).collect();
                Err(Fail(status, lines.join("\n")))
            }
        }
    })
}
