//! C ABI over the subshift library: an opaque system handle, status codes,
//! and JSON strings for structured results.
//!
//! Conventions: every function returns a `SubshiftStatus`; results come back
//! through out-pointers. Strings returned through `char**` are owned by the
//! caller and must be released with `subshift_string_free`. On any non-Ok
//! status, `subshift_last_error_message` returns a thread-local description
//! valid until the next failing call on the same thread. All functions catch
//! panics at the boundary and report them as `InternalError`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use subshift::attractor::{self, AttractorError, ShallowProfiler, PROFILE_CAP};
use subshift::deep::DeepProfiler;
use subshift::language::{DeltaOutcome, LanguageError, LanguageIndex};
use subshift::potential::Potential;
use subshift::recognize::{self, RecognizeError};
use subshift::renorm::{self, RenormError};
use subshift::report;
use subshift::tail::Tail;
use subshift::thermo::{self, CylinderJ, ThermoError};

/// Result of every C-ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubshiftStatus {
    /// The call succeeded and out-parameters are valid.
    Ok = 0,
    /// Rule text, a word, or a tail specification failed to parse.
    ParseError = 1,
    /// A null pointer, bad UTF-8, or a parameter outside its domain.
    InvalidArgument = 2,
    /// The index cutoff or a scan limit was reached before a decision.
    Saturated = 3,
    /// An explicit node or expansion budget was exhausted.
    BudgetExceeded = 4,
    /// A panic crossed the boundary; the library state is still usable.
    InternalError = 5,
}

/// Opaque analysis handle: a substitution plus its factor index.
pub struct SubshiftSystem {
    index: LanguageIndex,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let clean: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(clean).unwrap());
}

fn fail(status: SubshiftStatus, msg: &str) -> SubshiftStatus {
    set_error(msg);
    status
}

/// Message for the most recent failure on this thread. Never null; empty
/// before the first failure. The pointer stays valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn subshift_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn guarded<F: FnOnce() -> SubshiftStatus>(f: F) -> SubshiftStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(SubshiftStatus::InternalError, "panic at the C boundary"),
    }
}

/// # Safety
/// `p` must be a valid NUL-terminated string or null.
unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, SubshiftStatus> {
    if p.is_null() {
        return Err(fail(
            SubshiftStatus::InvalidArgument,
            &format!("{what} is null"),
        ));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        fail(
            SubshiftStatus::InvalidArgument,
            &format!("{what} is not valid UTF-8"),
        )
    })
}

fn status_of_language(e: &LanguageError) -> SubshiftStatus {
    match e {
        LanguageError::TooDeep { .. } | LanguageError::PowerSearchSaturated { .. } => {
            SubshiftStatus::Saturated
        }
        LanguageError::Subst(_) => SubshiftStatus::InvalidArgument,
        _ => SubshiftStatus::InvalidArgument,
    }
}

fn status_of_attractor(e: &AttractorError) -> SubshiftStatus {
    match e {
        AttractorError::Language(l) => status_of_language(l),
        AttractorError::DepthSaturated { .. } => SubshiftStatus::Saturated,
        AttractorError::BudgetExceeded { .. } | AttractorError::NodeBudgetExceeded { .. } => {
            SubshiftStatus::BudgetExceeded
        }
        _ => SubshiftStatus::InvalidArgument,
    }
}

fn status_of_renorm(e: &RenormError) -> SubshiftStatus {
    match e {
        RenormError::Attractor(a) => status_of_attractor(a),
        RenormError::AmbiguousSaturation => SubshiftStatus::Saturated,
        RenormError::WindowBudget { .. } | RenormError::PrefixBudget { .. } => {
            SubshiftStatus::BudgetExceeded
        }
        _ => SubshiftStatus::InvalidArgument,
    }
}

fn status_of_thermo(e: &ThermoError) -> SubshiftStatus {
    match e {
        ThermoError::Language(l) => status_of_language(l),
        ThermoError::NodeBudget { .. } => SubshiftStatus::BudgetExceeded,
        ThermoError::DepthBudget { .. } => SubshiftStatus::Saturated,
        _ => SubshiftStatus::InvalidArgument,
    }
}

fn status_of_recognize(e: &RecognizeError) -> SubshiftStatus {
    match e {
        RecognizeError::Language(l) => status_of_language(l),
        RecognizeError::ScanSaturated { .. } => SubshiftStatus::Saturated,
        RecognizeError::NotMarked => SubshiftStatus::InvalidArgument,
    }
}

fn emit_json<T: serde::Serialize>(value: &T, out: *mut *mut c_char) -> SubshiftStatus {
    let text = match serde_json::to_string_pretty(value) {
        Ok(t) => t,
        Err(e) => return fail(SubshiftStatus::InternalError, &e.to_string()),
    };
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            SubshiftStatus::Ok
        }
        Err(_) => fail(SubshiftStatus::InternalError, "JSON contained a NUL byte"),
    }
}

unsafe fn system_ref<'a>(
    sys: *const SubshiftSystem,
) -> Result<&'a SubshiftSystem, SubshiftStatus> {
    if sys.is_null() {
        return Err(fail(SubshiftStatus::InvalidArgument, "system handle is null"));
    }
    Ok(&*sys)
}

fn parse_tail_arg(index: &LanguageIndex, spec: &str, seed: u64) -> Result<Tail, SubshiftStatus> {
    report::parse_tail(index.subst(), spec, seed)
        .map_err(|e| fail(SubshiftStatus::ParseError, &e))
}

/// Builds a system from rule text (`a -> image`, one rule per line or
/// `/`-separated). `max_len` is the exact-language cutoff; factor queries are
/// answered exactly up to it. On success the handle must be released with
/// `subshift_system_free`.
///
/// # Safety
/// `rules` must be a valid NUL-terminated string; `out` must point to
/// writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn subshift_system_new(
    rules: *const c_char,
    max_len: usize,
    out: *mut *mut SubshiftSystem,
) -> SubshiftStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SubshiftStatus::InvalidArgument, "out pointer is null");
        }
        let text = match read_str(rules, "rules") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let subst = match subshift::Substitution::parse(text) {
            Ok(s) => s,
            Err(e) => return fail(SubshiftStatus::ParseError, &e.to_string()),
        };
        match LanguageIndex::build(&subst, max_len) {
            Ok(index) => {
                *out = Box::into_raw(Box::new(SubshiftSystem { index }));
                SubshiftStatus::Ok
            }
            Err(e) => fail(status_of_language(&e), &e.to_string()),
        }
    })
}

/// Releases a system handle. Null is a no-op.
///
/// # Safety
/// `sys` must be a pointer returned by `subshift_system_new` that has not
/// been freed, or null.
#[no_mangle]
pub unsafe extern "C" fn subshift_system_free(sys: *mut SubshiftSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Releases a string returned through any `char**` out-parameter. Null is a
/// no-op.
///
/// # Safety
/// `s` must be a string returned by this library that has not been freed, or
/// null.
#[no_mangle]
pub unsafe extern "C" fn subshift_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Full structural report as JSON: alphabet, primitivity, markedness,
/// 2-fullness, aperiodicity evidence, Perron data, power-free bound, and
/// recognizability length.
///
/// # Safety
/// `sys` must be a live system handle; `out_json` must point to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn subshift_analyze_json(
    sys: *const SubshiftSystem,
    out_json: *mut *mut c_char,
) -> SubshiftStatus {
    guarded(|| {
        let system = match system_ref(sys) {
            Ok(s) => s,
            Err(e) => return e,
        };
        if out_json.is_null() {
            return fail(SubshiftStatus::InvalidArgument, "out_json is null");
        }
        let index = &system.index;
        let subst = index.subst();
        let mut structure = subst.structure_report();
        let bound = 200.min(index.max_len().saturating_sub(1));
        structure.aperiodic_evidence = match index.aperiodicity_check(bound) {
            Ok(ev) => Some(ev),
            Err(e) => return fail(status_of_language(&e), &e.to_string()),
        };
        let power_free = match index.power_free_bound(16) {
            Ok(r) => Some(r),
            Err(LanguageError::PowerSearchSaturated { .. }) => None,
            Err(e) => return fail(status_of_language(&e), &e.to_string()),
        };
        let recognizability =
            match recognize::recognizability_length(index, 32.min(index.max_len() / 2)) {
                Ok(r) => Some(r),
                Err(RecognizeError::ScanSaturated { .. } | RecognizeError::NotMarked) => None,
                Err(e) => return fail(status_of_recognize(&e), &e.to_string()),
            };
        let report_data = report::AnalyzeReport {
            two_full: index.is_two_full(),
            max_len: index.max_len(),
            k_constant: report::k_constant(subst, structure.perron.value, 40),
            k_depth: 40,
            power_free,
            recognizability,
            structure,
        };
        emit_json(&report_data, out_json)
    })
}

/// Factor complexity `p(n)`: the number of distinct length-`n` factors.
/// Fails with `Saturated` when `n` exceeds the index cutoff.
///
/// # Safety
/// `sys` must be a live system handle; `out` must point to writable storage
/// for one value.
#[no_mangle]
pub unsafe extern "C" fn subshift_complexity(
    sys: *const SubshiftSystem,
    n: usize,
    out: *mut usize,
) -> SubshiftStatus {
    guarded(|| {
        let system = match system_ref(sys) {
            Ok(s) => s,
            Err(e) => return e,
        };
        if out.is_null() {
            return fail(SubshiftStatus::InvalidArgument, "out pointer is null");
        }
        match system.index.try_complexity(n) {
            Ok(p) => {
                *out = p;
                SubshiftStatus::Ok
            }
            Err(e) => fail(status_of_language(&e), &e.to_string()),
        }
    })
}

/// Depth of a sampled word: the length of its longest prefix that is a
/// factor, provided the next letter already leaves the language. Returns
/// `Saturated` when the whole sample is a factor or the first exit lies
/// beyond the index cutoff.
///
/// # Safety
/// `sys` must be a live system handle; `word` a valid NUL-terminated string;
/// `out` writable storage for one value.
#[no_mangle]
pub unsafe extern "C" fn subshift_delta(
    sys: *const SubshiftSystem,
    word: *const c_char,
    out: *mut usize,
) -> SubshiftStatus {
    guarded(|| {
        let system = match system_ref(sys) {
            Ok(s) => s,
            Err(e) => return e,
        };
        if out.is_null() {
            return fail(SubshiftStatus::InvalidArgument, "out pointer is null");
        }
        let text = match read_str(word, "word") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let letters = match system.index.subst().parse_word(text) {
            Ok(w) => w,
            Err(e) => return fail(SubshiftStatus::ParseError, &e.to_string()),
        };
        match system.index.delta_outcome(&letters) {
            DeltaOutcome::Value(d) => {
                *out = d;
                SubshiftStatus::Ok
            }
            DeltaOutcome::WholeWord => fail(
                SubshiftStatus::Saturated,
                "the whole sample is a factor; provide a longer sample",
            ),
            DeltaOutcome::DepthExceeded => fail(
                SubshiftStatus::Saturated,
                "the first exit lies beyond the index cutoff",
            ),
        }
    })
}

/// All ways of writing a word as S H(core) P, as JSON, with the uniqueness
/// verdict.
///
/// # Safety
/// `sys` must be a live system handle; `word` a valid NUL-terminated string;
/// `out_json` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn subshift_desubstitute_json(
    sys: *const SubshiftSystem,
    word: *const c_char,
    out_json: *mut *mut c_char,
) -> SubshiftStatus {
    guarded(|| {
        let system = match system_ref(sys) {
            Ok(s) => s,
            Err(e) => return e,
        };
        if out_json.is_null() {
            return fail(SubshiftStatus::InvalidArgument, "out_json is null");
        }
        let text = match read_str(word, "word") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let letters = match system.index.subst().parse_word(text) {
            Ok(w) => w,
            Err(e) => return fail(SubshiftStatus::ParseError, &e.to_string()),
        };
        match recognize::desubstitute(&system.index, &letters) {
            Ok(rep) => emit_json(&rep, out_json),
            Err(e) => fail(status_of_recognize(&e), &e.to_string()),
        }
    })
}

/// Accident profile of `H^level(x)` as JSON: accident times, gaps, depths,
/// bispecial witnesses. The tail specification accepts `BLOCK^inf`,
/// `PREFIX|BLOCK^inf`, `fixed:LETTER`, `PREFIX|fixed:LETTER`, and
/// `random:LEN` (driven by `seed`).
///
/// # Safety
/// `sys` must be a live system handle; `tail` a valid NUL-terminated string;
/// `out_json` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn subshift_accidents_json(
    sys: *const SubshiftSystem,
    tail: *const c_char,
    level: u32,
    horizon: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> SubshiftStatus {
    guarded(|| {
        let system = match system_ref(sys) {
            Ok(s) => s,
            Err(e) => return e,
        };
        if out_json.is_null() {
            return fail(SubshiftStatus::InvalidArgument, "out_json is null");
        }
        let spec = match read_str(tail, "tail") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let x = match parse_tail_arg(&system.index, spec, seed) {
            Ok(x) => x,
            Err(s) => return s,
        };
        let x = if level > 0 {
            match x.image(system.index.subst(), level, PROFILE_CAP) {
                Ok(img) => img,
                Err(e) => return fail(SubshiftStatus::BudgetExceeded, &e.to_string()),
            }
        } else {
            x
        };
        match attractor::accidents(&system.index, &x, horizon) {
            Ok(profile) => emit_json(&profile, out_json),
            Err(e) => fail(status_of_attractor(&e), &e.to_string()),
        }
    })
}

/// One renormalization iterate `R^m V(x)` for the power potential
/// `1 / delta^alpha`, using the deep profiler when the substitution supports
/// it and the index-backed one otherwise.
///
/// # Safety
/// `sys` must be a live system handle; `tail` a valid NUL-terminated string;
/// `out` writable storage for one value.
#[no_mangle]
pub unsafe extern "C" fn subshift_renormalize(
    sys: *const SubshiftSystem,
    tail: *const c_char,
    alpha: f64,
    m: u32,
    seed: u64,
    out: *mut f64,
) -> SubshiftStatus {
    guarded(|| {
        let system = match system_ref(sys) {
            Ok(s) => s,
            Err(e) => return e,
        };
        if out.is_null() {
            return fail(SubshiftStatus::InvalidArgument, "out pointer is null");
        }
        let spec = match read_str(tail, "tail") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let x = match parse_tail_arg(&system.index, spec, seed) {
            Ok(x) => x,
            Err(s) => return s,
        };
        let v = Potential::power(alpha);
        let index = &system.index;
        let result = match DeepProfiler::new(index) {
            Ok(mut deep) => renorm::renormalize(&v, index, &x, m, &mut deep),
            Err(_) => {
                let mut shallow = ShallowProfiler { index };
                renorm::renormalize(&v, index, &x, m, &mut shallow)
            }
        };
        match result {
            Ok(value) => {
                *out = value;
                SubshiftStatus::Ok
            }
            Err(e) => fail(status_of_renorm(&e), &e.to_string()),
        }
    })
}

/// Closed-form limit of the renormalization iterates on the Thue-Morse
/// system for a tail with `delta(x) = p`. Fails for `p < 2`.
///
/// # Safety
/// `out` must point to writable storage for one value.
#[no_mangle]
pub unsafe extern "C" fn subshift_thue_morse_u(p: usize, out: *mut f64) -> SubshiftStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SubshiftStatus::InvalidArgument, "out pointer is null");
        }
        match renorm::thue_morse_u(p) {
            Ok(v) => {
                *out = v;
                SubshiftStatus::Ok
            }
            Err(e) => fail(SubshiftStatus::InvalidArgument, &e.to_string()),
        }
    })
}

/// Freezing certificate as JSON for the cylinder of a non-factor word `wj`
/// with freeness cutoff `n`, at inverse temperature `beta`, with return
/// words truncated at `n_max` and free excursions at `l_max`. The JSON
/// carries the verdict, the truncated operator value, and the tail bound.
///
/// # Safety
/// `sys` must be a live system handle; `wj` a valid NUL-terminated string;
/// `out_json` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn subshift_freeze_json(
    sys: *const SubshiftSystem,
    wj: *const c_char,
    n: usize,
    beta: f64,
    n_max: usize,
    l_max: usize,
    out_json: *mut *mut c_char,
) -> SubshiftStatus {
    guarded(|| {
        let system = match system_ref(sys) {
            Ok(s) => s,
            Err(e) => return e,
        };
        if out_json.is_null() {
            return fail(SubshiftStatus::InvalidArgument, "out_json is null");
        }
        let wj_text = match read_str(wj, "wj") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let index = &system.index;
        let l_h = match recognize::recognizability_length(index, 32.min(index.max_len() / 2)) {
            Ok(r) => r.l_h,
            Err(e) => return fail(status_of_recognize(&e), &e.to_string()),
        };
        let cyl = match CylinderJ::new(index, wj_text, n, l_h) {
            Ok(c) => c,
            Err(e) => return fail(status_of_thermo(&e), &e.to_string()),
        };
        match thermo::freezing_certificate(index, &cyl, beta, n_max, l_max) {
            Ok(cert) => emit_json(&cert, out_json),
            Err(e) => fail(status_of_thermo(&e), &e.to_string()),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn make(rules: &str, max_len: usize) -> *mut SubshiftSystem {
        let c = CString::new(rules).unwrap();
        let mut sys: *mut SubshiftSystem = ptr::null_mut();
        let status = unsafe { subshift_system_new(c.as_ptr(), max_len, &mut sys) };
        assert_eq!(status, SubshiftStatus::Ok);
        assert!(!sys.is_null());
        sys
    }

    fn take_string(p: *mut c_char) -> String {
        assert!(!p.is_null());
        let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
        unsafe { subshift_string_free(p) };
        s
    }

    fn last_error() -> String {
        unsafe { CStr::from_ptr(subshift_last_error_message()) }
            .to_str()
            .unwrap()
            .to_string()
    }

    #[test]
    fn lifecycle_and_analysis() {
        let sys = make("0 -> 01 / 1 -> 10", 48);
        let mut json: *mut c_char = ptr::null_mut();
        let status = unsafe { subshift_analyze_json(sys, &mut json) };
        assert_eq!(status, SubshiftStatus::Ok);
        let text = take_string(json);
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["structure"]["primitive"], true);
        assert_eq!(doc["structure"]["marked"], true);
        assert_eq!(doc["twoFull"], true);
        assert_eq!(doc["structure"]["perron"]["value"], 2.0);
        assert_eq!(doc["recognizability"]["lH"], 3);
        unsafe { subshift_system_free(sys) };
    }

    #[test]
    fn complexity_and_delta() {
        let sys = make("0 -> 01 / 1 -> 10", 48);
        let mut p = 0usize;
        assert_eq!(
            unsafe { subshift_complexity(sys, 4, &mut p) },
            SubshiftStatus::Ok
        );
        assert_eq!(p, 10);
        let word = CString::new("111").unwrap();
        let mut d = 0usize;
        assert_eq!(
            unsafe { subshift_delta(sys, word.as_ptr(), &mut d) },
            SubshiftStatus::Ok
        );
        // 11 is a factor and 111 is not: the depth is 2.
        assert_eq!(d, 2);
        let saturating = CString::new("0110").unwrap();
        assert_eq!(
            unsafe { subshift_delta(sys, saturating.as_ptr(), &mut d) },
            SubshiftStatus::Saturated
        );
        assert!(last_error().contains("longer sample"));
        unsafe { subshift_system_free(sys) };
    }

    #[test]
    fn desubstitution_verdicts() {
        let sys = make("0 -> 01 / 1 -> 10", 48);
        let mut json: *mut c_char = ptr::null_mut();
        let word = CString::new("010").unwrap();
        assert_eq!(
            unsafe { subshift_desubstitute_json(sys, word.as_ptr(), &mut json) },
            SubshiftStatus::Ok
        );
        let doc: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(doc["verdict"], "multiple");
        let long = CString::new("01101001").unwrap();
        assert_eq!(
            unsafe { subshift_desubstitute_json(sys, long.as_ptr(), &mut json) },
            SubshiftStatus::Ok
        );
        let doc: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(doc["verdict"], "unique");
        unsafe { subshift_system_free(sys) };
    }

    #[test]
    fn accident_profile_of_level_image() {
        let sys = make("0 -> 01 / 1 -> 10", 48);
        let tail = CString::new("1^inf").unwrap();
        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(
            unsafe { subshift_accidents_json(sys, tail.as_ptr(), 3, 8, 0, &mut json) },
            SubshiftStatus::Ok
        );
        let doc: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        // H^3(1^inf): first accident at 2^{3-1} = 4, depth 2^{3+1} = 16.
        assert_eq!(doc["times"][0], 4);
        assert_eq!(doc["delta0"], 16);
        unsafe { subshift_system_free(sys) };
    }

    #[test]
    fn renormalization_value_and_closed_form() {
        let sys = make("0 -> 01 / 1 -> 10", 48);
        let tail = CString::new("1^inf").unwrap();
        let mut v = 0.0f64;
        assert_eq!(
            unsafe { subshift_renormalize(sys, tail.as_ptr(), 1.0, 10, 0, &mut v) },
            SubshiftStatus::Ok
        );
        let mut u = 0.0f64;
        assert_eq!(
            unsafe { subshift_thue_morse_u(2, &mut u) },
            SubshiftStatus::Ok
        );
        assert!((u - 2.0 * (4.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!((v - u).abs() < 1e-3, "R^10 V = {v} should approach U = {u}");
        let mut bad = 0.0f64;
        assert_eq!(
            unsafe { subshift_thue_morse_u(1, &mut bad) },
            SubshiftStatus::InvalidArgument
        );
        unsafe { subshift_system_free(sys) };
    }

    #[test]
    fn freeze_certificate_verdict() {
        let sys = make("0 -> 01 / 1 -> 10", 48);
        let wj = CString::new("111").unwrap();
        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(
            unsafe { subshift_freeze_json(sys, wj.as_ptr(), 8, 50.0, 12, 12, &mut json) },
            SubshiftStatus::Ok
        );
        let doc: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(doc["verdict"], true);
        assert_eq!(doc["outcome"], "verified");
        unsafe { subshift_system_free(sys) };
    }

    #[test]
    fn error_paths_set_messages() {
        let mut sys: *mut SubshiftSystem = ptr::null_mut();
        let bad = CString::new("0 -> ").unwrap();
        assert_eq!(
            unsafe { subshift_system_new(bad.as_ptr(), 48, &mut sys) },
            SubshiftStatus::ParseError
        );
        assert!(last_error().contains("empty image"));
        assert_eq!(
            unsafe { subshift_system_new(ptr::null(), 48, &mut sys) },
            SubshiftStatus::InvalidArgument
        );
        let good = CString::new("0 -> 01 / 1 -> 10").unwrap();
        assert_eq!(
            unsafe { subshift_system_new(good.as_ptr(), 0, &mut sys) },
            SubshiftStatus::InvalidArgument
        );
        // Freeing null handles and strings is a no-op, not a crash.
        unsafe { subshift_system_free(ptr::null_mut()) };
        unsafe { subshift_string_free(ptr::null_mut()) };
    }

    #[test]
    fn wj_inside_language_is_rejected() {
        let sys = make("0 -> 01 / 1 -> 10", 48);
        let wj = CString::new("0110").unwrap();
        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(
            unsafe { subshift_freeze_json(sys, wj.as_ptr(), 8, 50.0, 12, 12, &mut json) },
            SubshiftStatus::InvalidArgument
        );
        assert!(last_error().contains("factor"));
        unsafe { subshift_system_free(sys) };
    }
}
