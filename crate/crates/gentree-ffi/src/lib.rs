//! C ABI for the gentree library.
//!
//! Every fallible function returns a [`GentreeStatus`]; on failure the
//! message of the last error on the calling thread is available from
//! [`gentree_last_error`]. Handles are opaque and must be released with
//! their matching `_free` function. Strings returned to the caller are
//! released with [`gentree_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gentree::pat::pat;
use gentree::perm::c_occ;
use gentree::rng::{stream, StreamRng};
use gentree::stats::{gamma_sq, PatternStats};
use gentree::tree::{level_count, parse_jumps};
use gentree::walk::{solve_pq, PermutationSampler};
use gentree::{Error, FamilyId, Permutation};

/// Result of a call through the C interface.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GentreeStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Malformed input: family name, pattern, jumps or UTF-8.
    InvalidArgument = 2,
    /// The requested size is not realized by the family's walk.
    Infeasible = 3,
    /// The output buffer is too small; the needed length is reported.
    BufferTooSmall = 4,
    /// A size cap or step budget was exceeded.
    Resource = 5,
    /// An internal consistency check failed or the library panicked.
    Internal = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GentreeStatus {
    match e {
        Error::Infeasible { .. } => GentreeStatus::Infeasible,
        Error::Resource(_) | Error::Io(_) => GentreeStatus::Resource,
        Error::Internal(_) | Error::Solver(_) | Error::Guard(_) => GentreeStatus::Internal,
        _ => GentreeStatus::InvalidArgument,
    }
}

fn fail(e: Error) -> GentreeStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

/// Runs `f`, turning panics into [`GentreeStatus::Internal`].
fn guarded<F: FnOnce() -> GentreeStatus>(f: F) -> GentreeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("panic inside gentree".into());
            GentreeStatus::Internal
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_error(format!("argument `{}` is null", stringify!($p)));
            return GentreeStatus::NullPointer;
        })+
    };
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, GentreeStatus> {
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not UTF-8".into());
        GentreeStatus::InvalidArgument
    })
}

unsafe fn read_family(s: *const c_char) -> Result<FamilyId, GentreeStatus> {
    read_str(s)?.parse().map_err(fail)
}

unsafe fn read_perm(values: *const u32, len: usize) -> Result<Permutation, GentreeStatus> {
    Permutation::new(std::slice::from_raw_parts(values, len).to_vec()).map_err(fail)
}

/// Copies `p` into `out` when it fits and reports its length.
unsafe fn write_perm(p: &Permutation, out: *mut u32, cap: usize, written: *mut usize) -> GentreeStatus {
    *written = p.len();
    if p.len() > cap {
        set_error(format!("buffer holds {cap} entries but {} are needed", p.len()));
        return GentreeStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(p.values().as_ptr(), out, p.len());
    GentreeStatus::Ok
}

/// Message of the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn gentree_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gentree_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `s` must come from a gentree function returning a string, and must
/// not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gentree_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Tilting parameters `t` and `p` of the family's step law.
///
/// # Safety
/// `family` must be a NUL-terminated string; `t` and `p` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn gentree_solve_pq(family: *const c_char, t: *mut f64, p: *mut f64) -> GentreeStatus {
    non_null!(family, t, p);
    guarded(|| {
        let f = match read_family(family) {
            Ok(f) => f,
            Err(s) => return s,
        };
        match solve_pq(f.spec()) {
            Ok(w) => {
                *t = w.t;
                *p = w.p;
                GentreeStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of members of size `n`, from the label recursion.
///
/// # Safety
/// `family` must be a NUL-terminated string; `count` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn gentree_level_count(family: *const c_char, n: usize, count: *mut u64) -> GentreeStatus {
    non_null!(family, count);
    guarded(|| {
        let f = match read_family(family) {
            Ok(f) => f,
            Err(s) => return s,
        };
        match u64::try_from(level_count(f.spec(), n)) {
            Ok(c) => {
                *count = c;
                GentreeStatus::Ok
            }
            Err(_) => fail(Error::Resource(format!("level {n} count exceeds 64 bits"))),
        }
    })
}

/// Number of consecutive occurrences of a pattern in a permutation, both
/// given as arrays of values `1..=len`.
///
/// # Safety
/// `pattern` and `perm` must point to `pattern_len` and `perm_len`
/// readable values; `count` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gentree_c_occ(
    pattern: *const u32,
    pattern_len: usize,
    perm: *const u32,
    perm_len: usize,
    count: *mut usize,
) -> GentreeStatus {
    non_null!(pattern, perm, count);
    guarded(|| {
        let (pi, sigma) = match (read_perm(pattern, pattern_len), read_perm(perm, perm_len)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        *count = c_occ(&pi, &sigma);
        GentreeStatus::Ok
    })
}

/// Pattern induced by colored jumps such as `"-2,+1B,+1T"`.
///
/// # Safety
/// `family` and `jumps` must be NUL-terminated strings; `out` must hold
/// `cap` values; `written` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gentree_pat(
    family: *const c_char,
    jumps: *const c_char,
    out: *mut u32,
    cap: usize,
    written: *mut usize,
) -> GentreeStatus {
    non_null!(family, jumps, out, written);
    guarded(|| {
        let f = match read_family(family) {
            Ok(f) => f,
            Err(s) => return s,
        };
        let js = match read_str(jumps).and_then(|s| parse_jumps(s).map_err(fail)) {
            Ok(js) => js,
            Err(s) => return s,
        };
        match pat(f.spec(), &js) {
            Ok(p) => write_perm(&p, out, cap, written),
            Err(e) => fail(e),
        }
    })
}

/// Uniform sampler of members of one size with its own random stream.
pub struct GentreeSampler {
    sampler: PermutationSampler,
    rng: StreamRng,
    size: usize,
}

/// # Safety
/// `family` must be a NUL-terminated string; `out` must be valid for
/// writes. On success `*out` owns a sampler to be released with
/// [`gentree_sampler_free`].
#[no_mangle]
pub unsafe extern "C" fn gentree_sampler_new(
    family: *const c_char,
    size: usize,
    seed: u64,
    out: *mut *mut GentreeSampler,
) -> GentreeStatus {
    non_null!(family, out);
    *out = ptr::null_mut();
    guarded(|| {
        let f = match read_family(family) {
            Ok(f) => f,
            Err(s) => return s,
        };
        match PermutationSampler::new(f, size) {
            Ok(sampler) => {
                let s = GentreeSampler { sampler, rng: stream(seed, 0), size };
                *out = Box::into_raw(Box::new(s));
                GentreeStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Draws the next permutation into `out`, which must hold the sampler's
/// size.
///
/// # Safety
/// `sampler` must come from [`gentree_sampler_new`]; `out` must hold
/// `cap` values; `written` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gentree_sampler_next(
    sampler: *mut GentreeSampler,
    out: *mut u32,
    cap: usize,
    written: *mut usize,
) -> GentreeStatus {
    non_null!(sampler, out, written);
    guarded(|| {
        let s = &mut *sampler;
        if cap < s.size {
            *written = s.size;
            set_error(format!("buffer holds {cap} entries but {} are needed", s.size));
            return GentreeStatus::BufferTooSmall;
        }
        match s.sampler.sample(&mut s.rng) {
            Ok(p) => write_perm(&p, out, cap, written),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `sampler` must come from [`gentree_sampler_new`] and not have been
/// freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gentree_sampler_free(sampler: *mut GentreeSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

/// Limit-theorem constants of one pattern.
pub struct GentreePatternStats {
    stats: PatternStats,
}

/// Closed interval as returned through the C interface.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GentreeInterval {
    pub lo: f64,
    pub hi: f64,
}

/// Which constant to read from a [`GentreePatternStats`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GentreeConstant {
    Mu = 0,
    Rho = 1,
    Nu = 2,
    Beta2 = 3,
    Gamma2 = 4,
}

/// # Safety
/// `family` must be a NUL-terminated string, `pattern` must point to
/// `len` readable values and `out` must be valid for writes. On success
/// `*out` owns the result, released with [`gentree_pattern_stats_free`].
#[no_mangle]
pub unsafe extern "C" fn gentree_pattern_stats_new(
    family: *const c_char,
    pattern: *const u32,
    len: usize,
    truncation: i64,
    out: *mut *mut GentreePatternStats,
) -> GentreeStatus {
    non_null!(family, pattern, out);
    *out = ptr::null_mut();
    guarded(|| {
        let f = match read_family(family) {
            Ok(f) => f,
            Err(s) => return s,
        };
        let pi = match read_perm(pattern, len) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let stats = solve_pq(f.spec()).and_then(|w| gamma_sq(&w, &pi, truncation));
        match stats {
            Ok(stats) => {
                *out = Box::into_raw(Box::new(GentreePatternStats { stats }));
                GentreeStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `stats` must come from [`gentree_pattern_stats_new`]; `out` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gentree_pattern_stats_get(
    stats: *const GentreePatternStats,
    which: GentreeConstant,
    out: *mut GentreeInterval,
) -> GentreeStatus {
    non_null!(stats, out);
    let s = &(*stats).stats;
    let i = match which {
        GentreeConstant::Mu => s.mu,
        GentreeConstant::Rho => s.rho,
        GentreeConstant::Nu => s.nu,
        GentreeConstant::Beta2 => s.beta2,
        GentreeConstant::Gamma2 => s.gamma2,
    };
    *out = GentreeInterval { lo: i.lo, hi: i.hi };
    GentreeStatus::Ok
}

/// JSON form of the constants; release with [`gentree_string_free`].
/// Returns null on failure.
///
/// # Safety
/// `stats` must come from [`gentree_pattern_stats_new`].
#[no_mangle]
pub unsafe extern "C" fn gentree_pattern_stats_to_json(stats: *const GentreePatternStats) -> *mut c_char {
    if stats.is_null() {
        set_error("argument `stats` is null".into());
        return ptr::null_mut();
    }
    let json = gentree::cli::to_json(&(*stats).stats);
    CString::new(json).map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `stats` must come from [`gentree_pattern_stats_new`] and not have
/// been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gentree_pattern_stats_free(stats: *mut GentreePatternStats) {
    if !stats.is_null() {
        drop(Box::from_raw(stats));
    }
}
