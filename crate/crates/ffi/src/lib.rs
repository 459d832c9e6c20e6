//! C ABI over `stochq`.
//!
//! Every function returns a [`StqStatus`]; on failure a message is kept per
//! thread and can be read with [`stq_last_error_message`]. Objects are opaque
//! handles created by `*_new` and released by the matching `*_free`.
//! Out-parameters are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stochq::cli::{execute_with_threads, RunConfig};
use stochq::grover::{self, GameConfig};
use stochq::iid::{self, KickDistribution};
use stochq::memory::{self, KernelVariant, MemoryKernel};
use stochq::parrondo::{self, CombinedGame};
use stochq::qubit::{coherence, DensityMatrix2};
use stochq::{dissipative, Error, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StqStatus {
    Ok = 0,
    InvalidArgument = 1,
    InvalidChannel = 2,
    PreconditionViolation = 3,
    UnsupportedVariant = 4,
    IncompatibleModulus = 5,
    OutOfRegime = 6,
    UndefinedBound = 7,
    Capacity = 8,
    NullPointer = 9,
    InvalidUtf8 = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StqKernelVariant {
    PureA = 0,
    PureB = 1,
    Combined = 2,
}

/// Single-qubit density matrix.
pub struct StqDensityMatrix {
    inner: DensityMatrix2,
}

/// Kick law with one step of memory.
pub struct StqMemoryKernel {
    inner: MemoryKernel,
}

/// Random mix of rotation games.
pub struct StqCombinedGame {
    inner: CombinedGame,
}

/// Search game configuration.
pub struct StqGroverGame {
    inner: GameConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(StqStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let s = match e {
            Error::InvalidArgument(_) => StqStatus::InvalidArgument,
            Error::InvalidChannel(_) => StqStatus::InvalidChannel,
            Error::PreconditionViolation(_) => StqStatus::PreconditionViolation,
            Error::UnsupportedVariant(_) => StqStatus::UnsupportedVariant,
            Error::IncompatibleModulus { .. } => StqStatus::IncompatibleModulus,
            Error::OutOfRegime(_) => StqStatus::OutOfRegime,
            Error::UndefinedBound => StqStatus::UndefinedBound,
            Error::Capacity(_) => StqStatus::Capacity,
        };
        Failure(s, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(StqStatus::NullPointer, format!("{what} is null"))
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> StqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StqStatus::Ok,
        Ok(Err(Failure(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            StqStatus::Panic
        }
    }
}

unsafe fn out<T>(p: *mut T, what: &str) -> Result<&'static mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null("handle"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn stq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn stq_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn stq_density_matrix_new(a: f64, b_re: f64, b_im: f64, c: f64, out_handle: *mut *mut StqDensityMatrix) -> StqStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        *slot = boxed(StqDensityMatrix { inner: DensityMatrix2::new(a, C64::new(b_re, b_im), c)? });
        Ok(())
    })
}

/// # Safety
/// `h` must come from `stq_density_matrix_new` (or be null) and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn stq_density_matrix_free(h: *mut StqDensityMatrix) {
    free(h)
}

/// # Safety
/// `h` must be a live handle; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_density_matrix_entries(
    h: *const StqDensityMatrix,
    a: *mut f64,
    b_re: *mut f64,
    b_im: *mut f64,
    c: *mut f64,
) -> StqStatus {
    guard(|| {
        let rho = &handle(h)?.inner;
        let (a, b_re, b_im, c) = (out(a, "a")?, out(b_re, "b_re")?, out(b_im, "b_im")?, out(c, "c")?);
        (*a, *b_re, *b_im, *c) = (rho.a(), rho.b().re, rho.b().im, rho.c());
        Ok(())
    })
}

/// `|b|`.
///
/// # Safety
/// `h` must be a live handle; `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_coherence(h: *const StqDensityMatrix, value: *mut f64) -> StqStatus {
    guard(|| {
        *out(value, "value")? = coherence(&handle(h)?.inner);
        Ok(())
    })
}

unsafe fn write_char(d: &KickDistribution, gamma: *mut f64, phi: *mut f64) -> Result<(), Failure> {
    let (g, p) = (out(gamma, "gamma")?, out(phi, "phi")?);
    let f = iid::char_function(d);
    (*g, *p) = (f.gamma, f.phi);
    Ok(())
}

/// # Safety
/// `gamma` and `phi` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_char_function_gaussian(mu: f64, sigma2: f64, gamma: *mut f64, phi: *mut f64) -> StqStatus {
    guard(|| write_char(&KickDistribution::gaussian(mu, sigma2)?, gamma, phi))
}

/// # Safety
/// `gamma` and `phi` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_char_function_exponential(omega: f64, tau1: f64, gamma: *mut f64, phi: *mut f64) -> StqStatus {
    guard(|| write_char(&KickDistribution::exponential(omega, tau1)?, gamma, phi))
}

/// Delta mixture with `len` (weight, angle) atoms.
///
/// # Safety
/// `weights` and `angles` must point to `len` values; `gamma` and `phi` must
/// be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_char_function_delta(
    weights: *const f64,
    angles: *const f64,
    len: usize,
    gamma: *mut f64,
    phi: *mut f64,
) -> StqStatus {
    guard(|| {
        let (w, a) = (slice(weights, len, "weights")?, slice(angles, len, "angles")?);
        let d = KickDistribution::delta_mixture(w.iter().copied().zip(a.iter().copied()).collect())?;
        write_char(&d, gamma, phi)
    })
}

/// # Safety
/// `out_handle` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_memory_kernel_new(variant: StqKernelVariant, epsilon: f64, out_handle: *mut *mut StqMemoryKernel) -> StqStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        let v = match variant {
            StqKernelVariant::PureA => KernelVariant::PureA,
            StqKernelVariant::PureB => KernelVariant::PureB,
            StqKernelVariant::Combined => KernelVariant::Combined,
        };
        *slot = boxed(StqMemoryKernel { inner: MemoryKernel::new(v, epsilon)? });
        Ok(())
    })
}

/// # Safety
/// `h` must come from `stq_memory_kernel_new` (or be null).
#[no_mangle]
pub unsafe extern "C" fn stq_memory_kernel_free(h: *mut StqMemoryKernel) {
    free(h)
}

/// Per-step decay `|f_n|^{1/n}`, `n >= 2`.
///
/// # Safety
/// `h` must be a live handle; `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_effective_decay(h: *const StqMemoryKernel, n: usize, value: *mut f64) -> StqStatus {
    guard(|| {
        *out(value, "value")? = memory::effective_decay(&handle(h)?.inner, n)?;
        Ok(())
    })
}

/// Expected state after `n` kicks; the result is a new handle.
///
/// # Safety
/// `kernel` and `rho` must be live handles; `out_handle` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_memory_expected_state(
    kernel: *const StqMemoryKernel,
    rho: *const StqDensityMatrix,
    n: usize,
    out_handle: *mut *mut StqDensityMatrix,
) -> StqStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        let s = memory::expected_state(&handle(rho)?.inner, &handle(kernel)?.inner, n)?;
        *slot = boxed(StqDensityMatrix { inner: s });
        Ok(())
    })
}

/// # Safety
/// `moduli` must point to `len` values; `out_handle` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_combined_game_new(moduli: *const u64, len: usize, out_handle: *mut *mut StqCombinedGame) -> StqStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        *slot = boxed(StqCombinedGame { inner: CombinedGame::from_moduli(slice(moduli, len, "moduli")?)? });
        Ok(())
    })
}

/// # Safety
/// `h` must come from `stq_combined_game_new` (or be null).
#[no_mangle]
pub unsafe extern "C" fn stq_combined_game_free(h: *mut StqCombinedGame) {
    free(h)
}

/// Stationary win probability and net rate as reduced fractions.
///
/// # Safety
/// `h` must be a live handle; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_exact_rate(
    h: *const StqCombinedGame,
    win_num: *mut i64,
    win_den: *mut i64,
    net_num: *mut i64,
    net_den: *mut i64,
) -> StqStatus {
    guard(|| {
        let s = parrondo::exact_rate(&handle(h)?.inner)?;
        let (wn, wd, nn, nd) = (out(win_num, "win_num")?, out(win_den, "win_den")?, out(net_num, "net_num")?, out(net_den, "net_den")?);
        (*wn, *wd) = (*s.win_prob.numer(), *s.win_prob.denom());
        (*nn, *nd) = (*s.net_rate.numer(), *s.net_rate.denom());
        Ok(())
    })
}

/// Empirical win frequency over `rounds` rounds from position 0.
///
/// # Safety
/// `h` must be a live handle; `win_prob` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_simulate(h: *const StqCombinedGame, rounds: u64, seed: u64, win_prob: *mut f64) -> StqStatus {
    guard(|| {
        *out(win_prob, "win_prob")? = parrondo::simulate(&handle(h)?.inner, rounds, seed)?.win_prob;
        Ok(())
    })
}

/// # Safety
/// `out_handle` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_grover_game_new(n_qubits: u32, target: u64, out_handle: *mut *mut StqGroverGame) -> StqStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        *slot = boxed(StqGroverGame { inner: GameConfig::new(n_qubits, target)? });
        Ok(())
    })
}

/// # Safety
/// `h` must come from `stq_grover_game_new` (or be null).
#[no_mangle]
pub unsafe extern "C" fn stq_grover_game_free(h: *mut StqGroverGame) {
    free(h)
}

/// `sin^2((2k+1) asin(1/sqrt(N)))`.
///
/// # Safety
/// `h` must be a live handle; `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_success_closed_form(h: *const StqGroverGame, k: u64, value: *mut f64) -> StqStatus {
    guard(|| {
        *out(value, "value")? = grover::success_closed_form(k, &handle(h)?.inner);
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle; `k` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_optimal_k(h: *const StqGroverGame, k: *mut u64) -> StqStatus {
    guard(|| {
        *out(k, "k")? = grover::optimal_k(&handle(h)?.inner);
        Ok(())
    })
}

/// # Safety
/// `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_max_mixing_probability(lambda_ad: f64, lambda_pd: f64, value: *mut f64) -> StqStatus {
    guard(|| {
        let s = dissipative::NoiseScales::new(lambda_ad, lambda_pd)?;
        *out(value, "value")? = dissipative::max_mixing_probability(&s)?;
        Ok(())
    })
}

/// # Safety
/// `t1` and `t2` must be valid.
#[no_mangle]
pub unsafe extern "C" fn stq_effective_t1_t2(p: f64, lambda_ad: f64, lambda_pd: f64, tau0: f64, t1: *mut f64, t2: *mut f64) -> StqStatus {
    guard(|| {
        let s = dissipative::NoiseScales::new(lambda_ad, lambda_pd)?;
        let t = dissipative::effective_t1_t2(p, &s, tau0)?;
        let (a, b) = (out(t1, "t1")?, out(t2, "t2")?);
        (*a, *b) = (t.t1, t.t2);
        Ok(())
    })
}

/// Runs a JSON run configuration (the same format as the command line's
/// `--config` file) and returns the JSON result envelope. `threads = 0` uses
/// the default pool. Free the result with [`stq_string_free`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `result_json` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn stq_run_json(config_json: *const c_char, threads: u32, result_json: *mut *mut c_char) -> StqStatus {
    guard(|| {
        let slot = out(result_json, "result_json")?;
        if config_json.is_null() {
            return Err(null("config_json"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| Failure(StqStatus::InvalidUtf8, e.to_string()))?;
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Failure(StqStatus::InvalidArgument, format!("bad config: {e}")))?;
        let t = if threads == 0 { None } else { Some(threads as usize) };
        let env = execute_with_threads(&cfg, t)?.envelope;
        let s = serde_json::to_string(&env).expect("envelope serializes");
        *slot = CString::new(s).expect("json has no nul bytes").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library (or be null).
#[no_mangle]
pub unsafe extern "C" fn stq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
