//! C ABI over the `cvswap` library.
//!
//! States are opaque `CvsState` handles owned by the caller and released with
//! `cvs_state_free`. Every fallible function returns a `CvsStatus`; on failure
//! a message is available from `cvs_last_error` on the same thread. Panics
//! never cross the boundary and are reported as `CVS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cvswap::estimators::{
    cutoff_for_coherent_chernoff, cutoff_for_coherent_normal, cutoff_for_squeezed, cv_swap_estimate, error_bound_global,
    error_bound_local, swap2m_expectation, CutoffPlan, EstimatorResult, PlanMethod,
};
use cvswap::fock::{apply_circuit, inner_product, prepare, tensor, CutoffSpec, FockState, GateSpec, PrepKind};
use cvswap::protocols::PermTest;
use cvswap::{Error, C64};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CvsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    ShapeMismatch = 3,
    OutOfRange = 4,
    LeakTooLarge = 5,
    ZeroNorm = 6,
    TooLarge = 7,
    NotUnitary = 8,
    Io = 9,
    Panic = 10,
}

/// Opaque handle to a truncated multimode Fock state.
pub struct CvsState {
    inner: FockState,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CvsGateKind {
    /// `params = [re alpha, im alpha, _]`, acts on `modes[0]`.
    Displacement = 0,
    /// `params = [re z, im z, _]`, acts on `modes[0]`.
    Squeeze = 1,
    /// `params = [theta, phi, _]`, acts on `modes[0]` and `modes[1]`.
    Beamsplitter = 2,
    /// `params = [phi, _, _]`, acts on `modes[0]`.
    PhaseRotation = 3,
    /// `params = [r, _, _]`, acts on `modes[0]` and `modes[1]`.
    TwoModeSqueeze = 4,
    ModeSwap = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CvsGate {
    pub kind: CvsGateKind,
    pub modes: [usize; 2],
    pub params: [f64; 3],
}

/// `stderr` is NaN when fewer than two shots were taken.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct CvsEstimate {
    pub mean_re: f64,
    pub mean_im: f64,
    pub stderr: f64,
    pub shots: u64,
    pub discarded: u64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CvsPlanMethod {
    ExactTail = 0,
    SqueezedClosedForm = 1,
    Chernoff = 2,
    NormalQuantile = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CvsPlan {
    pub m: usize,
    pub bound: f64,
    pub target_eps: f64,
    pub method: CvsPlanMethod,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CvsStatus {
    match e {
        Error::OutOfRange { .. } => CvsStatus::OutOfRange,
        Error::ShapeMismatch(_) => CvsStatus::ShapeMismatch,
        Error::InvalidParameter(_) | Error::Config(_) | Error::Json(_) => CvsStatus::InvalidParameter,
        Error::LeakTooLarge { .. } => CvsStatus::LeakTooLarge,
        Error::ZeroNorm => CvsStatus::ZeroNorm,
        Error::TooLarge { .. } => CvsStatus::TooLarge,
        Error::NotUnitary(_) => CvsStatus::NotUnitary,
        Error::Csv(_) | Error::Io(_) => CvsStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CvsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CvsStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer passed for `{what}`"));
            CvsStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CvsStatus::Panic
        }
    }
}

unsafe fn state_ref<'a>(p: *const CvsState, what: &'static str) -> Result<&'a FockState, Fail> {
    p.as_ref().map(|s| &s.inner).ok_or(Fail::Null(what))
}

unsafe fn out_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(Fail::Null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

fn boxed(state: FockState) -> *mut CvsState {
    Box::into_raw(Box::new(CvsState { inner: state }))
}

fn single_mode_prep(kind: PrepKind, cutoff: usize, out: *mut *mut CvsState) -> CvsStatus {
    guard(|| unsafe {
        let out = out_mut(out, "out")?;
        let modes = kind.modes().unwrap_or(1);
        let s = prepare(&kind, &CutoffSpec::uniform(modes, cutoff)?)?;
        *out = boxed(s.state);
        Ok(())
    })
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn cvs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a state from interleaved amplitudes `[re0, im0, re1, im1, ...]`,
/// row-major with the last mode fastest. `amplitudes_len` counts doubles.
///
/// # Safety
/// `per_mode_max` must point to `modes` values and `amplitudes` to
/// `amplitudes_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cvs_state_new(
    modes: usize,
    per_mode_max: *const usize,
    amplitudes: *const f64,
    amplitudes_len: usize,
    out: *mut *mut CvsState,
) -> CvsStatus {
    guard(|| {
        let out = out_mut(out, "out")?;
        let cut = slice(per_mode_max, modes, "per_mode_max")?;
        let raw = slice(amplitudes, amplitudes_len, "amplitudes")?;
        if raw.len() % 2 != 0 {
            return Err(Error::ShapeMismatch("interleaved amplitude list has odd length".into()).into());
        }
        let amps = raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect();
        *out = boxed(FockState::new(CutoffSpec::new(cut.to_vec())?, amps)?);
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn cvs_state_vacuum(modes: usize, cutoff: usize, out: *mut *mut CvsState) -> CvsStatus {
    guard(|| {
        let out = out_mut(out, "out")?;
        *out = boxed(FockState::vacuum(CutoffSpec::uniform(modes, cutoff)?));
        Ok(())
    })
}

/// Coherent state `D(alpha)|0>`, renormalised after truncation.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn cvs_state_coherent(alpha_re: f64, alpha_im: f64, cutoff: usize, out: *mut *mut CvsState) -> CvsStatus {
    single_mode_prep(PrepKind::Coherent { alpha: C64::new(alpha_re, alpha_im) }, cutoff, out)
}

/// Squeezed vacuum `S(z)|0>`, renormalised after truncation.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn cvs_state_squeezed(z_re: f64, z_im: f64, cutoff: usize, out: *mut *mut CvsState) -> CvsStatus {
    single_mode_prep(PrepKind::Squeezed { z: C64::new(z_re, z_im) }, cutoff, out)
}

/// Two-mode squeezed vacuum, `cutoff` photons per mode.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn cvs_state_tmss(r: f64, cutoff: usize, out: *mut *mut CvsState) -> CvsStatus {
    single_mode_prep(PrepKind::Tmss { r }, cutoff, out)
}

/// # Safety
/// `a` and `b` must be live handles; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn cvs_state_tensor(a: *const CvsState, b: *const CvsState, out: *mut *mut CvsState) -> CvsStatus {
    guard(|| {
        let (a, b) = (state_ref(a, "a")?, state_ref(b, "b")?);
        *out_mut(out, "out")? = boxed(tensor(a, b));
        Ok(())
    })
}

fn gate_spec(g: &CvsGate) -> GateSpec {
    let [p0, p1, _] = g.params;
    let [i, j] = g.modes;
    match g.kind {
        CvsGateKind::Displacement => GateSpec::displacement(C64::new(p0, p1), i),
        CvsGateKind::Squeeze => GateSpec::squeeze(C64::new(p0, p1), i),
        CvsGateKind::Beamsplitter => GateSpec::beamsplitter(p0, p1, i, j),
        CvsGateKind::PhaseRotation => GateSpec::phase(p0, i),
        CvsGateKind::TwoModeSqueeze => GateSpec::two_mode_squeeze(p0, i, j),
        CvsGateKind::ModeSwap => GateSpec::mode_swap(i, j),
    }
}

/// Applies `gates` in order and returns a new handle; the input is untouched.
///
/// # Safety
/// `state` must be a live handle, `gates` must point to `n_gates` gates.
#[no_mangle]
pub unsafe extern "C" fn cvs_state_apply_circuit(
    state: *const CvsState,
    gates: *const CvsGate,
    n_gates: usize,
    out: *mut *mut CvsState,
) -> CvsStatus {
    guard(|| {
        let s = state_ref(state, "state")?;
        let specs: Vec<GateSpec> = slice(gates, n_gates, "gates")?.iter().map(gate_spec).collect();
        *out_mut(out, "out")? = boxed(apply_circuit(s, &specs)?);
        Ok(())
    })
}

/// # Safety
/// `state` must be a handle from this library or NULL; it is consumed.
#[no_mangle]
pub unsafe extern "C" fn cvs_state_free(state: *mut CvsState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of modes, or 0 for NULL.
///
/// # Safety
/// `state` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn cvs_state_modes(state: *const CvsState) -> usize {
    state.as_ref().map_or(0, |s| s.inner.modes())
}

/// Number of complex amplitudes, or 0 for NULL.
///
/// # Safety
/// `state` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn cvs_state_dim(state: *const CvsState) -> usize {
    state.as_ref().map_or(0, |s| s.inner.amplitudes().len())
}

/// Copies interleaved amplitudes into `buffer`, which must hold at least
/// `2 * cvs_state_dim(state)` doubles.
///
/// # Safety
/// `buffer` must point to `buffer_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cvs_state_amplitudes(state: *const CvsState, buffer: *mut f64, buffer_len: usize) -> CvsStatus {
    guard(|| {
        let s = state_ref(state, "state")?;
        let need = 2 * s.amplitudes().len();
        if buffer_len < need {
            return Err(Error::ShapeMismatch(format!("buffer holds {buffer_len} doubles, {need} needed")).into());
        }
        if buffer.is_null() {
            return Err(Fail::Null("buffer"));
        }
        let dst = std::slice::from_raw_parts_mut(buffer, need);
        for (d, a) in dst.chunks_exact_mut(2).zip(s.amplitudes()) {
            d[0] = a.re;
            d[1] = a.im;
        }
        Ok(())
    })
}

/// `<a|b>`.
///
/// # Safety
/// Handles must be live; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_inner_product(a: *const CvsState, b: *const CvsState, re: *mut f64, im: *mut f64) -> CvsStatus {
    guard(|| {
        let z = inner_product(state_ref(a, "a")?, state_ref(b, "b")?)?;
        *out_mut(re, "re")? = z.re;
        *out_mut(im, "im")? = z.im;
        Ok(())
    })
}

fn write_estimate(out: &mut CvsEstimate, r: EstimatorResult) {
    *out = CvsEstimate {
        mean_re: r.mean.re,
        mean_im: r.mean.im,
        stderr: r.stderr.unwrap_or(f64::NAN),
        shots: r.shots,
        discarded: r.discarded,
        seed: r.seed,
    };
}

/// CV SWAP test of two single-mode states with detector threshold `2m`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_cv_swap_estimate(
    a: *const CvsState,
    b: *const CvsState,
    m: usize,
    shots: u64,
    seed: u64,
    out: *mut CvsEstimate,
) -> CvsStatus {
    guard(|| {
        let r = cv_swap_estimate(state_ref(a, "a")?, state_ref(b, "b")?, m, shots, seed)?;
        write_estimate(out_mut(out, "out")?, r);
        Ok(())
    })
}

/// Exact `tr(SWAP_2M rho)` of a two-mode state.
///
/// # Safety
/// `joint` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_swap2m_expectation(joint: *const CvsState, m: usize, out: *mut f64) -> CvsStatus {
    guard(|| {
        *out_mut(out, "out")? = swap2m_expectation(state_ref(joint, "joint")?, m)?;
        Ok(())
    })
}

/// Weight of a two-mode state above total photon number `2m`.
///
/// # Safety
/// `joint` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_error_bound_global(joint: *const CvsState, m: usize, out: *mut f64) -> CvsStatus {
    guard(|| {
        *out_mut(out, "out")? = error_bound_global(state_ref(joint, "joint")?, m)?;
        Ok(())
    })
}

/// Product of the single-mode marginal weights at or below `m`, subtracted
/// from one.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_error_bound_local(rho: *const CvsState, sigma: *const CvsState, m: usize, out: *mut f64) -> CvsStatus {
    guard(|| {
        *out_mut(out, "out")? = error_bound_local(state_ref(rho, "rho")?, state_ref(sigma, "sigma")?, m)?;
        Ok(())
    })
}

fn write_plan(out: &mut CvsPlan, p: CutoffPlan) {
    let method = match p.method {
        PlanMethod::ExactTail => CvsPlanMethod::ExactTail,
        PlanMethod::SqueezedClosedForm => CvsPlanMethod::SqueezedClosedForm,
        PlanMethod::Chernoff => CvsPlanMethod::Chernoff,
        PlanMethod::NormalQuantile => CvsPlanMethod::NormalQuantile,
    };
    *out = CvsPlan { m: p.m, bound: p.bound, target_eps: p.target_eps, method };
}

fn plan_with(f: impl FnOnce() -> cvswap::Result<CutoffPlan>, out: *mut CvsPlan) -> CvsStatus {
    guard(|| unsafe {
        let out = out_mut(out, "out")?;
        write_plan(out, f()?);
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_cutoff_for_squeezed(r: f64, eps: f64, out: *mut CvsPlan) -> CvsStatus {
    plan_with(|| cutoff_for_squeezed(r, eps), out)
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_cutoff_for_coherent_chernoff(energy: f64, eps: f64, out: *mut CvsPlan) -> CvsStatus {
    plan_with(|| cutoff_for_coherent_chernoff(energy, eps), out)
}

/// Normal approximation; refuses mean photon numbers below 25.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_cutoff_for_coherent_normal(energy: f64, eps: f64, out: *mut CvsPlan) -> CvsStatus {
    plan_with(|| cutoff_for_coherent_normal(energy, eps), out)
}

unsafe fn perm_test(states: *const *const CvsState, n_states: usize) -> Result<PermTest, Fail> {
    let handles = slice(states, n_states, "states")?;
    let states = handles.iter().map(|&h| state_ref(h, "states[k]").cloned()).collect::<Result<Vec<_>, _>>()?;
    Ok(PermTest::new(&states)?)
}

/// Exact `tr(rho_0 rho_1 ... rho_{L-1})` for single-mode inputs.
///
/// # Safety
/// `states` must point to `n_states` live handles; `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_perm_exact(states: *const *const CvsState, n_states: usize, re: *mut f64, im: *mut f64) -> CvsStatus {
    guard(|| {
        let z = perm_test(states, n_states)?.exact();
        *out_mut(re, "re")? = z.re;
        *out_mut(im, "im")? = z.im;
        Ok(())
    })
}

/// Sampled PERM test.
///
/// # Safety
/// `states` must point to `n_states` live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_perm_estimate(
    states: *const *const CvsState,
    n_states: usize,
    shots: u64,
    seed: u64,
    out: *mut CvsEstimate,
) -> CvsStatus {
    guard(|| {
        let r = perm_test(states, n_states)?.estimate(shots, seed)?;
        write_estimate(out_mut(out, "out")?, r);
        Ok(())
    })
}
