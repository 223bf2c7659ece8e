//! C ABI over `kerr_estimation`.
//!
//! Every function returns a [`KerrStatus`]; results go through out-pointers.
//! The message of the last failure on the calling thread is available from
//! [`kerr_last_error_message`]. Handles are released with their `_free`.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use kerr_estimation::decay::{self, DecaySnapshot};
use kerr_estimation::estimation::{self, EstimationBudget, Observable};
use kerr_estimation::liouvillian::ModelParams;
use kerr_estimation::moments::{MomentEngine, MomentTable};
use kerr_estimation::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KerrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    NonConvergence = 3,
    NumericalFailure = 4,
    InvalidCovariance = 5,
    VanishingSignal = 6,
    ConfigError = 7,
    OutOfRange = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KerrEngine {
    Auto = 0,
    OnePhoton = 1,
    General = 2,
    LinearCavity = 3,
    /// Dense Lindblad steady state with the suggested truncation.
    Oracle = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KerrObservable {
    P = 0,
    Q = 1,
    PSquared = 2,
    QSquared = 3,
}

/// ν = 1 (`Figure`) or ν = Tγ (`Budget`).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KerrBudgetMode {
    Figure = 0,
    Budget = 1,
}

/// Model parameters; zero fields disable the corresponding term.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrParams {
    pub omega_c: f64,
    pub omega_p: f64,
    pub delta: f64,
    pub chi: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub omega_drive: f64,
    pub lambda_drive: f64,
}

impl From<KerrParams> for ModelParams {
    fn from(p: KerrParams) -> Self {
        ModelParams {
            omega_c: p.omega_c,
            omega_p: p.omega_p,
            delta: p.delta,
            chi: p.chi,
            gamma: p.gamma,
            kappa: p.kappa,
            omega_drive: p.omega_drive,
            lambda_drive: p.lambda_drive,
        }
    }
}

/// Steady-state normally ordered moments ⟨a†ˡaᵏ⟩, l + k ≤ 4.
pub struct KerrMomentTable {
    table: MomentTable,
}

/// Exact state of the decaying number superposition at one time.
pub struct KerrDecaySnapshot {
    snapshot: DecaySnapshot,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> KerrStatus {
    match e {
        Error::InvalidParams(_)
        | Error::InvalidDimension(_)
        | Error::UnknownVariant(_)
        | Error::InvalidBudget(_)
        | Error::InvalidState(_)
        | Error::InvalidDensityMatrix(_) => KerrStatus::InvalidParams,
        Error::NonConvergence { .. } | Error::StepSizeUnderflow { .. } => KerrStatus::NonConvergence,
        Error::InvalidCovariance(_) => KerrStatus::InvalidCovariance,
        Error::VanishingSignal(_) => KerrStatus::VanishingSignal,
        Error::Config(_) | Error::InsufficientSpan { .. } => KerrStatus::ConfigError,
        Error::MomentOrder(_) | Error::TruncationTooSmall { .. } => KerrStatus::OutOfRange,
        _ => KerrStatus::NumericalFailure,
    }
}

fn guarded(f: impl FnOnce() -> Result<(), Error>) -> KerrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            KerrStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            KerrStatus::Panic
        }
    }
}

macro_rules! nonnull {
    ($($p:expr),+) => {
        if $($p.is_null())||+ {
            set_error("null pointer argument".into());
            return KerrStatus::NullPointer;
        }
    };
}

fn engine(e: KerrEngine) -> MomentEngine {
    match e {
        KerrEngine::Auto => MomentEngine::Auto,
        KerrEngine::OnePhoton => MomentEngine::OnePhoton,
        KerrEngine::General => MomentEngine::General,
        KerrEngine::LinearCavity => MomentEngine::LinearCavity,
        KerrEngine::Oracle => MomentEngine::Oracle { dim: None },
    }
}

fn observable(o: KerrObservable) -> Observable {
    match o {
        KerrObservable::P => Observable::P,
        KerrObservable::Q => Observable::Q,
        KerrObservable::PSquared => Observable::PSquared,
        KerrObservable::QSquared => Observable::QSquared,
    }
}

/// Copies the last error message (NUL-terminated, truncated to `len`) and
/// returns its full length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn kerr_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// # Safety
/// `params` must point to a valid struct; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kerr_moments_new(
    params: *const KerrParams,
    engine_kind: KerrEngine,
    out: *mut *mut KerrMomentTable,
) -> KerrStatus {
    nonnull!(params, out);
    let p: ModelParams = (*params).into();
    guarded(|| {
        let table = engine(engine_kind).table(&p)?;
        *out = Box::into_raw(Box::new(KerrMomentTable { table }));
        Ok(())
    })
}

/// ⟨a†ˡaᵏ⟩ as real and imaginary parts.
///
/// # Safety
/// `table` must come from [`kerr_moments_new`]; `re`, `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kerr_moments_get(
    table: *const KerrMomentTable,
    l: usize,
    k: usize,
    re: *mut f64,
    im: *mut f64,
) -> KerrStatus {
    nonnull!(table, re, im);
    guarded(|| {
        let z = (*table).table.get(l, k)?;
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// # Safety
/// `table` must come from [`kerr_moments_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kerr_moments_photon_number(table: *const KerrMomentTable, out: *mut f64) -> KerrStatus {
    nonnull!(table, out);
    *out = (*table).table.photon_number();
    KerrStatus::Ok
}

/// # Safety
/// `table` must be null or come from [`kerr_moments_new`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kerr_moments_free(table: *mut KerrMomentTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Steady-state Gaussian QFI with respect to χ.
///
/// # Safety
/// `params` must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kerr_gaussian_qfi(params: *const KerrParams, engine_kind: KerrEngine, out: *mut f64) -> KerrStatus {
    nonnull!(params, out);
    let p: ModelParams = (*params).into();
    guarded(|| {
        *out = estimation::steady_state_gaussian_qfi(&engine(engine_kind), &p, None)?;
        Ok(())
    })
}

/// Homodyne error propagation δχ for observable `obs`; infinite when the signal vanishes.
///
/// # Safety
/// `params` must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kerr_error_propagation(
    params: *const KerrParams,
    engine_kind: KerrEngine,
    obs: KerrObservable,
    mode: KerrBudgetMode,
    total_time: f64,
    out: *mut f64,
) -> KerrStatus {
    nonnull!(params, out);
    let p: ModelParams = (*params).into();
    guarded(|| {
        let budget = match mode {
            KerrBudgetMode::Figure => EstimationBudget::single_shot(total_time)?,
            KerrBudgetMode::Budget => EstimationBudget::steady_state(total_time, p.gamma)?,
        };
        *out = estimation::error_propagation(&p, &engine(engine_kind), observable(obs), &budget, None)?.delta_chi;
        Ok(())
    })
}

/// Eigenvalue λ_{m,μ} of the lab-frame Kerr Liouvillian.
///
/// # Safety
/// `params` must be valid; `re`, `im` writable.
#[no_mangle]
pub unsafe extern "C" fn kerr_liouvillian_eigenvalue(
    m: i64,
    mu: u64,
    params: *const KerrParams,
    re: *mut f64,
    im: *mut f64,
) -> KerrStatus {
    nonnull!(params, re, im);
    let z = decay::liouvillian_eigenvalue(m, mu, &(*params).into());
    *re = z.re;
    *im = z.im;
    KerrStatus::Ok
}

/// # Safety
/// `params` must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kerr_decay_snapshot_new(
    n: usize,
    params: *const KerrParams,
    t: f64,
    out: *mut *mut KerrDecaySnapshot,
) -> KerrStatus {
    nonnull!(params, out);
    let p: ModelParams = (*params).into();
    guarded(|| {
        let snapshot = decay::decay_snapshot(n, &p, t)?;
        *out = Box::into_raw(Box::new(KerrDecaySnapshot { snapshot }));
        Ok(())
    })
}

/// Population ρ_jj, 0 ≤ j ≤ 2N.
///
/// # Safety
/// `s` must come from [`kerr_decay_snapshot_new`]; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kerr_decay_snapshot_population(s: *const KerrDecaySnapshot, j: usize, out: *mut f64) -> KerrStatus {
    nonnull!(s, out);
    let snap = &(*s).snapshot;
    let value = if j == 0 { Some(snap.rho00) } else { snap.diag.get(j - 1).copied() };
    match value {
        Some(v) => {
            *out = v;
            KerrStatus::Ok
        }
        None => {
            set_error(format!("population index {j} out of range"));
            KerrStatus::OutOfRange
        }
    }
}

/// Coherence ρ_{2N,0}.
///
/// # Safety
/// `s` must come from [`kerr_decay_snapshot_new`]; `re`, `im` writable.
#[no_mangle]
pub unsafe extern "C" fn kerr_decay_snapshot_coherence(s: *const KerrDecaySnapshot, re: *mut f64, im: *mut f64) -> KerrStatus {
    nonnull!(s, re, im);
    let z = (*s).snapshot.rho_2n_0;
    *re = z.re;
    *im = z.im;
    KerrStatus::Ok
}

/// Number of populations, 2N + 1.
///
/// # Safety
/// `s` must come from [`kerr_decay_snapshot_new`].
#[no_mangle]
pub unsafe extern "C" fn kerr_decay_snapshot_len(s: *const KerrDecaySnapshot) -> usize {
    if s.is_null() {
        0
    } else {
        (*s).snapshot.diag.len() + 1
    }
}

/// # Safety
/// `s` must be null or come from [`kerr_decay_snapshot_new`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kerr_decay_snapshot_free(s: *mut KerrDecaySnapshot) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// QFI of the decaying superposition at time t.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kerr_qfi_decay(n: usize, gamma: f64, t: f64, out: *mut f64) -> KerrStatus {
    nonnull!(out);
    guarded(|| {
        *out = decay::qfi_decay(n, gamma, t)?;
        Ok(())
    })
}

/// δχ(t) = √(t/(T F)).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kerr_precision_profile(n: usize, gamma: f64, total_time: f64, t: f64, out: *mut f64) -> KerrStatus {
    nonnull!(out);
    guarded(|| {
        *out = decay::precision_profile(n, gamma, total_time, t)?;
        Ok(())
    })
}

/// Interrogation time minimizing δχ.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kerr_optimal_time(n: usize, gamma: f64, total_time: f64, out: *mut f64) -> KerrStatus {
    nonnull!(out);
    guarded(|| {
        *out = decay::optimal_time(n, gamma, total_time)?;
        Ok(())
    })
}
