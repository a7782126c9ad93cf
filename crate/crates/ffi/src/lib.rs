//! C ABI over `npzt-core`.
//!
//! Every fallible function returns an [`NpztStatus`] and writes its result
//! through an out-pointer. On failure the message is available from
//! [`npzt_last_error`] on the same thread. Handles are opaque and must be
//! released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use npzt_core::atlas::Climatology;
use npzt_core::diagnostics::{
    classify_regime, classify_transition, EpochState, RegimeLabel, TransitionLabel,
    TransitionOutcome,
};
use npzt_core::forcing::{SeasonalForcing, MONTHS};
use npzt_core::npzt::{integrate, EcoState, IntegratorControl, Trajectory};
use npzt_core::params::Params;
use npzt_core::stability::StabilityAnalyzer;
use npzt_core::{Error, ErrorKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpztStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Io = 3,
    /// Malformed parameter file or grid data.
    Schema = 4,
    Numerical = 5,
    /// The cell is ice-covered and has no stability analysis.
    Ice = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpztRegime {
    Robust = 0,
    Marginal = 1,
    Restrictive = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpztTransition {
    StableViability = 0,
    StableRestriction = 1,
    HabitatExpansion = 2,
    HabitatContraction = 3,
    IceFreeViability = 4,
    IceFreeRestriction = 5,
    /// Ice-covered at the end epoch.
    Excluded = 6,
}

/// Stability of the extinction state for one cell.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NpztStabilityReport {
    /// Invasion growth rate, per day.
    pub lambda_p: f64,
    pub rho_p: f64,
    pub rho_z: f64,
    pub gain: f64,
    pub loss: f64,
    pub gamma_crit: f64,
    /// Inventory the exponent was evaluated at.
    pub c0: f64,
}

/// Parsed parameter file.
pub struct NpztParams {
    inner: Params,
}

/// One grid cell with fitted seasonal forcing.
pub struct NpztCell {
    forcing: Option<SeasonalForcing>,
}

pub struct NpztTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

struct Failure(NpztStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match (&e, e.kind()) {
            (Error::Schema { .. } | Error::Config(_) | Error::GridMismatch { .. }, _) => {
                NpztStatus::Schema
            }
            (_, ErrorKind::Io) => NpztStatus::Io,
            (_, ErrorKind::Input) => NpztStatus::InvalidArgument,
            (_, ErrorKind::Numerical) => NpztStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(NpztStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(NpztStatus::InvalidArgument, message.into())
}

/// Run `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> NpztStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            NpztStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {message}"));
            NpztStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn months(p: *const f64, what: &str) -> Result<[f64; MONTHS], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    let mut out = [0.0; MONTHS];
    out.copy_from_slice(std::slice::from_raw_parts(p, MONTHS));
    Ok(out)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn npzt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn npzt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Read a TOML parameter file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn npzt_params_load(
    path: *const c_char,
    out: *mut *mut NpztParams,
) -> NpztStatus {
    guard(|| {
        let inner = Params::load(c_str(path, "path")?)?;
        write_out(out, Box::into_raw(Box::new(NpztParams { inner })), "out")
    })
}

/// Parse parameters from TOML text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn npzt_params_from_str(
    text: *const c_char,
    out: *mut *mut NpztParams,
) -> NpztStatus {
    guard(|| {
        let inner = Params::from_toml_str(c_str(text, "text")?)?;
        write_out(out, Box::into_raw(Box::new(NpztParams { inner })), "out")
    })
}

/// Inventory from the file, or twice the nutrient half-saturation.
///
/// # Safety
/// `params` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn npzt_params_c0(params: *const NpztParams, out: *mut f64) -> NpztStatus {
    guard(|| write_out(out, deref(params, "params")?.inner.c0_or_default(), "out"))
}

/// # Safety
/// `params` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn npzt_params_free(params: *mut NpztParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Fit a cell from twelve monthly SSTs (°C) and mixed-layer depths (m).
/// Ice-covered cells are created but report [`NpztStatus::Ice`] when
/// analyzed.
///
/// # Safety
/// `sst` and `mld` must each point to 12 doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn npzt_cell_new(
    params: *const NpztParams,
    latitude: f64,
    sst: *const f64,
    mld: *const f64,
    out: *mut *mut NpztCell,
) -> NpztStatus {
    guard(|| {
        let params = deref(params, "params")?;
        let clim = Climatology {
            sst: months(sst, "sst")?,
            mld: months(mld, "mld")?,
        };
        if clim.sst.iter().chain(&clim.mld).any(|v| !v.is_finite()) {
            return Err(invalid("monthly values must be finite"));
        }
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(invalid(format!("latitude {latitude} outside [-90, 90]")));
        }
        let forcing = if clim.is_ice() {
            None
        } else {
            Some(clim.forcing(latitude, &params.inner.light)?)
        };
        write_out(out, Box::into_raw(Box::new(NpztCell { forcing })), "out")
    })
}

/// # Safety
/// `cell` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn npzt_cell_is_ice(cell: *const NpztCell, out: *mut bool) -> NpztStatus {
    guard(|| write_out(out, deref(cell, "cell")?.forcing.is_none(), "out"))
}

/// # Safety
/// `cell` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn npzt_cell_free(cell: *mut NpztCell) {
    if !cell.is_null() {
        drop(Box::from_raw(cell));
    }
}

fn open_forcing(cell: &NpztCell) -> Result<&SeasonalForcing, Failure> {
    cell.forcing
        .as_ref()
        .ok_or_else(|| Failure(NpztStatus::Ice, "cell is ice-covered".into()))
}

/// Stability report at inventory `c0`; pass a non-positive or NaN `c0` for
/// the parameter file's value.
///
/// # Safety
/// Handles must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn npzt_cell_stability(
    cell: *const NpztCell,
    params: *const NpztParams,
    c0: f64,
    out: *mut NpztStabilityReport,
) -> NpztStatus {
    guard(|| {
        let forcing = open_forcing(deref(cell, "cell")?)?;
        let params = &deref(params, "params")?.inner;
        let c0 = if c0 > 0.0 { c0 } else { params.c0_or_default() };
        let r = StabilityAnalyzer::new(forcing, &params.bio, Default::default())?.report(c0)?;
        let report = NpztStabilityReport {
            lambda_p: r.lambda_p,
            rho_p: r.rho_p,
            rho_z: r.rho_z,
            gain: r.gain,
            loss: r.loss,
            gamma_crit: r.gamma_crit,
            c0: r.c0_used,
        };
        write_out(out, report, "out")
    })
}

/// Integrate the ecosystem for `years` periods from `(n, p, z)`, sampling
/// every `stride` days.
///
/// # Safety
/// Handles must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn npzt_simulate(
    cell: *const NpztCell,
    params: *const NpztParams,
    n: f64,
    p: f64,
    z: f64,
    years: u32,
    stride: f64,
    out: *mut *mut NpztTrajectory,
) -> NpztStatus {
    guard(|| {
        let forcing = open_forcing(deref(cell, "cell")?)?;
        let params = &deref(params, "params")?.inner;
        if years == 0 {
            return Err(invalid("years must be positive"));
        }
        let ctrl = IntegratorControl {
            stride,
            ..Default::default()
        };
        let t1 = years as f64 * forcing.period;
        let inner = integrate(EcoState::new(n, p, z), 0.0, t1, forcing, &params.bio, &ctrl)?;
        write_out(
            out,
            Box::into_raw(Box::new(NpztTrajectory { inner })),
            "out",
        )
    })
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn npzt_trajectory_len(traj: *const NpztTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.len())
}

/// Copy samples into caller buffers: `times[len]` and row-major
/// `states[3 * len]` as N, P, Z. `capacity` is the number of samples the
/// buffers hold and must be at least the trajectory length.
///
/// # Safety
/// The buffers must be valid for the stated capacity.
#[no_mangle]
pub unsafe extern "C" fn npzt_trajectory_copy(
    traj: *const NpztTrajectory,
    times: *mut f64,
    states: *mut f64,
    capacity: usize,
) -> NpztStatus {
    guard(|| {
        let t = &deref(traj, "trajectory")?.inner;
        if times.is_null() || states.is_null() {
            return Err(null("output buffer"));
        }
        if capacity < t.len() {
            return Err(invalid(format!(
                "capacity {capacity} below trajectory length {}",
                t.len()
            )));
        }
        let times = std::slice::from_raw_parts_mut(times, t.len());
        let states = std::slice::from_raw_parts_mut(states, 3 * t.len());
        times.copy_from_slice(&t.times);
        for (dst, s) in states.chunks_exact_mut(3).zip(&t.states) {
            dst.copy_from_slice(&[s.n, s.p, s.z]);
        }
        Ok(())
    })
}

/// # Safety
/// `traj` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn npzt_trajectory_free(traj: *mut NpztTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn npzt_classify_regime(gamma_crit: f64, out: *mut NpztRegime) -> NpztStatus {
    guard(|| {
        let regime = match classify_regime(gamma_crit)? {
            RegimeLabel::Robust => NpztRegime::Robust,
            RegimeLabel::Marginal => NpztRegime::Marginal,
            RegimeLabel::Restrictive => NpztRegime::Restrictive,
        };
        write_out(out, regime, "out")
    })
}

/// Habitat transition between two epochs. The `gamma` of an ice-covered
/// epoch is ignored.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn npzt_classify_transition(
    start_ice: bool,
    start_gamma: f64,
    end_ice: bool,
    end_gamma: f64,
    out: *mut NpztTransition,
) -> NpztStatus {
    let epoch = |ice: bool, g: f64| {
        if ice {
            EpochState::Ice
        } else {
            EpochState::Open(g)
        }
    };
    guard(|| {
        let t = match classify_transition(epoch(start_ice, start_gamma), epoch(end_ice, end_gamma))?
        {
            TransitionOutcome::Excluded => NpztTransition::Excluded,
            TransitionOutcome::Label(l) => match l {
                TransitionLabel::StableViability => NpztTransition::StableViability,
                TransitionLabel::StableRestriction => NpztTransition::StableRestriction,
                TransitionLabel::HabitatExpansion => NpztTransition::HabitatExpansion,
                TransitionLabel::HabitatContraction => NpztTransition::HabitatContraction,
                TransitionLabel::IceFreeViability => NpztTransition::IceFreeViability,
                TransitionLabel::IceFreeRestriction => NpztTransition::IceFreeRestriction,
            },
        };
        write_out(out, t, "out")
    })
}
