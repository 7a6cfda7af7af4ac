//! C ABI over the scenario driver.
//!
//! Every function returns a [`PfmixStatus`]; on failure the message is kept
//! per thread and can be read with [`pfmix_last_error`]. Handles are opaque
//! and must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use pfmix::output;
use pfmix::scenario::{run_scenario, RunOutput, ScenarioConfig, ScenarioId};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PfmixStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidString = 2,
    InvalidConfig = 3,
    SolverFailure = 4,
    Io = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PfmixScenario {
    HangingBlock = 0,
    Sneddon = 1,
    SneddonLayered = 2,
    Sent = 3,
}

/// One report row. Values that were not computed are NaN, `n_as` is -1.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PfmixStatsRow {
    pub step: u64,
    pub dofs: u64,
    pub avg_lin: f64,
    pub avg_cg: f64,
    pub n_as: i64,
    pub cod_max: f64,
    pub tcv: f64,
    pub e_bulk: f64,
    pub e_crack: f64,
    pub u_y_point: f64,
}

pub struct PfmixConfig(ScenarioConfig);

pub struct PfmixRun(RunOutput);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn classify(e: &pfmix::Error) -> PfmixStatus {
    use pfmix::Error::*;
    match e {
        Io { .. } => PfmixStatus::Io,
        Config(_) | Parameter(_) | Geometry(_) => PfmixStatus::InvalidConfig,
        _ => PfmixStatus::SolverFailure,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (PfmixStatus, String)>) -> PfmixStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PfmixStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PfmixStatus::Panic
        }
    }
}

fn lib_err(e: pfmix::Error) -> (PfmixStatus, String) {
    (classify(&e), e.to_string())
}

fn null(what: &str) -> (PfmixStatus, String) {
    (PfmixStatus::NullPointer, format!("{what} is null"))
}

unsafe fn as_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (PfmixStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (PfmixStatus::InvalidString, format!("{what} is not valid UTF-8")))
}

unsafe fn config_mut<'a>(cfg: *mut PfmixConfig) -> Result<&'a mut ScenarioConfig, (PfmixStatus, String)> {
    cfg.as_mut().map(|c| &mut c.0).ok_or_else(|| null("config"))
}

unsafe fn run_ref<'a>(run: *const PfmixRun) -> Result<&'a RunOutput, (PfmixStatus, String)> {
    run.as_ref().map(|r| &r.0).ok_or_else(|| null("run"))
}

/// Message of the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pfmix_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Default configuration of a benchmark scenario.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn pfmix_config_new(scenario: PfmixScenario, out: *mut *mut PfmixConfig) -> PfmixStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let id = match scenario {
            PfmixScenario::HangingBlock => ScenarioId::HangingBlock,
            PfmixScenario::Sneddon => ScenarioId::Sneddon,
            PfmixScenario::SneddonLayered => ScenarioId::SneddonLayered,
            PfmixScenario::Sent => ScenarioId::Sent,
        };
        *out = Box::into_raw(Box::new(PfmixConfig(ScenarioConfig::new(id))));
        Ok(())
    })
}

/// Parses a configuration from JSON (the format printed by
/// `pfmix solve --print-config`).
///
/// # Safety
/// `json` must be a NUL-terminated string, `out` a valid handle pointer.
#[no_mangle]
pub unsafe extern "C" fn pfmix_config_from_json(json: *const c_char, out: *mut *mut PfmixConfig) -> PfmixStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = as_str(json, "json")?;
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| (PfmixStatus::InvalidConfig, e.to_string()))?;
        cfg.validate().map_err(lib_err)?;
        *out = Box::into_raw(Box::new(PfmixConfig(cfg)));
        Ok(())
    })
}

/// Serializes a configuration to JSON. Release the string with
/// [`pfmix_string_free`].
///
/// # Safety
/// `cfg` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pfmix_config_to_json(cfg: *mut PfmixConfig, out: *mut *mut c_char) -> PfmixStatus {
    guard(|| {
        let c = config_mut(cfg)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = serde_json::to_string(c).map_err(|e| (PfmixStatus::InvalidConfig, e.to_string()))?;
        *out = CString::new(s).map_err(|e| (PfmixStatus::InvalidString, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn pfmix_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `cfg` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn pfmix_config_free(cfg: *mut PfmixConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Applies `set` and keeps the old configuration if validation fails.
unsafe fn update(cfg: *mut PfmixConfig, set: impl FnOnce(&mut ScenarioConfig)) -> PfmixStatus {
    guard(|| {
        let c = config_mut(cfg)?;
        let mut next = c.clone();
        set(&mut next);
        next.validate().map_err(lib_err)?;
        *c = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pfmix_config_set_refines(cfg: *mut PfmixConfig, refines: u32) -> PfmixStatus {
    update(cfg, |c| c.refines = refines as usize)
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pfmix_config_set_steps(cfg: *mut PfmixConfig, steps: u32) -> PfmixStatus {
    update(cfg, |c| c.steps = steps as usize)
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pfmix_config_set_nu(cfg: *mut PfmixConfig, nu: f64) -> PfmixStatus {
    update(cfg, |c| c.nu = nu)
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pfmix_config_set_kappa(cfg: *mut PfmixConfig, kappa: f64) -> PfmixStatus {
    update(cfg, |c| c.kappa = kappa)
}

/// Crack pressure.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pfmix_config_set_rho(cfg: *mut PfmixConfig, rho: f64) -> PfmixStatus {
    update(cfg, |c| c.rho = rho)
}

/// Runs the scenario to completion. A run that stops early because a step
/// failed still yields a handle; see [`pfmix_run_failure`].
///
/// # Safety
/// `cfg` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pfmix_run(cfg: *mut PfmixConfig, out: *mut *mut PfmixRun) -> PfmixStatus {
    guard(|| {
        let c = config_mut(cfg)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let run = run_scenario(c).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(PfmixRun(run)));
        Ok(())
    })
}

/// # Safety
/// `run` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn pfmix_run_free(run: *mut PfmixRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of report rows, or 0 for a null handle.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pfmix_run_num_rows(run: *const PfmixRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.rows.len())
}

/// # Safety
/// `run` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pfmix_run_row(run: *const PfmixRun, index: usize, out: *mut PfmixStatsRow) -> PfmixStatus {
    guard(|| {
        let r = run_ref(run)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let row = r.rows.get(index).ok_or_else(|| {
            (PfmixStatus::OutOfRange, format!("row {index} out of range ({} rows)", r.rows.len()))
        })?;
        let f = |v: Option<f64>| v.unwrap_or(f64::NAN);
        *out = PfmixStatsRow {
            step: row.step as u64,
            dofs: row.dofs as u64,
            avg_lin: f(row.avg_lin),
            avg_cg: f(row.avg_cg),
            n_as: row.n_as.map_or(-1, |n| n as i64),
            cod_max: f(row.cod_max),
            tcv: f(row.tcv),
            e_bulk: f(row.e_bulk),
            e_crack: f(row.e_crack),
            u_y_point: f(row.u_y_point),
        };
        Ok(())
    })
}

/// Message of the error that stopped the run, or null if all steps converged.
/// The pointer stays valid until the next call of this function on the
/// same thread.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pfmix_run_failure(run: *const PfmixRun) -> *const c_char {
    thread_local! {
        static FAILURE: RefCell<CString> = RefCell::new(CString::default());
    }
    match run.as_ref().and_then(|r| r.0.failure.as_deref()) {
        None => ptr::null(),
        Some(msg) => FAILURE.with(|f| {
            *f.borrow_mut() = CString::new(msg.replace('\0', " ")).unwrap_or_default();
            f.borrow().as_ptr()
        }),
    }
}

/// Writes `stats.csv`, `cod_profile.csv` and, if `vtk` is nonzero,
/// `fields.vtk` into `dir`.
///
/// # Safety
/// `run` must be a live handle, `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pfmix_run_write(run: *const PfmixRun, dir: *const c_char, vtk: c_int) -> PfmixStatus {
    guard(|| {
        let r = run_ref(run)?;
        let d = as_str(dir, "dir")?;
        output::write_run(Path::new(d), r, vtk != 0).map_err(lib_err)
    })
}
