//! C interface to the planner: MIQP fixtures, scenarios and closed-loop
//! episodes behind opaque handles.
//!
//! Every fallible function returns a [`NavplanStatus`]; on failure the
//! message is available from [`navplan_last_error`] on the same thread.
//! Handles are released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use navplan::harness::{self, EpisodeLog, Outcome, RunConfig, Scenario};
use navplan::miqp::{self, MIQProblem, SolveOptions, SolveStatus};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NavplanStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    Solver = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NavplanSolveStatus {
    Optimal = 0,
    InfeasibleCertified = 1,
    BoundExceeded = 2,
    IterationLimit = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NavplanOutcome {
    GoalReached = 0,
    Stuck = 1,
    Timeout = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NavplanSolveResult {
    pub status: NavplanSolveStatus,
    pub iterations: usize,
    pub j_lower: f64,
    pub j_upper: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NavplanEpisodeSummary {
    pub outcome: NavplanOutcome,
    pub replans: usize,
    pub clearance_violations: usize,
    /// Meters.
    pub min_clearance: f64,
    /// Simulated seconds.
    pub duration: f64,
}

/// Opaque MIQP fixture.
pub struct NavplanMiqp(MIQProblem);

/// Opaque scenario.
pub struct NavplanScenario(Scenario);

/// Opaque episode log.
pub struct NavplanEpisode(EpisodeLog);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(NavplanStatus, String);

impl Failure {
    fn new(status: NavplanStatus, msg: impl ToString) -> Self {
        Failure(status, msg.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NavplanStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NavplanStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside the planner");
            NavplanStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(NavplanStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::new(NavplanStatus::InvalidUtf8, e))
}

unsafe fn target<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure::new(NavplanStatus::NullPointer, "null output pointer"))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(NavplanStatus::NullPointer, "null handle"))
}

/// Message of the last failure on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn navplan_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a JSON MIQP fixture.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn navplan_miqp_from_json(
    json: *const c_char,
    out: *mut *mut NavplanMiqp,
) -> NavplanStatus {
    guard(|| {
        let out = target(out)?;
        let p = MIQProblem::from_json(text(json)?)
            .map_err(|e| Failure::new(NavplanStatus::Parse, e))?;
        *out = Box::into_raw(Box::new(NavplanMiqp(p)));
        Ok(())
    })
}

/// Solves a fixture by branch and bound. Pass `INFINITY` for no acceptance
/// threshold and 0 for the default relaxation budget.
///
/// # Safety
/// `problem` must come from [`navplan_miqp_from_json`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn navplan_miqp_solve(
    problem: *const NavplanMiqp,
    j_max: f64,
    iteration_limit: usize,
    out: *mut NavplanSolveResult,
) -> NavplanStatus {
    guard(|| {
        let p = handle(problem)?;
        let out = target(out)?;
        if j_max.is_nan() {
            return Err(Failure::new(NavplanStatus::InvalidArgument, "j_max is NaN"));
        }
        let d = SolveOptions::default();
        let options = SolveOptions {
            j_max,
            iteration_limit: if iteration_limit == 0 {
                d.iteration_limit
            } else {
                iteration_limit
            },
            ..d
        };
        let r = miqp::solve(&p.0, &options).map_err(|e| Failure::new(NavplanStatus::Solver, e))?;
        *out = NavplanSolveResult {
            status: match r.status {
                SolveStatus::Optimal => NavplanSolveStatus::Optimal,
                SolveStatus::InfeasibleCertified => NavplanSolveStatus::InfeasibleCertified,
                SolveStatus::BoundExceeded => NavplanSolveStatus::BoundExceeded,
                SolveStatus::IterationLimit => NavplanSolveStatus::IterationLimit,
            },
            iterations: r.iterations,
            j_lower: r.lower_bound,
            j_upper: r.upper_bound,
        };
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or come from [`navplan_miqp_from_json`], and not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn navplan_miqp_free(problem: *mut NavplanMiqp) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Parses a TOML scenario file.
///
/// # Safety
/// `toml` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn navplan_scenario_from_toml(
    toml: *const c_char,
    out: *mut *mut NavplanScenario,
) -> NavplanStatus {
    guard(|| {
        let out = target(out)?;
        let s =
            Scenario::from_toml(text(toml)?).map_err(|e| Failure::new(NavplanStatus::Parse, e))?;
        *out = Box::into_raw(Box::new(NavplanScenario(s)));
        Ok(())
    })
}

/// Built-in scenario with one corridor closed by an unmapped wall.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn navplan_scenario_blocked_corridor(
    seed: u64,
    out: *mut *mut NavplanScenario,
) -> NavplanStatus {
    guard(|| {
        *target(out)? = Box::into_raw(Box::new(NavplanScenario(harness::blocked_corridor(seed))));
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a live scenario handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn navplan_scenario_free(scenario: *mut NavplanScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs a closed-loop episode. `overrides` is null or newline-separated
/// `key.path=value` assignments in TOML syntax.
///
/// # Safety
/// `scenario` must be a live handle, `overrides` null or nul-terminated,
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn navplan_run_episode(
    scenario: *const NavplanScenario,
    overrides: *const c_char,
    out: *mut *mut NavplanEpisode,
) -> NavplanStatus {
    guard(|| {
        let s = handle(scenario)?;
        let out = target(out)?;
        let assignments: Vec<String> = if overrides.is_null() {
            Vec::new()
        } else {
            text(overrides)?
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(str::to_string)
                .collect()
        };
        let cfg = RunConfig::default()
            .with_assignments(&assignments)
            .map_err(|e| Failure::new(NavplanStatus::InvalidArgument, e))?;
        *out = Box::into_raw(Box::new(NavplanEpisode(harness::run_episode(&s.0, &cfg))));
        Ok(())
    })
}

/// # Safety
/// `episode` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn navplan_episode_summary(
    episode: *const NavplanEpisode,
    out: *mut NavplanEpisodeSummary,
) -> NavplanStatus {
    guard(|| {
        let log = &handle(episode)?.0;
        *target(out)? = NavplanEpisodeSummary {
            outcome: match log.outcome {
                Outcome::GoalReached => NavplanOutcome::GoalReached,
                Outcome::Stuck => NavplanOutcome::Stuck,
                Outcome::Timeout => NavplanOutcome::Timeout,
            },
            replans: log.replans().count(),
            clearance_violations: log.clearance_violations,
            min_clearance: log.min_clearance,
            duration: log.telemetry().last().map_or(0.0, |t| t.t),
        };
        Ok(())
    })
}

/// The episode log as JSON lines. Release with [`navplan_string_free`].
///
/// # Safety
/// `episode` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn navplan_episode_jsonl(
    episode: *const NavplanEpisode,
    out: *mut *mut c_char,
) -> NavplanStatus {
    guard(|| {
        let log = &handle(episode)?.0;
        let s = CString::new(log.to_jsonl()).map_err(|e| Failure::new(NavplanStatus::Solver, e))?;
        *target(out)? = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `episode` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn navplan_episode_free(episode: *mut NavplanEpisode) {
    if !episode.is_null() {
        drop(Box::from_raw(episode));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, not used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn navplan_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
