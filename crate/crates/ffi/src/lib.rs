//! C ABI over `hri_core`.
//!
//! Handles are opaque pointers created by `*_load`/`*_run` functions and
//! released with the matching `*_free`. Every fallible call returns an
//! [`HriStatus`]; on failure `hri_last_error_message` describes the error for
//! the calling thread. No function unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hri_core::output::write_trace;
use hri_core::sim::Outcome;
use hri_core::{run_episode, ActionDistribution, Belief, EpisodeResult, ScenarioConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HriStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    UnknownParameter = 4,
    Simulation = 5,
    Io = 6,
    OutOfRange = 7,
    BufferTooSmall = 8,
    NoValue = 9,
    InvalidArgument = 10,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HriOutcome {
    RobotReachedGoal = 0,
    HumanReachedGoal = 1,
    BothReached = 2,
    Collision = 3,
    Timeout = 4,
}

impl From<Outcome> for HriOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::RobotReachedGoal => HriOutcome::RobotReachedGoal,
            Outcome::HumanReachedGoal => HriOutcome::HumanReachedGoal,
            Outcome::BothReached => HriOutcome::BothReached,
            Outcome::Collision => HriOutcome::Collision,
            Outcome::Timeout => HriOutcome::Timeout,
        }
    }
}

/// Scalar fields of one trace row.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HriStep {
    pub t: u64,
    /// Danger signal, 0 or 1.
    pub d_r: u8,
    pub fallback_used: u8,
    pub p_aware: f64,
    /// Largest planned collision probability over the horizon.
    pub max_p_coll: f64,
}

/// A validated scenario configuration.
pub struct HriScenario {
    cfg: ScenarioConfig,
}

/// A finished episode together with the configuration that produced it.
pub struct HriEpisode {
    cfg: ScenarioConfig,
    result: EpisodeResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

type Fallible<T> = Result<T, (HriStatus, String)>;

fn fail<T>(status: HriStatus, msg: impl Into<String>) -> Fallible<T> {
    Err((status, msg.into()))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Fallible<()>) -> HriStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            HriStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HriStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Fallible<&'a str> {
    if p.is_null() {
        return fail(HriStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(HriStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Fallible<&'a T> {
    p.as_ref().map_or_else(
        || fail(HriStatus::NullPointer, format!("{what} is null")),
        Ok,
    )
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Fallible<&'a mut T> {
    p.as_mut().map_or_else(
        || fail(HriStatus::NullPointer, format!("{what} is null")),
        Ok,
    )
}

unsafe fn slice_out<'a>(
    p: *mut f64,
    len: usize,
    need: usize,
    what: &str,
) -> Fallible<&'a mut [f64]> {
    if p.is_null() {
        return fail(HriStatus::NullPointer, format!("{what} is null"));
    }
    if len < need {
        return fail(
            HriStatus::BufferTooSmall,
            format!("{what} holds {len} values, {need} needed"),
        );
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

fn new_scenario(cfg: ScenarioConfig, out: &mut *mut HriScenario) {
    *out = Box::into_raw(Box::new(HriScenario { cfg }));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hri_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn hri_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads and validates a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hri_scenario_load(
    path: *const c_char,
    out: *mut *mut HriScenario,
) -> HriStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let cfg = ScenarioConfig::load(path)
            .or_else(|e| fail(HriStatus::InvalidConfig, format!("{path}: {e}")))?;
        new_scenario(cfg, out);
        Ok(())
    })
}

/// Parses and validates a scenario from TOML text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hri_scenario_from_str(
    text: *const c_char,
    out: *mut *mut HriScenario,
) -> HriStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let text = str_arg(text, "text")?;
        let cfg = ScenarioConfig::from_toml_str(text)
            .or_else(|e| fail(HriStatus::InvalidConfig, e.to_string()))?;
        new_scenario(cfg, out);
        Ok(())
    })
}

/// Overrides one scalar parameter, as the CLI's `sweep --param` does. The
/// scenario is left unchanged when the new value fails validation.
///
/// # Safety
/// `scenario` must come from this library; `name` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hri_scenario_set_param(
    scenario: *mut HriScenario,
    name: *const c_char,
    value: f64,
) -> HriStatus {
    guard(|| {
        let sc = out_arg(scenario, "scenario")?;
        let name = str_arg(name, "name")?;
        let mut cfg = sc.cfg.clone();
        cfg.set_param(name, value).or_else(|e| {
            let status = match e {
                hri_core::ConfigError::UnknownParameter(_) => HriStatus::UnknownParameter,
                _ => HriStatus::InvalidConfig,
            };
            fail(status, e.to_string())
        })?;
        sc.cfg = cfg;
        Ok(())
    })
}

/// Sets the random seed.
///
/// # Safety
/// `scenario` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn hri_scenario_set_seed(scenario: *mut HriScenario, seed: u64) -> HriStatus {
    guard(|| {
        out_arg(scenario, "scenario")?.cfg.simulation.rng_seed = seed;
        Ok(())
    })
}

/// Number of coordinates per agent state; 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn hri_scenario_dim(scenario: *const HriScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.cfg.robot.start.dim())
}

/// Releases a scenario. Null is ignored.
///
/// # Safety
/// `scenario` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn hri_scenario_free(scenario: *mut HriScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs one closed-loop episode to completion.
///
/// # Safety
/// `scenario` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hri_episode_run(
    scenario: *const HriScenario,
    out: *mut *mut HriEpisode,
) -> HriStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let cfg = ref_arg(scenario, "scenario")?.cfg.clone();
        let result = run_episode(&cfg).or_else(|e| fail(HriStatus::Simulation, e.to_string()))?;
        *out = Box::into_raw(Box::new(HriEpisode { cfg, result }));
        Ok(())
    })
}

/// Releases an episode. Null is ignored.
///
/// # Safety
/// `episode` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn hri_episode_free(episode: *mut HriEpisode) {
    if !episode.is_null() {
        drop(Box::from_raw(episode));
    }
}

/// # Safety
/// `episode` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hri_episode_outcome(
    episode: *const HriEpisode,
    out: *mut HriOutcome,
) -> HriStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(episode, "episode")?.result.outcome.into();
        Ok(())
    })
}

/// Number of executed steps; 0 for a null handle.
///
/// # Safety
/// `episode` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn hri_episode_len(episode: *const HriEpisode) -> usize {
    episode.as_ref().map_or(0, |e| e.result.records.len())
}

/// Number of collision-profile entries per step (the planning horizon).
///
/// # Safety
/// `episode` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn hri_episode_horizon(episode: *const HriEpisode) -> usize {
    episode.as_ref().map_or(0, |e| e.cfg.robot.t_r)
}

/// Steps until the robot reached its goal; `NoValue` if it never did.
///
/// # Safety
/// `episode` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hri_episode_steps_to_robot_goal(
    episode: *const HriEpisode,
    out: *mut u64,
) -> HriStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        match ref_arg(episode, "episode")?.result.steps_to_robot_goal {
            Some(s) => {
                *out = s;
                Ok(())
            }
            None => fail(HriStatus::NoValue, "robot never reached its goal"),
        }
    })
}

unsafe fn record<'a>(
    episode: *const HriEpisode,
    index: usize,
) -> Fallible<(&'a HriEpisode, usize)> {
    let ep = ref_arg(episode, "episode")?;
    let len = ep.result.records.len();
    if index >= len {
        return fail(HriStatus::OutOfRange, format!("step {index} of {len}"));
    }
    Ok((ep, index))
}

/// Scalar fields of step `index`.
///
/// # Safety
/// `episode` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hri_episode_step(
    episode: *const HriEpisode,
    index: usize,
    out: *mut HriStep,
) -> HriStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let (ep, i) = record(episode, index)?;
        let r = &ep.result.records[i];
        *out = HriStep {
            t: r.t,
            d_r: u8::from(r.d_r),
            fallback_used: u8::from(r.fallback_used),
            p_aware: r.p_aware,
            max_p_coll: r.collision_profile.iter().copied().fold(0.0, f64::max),
        };
        Ok(())
    })
}

/// Robot and human positions at the start of step `index`. Each buffer
/// must hold at least `hri_scenario_dim` values.
///
/// # Safety
/// `episode` must come from this library; the buffers must be writable for
/// `len` values.
#[no_mangle]
pub unsafe extern "C" fn hri_episode_positions(
    episode: *const HriEpisode,
    index: usize,
    robot: *mut f64,
    human: *mut f64,
    len: usize,
) -> HriStatus {
    guard(|| {
        let (ep, i) = record(episode, index)?;
        let r = &ep.result.records[i];
        slice_out(robot, len, r.x_r.dim(), "robot")?.copy_from_slice(r.x_r.coords());
        slice_out(human, len, r.x_h.dim(), "human")?.copy_from_slice(r.x_h.coords());
        Ok(())
    })
}

/// Planned collision probabilities for horizon steps `1..=T_R` at step
/// `index`.
///
/// # Safety
/// `episode` must come from this library; `out` must be writable for `len`
/// values.
#[no_mangle]
pub unsafe extern "C" fn hri_episode_collision_profile(
    episode: *const HriEpisode,
    index: usize,
    out: *mut f64,
    len: usize,
) -> HriStatus {
    guard(|| {
        let (ep, i) = record(episode, index)?;
        let p = &ep.result.records[i].collision_profile;
        slice_out(out, len, p.len(), "out")?.copy_from_slice(p);
        Ok(())
    })
}

/// Writes the episode trace as CSV, in the same format as `hri run`.
///
/// # Safety
/// `episode` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hri_episode_write_trace(
    episode: *const HriEpisode,
    path: *const c_char,
) -> HriStatus {
    guard(|| {
        let ep = ref_arg(episode, "episode")?;
        let path = str_arg(path, "path")?;
        write_trace(Path::new(path), &ep.result, &ep.cfg)
            .or_else(|e| fail(HriStatus::Io, format!("{path}: {e}")))
    })
}

/// One Bayesian update of `P(beta = 1)` after observing action `observed`,
/// given that action's distribution under each hypothesis.
///
/// # Safety
/// `unaware` and `aware` must be readable for `n` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hri_belief_update(
    p_aware: f64,
    unaware: *const f64,
    aware: *const f64,
    n: usize,
    observed: usize,
    out: *mut f64,
) -> HriStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if unaware.is_null() || aware.is_null() {
            return fail(HriStatus::NullPointer, "likelihood array is null");
        }
        let prior = Belief::new(1.0 - p_aware, p_aware)
            .or_else(|e| fail(HriStatus::InvalidArgument, e.to_string()))?;
        let l0 = ActionDistribution::new(std::slice::from_raw_parts(unaware, n).to_vec());
        let l1 = ActionDistribution::new(std::slice::from_raw_parts(aware, n).to_vec());
        let post = prior
            .update(observed, [&l0, &l1])
            .or_else(|e| fail(HriStatus::InvalidArgument, e.to_string()))?;
        *out = post.p_aware();
        Ok(())
    })
}
