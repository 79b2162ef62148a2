//! C ABI for driving simulations from other languages.
//!
//! Every entry point returns a [`GchStatus`]. On failure a thread-local
//! message is available from [`gch_last_error_message`] until the next call
//! on the same thread. Simulations are opaque [`GchSimulation`] handles
//! created by `gch_simulation_new*` and released with
//! [`gch_simulation_free`]. Panics never cross the boundary; they surface as
//! [`GchStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use gch_core::diagnostics::conserved_i1;
use gch_core::model::ModelParams;
use gch_core::scenario::{
    make_initial, parse_config, read_snapshot, write_snapshot, Snapshot, SnapshotError,
};
use gch_core::timestepper::{advance, RunStatus, SolverState, StepControl};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GchStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Breaking = 4,
    Io = 5,
    Snapshot = 6,
    BufferTooSmall = 7,
    StepLimit = 8,
    Panic = 99,
}

/// Opaque simulation handle.
pub struct GchSimulation {
    model: ModelParams,
    control: StepControl,
    state: SolverState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: GchStatus, message: impl Into<String>) -> GchStatus {
    set_error(message);
    status
}

fn guard(body: impl FnOnce() -> GchStatus) -> GchStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(GchStatus::Panic, "internal panic"),
    }
}

unsafe fn utf8_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, GchStatus> {
    if ptr.is_null() {
        return Err(fail(GchStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(GchStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn handle<'a>(sim: *const GchSimulation) -> Result<&'a GchSimulation, GchStatus> {
    sim.as_ref()
        .ok_or_else(|| fail(GchStatus::NullPointer, "simulation handle is null"))
}

unsafe fn handle_mut<'a>(sim: *mut GchSimulation) -> Result<&'a mut GchSimulation, GchStatus> {
    sim.as_mut()
        .ok_or_else(|| fail(GchStatus::NullPointer, "simulation handle is null"))
}

fn snapshot_status(e: SnapshotError) -> GchStatus {
    match e {
        SnapshotError::Io(_) => fail(GchStatus::Io, e.to_string()),
        _ => fail(GchStatus::Snapshot, e.to_string()),
    }
}

unsafe fn publish(out: *mut *mut GchSimulation, sim: GchSimulation) -> GchStatus {
    *out = Box::into_raw(Box::new(sim));
    GchStatus::Ok
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn gch_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates a simulation from a TOML scenario document. Output paths in the
/// document are ignored.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gch_simulation_new(
    config_toml: *const c_char,
    out: *mut *mut GchSimulation,
) -> GchStatus {
    guard(|| {
        if out.is_null() {
            return fail(GchStatus::NullPointer, "out is null");
        }
        let text = try_status!(utf8_arg(config_toml, "config_toml"));
        let cfg = match parse_config(text) {
            Ok(cfg) => cfg,
            Err(e) => return fail(GchStatus::Config, e.to_string()),
        };
        let u0 = match make_initial(&cfg.initial, cfg.grid, cfg.seed) {
            Ok(u0) => u0,
            Err(e) => return fail(GchStatus::Config, e.to_string()),
        };
        publish(
            out,
            GchSimulation {
                model: cfg.model,
                control: cfg.control,
                state: SolverState::new(u0),
            },
        )
    })
}

/// Creates a simulation from a snapshot file. The model and step control come
/// from `config_toml`, whose `(k, p, b)` must match the snapshot.
///
/// # Safety
/// `path` and `config_toml` must be NUL-terminated strings and `out` a
/// writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gch_simulation_from_snapshot(
    path: *const c_char,
    config_toml: *const c_char,
    out: *mut *mut GchSimulation,
) -> GchStatus {
    guard(|| {
        if out.is_null() {
            return fail(GchStatus::NullPointer, "out is null");
        }
        let path = PathBuf::from(try_status!(utf8_arg(path, "path")));
        let text = try_status!(utf8_arg(config_toml, "config_toml"));
        let cfg = match parse_config(text) {
            Ok(cfg) => cfg,
            Err(e) => return fail(GchStatus::Config, e.to_string()),
        };
        let snap = match read_snapshot(&path) {
            Ok(s) => s,
            Err(e) => return snapshot_status(e),
        };
        if !snap.matches(&cfg.model) {
            return fail(
                GchStatus::Config,
                format!(
                    "snapshot model (k, p, b) = ({}, {}, {}) differs from the configuration",
                    snap.k, snap.p, snap.b
                ),
            );
        }
        publish(
            out,
            GchSimulation {
                model: cfg.model,
                control: cfg.control,
                state: snap.state,
            },
        )
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn gch_simulation_free(sim: *mut GchSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

unsafe fn run_to(sim: *mut GchSimulation, t_end: f64, max_steps: u64) -> GchStatus {
    let sim = try_status!(handle_mut(sim));
    if sim.state.breaking {
        return fail(
            GchStatus::Breaking,
            format!("breaking at t = {}", sim.state.t),
        );
    }
    let control = StepControl {
        t_end,
        max_steps,
        ..sim.control.clone()
    };
    let result = advance(sim.state.clone(), &sim.model, &control, 0, |_, _| {});
    sim.state = result.state;
    match result.status {
        RunStatus::Completed => GchStatus::Ok,
        RunStatus::Breaking => fail(
            GchStatus::Breaking,
            format!("breaking at t = {}", sim.state.t),
        ),
        RunStatus::StepLimit if max_steps == 1 => GchStatus::Ok,
        RunStatus::StepLimit => fail(
            GchStatus::StepLimit,
            format!("step limit reached at t = {}", sim.state.t),
        ),
    }
}

/// Takes one step with the configured step rule.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gch_simulation_step(sim: *mut GchSimulation) -> GchStatus {
    guard(|| run_to(sim, f64::INFINITY, 1))
}

/// Advances to `t_end`, clipping the last step to land on it exactly.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gch_simulation_advance(sim: *mut GchSimulation, t_end: f64) -> GchStatus {
    guard(|| {
        let current = try_status!(handle(sim)).state.t;
        if !(t_end.is_finite() && t_end >= current) {
            return fail(
                GchStatus::InvalidArgument,
                format!("t_end {t_end} is not a finite time at or after {current}"),
            );
        }
        let max_steps = try_status!(handle(sim)).control.max_steps;
        run_to(sim, t_end, max_steps)
    })
}

/// Current simulation time.
///
/// # Safety
/// `sim` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gch_simulation_time(
    sim: *const GchSimulation,
    out: *mut f64,
) -> GchStatus {
    guard(|| {
        let sim = try_status!(handle(sim));
        match out.as_mut() {
            Some(out) => {
                *out = sim.state.t;
                GchStatus::Ok
            }
            None => fail(GchStatus::NullPointer, "out is null"),
        }
    })
}

/// Number of grid points.
///
/// # Safety
/// `sim` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gch_simulation_n_points(
    sim: *const GchSimulation,
    out: *mut usize,
) -> GchStatus {
    guard(|| {
        let sim = try_status!(handle(sim));
        match out.as_mut() {
            Some(out) => {
                *out = sim.state.u.grid().n_points();
                GchStatus::Ok
            }
            None => fail(GchStatus::NullPointer, "out is null"),
        }
    })
}

/// Copies the velocity samples into `buffer`, which must hold at least
/// `n_points` values.
///
/// # Safety
/// `sim` must be a live handle and `buffer` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn gch_simulation_values(
    sim: *const GchSimulation,
    buffer: *mut f64,
    len: usize,
) -> GchStatus {
    guard(|| {
        let sim = try_status!(handle(sim));
        if buffer.is_null() {
            return fail(GchStatus::NullPointer, "buffer is null");
        }
        let values = sim.state.u.values();
        if len < values.len() {
            return fail(
                GchStatus::BufferTooSmall,
                format!("buffer holds {len} values, {} needed", values.len()),
            );
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buffer, values.len());
        GchStatus::Ok
    })
}

/// The conserved energy `∫ u·m dx` of the current state.
///
/// # Safety
/// `sim` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gch_simulation_i1(sim: *const GchSimulation, out: *mut f64) -> GchStatus {
    guard(|| {
        let sim = try_status!(handle(sim));
        match out.as_mut() {
            Some(out) => {
                *out = conserved_i1(&sim.state.u, &sim.model);
                GchStatus::Ok
            }
            None => fail(GchStatus::NullPointer, "out is null"),
        }
    })
}

/// Writes the current state as a snapshot file.
///
/// # Safety
/// `sim` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gch_simulation_write_snapshot(
    sim: *const GchSimulation,
    path: *const c_char,
) -> GchStatus {
    guard(|| {
        let sim = try_status!(handle(sim));
        let path = PathBuf::from(try_status!(utf8_arg(path, "path")));
        match write_snapshot(&Snapshot::new(sim.state.clone(), &sim.model), &path) {
            Ok(()) => GchStatus::Ok,
            Err(e) => snapshot_status(e),
        }
    })
}
