//! C ABI surface. Opaque handles, integer error codes, UTF-8 strings
//! allocated on the Rust side and released with `wsn_string_free`.
//!
//! Every entry point catches panics and reports them as `WSN_ERR_INTERNAL`
//! instead of unwinding across the boundary. A thread-local message buffer
//! holds details of the last failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use wsn_sched::gabas::GaParams;
use wsn_sched::harness::{build_schedule, Algorithm};
use wsn_sched::oracle::{mnp_optimal, MnpInstance};
use wsn_sched::resources::SharingMode;
use wsn_sched::simulator;
use wsn_sched::topology::{generate_topology, Topology, TopologyParams};
use wsn_sched::workload::{
    generate_workload, workload_from_json, workload_to_json, Application, WorkloadParams,
};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsnStatus {
    WsnOk = 0,
    WsnErrNullArgument = 1,
    WsnErrInvalidUtf8 = 2,
    WsnErrParse = 3,
    WsnErrGeneration = 4,
    WsnErrInvalidArgument = 5,
    WsnErrRun = 6,
    WsnErrInternal = 7,
}

/// Scheduling algorithm selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsnAlgorithm {
    WsnAlgGabas = 0,
    WsnAlgLmpf = 1,
    WsnAlgLmsf = 2,
    WsnAlgLtsf = 3,
    WsnAlgFcfs = 4,
    WsnAlgSjf = 5,
}

/// Demand aggregation mode for multiply requested points.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsnMode {
    WsnModeShared = 0,
    WsnModeUnshared = 1,
}

/// Per-run metrics, filled by `wsn_run`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WsnMetrics {
    pub makespan: u64,
    pub avg_waiting: f64,
    pub avg_turnaround: f64,
    pub success_rate: f64,
    pub rejected_count: u64,
}

/// Opaque topology handle.
pub struct WsnTopology(Topology);
/// Opaque workload handle.
pub struct WsnWorkload(Vec<Application>);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message.into());
}

fn fail(status: WsnStatus, message: impl Into<String>) -> WsnStatus {
    set_error(message);
    status
}

fn guarded(f: impl FnOnce() -> WsnStatus) -> WsnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(WsnStatus::WsnErrInternal, "internal panic"),
    }
}

/// Message for the most recent error on this thread. Caller frees with
/// `wsn_string_free`. Null when no error has been recorded.
#[no_mangle]
pub extern "C" fn wsn_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        if message.is_empty() {
            std::ptr::null_mut()
        } else {
            CString::new(message.as_str())
                .map(CString::into_raw)
                .unwrap_or(std::ptr::null_mut())
        }
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer previously returned by this library and
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wsn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, WsnStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(WsnStatus::WsnErrNullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        WsnStatus::WsnErrInvalidUtf8
    })
}

fn algorithm_of(raw: WsnAlgorithm) -> Algorithm {
    match raw {
        WsnAlgorithm::WsnAlgGabas => Algorithm::Gabas,
        WsnAlgorithm::WsnAlgLmpf => Algorithm::Lmpf,
        WsnAlgorithm::WsnAlgLmsf => Algorithm::Lmsf,
        WsnAlgorithm::WsnAlgLtsf => Algorithm::Ltsf,
        WsnAlgorithm::WsnAlgFcfs => Algorithm::Fcfs,
        WsnAlgorithm::WsnAlgSjf => Algorithm::Sjf,
    }
}

fn mode_of(raw: WsnMode) -> SharingMode {
    match raw {
        WsnMode::WsnModeShared => SharingMode::Shared,
        WsnMode::WsnModeUnshared => SharingMode::Unshared,
    }
}

/// Generates a topology with the default capacity constants.
///
/// # Safety
/// `out` must be a valid pointer to write a handle to.
#[no_mangle]
pub unsafe extern "C" fn wsn_topology_generate(
    width: i64,
    height: i64,
    points: usize,
    sensors: usize,
    bases: usize,
    seed: u64,
    out: *mut *mut WsnTopology,
) -> WsnStatus {
    guarded(|| {
        if out.is_null() {
            return fail(WsnStatus::WsnErrNullArgument, "null out pointer");
        }
        let params = TopologyParams {
            region_width: width,
            region_height: height,
            num_points: points,
            num_sensors: sensors,
            num_bases: bases,
            ..TopologyParams::default()
        };
        match generate_topology(&params, seed) {
            Ok(topo) => {
                *out = Box::into_raw(Box::new(WsnTopology(topo)));
                WsnStatus::WsnOk
            }
            Err(e) => fail(WsnStatus::WsnErrGeneration, e.to_string()),
        }
    })
}

/// Parses a topology from its JSON form.
///
/// # Safety
/// `json` must be a valid C string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wsn_topology_from_json(
    json: *const c_char,
    out: *mut *mut WsnTopology,
) -> WsnStatus {
    guarded(|| {
        if out.is_null() {
            return fail(WsnStatus::WsnErrNullArgument, "null out pointer");
        }
        let doc = match str_arg(json) {
            Ok(doc) => doc,
            Err(status) => return status,
        };
        match Topology::from_json(doc) {
            Ok(topo) => {
                *out = Box::into_raw(Box::new(WsnTopology(topo)));
                WsnStatus::WsnOk
            }
            Err(e) => fail(WsnStatus::WsnErrParse, e.to_string()),
        }
    })
}

/// Serializes a topology to JSON. Caller frees with `wsn_string_free`.
///
/// # Safety
/// `topology` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsn_topology_to_json(topology: *const WsnTopology) -> *mut c_char {
    if topology.is_null() {
        set_error("null topology handle");
        return std::ptr::null_mut();
    }
    let doc = (*topology).0.to_json();
    CString::new(doc).map(CString::into_raw).unwrap_or(std::ptr::null_mut())
}

/// Releases a topology handle.
///
/// # Safety
/// `topology` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn wsn_topology_free(topology: *mut WsnTopology) {
    if !topology.is_null() {
        drop(Box::from_raw(topology));
    }
}

/// Generates a workload against a topology with default rate tables.
///
/// # Safety
/// `topology` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wsn_workload_generate(
    topology: *const WsnTopology,
    app_count: usize,
    batch_count: u32,
    seed: u64,
    out: *mut *mut WsnWorkload,
) -> WsnStatus {
    guarded(|| {
        if topology.is_null() || out.is_null() {
            return fail(WsnStatus::WsnErrNullArgument, "null handle or out pointer");
        }
        let params = WorkloadParams {
            app_count,
            batch_count,
            ..WorkloadParams::default()
        };
        match generate_workload(&(*topology).0, &params, seed) {
            Ok(apps) => {
                *out = Box::into_raw(Box::new(WsnWorkload(apps)));
                WsnStatus::WsnOk
            }
            Err(e) => fail(WsnStatus::WsnErrGeneration, e.to_string()),
        }
    })
}

/// Parses a workload from its JSON form.
///
/// # Safety
/// `json` must be a valid C string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wsn_workload_from_json(
    json: *const c_char,
    out: *mut *mut WsnWorkload,
) -> WsnStatus {
    guarded(|| {
        if out.is_null() {
            return fail(WsnStatus::WsnErrNullArgument, "null out pointer");
        }
        let doc = match str_arg(json) {
            Ok(doc) => doc,
            Err(status) => return status,
        };
        match workload_from_json(doc) {
            Ok(apps) => {
                *out = Box::into_raw(Box::new(WsnWorkload(apps)));
                WsnStatus::WsnOk
            }
            Err(e) => fail(WsnStatus::WsnErrParse, e.to_string()),
        }
    })
}

/// Serializes a workload to JSON. Caller frees with `wsn_string_free`.
///
/// # Safety
/// `workload` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsn_workload_to_json(workload: *const WsnWorkload) -> *mut c_char {
    if workload.is_null() {
        set_error("null workload handle");
        return std::ptr::null_mut();
    }
    let doc = workload_to_json(&(*workload).0);
    CString::new(doc).map(CString::into_raw).unwrap_or(std::ptr::null_mut())
}

/// Releases a workload handle.
///
/// # Safety
/// `workload` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn wsn_workload_free(workload: *mut WsnWorkload) {
    if !workload.is_null() {
        drop(Box::from_raw(workload));
    }
}

/// Builds a schedule with the chosen algorithm and simulates it. `seed`
/// drives the genetic algorithm; the ordering policies ignore it.
///
/// # Safety
/// `topology` and `workload` must be live handles; `metrics` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn wsn_run(
    topology: *const WsnTopology,
    workload: *const WsnWorkload,
    algorithm: WsnAlgorithm,
    mode: WsnMode,
    seed: u64,
    metrics: *mut WsnMetrics,
) -> WsnStatus {
    guarded(|| {
        if topology.is_null() || workload.is_null() || metrics.is_null() {
            return fail(WsnStatus::WsnErrNullArgument, "null handle or out pointer");
        }
        let topo = &(*topology).0;
        let apps = &(*workload).0;
        let mode = mode_of(mode);
        let schedule = match build_schedule(
            algorithm_of(algorithm),
            topo,
            apps,
            mode,
            &GaParams::default(),
            seed,
        ) {
            Ok(schedule) => schedule,
            Err(e) => return fail(WsnStatus::WsnErrRun, e.to_string()),
        };
        let m = simulator::run(topo, apps, &schedule, mode);
        *metrics = WsnMetrics {
            makespan: m.makespan,
            avg_waiting: m.avg_waiting,
            avg_turnaround: m.avg_turnaround,
            success_rate: m.success_rate,
            rejected_count: m.rejected.len() as u64,
        };
        WsnStatus::WsnOk
    })
}

/// Exact multiway number partitioning: minimal largest partition sum of
/// `numbers` split into `k` parts.
///
/// # Safety
/// `numbers` must point to `count` readable values; `out` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn wsn_mnp_optimal(
    numbers: *const u64,
    count: usize,
    k: usize,
    out: *mut u64,
) -> WsnStatus {
    guarded(|| {
        if (numbers.is_null() && count > 0) || out.is_null() {
            return fail(WsnStatus::WsnErrNullArgument, "null numbers or out pointer");
        }
        let numbers = if count == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(numbers, count).to_vec()
        };
        let instance = MnpInstance { numbers, k };
        match mnp_optimal(&instance) {
            Ok(optimum) => {
                *out = optimum;
                WsnStatus::WsnOk
            }
            Err(e) => fail(WsnStatus::WsnErrInvalidArgument, e.to_string()),
        }
    })
}
