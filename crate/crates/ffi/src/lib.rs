//! C ABI over the axisprompt toolkit.
//!
//! Objects cross the boundary as opaque handles created by `axp_*_new` or
//! `axp_*_load` functions and released with the matching `axp_*_free`.
//! Every fallible call returns an [`AxpStatus`]; on failure the message is
//! available from [`axp_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use axisprompt::cli::{cmd_eval, cmd_render, CliError, EvalMode, PipelineConfig};
use axisprompt::eval::{acc_at_iou, dist_to_bbx, dist_to_center};
use axisprompt::geometry::{compute_aabb, parse_point_file, Aabb, PointCloud, PointFileFormat, Vec3};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Io = 4,
    Geometry = 5,
    Render = 6,
    Marks = 7,
    Prompt = 8,
    Client = 9,
    Eval = 10,
    InvalidArgument = 11,
    Panic = 12,
}

/// Opaque point cloud.
pub struct AxpCloud(PointCloud);

/// Opaque pipeline configuration.
pub struct AxpConfig(PipelineConfig);

/// Aggregates of an evaluation run; absent quantities are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxpSummary {
    pub nrmse_center: f64,
    pub nrmse_bbx: f64,
    pub success_rate: f64,
    pub acc_025: f64,
    pub acc_05: f64,
    pub parse_failure_rate: f64,
    pub n_scenes: usize,
    pub n_objects: usize,
    pub isolation_violations: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(AxpStatus, String);

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match e.kind() {
            "config" => AxpStatus::Config,
            "io" => AxpStatus::Io,
            "geometry" => AxpStatus::Geometry,
            "render" => AxpStatus::Render,
            "marks" => AxpStatus::Marks,
            "prompt" => AxpStatus::Prompt,
            "client" => AxpStatus::Client,
            _ => AxpStatus::Eval,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AxpStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AxpStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AxpStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AxpStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(AxpStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn vec3(p: *const f64) -> Vec3 {
    Vec3::new(*p, *p.add(1), *p.add(2))
}

unsafe fn write3(out: *mut f64, v: &Vec3) {
    for i in 0..3 {
        *out.add(i) = v[i];
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call on this thread; do not free it.
#[no_mangle]
pub extern "C" fn axp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Reads a PLY or XYZ file into a new cloud handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn axp_cloud_load(path: *const c_char, out: *mut *mut AxpCloud) -> AxpStatus {
    guard(|| {
        let path = PathBuf::from(str_arg(path, "path")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let bytes = std::fs::read(&path).map_err(|e| Failure(AxpStatus::Io, format!("{}: {e}", path.display())))?;
        let format = PointFileFormat::detect(&path, &bytes)
            .ok_or_else(|| Failure(AxpStatus::Geometry, "unrecognized point file format".into()))?;
        let cloud = parse_point_file(&bytes, format).map_err(|e| Failure(AxpStatus::Geometry, e.to_string()))?;
        *out = Box::into_raw(Box::new(AxpCloud(cloud)));
        Ok(())
    })
}

/// Builds a cloud from `n` xyz triples and optional per-point instance ids
/// (`ids` may be null; negative ids mean unlabeled).
///
/// # Safety
/// `xyz` must hold `3 * n` doubles, `ids` (if non-null) `n` integers.
#[no_mangle]
pub unsafe extern "C" fn axp_cloud_from_xyz(
    xyz: *const f64,
    ids: *const i64,
    n: usize,
    out: *mut *mut AxpCloud,
) -> AxpStatus {
    guard(|| {
        if (xyz.is_null() && n > 0) || out.is_null() {
            return Err(null("xyz or out"));
        }
        let positions = (0..n).map(|i| vec3(xyz.add(3 * i))).collect();
        let mut cloud = PointCloud::from_positions(positions);
        if !ids.is_null() {
            let ids = (0..n)
                .map(|i| u32::try_from(*ids.add(i)).ok())
                .collect();
            cloud.instance_ids = Some(ids);
        }
        cloud.validate().map_err(|e| Failure(AxpStatus::Geometry, e.to_string()))?;
        *out = Box::into_raw(Box::new(AxpCloud(cloud)));
        Ok(())
    })
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `cloud` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn axp_cloud_len(cloud: *const AxpCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.0.len())
}

/// Axis-aligned box of one instance, or of the whole cloud when
/// `instance < 0`. Writes three doubles each to `out_min` and `out_max`.
///
/// # Safety
/// `cloud` must be a live handle; outputs must hold three doubles.
#[no_mangle]
pub unsafe extern "C" fn axp_cloud_aabb(
    cloud: *const AxpCloud,
    instance: i64,
    out_min: *mut f64,
    out_max: *mut f64,
) -> AxpStatus {
    guard(|| {
        let c = cloud.as_ref().ok_or_else(|| null("cloud"))?;
        if out_min.is_null() || out_max.is_null() {
            return Err(null("output"));
        }
        let id = u32::try_from(instance).ok();
        let b = compute_aabb(&c.0, id).map_err(|e| Failure(AxpStatus::Geometry, e.to_string()))?;
        write3(out_min, &b.min);
        write3(out_max, &b.max);
        Ok(())
    })
}

/// # Safety
/// `cloud` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn axp_cloud_free(cloud: *mut AxpCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Loads a pipeline config (`path` may be null for defaults) and applies
/// `n_overrides` `key=value` strings.
///
/// # Safety
/// Strings must be NUL-terminated; `overrides` must hold `n_overrides`
/// pointers; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn axp_config_load(
    path: *const c_char,
    overrides: *const *const c_char,
    n_overrides: usize,
    out: *mut *mut AxpConfig,
) -> AxpStatus {
    guard(|| {
        if out.is_null() || (overrides.is_null() && n_overrides > 0) {
            return Err(null("out or overrides"));
        }
        let path = if path.is_null() {
            None
        } else {
            Some(PathBuf::from(str_arg(path, "path")?))
        };
        let mut list = Vec::with_capacity(n_overrides);
        for i in 0..n_overrides {
            list.push(str_arg(*overrides.add(i), "override")?.to_string());
        }
        let cfg = PipelineConfig::load(path.as_deref(), &list)?;
        *out = Box::into_raw(Box::new(AxpConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn axp_config_free(config: *mut AxpConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Writes prompt bundles for every scene; stores the scene count.
///
/// # Safety
/// `config` must be a live handle and `out_scenes` writable.
#[no_mangle]
pub unsafe extern "C" fn axp_render(config: *const AxpConfig, out_scenes: *mut usize) -> AxpStatus {
    guard(|| {
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        let dirs = cmd_render(&c.0)?;
        if let Some(o) = out_scenes.as_mut() {
            *o = dirs.len();
        }
        Ok(())
    })
}

/// Runs an offline evaluation with the ground-truth oracle.
///
/// # Safety
/// `config` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn axp_eval_mock(config: *const AxpConfig, out: *mut AxpSummary) -> AxpStatus {
    guard(|| {
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = cmd_eval(&c.0, EvalMode::Mock)?;
        let s = &r.summary;
        *out = AxpSummary {
            nrmse_center: s.nrmse_center.unwrap_or(f64::NAN),
            nrmse_bbx: s.nrmse_bbx.unwrap_or(f64::NAN),
            success_rate: s.success_rate.unwrap_or(f64::NAN),
            acc_025: s.acc_025.unwrap_or(f64::NAN),
            acc_05: s.acc_05.unwrap_or(f64::NAN),
            parse_failure_rate: s.parse_failure_rate,
            n_scenes: s.n_scenes,
            n_objects: s.n_objects,
            isolation_violations: r.isolation_violations.len(),
        };
        Ok(())
    })
}

/// Euclidean distance from `p` to the center of the box `[min, max]`.
///
/// # Safety
/// Each pointer must reference three doubles.
#[no_mangle]
pub unsafe extern "C" fn axp_dist_to_center(p: *const f64, min: *const f64, max: *const f64) -> f64 {
    if p.is_null() || min.is_null() || max.is_null() {
        return f64::NAN;
    }
    let b = Aabb::from_corners(vec3(min), vec3(max));
    dist_to_center(&vec3(p), &b.center())
}

/// Distance from `p` to the box `[min, max]` (0 inside).
///
/// # Safety
/// Each pointer must reference three doubles.
#[no_mangle]
pub unsafe extern "C" fn axp_dist_to_bbx(p: *const f64, min: *const f64, max: *const f64) -> f64 {
    if p.is_null() || min.is_null() || max.is_null() {
        return f64::NAN;
    }
    dist_to_bbx(&vec3(p), &Aabb::from_corners(vec3(min), vec3(max)))
}

/// Fraction of `n` predicted boxes whose IoU with the matching truth box
/// reaches `threshold`. Boxes are six doubles `(min xyz, max xyz)`.
///
/// # Safety
/// `pred` and `truth` must each hold `6 * n` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn axp_acc_at_iou(
    pred: *const f64,
    truth: *const f64,
    n: usize,
    threshold: f64,
    out: *mut f64,
) -> AxpStatus {
    guard(|| {
        if pred.is_null() || truth.is_null() {
            return Err(null("boxes"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let boxes = |p: *const f64| -> Vec<Aabb> {
            (0..n)
                .map(|i| Aabb::from_corners(vec3(p.add(6 * i)), vec3(p.add(6 * i + 3))))
                .collect()
        };
        let preds: Vec<Option<Aabb>> = boxes(pred).into_iter().map(Some).collect();
        *out = acc_at_iou(&preds, &boxes(truth), threshold)
            .map_err(|e| Failure(AxpStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}
