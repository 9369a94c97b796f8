use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use axisprompt_ffi::*;

fn last_error() -> String {
    let p = axp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn cloud_handle_lifecycle() {
    let xyz = [0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 5.0, 5.0, 5.0];
    let ids = [1i64, 1, -1];
    let mut cloud = ptr::null_mut();
    unsafe {
        assert_eq!(axp_cloud_from_xyz(xyz.as_ptr(), ids.as_ptr(), 3, &mut cloud), AxpStatus::Ok);
        assert_eq!(axp_cloud_len(cloud), 3);
        let (mut lo, mut hi) = ([0.0; 3], [0.0; 3]);
        assert_eq!(axp_cloud_aabb(cloud, 1, lo.as_mut_ptr(), hi.as_mut_ptr()), AxpStatus::Ok);
        assert_eq!((lo, hi), ([0.0; 3], [1.0, 2.0, 3.0]));
        assert_eq!(axp_cloud_aabb(cloud, -1, lo.as_mut_ptr(), hi.as_mut_ptr()), AxpStatus::Ok);
        assert_eq!(hi, [5.0; 3]);
        assert_eq!(axp_cloud_aabb(cloud, 9, lo.as_mut_ptr(), hi.as_mut_ptr()), AxpStatus::Geometry);
        assert!(!last_error().is_empty());
        axp_cloud_free(cloud);
        axp_cloud_free(ptr::null_mut());
        assert_eq!(axp_cloud_len(ptr::null()), 0);
    }
}

#[test]
fn null_and_bad_inputs_report_codes() {
    let mut cloud = ptr::null_mut();
    unsafe {
        assert_eq!(axp_cloud_load(ptr::null(), &mut cloud), AxpStatus::NullPointer);
        let missing = CString::new("/nonexistent/scene.ply").unwrap();
        assert_eq!(axp_cloud_load(missing.as_ptr(), &mut cloud), AxpStatus::Io);
        assert!(last_error().contains("scene.ply"));
        let bad = [0xffu8, 0];
        assert_eq!(axp_cloud_load(bad.as_ptr().cast(), &mut cloud), AxpStatus::InvalidUtf8);
        let mut cfg = ptr::null_mut();
        let o = CString::new("rig.n_views=0").unwrap();
        let list = [o.as_ptr()];
        assert_eq!(axp_config_load(ptr::null(), list.as_ptr(), 1, &mut cfg), AxpStatus::Config);
        assert!(last_error().contains("n_views"));
    }
}

#[test]
fn metrics_match_closed_forms() {
    let p = [3.0, 0.5, 0.5];
    let (lo, hi) = ([0.0; 3], [1.0; 3]);
    unsafe {
        assert_eq!(axp_dist_to_center(p.as_ptr(), lo.as_ptr(), hi.as_ptr()), 2.5);
        assert_eq!(axp_dist_to_bbx(p.as_ptr(), lo.as_ptr(), hi.as_ptr()), 2.0);
        assert!(axp_dist_to_bbx(ptr::null(), lo.as_ptr(), hi.as_ptr()).is_nan());
        // half-overlapping unit boxes have IoU 1/3
        let pred = [0.5, 0.0, 0.0, 1.5, 1.0, 1.0];
        let truth = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let mut acc = -1.0;
        assert_eq!(axp_acc_at_iou(pred.as_ptr(), truth.as_ptr(), 1, 0.25, &mut acc), AxpStatus::Ok);
        assert_eq!(acc, 1.0);
        assert_eq!(axp_acc_at_iou(pred.as_ptr(), truth.as_ptr(), 1, 0.5, &mut acc), AxpStatus::Ok);
        assert_eq!(acc, 0.0);
    }
}

#[test]
fn mock_eval_through_the_c_api() {
    let dir = tempfile::tempdir().unwrap();
    let overrides: Vec<CString> = [
        "scenes.synthetic=2".to_string(),
        "rig.image_size=64".to_string(),
        "rig.n_views=1".to_string(),
        "points.budget=100".to_string(),
        format!("output_dir={:?}", dir.path().display().to_string()),
    ]
    .into_iter()
    .map(|s| CString::new(s).unwrap())
    .collect();
    let ptrs: Vec<_> = overrides.iter().map(|s| s.as_ptr()).collect();
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(axp_config_load(ptr::null(), ptrs.as_ptr(), ptrs.len(), &mut cfg), AxpStatus::Ok);
        let mut n = 0;
        assert_eq!(axp_render(cfg, &mut n), AxpStatus::Ok);
        assert_eq!(n, 2);
        let mut s = std::mem::zeroed::<AxpSummary>();
        assert_eq!(axp_eval_mock(cfg, &mut s), AxpStatus::Ok);
        assert_eq!(s.nrmse_center, 0.0);
        assert_eq!(s.nrmse_bbx, 0.0);
        assert!(s.success_rate.is_nan());
        assert_eq!(s.n_scenes, 2);
        assert_eq!(s.isolation_violations, 0);
        axp_config_free(cfg);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/axisprompt.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["axp_cloud_load", "axp_config_load", "axp_eval_mock", "axp_last_error", "AXP_STATUS_OK"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"axisprompt.h\"\nint main(void) {\n  double p[3] = {3, 0.5, 0.5}, lo[3] = {0, 0, 0}, hi[3] = {1, 1, 1};\n  AxpCloud *c = 0;\n  if (axp_cloud_load(0, &c) != AXP_STATUS_NULL_POINTER) return 1;\n  return axp_dist_to_bbx(p, lo, hi) == 2.0 ? 0 : 2;\n}\n",
    )
    .unwrap();
    let Ok(status) = Command::new("cc")
        .arg("-std=c99")
        .arg("-fsyntax-only")
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
    else {
        eprintln!("no C compiler on PATH; header syntax check skipped");
        return;
    };
    assert!(status.success(), "header does not compile as C99");
}
