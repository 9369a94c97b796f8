//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use axisprompt::cli::{
    ablation_arms, cmd_ablate, run_eval, synthetic_scene, EvalMode, PipelineConfig, Sweep,
    MARK_ARMS, VIEW_COUNTS,
};
use axisprompt::client::{mock_oracle, read_transcript, OracleConfig};
use axisprompt::eval::{
    acc_at_iou, nrmse, route_success, score_response, summarize, EvalThresholds, ObjectTruth,
    RouteCriteria, SceneErrors, SceneTruth, TaskQuery,
};
use axisprompt::geometry::{
    compute_aabb, compute_obb, estimate_normals, extract_edge_points, normalize_scene,
    parse_point_file, write_ply, Aabb, Align, CameraIntrinsics, PointCloud, PointFileFormat,
    SceneFrame, Vec3,
};
use axisprompt::marks::{
    contour_from_mask, letter_position, overlay_marks, plan_marks, project_plan_masks, Bitmap,
    InstanceMask, MarkStyle, MarkVariant, POINT_MARK_OFFSET_PX,
};
use axisprompt::prompt::{AnswerShape, PromptBundle, TaskTemplate, COT_PREFIX};
use axisprompt::render::{
    make_camera_rig, render_view, splat_span, Camera, Overlay3d, Projection, LETTER_DISC_RADIUS_PX,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn small_config(dir: &std::path::Path, extra: &[&str]) -> PipelineConfig {
    let mut o: Vec<String> = vec![
        "rig.image_size=128".into(),
        "points.budget=300".into(),
        format!("output_dir={:?}", dir.display().to_string()),
    ];
    o.extend(extra.iter().map(|s| s.to_string()));
    PipelineConfig::from_toml_str("", &o).expect("valid test config")
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rand_vec(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec3 {
    Vec3::new(r.random_range(lo..hi), r.random_range(lo..hi), r.random_range(lo..hi))
}

// 1
fn closed_loop_zero_error() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let t0 = Instant::now();
    let mut out = Vec::new();
    for shape in ["point", "box"] {
        let cfg = small_config(
            &dir.path().join(shape),
            &["scenes.synthetic=5", "rig.n_views=8", &format!("task.answer_shape={shape:?}")],
        );
        let r = run_eval(&cfg, EvalMode::Mock, &dir.path().join(shape).join("eval"), shape)
            .map_err(|e| e.to_string())?;
        let s = &r.summary;
        ensure!(s.n_scenes == 5, "{} scenes", s.n_scenes);
        ensure!(
            s.nrmse_center == Some(0.0) && s.nrmse_bbx == Some(0.0),
            "{shape}: nrmse center {:?} bbx {:?}",
            s.nrmse_center,
            s.nrmse_bbx
        );
        out.push(format!("{shape}: {} objects", s.n_objects));
    }
    let secs = t0.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1} s");
    Ok(format!("NRMSE 0 for {} in {secs:.1} s", out.join(", ")))
}

// 2
fn nrmse_hand_oracle() -> Outcome {
    let one = nrmse(&[SceneErrors {
        distances: vec![Some(1.0)],
        normalizer: 4.0,
    }])
    .map_err(|e| e.to_string())?;
    ensure!((one - 0.25).abs() <= 1e-12, "single-object fixture gave {one}");

    // 12 localize answers over 3 scenes, scored through the parser
    let offsets: [[f64; 3]; 12] = [
        [1.0, 0.0, 0.0],
        [0.0, 2.0, 0.0],
        [0.3, 0.4, 0.0],
        [0.0, 0.0, 0.0],
        [0.5, 0.5, 0.5],
        [-1.0, 2.0, -2.0],
        [0.1, 0.0, 0.0],
        [0.0, 0.0, 3.0],
        [2.0, 2.0, 1.0],
        [0.0, -0.6, 0.8],
        [0.25, 0.0, 0.0],
        [0.0, 0.0, 0.0],
    ];
    let normalizers = [4.0, 2.5, 10.0];
    let mut records = Vec::new();
    let mut expected_center = 0.0;
    let mut expected_bbx = 0.0;
    for (s, &norm) in normalizers.iter().enumerate() {
        let letters = ['A', 'B', 'C', 'D'];
        let mut objects = Vec::new();
        let mut lines = Vec::new();
        let (mut sum_c, mut sum_b) = (0.0, 0.0);
        for (k, &l) in letters.iter().enumerate() {
            let lo = Vec3::new(k as f64, s as f64, 0.0);
            let bbox = Aabb::from_corners(lo, lo + Vec3::new(0.5, 0.5, 1.0));
            objects.push(ObjectTruth {
                instance_id: k as u32 + 1,
                letter: l,
                bbox,
                label: None,
            });
            let o = Vec3::from(offsets[s * 4 + k]);
            let p = bbox.center() + o;
            if s == 2 && k == 3 {
                // no answer for this object: counts as a normalized error of 1
                sum_c += 1.0;
                sum_b += 1.0;
                continue;
            }
            lines.push(format!("{l}: ({}, {}, {})", p.x, p.y, p.z));
            sum_c += o.norm() / norm;
            // brute-force box distance per axis
            let gap = |v: f64, a: f64, b: f64| (a - v).max(0.0).max(v - b);
            let g = Vec3::new(
                gap(p.x, bbox.min.x, bbox.max.x),
                gap(p.y, bbox.min.y, bbox.max.y),
                gap(p.z, bbox.min.z, bbox.max.z),
            );
            sum_b += g.norm() / norm;
        }
        expected_center += sum_c / 4.0;
        expected_bbx += sum_b / 4.0;
        let truth = SceneTruth {
            scene_id: format!("s{s}"),
            normalizer: norm,
            objects,
            keypoints: BTreeMap::new(),
        };
        let t = TaskTemplate::localize(&letters, AnswerShape::Point);
        let q = TaskQuery {
            kind: t.kind,
            answer_shape: t.answer_shape,
            slots: t.slots.clone(),
        };
        records.extend(
            score_response(&q, &lines.join("\n"), &truth, &EvalThresholds::default())
                .map_err(|e| e.to_string())?,
        );
    }
    expected_center /= 3.0;
    expected_bbx /= 3.0;
    ensure!(records.len() == 12, "{} records", records.len());
    let s = summarize(&records).map_err(|e| e.to_string())?;
    let (c, b) = (s.nrmse_center.unwrap_or(f64::NAN), s.nrmse_bbx.unwrap_or(f64::NAN));
    ensure!((c - expected_center).abs() <= 1e-9, "center {c} vs {expected_center}");
    ensure!((b - expected_bbx).abs() <= 1e-9, "bbx {b} vs {expected_bbx}");
    Ok(format!("single fixture {one}; 12-record fixture center {c:.9} bbx {b:.9}"))
}

// 3
fn bbx_never_exceeds_center() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = 0;
    for (k, (sigma, fail, shape)) in [(0.1, 0.0, "point"), (0.5, 0.2, "point"), (1.5, 0.1, "box"), (0.3, 0.0, "box")]
        .into_iter()
        .enumerate()
    {
        let d = dir.path().join(k.to_string());
        let cfg = small_config(
            &d,
            &[
                "scenes.synthetic=4",
                "rig.n_views=1",
                "rig.image_size=64",
                &format!("mock.noise_sigma={sigma}"),
                &format!("mock.failure_rate={fail}"),
                &format!("task.answer_shape={shape:?}"),
                &format!("seed={k}"),
            ],
        );
        let r = run_eval(&cfg, EvalMode::Mock, &d, "run").map_err(|e| e.to_string())?;
        for rec in &r.records {
            if let (Some(c), Some(b)) = (rec.d_center, rec.d_bbx) {
                ensure!(b <= c, "record {} of {}: bbx {b} > center {c}", rec.instance_id, rec.scene_id);
            }
        }
        let (c, b) = (r.summary.nrmse_center.unwrap(), r.summary.nrmse_bbx.unwrap());
        ensure!(b <= c, "run {k}: bbx {b} > center {c}");
        runs += 1;
    }
    Ok(format!("{runs} noisy runs, pointwise and aggregate"))
}

fn brute_knn(points: &[Vec3], q: &Vec3, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| (points[a] - q).norm_squared().total_cmp(&(points[b] - q).norm_squared()).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

// 4
fn geometry_oracles() -> Outcome {
    let mut r = rng(4);
    for case in 0..100 {
        // AABB against min/max by hand
        let n = r.random_range(1..60);
        let pts: Vec<Vec3> = (0..n).map(|_| rand_vec(&mut r, -5.0, 5.0)).collect();
        let b = compute_aabb(&PointCloud::from_positions(pts.clone()), None).map_err(|e| e.to_string())?;
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in &pts {
            for i in 0..3 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        ensure!(b.min == lo && b.max == hi, "aabb case {case}");
    }
    for case in 0..100 {
        // OBB: contains every point, touches all six faces, and the points'
        // covariance is diagonal in its frame
        let n = r.random_range(8..80);
        let scale = rand_vec(&mut r, 0.2, 3.0);
        let rot = nalgebra::Rotation3::from_euler_angles(
            r.random_range(-3.0..3.0),
            r.random_range(-3.0..3.0),
            r.random_range(-3.0..3.0),
        );
        let pts: Vec<Vec3> = (0..n)
            .map(|_| rot * rand_vec(&mut r, -1.0, 1.0).component_mul(&scale) + Vec3::new(2.0, -1.0, 0.5))
            .collect();
        let cloud = PointCloud {
            instance_ids: Some(vec![Some(1); n]),
            ..PointCloud::from_positions(pts.clone())
        };
        let obb = compute_obb(&cloud, 1).map_err(|e| e.to_string())?;
        let mut touched = [[false; 2]; 3];
        let mut cov = nalgebra::Matrix3::<f64>::zeros();
        let mean = pts.iter().fold(Vec3::zeros(), |a, p| a + p) / n as f64;
        for p in &pts {
            let d = p - obb.center;
            let local = Vec3::new(obb.axes[0].dot(&d), obb.axes[1].dot(&d), obb.axes[2].dot(&d));
            for i in 0..3 {
                let h = obb.half_extents[i];
                ensure!(local[i].abs() <= h + 1e-9, "obb case {case}: point outside");
                touched[i][0] |= (local[i] + h).abs() <= 1e-9;
                touched[i][1] |= (local[i] - h).abs() <= 1e-9;
            }
            let m = p - mean;
            let l = Vec3::new(obb.axes[0].dot(&m), obb.axes[1].dot(&m), obb.axes[2].dot(&m));
            cov += l * l.transpose();
        }
        ensure!(touched.iter().flatten().all(|t| *t), "obb case {case}: loose face");
        for i in 0..3 {
            ensure!((obb.axes[i].norm() - 1.0).abs() < 1e-9, "obb case {case}: axis not unit");
            for j in 0..3 {
                if i != j {
                    ensure!(obb.axes[i].dot(&obb.axes[j]).abs() < 1e-9, "obb case {case}: axes not orthogonal");
                    ensure!(cov[(i, j)].abs() <= 1e-8 * cov.trace().max(1e-12), "obb case {case}: not principal");
                }
            }
        }
    }
    for case in 0..100 {
        // normals of a planar patch equal the plane normal
        let normal = rand_vec(&mut r, -1.0, 1.0).normalize();
        let u = normal.cross(&Vec3::new(0.3, 0.5, 0.7)).normalize();
        let v = normal.cross(&u);
        let pts: Vec<Vec3> = (0..40)
            .map(|_| u * r.random_range(-1.0..1.0) + v * r.random_range(-1.0..1.0))
            .collect();
        let out = estimate_normals(&PointCloud::from_positions(pts), 8).map_err(|e| e.to_string())?;
        for nrm in out.normals.unwrap() {
            ensure!(nrm.dot(&normal).abs() > 1.0 - 1e-6, "normals case {case}");
        }
    }
    for case in 0..100 {
        // edge points against brute-force neighbors and pairwise angles
        let n = r.random_range(10..50);
        let k = r.random_range(3..8);
        let th = r.random_range(10.0..80.0);
        let pts: Vec<Vec3> = (0..n).map(|_| rand_vec(&mut r, 0.0, 1.0)).collect();
        let normals: Vec<Vec3> = (0..n).map(|_| rand_vec(&mut r, -1.0, 1.0).normalize()).collect();
        let cloud = PointCloud {
            normals: Some(normals.clone()),
            ..PointCloud::from_positions(pts.clone())
        };
        let got = extract_edge_points(&cloud, k, th).map_err(|e| e.to_string())?;
        let want: std::collections::BTreeSet<usize> = (0..n)
            .filter(|&i| {
                let nb = brute_knn(&pts, &pts[i], k);
                nb.iter().any(|&a| {
                    nb.iter().any(|&b| normals[a].dot(&normals[b]).abs().min(1.0).acos().to_degrees() >= th)
                })
            })
            .collect();
        ensure!(got == want, "edge case {case}: {got:?} vs {want:?}");
    }
    let mut ply_cases = 0;
    for (i, seed) in (0..4).zip(10u64..) {
        let mut cloud = synthetic_scene(i, seed);
        cloud.normals = Some(cloud.positions.iter().map(|_| Vec3::z()).collect());
        for binary in [false, true] {
            let bytes = write_ply(&cloud, binary);
            let fmt = if binary { PointFileFormat::PlyBinaryLe } else { PointFileFormat::PlyAscii };
            let back = parse_point_file(&bytes, fmt).map_err(|e| e.to_string())?;
            ensure!(write_ply(&back, binary) == bytes, "ply round trip {i} binary={binary}");
            ply_cases += 1;
        }
    }
    Ok(format!("aabb/obb/normals/edge points 100 cases each; {ply_cases} byte-identical PLY round trips"))
}

fn fuzzed_frame(r: &mut ChaCha8Rng, n: usize) -> SceneFrame {
    let pts: Vec<Vec3> = (0..n).map(|_| rand_vec(r, 0.0, 2.0)).collect();
    let colors = (0..n).map(|_| [r.random_range(0..255u8), 100, 50]).collect();
    SceneFrame::identity(PointCloud {
        colors: Some(colors),
        ..PointCloud::from_positions(pts)
    })
}

// 5
fn renderer_soundness() -> Outcome {
    let mut r = rng(5);
    let mut checked = 0usize;
    for case in 0..20 {
        let frame = fuzzed_frame(&mut r, 300);
        let cams = make_camera_rig(&frame, 3, 35.0, 1.5);
        for cam in &cams {
            let cam = Camera { intr: CameraIntrinsics::from_fov(160, 120, 60.0), ..*cam };
            let view = render_view(&frame, &Overlay3d::default(), &cam, 1);
            for (i, p) in frame.cloud.positions.iter().enumerate() {
                let Some(q) = cam.project(p) else { continue };
                let (u, v) = (q.u.round(), q.v.round());
                if u < 0.0 || v < 0.0 || u >= 160.0 || v >= 120.0 {
                    continue;
                }
                if view.index_at(u as u32, v as u32) != Some(i as u32) {
                    continue;
                }
                let back = cam.unproject(q.u, q.v, view.depth_at(u as u32, v as u32));
                ensure!((back - p).norm() <= 1e-3, "round trip case {case}: {}", (back - p).norm());
                checked += 1;
            }
        }
    }
    ensure!(checked > 1000, "only {checked} visible points checked");

    let scene = normalize_scene(&synthetic_scene(0, 1), Align::Pca).map_err(|e| e.to_string())?;
    let cam = make_camera_rig(&scene, 1, 35.0, 1.2)[0];
    let hash = || hex(&Sha256::digest(render_view(&scene, &Overlay3d::default(), &cam, 2).png_bytes()));
    let (h1, h2) = (hash(), hash());
    ensure!(h1 == h2, "golden hash changed between runs");

    for case in 0..5 {
        let frame = fuzzed_frame(&mut r, 40);
        let cam = Camera::look_at(
            Vec3::new(1.0, -3.0, 2.5),
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::z(),
            CameraIntrinsics::from_fov(48, 40, 60.0),
            Projection::Perspective,
        );
        let splat = 2;
        let view = render_view(&frame, &Overlay3d::default(), &cam, splat);
        for v in 0..40i64 {
            for u in 0..48i64 {
                let mut best = f64::INFINITY;
                for p in &frame.cloud.positions {
                    if let Some(q) = cam.project(p) {
                        let (u0, u1) = splat_span(q.u, splat);
                        let (v0, v1) = splat_span(q.v, splat);
                        if (u0..=u1).contains(&u) && (v0..=v1).contains(&v) {
                            best = best.min(q.depth);
                        }
                    }
                }
                ensure!(view.depth_at(u as u32, v as u32) == best, "depth case {case} pixel ({u},{v})");
            }
        }
    }
    Ok(format!("{checked} round trips within 1 mm; golden {}..; 5 depth buffers exact", &h1[..12]))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

// 6
fn mark_fidelity() -> Outcome {
    let mut r = rng(6);
    let mut rings = vec![];
    for (w, h) in [(10u32, 10u32), (1, 1), (3, 17)].into_iter().chain((0..20).map(|_| (r.random_range(1..30), r.random_range(1..30)))) {
        let (x0, y0) = (20, 20);
        let bitmap = Bitmap::from_fn(80, 80, |u, v| (x0..x0 + w).contains(&u) && (y0..y0 + h).contains(&v));
        let ring = contour_from_mask(&InstanceMask { instance_id: 1, bitmap }, 4).map_err(|e| e.to_string())?;
        let want = ((w + 8) * (h + 8) - w * h) as usize;
        ensure!(ring.count() == want, "{w}x{h}: ring {} vs {want}", ring.count());
        rings.push(want);
    }
    ensure!(rings[0] == 224, "10x10 ring {}", rings[0]);

    let scene = normalize_scene(&synthetic_scene(2, 3), Align::Pca).map_err(|e| e.to_string())?;
    let cam = make_camera_rig(&scene, 1, 35.0, 1.2)[0];
    let cam = Camera { intr: CameraIntrinsics::from_fov(256, 256, 60.0), ..cam };
    let base = render_view(&scene, &Overlay3d::default(), &cam, 2);
    let variants = [
        MarkVariant::MarkPlusContour,
        MarkVariant::MaskFill,
        MarkVariant::Bbox2d,
        MarkVariant::Polygon2d,
        MarkVariant::Point2d,
        MarkVariant::LetterMark,
    ];
    let mut changed = 0;
    for variant in variants {
        let plan = plan_marks(&scene.cloud, &MarkStyle::new(variant), None).map_err(|e| e.to_string())?;
        let masks = project_plan_masks(&base, &scene, &plan).map_err(|e| e.to_string())?;
        let marked = overlay_marks(&base, &masks, &plan).map_err(|e| e.to_string())?;
        ensure!(marked.image != base.image, "{variant:?} drew nothing");
        let mut allowed = Bitmap::new(256, 256);
        for m in masks.iter().filter(|m| !m.is_empty()) {
            let b = &m.bitmap;
            let ring = b.dilate(plan.entries[0].style.dilation_px);
            let (u0, v0, u1, v1) = b.bounds().unwrap();
            let (lu, lv) = letter_position(b).unwrap();
            let (lu, lv) = if variant == MarkVariant::Point2d {
                (lu + POINT_MARK_OFFSET_PX, lv - POINT_MARK_OFFSET_PX)
            } else {
                (lu, lv)
            };
            let (cu, cv) = b.centroid().unwrap();
            let disc = LETTER_DISC_RADIUS_PX + 1;
            allowed = allowed.or(&Bitmap::from_fn(256, 256, |u, v| {
                let (ui, vi) = (u as i64, v as i64);
                ring.get(u, v)
                    || ((u0..=u1).contains(&u) && (v0..=v1).contains(&v))
                    || (ui - lu).pow(2) + (vi - lv).pow(2) <= disc * disc
                    || ((u as f64 - cu).abs() <= 2.0 && (v as f64 - cv).abs() <= 2.0)
            }));
        }
        for (u, v, px) in marked.image.enumerate_pixels() {
            if px != base.image.get_pixel(u, v) {
                ensure!(allowed.get(u, v), "{variant:?} changed pixel ({u},{v}) outside mark regions");
                changed += 1;
            }
        }
    }
    Ok(format!("{} ring counts exact (10x10 -> 224); {changed} overlay pixels all inside mark regions", rings.len()))
}

// 7
fn ablation_machinery() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = small_config(
        dir.path(),
        &["scenes.synthetic=5", "rig.image_size=64", "mock.noise_sigma=0.3", "mock.view_gain=0.5"],
    );
    let names = |s| ablation_arms(&cfg, s).into_iter().map(|a| a.name).collect::<Vec<_>>();
    ensure!(names(Sweep::Views) == VIEW_COUNTS.map(|n| format!("views_{n}")), "views arms {:?}", names(Sweep::Views));
    ensure!(
        names(Sweep::AxisElements) == ["full", "no_ticks", "no_labels", "none"],
        "axis arms {:?}",
        names(Sweep::AxisElements)
    );
    ensure!(
        names(Sweep::MarkStyle) == MARK_ARMS.map(|a| a.0.to_string()),
        "mark arms {:?}",
        names(Sweep::MarkStyle)
    );
    let rows = cmd_ablate(&cfg, Sweep::Views, EvalMode::Mock).map_err(|e| e.to_string())?;
    let errs: Vec<f64> = rows.iter().map(|(_, s)| s.nrmse_center.unwrap()).collect();
    ensure!(errs.windows(2).all(|w| w[1] < w[0]), "view trend not decreasing: {errs:?}");
    let axis_rows = cmd_ablate(&cfg, Sweep::AxisElements, EvalMode::Mock).map_err(|e| e.to_string())?;
    ensure!(axis_rows.len() == 4, "{} axis rows", axis_rows.len());
    let table = std::fs::read_to_string(dir.path().join("ablate/views/report.md")).map_err(|e| e.to_string())?;
    ensure!(table.lines().count() >= 6, "views table too short");
    let gain = 1.0 - errs[3] / errs[0];
    Ok(format!(
        "arms 4/4/9; NRMSE by views {:?}; 8 views vs 1: {:.0}% lower",
        errs.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>(),
        gain * 100.0
    ))
}

// 8
fn noise_monotonicity() -> Outcome {
    const SAMPLES: usize = 1000;
    let sigmas = [0.0, 0.1, 0.2, 0.4];
    let bbox = Aabb::from_corners(Vec3::new(0.5, 1.5, 0.0), Vec3::new(1.5, 2.5, 1.0));
    let t = TaskTemplate::localize(&['A'], AnswerShape::Point);
    let mut prev = -1.0;
    let mut report = Vec::new();
    // expected |N(0, s^2 I3)| from an independent Monte-Carlo run
    let mut mc = rng(88);
    let mc_unit: f64 = (0..200_000)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut mc);
            let y: f64 = StandardNormal.sample(&mut mc);
            let z: f64 = StandardNormal.sample(&mut mc);
            (x * x + y * y + z * z).sqrt()
        })
        .sum::<f64>()
        / 200_000.0;
    for &sigma in &sigmas {
        let cfg = OracleConfig {
            noise_sigma: sigma,
            seed: 2024,
            ..OracleConfig::default()
        };
        let mut records = Vec::new();
        for i in 0..SAMPLES {
            let truth = SceneTruth {
                scene_id: format!("mc_{i:04}"),
                normalizer: 1.0,
                objects: vec![ObjectTruth {
                    instance_id: 1,
                    letter: 'A',
                    bbox,
                    label: None,
                }],
                keypoints: BTreeMap::new(),
            };
            let bundle = PromptBundle {
                scene_id: truth.scene_id.clone(),
                images: vec![Vec::new()],
                points_text: None,
                task_text: t.render(false).map_err(|e| e.to_string())?,
                cot: false,
                template_kind: t.kind,
                answer_shape: t.answer_shape,
                slots: t.slots.clone(),
                mark_style: None,
            };
            let resp = mock_oracle(&bundle, &truth, &cfg).map_err(|e| e.to_string())?;
            let q = TaskQuery::from_bundle(&bundle);
            records.extend(score_response(&q, &resp.text, &truth, &EvalThresholds::default()).map_err(|e| e.to_string())?);
        }
        let s = summarize(&records).map_err(|e| e.to_string())?;
        let e = s.nrmse_center.unwrap();
        ensure!(e > prev, "NRMSE {e} at sigma {sigma} does not exceed {prev}");
        let expected = sigma * mc_unit;
        if sigma > 0.0 {
            let rel = (e - expected).abs() / expected;
            ensure!(rel <= 0.05, "sigma {sigma}: mean error {e} vs expectation {expected} ({:.1}%)", rel * 100.0);
        } else {
            ensure!(e == 0.0, "sigma 0 gave {e}");
        }
        report.push(format!("{sigma}: {e:.4} (mc {expected:.4})"));
        prev = e;
    }
    Ok(report.join(", "))
}

// 9
fn session_isolation() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = small_config(dir.path(), &["scenes.synthetic=10", "rig.n_views=2", "rig.image_size=96"]);
    let r = run_eval(&cfg, EvalMode::Mock, dir.path(), "mock").map_err(|e| e.to_string())?;
    ensure!(r.requests_sent == 10, "{} requests for 10 scenes", r.requests_sent);
    ensure!(r.isolation_violations.is_empty(), "violations: {:?}", r.isolation_violations);
    let t = read_transcript(&dir.path().join("transcript.jsonl")).map_err(|e| e.to_string())?;
    let scenes: std::collections::BTreeSet<_> = t.iter().map(|e| &e.scene_id).collect();
    let hashes: std::collections::BTreeSet<_> = t.iter().map(|e| &e.request_hash).collect();
    ensure!(t.len() == 10 && scenes.len() == 10 && hashes.len() == 10, "transcript has {} lines, {} scenes, {} hashes", t.len(), scenes.len(), hashes.len());
    Ok("10 scenes, 10 single-message requests, no shared payloads".into())
}

// 10
fn metric_unit_cases() -> Outcome {
    let unit = Aabb::from_corners(Vec3::zeros(), Vec3::repeat(1.0));
    let half = Aabb::from_corners(Vec3::new(0.5, 0.0, 0.0), Vec3::new(1.5, 1.0, 1.0));
    let iou = half.iou(&unit);
    ensure!(iou == 1.0 / 3.0, "half-overlap IoU {iou}");
    let at = |th| acc_at_iou(&[Some(half)], &[unit], th).map_err(|e| e.to_string());
    ensure!(at(1.0 / 3.0)? == 1.0 && at(0.34)? == 0.0, "acc threshold edge");

    let start = Aabb::from_corners(Vec3::new(0.0, 0.25, 0.0), Vec3::new(0.5, 0.75, 0.5));
    let goal = Aabb::from_corners(Vec3::new(3.0, 0.25, 0.0), Vec3::new(3.5, 0.75, 0.5));
    let path = [Vec3::new(0.25, 0.5, 0.25), Vec3::new(3.25, 0.5, 0.25)];
    let crit = RouteCriteria::with_clearance(0.125);
    let wall = |y0: f64| Aabb::from_corners(Vec3::new(1.5, y0, 0.0), Vec3::new(2.0, 2.0, 1.0));
    ensure!(route_success(&path, &start, &goal, &[wall(0.625)], &crit), "exact clearance rejected");
    ensure!(!route_success(&path, &start, &goal, &[wall(0.625 - 1e-9)], &crit), "grazing violation accepted");

    let text = TaskTemplate::grasp('A').render(true).map_err(|e| e.to_string())?;
    ensure!(COT_PREFIX.as_bytes().starts_with(b"Let's think step by step."), "prefix bytes {COT_PREFIX:?}");
    ensure!(text.as_bytes().starts_with("Let's think step by step.".as_bytes()), "rendered task {text:?}");
    Ok("IoU 1/3 exact; clearance flips at 0.125 m; CoT prefix byte-exact".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("closed-loop zero error", closed_loop_zero_error),
        ("normalized error hand oracle", nrmse_hand_oracle),
        ("to-bbx never exceeds to-center", bbx_never_exceeds_center),
        ("geometry oracles", geometry_oracles),
        ("renderer soundness", renderer_soundness),
        ("mark fidelity", mark_fidelity),
        ("ablation machinery", ablation_machinery),
        ("noise monotonicity", noise_monotonicity),
        ("session isolation", session_isolation),
        ("metric unit cases", metric_unit_cases),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail} ({secs:.1} s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {why} ({secs:.1} s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
