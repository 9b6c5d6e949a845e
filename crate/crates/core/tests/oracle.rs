mod common;

use circlepose::disambiguate::same_side_condition;
use circlepose::ellipse_fit::sample_ellipse;
use circlepose::io::{parse_contour_csv, read_trial_csv, write_contour_csv, write_trial_csv};
use circlepose::pencil::decompose_pencil;
use circlepose::pipeline::{estimate_pose, SidePrior};
use circlepose::simulator::experiment::{run_experiment, ExperimentConfig};
use circlepose::simulator::prop2::world_base_points;
use circlepose::simulator::{make_scene, side_scene};
use circlepose::{fit_ellipse, CameraIntrinsics, Conic, SceneSideInfo};
use common::*;
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

fn hd() -> CameraIntrinsics {
    CameraIntrinsics::new(1280.0, 1280, 720).unwrap()
}

#[test]
fn oracle_cubic_on_diagonal_pencil() {
    let a = Matrix3::from_diagonal(&Vector3::new(3.0, -1.0, -0.5));
    let (l, v) = pencil_oracle(&a, &Matrix3::identity());
    let s = det(&a).cbrt();
    let want = [3.0 / s, -0.5 / s, -1.0 / s];
    for i in 0..3 {
        assert!((l[i] - want[i]).abs() < 1e-12, "{l:?}");
    }
    assert!(angle(&v[0], &Vector3::x()) < 1e-12);
    assert!(angle(&v[2], &Vector3::y()) < 1e-12);
}

#[test]
fn oracle_limit_points_camera_overhead() {
    // Camera straight above q at unit height, circle of radius 1 at (0, 2):
    // the limit points are (0, −1/φ) and (0, φ), inverse in both circles.
    let [a, b] = limit_points(std::f64::consts::FRAC_PI_2, 0.0, 2.0, 1.0);
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let mut ys = [a.y, b.y];
    ys.sort_by(f64::total_cmp);
    assert!(
        (ys[0] + 1.0 / phi).abs() < 1e-12 && (ys[1] - phi).abs() < 1e-12,
        "{ys:?}"
    );
    assert!(a.x.abs() < 1e-15 && b.x.abs() < 1e-15);
}

#[test]
fn oracle_isotonic_and_spearman() {
    assert_eq!(isotonic(&[1.0, 3.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
    assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
    assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
}

#[test]
fn world_base_points_match_limit_points() {
    for &(t, x, y, r) in &[
        (0.3, 0.2, 0.5, 0.1),
        (1.2, -0.4, 1.5, 0.2),
        (0.8, 0.0, -0.3, 0.05),
    ] {
        let info = SceneSideInfo::new(t, x, y, r).unwrap();
        let lib = world_base_points(&info).unwrap();
        let ora = limit_points(t, x, y, r);
        let d = |p: &nalgebra::Vector2<f64>| {
            ora.iter().map(|q| (p - q).norm()).fold(f64::MAX, f64::min)
        };
        assert!(d(&lib[0]) < 1e-9 && d(&lib[1]) < 1e-9, "{lib:?} vs {ora:?}");
    }
}

#[test]
fn contour_csv_round_trip_and_fit() {
    let s = make_scene(40.0, 20.0, &hd()).unwrap();
    let pts = sample_ellipse(&s.c_true, 50, 0.0, 3).unwrap();
    let mut buf = Vec::new();
    write_contour_csv(&pts, &mut buf).unwrap();
    let back = parse_contour_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
    let fitted = fit_ellipse(&back).unwrap();
    assert!(fitted.projective_distance(&s.c_true) < 1e-9);
}

#[test]
fn trial_csv_round_trip() {
    let cfg = ExperimentConfig {
        alpha_deg: vec![30.0],
        r_over_d: vec![15.0, 40.0],
        focal_modifiers: vec![0.85, 1.0],
        trials: 3,
        seed: 11,
        ..Default::default()
    };
    let rows = run_experiment(&cfg).unwrap();
    let mut buf = Vec::new();
    write_trial_csv(&rows, &mut buf).unwrap();
    let back = read_trial_csv(buf.as_slice()).unwrap();
    assert_eq!(back.len(), rows.len());
    for (a, b) in rows.iter().zip(&back) {
        assert_eq!(
            (a.alpha_deg, a.r_over_d, a.modifier, a.trial),
            (b.alpha_deg, b.r_over_d, b.modifier, b.trial)
        );
        assert_eq!(a.err_reproj_px.to_bits(), b.err_reproj_px.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pencil_matches_closed_form(alpha in 12.0f64..88.0, r in 4.0f64..60.0, f in 700.0f64..2500.0) {
        let k = CameraIntrinsics::new(f, 1280, 720).unwrap();
        let Ok(s) = make_scene(alpha, r, &k) else { return Ok(()) };
        let p = decompose_pencil(&s.c_true, &k.iac()).unwrap();
        let (l, v) = pencil_oracle(s.c_true.matrix(), k.iac().matrix());
        let scale = l[0].abs().max(l[2].abs());
        for i in 0..3 {
            prop_assert!((p.lambdas[i] - l[i]).abs() <= 1e-9 * scale, "{:?} vs {:?}", p.lambdas, l);
        }
        // Outer eigenvectors are simple; the middle one may be ill-conditioned
        // near the fronto-parallel limit.
        for i in [0, 2] {
            prop_assert!(angle(p.base_points[i].coords(), &v[i]) < 1e-7);
        }
    }

    #[test]
    fn side_polynomial_matches_brute_force(
        theta in 0.0f64..1.5, x in -2.0f64..2.0, y in -3.0f64..3.0, r in 0.01f64..1.5,
    ) {
        let info = SceneSideInfo::new(theta, x, y, r).unwrap();
        prop_assume!(info.side_polynomial().abs() > 1e-6);
        prop_assert_eq!(same_side_condition(&info), brute_same_side(theta, x, y, r));
    }

    #[test]
    fn known_side_selects_the_true_plane(
        theta in 0.1f64..1.45, x in -1.0f64..1.0, dy in 0.0f64..2.0, r in 0.005f64..0.3,
    ) {
        let info = SceneSideInfo::new(theta, x, 1.5 * r + dy, r).unwrap();
        let k = hd();
        let Ok((s, _)) = side_scene(&info, &k) else { return Ok(()) };
        let est = estimate_pose(&s.c_true, &k, 1.0, SidePrior::Known(info)).unwrap();
        let pose = est.selected_pose();
        prop_assert!(pose.is_some());
        prop_assert!(angle(&pose.unwrap().normal, &s.normal_true).to_degrees() < 1e-6);
    }

    #[test]
    fn projective_rescaling_leaves_pencil_unchanged(alpha in 15.0f64..80.0, r in 5.0f64..40.0, scale in -1e6f64..1e6) {
        prop_assume!(scale.abs() > 1e-6);
        let k = hd();
        let s = make_scene(alpha, r, &k).unwrap();
        let a = decompose_pencil(&s.c_true, &k.iac()).unwrap().lambdas;
        let scaled = Conic::new(s.c_true.matrix() * scale).unwrap();
        let b = decompose_pencil(&scaled, &k.iac()).unwrap().lambdas;
        for i in 0..3 {
            prop_assert!((a[i] - b[i]).abs() <= 1e-9 * a[0].abs().max(a[2].abs()));
        }
    }
}
