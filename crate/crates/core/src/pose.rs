//! Vanishing-line candidates and the plane pose each of them implies.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::conic::{invert, Conic, ConicKind, HomLine2};
use crate::error::{Error, Result};
use crate::intrinsics::CameraIntrinsics;
use crate::pencil::PencilDecomposition;
use crate::serde_mat;

const RADICAND_TOL: f64 = 1e-10;
const DEGENERATE_S_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Vanishing line, unit Euclidean norm.
    pub line: HomLine2,
    /// Plane normal `Kᵀv` in the camera frame, pointing toward the camera.
    #[serde(with = "serde_mat::vec3")]
    pub normal: Vector3<f64>,
}

/// The one or two vanishing lines compatible with an ellipse and `ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingCandidates {
    pub candidates: Vec<Candidate>,
    /// Fronto-parallel collapse: a single candidate.
    pub degenerate: bool,
}

/// Pose of the support plane relative to the camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePose {
    /// Unit normal in the camera frame; the camera lies on its positive side.
    #[serde(with = "serde_mat::vec3")]
    pub normal: Vector3<f64>,
    /// Orthogonal camera–plane distance, in marker-diameter units of the caller.
    pub distance: f64,
    /// Circle centre in the camera frame, same units as `distance`.
    #[serde(with = "serde_mat::vec3")]
    pub center: Vector3<f64>,
    /// Maps the unit-circle marker frame to the image; fixed up to an in-plane
    /// rotation of the marker frame. Unit Frobenius norm.
    #[serde(with = "serde_mat::mat3")]
    pub homography: Matrix3<f64>,
}

/// Both sign combinations of `√(λ1−λ2) ωz₁ ± √(λ2−λ3) ωz₃` with `zᵢᵀωzᵢ = 1`.
///
/// In calibrated coordinates (`ω = I`) this is the textbook split of `D₂` into
/// its two lines; written with `ω` it holds for any intrinsics.
pub fn vanishing_candidates(
    p: &PencilDecomposition,
    k: &CameraIntrinsics,
) -> Result<VanishingCandidates> {
    let [l1, l2, l3] = p.lambdas;
    let w = p.iac.matrix();
    let y1 = w * p.iac_normalized_base_point(0);
    let y3 = w * p.iac_normalized_base_point(2);

    let lines: Vec<Vector3<f64>> = if p.degenerate {
        let gap_tol = crate::pencil::COLLISION_TOL * l2.abs();
        match (l1 - l2 < gap_tol, l2 - l3 < gap_tol) {
            // D₂ collapses to a double line.
            (true, false) => vec![y3],
            (false, true) => vec![y1],
            _ => return Err(Error::InvalidPencil),
        }
    } else {
        let a = y1 * (l1 - l2).max(0.0).sqrt();
        let b = y3 * (l2 - l3).max(0.0).sqrt();
        vec![a + b, a - b]
    };

    let mut candidates = Vec::with_capacity(lines.len());
    for v in lines {
        let line = HomLine2::from_vector(v)?.unit();
        let normal = oriented_normal(&p.conic, &line, k)?;
        candidates.push(Candidate { line, normal });
    }
    Ok(VanishingCandidates {
        candidates,
        degenerate: p.degenerate,
    })
}

/// `Kᵀv` normalized and signed so that the circle centre (the pole of `v`)
/// lies on its negative side.
fn oriented_normal(c: &Conic, v: &HomLine2, k: &CameraIntrinsics) -> Result<Vector3<f64>> {
    let n = (k.k().transpose() * v.coords()).normalize();
    let center = crate::conic::pole(c, v)?;
    let ray = k.k_inv() * center.dehomogenized().ok_or(Error::DegenerateGeometry)?;
    Ok(if n.dot(&ray) > 0.0 { -n } else { n })
}

/// Similarity `S` (rotation + translation) with `S⁻ᵀ c S⁻¹` diagonal.
///
/// The returned conic is scaled so `C'₃₃ = −1`, which makes `C'₁₁, C'₂₂ > 0`;
/// the major axis is placed on x so `C'₁₁ ≤ C'₂₂`.
pub fn canonical_diagonalize(c: &Conic) -> Result<(Matrix3<f64>, Conic)> {
    if c.kind() != ConicKind::RealEllipse {
        return Err(Error::NotAnEllipse);
    }
    let g = c.ellipse_geometry()?;
    let (s, co) = g.angle.sin_cos();
    // Rotate by −angle after moving the centre to the origin.
    #[rustfmt::skip]
    let sim = Matrix3::new(
        co, s, -(co * g.center.x + s * g.center.y),
        -s, co, -(-s * g.center.x + co * g.center.y),
        0.0, 0.0, 1.0,
    );
    let s_inv = invert(&sim).ok_or(Error::SingularTransform)?;
    let d = s_inv.transpose() * c.matrix() * s_inv;
    let d = d / -d[(2, 2)];
    Ok((sim, Conic::new(d)?))
}

/// World-to-image homography of the unit circle given its image `c` and the
/// vanishing line `v`. Independent of the intrinsics.
pub fn circle_homography(c: &Conic, v: &HomLine2) -> Result<Matrix3<f64>> {
    let (sim, canon) = canonical_diagonalize(c)?;
    let d = canon.matrix();
    let (c11, c22) = (d[(0, 0)], d[(1, 1)]);
    let s_inv = invert(&sim).ok_or(Error::SingularTransform)?;
    let v_canon = s_inv.transpose() * v.coords();
    // Pole of v in the canonical frame (C'₃₃ = −1): image of the circle centre.
    let x = Vector3::new(v_canon.x / c11, v_canon.y / c22, -v_canon.z);
    if x.z.abs() <= DEGENERATE_S_TOL * x.amax() {
        return Err(Error::DegenerateGeometry);
    }
    let (u, w) = (x.x / x.z, x.y / x.z);

    let inside = 1.0 - c11 * u * u - c22 * w * w;
    let r2 = c22 / c11 * inside;
    let s2 = c22 * (1.0 - c11 * u * u);
    if r2 < -RADICAND_TOL || s2 < -RADICAND_TOL {
        return Err(Error::InconsistentVanishingLine);
    }
    let (r, s) = (r2.max(0.0).sqrt(), s2.max(0.0).sqrt());
    if s <= DEGENERATE_S_TOL || r <= DEGENERATE_S_TOL {
        return Err(Error::DegenerateGeometry);
    }
    #[rustfmt::skip]
    let m = Matrix3::new(
        -1.0,      c22 * u * w,         u,
        0.0,       1.0 - c11 * u * u,   w,
        -c11 * u,  c22 * w,             1.0,
    ) * Matrix3::from_diagonal(&Vector3::new(r, -1.0, s));
    let h = s_inv * m;
    Ok(h / h.norm())
}

/// Full plane pose for the candidate `v`; `marker_diameter` fixes the scale.
pub fn homography_from_circle_and_vline(
    c: &Conic,
    v: &HomLine2,
    k: &CameraIntrinsics,
    marker_diameter: f64,
) -> Result<PlanePose> {
    if !(marker_diameter.is_finite() && marker_diameter > 0.0) {
        return Err(Error::InvalidArgument(
            "marker diameter must be positive".into(),
        ));
    }
    let h = circle_homography(c, v)?;
    let a = k.k_inv() * h;
    let scale = 1.0 / (a.column(0).norm() * a.column(1).norm()).sqrt();
    let mut t = a.column(2) * scale;
    if t.z < 0.0 {
        t = -t;
    }
    let center = t * (marker_diameter / 2.0);
    let mut normal = (k.k().transpose() * v.coords()).normalize();
    if normal.dot(&center) > 0.0 {
        normal = -normal;
    }
    Ok(PlanePose {
        normal,
        distance: -normal.dot(&center),
        center,
        homography: h,
    })
}

/// Rotation taking the marker frame to the camera frame for this pose, with
/// the marker z-axis pointing away from the camera and the x-axis taken as
/// the projection of `x_hint` on the plane.
pub fn marker_rotation(pose: &PlanePose, x_hint: &Vector3<f64>) -> Result<Matrix3<f64>> {
    let r3 = -pose.normal;
    let r1 = x_hint - r3 * r3.dot(x_hint);
    if r1.norm() < 1e-12 * x_hint.norm().max(1.0) {
        return Err(Error::DegenerateGeometry);
    }
    let r1 = r1.normalize();
    let r2 = r3.cross(&r1);
    Ok(Matrix3::from_columns(&[r1, r2, r3]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{adjugate, decompose_line_pair, line_pair_matrix, transform_conic};
    use crate::pencil::decompose_pencil;
    use nalgebra::Rotation3;

    fn camera() -> CameraIntrinsics {
        CameraIntrinsics::new(1280.0, 1280, 720).unwrap()
    }

    /// `K [R e₁ | R e₂ | t]` scaled for a circle of radius `radius`.
    fn scene_h(
        k: &CameraIntrinsics,
        rot: &Rotation3<f64>,
        t: Vector3<f64>,
        radius: f64,
    ) -> Matrix3<f64> {
        let r = rot.matrix();
        k.k() * Matrix3::from_columns(&[r.column(0) * radius, r.column(1) * radius, t])
    }

    #[test]
    fn axis_aligned_canonical_form() {
        let e = Conic::from_coefficients([0.25, 0.0, 1.0, 0.0, 0.0, -1.0]).unwrap();
        let (s, d) = canonical_diagonalize(&e).unwrap();
        assert!((s - Matrix3::identity()).amax() < 1e-14);
        let want = Matrix3::from_diagonal(&Vector3::new(0.25, 1.0, -1.0));
        assert!((d.matrix() - want).amax() < 1e-14);

        let (s, d) = canonical_diagonalize(&Conic::unit_circle()).unwrap();
        assert!((s - Matrix3::identity()).amax() < 1e-14);
        assert!(
            (d.matrix() - Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0))).amax() < 1e-14
        );
    }

    #[test]
    fn rotated_translated_canonical_form() {
        let rot = Matrix3::new(0.8, -0.6, 310.0, 0.6, 0.8, -42.0, 0.0, 0.0, 1.0);
        let base =
            Conic::from_coefficients([1.0 / 900.0, 0.0, 1.0 / 100.0, 0.0, 0.0, -1.0]).unwrap();
        let e = transform_conic(&base, &rot).unwrap();
        let (_, d) = canonical_diagonalize(&e).unwrap();
        let m = d.matrix();
        let off = m[(0, 1)].abs().max(m[(0, 2)].abs()).max(m[(1, 2)].abs());
        assert!(off < 1e-12 * m.amax(), "off-diagonal {off}");
        assert!(m[(0, 0)] > 0.0 && m[(0, 0)] <= m[(1, 1)] && m[(2, 2)] == -1.0);
        assert!((m[(0, 0)] - 1.0 / 900.0).abs() < 1e-12);
    }

    #[test]
    fn non_ellipse_is_rejected() {
        let h = Conic::from_coefficients([1.0, 0.0, -1.0, 0.0, 0.0, -1.0]).unwrap();
        assert!(matches!(
            canonical_diagonalize(&h),
            Err(Error::NotAnEllipse)
        ));
    }

    #[test]
    fn fronto_parallel_single_candidate() {
        let k = camera();
        let h = scene_h(
            &k,
            &Rotation3::identity(),
            Vector3::new(0.0, 0.0, 20.0),
            0.5,
        );
        let c = transform_conic(&Conic::unit_circle(), &h).unwrap();
        let p = decompose_pencil(&c, &k.iac()).unwrap();
        let cand = vanishing_candidates(&p, &k).unwrap();
        assert!(cand.degenerate);
        assert_eq!(cand.candidates.len(), 1);
        let n = cand.candidates[0].normal;
        assert!((n - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-9, "{n}");

        let pose = homography_from_circle_and_vline(&c, &cand.candidates[0].line, &k, 1.0).unwrap();
        assert!((pose.center - Vector3::new(0.0, 0.0, 20.0)).norm() < 1e-8);
        assert!((pose.distance - 20.0).abs() < 1e-8);
        let back = transform_conic(&Conic::unit_circle(), &pose.homography).unwrap();
        assert!(back.projective_distance(&c) < 1e-10);
    }

    #[test]
    fn twofold_case_one_matches_truth() {
        let k = camera();
        let rot = Rotation3::from_axis_angle(&Vector3::x_axis(), 45f64.to_radians());
        let t = Vector3::new(0.0, 0.0, 20.0);
        let h = scene_h(&k, &rot, t, 0.5);
        let c = transform_conic(&Conic::unit_circle(), &h).unwrap();
        let v_true = crate::conic::transform_line(&HomLine2::at_infinity(), &h).unwrap();
        let p = decompose_pencil(&c, &k.iac()).unwrap();
        let cand = vanishing_candidates(&p, &k).unwrap();
        assert_eq!(cand.candidates.len(), 2);
        let errs: Vec<f64> = cand
            .candidates
            .iter()
            .map(|x| x.line.angle_to(&v_true))
            .collect();
        assert!(
            errs.iter().cloned().fold(f64::INFINITY, f64::min) < 1e-8,
            "{errs:?}"
        );

        // both lie on D₂ and reproject the ellipse; only one matches the pose
        let d2 = p.line_pair_member();
        let adj = adjugate(d2.matrix());
        let mut matching = 0;
        for x in &cand.candidates {
            let l = x.line.coords();
            assert!(l.dot(&(adj * l)).abs() < 1e-9 * adj.norm());
            let pose = homography_from_circle_and_vline(&c, &x.line, &k, 1.0).unwrap();
            let back = transform_conic(&Conic::unit_circle(), &pose.homography).unwrap();
            assert!(back.projective_distance(&c) < 1e-8);
            let n_true = -rot.matrix().column(2).into_owned();
            if (pose.normal - n_true).norm() < 1e-8 {
                matching += 1;
                assert!((pose.center - t).norm() < 1e-7);
            }
        }
        assert_eq!(matching, 1);
    }

    #[test]
    fn candidates_rebuild_d2() {
        let k = camera();
        let rot = Rotation3::from_euler_angles(0.4, 0.9, -0.3);
        let h = scene_h(&k, &rot, Vector3::new(0.8, 0.3, 25.0), 0.5);
        let c = transform_conic(&Conic::unit_circle(), &h).unwrap();
        let p = decompose_pencil(&c, &k.iac()).unwrap();
        let w = p.iac.matrix();
        let y1 = w * p.iac_normalized_base_point(0);
        let y3 = w * p.iac_normalized_base_point(2);
        let [l1, l2, l3] = p.lambdas;
        let (a, b) = (y1 * (l1 - l2).sqrt(), y3 * (l2 - l3).sqrt());
        let rebuilt = line_pair_matrix(
            &HomLine2::from_vector(a + b).unwrap(),
            &HomLine2::from_vector(a - b).unwrap(),
        );
        let d2 = p.line_pair_member().matrix();
        let s = rebuilt.dot(d2) / d2.norm_squared();
        assert!((rebuilt - d2 * s).norm() / (d2 * s).norm() < 1e-9);

        // Each candidate is one of the lines of decompose_line_pair(D₂).
        let (la, lb) = decompose_line_pair(p.line_pair_member()).unwrap();
        for x in vanishing_candidates(&p, &k).unwrap().candidates {
            let best = x.line.angle_to(&la).min(x.line.angle_to(&lb));
            assert!(best < 1e-9, "{best}");
        }
    }

    #[test]
    fn wrong_line_is_inconsistent() {
        let c = Conic::circle(640.0, 360.0, 50.0).unwrap();
        // A secant line: its pole lies outside the circle.
        let v = HomLine2::new(1.0, 0.0, -660.0).unwrap();
        assert!(matches!(
            circle_homography(&c, &v),
            Err(Error::InconsistentVanishingLine)
        ));
    }
}
