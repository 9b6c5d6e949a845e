//! Ground-truth scenes: a circle of unit diameter seen by a pinhole camera.

use nalgebra::{Matrix3, Vector2, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::conic::{transform_conic, Conic, HomLine2};
use crate::disambiguate::SceneSideInfo;
use crate::error::{Error, Result};
use crate::intrinsics::CameraIntrinsics;
use crate::serde_mat;

/// Number of rim samples used for the visibility checks.
const RIM_SAMPLES: usize = 360;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthScene {
    pub k: CameraIntrinsics,
    /// Marker frame → camera frame, columns `[r1 r2 r3]`, right-handed.
    #[serde(with = "serde_mat::mat3")]
    pub rotation: Matrix3<f64>,
    /// Marker centre in the camera frame.
    #[serde(with = "serde_mat::vec3")]
    pub center_cam_true: Vector3<f64>,
    /// Unit plane normal in the camera frame, pointing toward the camera.
    #[serde(with = "serde_mat::vec3")]
    pub normal_true: Vector3<f64>,
    /// Unit circle of the marker frame → image, unit Frobenius norm.
    #[serde(with = "serde_mat::mat3")]
    pub h_true: Matrix3<f64>,
    pub v_inf_true: HomLine2,
    pub c_true: Conic,
}

impl GroundTruthScene {
    /// Scene from the marker pose; `rotation` maps marker axes (in diameters)
    /// to the camera frame and `center` is the marker centre.
    pub fn from_marker_pose(
        k: &CameraIntrinsics,
        rotation: Matrix3<f64>,
        center: Vector3<f64>,
    ) -> Result<Self> {
        let r1 = rotation.column(0) * 0.5;
        let r2 = rotation.column(1) * 0.5;
        let h = k.k() * Matrix3::from_columns(&[r1, r2, center]);
        let h = h / h.norm();
        let h_inv = crate::conic::invert(&h).ok_or(Error::SingularTransform)?;
        let v_inf_true = HomLine2::from_vector(h_inv.transpose() * Vector3::z())?.unit();
        let c_true = transform_conic(&Conic::unit_circle(), &h)?;
        let mut normal_true = rotation.column(2).into_owned().normalize();
        if normal_true.dot(&center) > 0.0 {
            normal_true = -normal_true;
        }
        Ok(Self {
            k: *k,
            rotation,
            center_cam_true: center,
            normal_true,
            h_true: h,
            v_inf_true,
            c_true,
        })
    }

    /// Camera-frame position of the marker-plane point `p` (diameters).
    pub fn plane_to_camera(&self, p: &Vector2<f64>) -> Vector3<f64> {
        self.center_cam_true + self.rotation.column(0) * p.x + self.rotation.column(1) * p.y
    }

    /// Pixel position of the marker-plane point `p`, `None` behind the camera.
    pub fn project(&self, p: &Vector2<f64>) -> Option<Vector2<f64>> {
        project_camera_point(&self.k, &self.plane_to_camera(p))
    }

    /// Every rim point is in front of the camera.
    pub fn rim_in_front(&self) -> bool {
        rim(RIM_SAMPLES).all(|p| self.plane_to_camera(&p).z > 0.0)
    }

    /// Every rim point projects inside the image.
    pub fn rim_in_frame(&self) -> bool {
        let (w, h) = (self.k.width_px as f64, self.k.height_px as f64);
        rim(RIM_SAMPLES).all(|p| match self.project(&p) {
            Some(q) => (0.0..=w).contains(&q.x) && (0.0..=h).contains(&q.y),
            None => false,
        })
    }
}

pub(crate) fn project_camera_point(k: &CameraIntrinsics, x: &Vector3<f64>) -> Option<Vector2<f64>> {
    if x.z <= 0.0 {
        return None;
    }
    let p = k.k() * x;
    Some(Vector2::new(p.x / p.z, p.y / p.z))
}

fn rim(n: usize) -> impl Iterator<Item = Vector2<f64>> {
    (0..n).map(move |i| {
        let t = i as f64 * std::f64::consts::TAU / n as f64;
        Vector2::new(0.5 * t.cos(), 0.5 * t.sin())
    })
}

/// Camera `r_over_d` diameters from the marker centre, optical axis through
/// it, no roll. `alpha_deg` is the angle between the marker plane and the
/// viewing direction (90° is fronto-parallel); the tilt is about the camera
/// x-axis.
pub fn make_scene(alpha_deg: f64, r_over_d: f64, k: &CameraIntrinsics) -> Result<GroundTruthScene> {
    if !(alpha_deg > 0.0 && alpha_deg <= 90.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0°, 90°], got {alpha_deg}"
        )));
    }
    if !(r_over_d > 0.0 && r_over_d.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "distance must be positive, got {r_over_d}"
        )));
    }
    let beta = (90.0 - alpha_deg).to_radians();
    let (s, c) = beta.sin_cos();
    let rotation = Matrix3::from_columns(&[
        Vector3::x(),
        Vector3::new(0.0, c, s),
        Vector3::new(0.0, -s, c),
    ]);
    let scene = GroundTruthScene::from_marker_pose(k, rotation, Vector3::new(0.0, 0.0, r_over_d))?;
    if !(scene.rim_in_front() && scene.rim_in_frame()) {
        return Err(Error::MarkerOutOfFrame);
    }
    Ok(scene)
}

/// Unit vectors `a, b` completing `d` to an orthonormal basis.
fn orthonormal_complement(d: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if d.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let a = d.cross(&helper).normalize();
    (a, d.cross(&a))
}

/// Random fully visible scene: marker anywhere in the central half of the
/// image, angle and distance uniform in the given ranges (degrees, diameters),
/// random tilt direction and in-plane rotation.
pub fn random_scene<R: Rng + ?Sized>(
    rng: &mut R,
    alpha_deg: (f64, f64),
    r_over_d: (f64, f64),
    k: &CameraIntrinsics,
) -> Result<GroundTruthScene> {
    let (w, h) = (k.width_px as f64, k.height_px as f64);
    for _ in 0..1000 {
        let alpha = rng.random_range(alpha_deg.0..=alpha_deg.1).to_radians();
        let r = rng.random_range(r_over_d.0..=r_over_d.1);
        let px = Vector3::new(
            rng.random_range(0.25 * w..0.75 * w),
            rng.random_range(0.25 * h..0.75 * h),
            1.0,
        );
        let d = (k.k_inv() * px).normalize();
        let (a, b) = orthonormal_complement(&d);
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let e = a * phi.cos() + b * phi.sin();
        // Plane normal (away from the camera) at 90° − α from the viewing ray.
        let r3 = d * alpha.sin() + e * alpha.cos();
        let (u, v) = orthonormal_complement(&r3);
        let gamma = rng.random_range(0.0..std::f64::consts::TAU);
        let r1 = u * gamma.cos() + v * gamma.sin();
        let r2 = r3.cross(&r1);
        let scene =
            GroundTruthScene::from_marker_pose(k, Matrix3::from_columns(&[r1, r2, r3]), d * r)?;
        if scene.rim_in_front() && scene.rim_in_frame() {
            return Ok(scene);
        }
    }
    Err(Error::MarkerOutOfFrame)
}

/// Scene laid out in the side-information frame: plane `Z = 0`, camera centre
/// at `[0, −cosθ, sinθ]` looking at the origin `q`, camera x-axis along the
/// plane X-axis. The marker axes are the plane axes, so the returned
/// rotation has its third column toward the camera. Image bounds are not
/// enforced; the rim must be in front of the camera.
///
/// Also returns the plane-to-image homography for plane coordinates in the
/// side frame's own unit (camera–`q` distance).
pub fn side_scene(
    info: &SceneSideInfo,
    k: &CameraIntrinsics,
) -> Result<(GroundTruthScene, Matrix3<f64>)> {
    let (st, ct) = info.theta.sin_cos();
    let cam = Vector3::new(0.0, -ct, st);
    #[rustfmt::skip]
    let world_to_cam = Matrix3::new(
        1.0, 0.0, 0.0,
        0.0, -st, -ct,
        0.0, ct,  -st,
    );
    let ex = world_to_cam.column(0).into_owned();
    let ey = world_to_cam.column(1).into_owned();
    let diameter = 2.0 * info.radius;
    let center = world_to_cam * (Vector3::new(info.x_c, info.y_c, 0.0) - cam) / diameter;
    let rotation = Matrix3::from_columns(&[ex, ey, ex.cross(&ey)]);
    let scene = GroundTruthScene::from_marker_pose(k, rotation, center)?;
    if !scene.rim_in_front() {
        return Err(Error::DegenerateGeometry);
    }
    let plane_to_image = k.k() * Matrix3::from_columns(&[ex, ey, -(world_to_cam * cam)]);
    Ok((scene, plane_to_image))
}
