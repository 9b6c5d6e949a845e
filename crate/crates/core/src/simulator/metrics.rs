//! Error measures between an estimated pose and ground truth.

use nalgebra::{Vector2, Vector3};

use crate::error::Result;
use crate::intrinsics::CameraIntrinsics;
use crate::pose::{marker_rotation, PlanePose};
use crate::simulator::scene::{project_camera_point, GroundTruthScene};

/// Sign-invariant angle between two normals, degrees.
pub fn metric_normal(n_est: &Vector3<f64>, n_true: &Vector3<f64>) -> f64 {
    let c = n_est.normalize().dot(&n_true.normalize()).abs().min(1.0);
    c.acos().to_degrees()
}

/// Camera-frame distance between marker centres over the marker diameter.
pub fn metric_position(c_est: &Vector3<f64>, c_true: &Vector3<f64>, marker_diameter: f64) -> f64 {
    (c_est - c_true).norm() / marker_diameter
}

/// 5×5 grid of plane points spanning `±radius` (diameters) around the centre.
pub fn reprojection_grid(radius: f64) -> Vec<Vector2<f64>> {
    let steps = [-1.0, -0.5, 0.0, 0.5, 1.0];
    steps
        .iter()
        .flat_map(|&y| {
            steps
                .iter()
                .map(move |&x| Vector2::new(x * radius, y * radius))
        })
        .collect()
}

/// RMS pixel distance between the true projections of the grid and its
/// projections under the estimated pose through `k_used`.
///
/// The estimated marker frame takes its x-axis from the true one projected
/// on the estimated plane, since the in-plane rotation is not recoverable.
/// A grid point behind the estimated camera counts as infinitely far.
pub fn metric_reproj(
    pose: &PlanePose,
    scene: &GroundTruthScene,
    k_used: &CameraIntrinsics,
    grid_radius: f64,
) -> Result<f64> {
    let hint = scene.rotation.column(0).into_owned();
    let r_est = marker_rotation(pose, &hint)?;
    let mut sum = 0.0;
    let grid = reprojection_grid(grid_radius);
    for p in &grid {
        let truth = scene.project(p);
        let est_cam = pose.center + r_est.column(0) * p.x + r_est.column(1) * p.y;
        let est = project_camera_point(k_used, &est_cam);
        match (truth, est) {
            (Some(a), Some(b)) => sum += (a - b).norm_squared(),
            _ => return Ok(f64::INFINITY),
        }
    }
    Ok((sum / grid.len() as f64).sqrt())
}
