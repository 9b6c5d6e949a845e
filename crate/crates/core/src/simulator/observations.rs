//! Externally detected ellipses with measured reference points.
//!
//! Each observation gives an ellipse and a few marker-plane points (marker
//! frame, origin at the centre, same unit as `marker_diameter`) with their
//! measured pixels. The pose is estimated from the ellipse alone; the unknown
//! in-plane rotation is then searched to score reprojection.

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::conic::Conic;
use crate::error::{Error, Result};
use crate::intrinsics::{default_intrinsics, CameraIntrinsics, FocalModel};
use crate::pipeline::{estimate_pose, SidePrior};
use crate::pose::{marker_rotation, PlanePose};
use crate::serde_mat;
use crate::simulator::scene::project_camera_point;

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferencePoint {
    pub plane: [f64; 2],
    pub image: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observation {
    #[serde(default)]
    pub id: Option<String>,
    pub ellipse: Conic,
    #[serde(default)]
    pub reference_points: Vec<ReferencePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationSet {
    /// Exact intrinsics; when absent the default model is applied to `image_size`.
    #[serde(default)]
    pub intrinsics: Option<CameraIntrinsics>,
    #[serde(default)]
    pub image_size: Option<[u32; 2]>,
    pub marker_diameter: f64,
    #[serde(default = "yes")]
    pub assume_centered: bool,
    pub observations: Vec<Observation>,
}

impl ObservationSet {
    pub fn validate(&self) -> Result<()> {
        if !(self.marker_diameter > 0.0 && self.marker_diameter.is_finite()) {
            return Err(Error::InvalidArgument(
                "marker_diameter must be positive".into(),
            ));
        }
        match (&self.intrinsics, &self.image_size) {
            (Some(k), _) => k.validate()?,
            (None, Some([w, h])) if *w > 0 && *h > 0 => {}
            _ => {
                return Err(Error::InvalidArgument(
                    "need intrinsics or a positive image_size".into(),
                ))
            }
        }
        for o in &self.observations {
            for p in &o.reference_points {
                if !p.plane.iter().chain(&p.image).all(|v| v.is_finite()) {
                    return Err(Error::Malformed("non-finite reference point".into()));
                }
            }
        }
        Ok(())
    }

    pub fn resolve_intrinsics(&self, model: &FocalModel) -> Result<CameraIntrinsics> {
        match (&self.intrinsics, &self.image_size) {
            (Some(k), _) => Ok(*k),
            (None, Some([w, h])) => default_intrinsics(*w, *h, model),
            (None, None) => Err(Error::InvalidArgument(
                "need intrinsics or image_size".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationResult {
    pub id: Option<String>,
    pub decided: bool,
    pub pose: Option<PlanePose>,
    /// Best in-plane rotation of the marker frame, radians.
    pub in_plane_rotation: Option<f64>,
    pub reproj_rms_px: Option<f64>,
    #[serde(with = "serde_mat::vec3")]
    pub lambdas: Vector3<f64>,
}

/// Marker frame for `pose` rotated by `beta` about its normal.
fn frame(pose: &PlanePose, beta: f64) -> Result<Matrix3<f64>> {
    let hint = if pose.normal.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let base = marker_rotation(pose, &hint)?;
    let (s, c) = beta.sin_cos();
    Ok(base * Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
}

fn rms(pose: &PlanePose, k: &CameraIntrinsics, refs: &[ReferencePoint], beta: f64) -> Result<f64> {
    let r = frame(pose, beta)?;
    let mut sum = 0.0;
    for p in refs {
        let x = pose.center + r.column(0) * p.plane[0] + r.column(1) * p.plane[1];
        let q = project_camera_point(k, &x).ok_or(Error::DegenerateGeometry)?;
        sum += (q - Vector2::new(p.image[0], p.image[1])).norm_squared();
    }
    Ok((sum / refs.len() as f64).sqrt())
}

/// Minimum RMS reprojection over the in-plane rotation: 0.1° scan, then a
/// golden-section refinement on the best bracket.
pub fn best_in_plane_rotation(
    pose: &PlanePose,
    k: &CameraIntrinsics,
    refs: &[ReferencePoint],
) -> Result<(f64, f64)> {
    if refs.is_empty() {
        return Err(Error::InvalidArgument("no reference points".into()));
    }
    let step = 0.1f64.to_radians();
    let n = (std::f64::consts::TAU / step).round() as usize;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..n {
        let b = i as f64 * step;
        let e = rms(pose, k, refs, b)?;
        if e < best.1 {
            best = (b, e);
        }
    }
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let (a, b) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if rms(pose, k, refs, a)? < rms(pose, k, refs, b)? {
            hi = b;
        } else {
            lo = a;
        }
    }
    let beta = 0.5 * (lo + hi);
    let e = rms(pose, k, refs, beta)?;
    Ok(if e < best.1 {
        (beta.rem_euclid(std::f64::consts::TAU), e)
    } else {
        best
    })
}

pub fn evaluate_observations(
    set: &ObservationSet,
    k: &CameraIntrinsics,
) -> Result<Vec<ObservationResult>> {
    let side = if set.assume_centered {
        SidePrior::AssumeCentered
    } else {
        SidePrior::Unknown
    };
    set.observations
        .iter()
        .map(|o| {
            let est = estimate_pose(&o.ellipse, k, set.marker_diameter, side)?;
            let pose = est.selected_pose().copied();
            let fit = match (&pose, o.reference_points.is_empty()) {
                (Some(p), false) => Some(best_in_plane_rotation(p, k, &o.reference_points)?),
                _ => None,
            };
            Ok(ObservationResult {
                id: o.id.clone(),
                decided: pose.is_some(),
                pose,
                in_plane_rotation: fit.map(|f| f.0),
                reproj_rms_px: fit.map(|f| f.1),
                lambdas: Vector3::from(est.pencil.lambdas),
            })
        })
        .collect()
}
