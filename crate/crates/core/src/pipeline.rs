//! Ellipse + intrinsics → plane pose, end to end.

use serde::{Deserialize, Serialize};

use crate::conic::Conic;
use crate::disambiguate::{select_vanishing_line, DisambiguationResult, SceneSideInfo};
use crate::error::{Error, Result};
use crate::intrinsics::CameraIntrinsics;
use crate::pencil::{decompose_pencil, PencilDecomposition};
use crate::pose::{
    homography_from_circle_and_vline, vanishing_candidates, PlanePose, VanishingCandidates,
};

/// What is known about where the circle sits relative to the optical axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SidePrior {
    #[default]
    Unknown,
    Known(SceneSideInfo),
    /// The optical axis passes through the circle centre.
    AssumeCentered,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoseEstimate {
    pub pencil: PencilDecomposition,
    pub candidates: VanishingCandidates,
    /// One pose per candidate, same order.
    pub poses: Vec<PlanePose>,
    pub disambiguation: DisambiguationResult,
    pub side_info: Option<SceneSideInfo>,
}

impl PoseEstimate {
    pub fn selected_pose(&self) -> Option<&PlanePose> {
        self.disambiguation.selected.map(|c| &self.poses[c.index()])
    }
}

/// Side information for a centred view derived from one candidate pose:
/// elevation is the angle between the plane and the ray to the centre, and the
/// radius is expressed in camera–centre distances.
pub fn centered_side_info(pose: &PlanePose, marker_diameter: f64) -> Result<SceneSideInfo> {
    let dist = pose.center.norm();
    if !(dist > 0.0 && dist.is_finite()) {
        return Err(Error::DegenerateGeometry);
    }
    let sin_theta = (pose.normal.dot(&pose.center) / dist).abs().min(1.0);
    let theta = sin_theta.asin().min(std::f64::consts::FRAC_PI_2 - 1e-12);
    SceneSideInfo::centered(theta, marker_diameter / 2.0 / dist)
}

/// Runs pencil → candidates → per-candidate pose → disambiguation.
///
/// `marker_diameter` fixes the unit of the returned distances and centres.
pub fn estimate_pose(
    c: &Conic,
    k: &CameraIntrinsics,
    marker_diameter: f64,
    side: SidePrior,
) -> Result<PoseEstimate> {
    let pencil = decompose_pencil(c, &k.iac())?;
    let candidates = vanishing_candidates(&pencil, k)?;
    let poses = candidates
        .candidates
        .iter()
        .map(|cand| homography_from_circle_and_vline(c, &cand.line, k, marker_diameter))
        .collect::<Result<Vec<_>>>()?;
    let side_info = match side {
        SidePrior::Unknown => None,
        SidePrior::Known(s) => Some(s),
        SidePrior::AssumeCentered => Some(centered_side_info(&poses[0], marker_diameter)?),
    };
    let disambiguation = select_vanishing_line(&candidates, &pencil, side_info.as_ref())?;
    Ok(PoseEstimate {
        pencil,
        candidates,
        poses,
        disambiguation,
        side_info,
    })
}
