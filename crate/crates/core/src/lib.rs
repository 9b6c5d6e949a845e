//! Plane pose from the image of a single circle.
//!
//! The pipeline pairs the ellipse `C` seen in the image with the image of the
//! absolute conic `ω = K⁻ᵀK⁻¹` and works on the pencil `{C − βω}`:
//!
//! 1. [`pencil`] – generalized eigen-analysis of `(C, ω)`, base points and the
//!    three degenerate members.
//! 2. [`pose`] – the two vanishing-line candidates carried by the real
//!    line-pair member, and the world-to-image homography for each.
//! 3. [`disambiguate`] – side-of-principal-plane reasoning that picks the true
//!    vanishing line when the configuration allows it.
//! 4. [`intrinsics`] – square-pixel camera model and the default focal model
//!    fitted on a device population.
//!
//! [`ellipse_fit`] turns contour points into a conic and [`simulator`] runs
//! the synthetic error-vs-distance experiments.

pub mod conic;
pub mod disambiguate;
pub mod ellipse_fit;
mod error;
pub mod intrinsics;
pub mod io;
pub mod pencil;
pub mod pipeline;
pub mod pose;
mod serde_mat;
pub mod simulator;

pub use conic::{Conic, ConicKind, HomLine2, HomPoint2, Signature};
pub use disambiguate::{Choice, DisambiguationResult, DisambiguationRule, SceneSideInfo};
pub use ellipse_fit::{fit_ellipse, sample_ellipse, ContourPoints};
pub use error::{Error, Result};
pub use intrinsics::{CameraIntrinsics, FocalModel, SensorConvention};
pub use pencil::{decompose_pencil, PencilDecomposition};
pub use pipeline::{estimate_pose, PoseEstimate};
pub use pose::{PlanePose, VanishingCandidates};
