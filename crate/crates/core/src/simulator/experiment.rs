//! Monte-Carlo sweep of pose error over angle, distance and focal error.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conic::Conic;
use crate::ellipse_fit::{fit_ellipse, sample_ellipse_with, ContourPoints};
use crate::error::{Error, Result};
use crate::intrinsics::CameraIntrinsics;
use crate::pipeline::{estimate_pose, SidePrior};
use crate::simulator::metrics::{metric_normal, metric_position, metric_reproj};
use crate::simulator::mix_seed;
use crate::simulator::scene::{make_scene, GroundTruthScene};

/// `n` log-spaced values in `[lo, hi]`, both ends included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Plane–viewing-direction angles, degrees.
    pub alpha_deg: Vec<f64>,
    /// Camera–marker distances, marker diameters.
    #[serde(rename = "r_over_D")]
    pub r_over_d: Vec<f64>,
    /// Multipliers applied to the true focal length to get the focal used.
    pub focal_modifiers: Vec<f64>,
    /// Contour noise, pixels per coordinate.
    pub noise_sigma: f64,
    pub trials: usize,
    pub seed: u64,
    /// True focal length, pixels.
    pub f_px: f64,
    pub image: [u32; 2],
    pub contour_points: usize,
    /// Half-width of the reprojection grid, marker diameters.
    pub grid_radius: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alpha_deg: vec![15.0, 30.0, 45.0],
            r_over_d: log_grid(15.0, 50.0, 8),
            focal_modifiers: vec![0.7, 0.85, 1.0, 1.15, 1.3],
            noise_sigma: 1.0,
            trials: 200,
            seed: 0,
            f_px: 1280.0,
            image: [1280, 720],
            contour_points: 360,
            grid_radius: 2.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.alpha_deg.is_empty() || self.r_over_d.is_empty() || self.focal_modifiers.is_empty()
        {
            return bad("alpha, distance and modifier lists must be non-empty");
        }
        if !self.alpha_deg.iter().all(|a| *a > 0.0 && *a < 90.0) {
            return bad("alpha must lie in (0°, 90°)");
        }
        if !self.r_over_d.iter().all(|r| *r > 0.0 && r.is_finite()) {
            return bad("distances must be positive");
        }
        if !self
            .focal_modifiers
            .iter()
            .all(|m| *m > 0.0 && m.is_finite())
        {
            return bad("focal modifiers must be positive");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise sigma must be non-negative");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.contour_points < 6 {
            return bad("at least six contour points are needed");
        }
        if !(self.grid_radius > 0.0 && self.grid_radius.is_finite()) {
            return bad("grid radius must be positive");
        }
        self.camera().map(|_| ())
    }

    pub fn camera(&self) -> Result<CameraIntrinsics> {
        CameraIntrinsics::new(self.f_px, self.image[0], self.image[1])
    }

    pub fn row_count(&self) -> usize {
        self.alpha_deg.len() * self.r_over_d.len() * self.focal_modifiers.len() * self.trials
    }
}

/// One CSV row. Error columns are `NaN` when `failed` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub alpha_deg: f64,
    #[serde(rename = "r_over_D")]
    pub r_over_d: f64,
    pub modifier: f64,
    pub trial: usize,
    pub err_normal_deg: f64,
    pub err_position: f64,
    pub err_reproj_px: f64,
    pub disamb_correct: bool,
    pub candidates: usize,
    pub failed: bool,
}

impl TrialRecord {
    pub const HEADER: [&'static str; 10] = [
        "alpha_deg",
        "r_over_D",
        "modifier",
        "trial",
        "err_normal_deg",
        "err_position",
        "err_reproj_px",
        "disamb_correct",
        "candidates",
        "failed",
    ];

    fn failure(alpha_deg: f64, r_over_d: f64, modifier: f64, trial: usize) -> Self {
        Self {
            alpha_deg,
            r_over_d,
            modifier,
            trial,
            err_normal_deg: f64::NAN,
            err_position: f64::NAN,
            err_reproj_px: f64::NAN,
            disamb_correct: false,
            candidates: 0,
            failed: true,
        }
    }
}

/// Errors of one pose estimate against the scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialErrors {
    pub err_normal_deg: f64,
    pub err_position: f64,
    pub err_reproj_px: f64,
    pub disamb_correct: bool,
    pub candidates: usize,
}

/// Pose from an observed ellipse with `k_used` under the centred-view
/// assumption, scored against the scene. When the selection is undecided the
/// first candidate is scored and the selection counts as wrong.
pub fn evaluate_conic(
    scene: &GroundTruthScene,
    observed: &Conic,
    k_used: &CameraIntrinsics,
    grid_radius: f64,
) -> Result<TrialErrors> {
    let est = estimate_pose(observed, k_used, 1.0, SidePrior::AssumeCentered)?;
    let closest = est
        .poses
        .iter()
        .enumerate()
        .map(|(i, p)| (i, metric_normal(&p.normal, &scene.normal_true)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .ok_or(Error::DegenerateGeometry)?;
    let chosen = est.disambiguation.selected.map(|c| c.index());
    let pose = &est.poses[chosen.unwrap_or(0)];
    Ok(TrialErrors {
        err_normal_deg: metric_normal(&pose.normal, &scene.normal_true),
        err_position: metric_position(&pose.center, &scene.center_cam_true, 1.0),
        err_reproj_px: metric_reproj(pose, scene, k_used, grid_radius)?,
        disamb_correct: chosen == Some(closest),
        candidates: est.candidates.candidates.len(),
    })
}

/// Noisy contour of the scene's ellipse, fitted.
pub fn observe(
    scene: &GroundTruthScene,
    contour_points: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<Conic> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = sample_ellipse_with(&scene.c_true, contour_points, noise_sigma, &mut rng)?;
    fit_ellipse(&ContourPoints::new(pts)?)
}

/// Single trial with the default 360-point contour and 2 D grid.
pub fn run_trial(
    scene: &GroundTruthScene,
    k_used: &CameraIntrinsics,
    noise_sigma: f64,
    seed: u64,
) -> Result<TrialErrors> {
    let defaults = ExperimentConfig::default();
    let observed = observe(scene, defaults.contour_points, noise_sigma, seed)?;
    evaluate_conic(scene, &observed, k_used, defaults.grid_radius)
}

/// Full sweep. Rows are ordered by (α, r, modifier, trial) as listed in the
/// config. Each (α, r, trial) draws one contour, shared by every modifier.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let k = cfg.camera()?;
    let used: Vec<CameraIntrinsics> = cfg
        .focal_modifiers
        .iter()
        .map(|m| k.focal_modifier(*m))
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize, usize)> = (0..cfg.alpha_deg.len())
        .flat_map(|a| {
            (0..cfg.r_over_d.len()).flat_map(move |r| (0..cfg.trials).map(move |t| (a, r, t)))
        })
        .collect();

    let scenes: Vec<Vec<Option<GroundTruthScene>>> = cfg
        .alpha_deg
        .iter()
        .map(|&a| {
            cfg.r_over_d
                .iter()
                .map(|&r| make_scene(a, r, &k).ok())
                .collect()
        })
        .collect();

    let blocks: Vec<Vec<TrialRecord>> = jobs
        .par_iter()
        .map(|&(ai, ri, trial)| {
            let (alpha, r) = (cfg.alpha_deg[ai], cfg.r_over_d[ri]);
            let seed = mix_seed(&[cfg.seed, ai as u64, ri as u64, trial as u64]);
            let observed = scenes[ai][ri]
                .as_ref()
                .ok_or(Error::MarkerOutOfFrame)
                .and_then(|s| observe(s, cfg.contour_points, cfg.noise_sigma, seed));
            cfg.focal_modifiers
                .iter()
                .zip(&used)
                .map(|(&m, k_used)| {
                    let errs = observed.as_ref().ok().and_then(|c| {
                        evaluate_conic(
                            scenes[ai][ri].as_ref().expect("observed implies scene"),
                            c,
                            k_used,
                            cfg.grid_radius,
                        )
                        .ok()
                    });
                    match errs {
                        Some(e) => TrialRecord {
                            alpha_deg: alpha,
                            r_over_d: r,
                            modifier: m,
                            trial,
                            err_normal_deg: e.err_normal_deg,
                            err_position: e.err_position,
                            err_reproj_px: e.err_reproj_px,
                            disamb_correct: e.disamb_correct,
                            candidates: e.candidates,
                            failed: false,
                        },
                        None => TrialRecord::failure(alpha, r, m, trial),
                    }
                })
                .collect()
        })
        .collect();

    // Regroup (α, r, trial, modifier) blocks into (α, r, modifier, trial) order.
    let nm = cfg.focal_modifiers.len();
    let mut rows = Vec::with_capacity(cfg.row_count());
    for cell in blocks.chunks(cfg.trials) {
        for mi in 0..nm {
            rows.extend(cell.iter().map(|b| b[mi].clone()));
        }
    }
    Ok(rows)
}

/// Median of the non-failed values of `f` over the rows matching `keep`.
pub fn median_of<F, P>(rows: &[TrialRecord], keep: P, f: F) -> Option<f64>
where
    F: Fn(&TrialRecord) -> f64,
    P: Fn(&TrialRecord) -> bool,
{
    let mut v: Vec<f64> = rows
        .iter()
        .filter(|r| !r.failed && keep(r))
        .map(f)
        .filter(|x| x.is_finite())
        .collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}
