//! Ground-truth check of the separation rule used to pick the vanishing line.
//!
//! For every sampled scene the world base points are computed on the plane
//! itself (limit points of the coaxal system spanned by the circle and the
//! back-projected `ω`) and their sides of the principal-plane trace read off
//! directly. That is compared against whether the true vanishing line
//! separates the image base points, and against the side polynomial.

use nalgebra::{Matrix3, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conic::{normalize_unit_det, Conic};
use crate::disambiguate::{
    same_side_condition, separation_product, DisambiguationRule, SceneSideInfo,
};
use crate::ellipse_fit::{fit_ellipse, sample_ellipse_with, ContourPoints};
use crate::error::{Error, Result};
use crate::intrinsics::CameraIntrinsics;
use crate::pencil::{decompose_pencil, generalized_eigen_sym};
use crate::pipeline::{estimate_pose, SidePrior};
use crate::simulator::mix_seed;
use crate::simulator::scene::side_scene;

/// Back-projection of `ω` on the side frame's plane: the virtual circle
/// centred at the camera foot with squared radius `−sin²θ`.
pub fn plane_iac(theta: f64) -> Matrix3<f64> {
    let c = theta.cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, c, 0.0, c, 1.0)
}

/// The two real finite base points of the plane pencil `{Q − βψ}`, in the
/// order of the largest and smallest generalized eigenvalue.
pub fn world_base_points(info: &SceneSideInfo) -> Result<[Vector2<f64>; 2]> {
    let q = normalize_unit_det(&Conic::circle(info.x_c, info.y_c, info.radius)?)?;
    let psi = normalize_unit_det(&Conic::new(plane_iac(info.theta))?)?;
    let (_, vecs) = generalized_eigen_sym(q.matrix(), psi.matrix())?;
    let mut out = [Vector2::zeros(); 2];
    for (slot, col) in out.iter_mut().zip([0usize, 2]) {
        let v = vecs.column(col);
        if v.z.abs() <= 1e-12 * v.amax() {
            return Err(Error::BasePointAtInfinity);
        }
        *slot = Vector2::new(v.x / v.z, v.y / v.z);
    }
    Ok(out)
}

/// Both world base points lie on the same side of `y cosθ + 1 = 0`.
pub fn world_same_side(info: &SceneSideInfo) -> Result<bool> {
    let c = info.theta.cos();
    let [a, b] = world_base_points(info)?;
    Ok((c * a.y + 1.0) * (c * b.y + 1.0) > 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneSet {
    /// Any circle fully in front of the camera.
    General,
    /// Centre beyond `q` with the camera foot outside the circle, `y_c ≥ 1.5R`.
    Sufficient,
    /// As `Sufficient` at 15 D, 30°, with contour noise and a fitted ellipse.
    Noisy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2Row {
    pub set: SceneSet,
    pub trial: usize,
    pub theta: f64,
    pub x_c: f64,
    pub y_c: f64,
    pub radius: f64,
    pub side_polynomial: f64,
    pub world_same_side: bool,
    pub polynomial_same_side: bool,
    pub v_inf_separates: bool,
    /// Same side ⇔ the true vanishing line does not separate the image base points.
    pub rule_holds: bool,
    pub decided: bool,
    pub selected_correct: bool,
    pub rule_fired: DisambiguationRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BranchStats {
    pub scenes: usize,
    pub v_inf_separates: usize,
    pub v_inf_does_not_separate: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SelectionStats {
    pub scenes: usize,
    pub decided: usize,
    pub correct: usize,
}

impl SelectionStats {
    pub fn decided_fraction(&self) -> f64 {
        self.decided as f64 / self.scenes.max(1) as f64
    }

    /// Correct over decided.
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.decided.max(1) as f64
    }

    /// Wilson score lower bound at z = 3 on the accuracy, floored to 1e-3.
    pub fn lower_bound(&self) -> f64 {
        let (p, n, z) = (self.accuracy(), self.decided.max(1) as f64, 3.0f64);
        let centre = p + z * z / (2.0 * n);
        let spread = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
        (((centre - spread) / (1.0 + z * z / n)) * 1000.0).floor() / 1000.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2Summary {
    pub seed: u64,
    pub trials: usize,
    pub noise_sigma: f64,
    pub same_side: BranchStats,
    pub opposite_sides: BranchStats,
    pub polynomial_agreements: usize,
    pub polynomial_disagreements: usize,
    /// Rows where the separation rule failed; zero for a consistent table.
    pub counterexamples: usize,
    pub skipped: usize,
    pub winning_rule: String,
    pub sufficient: SelectionStats,
    pub noisy: SelectionStats,
    /// Pass mark for selection accuracy on the noisy set.
    pub noisy_threshold: f64,
}

pub const WINNING_RULE: &str =
    "same side: v_inf does not separate z1, z3; opposite sides: v_inf separates them";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prop2Config {
    /// Scenes per noise-free set.
    pub trials: usize,
    /// Scenes in the noisy set.
    pub noisy_trials: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for Prop2Config {
    fn default() -> Self {
        Self {
            trials: 10_000,
            noisy_trials: 1_000,
            noise_sigma: 1.0,
            seed: 0,
        }
    }
}

/// Distance from `q` in marker diameters used by the noisy set.
const NOISY_RANGE_D: f64 = 15.0;
const NOISY_THETA_DEG: f64 = 30.0;
const NOISY_CONTOUR_POINTS: usize = 360;

fn sample_side(set: SceneSet, rng: &mut ChaCha8Rng) -> Result<SceneSideInfo> {
    match set {
        SceneSet::General => {
            let theta = rng.random_range(0.1..1.45f64);
            let radius = (rng.random_range(0.005f64.ln()..0.3f64.ln())).exp();
            let front = -1.0 / theta.cos() + radius * 1.05 + 0.01;
            let y_c = rng.random_range(front..2.0);
            let x_c = rng.random_range(-1.0..1.0);
            SceneSideInfo::new(theta, x_c, y_c, radius)
        }
        SceneSet::Sufficient => {
            let theta = rng.random_range(0.1..1.45f64);
            let radius = (rng.random_range(0.005f64.ln()..0.3f64.ln())).exp();
            let y_c = rng.random_range(1.5 * radius..1.5 * radius + 2.0);
            let x_c = rng.random_range(-1.0..1.0);
            SceneSideInfo::new(theta, x_c, y_c, radius)
        }
        SceneSet::Noisy => {
            let radius = 0.5 / NOISY_RANGE_D;
            let y_c = rng.random_range(1.5 * radius..4.0 * radius);
            let x_c = rng.random_range(-2.0 * radius..2.0 * radius);
            SceneSideInfo::new(NOISY_THETA_DEG.to_radians(), x_c, y_c, radius)
        }
    }
}

/// Evaluates one scene; `noise_sigma > 0` fits a noisy contour first.
pub fn evaluate_side_scene(
    info: &SceneSideInfo,
    k: &CameraIntrinsics,
    noise_sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(bool, bool, bool, DisambiguationRule, bool)> {
    let world_same = world_same_side(info)?;
    let (scene, _) = side_scene(info, k)?;
    let exact = decompose_pencil(&scene.c_true, &k.iac())?;
    let (z1, z3) = (&exact.base_points[0], &exact.base_points[2]);
    let v_sep = separation_product(&scene.v_inf_true, z1, z3)? < 0.0;

    let observed = if noise_sigma > 0.0 {
        let pts = sample_ellipse_with(&scene.c_true, NOISY_CONTOUR_POINTS, noise_sigma, rng)?;
        fit_ellipse(&ContourPoints::new(pts)?)?
    } else {
        scene.c_true.clone()
    };
    let est = estimate_pose(&observed, k, 1.0, SidePrior::Known(*info))?;
    let truth = est
        .candidates
        .candidates
        .iter()
        .enumerate()
        .min_by(|a, b| {
            a.1.line
                .angle_to(&scene.v_inf_true)
                .total_cmp(&b.1.line.angle_to(&scene.v_inf_true))
        })
        .map(|(i, _)| i)
        .ok_or(Error::DegenerateGeometry)?;
    let sel = est.disambiguation.selected.map(|c| c.index());
    Ok((
        world_same,
        v_sep,
        sel.is_some(),
        est.disambiguation.rule_fired,
        sel == Some(truth),
    ))
}

fn run_set(
    set: SceneSet,
    n: usize,
    cfg: &Prop2Config,
    k: &CameraIntrinsics,
) -> (Vec<Prop2Row>, usize) {
    let sigma = if set == SceneSet::Noisy {
        cfg.noise_sigma
    } else {
        0.0
    };
    let results: Vec<Option<Prop2Row>> = (0..n)
        .into_par_iter()
        .map(|trial| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(mix_seed(&[cfg.seed, set as u64, trial as u64]));
            let info = sample_side(set, &mut rng).ok()?;
            let (world_same_side, v_inf_separates, decided, rule_fired, selected_correct) =
                evaluate_side_scene(&info, k, sigma, &mut rng).ok()?;
            Some(Prop2Row {
                set,
                trial,
                theta: info.theta,
                x_c: info.x_c,
                y_c: info.y_c,
                radius: info.radius,
                side_polynomial: info.side_polynomial(),
                world_same_side,
                polynomial_same_side: same_side_condition(&info),
                v_inf_separates,
                rule_holds: world_same_side != v_inf_separates,
                decided,
                selected_correct,
                rule_fired,
            })
        })
        .collect();
    let skipped = results.iter().filter(|r| r.is_none()).count();
    (results.into_iter().flatten().collect(), skipped)
}

/// Runs the three scene sets and summarizes them.
pub fn verify_prop2(cfg: &Prop2Config) -> Result<(Vec<Prop2Row>, Prop2Summary)> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let k = CameraIntrinsics::new(1280.0, 1280, 720)?;
    let mut rows = Vec::new();
    let mut skipped = 0;
    for (set, n) in [
        (SceneSet::General, cfg.trials),
        (SceneSet::Sufficient, cfg.trials),
        (SceneSet::Noisy, cfg.noisy_trials),
    ] {
        let (r, s) = run_set(set, n, cfg, &k);
        rows.extend(r);
        skipped += s;
    }

    let mut summary = Prop2Summary {
        seed: cfg.seed,
        trials: cfg.trials,
        noise_sigma: cfg.noise_sigma,
        same_side: BranchStats::default(),
        opposite_sides: BranchStats::default(),
        polynomial_agreements: 0,
        polynomial_disagreements: 0,
        counterexamples: 0,
        skipped,
        winning_rule: WINNING_RULE.to_string(),
        sufficient: SelectionStats::default(),
        noisy: SelectionStats::default(),
        noisy_threshold: 0.0,
    };
    for r in &rows {
        if r.set != SceneSet::Noisy {
            let b = if r.world_same_side {
                &mut summary.same_side
            } else {
                &mut summary.opposite_sides
            };
            b.scenes += 1;
            if r.v_inf_separates {
                b.v_inf_separates += 1;
            } else {
                b.v_inf_does_not_separate += 1;
            }
            if !r.rule_holds {
                summary.counterexamples += 1;
            }
            if r.polynomial_same_side == r.world_same_side {
                summary.polynomial_agreements += 1;
            } else {
                summary.polynomial_disagreements += 1;
            }
        }
        let stats = match r.set {
            SceneSet::Sufficient => &mut summary.sufficient,
            SceneSet::Noisy => &mut summary.noisy,
            SceneSet::General => continue,
        };
        stats.scenes += 1;
        stats.decided += r.decided as usize;
        stats.correct += (r.decided && r.selected_correct) as usize;
    }
    summary.noisy_threshold = summary.noisy.lower_bound();
    Ok((rows, summary))
}

pub fn write_prop2_csv<W: std::io::Write>(rows: &[Prop2Row], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}
