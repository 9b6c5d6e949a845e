//! Choosing the true vanishing line among the two candidates.
//!
//! The base points `z₁, z₃` of the pencil are the images of two real points
//! of the support plane. Whether those points sit on the same side of the
//! principal-plane trace `L` decides which candidate separates them:
//!
//! | world base points vs `L` | true vanishing line        |
//! |--------------------------|----------------------------|
//! | same side                | does **not** separate z̄₁, z̄₃ |
//! | opposite sides           | separates z̄₁, z̄₃            |
//!
//! The table is the outcome of `circlepose verify-prop2` (committed summary
//! in `data/prop2_summary.json`): no counter-example in either branch.
//!
//! Side information is expressed in a plane frame centred on the point `q`
//! where the optical axis meets the plane, with the y-axis along the ground
//! projection of the optical axis and the camera centre at `[0, −cosθ, sinθ]`.

use serde::{Deserialize, Serialize};

use crate::conic::{HomLine2, HomPoint2};
use crate::error::{Error, Result};
use crate::pencil::PencilDecomposition;
use crate::pose::VanishingCandidates;

/// Products below this fraction of `|z̄₁||z̄₃|` are treated as zero.
pub const SEPARATION_TOL: f64 = 1e-10;
/// Band around the side boundary in which no decision is taken.
pub const SIDE_BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSideInfo {
    /// Elevation of the camera centre above the plane, as seen from `q`; in `[0, π/2)`.
    pub theta: f64,
    /// Circle centre in the plane frame, camera–`q` distance as unit.
    pub x_c: f64,
    pub y_c: f64,
    /// Circle radius, same unit.
    pub radius: f64,
}

impl SceneSideInfo {
    pub fn new(theta: f64, x_c: f64, y_c: f64, radius: f64) -> Result<Self> {
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidArgument(format!(
                "theta must lie in [0, π/2), got {theta}"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) || !x_c.is_finite() || !y_c.is_finite() {
            return Err(Error::InvalidArgument(
                "side info needs a positive radius and finite centre".into(),
            ));
        }
        Ok(Self {
            theta,
            x_c,
            y_c,
            radius,
        })
    }

    /// Optical axis through the circle centre.
    pub fn centered(theta: f64, radius: f64) -> Result<Self> {
        Self::new(theta, 0.0, 0.0, radius)
    }

    /// `cosθ(y_c² − R²)(y_c + cosθ) + y_c cosθ(1 + x_c²) + x_c² + y_c²`.
    pub fn side_polynomial(&self) -> f64 {
        let c = self.theta.cos();
        let (x, y, r) = (self.x_c, self.y_c, self.radius);
        c * (y * y - r * r) * (y + c) + y * c * (1.0 + x * x) + x * x + y * y
    }

    /// Principal-plane trace `L` as a line of the plane frame: `y cosθ + 1 = 0`.
    pub fn principal_trace(&self) -> HomLine2 {
        HomLine2::new(0.0, self.theta.cos(), 1.0).expect("nonzero line")
    }
}

/// The world base points lie on the same side of `L`.
///
/// Checked against an explicit geometric construction of the base points
/// (see the acceptance suite): the side polynomial is positive exactly when
/// they do.
pub fn same_side_condition(s: &SceneSideInfo) -> bool {
    s.side_polynomial() > 0.0
}

/// Circle centre beyond `L'` on the camera side (`y_c > 0`) and the foot
/// `(0, y_c)` outside the circle of radius `R` around `q`.
pub fn sufficient_condition_check(s: &SceneSideInfo) -> bool {
    s.y_c > 0.0 && s.y_c * s.y_c - s.radius * s.radius > 0.0
}

/// `(lᵀp̄₁)(lᵀp̄₃)` with `p̄ = p / p₃`; negative when `l` separates the points.
pub fn separation_product(l: &HomLine2, p1: &HomPoint2, p3: &HomPoint2) -> Result<f64> {
    const INFINITY_TOL: f64 = 1e-12;
    if p1.is_at_infinity(INFINITY_TOL) || p3.is_at_infinity(INFINITY_TOL) {
        return Err(Error::BasePointAtInfinity);
    }
    let a = p1.dehomogenized().expect("finite");
    let b = p3.dehomogenized().expect("finite");
    Ok(l.coords().dot(&a) * l.coords().dot(&b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    First,
    Second,
}

impl Choice {
    pub fn index(self) -> usize {
        match self {
            Choice::First => 0,
            Choice::Second => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisambiguationRule {
    SufficientCondition,
    SeparationTest,
    SingleCandidate,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisambiguationResult {
    pub selected: Option<Choice>,
    pub rule_fired: DisambiguationRule,
    /// `(vᵢᵀz̄₁)(vᵢᵀz̄₃)` for each candidate.
    pub separation_products: Vec<f64>,
}

/// Picks the vanishing line using the side of the world base points.
///
/// Without side information the twofold case stays undecided.
pub fn select_vanishing_line(
    cand: &VanishingCandidates,
    p: &PencilDecomposition,
    side: Option<&SceneSideInfo>,
) -> Result<DisambiguationResult> {
    let (z1, z3) = (&p.base_points[0], &p.base_points[2]);
    if cand.candidates.len() == 1 {
        // Fronto-parallel: a base point may sit at infinity; nothing to separate.
        let separation_products = cand
            .candidates
            .iter()
            .map(|c| separation_product(&c.line.unit(), z1, z3))
            .collect::<Result<Vec<_>>>()
            .unwrap_or_default();
        return Ok(DisambiguationResult {
            selected: Some(Choice::First),
            rule_fired: DisambiguationRule::SingleCandidate,
            separation_products,
        });
    }
    let separation_products = cand
        .candidates
        .iter()
        .map(|c| separation_product(&c.line.unit(), z1, z3))
        .collect::<Result<Vec<_>>>()?;

    let undecided = |products: Vec<f64>| DisambiguationResult {
        selected: None,
        rule_fired: DisambiguationRule::None,
        separation_products: products,
    };

    let Some(side) = side else {
        return Ok(undecided(separation_products));
    };
    let lhs = side.side_polynomial();
    if lhs.abs() <= SIDE_BOUNDARY_TOL {
        return Ok(undecided(separation_products));
    }

    // Products scale with |z̄₁||z̄₃| for a unit line.
    let scale = z1.dehomogenized().expect("checked finite").norm()
        * z3.dehomogenized().expect("checked finite").norm();
    let tol = SEPARATION_TOL * scale;
    let (p0, p1) = (separation_products[0], separation_products[1]);
    if p0.abs() <= tol || p1.abs() <= tol || (p0 < 0.0) == (p1 < 0.0) {
        return Ok(undecided(separation_products));
    }

    let want_separating = !same_side_condition(side);
    let selected = if (p0 < 0.0) == want_separating {
        Choice::First
    } else {
        Choice::Second
    };
    let rule_fired = if sufficient_condition_check(side) {
        DisambiguationRule::SufficientCondition
    } else {
        DisambiguationRule::SeparationTest
    };
    Ok(DisambiguationResult {
        selected: Some(selected),
        rule_fired,
        separation_products,
    })
}
