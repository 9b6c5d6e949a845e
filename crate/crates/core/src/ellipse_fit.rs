//! Ellipse estimation from contour points.
//!
//! Direct least squares under the ellipse constraint `4ac − b² = 1`, solved in
//! the reduced 3×3 form (scatter matrix split into quadratic and linear
//! blocks) on centred, isotropically scaled points.

use nalgebra::{Matrix3, Point2, SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::conic::{Conic, ConicKind};
use crate::error::{Error, Result};

const MIN_POINTS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct ContourPoints {
    pts: Vec<Point2<f64>>,
}

impl ContourPoints {
    pub fn new(pts: Vec<Point2<f64>>) -> Result<Self> {
        if pts.len() < MIN_POINTS {
            return Err(Error::CannotFitEllipse(
                "at least six contour points are required",
            ));
        }
        if pts.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::CannotFitEllipse("non-finite contour point"));
        }
        let n = pts.len() as f64;
        let mean = pts
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + Vector3::new(p.x, p.y, 0.0))
            / n;
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for p in &pts {
            let (dx, dy) = (p.x - mean.x, p.y - mean.y);
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
        let tr = sxx + syy;
        let det = sxx * syy - sxy * sxy;
        // Smallest/largest eigenvalue of the 2×2 scatter, without a solver.
        if tr <= 0.0 || det <= 1e-12 * tr * tr {
            return Err(Error::CannotFitEllipse("contour points are collinear"));
        }
        Ok(Self { pts })
    }

    pub fn points(&self) -> &[Point2<f64>] {
        &self.pts
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }
}

/// Fits an ellipse to the contour; the result is always of kind `RealEllipse`.
pub fn fit_ellipse(contour: &ContourPoints) -> Result<Conic> {
    let pts = contour.points();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.x, b + p.y));
    let (mx, my) = (mx / n, my / n);
    let mean_dist = pts.iter().map(|p| (p.x - mx).hypot(p.y - my)).sum::<f64>() / n;
    let s = std::f64::consts::SQRT_2 / mean_dist;

    let mut s1 = Matrix3::zeros();
    let mut s2 = Matrix3::zeros();
    let mut s3 = Matrix3::zeros();
    for p in pts {
        let (x, y) = (s * (p.x - mx), s * (p.y - my));
        let quad = Vector3::new(x * x, x * y, y * y);
        let lin = Vector3::new(x, y, 1.0);
        s1 += quad * quad.transpose();
        s2 += quad * lin.transpose();
        s3 += lin * lin.transpose();
    }
    let s3_inv = s3
        .try_inverse()
        .ok_or(Error::CannotFitEllipse("degenerate point spread"))?;
    let t = -s3_inv * s2.transpose();
    let reduced = s1 + s2 * t;
    let reduced = Matrix3::from_fn(|i, j| 0.5 * (reduced[(i, j)] + reduced[(j, i)]));

    let a1 = constrained_min(&reduced).ok_or(Error::CannotFitEllipse("no elliptical solution"))?;
    let a2 = t * a1;

    #[rustfmt::skip]
    let normalized = Matrix3::new(
        a1[0],       a1[1] / 2.0, a2[0] / 2.0,
        a1[1] / 2.0, a1[2],       a2[1] / 2.0,
        a2[0] / 2.0, a2[1] / 2.0, a2[2],
    );
    #[rustfmt::skip]
    let denorm = Matrix3::new(
        s,   0.0, -s * mx,
        0.0, s,   -s * my,
        0.0, 0.0, 1.0,
    );
    let m = denorm.transpose() * normalized * denorm;
    let conic = Conic::new(m / m.norm())?;
    if conic.kind() != ConicKind::RealEllipse {
        return Err(Error::CannotFitEllipse("fitted conic has no real points"));
    }
    Ok(conic)
}

fn ellipse_constraint(a: &Vector3<f64>) -> f64 {
    4.0 * a[0] * a[2] - a[1] * a[1]
}

/// Minimizes `aᵀ M a` subject to `4ac − b² = 1` for a positive semidefinite `M`.
fn constrained_min(m: &Matrix3<f64>) -> Option<Vector3<f64>> {
    let eig = SymmetricEigen::new(*m);
    let lmax = eig.eigenvalues.amax();
    if lmax <= 0.0 {
        return None;
    }
    let imin = eig.eigenvalues.imin();
    // Exact data: the null vector is the interpolating conic.
    if eig.eigenvalues[imin] <= 1e-13 * lmax {
        let v = eig.eigenvectors.column(imin).into_owned();
        let g = ellipse_constraint(&v);
        if g > 0.0 {
            return Some(v / g.sqrt());
        }
    }
    // Whiten: a = U Λ^{-1/2} y turns the problem into max yᵀ G y, ‖y‖ = 1.
    let floor = 1e-15 * lmax;
    let w = Matrix3::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.max(floor).sqrt()));
    let basis = eig.eigenvectors * w;
    #[rustfmt::skip]
    let c1 = Matrix3::new(
        0.0, 0.0, 2.0,
        0.0, -1.0, 0.0,
        2.0, 0.0, 0.0,
    );
    let g = basis.transpose() * c1 * basis;
    let g = Matrix3::from_fn(|i, j| 0.5 * (g[(i, j)] + g[(j, i)]));
    let ge = SymmetricEigen::new(g);
    let imax = ge.eigenvalues.imax();
    if ge.eigenvalues[imax] <= 0.0 {
        return None;
    }
    let a = basis * ge.eigenvectors.column(imax);
    let c = ellipse_constraint(&a);
    (c > 0.0).then(|| a / c.sqrt())
}

/// `n` points at uniform parametric angles on the ellipse `c`, each shifted by
/// isotropic gaussian noise of standard deviation `noise_sigma` per axis.
pub fn sample_ellipse(
    c: &Conic,
    n: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<Vec<Point2<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_ellipse_with(c, n, noise_sigma, &mut rng)
}

pub fn sample_ellipse_with<R: Rng + ?Sized>(
    c: &Conic,
    n: usize,
    noise_sigma: f64,
    rng: &mut R,
) -> Result<Vec<Point2<f64>>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be positive".into(),
        ));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise sigma must be non-negative, got {noise_sigma}"
        )));
    }
    let g = c.ellipse_geometry()?;
    let normal =
        Normal::new(0.0, noise_sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((0..n)
        .map(|k| {
            let t = k as f64 * std::f64::consts::TAU / n as f64;
            let p = g.point_at(t);
            if noise_sigma > 0.0 {
                Point2::new(p.x + normal.sample(rng), p.y + normal.sample(rng))
            } else {
                Point2::new(p.x, p.y)
            }
        })
        .collect())
}
