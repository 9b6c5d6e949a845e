//! Test-side oracles, written without the library's numerics.
//!
//! Pencil eigenvalues come from the characteristic cubic `det(A − βB)` in
//! closed form; eigenvectors from cross products of the rows of `A − βB`.
//! Plane base points of a circle and the back-projected absolute conic come
//! from the limit points of the coaxal system they span.
#![allow(dead_code)]

use nalgebra::{Matrix3, Vector2, Vector3};

pub fn adj(m: &Matrix3<f64>) -> Matrix3<f64> {
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| {
        m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)]
    };
    // adj = transpose of the cofactor matrix
    Matrix3::new(
        c(1, 2, 1, 2),
        -c(0, 2, 1, 2),
        c(0, 1, 1, 2),
        -c(1, 2, 0, 2),
        c(0, 2, 0, 2),
        -c(0, 1, 0, 2),
        c(1, 2, 0, 1),
        -c(0, 2, 0, 1),
        c(0, 1, 0, 1),
    )
}

pub fn det(m: &Matrix3<f64>) -> f64 {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// `m / cbrt(det m)`, so the result has determinant exactly one.
pub fn unit_det(m: &Matrix3<f64>) -> Matrix3<f64> {
    m / det(m).cbrt()
}

/// Coefficients `[c0, c1, c2, c3]` of `det(A − βB) = Σ cᵢβⁱ`.
pub fn char_cubic(a: &Matrix3<f64>, b: &Matrix3<f64>) -> [f64; 4] {
    // det(A + tB) = det A + t tr(adj(A)B) + t² tr(A adj(B)) + t³ det B, t = −β
    [det(a), -(adj(a) * b).trace(), (a * adj(b)).trace(), -det(b)]
}

fn horner(c: &[f64; 4], x: f64) -> (f64, f64) {
    let p = ((c[3] * x + c[2]) * x + c[1]) * x + c[0];
    let dp = (3.0 * c[3] * x + 2.0 * c[2]) * x + c[1];
    (p, dp)
}

/// The three real roots of a cubic with three real roots, descending,
/// by the trigonometric formula followed by two Newton steps each.
pub fn real_cubic_roots(c: &[f64; 4]) -> [f64; 3] {
    let (a, b, cc) = (c[2] / c[3], c[1] / c[3], c[0] / c[3]);
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + cc;
    let shift = -a / 3.0;
    let mut r = if p.abs() < 1e-300 {
        [shift - q.cbrt(); 3]
    } else {
        let m = 2.0 * (-p / 3.0).max(0.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let tau = std::f64::consts::TAU;
        [0.0, 1.0, 2.0].map(|k| shift + m * (phi - k * tau / 3.0).cos())
    };
    for x in &mut r {
        for _ in 0..2 {
            let (p, dp) = horner(c, *x);
            if dp != 0.0 {
                let step = p / dp;
                if step.is_finite() && step.abs() < 1e-3 * (1.0 + x.abs()) {
                    *x -= step;
                }
            }
        }
    }
    r.sort_by(|x, y| y.total_cmp(x));
    r
}

/// Unit null vector of a rank-2 matrix: the largest cross product of two rows.
pub fn null_vector(m: &Matrix3<f64>) -> Vector3<f64> {
    let rows: Vec<Vector3<f64>> = (0..3).map(|i| m.row(i).transpose()).collect();
    let candidates = [
        rows[0].cross(&rows[1]),
        rows[0].cross(&rows[2]),
        rows[1].cross(&rows[2]),
    ];
    let best = candidates
        .iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap();
    best.normalize()
}

/// Generalized eigen-decomposition of `(A, B)` after unit-det normalization
/// of both: descending roots and matching unit eigenvectors.
pub fn pencil_oracle(a: &Matrix3<f64>, b: &Matrix3<f64>) -> ([f64; 3], [Vector3<f64>; 3]) {
    let (a, b) = (unit_det(a), unit_det(b));
    let l = real_cubic_roots(&char_cubic(&a, &b));
    let v = l.map(|li| null_vector(&(a - b * li)));
    (l, v)
}

/// Sign-invariant angle between two lines or directions, radians.
pub fn angle(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b).abs())
}

/// Point-circle limit points of the coaxal system spanned by the circle
/// `(x_c, y_c, R)` and the back-projected absolute conic. The camera at `(0, −cosθ, sinθ)` above `Z = 0` back-projects the absolute
/// conic to `x² + y² + 2y cosθ + 1 = 0`.
///
/// `S_Q − λS_ψ` is a circle of centre `(x_c, y_c + λcosθ)/(1 − λ)`; it shrinks
/// to a point where `(cos²θ − 1)λ² + (2y_c cosθ + |c|² − R² + 1)λ + R² = 0`.
pub fn limit_points(theta: f64, x_c: f64, y_c: f64, radius: f64) -> [Vector2<f64>; 2] {
    let c = theta.cos();
    let k = x_c * x_c + y_c * y_c - radius * radius;
    let (qa, qb, qc) = (c * c - 1.0, 2.0 * y_c * c + k + 1.0, radius * radius);
    let disc = (qb * qb - 4.0 * qa * qc).sqrt();
    // Stable quadratic roots; qa < 0 < qc so the roots have opposite signs.
    let t = -0.5 * (qb + qb.signum() * disc);
    let roots = [t / qa, qc / t];
    roots.map(|l| Vector2::new(x_c / (1.0 - l), (y_c + l * c) / (1.0 - l)))
}

/// Brute-force reading of the side test: whether the two limit points lie on
/// the same side of the principal plane's trace, found by intersecting the
/// plane through the camera orthogonal to the optical axis with `Z = 0`.
pub fn brute_same_side(theta: f64, x_c: f64, y_c: f64, radius: f64) -> bool {
    let cam = Vector3::new(0.0, -theta.cos(), theta.sin());
    let axis = -cam; // toward q = origin
    let side = |p: &Vector2<f64>| (Vector3::new(p.x, p.y, 0.0) - cam).dot(&axis);
    let [a, b] = limit_points(theta, x_c, y_c, radius);
    side(&a) * side(&b) > 0.0
}

/// Pool-adjacent-violators fit of a nondecreasing sequence.
pub fn isotonic(y: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let n = n1 + n2;
            *blocks.last_mut().unwrap() = ((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, n)| std::iter::repeat_n(m, n))
        .collect()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation, average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
