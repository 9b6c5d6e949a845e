//! Conics, points and lines of the projective plane.
//!
//! A conic is stored as a real symmetric 3×3 matrix `m`; the point `x` lies on
//! it when `xᵀ m x = 0`. Homogeneous points and lines are 3-vectors defined up
//! to a nonzero scale.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance under which an eigenvalue counts as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

const SINGULAR_DET_TOL: f64 = 1e-14;

/// Homogeneous point of the projective plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct HomPoint2(Vector3<f64>);

/// Homogeneous line of the projective plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct HomLine2(Vector3<f64>);

macro_rules! homogeneous_common {
    ($ty:ident) => {
        impl $ty {
            pub fn new(x: f64, y: f64, w: f64) -> Result<Self> {
                Self::from_vector(Vector3::new(x, y, w))
            }

            pub fn from_vector(v: Vector3<f64>) -> Result<Self> {
                if !v.iter().all(|c| c.is_finite()) {
                    return Err(Error::Malformed("non-finite homogeneous coordinate".into()));
                }
                if v.amax() == 0.0 {
                    return Err(Error::ZeroVector);
                }
                Ok(Self(v))
            }

            pub fn coords(&self) -> &Vector3<f64> {
                &self.0
            }

            /// Same element scaled to unit Euclidean norm.
            pub fn unit(&self) -> Self {
                Self(self.0.normalize())
            }

            /// Angle between the two representative vectors, ignoring sign and scale.
            pub fn angle_to(&self, other: &Self) -> f64 {
                let a = self.0.normalize();
                let b = other.0.normalize();
                a.cross(&b).norm().atan2(a.dot(&b).abs())
            }
        }

        impl TryFrom<[f64; 3]> for $ty {
            type Error = Error;
            fn try_from(a: [f64; 3]) -> Result<Self> {
                Self::new(a[0], a[1], a[2])
            }
        }

        impl From<$ty> for [f64; 3] {
            fn from(p: $ty) -> Self {
                [p.0.x, p.0.y, p.0.z]
            }
        }
    };
}

homogeneous_common!(HomPoint2);
homogeneous_common!(HomLine2);

impl HomPoint2 {
    pub fn finite(x: f64, y: f64) -> Self {
        Self(Vector3::new(x, y, 1.0))
    }

    pub fn is_at_infinity(&self, tol: f64) -> bool {
        self.0.z.abs() <= tol * self.0.amax()
    }

    /// Affine coordinates, or `None` for a point at infinity.
    pub fn euclidean(&self) -> Option<Vector2<f64>> {
        (self.0.z != 0.0).then(|| Vector2::new(self.0.x / self.0.z, self.0.y / self.0.z))
    }

    /// Representative with third coordinate 1 (`x̄ = x / x₃`).
    pub fn dehomogenized(&self) -> Option<Vector3<f64>> {
        (self.0.z != 0.0).then(|| self.0 / self.0.z)
    }
}

impl HomLine2 {
    pub fn at_infinity() -> Self {
        Self(Vector3::z())
    }

    /// Signed incidence value `lᵀx`.
    pub fn apply(&self, p: &HomPoint2) -> f64 {
        self.0.dot(&p.0)
    }

    /// Line through two points.
    pub fn through(a: &HomPoint2, b: &HomPoint2) -> Result<Self> {
        Self::from_vector(a.0.cross(&b.0))
    }
}

/// Eigen-signature of a symmetric matrix: counts of positive and negative
/// eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub p: u8,
    pub n: u8,
}

impl Signature {
    /// Order-collapsed form `(max(p,n), min(p,n))`, invariant under any
    /// projective transformation and any nonzero rescaling.
    pub fn unordered(&self) -> (u8, u8) {
        (self.p.max(self.n), self.p.min(self.n))
    }

    pub fn rank(&self) -> u8 {
        self.p + self.n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConicKind {
    RealEllipse,
    VirtualConic,
    LinePair,
    Other,
}

/// Real symmetric 3×3 matrix viewed as a conic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConicRepr", into = "ConicRepr")]
pub struct Conic {
    m: Matrix3<f64>,
    kind: ConicKind,
}

/// Accepted JSON layouts: `{"m": [[..],[..],[..]]}`, `{"coeffs": [a,b,c,d,e,f]}`
/// or a bare `[a,b,c,d,e,f]` for `ax² + bxy + cy² + dx + ey + f = 0`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ConicRepr {
    Matrix { m: [[f64; 3]; 3] },
    Coeffs { coeffs: [f64; 6] },
    Bare([f64; 6]),
}

impl TryFrom<ConicRepr> for Conic {
    type Error = Error;
    fn try_from(r: ConicRepr) -> Result<Self> {
        match r {
            ConicRepr::Matrix { m } => Conic::new(Matrix3::from_fn(|i, j| m[i][j])),
            ConicRepr::Coeffs { coeffs } | ConicRepr::Bare(coeffs) => {
                Conic::from_coefficients(coeffs)
            }
        }
    }
}

impl From<Conic> for ConicRepr {
    fn from(c: Conic) -> Self {
        ConicRepr::Matrix {
            m: std::array::from_fn(|i| std::array::from_fn(|j| c.m[(i, j)])),
        }
    }
}

impl Conic {
    /// Builds a conic from any 3×3 matrix; the stored matrix is its symmetric
    /// part, so it is exactly symmetric.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if !m.iter().all(|c| c.is_finite()) {
            return Err(Error::Malformed("non-finite conic entry".into()));
        }
        if m.amax() == 0.0 {
            return Err(Error::NotAConic);
        }
        let sym = Matrix3::from_fn(|i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
        let kind = classify(&sym, DEFAULT_RANK_TOL);
        Ok(Self { m: sym, kind })
    }

    /// `ax² + bxy + cy² + dx + ey + f = 0`.
    pub fn from_coefficients(k: [f64; 6]) -> Result<Self> {
        let [a, b, c, d, e, f] = k;
        #[rustfmt::skip]
        let m = Matrix3::new(
            a,       b / 2.0, d / 2.0,
            b / 2.0, c,       e / 2.0,
            d / 2.0, e / 2.0, f,
        );
        Self::new(m)
    }

    pub fn circle(cx: f64, cy: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(
                "circle radius must be positive".into(),
            ));
        }
        #[rustfmt::skip]
        let m = Matrix3::new(
            1.0, 0.0, -cx,
            0.0, 1.0, -cy,
            -cx, -cy, cx * cx + cy * cy - radius * radius,
        );
        Self::new(m)
    }

    pub fn unit_circle() -> Self {
        Self::new(Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0))).expect("unit circle")
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn kind(&self) -> ConicKind {
        self.kind
    }

    pub fn coefficients(&self) -> [f64; 6] {
        let m = &self.m;
        [
            m[(0, 0)],
            2.0 * m[(0, 1)],
            m[(1, 1)],
            2.0 * m[(0, 2)],
            2.0 * m[(1, 2)],
            m[(2, 2)],
        ]
    }

    /// `xᵀ m x`.
    pub fn eval(&self, x: &Vector3<f64>) -> f64 {
        x.dot(&(self.m * x))
    }

    pub fn signature(&self, tol: f64) -> Result<Signature> {
        signature(&self.m, tol)
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.m * k)
    }

    /// Canonical representative of the projective class: unit Frobenius norm,
    /// sign fixed so the first significant entry (row-major) is positive.
    pub fn canonical_matrix(&self) -> Matrix3<f64> {
        canonical_scale(&self.m)
    }

    /// Largest elementwise gap between the canonical representatives.
    pub fn projective_distance(&self, other: &Conic) -> f64 {
        (canonical_scale(&self.m) - canonical_scale(&other.m)).amax()
    }

    /// Center, semi-axes and major-axis angle of a real ellipse.
    pub fn ellipse_geometry(&self) -> Result<EllipseGeometry> {
        if self.kind != ConicKind::RealEllipse {
            return Err(Error::NotAnEllipse);
        }
        let a2 = self.m.fixed_view::<2, 2>(0, 0).into_owned();
        let b = Vector2::new(self.m[(0, 2)], self.m[(1, 2)]);
        let center = -a2.lu().solve(&b).ok_or(Error::NotAnEllipse)?;
        let value_at_center = self.m[(2, 2)] + b.dot(&center);
        // (x − c)ᵀ A (x − c) = −value_at_center; flip so A is positive definite.
        let (a2, rhs) = if a2.trace() < 0.0 {
            (-a2, value_at_center)
        } else {
            (a2, -value_at_center)
        };
        let eig = SymmetricEigen::new(a2);
        let (i_major, i_minor) = if eig.eigenvalues[0] <= eig.eigenvalues[1] {
            (0, 1)
        } else {
            (1, 0)
        };
        let (l_major, l_minor) = (eig.eigenvalues[i_major], eig.eigenvalues[i_minor]);
        if !(l_major > 0.0 && rhs > 0.0) {
            return Err(Error::NotAnEllipse);
        }
        let dir = eig.eigenvectors.column(i_major);
        Ok(EllipseGeometry {
            center,
            semi_major: (rhs / l_major).sqrt(),
            semi_minor: (rhs / l_minor).sqrt(),
            angle: dir[1].atan2(dir[0]),
        })
    }
}

/// Metric description of an ellipse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseGeometry {
    pub center: Vector2<f64>,
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Direction of the major axis, radians from the x-axis.
    pub angle: f64,
}

impl EllipseGeometry {
    pub fn point_at(&self, t: f64) -> Vector2<f64> {
        let (s, c) = self.angle.sin_cos();
        let (x, y) = (self.semi_major * t.cos(), self.semi_minor * t.sin());
        self.center + Vector2::new(c * x - s * y, s * x + c * y)
    }
}

/// Counts eigenvalues above `tol · max|λ|` in magnitude by sign.
pub fn signature(m: &Matrix3<f64>, tol: f64) -> Result<Signature> {
    if m.amax() == 0.0 {
        return Err(Error::NotAConic);
    }
    let eig = SymmetricEigen::new(symmetric_part(m)).eigenvalues;
    let scale = eig.amax();
    let cut = tol * scale;
    Ok(Signature {
        p: eig.iter().filter(|&&l| l > cut).count() as u8,
        n: eig.iter().filter(|&&l| l < -cut).count() as u8,
    })
}

fn symmetric_part(m: &Matrix3<f64>) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

fn classify(m: &Matrix3<f64>, tol: f64) -> ConicKind {
    let a2: Matrix2<f64> = m.fixed_view::<2, 2>(0, 0).into_owned();
    let scale = a2.amax();
    if scale > 0.0 && a2.determinant() > tol * scale * scale {
        // Definite quadratic part: move to the centre, where the conic is
        // diag(A, f'). The congruence keeps the signature and avoids judging
        // rank from the eigenvalue spread of pixel-coordinate matrices.
        let b = Vector2::new(m[(0, 2)], m[(1, 2)]);
        let Some(center) = a2.lu().solve(&b) else {
            return ConicKind::Other;
        };
        let shift = b.dot(&center);
        let f = m[(2, 2)] - shift;
        if f.abs() <= tol * (m[(2, 2)].abs() + shift.abs()).max(f64::MIN_POSITIVE) {
            return ConicKind::LinePair;
        }
        return if (f < 0.0) == (a2.trace() > 0.0) {
            ConicKind::RealEllipse
        } else {
            ConicKind::VirtualConic
        };
    }
    let Ok(sig) = signature(m, tol) else {
        return ConicKind::Other;
    };
    match sig.rank() {
        2 => ConicKind::LinePair,
        _ => ConicKind::Other,
    }
}

/// `|det m| / Π‖rowᵢ‖`, in `[0, 1]` by Hadamard's inequality; insensitive to
/// the row scaling typical of pixel-coordinate matrices.
pub(crate) fn relative_det(m: &Matrix3<f64>) -> f64 {
    let rows: f64 = (0..3).map(|i| m.row(i).norm()).product();
    if rows == 0.0 {
        0.0
    } else {
        m.determinant().abs() / rows
    }
}

fn canonical_scale(m: &Matrix3<f64>) -> Matrix3<f64> {
    let norm = m.norm();
    if norm == 0.0 {
        return *m;
    }
    let n = m / norm;
    let cut = 1e-9 * n.amax();
    // Row-major scan.
    let first = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|ij| n[ij])
        .find(|v| v.abs() > cut);
    match first {
        Some(v) if v < 0.0 => -n,
        _ => n,
    }
}

/// `k · m` with `det = 1`, `k` the real cube root of `1/det(m)`.
pub fn normalize_unit_det(c: &Conic) -> Result<Conic> {
    if relative_det(&c.m) <= SINGULAR_DET_TOL {
        return Err(Error::DegenerateConic);
    }
    let d = c.m.determinant();
    Conic::new(c.m * (1.0 / d).cbrt())
}

/// Image of `c` under the point map `h`: `h⁻ᵀ c h⁻¹`.
pub fn transform_conic(c: &Conic, h: &Matrix3<f64>) -> Result<Conic> {
    let h_inv = invert(h).ok_or(Error::SingularTransform)?;
    Conic::new(h_inv.transpose() * c.m * h_inv)
}

/// Image of a line under the point map `h`: `h⁻ᵀ l`.
pub fn transform_line(l: &HomLine2, h: &Matrix3<f64>) -> Result<HomLine2> {
    let h_inv = invert(h).ok_or(Error::SingularTransform)?;
    HomLine2::from_vector(h_inv.transpose() * l.0)
}

pub fn transform_point(p: &HomPoint2, h: &Matrix3<f64>) -> Result<HomPoint2> {
    HomPoint2::from_vector(h * p.0)
}

pub(crate) fn invert(h: &Matrix3<f64>) -> Option<Matrix3<f64>> {
    if relative_det(h) <= SINGULAR_DET_TOL {
        return None;
    }
    h.try_inverse()
}

/// Pole of `l` with respect to `c`: `c⁻¹ l`.
pub fn pole(c: &Conic, l: &HomLine2) -> Result<HomPoint2> {
    let inv = invert(&c.m).ok_or(Error::SingularConic)?;
    HomPoint2::from_vector(inv * l.0)
}

/// Polar line of `p` with respect to `c`: `c p`.
pub fn polar(c: &Conic, p: &HomPoint2) -> Result<HomLine2> {
    HomLine2::from_vector(c.m * p.0)
}

/// Splits a rank-2 conic `d` with real lines into `(l_a, l_b)` such that
/// `l_a l_bᵀ + l_b l_aᵀ ∝ d`. Order of the two lines is arbitrary.
pub fn decompose_line_pair(d: &Conic) -> Result<(HomLine2, HomLine2)> {
    decompose_line_pair_tol(d, DEFAULT_RANK_TOL)
}

pub fn decompose_line_pair_tol(d: &Conic, tol: f64) -> Result<(HomLine2, HomLine2)> {
    let eig = SymmetricEigen::new(d.m);
    let sig = signature(&d.m, tol)?;
    if sig.rank() != 2 {
        return Err(Error::NotALinePair);
    }
    if sig.unordered() != (1, 1) {
        return Err(Error::ComplexLinePair);
    }
    let (mut i_pos, mut i_neg) = (0, 0);
    for i in 0..3 {
        if eig.eigenvalues[i] > eig.eigenvalues[i_pos] {
            i_pos = i;
        }
        if eig.eigenvalues[i] < eig.eigenvalues[i_neg] {
            i_neg = i;
        }
    }
    // d = μ₊ e₊e₊ᵀ + μ₋ e₋e₋ᵀ = ½[(a+b)(a−b)ᵀ + (a−b)(a+b)ᵀ] with a = √μ₊ e₊, b = √−μ₋ e₋.
    let a = eig.eigenvectors.column(i_pos) * eig.eigenvalues[i_pos].sqrt();
    let b = eig.eigenvectors.column(i_neg) * (-eig.eigenvalues[i_neg]).sqrt();
    Ok((HomLine2::from_vector(a + b)?, HomLine2::from_vector(a - b)?))
}

/// Symmetric line-pair matrix `l_a l_bᵀ + l_b l_aᵀ`.
pub fn line_pair_matrix(la: &HomLine2, lb: &HomLine2) -> Matrix3<f64> {
    la.0 * lb.0.transpose() + lb.0 * la.0.transpose()
}

/// Adjugate (transposed cofactor matrix); the dual conic of a nonsingular `m`
/// up to scale, and still meaningful for rank-2 matrices.
pub fn adjugate(m: &Matrix3<f64>) -> Matrix3<f64> {
    let c0 = m.column(1).cross(&m.column(2));
    let c1 = m.column(2).cross(&m.column(0));
    let c2 = m.column(0).cross(&m.column(1));
    Matrix3::from_rows(&[c0.transpose(), c1.transpose(), c2.transpose()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diag(a: f64, b: f64, c: f64) -> Conic {
        Conic::new(Matrix3::from_diagonal(&Vector3::new(a, b, c))).unwrap()
    }

    fn proportional(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
        (canonical_scale(a) - canonical_scale(b)).amax()
    }

    #[test]
    fn signature_examples() {
        assert_eq!(
            diag(1.0, 1.0, -1.0).signature(1e-9).unwrap(),
            Signature { p: 2, n: 1 }
        );
        assert_eq!(
            diag(1.0, -1.0, 0.0).signature(1e-9).unwrap(),
            Signature { p: 1, n: 1 }
        );
        let mut w = Matrix3::identity();
        w[(0, 2)] = -0.3;
        w[(2, 0)] = -0.3;
        assert_eq!(signature(&w, 1e-9).unwrap(), Signature { p: 3, n: 0 });
        assert!(matches!(
            signature(&Matrix3::zeros(), 1e-9),
            Err(Error::NotAConic)
        ));
    }

    #[test]
    fn zero_matrix_is_rejected() {
        assert!(matches!(
            Conic::new(Matrix3::zeros()),
            Err(Error::NotAConic)
        ));
    }

    #[test]
    fn kinds() {
        assert_eq!(diag(1.0, 1.0, -1.0).kind(), ConicKind::RealEllipse);
        assert_eq!(diag(1.0, 1.0, 1.0).kind(), ConicKind::VirtualConic);
        assert_eq!(diag(1.0, -1.0, 0.0).kind(), ConicKind::LinePair);
        assert_eq!(diag(1.0, 1.0, 0.0).kind(), ConicKind::LinePair);
        assert_eq!(diag(1.0, -1.0, -1.0).kind(), ConicKind::Other);
    }

    #[test]
    fn normalize_unit_det_examples() {
        let n = normalize_unit_det(&diag(2.0, 2.0, 2.0)).unwrap();
        assert!((n.matrix() - Matrix3::identity()).amax() < 1e-15);
        let n = normalize_unit_det(&diag(1.0, 1.0, -1.0)).unwrap();
        assert!(
            (n.matrix() - Matrix3::from_diagonal(&Vector3::new(-1.0, -1.0, 1.0))).amax() < 1e-15
        );
        assert!(matches!(
            normalize_unit_det(&diag(1.0, -1.0, 0.0)),
            Err(Error::DegenerateConic)
        ));
    }

    #[test]
    fn pole_examples() {
        let c = Conic::unit_circle();
        let p = pole(&c, &HomLine2::at_infinity()).unwrap();
        assert!((p.dehomogenized().unwrap() - Vector3::z()).norm() < 1e-15);
        let p = pole(&c, &HomLine2::new(1.0, 0.0, -2.0).unwrap()).unwrap();
        assert!((p.dehomogenized().unwrap() - Vector3::new(0.5, 0.0, 1.0)).norm() < 1e-15);
        assert!(matches!(
            pole(&diag(1.0, -1.0, 0.0), &HomLine2::at_infinity()),
            Err(Error::SingularConic)
        ));
    }

    #[test]
    fn transform_identity_and_translation() {
        let c = Conic::circle(0.3, -0.2, 1.7).unwrap();
        let same = transform_conic(&c, &Matrix3::identity()).unwrap();
        assert!(same.projective_distance(&c) < 1e-15);

        let t = Matrix3::new(1.0, 0.0, 2.0, 0.0, 1.0, -3.0, 0.0, 0.0, 1.0);
        let moved = transform_conic(&Conic::unit_circle(), &t).unwrap();
        let expected = Conic::circle(2.0, -3.0, 1.0).unwrap();
        assert!(moved.projective_distance(&expected) < 1e-14);
        assert!(matches!(
            transform_conic(&c, &Matrix3::zeros()),
            Err(Error::SingularTransform)
        ));
    }

    #[test]
    fn transform_sample_and_check() {
        #[rustfmt::skip]
        let h = Matrix3::new(
            1.2, 0.3, 5.0,
            -0.1, 0.9, 2.0,
            0.02, -0.05, 1.0,
        );
        let c = transform_conic(&Conic::unit_circle(), &h).unwrap();
        let scale = c.matrix().norm();
        for k in 0..8 {
            let t = k as f64 * std::f64::consts::TAU / 8.0;
            let x = h * Vector3::new(t.cos(), t.sin(), 1.0);
            let x = x / x.norm();
            assert!(c.eval(&x).abs() / scale < 1e-10);
        }
    }

    #[test]
    fn line_pair_examples() {
        let (a, b) = decompose_line_pair(&diag(1.0, -1.0, 0.0)).unwrap();
        let mut got = [a.unit(), b.unit()];
        got.sort_by(|p, q| p.coords().y.partial_cmp(&q.coords().y).unwrap());
        let want = [
            HomLine2::new(1.0, -1.0, 0.0).unwrap(),
            HomLine2::new(1.0, 1.0, 0.0).unwrap(),
        ];
        for (g, w) in got.iter().zip(&want) {
            assert!(g.angle_to(w) < 1e-12);
        }

        let finite = HomLine2::new(0.4, -1.3, 2.2).unwrap();
        let d = Conic::new(line_pair_matrix(&HomLine2::at_infinity(), &finite)).unwrap();
        let (a, b) = decompose_line_pair(&d).unwrap();
        let hit = [a, b]
            .iter()
            .any(|l| l.angle_to(&HomLine2::at_infinity()) < 1e-10);
        assert!(hit);
    }

    #[test]
    fn line_pair_errors() {
        assert!(matches!(
            decompose_line_pair(&diag(1.0, 1.0, 0.0)),
            Err(Error::ComplexLinePair)
        ));
        assert!(matches!(
            decompose_line_pair(&diag(1.0, 1.0, -1.0)),
            Err(Error::NotALinePair)
        ));
        assert!(matches!(
            decompose_line_pair(&diag(1.0, 0.0, 0.0)),
            Err(Error::NotALinePair)
        ));
    }

    #[test]
    fn ellipse_geometry_of_axis_aligned() {
        let e = Conic::from_coefficients([0.25, 0.0, 1.0, 0.0, 0.0, -1.0]).unwrap();
        let g = e.ellipse_geometry().unwrap();
        assert!((g.semi_major - 2.0).abs() < 1e-14);
        assert!((g.semi_minor - 1.0).abs() < 1e-14);
        assert!(g.center.norm() < 1e-14);
        assert!(g.angle.sin().abs() < 1e-14);
    }

    #[test]
    fn json_layouts() {
        let a: Conic = serde_json::from_str(r#"{"m": [[1,0,0],[0,1,0],[0,0,-1]]}"#).unwrap();
        let b: Conic = serde_json::from_str("[1,0,1,0,0,-1]").unwrap();
        let c: Conic = serde_json::from_str(r#"{"coeffs": [2,0,2,0,0,-2]}"#).unwrap();
        assert_eq!(a, b);
        assert!(a.projective_distance(&c) < 1e-15);
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(
            text,
            r#"{"m":[[1.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.0,-1.0]]}"#
        );
        assert!(serde_json::from_str::<Conic>(r#"{"m": [[0,0,0],[0,0,0],[0,0,0]]}"#).is_err());
        assert!(serde_json::from_str::<HomPoint2>("[0,0,0]").is_err());
    }

    fn well_conditioned_h() -> impl Strategy<Value = Matrix3<f64>> {
        proptest::array::uniform9(-1.0f64..1.0).prop_filter_map("ill-conditioned", |a| {
            let h = Matrix3::from_row_slice(&a) + Matrix3::identity() * 2.0;
            let svd = h.svd(false, false);
            let cond = svd.singular_values.max() / svd.singular_values.min();
            (cond < 20.0).then_some(h)
        })
    }

    fn random_sym() -> impl Strategy<Value = Matrix3<f64>> {
        proptest::array::uniform6(-2.0f64..2.0)
            .prop_map(|a| Matrix3::new(a[0], a[1], a[2], a[1], a[3], a[4], a[2], a[4], a[5]))
    }

    proptest! {
        #[test]
        fn constructed_conics_are_exactly_symmetric(a in proptest::array::uniform9(-5.0f64..5.0)) {
            let m = Matrix3::from_row_slice(&a);
            if let Ok(c) = Conic::new(m) {
                prop_assert_eq!(c.matrix(), &c.matrix().transpose());
            }
        }

        #[test]
        fn normalize_is_idempotent(m in random_sym()) {
            if let Ok(n) = normalize_unit_det(&Conic::new(m).unwrap()) {
                prop_assert!((n.matrix().determinant() - 1.0).abs() < 1e-12);
                let nn = normalize_unit_det(&n).unwrap();
                prop_assert!((nn.matrix() - n.matrix()).amax() <= 1e-12 * n.matrix().amax());
            }
        }

        #[test]
        fn transform_round_trip(h in well_conditioned_h(), m in random_sym()) {
            let c = Conic::new(m).unwrap();
            let there = transform_conic(&c, &h).unwrap();
            let back = transform_conic(&there, &h.try_inverse().unwrap()).unwrap();
            prop_assert!(proportional(back.matrix(), c.matrix()) < 1e-10);
        }

        #[test]
        fn signature_is_projective_invariant(h in well_conditioned_h(), m in random_sym()) {
            let c = Conic::new(m).unwrap();
            let eig = SymmetricEigen::new(m).eigenvalues;
            // Stay away from the rank tolerance so the count is well defined.
            prop_assume!(eig.iter().all(|l| l.abs() > 1e-3 * eig.amax()));
            let t = transform_conic(&c, &h).unwrap();
            prop_assert_eq!(c.signature(1e-9).unwrap().unordered(), t.signature(1e-9).unwrap().unordered());
        }

        #[test]
        fn polar_of_pole(m in random_sym(), l in proptest::array::uniform3(-3.0f64..3.0)) {
            let c = Conic::new(m).unwrap();
            prop_assume!(m.determinant().abs() > 1e-2);
            let Ok(line) = HomLine2::new(l[0], l[1], l[2]) else { return Ok(()); };
            prop_assume!(line.coords().norm() > 1e-3);
            let back = polar(&c, &pole(&c, &line).unwrap()).unwrap();
            prop_assert!(back.angle_to(&line) < 1e-9);
        }

        #[test]
        fn line_pair_reconstruction(a in proptest::array::uniform3(-2.0f64..2.0), b in proptest::array::uniform3(-2.0f64..2.0)) {
            let la = HomLine2::new(a[0], a[1], a[2]);
            let lb = HomLine2::new(b[0], b[1], b[2]);
            let (Ok(la), Ok(lb)) = (la, lb) else { return Ok(()); };
            prop_assume!(la.angle_to(&lb) > 1e-2 && la.coords().norm() > 0.1 && lb.coords().norm() > 0.1);
            let d = Conic::new(line_pair_matrix(&la, &lb)).unwrap();
            let (xa, xb) = decompose_line_pair(&d).unwrap();
            let rebuilt = line_pair_matrix(&xa, &xb);
            // best scalar s minimising ‖rebuilt − s·d‖
            let s = rebuilt.dot(d.matrix()) / d.matrix().norm_squared();
            prop_assert!((rebuilt - d.matrix() * s).norm() / (d.matrix() * s).norm() < 1e-10);
        }
    }
}
