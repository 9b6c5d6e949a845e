//! Generalized eigen-analysis of a conic pair and the degenerate members of
//! the pencil they span.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::conic::{normalize_unit_det, Conic, ConicKind, HomPoint2, Signature, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};

/// Relative eigenvalue gap under which two roots are treated as one.
pub const COLLISION_TOL: f64 = 1e-7;

/// Solves `a v = λ b v` for symmetric `a` and definite `b`.
///
/// Eigenvalues come back sorted in descending order; eigenvector `i` is
/// column `i` and is normalized so that `vᵀ|b|v = 1`. A negative-definite `b`
/// is handled by negating both matrices.
pub fn generalized_eigen_sym(
    a: &Matrix3<f64>,
    b: &Matrix3<f64>,
) -> Result<(Vector3<f64>, Matrix3<f64>)> {
    let (a, b) = match b.cholesky() {
        Some(_) => (*a, *b),
        None => (-a, -b),
    };
    let chol = b.cholesky().ok_or(Error::NotDefinite)?;
    let l_inv = chol.l().try_inverse().ok_or(Error::NotDefinite)?;
    let s = l_inv * a * l_inv.transpose();
    let s = Matrix3::from_fn(|i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let eig = SymmetricEigen::new(s);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = Vector3::from_fn(|i, _| eig.eigenvalues[order[i]]);
    let l_inv_t = l_inv.transpose();
    let vectors = Matrix3::from_columns(&order.map(|k| l_inv_t * eig.eigenvectors.column(k)));
    Ok((values, vectors))
}

/// Everything the pose stage needs from the pencil `{C − βω}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PencilDecomposition {
    /// Generalized eigenvalues `λ1 ≥ λ2 ≥ λ3`.
    pub lambdas: [f64; 3],
    /// Base points (generalized eigenvectors), unit Euclidean norm, largest
    /// coordinate positive.
    pub base_points: [HomPoint2; 3],
    /// `D_i = C − λ_i ω` on the unit-determinant representatives.
    pub degenerates: [Conic; 3],
    pub signatures: [Signature; 3],
    /// Index of the member with unordered signature {1,1}, when there is one.
    pub real_pair: Option<usize>,
    /// Two eigenvalues collide: the fronto-parallel configuration.
    pub degenerate: bool,
    /// Unit-determinant representative of the ellipse.
    pub conic: Conic,
    /// Unit-determinant representative of the definite conic (usually `ω`).
    pub iac: Conic,
}

impl PencilDecomposition {
    /// `D₂`, the {1,1} member that carries the two vanishing-line candidates.
    pub fn line_pair_member(&self) -> &Conic {
        &self.degenerates[1]
    }

    /// Base point `i` rescaled so that `zᵀωz = 1`.
    pub fn iac_normalized_base_point(&self, i: usize) -> Vector3<f64> {
        let z = *self.base_points[i].coords();
        let w = self.iac.matrix();
        z / z.dot(&(w * z)).abs().sqrt()
    }
}

/// Sign pattern of `values − shift` with entries within `tol·max|values|`
/// counted as zero.
fn shifted_signature(values: &[f64; 3], shift: f64, tol: f64) -> Signature {
    let cut = tol * values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Signature {
        p: values.iter().filter(|&&v| v - shift > cut).count() as u8,
        n: values.iter().filter(|&&v| v - shift < -cut).count() as u8,
    }
}

/// Decomposes the pencil spanned by the ellipse `c` and the definite conic `w`.
///
/// Signatures are read in the frame where `w` is the identity: there `D_i`
/// has eigenvalues `λ_j − λ_i`, so they follow from the sorted roots without
/// judging rank on badly scaled pixel-coordinate matrices.
pub fn decompose_pencil(c: &Conic, w: &Conic) -> Result<PencilDecomposition> {
    if c.kind() != ConicKind::RealEllipse {
        return Err(Error::NotAnEllipse);
    }
    let w = normalize_unit_det(w).map_err(|_| Error::IndefiniteIac)?;
    // A definite matrix with unit determinant is positive definite.
    if w.matrix().cholesky().is_none() {
        return Err(Error::IndefiniteIac);
    }
    let c = normalize_unit_det(c).map_err(|_| Error::NotAnEllipse)?;
    let (values, vectors) =
        generalized_eigen_sym(c.matrix(), w.matrix()).map_err(|_| Error::IndefiniteIac)?;
    if !values.iter().chain(vectors.iter()).all(|v| v.is_finite()) {
        return Err(Error::InvalidPencil);
    }
    let lambdas = [values[0], values[1], values[2]];
    let sig_c = shifted_signature(&lambdas, 0.0, DEFAULT_RANK_TOL);
    if sig_c.rank() != 3 || sig_c.unordered() != (2, 1) {
        return Err(Error::NotAnEllipse);
    }

    let base_points = std::array::from_fn(|i| {
        let v = vectors.column(i).normalize();
        let imax = v.iamax();
        let v = if v[imax] < 0.0 { -v } else { v };
        HomPoint2::from_vector(v).expect("eigenvector is nonzero")
    });

    let degenerates: [Conic; 3] = {
        let mut out = Vec::with_capacity(3);
        for l in lambdas {
            out.push(Conic::new(c.matrix() - w.matrix() * l)?);
        }
        out.try_into().expect("three members")
    };
    let signatures = lambdas.map(|l| shifted_signature(&lambdas, l, COLLISION_TOL));
    let real_pair = signatures
        .iter()
        .position(|s| s.rank() == 2 && s.unordered() == (1, 1));

    let gap_tol = COLLISION_TOL * lambdas[1].abs();
    let degenerate = lambdas[0] - lambdas[1] < gap_tol || lambdas[1] - lambdas[2] < gap_tol;

    Ok(PencilDecomposition {
        lambdas,
        base_points,
        degenerates,
        signatures,
        real_pair,
        degenerate,
        conic: c,
        iac: w,
    })
}
