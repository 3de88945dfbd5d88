//! Core of Shape Matrix (CSM) rules and the row-normalized Shape Matrix.
//!
//! Every parallelepiped variant differs only in how the factor `H` is taken
//! from the correlation matrix `R`:
//!
//! | variant | `H` |
//! |---------|-----|
//! | MP-I    | `R` itself |
//! | MP-II   | symmetric square root, `H H = R` |
//! | Rect    | `Q Λ^{1/2}` from `R = Q Λ Qᵀ` |
//! | LTri    | lower Cholesky factor |
//! | UTri    | upper triangular `U` with `U Uᵀ = R` |
//!
//! The shape matrix `S = T H` rescales each row of `H` to unit absolute sum,
//! which pins every marginal interval of `{u : |S⁻¹u| ≤ e}` to `[-1, 1]`.

use nalgebra::DMatrix;

use crate::correlation::ModelVariant;
use crate::error::{Error, Result};
use crate::linalg;

/// Below this `|det S|` the shape matrix is treated as singular.
pub const SINGULAR_DET: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct CoreShapeMatrix {
    pub entries: DMatrix<f64>,
    pub variant: ModelVariant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeMatrix {
    pub entries: DMatrix<f64>,
    pub weights: Vec<f64>,
}

impl ShapeMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn row_abs_sums(&self) -> Vec<f64> {
        row_abs_sums(&self.entries)
    }

    pub fn det(&self) -> f64 {
        linalg::det(&self.entries)
    }

    /// Wraps a stored matrix (e.g. read from a model file) without renormalizing.
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        let weights = row_abs_sums(&entries).iter().map(|s| 1.0 / s).collect();
        let det = linalg::det(&entries);
        if !(det.abs() >= SINGULAR_DET) {
            return Err(Error::SingularShape { det });
        }
        Ok(Self { entries, weights })
    }
}

fn row_abs_sums(m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m.row(i).iter().map(|x| x.abs()).sum()).collect()
}

fn eigen_checked(r: &DMatrix<f64>) -> Result<linalg::SymmetricEigen> {
    let e = linalg::symmetric_eigen(r);
    let min = e.min_value();
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(e)
}

/// MP-II rule: principal square root `Q Λ^{1/2} Qᵀ`.
pub fn symmetric_sqrt(r: &DMatrix<f64>) -> Result<CoreShapeMatrix> {
    let e = eigen_checked(r)?;
    let n = r.nrows();
    let q = &e.vectors;
    let half = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, e.values.iter().map(|l| l.sqrt())));
    let h = q * half * q.transpose();
    let h = (&h + h.transpose()) * 0.5;
    Ok(CoreShapeMatrix { entries: h, variant: ModelVariant::Mp2 })
}

/// MP-I rule: the correlation matrix itself.
pub fn identity_factor(r: &DMatrix<f64>) -> CoreShapeMatrix {
    CoreShapeMatrix { entries: r.clone(), variant: ModelVariant::Mp1 }
}

/// Rectangular rule: `Q Λ^{1/2}`, eigenvalues descending, eigenvector signs
/// fixed so the first nonzero component is positive.
pub fn eigen_factor(r: &DMatrix<f64>) -> Result<CoreShapeMatrix> {
    let e = eigen_checked(r)?;
    let n = r.nrows();
    let h = DMatrix::from_fn(n, n, |i, k| e.vectors[(i, k)] * e.values[k].sqrt());
    Ok(CoreShapeMatrix { entries: h, variant: ModelVariant::Rect })
}

/// LTri rule.
pub fn cholesky_lower(r: &DMatrix<f64>) -> Result<CoreShapeMatrix> {
    let l = linalg::cholesky(r)
        .ok_or_else(|| Error::NotPositiveDefinite { min_eigenvalue: linalg::symmetric_eigen(r).min_value() })?;
    Ok(CoreShapeMatrix { entries: l, variant: ModelVariant::LTri })
}

/// UTri rule: Cholesky of the order-reversed matrix, reversed back.
pub fn upper_factor(r: &DMatrix<f64>) -> Result<CoreShapeMatrix> {
    let l = linalg::cholesky(&linalg::exchange(r))
        .ok_or_else(|| Error::NotPositiveDefinite { min_eigenvalue: linalg::symmetric_eigen(r).min_value() })?;
    Ok(CoreShapeMatrix { entries: linalg::exchange(&l), variant: ModelVariant::UTri })
}

/// Dispatches on the variant. The ellipsoid has no CSM; it is given the
/// Cholesky factor, which is what its standardized coordinates use.
pub fn core_shape_matrix(variant: ModelVariant, r: &DMatrix<f64>) -> Result<CoreShapeMatrix> {
    match variant {
        ModelVariant::Mp1 => Ok(identity_factor(r)),
        ModelVariant::Mp2 => symmetric_sqrt(r),
        ModelVariant::Rect => eigen_factor(r),
        ModelVariant::LTri => cholesky_lower(r),
        ModelVariant::UTri => upper_factor(r),
        ModelVariant::Me => cholesky_lower(r).map(|c| CoreShapeMatrix { variant: ModelVariant::Me, ..c }),
    }
}

/// `S = diag(w) H` with `w_i = 1 / Σ_j |H(i,j)|`.
pub fn shape_matrix(h: &CoreShapeMatrix) -> Result<ShapeMatrix> {
    let sums = row_abs_sums(&h.entries);
    if sums.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::SingularShape { det: 0.0 });
    }
    let weights: Vec<f64> = sums.iter().map(|s| 1.0 / s).collect();
    let n = h.entries.nrows();
    let s = DMatrix::from_fn(n, h.entries.ncols(), |i, j| weights[i] * h.entries[(i, j)]);
    let det = linalg::det(&s);
    if !(det.abs() >= SINGULAR_DET) {
        return Err(Error::SingularShape { det });
    }
    Ok(ShapeMatrix { entries: s, weights })
}
