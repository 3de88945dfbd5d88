//! Ellipsoid (ME) and parallelepiped (MP) convex models.
//!
//! ME: `{X : (X - Xm)ᵀ G_E (X - Xm) ≤ 1}` with `G_E = (D R D)⁻¹`.
//! MP: `{X : |G_p (X - Xm)| ≤ e}` with `G_p = (D S)⁻¹`.
//!
//! Both are also described through a standardized vector `δ` with
//! `X = Xm + D P δ`, where `P` is the Cholesky factor of `R` (ME) or the shape
//! matrix (MP). Membership is then `‖δ‖₂ ≤ 1` or `‖δ‖∞ ≤ 1`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::{self, CorrelationMatrix, CorrelationMethod, ModelVariant, PdPolicy, RepairReport};
use crate::domain::{self, MarginalSpec, SampleSet};
use crate::error::{Error, Result};
use crate::factorization::{self, ShapeMatrix};
use crate::linalg;

/// Slack on the defining inequality; boundary points count as inside.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Characteristic matrices above this condition number raise a warning.
pub const CONDITION_WARN: f64 = 1e12;

/// Which norm measures `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    Euclidean,
    Infinity,
}

impl Norm {
    pub fn of(self, v: &DVector<f64>) -> f64 {
        match self {
            Norm::Euclidean => v.norm(),
            Norm::Infinity => v.amax(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexModel {
    variant: ModelVariant,
    spec: MarginalSpec,
    correlation: CorrelationMatrix,
    shape: Option<ShapeMatrix>,
    characteristic: DMatrix<f64>,
    /// `P` in `X = Xm + D P δ`.
    factor: DMatrix<f64>,
    /// `(D P)⁻¹`.
    delta_map: DMatrix<f64>,
    condition: f64,
}

/// Result of a membership query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub inside: bool,
    /// Quadratic form (ME) or largest absolute standardized coordinate (MP).
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub variant: ModelVariant,
    pub method: CorrelationMethod,
    pub enclosed: usize,
    pub total: usize,
    pub kappa: f64,
    pub nu: f64,
    pub nu_bar: f64,
    /// Zero-based indices of samples outside the domain.
    pub excluded: Vec<usize>,
}

impl AssessmentReport {
    pub fn fitness(&self) -> String {
        format!("{}/{}", self.enclosed, self.total)
    }
}

impl fmt::Display for AssessmentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, \u{3bd}={:.2}%, \u{3bd}\u{304}={:.2}%", self.fitness(), 100.0 * self.nu, 100.0 * self.nu_bar)
    }
}

/// Volume of the unit ball in `n` dimensions.
pub fn unit_ball_volume(n: usize) -> f64 {
    // Γ(n/2 + 1), exact recurrence from Γ(1) or Γ(1/2)
    let (mut gamma, mut x) = if n.is_multiple_of(2) { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt(), 0.5) };
    let target = n as f64 / 2.0 + 1.0;
    while x < target - 0.25 {
        gamma *= x;
        x += 1.0;
    }
    std::f64::consts::PI.powf(n as f64 / 2.0) / gamma
}

impl ConvexModel {
    /// Builds a model from a marginal spec and a positive-definite `R`.
    pub fn build(variant: ModelVariant, spec: &MarginalSpec, r: &CorrelationMatrix) -> Result<Self> {
        let n = spec.dim();
        if r.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: r.dim() });
        }
        let min = r.min_eigenvalue();
        if !(min >= correlation::EPS_PD) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        let shape = if variant.is_ellipsoid() {
            None
        } else {
            let h = factorization::core_shape_matrix(variant, r.entries())?;
            Some(factorization::shape_matrix(&h)?)
        };
        Self::assemble(variant, spec.clone(), r.clone().with_variant(variant), shape)
    }

    fn assemble(
        variant: ModelVariant,
        spec: MarginalSpec,
        correlation: CorrelationMatrix,
        shape: Option<ShapeMatrix>,
    ) -> Result<Self> {
        let d = spec.scaling();
        let (characteristic, factor, delta_map) = match &shape {
            None => {
                let cov = &d * correlation.entries() * &d;
                let g = linalg::inverse(&cov).ok_or(Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
                let g = (&g + g.transpose()) * 0.5;
                let l = factorization::cholesky_lower(correlation.entries())?.entries;
                let dl_inv = linalg::inverse(&(&d * &l)).ok_or(Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
                (g, l, dl_inv)
            }
            Some(s) => {
                let ds = &d * &s.entries;
                let g = linalg::inverse(&ds).ok_or(Error::SingularShape { det: s.det() })?;
                (g.clone(), s.entries.clone(), g)
            }
        };
        let base = match &shape {
            None => &d * correlation.entries() * &d,
            Some(s) => &d * &s.entries,
        };
        let condition = linalg::condition_number(&base, &characteristic);
        Ok(Self { variant, spec, correlation, shape, characteristic, factor, delta_map, condition })
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant
    }

    pub fn method(&self) -> CorrelationMethod {
        self.correlation.method
    }

    pub fn spec(&self) -> &MarginalSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn correlation(&self) -> &CorrelationMatrix {
        &self.correlation
    }

    pub fn shape(&self) -> Option<&ShapeMatrix> {
        self.shape.as_ref()
    }

    /// `G_E` for ME, `G_p` for MP.
    pub fn characteristic(&self) -> &DMatrix<f64> {
        &self.characteristic
    }

    /// `C_X = D R D`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let d = self.spec.scaling();
        &d * self.correlation.entries() * &d
    }

    /// `P` in `X = Xm + D P δ`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    pub fn norm(&self) -> Norm {
        if self.variant.is_ellipsoid() {
            Norm::Euclidean
        } else {
            Norm::Infinity
        }
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found });
        }
        Ok(())
    }

    pub fn contains(&self, x: &DVector<f64>) -> Result<Membership> {
        self.check_dim(x.len())?;
        let dx = x - self.spec.midpoints();
        let slack = match self.shape {
            None => dx.dot(&(&self.characteristic * &dx)),
            Some(_) => (&self.characteristic * &dx).amax(),
        };
        Ok(Membership { inside: slack <= 1.0 + MEMBERSHIP_TOL, slack })
    }

    pub fn to_delta(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x.len())?;
        Ok(&self.delta_map * (x - self.spec.midpoints()))
    }

    pub fn from_delta(&self, delta: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(delta.len())?;
        Ok(self.spec.midpoints() + self.spec.scaling() * (&self.factor * delta))
    }

    /// Membership of every sample row, in row order.
    pub fn memberships(&self, samples: &SampleSet) -> Result<Vec<Membership>> {
        let aligned = samples.aligned_to(&self.spec)?;
        let rows = aligned.rows();
        (0..rows.nrows()).into_par_iter().map(|s| self.contains(&rows.row(s).transpose())).collect()
    }

    /// Volume ratio `ν` and standard volume ratio `ν̄ = ν^(1/n)`.
    pub fn volume_ratio(&self) -> (f64, f64) {
        let n = self.dim();
        let nu = match &self.shape {
            None => unit_ball_volume(n) * linalg::det(self.correlation.entries()).max(0.0).sqrt() / 2f64.powi(n as i32),
            Some(s) => s.det().abs(),
        };
        (nu, nu.powf(1.0 / n as f64))
    }

    pub fn assess(&self, samples: &SampleSet) -> Result<AssessmentReport> {
        let m = self.memberships(samples)?;
        let excluded: Vec<usize> = m.iter().enumerate().filter(|(_, m)| !m.inside).map(|(k, _)| k).collect();
        let total = m.len();
        let enclosed = total - excluded.len();
        let (nu, nu_bar) = self.volume_ratio();
        Ok(AssessmentReport {
            variant: self.variant,
            method: self.method(),
            enclosed,
            total,
            kappa: enclosed as f64 / total as f64,
            nu,
            nu_bar,
            excluded,
        })
    }

    /// Projection of the regularized ellipsoid onto the `(U_i, U_j)` plane,
    /// as the 2x2 correlation matrix of the projected ellipse.
    pub fn project_2d(&self, i: usize, j: usize) -> Result<DMatrix<f64>> {
        if !self.variant.is_ellipsoid() {
            return Err(Error::NotEllipsoid);
        }
        let n = self.dim();
        for k in [i, j] {
            if k >= n {
                return Err(Error::IndexOutOfRange { index: k, dim: n });
            }
        }
        if i == j {
            return Err(Error::InvalidArgument("projection plane needs two distinct axes".into()));
        }
        let r = self.correlation.entries();
        Ok(DMatrix::from_row_slice(2, 2, &[1.0, r[(i, j)], r[(j, i)], 1.0]))
    }

    pub fn to_toml(&self) -> String {
        let flat = |m: &DMatrix<f64>| -> Vec<f64> {
            (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect()
        };
        let file = ModelFile {
            format_version: FORMAT_VERSION,
            variant: self.variant.tag().to_string(),
            method: self.method().to_string(),
            names: self.spec.names().to_vec(),
            lower: self.spec.lowers(),
            upper: self.spec.uppers(),
            correlation: flat(self.correlation.entries()),
            shape: self.shape.as_ref().map(|s| flat(&s.entries)),
            covariance: if self.shape.is_none() { Some(flat(&self.covariance())) } else { None },
        };
        toml::to_string(&file).expect("model file serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ModelFile = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
        let field_err = |field: &str, message: String| Error::Parse { line: 0, field: field.into(), message };
        if file.format_version != FORMAT_VERSION {
            return Err(field_err("format_version", format!("unsupported version {}", file.format_version)));
        }
        let variant: ModelVariant = file.variant.parse().map_err(|e: Error| field_err("variant", e.to_string()))?;
        let method: CorrelationMethod = file.method.parse().map_err(|e: Error| field_err("method", e.to_string()))?;
        let n = file.names.len();
        if file.lower.len() != n || file.upper.len() != n {
            return Err(field_err("lower", format!("expected {n} bounds")));
        }
        let pairs: Vec<(&str, f64, f64)> =
            file.names.iter().zip(file.lower.iter().zip(&file.upper)).map(|(s, (l, u))| (s.as_str(), *l, *u)).collect();
        let spec = MarginalSpec::new(&pairs)?;
        let square = |field: &str, v: &[f64]| -> Result<DMatrix<f64>> {
            if v.len() != n * n {
                return Err(field_err(field, format!("expected {} entries, found {}", n * n, v.len())));
            }
            Ok(DMatrix::from_row_slice(n, n, v))
        };
        let r = CorrelationMatrix::new(square("correlation", &file.correlation)?, method, variant)
            .map_err(|e| field_err("correlation", e.to_string()))?;
        if variant.is_ellipsoid() {
            let model = Self::build(variant, &spec, &r)?;
            if let Some(c) = &file.covariance {
                let c = square("covariance", c)?;
                let expected = model.covariance();
                let scale = expected.amax();
                if linalg::max_abs_diff(&c, &expected) > 1e-9 * scale {
                    return Err(field_err("covariance", "inconsistent with bounds and correlation".into()));
                }
            }
            Ok(model)
        } else {
            let s =
                file.shape.as_ref().ok_or_else(|| field_err("shape", "missing for a parallelepiped model".into()))?;
            let shape = ShapeMatrix::from_entries(square("shape", s)?)?;
            Self::assemble(variant, spec, r, Some(shape))
        }
    }

    pub fn read(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_toml())?)
    }
}

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    variant: String,
    method: String,
    names: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    correlation: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shape: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    covariance: Option<Vec<f64>>,
}

fn toml_error(text: &str, e: &toml::de::Error) -> Error {
    let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1).unwrap_or(0);
    let message = e.message().to_string();
    let field = message.split('`').nth(1).filter(|_| message.contains("field")).unwrap_or("").to_string();
    Error::Parse { line, field, message }
}

/// Non-fatal findings gathered while constructing a model.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    DegenerateFit { i: usize, j: usize, r: f64 },
    Repaired(RepairReport),
    IllConditioned { condition: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DegenerateFit { i, j, r } => {
                write!(f, "degenerate fit for pair ({i}, {j}): coefficient clamped at {r:.6}")
            }
            Warning::Repaired(rep) => write!(
                f,
                "correlation matrix repaired: smallest eigenvalue {:.4e} -> {:.4e}, largest entry change {:.4e}",
                rep.min_eigenvalue_before, rep.min_eigenvalue_after, rep.max_entry_change
            ),
            Warning::IllConditioned { condition } => {
                write!(f, "characteristic matrix is ill-conditioned (condition number {condition:.3e})")
            }
        }
    }
}

/// Stage of construction at which a failure occurred.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    DataPreparation,
    Regularization,
    Correlation,
    PositiveDefiniteness,
    Factorization,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Step::DataPreparation => "data preparation",
            Step::Regularization => "regularization",
            Step::Correlation => "correlation",
            Step::PositiveDefiniteness => "positive definiteness",
            Step::Factorization => "factorization",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{step}: {error}")]
pub struct StepFailure {
    pub step: Step,
    pub error: Error,
}

#[derive(Debug, Clone)]
pub struct Construction {
    pub model: ConvexModel,
    pub warnings: Vec<Warning>,
}

/// Samples and bounds to a model: validate, regularize, correlate, check
/// definiteness, factor.
pub fn construct(
    spec: &MarginalSpec,
    samples: &SampleSet,
    variant: ModelVariant,
    method: CorrelationMethod,
    policy: PdPolicy,
) -> std::result::Result<Construction, StepFailure> {
    let at = |step: Step| move |error: Error| StepFailure { step, error };
    let aligned = samples.aligned_to(spec).map_err(at(Step::DataPreparation))?;
    let u = domain::regularize(spec, &aligned).map_err(at(Step::Regularization))?;
    let (r, degenerate) = correlation::correlation_matrix(variant, method, &u).map_err(at(Step::Correlation))?;
    let mut warnings: Vec<Warning> =
        degenerate.iter().map(|d| Warning::DegenerateFit { i: d.i, j: d.j, r: d.r }).collect();
    let (r, repair) = correlation::ensure_positive_definite(r, policy).map_err(at(Step::PositiveDefiniteness))?;
    warnings.extend(repair.map(Warning::Repaired));
    let model = ConvexModel::build(variant, spec, &r).map_err(at(Step::Factorization))?;
    if model.condition_number() > CONDITION_WARN {
        warnings.push(Warning::IllConditioned { condition: model.condition_number() });
    }
    Ok(Construction { model, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corr(n: usize, upper: &[f64]) -> CorrelationMatrix {
        let mut m = DMatrix::identity(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                m[(i, j)] = upper[k];
                m[(j, i)] = upper[k];
                k += 1;
            }
        }
        CorrelationMatrix::new(m, CorrelationMethod::Given, ModelVariant::Me).unwrap()
    }

    #[test]
    fn ball_volumes() {
        let pi = std::f64::consts::PI;
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - pi).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * pi / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - pi * pi / 2.0).abs() < 1e-14);
        assert!((unit_ball_volume(5) - 8.0 * pi * pi / 15.0).abs() < 1e-14);
    }

    #[test]
    fn identity_models() {
        let spec = MarginalSpec::standard(2);
        let id = corr(2, &[0.0]);
        let me = ConvexModel::build(ModelVariant::Me, &spec, &id).unwrap();
        assert!((me.volume_ratio().0 - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        for v in ModelVariant::PARALLELEPIPEDS {
            let m = ConvexModel::build(v, &spec, &id).unwrap();
            assert_eq!(m.shape().unwrap().entries, DMatrix::identity(2, 2));
            assert_eq!(m.volume_ratio().0, 1.0);
        }
        let spec3 = MarginalSpec::standard(3);
        let me3 = ConvexModel::build(ModelVariant::Me, &spec3, &corr(3, &[0.0, 0.0, 0.0])).unwrap();
        let corner = me3.contains(&DVector::from_element(3, 1.0)).unwrap();
        assert!(!corner.inside);
        assert!((corner.slack - 3.0).abs() < 1e-14);
        let mid = me3.contains(&DVector::zeros(3)).unwrap();
        assert!(mid.inside && mid.slack == 0.0);
    }

    #[test]
    fn delta_round_trip_and_vertex() {
        let spec = MarginalSpec::new(&[("a", 0.0, 4.0), ("b", -3.0, 7.0), ("c", 10.0, 11.0)]).unwrap();
        let r = corr(3, &[0.6361, -0.7102, -0.3422]);
        for v in ModelVariant::ALL {
            let m = ConvexModel::build(v, &spec, &r).unwrap();
            let x = DVector::from_vec(vec![1.3, 2.1, 10.4]);
            let back = m.from_delta(&m.to_delta(&x).unwrap()).unwrap();
            assert!((back - &x).amax() < 1e-10);
            assert!(m.to_delta(&spec.midpoints()).unwrap().amax() == 0.0);
            if !v.is_ellipsoid() {
                let e = DVector::from_element(3, 1.0);
                let vertex = m.from_delta(&e).unwrap();
                assert!((m.to_delta(&vertex).unwrap() - e).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn projection_rejects_mp_and_bad_index() {
        let spec = MarginalSpec::standard(3);
        let r = corr(3, &[0.7623, -0.8831, -0.6732]);
        let me = ConvexModel::build(ModelVariant::Me, &spec, &r).unwrap();
        let p = me.project_2d(0, 1).unwrap();
        assert_eq!(p[(0, 1)], 0.7623);
        assert_eq!(me.project_2d(0, 3), Err(Error::IndexOutOfRange { index: 3, dim: 3 }));
        let mp = ConvexModel::build(ModelVariant::Mp2, &spec, &r).unwrap();
        assert_eq!(mp.project_2d(0, 1), Err(Error::NotEllipsoid));
    }

    #[test]
    fn toml_round_trip() {
        let spec = MarginalSpec::standard(3);
        let r = corr(3, &[0.7623, -0.8831, -0.6732]);
        for v in ModelVariant::ALL {
            let m = ConvexModel::build(v, &spec, &r).unwrap();
            let back = ConvexModel::from_toml(&m.to_toml()).unwrap();
            assert_eq!(back.variant(), v);
            assert_eq!(back.spec(), m.spec());
            assert_eq!(back.correlation(), m.correlation());
            assert_eq!(back.shape().map(|s| &s.entries), m.shape().map(|s| &s.entries), "{v:?}");
            assert_eq!(back.characteristic(), m.characteristic());
        }
    }

    #[test]
    fn toml_missing_variant() {
        let m = ConvexModel::build(ModelVariant::Me, &MarginalSpec::standard(2), &corr(2, &[0.3])).unwrap();
        let text: String = m.to_toml().lines().filter(|l| !l.starts_with("variant")).collect::<Vec<_>>().join("\n");
        match ConvexModel::from_toml(&text) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "variant"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn build_rejects_indefinite() {
        let r = corr(3, &[0.9, 0.9, -0.9]);
        let err = ConvexModel::build(ModelVariant::Me, &MarginalSpec::standard(3), &r).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
        let err = ConvexModel::build(ModelVariant::Me, &MarginalSpec::standard(2), &r).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 3 });
    }
}
