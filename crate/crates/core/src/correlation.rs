//! Pairwise correlation coefficients and the correlation matrix `R`.
//!
//! Two coefficients are supported. The sample coefficient (SCC) is a Pearson
//! form taken about interval midpoints. The convex coefficient (CCC) is the
//! parameter of the smallest member of a one-parameter family of 2-D domains
//! that still encloses every regularized sample pair.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::RegularizedSamples;
use crate::error::{Error, Result};
use crate::factorization;
use crate::linalg;

/// Largest admissible `|r|` for a fitted coefficient.
pub const R_CLAMP: f64 = 1.0 - 1e-6;
/// Smallest eigenvalue a repaired matrix is allowed to have.
pub const EPS_PD: f64 = 1e-8;
/// Membership tolerance used while fitting.
pub const FIT_TOL: f64 = 1e-9;

const GRID_STEP: f64 = 1e-3;
const BISECT_TOL: f64 = 1e-7;
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelVariant {
    Me,
    Mp1,
    Mp2,
    Rect,
    #[serde(rename = "ltri")]
    LTri,
    #[serde(rename = "utri")]
    UTri,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 6] = [
        ModelVariant::Me,
        ModelVariant::Mp2,
        ModelVariant::Mp1,
        ModelVariant::Rect,
        ModelVariant::LTri,
        ModelVariant::UTri,
    ];

    pub const PARALLELEPIPEDS: [ModelVariant; 5] =
        [ModelVariant::Mp2, ModelVariant::Mp1, ModelVariant::Rect, ModelVariant::LTri, ModelVariant::UTri];

    pub fn is_ellipsoid(self) -> bool {
        self == ModelVariant::Me
    }

    pub fn tag(self) -> &'static str {
        match self {
            ModelVariant::Me => "me",
            ModelVariant::Mp1 => "mp1",
            ModelVariant::Mp2 => "mp2",
            ModelVariant::Rect => "rect",
            ModelVariant::LTri => "ltri",
            ModelVariant::UTri => "utri",
        }
    }

    /// Human-facing label.
    pub fn label(self) -> &'static str {
        match self {
            ModelVariant::Me => "ME",
            ModelVariant::Mp1 => "MP-I",
            ModelVariant::Mp2 => "MP-II",
            ModelVariant::Rect => "Rectangular MP",
            ModelVariant::LTri => "LTri-MP",
            ModelVariant::UTri => "UTri-MP",
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "me" => Ok(ModelVariant::Me),
            "mp1" | "mp-i" => Ok(ModelVariant::Mp1),
            "mp2" | "mp-ii" => Ok(ModelVariant::Mp2),
            "rect" | "rectmp" => Ok(ModelVariant::Rect),
            "ltri" | "ltrimp" => Ok(ModelVariant::LTri),
            "utri" | "utrimp" => Ok(ModelVariant::UTri),
            other => Err(Error::InvalidArgument(format!("unknown model variant `{other}`"))),
        }
    }
}

/// How the off-diagonal entries of `R` were obtained. `Given` marks a matrix
/// supplied directly by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    Ccc,
    Scc,
    Given,
}

impl fmt::Display for CorrelationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationMethod::Ccc => "ccc",
            CorrelationMethod::Scc => "scc",
            CorrelationMethod::Given => "given",
        })
    }
}

impl FromStr for CorrelationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ccc" => Ok(CorrelationMethod::Ccc),
            "scc" => Ok(CorrelationMethod::Scc),
            "given" => Ok(CorrelationMethod::Given),
            other => Err(Error::InvalidArgument(format!("unknown correlation method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PdPolicy {
    Strict,
    Repair,
}

impl FromStr for PdPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "strict" => Ok(PdPolicy::Strict),
            "repair" => Ok(PdPolicy::Repair),
            other => Err(Error::InvalidArgument(format!("unknown pd policy `{other}`"))),
        }
    }
}

/// Symmetric, unit-diagonal matrix with off-diagonals in `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    entries: DMatrix<f64>,
    pub method: CorrelationMethod,
    pub variant: ModelVariant,
}

impl CorrelationMatrix {
    pub fn new(entries: DMatrix<f64>, method: CorrelationMethod, variant: ModelVariant) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::InvalidCorrelation(format!(
                "expected a nonempty square matrix, got {}x{}",
                n,
                entries.ncols()
            )));
        }
        let mut entries = entries;
        for i in 0..n {
            if entries[(i, i)] != 1.0 {
                return Err(Error::InvalidCorrelation(format!("diagonal entry {i} is {}", entries[(i, i)])));
            }
            for j in (i + 1)..n {
                let (a, b) = (entries[(i, j)], entries[(j, i)]);
                if !a.is_finite() || !b.is_finite() || (a - b).abs() > 1e-12 {
                    return Err(Error::InvalidCorrelation(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
                if a.abs() >= 1.0 {
                    return Err(Error::InvalidCorrelation(format!("entry ({i},{j}) = {a} is not in (-1, 1)")));
                }
                entries[(j, i)] = a;
            }
        }
        Ok(Self { entries, method, variant })
    }

    pub fn identity(n: usize, method: CorrelationMethod, variant: ModelVariant) -> Self {
        Self { entries: DMatrix::identity(n, n), method, variant }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::symmetric_eigen(&self.entries).min_value()
    }

    pub fn with_variant(mut self, variant: ModelVariant) -> Self {
        self.variant = variant;
        self
    }
}

/// Sample correlation coefficient about the given midpoints.
pub fn scc(x_i: &[f64], x_j: &[f64], mid_i: f64, mid_j: f64) -> Result<f64> {
    if x_i.len() != x_j.len() {
        return Err(Error::DimensionMismatch { expected: x_i.len(), found: x_j.len() });
    }
    if x_i.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, found: x_i.len() });
    }
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x_i.iter().zip(x_j) {
        let (da, db) = (a - mid_i, b - mid_j);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroDeviation(0));
    }
    if syy == 0.0 {
        return Err(Error::ZeroDeviation(1));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Result of a CCC fit. `degenerate` is set when the fit ran into the clamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CccFit {
    pub r: f64,
    pub degenerate: bool,
}

/// Feasible `r` interval for one sample under the ellipse family
/// `u_i² - 2 r u_i u_j + u_j² ≤ 1 - r²`.
fn ellipse_interval(p: [f64; 2]) -> (f64, f64) {
    let (a, b) = (p[0].clamp(-1.0, 1.0), p[1].clamp(-1.0, 1.0));
    let half = ((1.0 - a * a) * (1.0 - b * b)).max(0.0).sqrt();
    (a * b - half, a * b + half)
}

/// Inverse of the 2x2 shape matrix for `[[1, r], [r, 1]]` under `variant`.
fn shape_inverse_2d(variant: ModelVariant, r: f64) -> Option<[[f64; 2]; 2]> {
    let rr = DMatrix::from_row_slice(2, 2, &[1.0, r, r, 1.0]);
    let h = factorization::core_shape_matrix(variant, &rr).ok()?;
    let s = factorization::shape_matrix(&h).ok()?.entries;
    let det = s[(0, 0)] * s[(1, 1)] - s[(0, 1)] * s[(1, 0)];
    Some([[s[(1, 1)] / det, -s[(0, 1)] / det], [-s[(1, 0)] / det, s[(0, 0)] / det]])
}

/// Largest normalized distance of any pair under `variant` with parameter
/// `r`; 1 means on the boundary.
fn worst_slack(variant: ModelVariant, r: f64, pairs: &[[f64; 2]]) -> f64 {
    if variant.is_ellipsoid() {
        let d = 1.0 - r * r;
        return pairs.iter().map(|p| (p[0] * p[0] - 2.0 * r * p[0] * p[1] + p[1] * p[1]) / d).fold(0.0, f64::max);
    }
    let Some(g) = shape_inverse_2d(variant, r) else {
        return f64::INFINITY;
    };
    pairs
        .iter()
        .map(|p| {
            let d0 = g[0][0] * p[0] + g[0][1] * p[1];
            let d1 = g[1][0] * p[0] + g[1][1] * p[1];
            d0.abs().max(d1.abs())
        })
        .fold(0.0, f64::max)
}

/// Whether every pair lies in the 2-D domain of `variant` with parameter `r`.
pub fn encloses_2d(variant: ModelVariant, r: f64, pairs: &[[f64; 2]]) -> bool {
    worst_slack(variant, r, pairs) <= 1.0 + FIT_TOL
}

fn pick_extreme(lo: f64, hi: f64, pairs: &[[f64; 2]]) -> f64 {
    if (hi.abs() - lo.abs()).abs() <= TIE_TOL {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().map(|p| (p[0], p[1])).unzip();
        let sign = scc(&xs, &ys, 0.0, 0.0).unwrap_or(0.0);
        if sign < 0.0 {
            lo
        } else {
            hi
        }
    } else if hi.abs() > lo.abs() {
        hi
    } else {
        lo
    }
}

/// CCC of one pair of regularized variables.
pub fn ccc_fit(variant: ModelVariant, pairs: &[[f64; 2]]) -> Result<CccFit> {
    if pairs.is_empty() {
        return Err(Error::EmptySamples);
    }
    let (lo, hi) = if variant.is_ellipsoid() {
        let mut lo = -R_CLAMP;
        let mut hi = R_CLAMP;
        for p in pairs {
            let (a, b) = ellipse_interval(*p);
            lo = lo.max(a);
            hi = hi.min(b);
        }
        if lo > hi {
            return Err(Error::InfeasibleFit { i: 0, j: 1 });
        }
        (lo, hi)
    } else {
        grid_feasible_range(variant, pairs)?
    };
    let r = pick_extreme(lo, hi, pairs);
    Ok(CccFit { r, degenerate: r.abs() >= R_CLAMP - BISECT_TOL })
}

/// Extreme feasible parameters on a grid, each refined by bisection.
///
/// Dense data can leave a feasible window narrower than the grid step. In
/// that case the worst slack is minimized around the best grid point and the
/// window is grown from the minimizer.
fn grid_feasible_range(variant: ModelVariant, pairs: &[[f64; 2]]) -> Result<(f64, f64)> {
    let steps = (2.0 * R_CLAMP / GRID_STEP).ceil() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| (-R_CLAMP + k as f64 * GRID_STEP).min(R_CLAMP)).collect();
    let ok = |r: f64| encloses_2d(variant, r, pairs);
    let slack: Vec<f64> = grid.iter().map(|&r| worst_slack(variant, r, pairs)).collect();
    let feasible = |k: &usize| slack[*k] <= 1.0 + FIT_TOL;
    let first = (0..grid.len()).find(feasible);
    let last = (0..grid.len()).rev().find(feasible);
    if let (Some(first), Some(last)) = (first, last) {
        let hi = if last + 1 < grid.len() { bisect(&ok, grid[last], grid[last + 1]) } else { grid[last] };
        let lo = if first > 0 { bisect(&ok, grid[first], grid[first - 1]) } else { grid[first] };
        return Ok((lo, hi));
    }
    let best = (0..grid.len()).min_by(|&a, &b| slack[a].total_cmp(&slack[b])).unwrap_or(0);
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let r = golden_min(|r| worst_slack(variant, r, pairs), lo, hi);
    if !ok(r) {
        return Err(Error::InfeasibleFit { i: 0, j: 1 });
    }
    Ok((bisect(&ok, r, lo), bisect(&ok, r, hi)))
}

/// Minimizer of `f` on `[a, b]` by golden-section search.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Boundary between a feasible `good` and an infeasible `bad` parameter.
fn bisect(ok: &impl Fn(f64) -> bool, mut good: f64, mut bad: f64) -> f64 {
    while (bad - good).abs() > BISECT_TOL {
        let mid = 0.5 * (good + bad);
        if ok(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Builds `R` from `n(n-1)/2` upper-triangle pairs.
pub fn assemble_correlation_matrix(
    pairwise: &[(usize, usize, f64)],
    n: usize,
    method: CorrelationMethod,
    variant: ModelVariant,
) -> Result<CorrelationMatrix> {
    let mut m = DMatrix::<f64>::identity(n, n);
    let mut seen = vec![false; n * n];
    for &(i, j, r) in pairwise {
        if i >= j || j >= n || !r.is_finite() || r.abs() >= 1.0 {
            return Err(Error::InvalidPair { i, j, r });
        }
        if std::mem::replace(&mut seen[i * n + j], true) {
            return Err(Error::DuplicatePair(i, j));
        }
        m[(i, j)] = r;
        m[(j, i)] = r;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !seen[i * n + j] {
                return Err(Error::MissingPair(i, j));
            }
        }
    }
    CorrelationMatrix::new(m, method, variant)
}

/// What a repair changed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub min_eigenvalue_before: f64,
    pub min_eigenvalue_after: f64,
    pub max_entry_change: f64,
}

/// Checks (strict) or restores (repair) positive definiteness.
pub fn ensure_positive_definite(
    r: CorrelationMatrix,
    policy: PdPolicy,
) -> Result<(CorrelationMatrix, Option<RepairReport>)> {
    let before = r.min_eigenvalue();
    if before >= EPS_PD {
        return Ok((r, None));
    }
    if policy == PdPolicy::Strict {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: before });
    }
    let n = r.dim();
    let mut m = r.entries.clone();
    let mut floor = EPS_PD;
    for _ in 0..60 {
        let e = linalg::symmetric_eigen(&m);
        let q = &e.vectors;
        let clipped =
            DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, e.values.iter().map(|l| l.max(floor))));
        let full = q * clipped * q.transpose();
        let scale: Vec<f64> = (0..n).map(|i| 1.0 / full[(i, i)].sqrt()).collect();
        m = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { full[(i, j)] * scale[i] * scale[j] });
        m = (&m + m.transpose()) * 0.5;
        if linalg::symmetric_eigen(&m).min_value() >= EPS_PD {
            break;
        }
        floor *= 2.0;
    }
    let after = linalg::symmetric_eigen(&m).min_value();
    if !(after >= EPS_PD) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: after });
    }
    let report = RepairReport {
        min_eigenvalue_before: before,
        min_eigenvalue_after: after,
        max_entry_change: linalg::max_abs_diff(&m, &r.entries),
    };
    Ok((CorrelationMatrix { entries: m, method: r.method, variant: r.variant }, Some(report)))
}

/// A pair whose CCC fit ran into the clamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneratePair {
    pub i: usize,
    pub j: usize,
    pub r: f64,
}

/// Every pairwise coefficient of regularized samples, assembled into `R`.
///
/// Pairs are computed in parallel and combined in `(i, j)` order.
pub fn correlation_matrix(
    variant: ModelVariant,
    method: CorrelationMethod,
    u: &RegularizedSamples,
) -> Result<(CorrelationMatrix, Vec<DegeneratePair>)> {
    let n = u.dim();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let fits: Vec<Result<(usize, usize, CccFit)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let fit = match method {
                CorrelationMethod::Scc => {
                    let r = scc(&u.column(i), &u.column(j), 0.0, 0.0).map_err(|e| match e {
                        Error::ZeroDeviation(k) => Error::ZeroDeviation(if k == 0 { i } else { j }),
                        other => other,
                    })?;
                    let clamped = r.clamp(-R_CLAMP, R_CLAMP);
                    CccFit { r: clamped, degenerate: clamped != r }
                }
                CorrelationMethod::Ccc => ccc_fit(variant, &u.pair(i, j)).map_err(|e| match e {
                    Error::InfeasibleFit { .. } => Error::InfeasibleFit { i, j },
                    other => other,
                })?,
                CorrelationMethod::Given => {
                    return Err(Error::InvalidArgument("a given matrix is not computed from samples".into()))
                }
            };
            Ok((i, j, fit))
        })
        .collect();
    let mut values = Vec::with_capacity(fits.len());
    let mut degenerate = Vec::new();
    for f in fits {
        let (i, j, fit) = f?;
        if fit.degenerate {
            degenerate.push(DegeneratePair { i, j, r: fit.r });
        }
        values.push((i, j, fit.r));
    }
    let r = assemble_correlation_matrix(&values, n, method, variant)?;
    Ok((r, degenerate))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_oracle(pairs: &[[f64; 2]]) -> f64 {
        // brute force over the ellipse family
        let mut best: f64 = 0.0;
        let n = 200_000;
        for k in 0..=n {
            let r = -R_CLAMP + 2.0 * R_CLAMP * k as f64 / n as f64;
            if encloses_2d(ModelVariant::Me, r, pairs) && r.abs() > best.abs() {
                best = r;
            }
        }
        best
    }

    #[test]
    fn variant_round_trip() {
        for v in ModelVariant::ALL {
            assert_eq!(v.tag().parse::<ModelVariant>().unwrap(), v);
        }
        assert!("mp3".parse::<ModelVariant>().is_err());
    }

    #[test]
    fn scc_proportional() {
        let r = scc(&[-1.0, 0.0, 1.0], &[-1.0, 0.0, 1.0], 0.0, 0.0).unwrap();
        assert_eq!(r, 1.0);
        assert_eq!(scc(&[0.0, 0.0], &[1.0, 2.0], 0.0, 0.0), Err(Error::ZeroDeviation(0)));
        assert!(matches!(scc(&[1.0], &[1.0], 0.0, 0.0), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn me_fit_three_points() {
        let pairs = [[0.8, 0.6], [-0.2, 0.3], [0.5, -0.1]];
        let fit = ccc_fit(ModelVariant::Me, &pairs).unwrap();
        assert!((fit.r - 0.8117).abs() < 1e-4, "{}", fit.r);
        assert!(!fit.degenerate);
        assert!((fit.r - grid_oracle(&pairs)).abs() < 2e-5);
        assert!(encloses_2d(ModelVariant::Me, fit.r, &pairs));
    }

    #[test]
    fn origin_hits_clamp() {
        for v in ModelVariant::ALL {
            let fit = ccc_fit(v, &[[0.0, 0.0]]).unwrap();
            assert!(fit.degenerate, "{v:?}");
            assert!((fit.r.abs() - R_CLAMP).abs() < 1e-6, "{v:?} {}", fit.r);
            assert!(fit.r >= 0.0);
        }
    }

    #[test]
    fn infeasible_pair() {
        let pairs = [[0.9, 0.9], [0.9, -0.9]];
        assert_eq!(ccc_fit(ModelVariant::Me, &pairs), Err(Error::InfeasibleFit { i: 0, j: 1 }));
    }

    #[test]
    fn tie_breaks_by_sample_sign() {
        // symmetric feasible interval, data negatively correlated
        let pairs = [[0.5, -0.5], [-0.5, 0.5], [0.5, 0.5]];
        let fit = ccc_fit(ModelVariant::Me, &pairs).unwrap();
        let (lo, hi) = pairs.iter().fold((-R_CLAMP, R_CLAMP), |(lo, hi), p| {
            let (a, b) = ellipse_interval(*p);
            (lo.max(a), hi.min(b))
        });
        assert!((lo + hi).abs() < 1e-12);
        assert!(fit.r < 0.0);
    }

    #[test]
    fn mp2_fit_is_minimal() {
        let pairs = [[0.5, 0.4], [-0.2, 0.3], [0.3, -0.1], [-0.45, -0.4]];
        for v in ModelVariant::PARALLELEPIPEDS {
            let fit = ccc_fit(v, &pairs).unwrap();
            assert!(encloses_2d(v, fit.r, &pairs), "{v:?}");
            let shrunk = fit.r + fit.r.signum() * 1e-5;
            assert!(!encloses_2d(v, shrunk, &pairs) || shrunk.abs() >= R_CLAMP, "{v:?}");
        }
    }

    #[test]
    fn assemble_checks_pairs() {
        let r = assemble_correlation_matrix(
            &[(0, 1, 0.7623), (0, 2, -0.8831), (1, 2, -0.6732)],
            3,
            CorrelationMethod::Ccc,
            ModelVariant::Me,
        )
        .unwrap();
        assert_eq!(r.get(2, 1), -0.6732);
        let m = CorrelationMethod::Scc;
        let v = ModelVariant::Me;
        assert_eq!(assemble_correlation_matrix(&[(0, 1, 0.1)], 3, m, v), Err(Error::MissingPair(0, 2)));
        assert_eq!(assemble_correlation_matrix(&[(0, 1, 0.1), (0, 1, 0.2)], 2, m, v), Err(Error::DuplicatePair(0, 1)));
        assert!(matches!(assemble_correlation_matrix(&[(1, 0, 0.1)], 2, m, v), Err(Error::InvalidPair { .. })));
        assert!(assemble_correlation_matrix(&[], 3, m, v).is_err());
        let id = assemble_correlation_matrix(&[(0, 1, 0.0), (0, 2, 0.0), (1, 2, 0.0)], 3, m, v).unwrap();
        assert_eq!(id.entries(), &DMatrix::identity(3, 3));
    }

    #[test]
    fn strict_and_repair() {
        let bad = assemble_correlation_matrix(
            &[(0, 1, 0.9), (0, 2, 0.9), (1, 2, -0.9)],
            3,
            CorrelationMethod::Given,
            ModelVariant::Me,
        )
        .unwrap();
        assert!(bad.min_eigenvalue() < 0.0);
        assert!(matches!(
            ensure_positive_definite(bad.clone(), PdPolicy::Strict),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let (fixed, report) = ensure_positive_definite(bad, PdPolicy::Repair).unwrap();
        let report = report.unwrap();
        assert!(report.min_eigenvalue_before < 0.0);
        assert!(fixed.min_eigenvalue() >= EPS_PD);
        for i in 0..3 {
            assert_eq!(fixed.get(i, i), 1.0);
        }
        let id = CorrelationMatrix::identity(3, CorrelationMethod::Given, ModelVariant::Me);
        let (same, none) = ensure_positive_definite(id.clone(), PdPolicy::Strict).unwrap();
        assert_eq!(same, id);
        assert!(none.is_none());
    }
}
