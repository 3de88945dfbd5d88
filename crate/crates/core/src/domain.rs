//! Interval variables, sample containers and the regularization map between
//! physical X-space and standardized U-space.

use std::collections::HashSet;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack used when comparing samples against interval bounds.
pub const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Option<Self> {
        if lower.is_finite() && upper.is_finite() && lower < upper {
            Some(Self { lower, upper })
        } else {
            None
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower - BOUND_SLACK && x <= self.upper + BOUND_SLACK
    }
}

/// Ordered, named marginal intervals of the uncertain variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSpec {
    names: Vec<String>,
    intervals: Vec<Interval>,
}

impl MarginalSpec {
    /// Builds a spec from `(name, lower, upper)` triples.
    pub fn new<S: AsRef<str>>(pairs: &[(S, f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidArgument("at least one interval variable is required".into()));
        }
        let mut seen = HashSet::new();
        let mut names = Vec::with_capacity(pairs.len());
        let mut intervals = Vec::with_capacity(pairs.len());
        for (name, lower, upper) in pairs {
            let name = name.as_ref().trim();
            if name.is_empty() {
                return Err(Error::InvalidName(name.to_string()));
            }
            if !seen.insert(name.to_string()) {
                return Err(Error::DuplicateName(name.to_string()));
            }
            let iv = Interval::new(*lower, *upper).ok_or_else(|| Error::DegenerateInterval {
                name: name.to_string(),
                lower: *lower,
                upper: *upper,
            })?;
            names.push(name.to_string());
            intervals.push(iv);
        }
        Ok(Self { names, intervals })
    }

    /// `n` standard interval variables `[-1, 1]` named `u1..un`.
    pub fn standard(n: usize) -> Self {
        let pairs: Vec<(String, f64, f64)> = (1..=n).map(|i| (format!("u{i}"), -1.0, 1.0)).collect();
        Self::new(&pairs).expect("standard spec is valid")
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn midpoints(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.intervals.iter().map(Interval::midpoint))
    }

    pub fn radii(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.intervals.iter().map(Interval::radius))
    }

    pub fn lowers(&self) -> Vec<f64> {
        self.intervals.iter().map(|i| i.lower).collect()
    }

    pub fn uppers(&self) -> Vec<f64> {
        self.intervals.iter().map(|i| i.upper).collect()
    }

    /// `D_X = diag(radii)`.
    pub fn scaling(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.radii())
    }

    /// Same names, every radius multiplied by the matching factor, midpoints kept.
    pub fn rescaled(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: factors.len() });
        }
        let pairs: Vec<(String, f64, f64)> = self
            .names
            .iter()
            .zip(&self.intervals)
            .zip(factors)
            .map(|((n, iv), c)| {
                let (m, r) = (iv.midpoint(), iv.radius() * c);
                (n.clone(), m - r, m + r)
            })
            .collect();
        Self::new(&pairs)
    }

    /// Reads `name,lower,upper` lines. Blank lines and `#` comments are skipped.
    pub fn parse_intervals(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    field: "interval".into(),
                    message: format!("expected `name,lower,upper`, found {} fields", fields.len()),
                });
            }
            let lower = parse_number(fields[1], lineno + 1, "lower")?;
            let upper = parse_number(fields[2], lineno + 1, "upper")?;
            pairs.push((fields[0].to_string(), lower, upper));
        }
        Self::new(&pairs)
    }

    pub fn read_intervals(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_intervals(&std::fs::read_to_string(path)?)
    }
}

fn parse_number(field: &str, line: usize, name: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|e| Error::Parse { line, field: name.to_string(), message: format!("`{field}`: {e}") })
}

/// `N_s` groups of samples in physical units, columns named.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    names: Vec<String>,
    rows: DMatrix<f64>,
}

impl SampleSet {
    pub fn new(names: Vec<String>, rows: DMatrix<f64>) -> Result<Self> {
        if rows.nrows() == 0 {
            return Err(Error::EmptySamples);
        }
        if names.len() != rows.ncols() {
            return Err(Error::DimensionMismatch { expected: names.len(), found: rows.ncols() });
        }
        let mut seen = HashSet::new();
        for n in &names {
            if n.is_empty() {
                return Err(Error::InvalidName(n.clone()));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::DuplicateName(n.clone()));
            }
        }
        for c in 0..rows.ncols() {
            for r in 0..rows.nrows() {
                if !rows[(r, c)].is_finite() {
                    return Err(Error::NonFinite { row: r, column: c });
                }
            }
        }
        Ok(Self { names, rows })
    }

    /// Row-major construction, mostly for fixtures.
    pub fn from_rows<S: AsRef<str>>(names: &[S], rows: &[Vec<f64>]) -> Result<Self> {
        let n = names.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
        }
        let m = DMatrix::from_row_iterator(rows.len(), n, rows.iter().flatten().copied());
        Self::new(names.iter().map(|s| s.as_ref().to_string()).collect(), m)
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.column(j).iter().copied().collect()
    }

    /// Columns reordered to follow `spec`'s variable order.
    pub fn aligned_to(&self, spec: &MarginalSpec) -> Result<SampleSet> {
        let mismatch = || Error::NameMismatch { expected: spec.names().to_vec(), found: self.names.clone() };
        if self.dim() != spec.dim() {
            return Err(mismatch());
        }
        let mut order = Vec::with_capacity(spec.dim());
        for name in spec.names() {
            order.push(self.names.iter().position(|n| n == name).ok_or_else(mismatch)?);
        }
        let rows = DMatrix::from_fn(self.len(), spec.dim(), |r, c| self.rows[(r, order[c])]);
        Ok(SampleSet { names: spec.names().to_vec(), rows })
    }

    /// Header line of names, then one line of numbers per sample.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let names: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Parse { line: 1, field: "header".into(), message: e.to_string() })?
            .iter()
            .map(str::to_string)
            .collect();
        let mut data = Vec::new();
        let mut nrows = 0;
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                field: "record".into(),
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            for (j, f) in rec.iter().enumerate() {
                data.push(parse_number(f, line, &names[j])?);
            }
            nrows += 1;
        }
        if nrows == 0 {
            return Err(Error::EmptySamples);
        }
        Self::new(names.clone(), DMatrix::from_row_slice(nrows, names.len(), &data))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_csv(&std::fs::read_to_string(path)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.names.join(",");
        out.push('\n');
        for r in 0..self.len() {
            let line: Vec<String> = (0..self.dim()).map(|c| format!("{:?}", self.rows[(r, c)])).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Samples mapped into U-space; every entry lies in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedSamples {
    rows: DMatrix<f64>,
}

impl RegularizedSamples {
    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.column(j).iter().copied().collect()
    }

    /// Column pairs `(u_i, u_j)` as an `N_s x 2` list.
    pub fn pair(&self, i: usize, j: usize) -> Vec<[f64; 2]> {
        (0..self.len()).map(|s| [self.rows[(s, i)], self.rows[(s, j)]]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub row: usize,
    pub column: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every sample entry outside its marginal interval. Columns are matched
/// positionally against `spec`; align first when names may be permuted.
pub fn validate_samples(spec: &MarginalSpec, samples: &SampleSet) -> ValidationReport {
    let mut violations = Vec::new();
    for (c, iv) in spec.intervals().iter().enumerate().take(samples.dim()) {
        for r in 0..samples.len() {
            let value = samples.rows()[(r, c)];
            if !iv.contains(value) {
                violations.push(Violation { row: r, column: c, value });
            }
        }
    }
    violations.sort_by_key(|v| (v.row, v.column));
    ValidationReport { violations }
}

/// `u = D_X^{-1} (x - X^m)` row by row, after aligning columns by name.
pub fn regularize(spec: &MarginalSpec, samples: &SampleSet) -> Result<RegularizedSamples> {
    let aligned = samples.aligned_to(spec)?;
    if let Some(v) = validate_samples(spec, &aligned).violations.first() {
        let iv = spec.intervals()[v.column];
        return Err(Error::SampleOutsideMarginal {
            row: v.row,
            column: spec.names()[v.column].clone(),
            value: v.value,
            lower: iv.lower,
            upper: iv.upper,
        });
    }
    let (mid, rad) = (spec.midpoints(), spec.radii());
    let rows = DMatrix::from_fn(aligned.len(), spec.dim(), |r, c| {
        // slack-admitted overshoot is pulled back onto the boundary
        ((aligned.rows()[(r, c)] - mid[c]) / rad[c]).clamp(-1.0, 1.0)
    });
    Ok(RegularizedSamples { rows })
}

/// Wraps already-standardized points; fails if any entry leaves `[-1, 1]`.
pub fn regularized_from_rows(rows: DMatrix<f64>) -> Result<RegularizedSamples> {
    for c in 0..rows.ncols() {
        for r in 0..rows.nrows() {
            let v = rows[(r, c)];
            if !v.is_finite() {
                return Err(Error::NonFinite { row: r, column: c });
            }
            if v.abs() > 1.0 + BOUND_SLACK {
                return Err(Error::SampleOutsideMarginal {
                    row: r,
                    column: format!("u{}", c + 1),
                    value: v,
                    lower: -1.0,
                    upper: 1.0,
                });
            }
        }
    }
    Ok(RegularizedSamples { rows: rows.map(|v| v.clamp(-1.0, 1.0)) })
}

/// `X = X^m + D_X U` row by row.
pub fn deregularize(spec: &MarginalSpec, u_points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if u_points.ncols() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: u_points.ncols() });
    }
    let (mid, rad) = (spec.midpoints(), spec.radii());
    Ok(DMatrix::from_fn(u_points.nrows(), spec.dim(), |r, c| mid[c] + rad[c] * u_points[(r, c)]))
}

/// Single point version of [`regularize`] without the containment check.
pub fn to_standard(spec: &MarginalSpec, x: &DVector<f64>) -> DVector<f64> {
    let (mid, rad) = (spec.midpoints(), spec.radii());
    DVector::from_fn(spec.dim(), |i, _| (x[i] - mid[i]) / rad[i])
}

pub fn from_standard(spec: &MarginalSpec, u: &DVector<f64>) -> DVector<f64> {
    let (mid, rad) = (spec.midpoints(), spec.radii());
    DVector::from_fn(spec.dim(), |i, _| mid[i] + rad[i] * u[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beam() -> MarginalSpec {
        MarginalSpec::new(&[("b", 90.0, 110.0), ("h", 180.0, 220.0), ("L", 900.0, 1100.0)]).unwrap()
    }

    #[test]
    fn beam_midpoints_and_radii() {
        let s = beam();
        assert_eq!(s.midpoints().as_slice(), &[100.0, 200.0, 1000.0]);
        assert_eq!(s.radii().as_slice(), &[10.0, 20.0, 100.0]);
    }

    #[test]
    fn standard_variable() {
        let s = MarginalSpec::new(&[("x", -1.0, 1.0)]).unwrap();
        assert_eq!(s.midpoints()[0], 0.0);
        assert_eq!(s.radii()[0], 1.0);
    }

    #[test]
    fn rejects_degenerate_and_duplicate() {
        assert!(matches!(MarginalSpec::new(&[("x", 5.0, 5.0)]), Err(Error::DegenerateInterval { .. })));
        assert!(matches!(MarginalSpec::new(&[("x", 0.0, 1.0), ("x", 0.0, 2.0)]), Err(Error::DuplicateName(_))));
        assert!(matches!(MarginalSpec::new(&[("", 0.0, 1.0)]), Err(Error::InvalidName(_))));
    }

    #[test]
    fn upper_bound_maps_to_one() {
        let spec = MarginalSpec::new(&[("x", 90.0, 110.0)]).unwrap();
        let s = SampleSet::from_rows(&["x"], &[vec![110.0], vec![90.0]]).unwrap();
        let u = regularize(&spec, &s).unwrap();
        assert_eq!(u.rows()[(0, 0)], 1.0);
        assert_eq!(u.rows()[(1, 0)], -1.0);
    }

    #[test]
    fn standard_points_are_fixed() {
        let spec = MarginalSpec::standard(1);
        let s = SampleSet::from_rows(&["u1"], &[vec![0.365]]).unwrap();
        assert_eq!(regularize(&spec, &s).unwrap().rows()[(0, 0)], 0.365);
    }

    #[test]
    fn geotech_first_row() {
        let spec = MarginalSpec::new(&[
            ("X1", 28.0, 66.0),
            ("X2", 12.0, 50.0),
            ("X3", 2.0, 26.0),
            ("X4", 0.0, 240.0),
            ("X5", 0.0, 100.0),
            ("Y", 0.3, 0.6),
        ])
        .unwrap();
        let s =
            SampleSet::from_rows(&["X1", "X2", "X3", "X4", "X5", "Y"], &[vec![53.0, 31.0, 12.0, 75.0, 26.99, 0.45]])
                .unwrap();
        let u = regularize(&spec, &s).unwrap();
        let want = [6.0 / 19.0, 0.0, -2.0 / 12.0, -45.0 / 120.0, -23.01 / 50.0, 0.0];
        for (c, w) in want.iter().enumerate() {
            assert!((u.rows()[(0, c)] - w).abs() < 1e-12, "col {c}");
        }
        assert!((u.rows()[(0, 0)] - 0.3158).abs() < 1e-4);
        assert!((u.rows()[(0, 4)] + 0.4602).abs() < 1e-4);
    }

    #[test]
    fn outside_marginal_is_reported() {
        let spec = MarginalSpec::standard(2);
        let s = SampleSet::from_rows(&["u1", "u2"], &[vec![0.0, 0.0], vec![1.0001, 0.2]]).unwrap();
        let rep = validate_samples(&spec, &s);
        assert_eq!(rep.violations, vec![Violation { row: 1, column: 0, value: 1.0001 }]);
        match regularize(&spec, &s) {
            Err(Error::SampleOutsideMarginal { row, column, value, .. }) => {
                assert_eq!((row, column.as_str(), value), (1, "u1", 1.0001));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn columns_are_aligned_by_name() {
        let spec = MarginalSpec::new(&[("a", 0.0, 2.0), ("b", 10.0, 20.0)]).unwrap();
        let s = SampleSet::from_rows(&["b", "a"], &[vec![20.0, 1.0]]).unwrap();
        let u = regularize(&spec, &s).unwrap();
        assert_eq!(u.rows().row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0]);
        let bad = SampleSet::from_rows(&["b", "c"], &[vec![20.0, 1.0]]).unwrap();
        assert!(matches!(regularize(&spec, &bad), Err(Error::NameMismatch { .. })));
    }

    #[test]
    fn deregularize_corners() {
        let s = beam();
        let x = deregularize(&s, &DMatrix::from_row_slice(2, 3, &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0])).unwrap();
        assert_eq!(x.row(0).iter().copied().collect::<Vec<_>>(), vec![100.0, 200.0, 1000.0]);
        assert_eq!(x.row(1).iter().copied().collect::<Vec<_>>(), vec![110.0, 220.0, 1100.0]);
        assert!(matches!(
            deregularize(&s, &DMatrix::zeros(1, 2)),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn csv_and_interval_files() {
        let spec = MarginalSpec::parse_intervals("# beam\nb,90,110\n\nh, 180 , 220\n").unwrap();
        assert_eq!(spec.names(), &["b".to_string(), "h".to_string()]);
        let s = SampleSet::parse_csv("b,h\n97.69,206.31\n94.41,199.87\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.rows()[(1, 1)], 199.87);
        assert!(matches!(SampleSet::parse_csv("b,h\n1,x\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(MarginalSpec::parse_intervals("b,90\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(SampleSet::parse_csv("b,h\n"), Err(Error::EmptySamples)));
        let back = SampleSet::parse_csv(&s.to_csv()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(SampleSet::from_rows(&["a"], &[vec![f64::NAN]]), Err(Error::NonFinite { row: 0, column: 0 })));
    }
}
