//! Uniform sampling inside a model, Monte-Carlo volume estimates and the
//! SCC recovery check.
//!
//! Draws are produced in fixed blocks of [`BLOCK`] rows. Block `k` uses a
//! ChaCha8 generator seeded with `seed` on stream `k`, so output depends only
//! on `(count, seed)` and blocks can run on any number of threads.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::correlation::{self, CorrelationMatrix, CorrelationMethod, ModelVariant};
use crate::domain::MarginalSpec;
use crate::error::{Error, Result};
use crate::model::ConvexModel;

pub const BLOCK: usize = 4096;

fn block_rng(seed: u64, stream: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.wrapping_mul(1 << 32).wrapping_add(block as u64));
    rng
}

fn blocks(count: usize) -> Vec<(usize, usize)> {
    (0..count.div_ceil(BLOCK)).map(|b| (b, BLOCK.min(count - b * BLOCK))).collect()
}

/// Uniform on `[-1, 1)`.
fn symmetric_unit(rng: &mut ChaCha8Rng) -> f64 {
    2.0 * rng.random::<f64>() - 1.0
}

/// Standard normal pair by Box–Muller.
fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    let rad = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (rad * c, rad * s)
}

/// Uniform point in the unit `n`-ball.
fn unit_ball_point(rng: &mut ChaCha8Rng, n: usize, out: &mut [f64]) {
    loop {
        let mut k = 0;
        while k < n {
            let (a, b) = gaussian_pair(rng);
            out[k] = a;
            if k + 1 < n {
                out[k + 1] = b;
            }
            k += 2;
        }
        let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            let radius = rng.random::<f64>().powf(1.0 / n as f64);
            out.iter_mut().for_each(|x| *x *= radius / norm);
            return;
        }
    }
}

/// Standardized draws: unit ball for ME, unit cube for MP.
pub fn sample_delta(variant: ModelVariant, n: usize, count: usize, seed: u64) -> DMatrix<f64> {
    let parts: Vec<Vec<f64>> = blocks(count)
        .into_par_iter()
        .map(|(b, len)| {
            let mut rng = block_rng(seed, 0, b);
            let mut buf = vec![0.0; len * n];
            for row in buf.chunks_mut(n) {
                if variant.is_ellipsoid() {
                    unit_ball_point(&mut rng, n, row);
                } else {
                    row.iter_mut().for_each(|x| *x = symmetric_unit(&mut rng));
                }
            }
            buf
        })
        .collect();
    DMatrix::from_row_iterator(count, n, parts.into_iter().flatten())
}

/// `count` points uniformly distributed in the model's domain, one per row.
pub fn sample_uniform(model: &ConvexModel, count: usize, seed: u64) -> DMatrix<f64> {
    let n = model.dim();
    let delta = sample_delta(model.variant(), n, count, seed);
    let map = model.spec().scaling() * model.factor();
    let mut x = delta * map.transpose();
    let mid = model.spec().midpoints();
    for mut row in x.row_iter_mut() {
        for (v, m) in row.iter_mut().zip(mid.iter()) {
            *v += m;
        }
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub hits: usize,
    pub draws: usize,
}

/// Hit ratio of uniform draws over the marginal box.
pub fn mc_volume(model: &ConvexModel, count: usize, seed: u64) -> Result<VolumeEstimate> {
    if count == 0 {
        return Err(Error::InvalidArgument("draw count must be positive".into()));
    }
    let n = model.dim();
    let lo = model.spec().lowers();
    let hi = model.spec().uppers();
    let hits: usize = blocks(count)
        .into_par_iter()
        .map(|(b, len)| {
            let mut rng = block_rng(seed, 1, b);
            let mut x = DVector::zeros(n);
            let mut hits = 0;
            for _ in 0..len {
                for k in 0..n {
                    x[k] = lo[k] + (hi[k] - lo[k]) * rng.random::<f64>();
                }
                if model.contains(&x).map(|m| m.inside).unwrap_or(false) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p = hits as f64 / count as f64;
    Ok(VolumeEstimate { estimate: p, std_error: (p * (1.0 - p) / count as f64).sqrt(), hits, draws: count })
}

/// Pairwise SCC matrix of point rows about the given midpoints.
pub fn scc_matrix(points: &DMatrix<f64>, midpoints: &[f64]) -> Result<DMatrix<f64>> {
    let n = points.ncols();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| points.column(j).iter().copied().collect()).collect();
    let mut r = DMatrix::identity(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = correlation::scc(&cols[i], &cols[j], midpoints[i], midpoints[j])?;
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    UnbiasedConsistent,
    BiasedDetected,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::UnbiasedConsistent => "unbiased-consistent",
            Verdict::BiasedDetected => "biased-detected",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnbiasednessReport {
    pub variant: ModelVariant,
    pub method: CorrelationMethod,
    pub true_r: DMatrix<f64>,
    pub recovered_r: DMatrix<f64>,
    pub max_abs_error: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub draws: usize,
    pub seed: u64,
}

impl UnbiasednessReport {
    pub fn verdict_line(&self) -> String {
        format!("verdict={} max_err={:.6}", self.verdict, self.max_abs_error)
    }
}

/// Acceptance band for the SCC recovery error at a given draw count.
pub fn tolerance(draws: usize) -> f64 {
    4.0 / (draws as f64).sqrt() + 0.005
}

fn standard_model(variant: ModelVariant, r: &DMatrix<f64>) -> Result<ConvexModel> {
    let r = CorrelationMatrix::new(r.clone(), CorrelationMethod::Given, variant)?;
    ConvexModel::build(variant, &MarginalSpec::standard(r.dim()), &r)
}

/// Draws uniformly from the standard domain of `variant` built on `r` and
/// checks that the SCC matrix of the draws recovers `r`.
pub fn verify_unbiasedness(
    variant: ModelVariant,
    r: &DMatrix<f64>,
    draws: usize,
    seed: u64,
) -> Result<UnbiasednessReport> {
    if draws < 2 {
        return Err(Error::TooFewSamples { needed: 2, found: draws });
    }
    let model = standard_model(variant, r)?;
    let points = sample_uniform(&model, draws, seed);
    let recovered = scc_matrix(&points, &vec![0.0; model.dim()])?;
    let max_abs_error = crate::linalg::max_abs_diff(&recovered, model.correlation().entries());
    let tolerance = tolerance(draws);
    Ok(UnbiasednessReport {
        variant,
        method: CorrelationMethod::Scc,
        true_r: model.correlation().entries().clone(),
        recovered_r: recovered,
        max_abs_error,
        tolerance,
        verdict: if max_abs_error <= tolerance { Verdict::UnbiasedConsistent } else { Verdict::BiasedDetected },
        draws,
        seed,
    })
}

/// Like [`verify_unbiasedness`] but refits each pair with the CCC of the
/// variant. Reports the gap only; there is no verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CccGapReport {
    pub variant: ModelVariant,
    pub true_r: DMatrix<f64>,
    pub recovered_r: DMatrix<f64>,
    pub max_abs_error: f64,
    pub draws: usize,
    pub seed: u64,
}

pub fn ccc_gap(variant: ModelVariant, r: &DMatrix<f64>, draws: usize, seed: u64) -> Result<CccGapReport> {
    let model = standard_model(variant, r)?;
    let points = sample_uniform(&model, draws, seed);
    let u = crate::domain::regularized_from_rows(points)?;
    let (recovered, _) = correlation::correlation_matrix(variant, CorrelationMethod::Ccc, &u)?;
    let recovered = recovered.entries().clone();
    Ok(CccGapReport {
        variant,
        max_abs_error: crate::linalg::max_abs_diff(&recovered, model.correlation().entries()),
        true_r: model.correlation().entries().clone(),
        recovered_r: recovered,
        draws,
        seed,
    })
}
