//! Reliability index: the smallest standardized distance from the domain
//! midpoint to the surface `g = 0`.
//!
//! Each start direction is ray-rooted (first sign change of `g` along the
//! ray), then improved by a Nelder–Mead search over directions whose
//! objective is the ray-root distance. Euclidean runs finish with HL-RF
//! steps on finite-difference gradients.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::expr::{BoundLimitState, LimitState};
use crate::error::{Error, Result};
use crate::model::{ConvexModel, Norm};

#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityOptions {
    /// Constants for names in `g` that are not model variables.
    pub bindings: BTreeMap<String, f64>,
    /// Overrides the model's natural norm.
    pub norm: Option<Norm>,
    /// Search radius in standardized units.
    pub eta_max: f64,
    pub seed: u64,
    /// Defaults to `2 n²`.
    pub random_starts: Option<usize>,
}

impl Default for ReliabilityOptions {
    fn default() -> Self {
        Self { bindings: BTreeMap::new(), norm: None, eta_max: 10.0, seed: 0, random_starts: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityResult {
    pub eta: f64,
    pub delta_star: DVector<f64>,
    pub x_star: DVector<f64>,
    pub norm: Norm,
    pub converged: bool,
    pub evaluations: usize,
    /// `g` at the midpoint; its sign tells which side of the surface the
    /// midpoint lies on.
    pub g_midpoint: f64,
}

const SCAN_STEPS: usize = 512;

struct Problem<'a> {
    model: &'a ConvexModel,
    g: BoundLimitState,
    norm: Norm,
    g0: f64,
    g_tol: f64,
    eta_max: f64,
    evals: AtomicUsize,
}

impl Problem<'_> {
    fn g(&self, delta: &DVector<f64>) -> f64 {
        self.evals.fetch_add(1, Ordering::Relaxed);
        let x = self.model.from_delta(delta).expect("dimension checked");
        self.g.eval(x.as_slice())
    }

    fn crossed(&self, v: f64) -> bool {
        v.is_finite() && (v == 0.0 || v.signum() != self.g0.signum())
    }

    /// Distance along `dir` (unit in the active norm) to the first root.
    fn ray_root(&self, dir: &DVector<f64>) -> Option<f64> {
        let step = self.eta_max / SCAN_STEPS as f64;
        let mut a = 0.0;
        let mut ga = self.g0;
        for k in 1..=SCAN_STEPS {
            let b = step * k as f64;
            let gb = self.g(&(dir * b));
            if self.crossed(gb) {
                return Some(self.refine_root(dir, a, ga, b, gb));
            }
            if gb.is_finite() {
                a = b;
                ga = gb;
            }
        }
        None
    }

    /// Illinois iteration on a bracket `[a, b]` with `g(b)` past the surface.
    fn refine_root(&self, dir: &DVector<f64>, mut a: f64, mut ga: f64, mut b: f64, gb: f64) -> f64 {
        if gb.abs() <= self.g_tol {
            return b;
        }
        // `fb` is the possibly down-weighted value used for the secant step
        let mut fb = gb;
        let mut side = 0;
        for _ in 0..200 {
            let mut c = if fb.is_finite() { (a * fb - b * ga) / (fb - ga) } else { f64::NAN };
            if !(c > a && c < b) {
                c = 0.5 * (a + b);
            }
            let gc = self.g(&(dir * c));
            if gc.is_finite() && gc.abs() <= self.g_tol {
                return c;
            }
            if self.crossed(gc) {
                b = c;
                fb = gc;
                if side == 1 {
                    ga *= 0.5;
                }
                side = 1;
            } else if gc.is_finite() {
                a = c;
                ga = gc;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = c;
                fb = f64::NAN;
                side = 0;
            }
            if b - a <= 1e-15 * b.max(1.0) {
                break;
            }
        }
        b
    }

    fn unit(&self, v: &DVector<f64>) -> Option<DVector<f64>> {
        let n = self.norm.of(v);
        (n > 0.0 && n.is_finite()).then(|| v / n)
    }

    fn objective(&self, v: &DVector<f64>) -> f64 {
        match self.unit(v).and_then(|d| self.ray_root(&d)) {
            Some(t) => t,
            None => self.eta_max * 2.0,
        }
    }

    fn gradient(&self, delta: &DVector<f64>) -> DVector<f64> {
        let n = delta.len();
        DVector::from_fn(n, |k, _| {
            let h = 1e-6 * delta[k].abs().max(1.0);
            let mut p = delta.clone();
            p[k] += h;
            let gp = self.g(&p);
            p[k] -= 2.0 * h;
            let gm = self.g(&p);
            (gp - gm) / (2.0 * h)
        })
    }

    /// HL-RF iterations, each landed back on the surface by a ray root.
    fn hlrf(&self, mut best: DVector<f64>) -> DVector<f64> {
        let mut best_t = self.norm.of(&best);
        for _ in 0..50 {
            let grad = self.gradient(&best);
            let gg = grad.norm_squared();
            if !(gg > 0.0) || !gg.is_finite() {
                break;
            }
            let gv = self.g(&best);
            let next = &grad * ((grad.dot(&best) - gv) / gg);
            let Some(dir) = self.unit(&next) else { break };
            let Some(t) = self.ray_root(&dir) else { break };
            if t < best_t - 1e-14 * best_t.max(1.0) {
                let improved = best_t - t;
                best = dir * t;
                best_t = t;
                if improved <= 1e-13 * best_t.max(1.0) {
                    break;
                }
            } else {
                break;
            }
        }
        best
    }
}

/// Plain Nelder–Mead minimization, returning the best vertex and value.
fn nelder_mead(
    f: &impl Fn(&DVector<f64>) -> f64,
    x0: DVector<f64>,
    scale: f64,
    max_evals: usize,
) -> (DVector<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(DVector<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = f(&x0);
    simplex.push((x0.clone(), f0));
    for k in 0..n {
        let mut x = x0.clone();
        x[k] += scale;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evals = n + 1;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        if (worst - best).abs() <= 1e-12 * best.abs().max(1e-12) {
            let spread = simplex.iter().map(|(x, _)| (x - &simplex[0].0).amax()).fold(0.0, f64::max);
            if spread < 1e-10 {
                break;
            }
        }
        let centroid = simplex[..n].iter().fold(DVector::zeros(n), |acc, (x, _)| acc + x) / n as f64;
        let xr = &centroid + (&centroid - &simplex[n].0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = &centroid + (&xr - &centroid) * 2.0;
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = &centroid + (&xr - &centroid) * 0.5;
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = &centroid + (&simplex[n].0 - &centroid) * 0.5;
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let xs = &x_best + (&item.0 - &x_best) * 0.5;
                    let fs = f(&xs);
                    *item = (xs, fs);
                    evals += 1;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

fn start_directions(n: usize, random: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut dirs = Vec::with_capacity(2 * n + random);
    for k in 0..n {
        for s in [1.0, -1.0] {
            let mut d = DVector::zeros(n);
            d[k] = s;
            dirs.push(d);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    use rand::Rng;
    for _ in 0..random {
        let v = DVector::from_fn(n, |_, _| {
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        });
        dirs.push(v);
    }
    dirs
}

/// Minimal distance from the midpoint to `g = 0` in standardized space.
pub fn reliability_index(
    model: &ConvexModel,
    g: &LimitState,
    options: &ReliabilityOptions,
) -> Result<ReliabilityResult> {
    let n = model.dim();
    let names = model.spec().names().to_vec();
    let bound = g.bind(&names, &options.bindings)?;
    if !(options.eta_max > 0.0) {
        return Err(Error::InvalidArgument("eta_max must be positive".into()));
    }
    let g0 = bound.eval(model.spec().midpoints().as_slice());
    if !g0.is_finite() {
        return Err(Error::Evaluation("limit state is not finite at the midpoint".into()));
    }
    if g0 == 0.0 {
        return Err(Error::MidpointOnSurface);
    }
    let problem = Problem {
        model,
        g: bound,
        norm: options.norm.unwrap_or_else(|| model.norm()),
        g0,
        g_tol: 1e-8 * g0.abs().max(1.0),
        eta_max: options.eta_max,
        evals: AtomicUsize::new(1),
    };
    let starts = start_directions(n, options.random_starts.unwrap_or(2 * n * n), options.seed);
    let max_evals = 150 * (n + 1);
    let outcomes: Vec<Option<DVector<f64>>> = starts
        .par_iter()
        .map(|s| {
            let d = problem.unit(s)?;
            problem.ray_root(&d)?;
            let f = |v: &DVector<f64>| problem.objective(v);
            let (mut v, mut fv) = nelder_mead(&f, d.clone(), 0.2, max_evals);
            for scale in [0.05, 0.01] {
                let (w, fw) = nelder_mead(&f, v.clone(), scale * problem.norm.of(&v).max(1e-3), max_evals);
                if fw <= fv {
                    v = w;
                    fv = fw;
                }
            }
            let dir = problem.unit(&v)?;
            let t = problem.ray_root(&dir)?;
            let point = dir * t;
            Some(if problem.norm == Norm::Euclidean { problem.hlrf(point) } else { point })
        })
        .collect();
    let mut found: Vec<(f64, DVector<f64>)> =
        outcomes.into_iter().flatten().map(|d| (problem.norm.of(&d), d)).collect();
    if found.is_empty() {
        return Err(Error::NoSurfaceFound { eta_max: options.eta_max });
    }
    found.sort_by(|a, b| {
        a.0.total_cmp(&b.0).then_with(|| {
            a.1.iter()
                .zip(b.1.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let converged = found.len() >= 2 && (found[1].0 - found[0].0) <= 1e-4 * found[0].0.max(1e-12);
    let (eta, delta_star) = found.swap_remove(0);
    let x_star = model.from_delta(&delta_star)?;
    Ok(ReliabilityResult {
        eta,
        delta_star,
        x_star,
        norm: problem.norm,
        converged,
        evaluations: problem.evals.load(Ordering::Relaxed),
        g_midpoint: g0,
    })
}
