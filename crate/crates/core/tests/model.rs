use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ncm_core::model::{construct, Step};
use ncm_core::svg::display_hull;
use ncm_core::{ConvexModel, CorrelationMethod, Error, MarginalSpec, ModelVariant, PdPolicy, SampleSet};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("testdata").join(name)
}

fn load(stem: &str) -> (MarginalSpec, SampleSet) {
    let spec = MarginalSpec::read_intervals(data(&format!("{stem}_intervals.csv"))).unwrap();
    let samples = SampleSet::read_csv(data(&format!("{stem}_samples.csv"))).unwrap();
    (spec, samples)
}

fn three_var(v: ModelVariant) -> ConvexModel {
    let (spec, samples) = load("three_var");
    construct(&spec, &samples, v, CorrelationMethod::Scc, PdPolicy::Strict).unwrap().model
}

#[test]
fn ellipsoid_slack_matches_quadratic_form() {
    let (spec, samples) = load("cantilever");
    let m = construct(&spec, &samples, ModelVariant::Me, CorrelationMethod::Scc, PdPolicy::Strict).unwrap().model;
    let d = DMatrix::from_diagonal(&spec.radii());
    let g = (&d * m.correlation().entries() * &d).try_inverse().unwrap();
    for row in samples.rows().row_iter() {
        let dx = row.transpose() - spec.midpoints();
        let q = (dx.transpose() * &g * &dx)[(0, 0)];
        let got = m.contains(&row.transpose()).unwrap().slack;
        assert!((got - q).abs() < 1e-9 * q.max(1.0), "{got} vs {q}");
    }
}

/// Any factor `P` with `P Pᵀ = R` describes the same ellipsoid.
#[test]
fn ellipsoid_independent_of_factor() {
    let m = three_var(ModelVariant::Me);
    let r = m.correlation().entries().clone();
    let e = r.clone().symmetric_eigen();
    let root = &e.eigenvectors * DMatrix::from_diagonal(&e.eigenvalues.map(f64::sqrt)) * e.eigenvectors.transpose();
    let d = DMatrix::from_diagonal(&m.spec().radii());
    let map = (&d * root).try_inverse().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let x = DVector::from_fn(3, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let delta = m.to_delta(&x).unwrap();
        let other = &map * (&x - m.spec().midpoints());
        assert!((delta.norm() - other.norm()).abs() < 1e-12);
        assert!((delta.norm_squared() - m.contains(&x).unwrap().slack).abs() < 1e-12);
    }
}

#[test]
fn rescaling_preserves_membership_and_volume() {
    let factors = [2.0, 0.5, 10.0];
    for v in ModelVariant::ALL {
        let m = three_var(v);
        let spec2 = m.spec().rescaled(&factors).unwrap();
        let m2 = ConvexModel::build(v, &spec2, m.correlation()).unwrap();
        assert!((m.volume_ratio().0 - m2.volume_ratio().0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let x = DVector::from_fn(3, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let x2 = DVector::from_fn(3, |k, _| factors[k] * x[k]);
            let (a, b) = (m.contains(&x).unwrap(), m2.contains(&x2).unwrap());
            assert!((a.slack - b.slack).abs() < 1e-9, "{v}");
        }
    }
}

#[test]
fn parallelepiped_vertices_sit_on_the_boundary() {
    for v in ModelVariant::PARALLELEPIPEDS {
        let m = three_var(v);
        for bits in 0..8u32 {
            let delta = DVector::from_fn(3, |k, _| if bits >> k & 1 == 1 { 1.0 } else { -1.0 });
            let x = m.from_delta(&delta).unwrap();
            let mem = m.contains(&x).unwrap();
            assert!(mem.inside && (mem.slack - 1.0).abs() < 1e-9, "{v}: {}", mem.slack);
            // Marginal exactness: every coordinate stays inside its interval.
            for (k, iv) in m.spec().intervals().iter().enumerate() {
                assert!(x[k] >= iv.lower - 1e-9 && x[k] <= iv.upper + 1e-9);
            }
        }
    }
}

#[test]
fn hand_written_model_loads() {
    let m = ConvexModel::read(data("controller_mp2.toml")).unwrap();
    assert_eq!(m.variant(), ModelVariant::Mp2);
    assert_eq!(m.dim(), 4);
    assert_eq!(m.spec().names(), ["Ta", "Va", "PA", "PB"]);
    let mid = m.spec().midpoints();
    assert_eq!(m.contains(&mid).unwrap().slack, 0.0);
    let hot = DVector::from_vec(vec![50.0, 0.7, 0.6, 0.2]);
    assert!(!m.contains(&hot).unwrap().inside);
    let (nu, _) = m.volume_ratio();
    assert!(nu > 0.0 && nu < 1.0);
}

#[test]
fn file_round_trip_keeps_behaviour() {
    let dir = tempfile::tempdir().unwrap();
    for v in ModelVariant::ALL {
        let m = three_var(v);
        let path = dir.path().join(format!("{v}.toml"));
        m.write(&path).unwrap();
        let back = ConvexModel::read(&path).unwrap();
        assert_eq!(back.variant(), v);
        assert_eq!(back.correlation().entries(), m.correlation().entries());
        assert_eq!(back.volume_ratio(), m.volume_ratio());
        let (spec, samples) = load("three_var");
        assert_eq!(back.assess(&samples).unwrap(), m.assess(&samples).unwrap());
        assert_eq!(back.spec(), &spec);
    }
}

#[test]
fn tampered_covariance_rejected() {
    let text = three_var(ModelVariant::Me).to_toml();
    let start = text.find("covariance = [").unwrap() + "covariance = [".len();
    let mut tampered = text.clone();
    tampered.replace_range(start..start + 1, "9");
    assert!(ConvexModel::from_toml(&tampered).is_err());
    assert!(ConvexModel::from_toml(&text).is_ok());
}

#[test]
fn projection_requires_ellipsoid() {
    assert!(matches!(three_var(ModelVariant::Mp2).project_2d(0, 1), Err(Error::NotEllipsoid)));
    assert!(matches!(three_var(ModelVariant::Me).project_2d(0, 3), Err(Error::IndexOutOfRange { .. })));
}

fn hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut h: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = h.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while h.len() >= start + 2 && cross(h[h.len() - 2], h[h.len() - 1], p) <= 1e-12 {
                h.pop();
            }
            h.push(p);
        }
        h.pop();
    }
    h
}

fn area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n).map(|k| poly[k][0] * poly[(k + 1) % n][1] - poly[(k + 1) % n][0] * poly[k][1]).sum::<f64>() / 2.0
}

#[test]
fn display_hull_matches_vertex_projection() {
    let m = ConvexModel::read(data("controller_mp2.toml")).unwrap();
    let s = m.shape().unwrap();
    for (i, j) in [(0, 2), (1, 3), (2, 3)] {
        let projected: Vec<[f64; 2]> = (0..16u32)
            .map(|bits| {
                let d = DVector::from_fn(4, |k, _| if bits >> k & 1 == 1 { 1.0 } else { -1.0 });
                let u = &s.entries * d;
                [u[i], u[j]]
            })
            .collect();
        let oracle = hull(projected);
        let shown = display_hull(s, i, j);
        assert!((area(&oracle) - area(&shown)).abs() < 1e-12, "({i},{j})");
        assert!(area(&shown) > 0.0, "counter-clockwise");
        for v in &oracle {
            assert!(shown.iter().any(|w| (v[0] - w[0]).abs() < 1e-12 && (v[1] - w[1]).abs() < 1e-12));
        }
    }
}

#[test]
fn failures_name_their_step() {
    let spec = MarginalSpec::standard(3);
    let samples =
        SampleSet::from_rows(&["u1", "u2", "u3"], &[vec![0.5, 0.4, 0.0], vec![-0.3, -0.2, 0.0], vec![0.1, -0.6, 0.0]])
            .unwrap();
    let f = construct(&spec, &samples, ModelVariant::Me, CorrelationMethod::Scc, PdPolicy::Strict).unwrap_err();
    assert_eq!(f.step, Step::Correlation);
    assert_eq!(f.error, Error::ZeroDeviation(2));

    let outside = SampleSet::from_rows(&["u1", "u2", "u3"], &[vec![1.5, 0.0, 0.0]]).unwrap();
    let f = construct(&spec, &outside, ModelVariant::Me, CorrelationMethod::Scc, PdPolicy::Strict).unwrap_err();
    assert_eq!(f.step, Step::Regularization);
}
