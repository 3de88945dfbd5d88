use std::path::PathBuf;

use nalgebra::DMatrix;
use proptest::prelude::*;

use ncm_core::{deregularize, regularize, validate_samples, Error, MarginalSpec, SampleSet};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("testdata").join(name)
}

fn load(stem: &str) -> (MarginalSpec, SampleSet) {
    let spec = MarginalSpec::read_intervals(data(&format!("{stem}_intervals.csv"))).unwrap();
    let samples = SampleSet::read_csv(data(&format!("{stem}_samples.csv"))).unwrap();
    (spec, samples)
}

#[test]
fn geotech_first_row_regularizes_by_hand() {
    let (spec, samples) = load("geotech");
    let u = regularize(&spec, &samples).unwrap();
    // (x - m) / r worked out per column.
    let want = [6.0 / 19.0, 0.0, -2.0 / 12.0, -45.0 / 120.0, -23.01 / 50.0, 0.0];
    for (k, w) in want.iter().enumerate() {
        assert!((u.rows()[(0, k)] - w).abs() < 1e-12, "column {k}: {} vs {w}", u.rows()[(0, k)]);
    }
}

#[test]
fn fixtures_validate_cleanly() {
    for stem in ["three_var", "geotech", "cantilever"] {
        let (spec, samples) = load(stem);
        let report = validate_samples(&spec, &samples);
        assert!(report.is_valid(), "{stem}: {report:?}");
    }
}

#[test]
fn out_of_box_sample_is_reported() {
    let spec = MarginalSpec::new(&[("a", 0.0, 1.0), ("b", -2.0, 2.0)]).unwrap();
    let samples = SampleSet::from_rows(&["a", "b"], &[vec![0.5, 0.0], vec![1.5, 0.0]]).unwrap();
    assert!(!validate_samples(&spec, &samples).is_valid());
    assert!(matches!(regularize(&spec, &samples), Err(Error::SampleOutsideMarginal { row: 1, .. })));
}

#[test]
fn columns_are_matched_by_name() {
    let spec = MarginalSpec::new(&[("a", 0.0, 1.0), ("b", -2.0, 2.0)]).unwrap();
    let swapped = SampleSet::from_rows(&["b", "a"], &[vec![1.0, 0.25]]).unwrap();
    let u = regularize(&spec, &swapped.aligned_to(&spec).unwrap()).unwrap();
    assert!((u.rows()[(0, 0)] + 0.5).abs() < 1e-15);
    assert!((u.rows()[(0, 1)] - 0.5).abs() < 1e-15);
}

#[test]
fn csv_round_trip() {
    let (_, samples) = load("cantilever");
    let back = SampleSet::parse_csv(&samples.to_csv()).unwrap();
    assert_eq!(back, samples);
}

#[test]
fn degenerate_interval_rejected() {
    assert!(matches!(MarginalSpec::new(&[("a", 1.0, 1.0)]), Err(Error::DegenerateInterval { .. })));
    assert!(matches!(MarginalSpec::new(&[("a", 0.0, 1.0), ("a", 0.0, 2.0)]), Err(Error::DuplicateName(_))));
}

proptest! {
    #[test]
    fn regularization_round_trips(
        bounds in prop::collection::vec((-1e3f64..1e3, 1e-3f64..1e3), 1..6),
        fracs in prop::collection::vec(0.0f64..=1.0, 30),
    ) {
        let n = bounds.len();
        let pairs: Vec<(String, f64, f64)> =
            bounds.iter().enumerate().map(|(k, &(lo, w))| (format!("x{k}"), lo, lo + w)).collect();
        let spec = MarginalSpec::new(&pairs).unwrap();
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|s| (0..n).map(|k| pairs[k].1 + fracs[(s * n + k) % fracs.len()] * (pairs[k].2 - pairs[k].1)).collect())
            .collect();
        let names: Vec<&str> = pairs.iter().map(|p| p.0.as_str()).collect();
        let samples = SampleSet::from_rows(&names, &rows).unwrap();
        let u = regularize(&spec, &samples).unwrap();
        prop_assert!(u.rows().iter().all(|v| v.abs() <= 1.0 + 1e-12));
        let x: DMatrix<f64> = deregularize(&spec, u.rows()).unwrap();
        for (a, b) in x.iter().zip(samples.rows().iter()) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }
}
