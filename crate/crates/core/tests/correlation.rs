use std::path::PathBuf;

use nalgebra::DMatrix;
use proptest::prelude::*;

use ncm_core::correlation::encloses_2d;
use ncm_core::{
    ccc_fit, ensure_positive_definite, regularize, sample_uniform, scc, ConvexModel, CorrelationMatrix,
    CorrelationMethod, Error, MarginalSpec, ModelVariant, PdPolicy, SampleSet,
};

fn table_pairs(i: usize, j: usize) -> Vec<[f64; 2]> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("testdata");
    let spec = MarginalSpec::read_intervals(dir.join("three_var_intervals.csv")).unwrap();
    let samples = SampleSet::read_csv(dir.join("three_var_samples.csv")).unwrap();
    regularize(&spec, &samples).unwrap().pair(i, j)
}

#[test]
fn first_pair_ccc_values() {
    let pairs = table_pairs(0, 1);
    let me = ccc_fit(ModelVariant::Me, &pairs).unwrap();
    assert!((me.r - 0.7623).abs() < 0.01, "{}", me.r);
    let mp2 = ccc_fit(ModelVariant::Mp2, &pairs).unwrap();
    assert!((mp2.r - 0.73).abs() < 0.01, "{}", mp2.r);
    assert!(!me.degenerate && !mp2.degenerate);
}

#[test]
fn ellipse_fit_touches_a_sample() {
    // The tightest ellipse has at least one sample on its boundary.
    let pairs = table_pairs(0, 2);
    let r = ccc_fit(ModelVariant::Me, &pairs).unwrap().r;
    let worst =
        pairs.iter().map(|p| (p[0] * p[0] - 2.0 * r * p[0] * p[1] + p[1] * p[1]) / (1.0 - r * r)).fold(0.0, f64::max);
    assert!((worst - 1.0).abs() < 1e-9, "{worst}");
}

/// For uniform draws from a domain the CCC and SCC both recover the parameter.
#[test]
fn ccc_and_scc_agree_on_uniform_draws() {
    let r = DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 1.0]);
    for v in ModelVariant::ALL.into_iter().filter(|&v| v != ModelVariant::Mp1) {
        let cm = CorrelationMatrix::new(r.clone(), CorrelationMethod::Given, v).unwrap();
        let model = ConvexModel::build(v, &MarginalSpec::standard(2), &cm).unwrap();
        let pts = sample_uniform(&model, 200_000, 5);
        let pairs: Vec<[f64; 2]> = pts.row_iter().map(|row| [row[0], row[1]]).collect();
        let c = ccc_fit(v, &pairs).unwrap().r;
        let s = scc(pts.column(0).as_slice(), pts.column(1).as_slice(), 0.0, 0.0).unwrap();
        assert!((c - s).abs() < 0.02, "{v}: ccc {c} scc {s}");
        assert!((c - 0.6).abs() < 0.02, "{v}: ccc {c}");
    }
}

#[test]
fn strict_rejects_indefinite_and_repair_fixes_it() {
    let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.9, 0.9, 0.9, 1.0, -0.9, 0.9, -0.9, 1.0]);
    let r = CorrelationMatrix::new(m.clone(), CorrelationMethod::Given, ModelVariant::Me).unwrap();
    // Independent eigenvalue check: the symmetric solver in nalgebra.
    assert!(m.clone().symmetric_eigen().eigenvalues.min() < 0.0);
    assert!(matches!(ensure_positive_definite(r.clone(), PdPolicy::Strict), Err(Error::NotPositiveDefinite { .. })));
    let (fixed, report) = ensure_positive_definite(r, PdPolicy::Repair).unwrap();
    let e = fixed.entries();
    assert!(e.clone().symmetric_eigen().eigenvalues.min() > 0.0);
    assert!((0..3).all(|i| e[(i, i)] == 1.0));
    assert_eq!(e, &e.transpose());
    assert!(report.unwrap().max_entry_change > 0.0);
}

#[test]
fn infeasible_pair_is_an_error() {
    let pairs = [[0.9, 0.9], [0.9, -0.9]];
    assert!(matches!(ccc_fit(ModelVariant::Me, &pairs), Err(Error::InfeasibleFit { .. })));
}

#[test]
fn scc_rejects_constant_column() {
    assert!(matches!(scc(&[0.0, 0.0], &[0.1, 0.2], 0.0, 0.0), Err(Error::ZeroDeviation(0))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scc_bounded_and_symmetric(xs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..40)) {
        let (a, b): (Vec<f64>, Vec<f64>) = xs.into_iter().unzip();
        if let (Ok(r1), Ok(r2)) = (scc(&a, &b, 0.0, 0.0), scc(&b, &a, 0.0, 0.0)) {
            prop_assert!(r1.abs() <= 1.0);
            prop_assert_eq!(r1, r2);
        }
    }

    #[test]
    fn fits_enclose_and_are_tightest(
        pts in prop::collection::vec((0.0f64..std::f64::consts::TAU, 0.05f64..0.7), 2..25),
    ) {
        let pairs: Vec<[f64; 2]> = pts.iter().map(|&(t, rad)| [rad * t.cos(), rad * t.sin()]).collect();
        for v in [ModelVariant::Me, ModelVariant::Mp2] {
            let fit = ccc_fit(v, &pairs).unwrap();
            prop_assert!(encloses_2d(v, fit.r, &pairs));
            let wider = fit.r.abs() + 1e-4;
            if wider < 1.0 - 1e-6 {
                prop_assert!(!encloses_2d(v, wider, &pairs) && !encloses_2d(v, -wider, &pairs), "{} {}", v, fit.r);
            }
        }
    }
}
