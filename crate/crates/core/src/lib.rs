//! Non-probabilistic convex models for correlated interval variables.
//!
//! Builds multidimensional ellipsoid (ME) and parallelepiped (MP) uncertainty
//! domains from a handful of samples and their marginal intervals, assesses
//! them, draws uniform points from them and computes the non-probabilistic
//! reliability index of a limit state.
//!
//! ```
//! use ncm_core::{construct, CorrelationMethod, MarginalSpec, ModelVariant, PdPolicy, SampleSet};
//!
//! let spec = MarginalSpec::new(&[("a", -1.0, 1.0), ("b", -1.0, 1.0)]).unwrap();
//! let samples = SampleSet::from_rows(
//!     &["a", "b"],
//!     &[vec![0.5, 0.4], vec![-0.6, -0.3], vec![0.1, 0.2], vec![-0.2, 0.1]],
//! )
//! .unwrap();
//! let built = construct(&spec, &samples, ModelVariant::Me, CorrelationMethod::Scc, PdPolicy::Strict).unwrap();
//! let report = built.model.assess(&samples).unwrap();
//! assert_eq!(report.enclosed, 4);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod correlation;
pub mod domain;
pub mod error;
pub mod factorization;
pub mod linalg;
pub mod model;
pub mod reliability;
pub mod sampling;
pub mod svg;

pub use correlation::{
    assemble_correlation_matrix, ccc_fit, ensure_positive_definite, scc, CccFit, CorrelationMatrix, CorrelationMethod,
    ModelVariant, PdPolicy,
};
pub use domain::{deregularize, regularize, validate_samples, Interval, MarginalSpec, RegularizedSamples, SampleSet};
pub use error::{Error, Result};
pub use factorization::{CoreShapeMatrix, ShapeMatrix};
pub use model::{construct, AssessmentReport, Construction, ConvexModel, Membership, Norm, Warning};
pub use reliability::{reliability_index, LimitState, ReliabilityOptions, ReliabilityResult};
pub use sampling::{mc_volume, sample_uniform, verify_unbiasedness, UnbiasednessReport, Verdict};
