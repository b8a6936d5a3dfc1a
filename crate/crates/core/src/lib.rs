//! Triples (X, Y, Z) with identical symmetric beta marginals β_{k,k}
//! (k >= 1/2) realizing any prescribed valid 3x3 correlation matrix.
//!
//! The library decomposes the target matrix into extreme points of the
//! correlation-matrix set (rank-1 and rank-2 matrices of cosines), samples
//! each extreme point exactly through an ellipse parameterization, and
//! mixes the results. The [`gaussian`] module implements the classical
//! Gaussian-copula construction of the same marginals for comparison: its
//! attainable correlation matrices form a strictly smaller set, which
//! [`gaussian::gaussian_attainable`] certifies matrix by matrix.

pub mod corrmat;
pub mod decompose;
pub mod gaussian;
pub mod sampler;
pub mod stats;

pub use corrmat::{CorrelationMatrix3, ExtremePoint3, MatrixClass, RankOneSigns};
pub use decompose::{
    decompose, decompose_2d, decompose_with_tol, MixtureComponent, MixtureDecomposition,
};
pub use sampler::{
    pair_density, sample_2d, sample_extremal, sample_mixture, sample_radius, BetaParameter,
    EllipseParam, PairBatch, RngStream, SampleBatch,
};
pub use stats::{
    beta_cdf, estimate_correlation, ks_test, marginal_tests, mellin_oracle, verify_batch,
    CorrelationEstimate, KsResult, MarginalTestReport, VerifyReport,
};
