//! The Gaussian-copula route to uniform-marginal triples, for comparison
//! with the exact construction.
//!
//! Starting from a standard normal triple with correlation matrix R, the
//! coordinatewise map Φ produces uniform marginals, but the pairwise
//! correlations move: each entry r becomes
//!
//! ```text
//! r* = (6/π) asin(r/2) = 3 - (6/π) arccos(r/2)
//! ```
//!
//! The transfer shrinks the attainable set: a target matrix is reachable by
//! a Gaussian copula iff its entrywise preimage r = 2 sin(π r*/6) is itself
//! a valid correlation matrix, and e.g. the all-(-1/2) matrix fails this
//! test. The same transfer arises as Σ p_n rⁿ from the Hermite expansion of
//! the normalized map T(x) = 2√3(Φ(x) - 1/2), which this module exposes for
//! cross-validation.

use crate::corrmat::{CorrelationMatrix3, DEFAULT_TOL};
use crate::sampler::{BetaParameter, RngStream, SampleBatch};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use thiserror::Error;

/// Negative-determinant slack treated as zero when classifying preimages.
const ATTAIN_TOL: f64 = 1e-12;

/// Diagonal pivots below this are clamped to zero in the Choleski factor.
const PIVOT_TOL: f64 = 1e-12;

/// Errors from the Gaussian-copula operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaussianError {
    #[error("correlation {value} is outside [-1, 1]")]
    OutOfRange { value: f64 },
    #[error("matrix is not positive semidefinite: delta = {delta:e}")]
    InvalidMatrix { delta: f64 },
}

/// Correlation of one coordinate pair of a standard Gaussian vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct GaussianCorrelation(f64);

impl GaussianCorrelation {
    pub fn new(r: f64) -> Result<Self, GaussianError> {
        if !r.is_finite() || r.abs() > 1.0 {
            return Err(GaussianError::OutOfRange { value: r });
        }
        Ok(Self(r))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for GaussianCorrelation {
    type Error = GaussianError;

    fn try_from(r: f64) -> Result<Self, GaussianError> {
        Self::new(r)
    }
}

impl From<GaussianCorrelation> for f64 {
    fn from(r: GaussianCorrelation) -> f64 {
        r.0
    }
}

/// Standard normal CDF, absolute error below 1e-15.
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// The normalized uniform map T(x) = 2√3(Φ(x) - 1/2) = √3 erf(x/√2).
///
/// T(X) is uniform on (-√3, √3) with mean 0 and variance 1 for standard
/// normal X; the erf form is exactly odd in floating point.
pub fn t_map(x: f64) -> f64 {
    3f64.sqrt() * libm::erf(x * FRAC_1_SQRT_2)
}

/// Correlation of (T(X), T(Y)) for standard bivariate normals with
/// correlation `r`: the transfer r* = (6/π) asin(r/2), equal to
/// 3 - (6/π) arccos(r/2). The asin form is exactly odd and exact at 0; the
/// result is clamped into [-1,1] to absorb one-ulp excursions at r = ±1.
pub fn corr_transfer(r: GaussianCorrelation) -> f64 {
    (6.0 / PI * (r.get() / 2.0).asin()).clamp(-1.0, 1.0)
}

/// Inverse transfer r = 2 sin(π r*/6).
pub fn corr_transfer_inverse(r_star: f64) -> Result<GaussianCorrelation, GaussianError> {
    if !r_star.is_finite() || r_star.abs() > 1.0 {
        return Err(GaussianError::OutOfRange { value: r_star });
    }
    let r = 2.0 * (PI / 6.0 * r_star).sin();
    Ok(GaussianCorrelation(r.clamp(-1.0, 1.0)))
}

/// E(Φ(X)Φ(Y)) = 1/2 - arccos(r/2)/(2π) for correlation `r`.
pub fn phi_covariance(r: GaussianCorrelation) -> f64 {
    0.5 - (r.get() / 2.0).clamp(-1.0, 1.0).acos() / (2.0 * PI)
}

/// Squared Hermite coefficients of an L²(normal) map, as mass p_n on each
/// degree n >= 1 together with the coefficient signs.
///
/// For the T map, E(T(X)T(Y)) = Σ p_n rⁿ, so the p_n act as mixture
/// weights on monomial correlation transfers; their total approaches 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteCoefficients {
    probabilities: Vec<f64>,
    signs: Vec<f64>,
}

impl HermiteCoefficients {
    /// Coefficients from explicit per-degree masses (index 0 is degree 1).
    pub fn from_probabilities(probabilities: Vec<f64>, signs: Vec<f64>) -> Self {
        assert_eq!(probabilities.len(), signs.len());
        Self {
            probabilities,
            signs,
        }
    }

    /// Truncation order N.
    pub fn order(&self) -> usize {
        self.probabilities.len()
    }

    /// Mass p_n at degree n (1-based; 0 beyond the truncation).
    pub fn probability(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.probabilities.get(n - 1).copied().unwrap_or(0.0)
    }

    /// Sign ε_n of the degree-n coefficient.
    pub fn sign(&self, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        self.signs.get(n - 1).copied().unwrap_or(1.0)
    }

    /// Total retained mass Σ p_n.
    pub fn sum(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// Squared Hermite coefficients of the T map up to degree `n_max`:
/// p_{2n+1} = (3/π) (2n+1)! / (16ⁿ (n!)² (2n+1)²) with signs (-1)ⁿ, zero at
/// even degrees. Factorials go through log-Gamma to avoid overflow.
pub fn t_hermite_coefficients(n_max: usize) -> HermiteCoefficients {
    use statrs::function::gamma::ln_gamma;
    assert!(n_max >= 1, "truncation order must be at least 1");
    let log_3_pi = (3.0 / PI).ln();
    let mut probabilities = vec![0.0; n_max];
    let mut signs = vec![1.0; n_max];
    let mut m = 0usize;
    while 2 * m < n_max {
        let deg = (2 * m + 1) as f64;
        let log_p = log_3_pi + ln_gamma(deg + 1.0)
            - m as f64 * 16f64.ln()
            - 2.0 * ln_gamma(m as f64 + 1.0)
            - 2.0 * deg.ln();
        probabilities[2 * m] = log_p.exp();
        signs[2 * m] = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        m += 1;
    }
    HermiteCoefficients::from_probabilities(probabilities, signs)
}

/// Truncated transfer Σ p_n rⁿ evaluated by Horner's rule.
pub fn series_transfer(coeffs: &HermiteCoefficients, r: f64) -> f64 {
    let mut acc = 0.0;
    for n in (1..=coeffs.order()).rev() {
        acc = acc * r + coeffs.probability(n);
    }
    acc * r
}

/// Probabilists' Hermite polynomial H_n(x).
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = x;
    for deg in 1..n {
        let next = x * cur - deg as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Entrywise transfer of a valid matrix: the correlation matrix of the
/// Gaussian copula built on `m`.
pub fn gaussian_copula_matrix(m: &CorrelationMatrix3) -> Result<CorrelationMatrix3, GaussianError> {
    if !m.is_valid(DEFAULT_TOL) {
        return Err(GaussianError::InvalidMatrix { delta: m.delta() });
    }
    let map = |x: f64| corr_transfer(GaussianCorrelation(x));
    Ok(CorrelationMatrix3::new(map(m.p()), map(m.q()), map(m.r()))
        .expect("transfer preserves [-1,1]"))
}

/// Outcome of the attainability test for a target matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Attainability {
    /// The entrywise preimage is a valid correlation matrix realizing the
    /// target through a Gaussian copula.
    Attainable { preimage: CorrelationMatrix3 },
    /// The preimage fails positive semidefiniteness; its negative
    /// determinant is the witness.
    NotAttainable {
        preimage: CorrelationMatrix3,
        delta: f64,
    },
}

/// Tests whether `target` is the correlation matrix of some Gaussian copula
/// by inverting the transfer entrywise and checking the preimage.
pub fn gaussian_attainable(target: &CorrelationMatrix3) -> Result<Attainability, GaussianError> {
    if !target.is_valid(DEFAULT_TOL) {
        return Err(GaussianError::InvalidMatrix {
            delta: target.delta(),
        });
    }
    let inv = |x: f64| corr_transfer_inverse(x).expect("entry is in [-1,1]").get();
    let preimage = CorrelationMatrix3::new(inv(target.p()), inv(target.q()), inv(target.r()))
        .expect("inverse transfer preserves [-1,1]");
    let delta = preimage.delta();
    if preimage.is_valid(ATTAIN_TOL) {
        Ok(Attainability::Attainable { preimage })
    } else {
        Ok(Attainability::NotAttainable { preimage, delta })
    }
}

/// Choleski factorization with diagonal pivoting for positive semidefinite
/// input: P m Pᵀ = L Lᵀ. Returns (L, perm) with `perm[i]` the original index
/// of pivoted row i. Rank-deficient trailing blocks are clamped to zero, so
/// singular (extremal) matrices factor cleanly.
pub fn semidefinite_cholesky(m: &CorrelationMatrix3) -> ([[f64; 3]; 3], [usize; 3]) {
    let mut a = m.full_matrix();
    let mut perm = [0usize, 1, 2];
    let mut l = [[0.0f64; 3]; 3];
    for j in 0..3 {
        let mut piv = j;
        for t in (j + 1)..3 {
            if a[t][t] > a[piv][piv] {
                piv = t;
            }
        }
        if piv != j {
            perm.swap(j, piv);
            a.swap(j, piv);
            for row in a.iter_mut() {
                row.swap(j, piv);
            }
            l.swap(j, piv);
        }
        let d = a[j][j];
        if d <= PIVOT_TOL {
            // The pivot is the largest remaining diagonal entry, so the
            // whole trailing block is numerically zero.
            break;
        }
        let root = d.sqrt();
        l[j][j] = root;
        for i in (j + 1)..3 {
            l[i][j] = a[i][j] / root;
        }
        for i in (j + 1)..3 {
            for t in (j + 1)..=i {
                a[i][t] -= l[i][j] * l[t][j];
                a[t][i] = a[i][t];
            }
        }
    }
    (l, perm)
}

/// Samples `n` triples from the Gaussian copula on `m`: correlated normals
/// through the pivoted Choleski factor, then Φ coordinatewise.
///
/// Marginals are uniform(0,1) (β_{1,1}); the batch target records the
/// induced matrix [`gaussian_copula_matrix`]`(m)`, which is what the sample
/// correlations converge to.
pub fn sample_gaussian_copula(
    m: &CorrelationMatrix3,
    n: usize,
    rng: &mut RngStream,
) -> Result<SampleBatch, GaussianError> {
    let induced = gaussian_copula_matrix(m)?;
    let (l, perm) = semidefinite_cholesky(m);
    let uniform = BetaParameter::new(1.0).expect("1 >= 1/2");
    let mut batch = SampleBatch::with_capacity(n, uniform, induced, rng.seed());
    for _ in 0..n {
        let z = [
            rng.standard_normal(),
            rng.standard_normal(),
            rng.standard_normal(),
        ];
        let mut u = [0.0f64; 3];
        for i in 0..3 {
            let mut w = 0.0;
            for t in 0..=i {
                w += l[i][t] * z[t];
            }
            u[perm[i]] = phi(w);
        }
        batch.push(u[0], u[1], u[2]);
    }
    Ok(batch)
}
