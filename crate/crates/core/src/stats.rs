//! Verification harness: empirical correlations with error bars, marginal
//! goodness-of-fit against β_{k,k}, and exact moment oracles.
//!
//! The centered marginal T of every sampler coordinate satisfies
//! E|T|^s = (1/√π) Γ(k+1/2) Γ((s+1)/2) / Γ(k+(s+1)/2), which gives an exact
//! oracle for the empirical absolute moments; the distributional shape is
//! tested by one-sample Kolmogorov–Smirnov against the regularized
//! incomplete beta CDF.

use crate::corrmat::CorrelationMatrix3;
use crate::sampler::{unit_to_nu, BetaParameter, SampleBatch};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Monte Carlo acceptance threshold, in standard errors. Two-sided tail
/// mass ≈ 5e-4 per test keeps the full suite's false-failure rate low.
pub const SIGMA_GATE: f64 = 3.5;

/// Asymptotic 1% critical constant for the Kolmogorov–Smirnov statistic.
pub const KS_CRITICAL_1PCT: f64 = 1.628;

/// Mellin moment orders checked by [`marginal_tests`].
pub const MELLIN_ORDERS: [f64; 4] = [1.0, 2.0, 3.0, 4.0];

/// Errors from the verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("need at least {min} samples, got {n}")]
    TooFewSamples { n: usize, min: usize },
    #[error("sample value {value} is outside [0, 1]")]
    OutOfRange { value: f64 },
}

/// Sample Pearson correlations of the three coordinate pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub matrix: CorrelationMatrix3,
    pub n: usize,
    /// Standard errors (1 - ρ̂²)/√n in (p, q, r) order.
    pub stderr: [f64; 3],
}

/// Pearson correlation of two equal-length samples, clamped into [-1, 1].
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
    for i in 0..a.len() {
        let da = a[i] - mean_a;
        let db = b[i] - mean_b;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

/// Estimates the correlation matrix of a batch with per-entry standard
/// errors (1 - ρ̂²)/√n.
pub fn estimate_correlation(batch: &SampleBatch) -> Result<CorrelationEstimate, StatsError> {
    let n = batch.n();
    if n < 3 {
        return Err(StatsError::TooFewSamples { n, min: 3 });
    }
    let p = pearson(&batch.ys, &batch.zs);
    let q = pearson(&batch.xs, &batch.zs);
    let r = pearson(&batch.xs, &batch.ys);
    let se = |rho: f64| (1.0 - rho * rho) / (n as f64).sqrt();
    Ok(CorrelationEstimate {
        matrix: CorrelationMatrix3::new(p, q, r).expect("pearson output is clamped"),
        n,
        stderr: [se(p), se(q), se(r)],
    })
}

/// CDF of β_{k,k}: the regularized incomplete beta I_x(k,k), evaluated with
/// the symmetry reduction I_x = 1 - I_{1-x} for x > 1/2 so that
/// beta_cdf(x) + beta_cdf(1-x) = 1 holds exactly.
pub fn beta_cdf(x: f64, k: BetaParameter) -> Result<f64, StatsError> {
    if !x.is_finite() || !(0.0..=1.0).contains(&x) {
        return Err(StatsError::OutOfRange { value: x });
    }
    let kf = k.get();
    if x > 0.5 {
        Ok(1.0 - statrs::function::beta::beta_reg(kf, kf, 1.0 - x))
    } else {
        Ok(statrs::function::beta::beta_reg(kf, kf, x))
    }
}

/// One-sample Kolmogorov–Smirnov outcome at the 1% level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub critical: f64,
    pub pass: bool,
}

/// Kolmogorov–Smirnov test of `samples` against β_{k,k}; passes iff the
/// statistic stays below the asymptotic 1% critical value 1.628/√n.
pub fn ks_test(samples: &[f64], k: BetaParameter) -> Result<KsResult, StatsError> {
    let n = samples.len();
    if n < 100 {
        return Err(StatsError::TooFewSamples { n, min: 100 });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("samples must not be NaN"));
    let nf = n as f64;
    let mut statistic: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = beta_cdf(x, k)?;
        statistic = statistic
            .max(f - i as f64 / nf)
            .max((i + 1) as f64 / nf - f);
    }
    let critical = KS_CRITICAL_1PCT / nf.sqrt();
    Ok(KsResult {
        statistic,
        critical,
        pass: statistic <= critical,
    })
}

/// Exact absolute moment E|T|^s of the centered marginal:
/// (1/√π) Γ(k+1/2) Γ((s+1)/2) / Γ(k+(s+1)/2), for s > 0.
pub fn mellin_oracle(s: f64, k: BetaParameter) -> f64 {
    use statrs::function::gamma::ln_gamma;
    debug_assert!(s > 0.0);
    let kf = k.get();
    let half = (s + 1.0) / 2.0;
    (ln_gamma(kf + 0.5) + ln_gamma(half) - ln_gamma(kf + half) - std::f64::consts::PI.ln() / 2.0)
        .exp()
}

/// One empirical-vs-exact moment comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinCheck {
    pub s: f64,
    pub expected: f64,
    pub observed: f64,
    pub stderr: f64,
    pub pass: bool,
}

/// Marginal test results for one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateReport {
    pub coordinate: String,
    pub ks: KsResult,
    pub mellin: Vec<MellinCheck>,
    pub pass: bool,
}

/// Marginal test results for all three coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalTestReport {
    pub coordinates: Vec<CoordinateReport>,
    pub pass: bool,
}

fn coordinate_report(
    name: &str,
    samples: &[f64],
    k: BetaParameter,
) -> Result<CoordinateReport, StatsError> {
    let ks = ks_test(samples, k)?;
    let n = samples.len() as f64;
    // One pass accumulates |t|^s and |t|^(2s) for s = 1..4 by multiplication.
    let mut sums = [0.0f64; 4];
    let mut sqs = [0.0f64; 4];
    for &x in samples {
        let a = unit_to_nu(x).abs();
        let a2 = a * a;
        let a3 = a2 * a;
        let a4 = a2 * a2;
        sums[0] += a;
        sums[1] += a2;
        sums[2] += a3;
        sums[3] += a4;
        sqs[0] += a2;
        sqs[1] += a4;
        sqs[2] += a3 * a3;
        sqs[3] += a4 * a4;
    }
    let mut mellin = Vec::with_capacity(MELLIN_ORDERS.len());
    let mut pass = ks.pass;
    for (i, s) in MELLIN_ORDERS.into_iter().enumerate() {
        let expected = mellin_oracle(s, k);
        let m1 = sums[i] / n;
        let m2 = sqs[i] / n;
        let stderr = ((m2 - m1 * m1).max(0.0) / n).sqrt();
        // Empirical moments carry 4 standard errors of slack.
        let ok = (m1 - expected).abs() <= 4.0 * stderr;
        pass &= ok;
        mellin.push(MellinCheck {
            s,
            expected,
            observed: m1,
            stderr,
            pass: ok,
        });
    }
    Ok(CoordinateReport {
        coordinate: name.to_string(),
        ks,
        mellin,
        pass,
    })
}

/// Runs KS and Mellin-moment tests on every coordinate of a batch.
pub fn marginal_tests(batch: &SampleBatch) -> Result<MarginalTestReport, StatsError> {
    let coordinates = vec![
        coordinate_report("x", &batch.xs, batch.k)?,
        coordinate_report("y", &batch.ys, batch.k)?,
        coordinate_report("z", &batch.zs, batch.k)?,
    ];
    let pass = coordinates.iter().all(|c| c.pass);
    Ok(MarginalTestReport { coordinates, pass })
}

/// Combined verification payload: correlations against the batch target
/// plus marginal tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub target: CorrelationMatrix3,
    pub estimate: CorrelationEstimate,
    /// |ρ̂ - target| per entry in (p, q, r) order.
    pub deltas: [f64; 3],
    pub correlation_pass: bool,
    pub marginals: MarginalTestReport,
    pub pass: bool,
}

/// Verifies a batch against its recorded target matrix and shape k.
pub fn verify_batch(batch: &SampleBatch) -> Result<VerifyReport, StatsError> {
    let estimate = estimate_correlation(batch)?;
    let target = batch.target;
    let deltas = [
        (estimate.matrix.p() - target.p()).abs(),
        (estimate.matrix.q() - target.q()).abs(),
        (estimate.matrix.r() - target.r()).abs(),
    ];
    // Degenerate (comonotone) entries have zero standard error; leave room
    // for floating-point noise with an absolute floor.
    let correlation_pass = deltas
        .iter()
        .zip(estimate.stderr.iter())
        .all(|(d, se)| *d <= (SIGMA_GATE * se).max(1e-9));
    let marginals = marginal_tests(batch)?;
    let pass = correlation_pass && marginals.pass;
    Ok(VerifyReport {
        target,
        estimate,
        deltas,
        correlation_pass,
        marginals,
        pass,
    })
}
