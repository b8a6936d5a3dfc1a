//! Exact samplers for triples with symmetric beta marginals.
//!
//! An extremal correlation matrix R(a,b,c) of rank 2 is realized by the law
//! of
//!
//! ```text
//! x = R sin(Θ + c/2),  y = R sin(Θ - c/2),  z = -R cos(Θ - τ)
//! ```
//!
//! with Θ uniform on [0,2π) and R from the radial law
//! (2k-1)(1-r²)^(k-3/2) r dr on (0,1] (the atom R = 1 for k = 1/2). The
//! phase τ is fixed by requiring x sin a + y sin b + z sin c = 0 for every
//! Θ, which also pins all pairwise correlations to (cos a, cos b, cos c).
//! Each coordinate is R sin(angle) in law, and R sinΘ has the centered
//! symmetric beta law ν_k on (-1,1); the affine map t ↦ (t+1)/2 turns the
//! marginals into β_{k,k} on (0,1). Rank-1 matrices (ε_i ε_j) are realized
//! by (ε₁T, ε₂T, ε₃T) with T ~ ν_k, and any valid matrix by mixing extremal
//! samplers with the weights of its decomposition.

pub mod batch;
pub mod rng;

pub use batch::{
    read_xyz_csv, sidecar_path, BatchError, BatchMetadata, PairBatch, PairMetadata, SampleBatch,
};
pub use rng::RngStream;

use crate::corrmat::{ExtremePoint3, RankOneSigns, INTERNAL_TOL};
use crate::decompose::MixtureDecomposition;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Smallest admissible shape parameter (the arcsine case).
pub const MIN_SHAPE: f64 = 0.5;

/// Sines below this threshold are treated as zero when picking coordinates.
const SIN_EPS: f64 = INTERNAL_TOL;

/// Errors from sampler construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("shape parameter k = {k} is not a real number >= 1/2")]
    InvalidK { k: f64 },
    #[error("sin c = {sin_c:e} vanishes; permute coordinates first")]
    DegenerateC { sin_c: f64 },
    #[error("all three sines vanish: rank-one points have no ellipse")]
    RankOne,
    #[error("correlation {value} is outside [-1, 1]")]
    OutOfRange { value: f64 },
    #[error("the pair density is singular at k = 1/2 (mass concentrates on the ellipse boundary)")]
    UnsupportedK,
}

/// Shape parameter k >= 1/2 of the symmetric beta law β_{k,k}.
///
/// k = 1 is the uniform law, k = 1/2 the arcsine law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct BetaParameter(f64);

impl BetaParameter {
    pub fn new(k: f64) -> Result<Self, SamplerError> {
        if !k.is_finite() || k < MIN_SHAPE {
            return Err(SamplerError::InvalidK { k });
        }
        Ok(Self(k))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// True for the degenerate k = 1/2 case (radial law is the atom at 1).
    pub fn is_arcsine(self) -> bool {
        self.0 == MIN_SHAPE
    }
}

impl TryFrom<f64> for BetaParameter {
    type Error = SamplerError;

    fn try_from(k: f64) -> Result<Self, SamplerError> {
        Self::new(k)
    }
}

impl From<BetaParameter> for f64 {
    fn from(k: BetaParameter) -> f64 {
        k.0
    }
}

/// Precomputed phases of the ellipse parameterization for a rank-2 point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseParam {
    a: f64,
    b: f64,
    c: f64,
    c_half: f64,
    tau: f64,
}

impl EllipseParam {
    /// Derives the phases for `e`, which must have |sin c| bounded away from
    /// zero (apply [`permute_for_sampling`] first if it is not).
    pub fn new(e: &ExtremePoint3) -> Result<Self, SamplerError> {
        let (sin_a, sin_b, sin_c) = e.sines();
        if sin_c.abs() < SIN_EPS {
            return Err(SamplerError::DegenerateC { sin_c });
        }
        let c_half = e.c() / 2.0;
        // Matching the sinΘ and cosΘ coefficients of
        // x sin a + y sin b + z sin c = 0 fixes the z phase:
        //   sin τ * sin c = (sin a + sin b) cos(c/2)
        //   cos τ * sin c = (sin a - sin b) sin(c/2)
        // The two right-hand sides normalized by sin c lie on the unit
        // circle whenever a + b + c = 0 mod 2π.
        let sin_tau = (sin_a + sin_b) / sin_c * c_half.cos();
        let cos_tau = (sin_a - sin_b) / sin_c * c_half.sin();
        Ok(Self {
            a: e.a(),
            b: e.b(),
            c: e.c(),
            c_half,
            tau: sin_tau.atan2(cos_tau),
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn c_half(&self) -> f64 {
        self.c_half
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// One centered draw (x, y, z) on the ellipse through (theta, radius).
    #[inline]
    pub fn point(&self, theta: f64, radius: f64) -> [f64; 3] {
        [
            radius * (theta + self.c_half).sin(),
            radius * (theta - self.c_half).sin(),
            -radius * (theta - self.tau).cos(),
        ]
    }
}

/// Permutes the coordinates of a rank-2 point so that |sin c| is maximal.
///
/// Returns the permuted triple and the permutation `perm`, with `perm[i]`
/// the original index of the angle now in slot `i`; a sampler output `v`
/// for the permuted triple maps back via `out[perm[i]] = v[i]`. If |sin c|
/// already attains the maximum the identity is returned; otherwise the
/// largest sine (smallest index on ties) is swapped into slot c.
pub fn permute_for_sampling(
    e: &ExtremePoint3,
) -> Result<(ExtremePoint3, [usize; 3]), SamplerError> {
    let (sin_a, sin_b, sin_c) = e.sines();
    let sines = [sin_a.abs(), sin_b.abs(), sin_c.abs()];
    let mut best = 0;
    for j in 1..3 {
        if sines[j] > sines[best] {
            best = j;
        }
    }
    if sines[best] < SIN_EPS {
        return Err(SamplerError::RankOne);
    }
    if sines[2] >= sines[best] {
        return Ok((*e, [0, 1, 2]));
    }
    let perm = if best == 0 { [2, 1, 0] } else { [0, 2, 1] };
    let angles = [e.a(), e.b(), e.c()];
    let permuted = ExtremePoint3::new(angles[perm[0]], angles[perm[1]], angles[perm[2]])
        .expect("angle sum is permutation invariant");
    Ok((permuted, perm))
}

/// Quantile of the radial law F(r) = 1 - (1-r²)^(k-1/2) at probability `u`.
pub fn radius_quantile(k: BetaParameter, u: f64) -> f64 {
    if k.is_arcsine() {
        return 1.0;
    }
    (1.0 - u.powf(2.0 / (2.0 * k.get() - 1.0))).sqrt()
}

/// Draws the radius R in (0,1]: exactly 1 for k = 1/2, otherwise by CDF
/// inversion R = sqrt(1 - U^(2/(2k-1))).
pub fn sample_radius(k: BetaParameter, rng: &mut RngStream) -> f64 {
    if k.is_arcsine() {
        return 1.0;
    }
    radius_quantile(k, rng.uniform())
}

/// One draw of T ~ ν_k (centered symmetric beta on (-1,1)) as R sinΘ.
fn draw_nu(k: BetaParameter, rng: &mut RngStream) -> f64 {
    let theta = rng.angle();
    sample_radius(k, rng) * theta.sin()
}

/// A component sampler with its permutation bookkeeping resolved.
#[derive(Debug, Clone, Copy)]
enum Prepared {
    RankOne {
        signs: (f64, f64, f64),
    },
    Ellipse {
        param: EllipseParam,
        perm: [usize; 3],
    },
}

fn prepare(e: &ExtremePoint3) -> Result<Prepared, SamplerError> {
    if e.rank() == 1 {
        let signs = RankOneSigns::from_angles(e)
            .expect("rank was checked")
            .signs();
        return Ok(Prepared::RankOne { signs });
    }
    let (permuted, perm) = permute_for_sampling(e)?;
    Ok(Prepared::Ellipse {
        param: EllipseParam::new(&permuted)?,
        perm,
    })
}

/// One centered draw in [-1,1]^3. Consumes exactly two uniforms.
fn draw_centered(prep: &Prepared, k: BetaParameter, rng: &mut RngStream) -> [f64; 3] {
    let theta = rng.angle();
    let radius = sample_radius(k, rng);
    match prep {
        Prepared::RankOne { signs } => {
            let t = radius * theta.sin();
            [signs.0 * t, signs.1 * t, signs.2 * t]
        }
        Prepared::Ellipse { param, perm } => {
            let v = param.point(theta, radius);
            let mut out = [0.0; 3];
            for i in 0..3 {
                out[perm[i]] = v[i];
            }
            out
        }
    }
}

/// Samples `n` triples from the extremal law of `e`, mapped to (0,1)^3.
///
/// Marginals are β_{k,k}; the sample correlation matrix converges to the
/// matrix of `e`.
pub fn sample_extremal(
    e: &ExtremePoint3,
    k: BetaParameter,
    n: usize,
    rng: &mut RngStream,
) -> Result<SampleBatch, SamplerError> {
    let prep = prepare(e)?;
    let mut batch = SampleBatch::with_capacity(n, k, e.matrix(), rng.seed());
    for _ in 0..n {
        let v = draw_centered(&prep, k, rng);
        batch.push(nu_to_unit(v[0]), nu_to_unit(v[1]), nu_to_unit(v[2]));
    }
    Ok(batch)
}

/// Samples `n` triples from a mixture of extremal laws: each draw first
/// selects a component by its weight, then emits one extremal draw.
///
/// A single-component decomposition consumes the stream exactly like
/// [`sample_extremal`] and reproduces it draw for draw.
pub fn sample_mixture(
    d: &MixtureDecomposition,
    k: BetaParameter,
    n: usize,
    rng: &mut RngStream,
) -> Result<SampleBatch, SamplerError> {
    let preps = d
        .components
        .iter()
        .map(|comp| Ok((comp.weight, prepare(&comp.angles)?)))
        .collect::<Result<Vec<_>, SamplerError>>()?;
    let mut batch = SampleBatch::with_capacity(n, k, d.target, rng.seed());
    for _ in 0..n {
        let prep = if preps.len() == 1 {
            &preps[0].1
        } else {
            let u = rng.uniform();
            let mut acc = 0.0;
            let mut chosen = &preps[preps.len() - 1].1;
            for (weight, prep) in &preps {
                acc += weight;
                if u < acc {
                    chosen = prep;
                    break;
                }
            }
            chosen
        };
        let v = draw_centered(prep, k, rng);
        batch.push(nu_to_unit(v[0]), nu_to_unit(v[1]), nu_to_unit(v[2]));
    }
    Ok(batch)
}

/// Samples `n` pairs with β_{k,k} marginals and correlation `r` by mixing
/// the comonotone pair (T,T) with weight (1+r)/2 and the antimonotone pair
/// (T,-T); the component is selected before T is drawn.
pub fn sample_2d(
    r: f64,
    k: BetaParameter,
    n: usize,
    rng: &mut RngStream,
) -> Result<PairBatch, SamplerError> {
    if !r.is_finite() || r.abs() > 1.0 {
        return Err(SamplerError::OutOfRange { value: r });
    }
    let w_plus = (1.0 + r) / 2.0;
    let mut batch = PairBatch {
        xs: Vec::with_capacity(n),
        ys: Vec::with_capacity(n),
        k,
        r,
        seed: rng.seed(),
    };
    for _ in 0..n {
        let comonotone = rng.uniform() < w_plus;
        let t = draw_nu(k, rng);
        let y = if comonotone { t } else { -t };
        batch.xs.push(nu_to_unit(t));
        batch.ys.push(nu_to_unit(y));
    }
    Ok(batch)
}

/// Affine map (-1,1) -> (0,1) taking ν_k to β_{k,k}.
pub fn nu_to_unit(t: f64) -> f64 {
    (t + 1.0) / 2.0
}

/// Inverse of [`nu_to_unit`]: (0,1) -> (-1,1).
pub fn unit_to_nu(x: f64) -> f64 {
    2.0 * x - 1.0
}

/// Joint density at (x, y) of a coordinate pair whose correlation is cos c,
/// supported on the filled ellipse {Δ(x,y,cos c) > 0}:
///
/// ```text
/// (2k-1)/(2π) · |sin c|^(2-2k) · Δ(x,y,cos c)^(k-3/2)
/// ```
///
/// The |sin c| exponent is forced by the change of variables
/// (x,y) = (r sin(θ+c/2), r sin(θ-c/2)), which has Jacobian r|sin c| and
/// maps Δ to (1-r²)sin²c; integrating the radial law then normalizes the
/// density to total mass 1 (checked by quadrature in the test suite).
pub fn pair_density(x: f64, y: f64, cos_c: f64, k: BetaParameter) -> Result<f64, SamplerError> {
    if k.is_arcsine() {
        return Err(SamplerError::UnsupportedK);
    }
    if !cos_c.is_finite() || cos_c.abs() > 1.0 {
        return Err(SamplerError::OutOfRange { value: cos_c });
    }
    let sin2 = (1.0 - cos_c) * (1.0 + cos_c);
    if sin2 <= 0.0 {
        return Err(SamplerError::DegenerateC { sin_c: 0.0 });
    }
    let delta = 1.0 - x * x - y * y - cos_c * cos_c + 2.0 * x * y * cos_c;
    if delta <= 0.0 {
        return Ok(0.0);
    }
    let kf = k.get();
    Ok((2.0 * kf - 1.0) / (2.0 * PI) * sin2.sqrt().powf(2.0 - 2.0 * kf) * delta.powf(kf - 1.5))
}
