//! Decomposition of a valid 3x3 correlation matrix into extreme points.
//!
//! The map (a,b,c) -> R(a,b,c) is affine in each cosine separately, so any
//! valid matrix splits along one coordinate axis into at most two extremal
//! matrices: holding (p, q) fixed, Delta(p,q,r) is a downward parabola in r
//! with roots r+- = pq +- sqrt((1-p^2)(1-q^2)), both in [-1, 1] since
//! r+- = cos(arccos p -+ arccos q). Any r between them is the convex
//! combination with weight lambda = (r - r-)/(r+ - r-) on r+.

use crate::corrmat::{CorrMatError, CorrelationMatrix3, ExtremePoint3, DEFAULT_TOL, INTERNAL_TOL};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from the mixture construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecomposeError {
    #[error(
        "matrix is not positive semidefinite: delta = {delta:e}, min eigen-criterion {criterion:e}"
    )]
    InvalidMatrix { delta: f64, criterion: f64 },
    #[error(
        "no split axis available: two coordinates are pinned to +-1 while delta = {delta:e} > 0"
    )]
    DegenerateAxis { delta: f64 },
    #[error("correlation {value} is outside [-1, 1]")]
    OutOfRange { value: f64 },
    #[error(transparent)]
    Angles(#[from] CorrMatError),
}

/// One extreme point with its mixture weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub angles: ExtremePoint3,
}

/// A convex combination of at most two extreme points reproducing `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureDecomposition {
    pub target: CorrelationMatrix3,
    pub components: Vec<MixtureComponent>,
}

impl MixtureDecomposition {
    /// Sum of the component weights (should be 1).
    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// The weighted sum of the component matrices, as an entry triple.
    pub fn reconstruct(&self) -> (f64, f64, f64) {
        let mut acc = (0.0, 0.0, 0.0);
        for comp in &self.components {
            let m = comp.angles.matrix();
            acc.0 += comp.weight * m.p();
            acc.1 += comp.weight * m.q();
            acc.2 += comp.weight * m.r();
        }
        acc
    }
}

/// Which coordinate is split; the other two are held fixed.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    P,
    Q,
    R,
}

impl Axis {
    /// (held, held, split) view of the entry triple.
    fn split_view(self, m: &CorrelationMatrix3) -> (f64, f64, f64) {
        match self {
            Axis::R => (m.p(), m.q(), m.r()),
            Axis::Q => (m.p(), m.r(), m.q()),
            Axis::P => (m.q(), m.r(), m.p()),
        }
    }

    /// Rebuilds the entry triple with the split coordinate replaced by `w`.
    fn assemble(self, m: &CorrelationMatrix3, w: f64) -> CorrelationMatrix3 {
        let w = w.clamp(-1.0, 1.0);
        match self {
            Axis::R => CorrelationMatrix3::new_unchecked(m.p(), m.q(), w),
            Axis::Q => CorrelationMatrix3::new_unchecked(m.p(), w, m.r()),
            Axis::P => CorrelationMatrix3::new_unchecked(w, m.q(), m.r()),
        }
    }
}

/// Decomposes `m` with the default user-input tolerance.
pub fn decompose(m: &CorrelationMatrix3) -> Result<MixtureDecomposition, DecomposeError> {
    decompose_with_tol(m, DEFAULT_TOL)
}

/// Decomposes `m` into one extremal point (if `delta` is within 1e-12 of the
/// boundary) or a two-point mixture along the axis whose held coordinates are
/// farthest from +-1 (the r axis by default).
pub fn decompose_with_tol(
    m: &CorrelationMatrix3,
    tol: f64,
) -> Result<MixtureDecomposition, DecomposeError> {
    let delta = m.delta();
    if delta < -tol {
        let criterion = (1.0 - m.p() * m.p())
            .min(1.0 - m.q() * m.q())
            .min(1.0 - m.r() * m.r())
            .min(delta);
        return Err(DecomposeError::InvalidMatrix { delta, criterion });
    }

    // Spread of the parabola along each candidate axis: (1-u^2)(1-v^2) for
    // the held pair (u, v). Zero spread means no room to split there.
    let spread = |axis: Axis| {
        let (u, v, _) = axis.split_view(m);
        (1.0 - u * u) * (1.0 - v * v)
    };
    let mut axis = Axis::R;
    if spread(axis) < INTERNAL_TOL {
        for alt in [Axis::Q, Axis::P] {
            if spread(alt) > spread(axis) {
                axis = alt;
            }
        }
    }

    let (u, v, w) = axis.split_view(m);
    let s2 = (1.0 - u * u) * (1.0 - v * v);
    if s2 <= 0.0 {
        // All axes degenerate: every entry is +-1, so delta <= 0 for any
        // sign-consistent matrix. A positive delta here is unreachable for
        // inputs that passed validation, but reject it defensively.
        if delta > INTERNAL_TOL {
            return Err(DecomposeError::DegenerateAxis { delta });
        }
        let angles = m.to_angles(tol.max(INTERNAL_TOL))?;
        return Ok(MixtureDecomposition {
            target: *m,
            components: vec![MixtureComponent {
                weight: 1.0,
                angles,
            }],
        });
    }

    let s = s2.sqrt();
    let w_plus = (u * v + s).clamp(-1.0, 1.0);
    let w_minus = (u * v - s).clamp(-1.0, 1.0);

    if delta <= INTERNAL_TOL {
        // Already on the boundary: snap the split coordinate to the nearer
        // root so the angle conversion sees an exactly extremal matrix.
        let w_proj = if (w - w_plus).abs() <= (w - w_minus).abs() {
            w_plus
        } else {
            w_minus
        };
        let angles = axis.assemble(m, w_proj).to_angles(INTERNAL_TOL.max(tol))?;
        return Ok(MixtureDecomposition {
            target: *m,
            components: vec![MixtureComponent {
                weight: 1.0,
                angles,
            }],
        });
    }

    let lambda = ((w - w_minus) / (w_plus - w_minus)).clamp(0.0, 1.0);
    let plus = axis.assemble(m, w_plus).to_angles(INTERNAL_TOL)?;
    let minus = axis.assemble(m, w_minus).to_angles(INTERNAL_TOL)?;
    Ok(MixtureDecomposition {
        target: *m,
        components: vec![
            MixtureComponent {
                weight: lambda,
                angles: plus,
            },
            MixtureComponent {
                weight: 1.0 - lambda,
                angles: minus,
            },
        ],
    })
}

/// Two-point decomposition of a 2x2 correlation: r = w * 1 + (1 - w) * (-1)
/// with w = (1 + r)/2 on the comonotone point.
pub fn decompose_2d(r: f64) -> Result<(f64, f64), DecomposeError> {
    if !r.is_finite() || r.abs() > 1.0 {
        return Err(DecomposeError::OutOfRange { value: r });
    }
    Ok(((1.0 + r) / 2.0, (1.0 - r) / 2.0))
}
