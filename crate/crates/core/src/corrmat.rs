//! Correlation-matrix domain types for the 3x3 case.
//!
//! A symmetric unit-diagonal matrix is stored as its off-diagonal triple
//! (p, q, r):
//!
//! ```text
//!     | 1  r  q |
//! R = | r  1  p |
//!     | q  p  1 |
//! ```
//!
//! R is positive semidefinite iff 1-p^2, 1-q^2, 1-r^2 and the determinant
//! Delta(p,q,r) = 1 - p^2 - q^2 - r^2 + 2pqr are all nonnegative. The extreme
//! points of the set of such matrices have rank 1 or 2 and can be written as
//! (cos(alpha_i - alpha_j)); with a, b, c the pairwise angle differences
//! (a + b + c = 0 mod 2pi) the matrix becomes R(a,b,c) with p = cos a,
//! q = cos b, r = cos c, and Delta(cos a, cos b, cos c) = 0.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Default tolerance for validity/classification of user-supplied matrices.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance for internally constructed values (roots of Delta, angle sums).
pub const INTERNAL_TOL: f64 = 1e-12;

/// Residual below which the two-argument-arccos sign choice is accepted.
///
/// Exactly extremal inputs reproduce r to machine precision; inputs carrying
/// estimation noise land in the 1e-9..1e-8 range for generic angles.
const SIGN_TOL: f64 = 1e-8;

/// Errors from correlation-matrix construction and angle conversion.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrMatError {
    #[error("correlation entry {name} = {value} is outside [-1, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("correlation entry {name} = {value} is not finite")]
    NotFinite { name: &'static str, value: f64 },
    #[error("matrix is not extremal: delta = {delta:e}")]
    NotExtremal { delta: f64 },
    #[error(
        "neither sign of arccos(q) reproduces r (best residual {residual:e}); input too noisy"
    )]
    NoConsistentSign { residual: f64 },
    #[error("angles do not sum to 0 mod 2pi: residual {residual:e}")]
    AngleSumInvalid { residual: f64 },
    #[error("matrix is not of rank one")]
    NotRankOne,
}

/// Classification of a 3x3 correlation matrix within its convex set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixClass {
    /// Delta > tol: positive definite, an inner point.
    Interior,
    /// Delta <= tol but not rank one: an extreme point of rank 2.
    ExtremeRank2,
    /// All entries are +-1 with consistent signs: one of the four rank-1 points.
    ExtremeRank1,
    /// Fails the semidefiniteness criterion.
    Invalid,
}

/// Off-diagonal triple (p, q, r) of a symmetric unit-diagonal 3x3 matrix.
///
/// p is the (2,3) entry, q the (1,3) entry, r the (1,2) entry. Each field is
/// confined to [-1, 1]; membership in the correlation-matrix set additionally
/// requires `delta() >= 0` and is checked by [`is_valid`](Self::is_valid).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct CorrelationMatrix3 {
    p: f64,
    q: f64,
    r: f64,
}

#[derive(Deserialize)]
struct RawMatrix {
    p: f64,
    q: f64,
    r: f64,
}

impl TryFrom<RawMatrix> for CorrelationMatrix3 {
    type Error = CorrMatError;

    fn try_from(raw: RawMatrix) -> Result<Self, CorrMatError> {
        CorrelationMatrix3::new(raw.p, raw.q, raw.r)
    }
}

impl CorrelationMatrix3 {
    /// Builds the triple, rejecting non-finite entries and entries outside [-1, 1].
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self, CorrMatError> {
        for (name, value) in [("p", p), ("q", q), ("r", r)] {
            if !value.is_finite() {
                return Err(CorrMatError::NotFinite { name, value });
            }
            if value.abs() > 1.0 {
                return Err(CorrMatError::OutOfRange { name, value });
            }
        }
        Ok(Self { p, q, r })
    }

    /// Internal constructor for values already known to lie in [-1, 1].
    pub(crate) fn new_unchecked(p: f64, q: f64, r: f64) -> Self {
        debug_assert!(p.abs() <= 1.0 && q.abs() <= 1.0 && r.abs() <= 1.0);
        Self { p, q, r }
    }

    /// Correlation of the second and third coordinates (matrix entry (2,3)).
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Correlation of the first and third coordinates (matrix entry (1,3)).
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Correlation of the first and second coordinates (matrix entry (1,2)).
    pub fn r(&self) -> f64 {
        self.r
    }

    /// The full 3x3 matrix, row-major.
    pub fn full_matrix(&self) -> [[f64; 3]; 3] {
        [
            [1.0, self.r, self.q],
            [self.r, 1.0, self.p],
            [self.q, self.p, 1.0],
        ]
    }

    /// Determinant: 1 - p^2 - q^2 - r^2 + 2pqr.
    pub fn delta(&self) -> f64 {
        let (p, q, r) = (self.p, self.q, self.r);
        1.0 - p * p - q * q - r * r + 2.0 * p * q * r
    }

    /// True iff the matrix is positive semidefinite within `tol`, i.e.
    /// min(1-p^2, 1-q^2, 1-r^2, delta) >= -tol.
    pub fn is_valid(&self, tol: f64) -> bool {
        let (p, q, r) = (self.p, self.q, self.r);
        let m = (1.0 - p * p)
            .min(1.0 - q * q)
            .min(1.0 - r * r)
            .min(self.delta());
        m >= -tol
    }

    /// Classifies the matrix as interior, extreme (rank 2 or 1) or invalid.
    pub fn classify(&self, tol: f64) -> MatrixClass {
        if !self.is_valid(tol) {
            return MatrixClass::Invalid;
        }
        let near_one = |x: f64| (1.0 - x.abs()).abs() <= tol;
        if near_one(self.p) && near_one(self.q) && near_one(self.r) {
            // Magnitudes are pinned to 1; consistency reduces to pqr = +1.
            if self.p * self.q * self.r > 0.0 {
                return MatrixClass::ExtremeRank1;
            }
        }
        if self.delta() <= tol {
            MatrixClass::ExtremeRank2
        } else {
            MatrixClass::Interior
        }
    }

    /// Converts an extremal matrix to its canonical angle representation.
    ///
    /// a = arccos(p) in [0, pi]; b = s * arccos(q) with the sign s chosen so
    /// that cos(a + b) reproduces r; c = -(a + b) reduced to (-pi, pi].
    pub fn to_angles(&self, tol: f64) -> Result<ExtremePoint3, CorrMatError> {
        let delta = self.delta();
        if delta > tol {
            return Err(CorrMatError::NotExtremal { delta });
        }
        let a = self.p.clamp(-1.0, 1.0).acos();
        let b0 = self.q.clamp(-1.0, 1.0).acos();
        let res_plus = ((a + b0).cos() - self.r).abs();
        let res_minus = ((a - b0).cos() - self.r).abs();
        let (b, residual) = if res_plus <= res_minus {
            (b0, res_plus)
        } else {
            (-b0, res_minus)
        };
        if residual > SIGN_TOL {
            return Err(CorrMatError::NoConsistentSign { residual });
        }
        let c = reduce_angle(-(a + b));
        Ok(ExtremePoint3 { a, b, c })
    }
}

/// Reduces an angle modulo 2pi into (-pi, pi].
pub fn reduce_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

/// Angle triple (a, b, c) with a + b + c = 0 mod 2pi, representing the
/// extremal matrix with p = cos a, q = cos b, r = cos c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAngles")]
pub struct ExtremePoint3 {
    a: f64,
    b: f64,
    c: f64,
}

#[derive(Deserialize)]
struct RawAngles {
    a: f64,
    b: f64,
    c: f64,
}

impl TryFrom<RawAngles> for ExtremePoint3 {
    type Error = CorrMatError;

    fn try_from(raw: RawAngles) -> Result<Self, CorrMatError> {
        ExtremePoint3::new(raw.a, raw.b, raw.c)
    }
}

impl ExtremePoint3 {
    /// Builds an angle triple, enforcing a + b + c = 0 mod 2pi within 1e-12.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, CorrMatError> {
        let residual = reduce_angle(a + b + c).abs();
        // reduce_angle maps exact multiples of 2pi to 0 or to +-pi-free
        // values; residual near pi cannot occur for a near-zero sum.
        if residual > INTERNAL_TOL {
            return Err(CorrMatError::AngleSumInvalid { residual });
        }
        Ok(Self { a, b, c })
    }

    /// Completes (a, b) to a valid triple with c = -(a + b) reduced to (-pi, pi].
    pub fn from_pair(a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            c: reduce_angle(-(a + b)),
        }
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

    /// The sines (sin a, sin b, sin c).
    pub fn sines(&self) -> (f64, f64, f64) {
        (self.a.sin(), self.b.sin(), self.c.sin())
    }

    /// The induced matrix (cos a, cos b, cos c).
    pub fn matrix(&self) -> CorrelationMatrix3 {
        CorrelationMatrix3::new_unchecked(self.a.cos(), self.b.cos(), self.c.cos())
    }

    /// Rank of the induced matrix: 1 iff all three sines vanish, else 2.
    pub fn rank(&self) -> u8 {
        let (sa, sb, sc) = self.sines();
        if sa.abs() < INTERNAL_TOL && sb.abs() < INTERNAL_TOL && sc.abs() < INTERNAL_TOL {
            1
        } else {
            2
        }
    }
}

/// Sign pattern (e1, e2, e3) of a rank-one correlation matrix (e_i e_j).
///
/// e1 is fixed to +1: the signs are only determined projectively. The four
/// patterns correspond to the angle triples (0,0,0), (0,pi,pi), (pi,0,pi)
/// and (pi,pi,0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOneSigns {
    e2: i8,
    e3: i8,
}

impl RankOneSigns {
    /// Extracts the sign pattern from a rank-one matrix.
    pub fn from_matrix(m: &CorrelationMatrix3, tol: f64) -> Result<Self, CorrMatError> {
        if m.classify(tol) != MatrixClass::ExtremeRank1 {
            return Err(CorrMatError::NotRankOne);
        }
        // r = e1 e2 = e2 and q = e1 e3 = e3 under the e1 = +1 convention.
        Ok(Self {
            e2: if m.r() >= 0.0 { 1 } else { -1 },
            e3: if m.q() >= 0.0 { 1 } else { -1 },
        })
    }

    /// Extracts the sign pattern from a rank-one angle triple.
    pub fn from_angles(e: &ExtremePoint3) -> Result<Self, CorrMatError> {
        if e.rank() != 1 {
            return Err(CorrMatError::NotRankOne);
        }
        Ok(Self {
            e2: if e.c().cos() >= 0.0 { 1 } else { -1 },
            e3: if e.b().cos() >= 0.0 { 1 } else { -1 },
        })
    }

    /// The signs as floats (e1, e2, e3) with e1 = +1.
    pub fn signs(&self) -> (f64, f64, f64) {
        (1.0, f64::from(self.e2), f64::from(self.e3))
    }

    /// The induced matrix (p, q, r) = (e2 e3, e3, e2).
    pub fn matrix(&self) -> CorrelationMatrix3 {
        let (_, e2, e3) = self.signs();
        CorrelationMatrix3::new_unchecked(e2 * e3, e3, e2)
    }

    /// The canonical angle triple, entries in {0, pi}.
    pub fn angles(&self) -> ExtremePoint3 {
        let m = self.matrix();
        let arc = |x: f64| if x > 0.0 { 0.0 } else { PI };
        ExtremePoint3 {
            a: arc(m.p()),
            b: arc(m.q()),
            c: arc(m.r()),
        }
    }
}
