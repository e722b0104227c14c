//! Exact arithmetic in a real quadratic ring Z[q] with q^2 = p*q + r,
//! the Galois star map, the embedding lattice {(x, x*)}, its dual,
//! and the Fourier module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real quadratic ring Z[q], where q is the larger root of x^2 = p*x + r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticRing {
    pub p: i64,
    pub r: i64,
    /// The larger root (p + sqrt(p^2 + 4r)) / 2.
    pub q_value: f64,
    /// The conjugate root (p - sqrt(p^2 + 4r)) / 2.
    pub q_star: f64,
}

fn is_perfect_square(n: i64) -> bool {
    if n < 0 {
        return false;
    }
    let s = (n as f64).sqrt().round() as i64;
    (s - 1..=s + 1).any(|t| t >= 0 && t * t == n)
}

impl QuadraticRing {
    pub fn new(p: i64, r: i64) -> Result<Self> {
        let disc = p
            .checked_mul(p)
            .and_then(|pp| pp.checked_add(4 * r))
            .ok_or(Error::Overflow {
                context: "ring discriminant",
            })?;
        if disc <= 0 || is_perfect_square(disc) {
            return Err(Error::InvalidRing { p, r, disc });
        }
        let sqrt_disc = (disc as f64).sqrt();
        Ok(QuadraticRing {
            p,
            r,
            q_value: (p as f64 + sqrt_disc) / 2.0,
            q_star: (p as f64 - sqrt_disc) / 2.0,
        })
    }

    /// The golden case q = tau = (1 + sqrt 5)/2.
    pub fn golden() -> Self {
        QuadraticRing::new(1, 1).expect("golden ring is valid")
    }

    pub fn discriminant(&self) -> i64 {
        self.p * self.p + 4 * self.r
    }

    /// sqrt(p^2 + 4r) = q - q*.
    pub fn sqrt_disc(&self) -> f64 {
        self.q_value - self.q_star
    }

    pub fn mul(&self, x: RingElement, y: RingElement) -> Result<RingElement> {
        // (a1 + b1 q)(a2 + b2 q) = (a1 a2 + r b1 b2) + (a1 b2 + a2 b1 + p b1 b2) q
        let err = || Error::Overflow {
            context: "ring multiplication",
        };
        let bb = x.b.checked_mul(y.b).ok_or_else(err)?;
        let a = x
            .a
            .checked_mul(y.a)
            .and_then(|aa| self.r.checked_mul(bb).and_then(|rb| aa.checked_add(rb)))
            .ok_or_else(err)?;
        let b = x
            .a
            .checked_mul(y.b)
            .and_then(|t1| {
                y.a.checked_mul(x.b).and_then(|t2| {
                    self.p
                        .checked_mul(bb)
                        .and_then(|t3| t1.checked_add(t2)?.checked_add(t3))
                })
            })
            .ok_or_else(err)?;
        Ok(RingElement { a, b })
    }

    /// The algebraic conjugate of x inside Z[q]: conj(a + bq) = (a + pb) - bq.
    pub fn conjugate(&self, x: RingElement) -> Result<RingElement> {
        let a = self
            .p
            .checked_mul(x.b)
            .and_then(|pb| x.a.checked_add(pb))
            .ok_or(Error::Overflow {
                context: "conjugation",
            })?;
        Ok(RingElement { a, b: -x.b })
    }

    /// Field norm a^2 + p a b - r b^2 = x * conj(x).
    pub fn norm(&self, x: RingElement) -> Result<i64> {
        let c = self.conjugate(x)?;
        Ok(self.mul(x, c)?.a)
    }
}

/// An element a + b*q of Z[q], stored exactly as integer coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RingElement {
    pub a: i64,
    pub b: i64,
}

impl RingElement {
    pub const ZERO: RingElement = RingElement { a: 0, b: 0 };
    pub const ONE: RingElement = RingElement { a: 1, b: 0 };
    /// The generator q itself.
    pub const Q: RingElement = RingElement { a: 0, b: 1 };

    pub fn new(a: i64, b: i64) -> Self {
        RingElement { a, b }
    }

    /// Physical embedding a + b*q.
    pub fn value(&self, ring: &QuadraticRing) -> f64 {
        self.a as f64 + self.b as f64 * ring.q_value
    }

    /// Internal embedding a + b*q* (the Galois star map).
    pub fn star(&self, ring: &QuadraticRing) -> f64 {
        self.a as f64 + self.b as f64 * ring.q_star
    }

    pub fn checked_add(&self, other: RingElement) -> Result<RingElement> {
        let err = || Error::Overflow {
            context: "ring addition",
        };
        Ok(RingElement {
            a: self.a.checked_add(other.a).ok_or_else(err)?,
            b: self.b.checked_add(other.b).ok_or_else(err)?,
        })
    }

    pub fn checked_sub(&self, other: RingElement) -> Result<RingElement> {
        let err = || Error::Overflow {
            context: "ring subtraction",
        };
        Ok(RingElement {
            a: self.a.checked_sub(other.a).ok_or_else(err)?,
            b: self.b.checked_sub(other.b).ok_or_else(err)?,
        })
    }

    pub fn neg(&self) -> RingElement {
        RingElement {
            a: -self.a,
            b: -self.b,
        }
    }
}

impl std::fmt::Display for RingElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} + {}q", self.a, self.b)
    }
}

/// The lattice {(x, x*) : x in Z[q]} in R^2, spanned by (1,1) and (q, q*).
#[derive(Debug, Clone, Copy)]
pub struct EmbeddingLattice {
    pub ring: QuadraticRing,
    /// Basis vectors (1, 1) and (q, q*).
    pub basis: [[f64; 2]; 2],
    /// |q* - q| = sqrt(p^2 + 4r).
    pub covolume: f64,
}

impl EmbeddingLattice {
    pub fn new(ring: QuadraticRing) -> Self {
        EmbeddingLattice {
            ring,
            basis: [[1.0, 1.0], [ring.q_value, ring.q_star]],
            covolume: ring.sqrt_disc(),
        }
    }

    /// Dual basis d1, d2 with d_i . b_j = delta_ij.
    ///
    /// Dual lattice points all have the form (x/sqrt(D), -x*/sqrt(D)) with
    /// x in Z[q]; the returned pairs are the numerator elements of d1, d2
    /// (denominator sqrt(D)), namely -p + q and 1.
    pub fn dual_basis_numerators(&self) -> [RingElement; 2] {
        [RingElement::new(-self.ring.p, 1), RingElement::ONE]
    }

    /// Dual basis as float vectors.
    pub fn dual_basis(&self) -> [[f64; 2]; 2] {
        let d = self.covolume;
        self.dual_basis_numerators().map(|x| {
            [
                x.value(&self.ring) / d,
                -x.star(&self.ring) / d,
            ]
        })
    }

    /// Exact dual pairing of the module point with numerator `num` against the
    /// lattice point (y, y*): equals the q-coefficient of num*y, an integer.
    pub fn pairing(&self, num: RingElement, y: RingElement) -> Result<i64> {
        Ok(self.ring.mul(num, y)?.b)
    }
}

/// A point of the Fourier module pi_1(dual lattice): k = x / sqrt(D).
///
/// The full dual-lattice point is (k_value, k_star) with
/// k_star = -x*/sqrt(D), so that k_value*y + k_star*y* is an integer for
/// every lattice point (y, y*). Hence k.v = -k_star.v* (mod 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierModulePoint {
    pub numerator: RingElement,
    pub denominator: f64,
    pub k_value: f64,
    pub k_star: f64,
}

impl FourierModulePoint {
    pub fn new(numerator: RingElement, ring: &QuadraticRing) -> Self {
        let d = ring.sqrt_disc();
        FourierModulePoint {
            numerator,
            denominator: d,
            k_value: numerator.value(ring) / d,
            k_star: -numerator.star(ring) / d,
        }
    }

    pub fn zero(ring: &QuadraticRing) -> Self {
        FourierModulePoint::new(RingElement::ZERO, ring)
    }
}

/// Enumerates all x = a + bq with value(x) in [v_lo, v_hi] and
/// star(x) in [s_lo, s_hi], sorted ascending by value.
///
/// From v = a + b q and w = a + b q*: b = (v - w)/sqrt(D) and, for fixed b,
/// a is pinned by both intervals. Bounds are widened by one to absorb
/// floating rounding, then candidates are filtered with the same closed
/// comparisons used everywhere else.
pub fn enumerate_elements(
    ring: &QuadraticRing,
    v_lo: f64,
    v_hi: f64,
    s_lo: f64,
    s_hi: f64,
) -> Result<Vec<RingElement>> {
    let d = ring.sqrt_disc();
    let b_min = ((v_lo - s_hi) / d).floor() - 1.0;
    let b_max = ((v_hi - s_lo) / d).ceil() + 1.0;
    if !(b_min.is_finite() && b_max.is_finite())
        || b_min < -(2.0_f64.powi(52))
        || b_max > 2.0_f64.powi(52)
    {
        return Err(Error::EnumerationOverflow);
    }
    let mut out = Vec::new();
    for b in (b_min as i64)..=(b_max as i64) {
        let bf = b as f64;
        let a_min = (v_lo - bf * ring.q_value)
            .max(s_lo - bf * ring.q_star)
            .floor()
            - 1.0;
        let a_max = (v_hi - bf * ring.q_value)
            .min(s_hi - bf * ring.q_star)
            .ceil()
            + 1.0;
        if a_min > a_max {
            continue;
        }
        if a_min < -(2.0_f64.powi(52)) || a_max > 2.0_f64.powi(52) {
            return Err(Error::EnumerationOverflow);
        }
        for a in (a_min as i64)..=(a_max as i64) {
            let x = RingElement::new(a, b);
            let v = x.value(ring);
            let w = x.star(ring);
            if v >= v_lo && v <= v_hi && w >= s_lo && w <= s_hi {
                out.push(x);
            }
        }
    }
    out.sort_by(|x, y| {
        x.value(ring)
            .partial_cmp(&y.value(ring))
            .expect("finite values")
    });
    Ok(out)
}

/// All Fourier-module points k with |k_value| <= k_max and |k_star| <= k_star_max,
/// sorted by k_value.
pub fn fourier_module_points(
    lattice: &EmbeddingLattice,
    k_max: f64,
    k_star_max: f64,
) -> Result<Vec<FourierModulePoint>> {
    let ring = &lattice.ring;
    let d = lattice.covolume;
    // k = x/sqrt(D), k_star = -x*/sqrt(D): bound the numerator element.
    let elements = enumerate_elements(
        ring,
        -k_max * d,
        k_max * d,
        -k_star_max * d,
        k_star_max * d,
    )?;
    let mut pts: Vec<FourierModulePoint> = elements
        .into_iter()
        .map(|x| FourierModulePoint::new(x, ring))
        .filter(|k| k.k_value.abs() <= k_max && k.k_star.abs() <= k_star_max)
        .collect();
    pts.sort_by(|x, y| x.k_value.partial_cmp(&y.k_value).expect("finite"));
    Ok(pts)
}
