//! Self-similarities x -> q x + v of a model set: the compatibility window
//! Omega_Q = {u : A Omega + u within Omega}, the translation model set T_Q,
//! and exact verification of inflation maps on generated samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modelset::{generate, ModelSetSample, Window};
use crate::ring::{QuadraticRing, RingElement};

/// A scalar similarity Q = multiplication by a unit q_factor of Z[q] with
/// |value| > 1; A = Q* = star(q_factor) is the contraction in internal space.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Inflation {
    pub ring: QuadraticRing,
    pub q_factor: RingElement,
    /// A = star(q_factor), |A| < 1.
    pub a_contraction: f64,
}

impl Inflation {
    pub fn new(ring: &QuadraticRing, q_factor: RingElement) -> Result<Self> {
        let value = q_factor.value(ring);
        let star = q_factor.star(ring);
        if !(value.abs() > 1.0) || !(star.abs() < 1.0) {
            return Err(Error::NotAnInflation { value, star });
        }
        // QL = L requires q_factor to be a unit of the ring
        let norm = ring.norm(q_factor)?;
        if norm.abs() != 1 {
            return Err(Error::NotAUnit {
                a: q_factor.a,
                b: q_factor.b,
                norm,
            });
        }
        Ok(Inflation {
            ring: *ring,
            q_factor,
            a_contraction: star,
        })
    }

    pub fn q_value(&self) -> f64 {
        self.q_factor.value(&self.ring)
    }
}

/// Omega_Q = {u | A Omega + u within Omega}: the exact interval
/// [lo - min(a lo, a hi), hi - max(a lo, a hi)]. Negative contraction
/// factors are handled by the min/max, not by sign assumptions.
pub fn omega_q(window: &Window, a: f64) -> Result<Window> {
    if !(a.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "contraction |a| = {} must be < 1",
            a.abs()
        )));
    }
    let lo = window.lo - (a * window.lo).min(a * window.hi);
    let hi = window.hi - (a * window.lo).max(a * window.hi);
    if !(lo < hi) {
        return Err(Error::NotCompatible { lo, hi });
    }
    Ok(Window { lo, hi })
}

/// Symbolic Omega_Q for windows whose endpoints are star images of ring
/// elements: returns elements (e_lo, e_hi) with star(e) = the endpoints of
/// omega_q. Used where exact endpoint identities matter.
pub fn omega_q_symbolic(
    ring: &QuadraticRing,
    window_lo: RingElement,
    window_hi: RingElement,
    q_factor: RingElement,
) -> Result<(RingElement, RingElement)> {
    let a = q_factor.star(ring);
    if !(a.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "contraction |a| = {} must be < 1",
            a.abs()
        )));
    }
    let q_lo = ring.mul(q_factor, window_lo)?;
    let q_hi = ring.mul(q_factor, window_hi)?;
    // order the images of the endpoints under the contraction by float value
    let (min_el, max_el) = if q_lo.star(ring) <= q_hi.star(ring) {
        (q_lo, q_hi)
    } else {
        (q_hi, q_lo)
    };
    let e_lo = window_lo.checked_sub(min_el)?;
    let e_hi = window_hi.checked_sub(max_el)?;
    if !(e_lo.star(ring) < e_hi.star(ring)) {
        return Err(Error::NotCompatible {
            lo: e_lo.star(ring),
            hi: e_hi.star(ring),
        });
    }
    Ok((e_lo, e_hi))
}

/// T_Q restricted to radius s, together with its window Omega_Q.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranslationSet {
    pub inflation: Inflation,
    pub omega_q: Window,
    pub sample: ModelSetSample,
}

impl TranslationSet {
    pub fn len(&self) -> usize {
        self.sample.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample.points.is_empty()
    }

    /// Physical translation values.
    pub fn values(&self) -> Vec<f64> {
        self.sample.values()
    }

    /// Internal star images of the translations (the IFS offsets).
    pub fn star_values(&self) -> Vec<f64> {
        self.sample
            .points
            .iter()
            .map(|v| v.star(&self.sample.ring))
            .collect()
    }
}

/// T_Q = {v in L | v* in Omega_Q}, itself a model set, restricted to |v| <= s.
pub fn translations(
    ring: &QuadraticRing,
    window: &Window,
    inflation: &Inflation,
    s: f64,
) -> Result<TranslationSet> {
    let oq = omega_q(window, inflation.a_contraction)?;
    let sample = generate(ring, &oq, s)?;
    Ok(TranslationSet {
        inflation: *inflation,
        omega_q: oq,
        sample,
    })
}

/// Outcome of checking x -> q x + v point by point on a finite sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub checked: usize,
    pub failures: usize,
    pub first_counterexample: Option<RingElement>,
}

impl SimilarityReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// For every x in the sample whose image q x + v stays within the sampled
/// radius, check q x + v in Lambda by exact window membership.
pub fn verify_self_similarity(
    sample: &ModelSetSample,
    inflation: &Inflation,
    v: RingElement,
) -> Result<SimilarityReport> {
    let ring = &sample.ring;
    let mut checked = 0;
    let mut failures = 0;
    let mut first = None;
    for x in &sample.points {
        let image = inflation.q_factor;
        let image = ring.mul(image, *x)?.checked_add(v)?;
        if image.value(ring).abs() > sample.radius {
            continue;
        }
        checked += 1;
        if !sample.window.contains(image.star(ring)) {
            failures += 1;
            if first.is_none() {
                first = Some(*x);
            }
        }
    }
    Ok(SimilarityReport {
        checked,
        failures,
        first_counterexample: first,
    })
}
