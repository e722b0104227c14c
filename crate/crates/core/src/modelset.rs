//! Windows, model-set point generation Lambda(Omega) = {x in L : x* in Omega},
//! empirical Delone/density statistics, and finite-patch translation
//! neighborhoods N_K.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{enumerate_elements, QuadraticRing, RingElement};

/// A closed interval [lo, hi] in internal space. Compact with non-empty
/// interior, so the window conditions hold automatically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::EmptyWindow { lo, hi });
        }
        Ok(Window { lo, hi })
    }

    /// Closed-interval membership. The window is closed, so boundary star
    /// values (e.g. star(1) = 1 for Omega = [-1, 1]) are members.
    pub fn contains(&self, u: f64) -> bool {
        self.lo <= u && u <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

/// A finite radius-s slice Lambda_s of a model set: all x in Z[q] with
/// |value(x)| <= radius and star(x) in the window, sorted by physical value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSetSample {
    pub ring: QuadraticRing,
    pub window: Window,
    pub radius: f64,
    pub points: Vec<RingElement>,
}

/// Generate Lambda_s exactly: integer coefficient bounds are derived from the
/// two linear inequalities |a + b q| <= s and lo <= a + b q* <= hi, so the
/// loop does O(#Lambda_s) work with no rejection box.
pub fn generate(ring: &QuadraticRing, window: &Window, s: f64) -> Result<ModelSetSample> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("radius s = {s} must be > 0")));
    }
    let points = enumerate_elements(ring, -s, s, window.lo, window.hi)?;
    Ok(ModelSetSample {
        ring: *ring,
        window: *window,
        radius: s,
        points,
    })
}

impl ModelSetSample {
    /// Membership test consistent with the generation predicate.
    pub fn member(&self, x: RingElement) -> bool {
        self.window.contains(x.star(&self.ring))
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|x| x.value(&self.ring)).collect()
    }

    /// #Lambda_s / (2s): the 1D density estimator (c_1 = 2).
    pub fn density(&self) -> f64 {
        self.points.len() as f64 / (2.0 * self.radius)
    }

    /// Max over bins of |empirical fraction of star images - vol(bin)/vol(Omega)|.
    pub fn uniform_distribution_discrepancy(&self, bins: usize) -> Result<f64> {
        if bins < 1 {
            return Err(Error::InvalidParameter("bins must be >= 1".into()));
        }
        if self.points.is_empty() {
            return Err(Error::InvalidParameter("sample is empty".into()));
        }
        let mut counts = vec![0usize; bins];
        let w = self.window.width();
        for x in &self.points {
            let u = x.star(&self.ring);
            let mut j = ((u - self.window.lo) / w * bins as f64).floor() as isize;
            j = j.clamp(0, bins as isize - 1);
            counts[j as usize] += 1;
        }
        let n = self.points.len() as f64;
        let target = 1.0 / bins as f64;
        Ok(counts
            .iter()
            .map(|&c| (c as f64 / n - target).abs())
            .fold(0.0, f64::max))
    }

    /// Gaps between consecutive physical values, as exact coefficient
    /// differences. The outermost two points on each side are ignored to
    /// avoid edge truncation artifacts.
    fn interior_gaps(&self) -> Result<Vec<RingElement>> {
        let n = self.points.len();
        if n < 6 {
            return Err(Error::InvalidParameter(
                "need at least 6 points for interior gap statistics".into(),
            ));
        }
        self.points[2..n - 2]
            .windows(2)
            .map(|w| w[1].checked_sub(w[0]))
            .collect()
    }

    /// Minimum interior gap (M1, uniform discreteness), as the exact value
    /// of the minimal gap element.
    pub fn min_gap(&self) -> Result<f64> {
        let gaps = self.interior_gaps()?;
        Ok(gaps
            .iter()
            .map(|g| g.value(&self.ring))
            .fold(f64::INFINITY, f64::min))
    }

    /// Maximum interior gap (M2, relative denseness).
    pub fn relative_denseness(&self) -> Result<f64> {
        let gaps = self.interior_gaps()?;
        Ok(gaps
            .iter()
            .map(|g| g.value(&self.ring))
            .fold(0.0, f64::max))
    }

    /// The distinct gap elements occurring in the interior, for exact checks.
    pub fn gap_elements(&self) -> Result<Vec<RingElement>> {
        let mut gaps = self.interior_gaps()?;
        gaps.sort();
        gaps.dedup();
        Ok(gaps)
    }
}

/// The set N_K of translations v for which v + (Lambda cap K) = Lambda cap (v + K),
/// with K = [-patch_radius, patch_radius].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatchNeighborhood {
    pub patch_radius: f64,
    pub translations: Vec<RingElement>,
}

/// Search all v in L with |value(v)| <= search_radius for the exact finite-set
/// equality v + (Lambda cap K) = Lambda cap (v + K). Requires
/// patch_radius + search_radius <= sample.radius so both patches lie fully
/// inside the generated sample.
pub fn patch_neighborhood(
    sample: &ModelSetSample,
    patch_radius: f64,
    search_radius: f64,
) -> Result<PatchNeighborhood> {
    let needed = patch_radius + search_radius;
    if needed > sample.radius {
        return Err(Error::PatchExceedsSample {
            needed,
            radius: sample.radius,
        });
    }
    let ring = &sample.ring;
    let in_patch = |x: &RingElement| x.value(ring).abs() <= patch_radius;
    let patch: Vec<RingElement> = sample.points.iter().copied().filter(in_patch).collect();
    let lambda: HashSet<RingElement> = sample.points.iter().copied().collect();

    // candidate v: differences of Lambda points have star in Omega - Omega
    let span = sample.window.width();
    let candidates = enumerate_elements(ring, -search_radius, search_radius, -span, span)?;

    let mut translations = Vec::new();
    'cand: for v in candidates {
        // forward: every shifted patch point must land on Lambda
        for x in &patch {
            if !lambda.contains(&x.checked_add(v)?) {
                continue 'cand;
            }
        }
        // backward: every Lambda point inside v + K must come from the patch.
        // Recompute the K-membership on the exact difference y - v so both
        // directions use the identical predicate.
        for y in &sample.points {
            let d = y.checked_sub(v)?;
            if in_patch(&d) && !patch.contains(&d) {
                continue 'cand;
            }
        }
        translations.push(v);
    }
    Ok(PatchNeighborhood {
        patch_radius,
        translations,
    })
}
