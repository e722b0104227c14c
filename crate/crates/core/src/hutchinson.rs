//! The Hutchinson measure of the finite IFS {t_v* : v in T_s}, computed by
//! deterministic fixed-point iteration of binned pushforwards, its
//! characteristic-function product formula, and weak convergence toward the
//! invariant measure.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::density::DensityProfile;
use crate::error::{Error, Result};
use crate::inflation::TranslationSet;
use crate::modelset::Window;

/// A probability measure binned over the window: non-negative masses
/// summing to 1, attached to bin centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedMeasure {
    pub window: Window,
    pub masses: Vec<f64>,
}

impl BinnedMeasure {
    pub fn uniform(window: Window, bins: usize) -> Self {
        BinnedMeasure {
            window,
            masses: vec![1.0 / bins as f64; bins],
        }
    }

    /// All mass in the bin containing x.
    pub fn point_mass(window: Window, bins: usize, x: f64) -> Self {
        let mut masses = vec![0.0; bins];
        let j = bin_index(&window, bins, x);
        masses[j] = 1.0;
        BinnedMeasure { window, masses }
    }

    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.window.width() / self.masses.len() as f64
    }

    pub fn bin_center(&self, j: usize) -> f64 {
        self.window.lo + (j as f64 + 0.5) * self.bin_width()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn l1_distance(&self, other: &BinnedMeasure) -> f64 {
        assert_eq!(self.bins(), other.bins());
        self.masses
            .iter()
            .zip(&other.masses)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// mu(phi) = sum_j mass_j phi(center_j) for a continuous test function.
    pub fn integrate(&self, phi: &DensityProfile) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .map(|(j, m)| m * phi.eval(self.bin_center(j)))
            .sum()
    }

    /// Direct characteristic function sum_j mass_j e^{-2 pi i k c_j}.
    pub fn characteristic_function(&self, k: f64) -> Complex64 {
        self.masses
            .iter()
            .enumerate()
            .map(|(j, m)| {
                m * Complex64::from_polar(
                    1.0,
                    -2.0 * std::f64::consts::PI * k * self.bin_center(j),
                )
            })
            .sum()
    }
}

fn bin_index(window: &Window, bins: usize, x: f64) -> usize {
    let j = ((x - window.lo) / window.width() * bins as f64).floor() as isize;
    j.clamp(0, bins as isize - 1) as usize
}

/// One pushforward-average step: mu <- (1/#T_s) sum_v t_v* . mu, with each
/// pushed bin center split linearly between the two covering bins. Mass is
/// conserved exactly.
pub fn hutchinson_step(measure: &BinnedMeasure, translations: &TranslationSet) -> BinnedMeasure {
    assert!(!translations.is_empty());
    let a = translations.inflation.a_contraction;
    let stars = translations.star_values();
    let bins = measure.bins();
    let bw = measure.bin_width();
    let weight = 1.0 / stars.len() as f64;
    let mut out = vec![0.0; bins];
    for &vs in &stars {
        for (j, &m) in measure.masses.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let y = a * measure.bin_center(j) + vs;
            // position in units of bin centers
            let t = (y - measure.window.lo) / bw - 0.5;
            let lo = t.floor();
            let frac = t - lo;
            let i0 = (lo as isize).clamp(0, bins as isize - 1) as usize;
            let i1 = ((lo as isize) + 1).clamp(0, bins as isize - 1) as usize;
            out[i0] += weight * m * (1.0 - frac);
            out[i1] += weight * m * frac;
        }
    }
    BinnedMeasure {
        window: measure.window,
        masses: out,
    }
}

/// Iterate from `init` until the successive L1 distance drops below `tol`.
/// Returns the measure together with the iteration count and last distance.
pub fn hutchinson_fixed_point(
    translations: &TranslationSet,
    init: BinnedMeasure,
    tol: f64,
    max_iter: usize,
) -> Result<(BinnedMeasure, usize, f64)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be > 0".into()));
    }
    let mut current = init;
    let mut last_distance = f64::INFINITY;
    for iter in 1..=max_iter {
        let next = hutchinson_step(&current, translations);
        last_distance = next.l1_distance(&current);
        current = next;
        if last_distance < tol {
            return Ok((current, iter, last_distance));
        }
    }
    Err(Error::MaxIterExceeded {
        iterations: max_iter,
        last_distance,
    })
}

/// mu_s^(k) = prod_{N=0}^{n_terms-1} g_s((A^t)^N k), where g_s here is the
/// internal-side exponential sum over the star images of T_s.
pub fn hutchinson_fourier(k: f64, translations: &TranslationSet, n_terms: usize) -> Complex64 {
    let a = translations.inflation.a_contraction;
    let stars = translations.star_values();
    let mut value = Complex64::new(1.0, 0.0);
    let mut kappa = k;
    for _ in 0..n_terms {
        let sum: Complex64 = stars
            .iter()
            .map(|&vs| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * kappa * vs))
            .sum();
        value *= sum / stars.len() as f64;
        kappa *= a;
    }
    value
}

/// Terms needed by the certified rule |a|^N 2 pi |k| max|v*| < tol.
pub fn fourier_terms_needed(k: f64, translations: &TranslationSet, tol: f64) -> usize {
    let max_star = translations
        .star_values()
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let c = 2.0 * std::f64::consts::PI * k.abs() * max_star;
    let abs_a = translations.inflation.a_contraction.abs();
    let mut n = 0;
    while c * abs_a.powi(n as i32) >= tol && n < 400 {
        n += 1;
    }
    n
}

/// Chaos-game sampler for the same IFS; cross-check utility only, the binned
/// pushforward is the deterministic reference.
pub fn chaos_game(
    translations: &TranslationSet,
    window: Window,
    bins: usize,
    n_points: usize,
    burn_in: usize,
    rng: &mut impl Rng,
) -> BinnedMeasure {
    let a = translations.inflation.a_contraction;
    let stars = translations.star_values();
    let mut masses = vec![0.0; bins];
    let mut y = 0.0;
    for i in 0..(n_points + burn_in) {
        let vs = stars[rng.gen_range(0..stars.len())];
        y = a * y + vs;
        if i >= burn_in {
            masses[bin_index(&window, bins, y)] += 1.0;
        }
    }
    for m in &mut masses {
        *m /= n_points as f64;
    }
    BinnedMeasure { window, masses }
}

/// One row per radius s: |mu_s(phi) - int phi f| for each test function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeakConvergenceRow {
    pub s: f64,
    pub n_maps: usize,
    pub errors: Vec<f64>,
}

/// Tabulates the weak-convergence errors of the Hutchinson measures along an
/// increasing ladder of radii against the invariant-density reference.
pub fn weak_convergence_report(
    translation_sets: &[TranslationSet],
    test_functions: &[DensityProfile],
    reference_f: &DensityProfile,
    bins: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<WeakConvergenceRow>> {
    let mut rows = Vec::new();
    for t in translation_sets {
        let init = BinnedMeasure::uniform(reference_f.window, bins);
        let (mu, _, _) = hutchinson_fixed_point(t, init, tol, max_iter)?;
        let errors = test_functions
            .iter()
            .map(|phi| {
                let lhs = mu.integrate(phi);
                // int phi f by the trapezoid rule on the reference grid
                let prod = DensityProfile {
                    window: reference_f.window,
                    values: reference_f
                        .values
                        .iter()
                        .enumerate()
                        .map(|(j, f)| f * phi.eval(reference_f.x(j)))
                        .collect(),
                };
                (lhs - prod.integral()).abs()
            })
            .collect();
        rows.push(WeakConvergenceRow {
            s: t.sample.radius,
            n_maps: t.len(),
            errors,
        });
    }
    Ok(rows)
}
