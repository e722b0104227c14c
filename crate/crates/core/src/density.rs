//! The averaging operator in its three guises (direct sum over T_s, integral
//! refinement operator, Fourier multiplier), the invariant density via the
//! infinite Fourier product and the convolution cascade, the operator
//! spectrum, and derivative eigenfunctions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inflation::TranslationSet;
use crate::modelset::Window;

/// A real-space function sampled on a uniform grid over its window,
/// endpoints included. Evaluation between grid points is linear
/// interpolation; the function is 0 outside the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub window: Window,
    pub values: Vec<f64>,
}

impl DensityProfile {
    pub fn from_fn(window: Window, grid_size: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid_size).map(|j| f(grid_x(&window, grid_size, j))).collect();
        DensityProfile { window, values }
    }

    pub fn zeros(window: Window, grid_size: usize) -> Self {
        DensityProfile {
            window,
            values: vec![0.0; grid_size],
        }
    }

    /// The flat density 1_Omega / vol(Omega).
    pub fn flat(window: Window, grid_size: usize) -> Self {
        let h = 1.0 / window.width();
        DensityProfile::from_fn(window, grid_size, |_| h)
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn step(&self) -> f64 {
        self.window.width() / (self.values.len() - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        grid_x(&self.window, self.values.len(), j)
    }

    /// Linear interpolation, 0 outside the window.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.window.lo || x > self.window.hi {
            return 0.0;
        }
        let t = (x - self.window.lo) / self.step();
        let j = (t.floor() as usize).min(self.values.len() - 2);
        let frac = t - j as f64;
        self.values[j] * (1.0 - frac) + self.values[j + 1] * frac
    }

    /// Trapezoid-rule integral over the window.
    pub fn integral(&self) -> f64 {
        let h = self.step();
        let n = self.values.len();
        let inner: f64 = self.values[1..n - 1].iter().sum();
        h * (0.5 * (self.values[0] + self.values[n - 1]) + inner)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, v| m.min(*v))
    }

    /// Sup-norm distance on the shared grid (windows must match).
    pub fn sup_distance(&self, other: &DensityProfile) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Interior sign changes, ignoring values below a relative threshold.
    pub fn sign_changes(&self, rel_threshold: f64) -> usize {
        let thr = rel_threshold * self.sup_norm();
        let mut count = 0;
        let mut last: Option<f64> = None;
        for &v in &self.values {
            if v.abs() <= thr {
                continue;
            }
            if let Some(prev) = last {
                if prev * v < 0.0 {
                    count += 1;
                }
            }
            last = Some(v);
        }
        count
    }
}

fn grid_x(window: &Window, grid_size: usize, j: usize) -> f64 {
    window.lo + window.width() * j as f64 / (grid_size - 1) as f64
}

/// Fourier transform of the normalized indicator X_S of an interval:
/// X_S^(k) = exp(-2 pi i k m) sinc(2 pi w k), m midpoint, w half-width.
pub fn indicator_ft(window: &Window, k: f64) -> Complex64 {
    let phase = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k * window.midpoint());
    phase * sinc(2.0 * std::f64::consts::PI * window.half_width() * k)
}

/// sin(x)/x with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// One evaluation of the infinite product f^(k) = prod_N X_{Omega_Q}^((A^t)^N k),
/// truncated once the certified remainder bound drops below `tol`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FourierProductValue {
    pub k: f64,
    pub value: Complex64,
    pub terms_used: usize,
    pub truncation_bound: f64,
}

/// Truncation rule: |X^(kappa) - 1| <= 2 pi |kappa| (half_width + |mid|), so the
/// product is cut at the first N with |a|^N 2 pi |k| (w + |m|) < tol; the
/// recorded bound is the geometric tail of that estimate.
pub fn fhat(k: f64, omega_q: &Window, a: f64, tol: f64) -> FourierProductValue {
    let c = 2.0
        * std::f64::consts::PI
        * k.abs()
        * (omega_q.half_width() + omega_q.midpoint().abs());
    let abs_a = a.abs();
    let mut value = Complex64::new(1.0, 0.0);
    let mut kappa = k;
    let mut n = 0usize;
    let max_terms = 400;
    while c * abs_a.powi(n as i32) >= tol && n < max_terms {
        value *= indicator_ft(omega_q, kappa);
        kappa *= a;
        n += 1;
    }
    let term = c * abs_a.powi(n as i32);
    FourierProductValue {
        k,
        value,
        terms_used: n,
        truncation_bound: term / (1.0 - abs_a),
    }
}

/// Direct averaging over the finite translation set:
/// (A_s f)(x) = (|q| / #T_s) sum_v f(A^{-1}(x - v*)).
pub fn average_direct(profile: &DensityProfile, translations: &TranslationSet) -> DensityProfile {
    assert!(!translations.is_empty(), "translation set must be non-empty");
    let a = translations.inflation.a_contraction;
    let det_q = translations.inflation.q_value().abs();
    let stars = translations.star_values();
    let scale = det_q / stars.len() as f64;
    let n = profile.grid_size();
    let mut out = DensityProfile::zeros(profile.window, n);
    for j in 0..n {
        let x = profile.x(j);
        let mut acc = 0.0;
        for &vs in &stars {
            acc += profile.eval((x - vs) / a);
        }
        out.values[j] = scale * acc;
    }
    out
}

/// Cumulative trapezoid antiderivative at grid nodes, with linear
/// interpolation between nodes; clamped outside the window.
struct Antiderivative<'a> {
    profile: &'a DensityProfile,
    cum: Vec<f64>,
}

impl<'a> Antiderivative<'a> {
    fn new(profile: &'a DensityProfile) -> Self {
        let h = profile.step();
        let mut cum = Vec::with_capacity(profile.grid_size());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in profile.values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cum.push(acc);
        }
        Antiderivative { profile, cum }
    }

    fn eval(&self, x: f64) -> f64 {
        let w = &self.profile.window;
        if x <= w.lo {
            return 0.0;
        }
        if x >= w.hi {
            return *self.cum.last().unwrap();
        }
        let t = (x - w.lo) / self.profile.step();
        let j = (t.floor() as usize).min(self.cum.len() - 2);
        let frac = t - j as f64;
        // quadratic reconstruction consistent with linear interpolation of f
        let h = self.profile.step();
        let f0 = self.profile.values[j];
        let f1 = self.profile.values[j + 1];
        self.cum[j] + h * frac * (f0 + 0.5 * frac * (f1 - f0))
    }
}

/// The integral-kernel form: (A f)(x) = int X_{A y + Omega_Q}(x) f(y) dy,
/// evaluated exactly against the piecewise-linear f via its antiderivative.
pub fn refinement_integral(
    profile: &DensityProfile,
    omega_q: &Window,
    a: f64,
) -> Result<DensityProfile> {
    if !(a.abs() < 1.0) || a == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "contraction a = {a} must satisfy 0 < |a| < 1"
        )));
    }
    let anti = Antiderivative::new(profile);
    let vol = omega_q.width();
    let n = profile.grid_size();
    let mut out = DensityProfile::zeros(profile.window, n);
    for j in 0..n {
        let x = profile.x(j);
        // x - a y in Omega_Q <=> y between (x - hi)/a and (x - lo)/a
        let y1 = (x - omega_q.hi) / a;
        let y2 = (x - omega_q.lo) / a;
        let (lo, hi) = if y1 <= y2 { (y1, y2) } else { (y2, y1) };
        out.values[j] = (anti.eval(hi) - anti.eval(lo)) / vol;
    }
    Ok(out)
}

/// Numerical Fourier transform of a profile: f^(k) = int f(x) e^{-2 pi i k x} dx
/// by the trapezoid rule (spectrally accurate for smooth compactly supported f).
pub fn profile_ft(profile: &DensityProfile, k: f64) -> Complex64 {
    let h = profile.step();
    let n = profile.grid_size();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let weight = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
        let x = profile.x(j);
        acc += weight
            * profile.values[j]
            * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k * x);
    }
    acc * h
}

/// Inverse transform from Hermitian samples F(j dk), j = 0..=j_max, onto the
/// grid of `window`: f(x) = dk (F(0) + 2 sum_j Re(F e^{2 pi i k x})).
fn inverse_fourier_on_grid(
    window: &Window,
    grid_size: usize,
    dk: f64,
    samples: &[Complex64],
) -> DensityProfile {
    let mut out = DensityProfile::zeros(*window, grid_size);
    for j in 0..grid_size {
        let x = grid_x(window, grid_size, j);
        let mut acc = samples[0].re;
        for (i, f) in samples.iter().enumerate().skip(1) {
            let phase = 2.0 * std::f64::consts::PI * (i as f64 * dk) * x;
            acc += 2.0 * (f.re * phase.cos() - f.im * phase.sin());
        }
        out.values[j] = dk * acc;
    }
    out
}

/// The Fourier-multiplier form: (A f)^(k) = X_{Omega_Q}^(k) f^(A^t k),
/// inverted back to the grid by quadrature.
pub fn refinement_fourier(
    profile: &DensityProfile,
    omega_q: &Window,
    a: f64,
) -> Result<DensityProfile> {
    if !(a.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "contraction |a| = {} must be < 1",
            a.abs()
        )));
    }
    // dk <= 1/(4 width) avoids aliasing into the support
    let dk = 1.0 / (4.0 * profile.window.width());
    let k_max = 64.0;
    let j_max = (k_max / dk).ceil() as usize;
    let samples: Vec<Complex64> = (0..=j_max)
        .map(|j| {
            let k = j as f64 * dk;
            indicator_ft(omega_q, k) * profile_ft(profile, a * k)
        })
        .collect();
    Ok(inverse_fourier_on_grid(
        &profile.window,
        profile.grid_size(),
        dk,
        &samples,
    ))
}

/// The invariant density f on `window`, via inverse Fourier quadrature of the
/// certified infinite product. The k-range grows until the estimated
/// neglected tail of |f^| is below 1e-8.
pub fn invariant_density(
    window: &Window,
    omega_q: &Window,
    a: f64,
    grid_size: usize,
) -> Result<DensityProfile> {
    if !(a.abs() < 1.0) || a == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "contraction a = {a} must satisfy 0 < |a| < 1"
        )));
    }
    let dk = 1.0 / (4.0 * window.width());
    let mut k_max = 16.0;
    let samples = loop {
        let j_max = (k_max / dk).ceil() as usize;
        let samples: Vec<Complex64> = (0..=j_max)
            .map(|j| fhat(j as f64 * dk, omega_q, a, 1e-12).value)
            .collect();
        // estimate the tail from the decay over the last octave
        let half = j_max / 2;
        let tail_sup = samples[half..]
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.norm()));
        if tail_sup * k_max < 1e-8 || k_max >= 4096.0 {
            break samples;
        }
        k_max *= 2.0;
    };
    Ok(inverse_fourier_on_grid(window, grid_size, dk, &samples))
}

/// The same density by the convolution cascade of normalized indicators
/// 1_{A^N Omega_Q} / vol(A^N Omega_Q), N = 0..n_factors, on an oversampled
/// grid. Independent of the Fourier route.
pub fn convolution_cascade(
    window: &Window,
    omega_q: &Window,
    a: f64,
    grid_size: usize,
    n_factors: usize,
) -> Result<DensityProfile> {
    if !(a.abs() < 1.0) || a == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "contraction a = {a} must satisfy 0 < |a| < 1"
        )));
    }
    if n_factors < 2 {
        return Err(Error::InvalidParameter(
            "cascade needs at least 2 factors".into(),
        ));
    }
    // centers and half-widths of A^N Omega_Q
    let factors: Vec<(f64, f64)> = (0..n_factors)
        .map(|n| {
            let s = a.powi(n as i32);
            (s * omega_q.midpoint(), (s * omega_q.half_width()).abs())
        })
        .collect();

    let fine_n = (grid_size * 8).min(65537);
    let mut fine = DensityProfile::zeros(*window, fine_n);

    // closed-form convolution of the first two indicators: a trapezoid
    let (c0, w0) = factors[0];
    let (c1, w1) = factors[1];
    let c = c0 + c1;
    let big = w0.max(w1);
    let small = w0.min(w1);
    let height = 1.0 / (2.0 * big);
    for j in 0..fine_n {
        let x = fine.x(j) - c;
        let ax = x.abs();
        fine.values[j] = if ax <= big - small {
            height
        } else if ax < big + small {
            height * (big + small - ax) / (2.0 * small)
        } else {
            0.0
        };
    }

    for &(cn, wn) in &factors[2..] {
        let anti = Antiderivative::new(&fine);
        let mut next = DensityProfile::zeros(*window, fine_n);
        for j in 0..fine_n {
            let x = next.x(j);
            next.values[j] = (anti.eval(x - cn + wn) - anti.eval(x - cn - wn)) / (2.0 * wn);
        }
        fine = next;
    }

    Ok(DensityProfile::from_fn(*window, grid_size, |x| fine.eval(x)))
}

/// One point of the refinement-operator spectrum {alpha^a}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub eigenvalue: Complex64,
    pub multiplicity: usize,
    pub multi_index: Vec<usize>,
}

/// All products alpha^a over multi-indices with |a| <= max_total_degree,
/// grouped by equal value (tolerance 1e-12) with multiplicities.
pub fn spectrum(
    eigenvalues_of_a: &[Complex64],
    max_total_degree: usize,
) -> Result<Vec<SpectrumEntry>> {
    for alpha in eigenvalues_of_a {
        let m = alpha.norm();
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::EigenvalueOutOfRange(m));
        }
    }
    let n = eigenvalues_of_a.len();
    let mut indices: Vec<Vec<usize>> = Vec::new();
    let mut current = vec![0usize; n];
    fill_simplex(&mut indices, &mut current, 0, max_total_degree);

    let mut entries: Vec<SpectrumEntry> = Vec::new();
    'outer: for idx in indices {
        let value = idx
            .iter()
            .zip(eigenvalues_of_a)
            .fold(Complex64::new(1.0, 0.0), |acc, (&e, &alpha)| {
                acc * alpha.powu(e as u32)
            });
        for e in entries.iter_mut() {
            if (e.eigenvalue - value).norm() < 1e-12 {
                e.multiplicity += 1;
                continue 'outer;
            }
        }
        entries.push(SpectrumEntry {
            eigenvalue: value,
            multiplicity: 1,
            multi_index: idx,
        });
    }
    entries.sort_by(|x, y| {
        y.eigenvalue
            .norm()
            .partial_cmp(&x.eigenvalue.norm())
            .unwrap()
            .then(x.eigenvalue.arg().partial_cmp(&y.eigenvalue.arg()).unwrap())
    });
    Ok(entries)
}

fn fill_simplex(out: &mut Vec<Vec<usize>>, current: &mut Vec<usize>, pos: usize, budget: usize) {
    if pos == current.len() {
        out.push(current.clone());
        return;
    }
    for e in 0..=budget {
        current[pos] = e;
        fill_simplex(out, current, pos + 1, budget - e);
    }
    current[pos] = 0;
}

/// The order-th derivative of f, computed in Fourier space: multiply the
/// numerical transform by (2 pi i k)^order and invert. The k-range is cut
/// where |f^| reaches the quadrature noise floor so the multiplier does not
/// amplify round-off.
pub fn eigenfunction(profile: &DensityProfile, order: usize) -> DensityProfile {
    let dk = 1.0 / (4.0 * profile.window.width());
    let k_max = 256.0;
    let j_max = (k_max / dk).ceil() as usize;
    let raw: Vec<Complex64> = (0..=j_max)
        .map(|j| profile_ft(profile, j as f64 * dk))
        .collect();
    let noise_floor = 1e-13 * profile.sup_norm().max(1.0);
    let mut j_eff = raw.len() - 1;
    while j_eff > 1 && raw[j_eff].norm() < noise_floor {
        j_eff -= 1;
    }
    let samples: Vec<Complex64> = raw[..=j_eff]
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let k = j as f64 * dk;
            let ik = Complex64::new(0.0, 2.0 * std::f64::consts::PI * k);
            ik.powu(order as u32) * f
        })
        .collect();
    inverse_fourier_on_grid(&profile.window, profile.grid_size(), dk, &samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inflation::{omega_q, translations, Inflation};
    use crate::ring::{QuadraticRing, RingElement};

    fn golden() -> QuadraticRing {
        QuadraticRing::golden()
    }

    fn setup() -> (QuadraticRing, Window, Window, f64) {
        let g = golden();
        let w = Window::new(-1.0, 1.0).unwrap();
        let inf = Inflation::new(&g, RingElement::Q).unwrap();
        let oq = omega_q(&w, inf.a_contraction).unwrap();
        (g, w, oq, inf.a_contraction)
    }

    #[test]
    fn fhat_at_zero_is_one() {
        let (_, _, oq, a) = setup();
        let v = fhat(0.0, &oq, a, 1e-12);
        assert_eq!(v.value, Complex64::new(1.0, 0.0));
        assert_eq!(v.terms_used, 0);
    }

    #[test]
    fn fhat_matches_golden_sinc_product() {
        // f^(k) = prod_{N=2}^inf sinc(2 pi k / tau^N) for q = tau
        let (g, _, oq, a) = setup();
        let tau = g.q_value;
        for &k in &[0.5, 1.0, 2.0] {
            let generic = fhat(k, &oq, a, 1e-13).value;
            let mut closed = 1.0;
            for n in 2..=40 {
                closed *= sinc(2.0 * std::f64::consts::PI * k / tau.powi(n));
            }
            assert!(
                (generic - Complex64::new(closed, 0.0)).norm() < 1e-12,
                "k={k}: {generic} vs {closed}"
            );
        }
    }

    #[test]
    fn normalized_indicator_transform_is_sinc() {
        // (1/2a) 1^_{[-a,a]}(k) = sin(2 pi a k)/(2 pi a k)
        let w = Window::new(-0.3, 0.3).unwrap();
        for &k in &[0.1, 0.7, 2.3] {
            let lhs = indicator_ft(&w, k);
            let rhs = sinc(2.0 * std::f64::consts::PI * 0.3 * k);
            assert!((lhs - Complex64::new(rhs, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn fhat_modulus_bounded_by_one() {
        let (_, _, oq, a) = setup();
        for j in 0..200 {
            let k = 0.1 * j as f64;
            assert!(fhat(k, &oq, a, 1e-12).value.norm() <= 1.0 + 1e-12);
        }
    }

    fn golden_density(grid: usize) -> DensityProfile {
        let (_, w, oq, a) = setup();
        invariant_density(&w, &oq, a, grid).unwrap()
    }

    #[test]
    fn invariant_density_axioms() {
        let f = golden_density(4096);
        assert!((f.integral() - 1.0).abs() < 1e-6, "integral {}", f.integral());
        assert!(f.min_value() >= -1e-9, "min {}", f.min_value());
        assert!(f.values[0].abs() < 1e-6);
        assert!(f.values[4095].abs() < 1e-6);
        // even
        for j in 0..4096 {
            assert!((f.values[j] - f.values[4095 - j]).abs() < 1e-8);
        }
    }

    #[test]
    fn invariant_density_support_in_window() {
        // support reaches but does not exceed Omega: check f vanishes on a
        // wider window outside [-1, 1]
        let (_, _, oq, a) = setup();
        let wide = Window::new(-1.5, 1.5).unwrap();
        let f = invariant_density(&wide, &oq, a, 4096).unwrap();
        for j in 0..4096 {
            let x = f.x(j);
            if x.abs() > 1.0 + 1e-3 {
                assert!(f.values[j].abs() < 1e-6, "f({x}) = {}", f.values[j]);
            }
        }
    }

    #[test]
    fn cascade_agrees_with_fourier_route() {
        let (_, w, oq, a) = setup();
        let f1 = golden_density(4096);
        let f2 = convolution_cascade(&w, &oq, a, 4096, 20).unwrap();
        let d = f1.sup_distance(&f2);
        assert!(d < 1e-6, "sup distance {d}");
    }

    #[test]
    fn zero_input_stays_zero() {
        let (g, w, oq, a) = setup();
        let inf = Inflation::new(&g, RingElement::Q).unwrap();
        let t = translations(&g, &w, &inf, 100.0).unwrap();
        let zero = DensityProfile::zeros(w, 512);
        assert_eq!(average_direct(&zero, &t).sup_norm(), 0.0);
        assert_eq!(refinement_integral(&zero, &oq, a).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn averaging_fixes_invariant_density() {
        let (g, w, _, _) = setup();
        let inf = Inflation::new(&g, RingElement::Q).unwrap();
        let f = golden_density(2048);
        // s with at least 200 translations
        let t = translations(&g, &w, &inf, 300.0).unwrap();
        assert!(t.len() >= 200, "#T = {}", t.len());
        let af = average_direct(&f, &t);
        let rel = af.sup_distance(&f) / f.sup_norm();
        assert!(rel <= 0.05, "relative residual {rel}");
    }

    #[test]
    fn flat_input_plateau_matches_integral_route() {
        let (g, w, oq, a) = setup();
        let inf = Inflation::new(&g, RingElement::Q).unwrap();
        let t = translations(&g, &w, &inf, 1000.0).unwrap();
        let flat = DensityProfile::flat(w, 2048);
        let direct = average_direct(&flat, &t);
        let integral = refinement_integral(&flat, &oq, a).unwrap();
        let d = direct.sup_distance(&integral);
        assert!(d < 1e-2, "sup distance {d}");
    }

    #[test]
    fn refinement_preserves_integral() {
        let (_, w, oq, a) = setup();
        let f = DensityProfile::from_fn(w, 4096, |x| (1.0 - x * x).powi(2) * (1.0 + 0.3 * x));
        let norm = f.integral();
        let af = refinement_integral(&f, &oq, a).unwrap();
        assert!((af.integral() - norm).abs() < 1e-6 * norm.abs());
    }

    #[test]
    fn kernel_support_annihilates_outside_input() {
        // input supported outside A Omega + Omega_Q maps to 0
        let (_, _, oq, a) = setup();
        let w = Window::new(-3.0, 3.0).unwrap();
        // bump supported in [2.0, 2.8]: far outside a*Omega + Omega_Q
        let f = DensityProfile::from_fn(w, 4096, |x| {
            if (2.0..=2.8).contains(&x) {
                let t = (x - 2.4) / 0.4;
                (1.0 - t * t).max(0.0)
            } else {
                0.0
            }
        });
        let af = refinement_integral(&f, &oq, a).unwrap();
        // the image is supported in a * [2.0, 2.8] + Omega_Q and nowhere else
        let lo = (a * 2.0).min(a * 2.8) + oq.lo;
        let hi = (a * 2.0).max(a * 2.8) + oq.hi;
        let step = af.step();
        let mut support_mass = 0.0;
        for j in 0..4096 {
            let x = af.x(j);
            if x >= lo - step && x <= hi + step {
                support_mass += af.values[j].abs();
                continue;
            }
            assert!(af.values[j].abs() < 1e-12, "leak at x = {x}");
        }
        assert!(support_mass > 0.0, "image vanished entirely");
    }

    #[test]
    fn three_operator_forms_agree() {
        let (g, w, oq, a) = setup();
        let inf = Inflation::new(&g, RingElement::Q).unwrap();
        let t = translations(&g, &w, &inf, 1000.0).unwrap();
        let smooth = DensityProfile::from_fn(w, 2048, |x| {
            (1.0 - x * x).powi(3) * (1.0 + 0.5 * (3.0 * x).sin())
        });
        let d1 = average_direct(&smooth, &t);
        let d2 = refinement_integral(&smooth, &oq, a).unwrap();
        let d3 = refinement_fourier(&smooth, &oq, a).unwrap();
        assert!(d1.sup_distance(&d2) < 1e-2);
        assert!(d2.sup_distance(&d3) < 1e-2);
        assert!(d1.sup_distance(&d3) < 1e-2);
    }

    #[test]
    fn golden_spectrum_degree_four() {
        let (g, _, _, _) = setup();
        let alpha = Complex64::new(RingElement::Q.star(&g), 0.0);
        let entries = spectrum(&[alpha], 4).unwrap();
        assert_eq!(entries.len(), 5);
        let tau = g.q_value;
        for (i, e) in entries.iter().enumerate() {
            let expect = (-1.0 / tau).powi(i as i32);
            assert!((e.eigenvalue.re - expect).abs() < 1e-12);
            assert!(e.eigenvalue.im.abs() < 1e-15);
            assert_eq!(e.multiplicity, 1);
        }
    }

    #[test]
    fn repeated_eigenvalue_multiplicities_are_binomial() {
        // n = 2, equal alpha: mult(alpha^j) = j + 1
        let alpha = Complex64::new(0.5, 0.0);
        let entries = spectrum(&[alpha, alpha], 4).unwrap();
        assert_eq!(entries.len(), 5);
        for (j, e) in entries.iter().enumerate() {
            assert_eq!(e.multiplicity, j + 1, "j = {j}");
        }
    }

    #[test]
    fn degree_zero_spectrum() {
        let entries = spectrum(&[Complex64::new(0.3, 0.0)], 0).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].eigenvalue, Complex64::new(1.0, 0.0));
        assert_eq!(entries[0].multiplicity, 1);
    }

    #[test]
    fn spectrum_rejects_large_eigenvalue() {
        assert!(spectrum(&[Complex64::new(1.0, 0.0)], 2).is_err());
        assert!(spectrum(&[Complex64::new(0.0, 0.0)], 2).is_err());
    }

    #[test]
    fn spectrum_closed_under_multiplication() {
        let alpha = Complex64::new(-0.618, 0.0);
        let entries = spectrum(&[alpha], 5).unwrap();
        let values: Vec<Complex64> = entries.iter().map(|e| e.eigenvalue).collect();
        for v in &values {
            let w = v * alpha;
            if w.norm() >= alpha.norm().powi(5) - 1e-12 {
                assert!(
                    values.iter().any(|u| (u - w).norm() < 1e-9),
                    "{w} missing"
                );
            }
        }
    }

    #[test]
    fn first_derivative_is_odd() {
        let f = golden_density(2048);
        let df = eigenfunction(&f, 1);
        let n = df.values.len();
        for j in 0..n {
            assert!(
                (df.values[j] + df.values[n - 1 - j]).abs() < 1e-6 * df.sup_norm(),
                "not odd at {j}"
            );
        }
    }

    #[test]
    fn derivative_eigen_relation() {
        let (g, w, _, _) = setup();
        let inf = Inflation::new(&g, RingElement::Q).unwrap();
        let alpha = inf.a_contraction;
        let f = golden_density(2048);
        let t = translations(&g, &w, &inf, 300.0).unwrap();
        for order in 1..=3 {
            let u = eigenfunction(&f, order);
            let au = average_direct(&u, &t);
            let mut resid = 0.0_f64;
            for j in 0..u.values.len() {
                resid = resid.max((au.values[j] - alpha.powi(order as i32) * u.values[j]).abs());
            }
            let rel = resid / u.sup_norm();
            let tol = 0.05 * 2.0_f64.powi(order as i32);
            assert!(rel <= tol, "order {order}: rel residual {rel} > {tol}");
        }
    }

    #[test]
    fn derivative_node_counts() {
        let f = golden_density(2048);
        for order in 1..=4 {
            let u = eigenfunction(&f, order);
            assert_eq!(u.sign_changes(1e-4), order, "order {order}");
        }
    }

    #[test]
    fn density_sequence_approaches_flat() {
        // inflation factors tau, tau^2, tau^3, tau^4
        let (g, w, _, _) = setup();
        let flat = DensityProfile::flat(w, 1024);
        let mut power = RingElement::Q;
        let mut dists = Vec::new();
        for _ in 0..4 {
            let a = power.star(&g);
            let oq = omega_q(&w, a).unwrap();
            let f = invariant_density(&w, &oq, a, 1024).unwrap();
            dists.push(f.sup_distance(&flat));
            power = g.mul(power, RingElement::Q).unwrap();
        }
        for i in 1..dists.len() {
            assert!(dists[i] < dists[i - 1], "{dists:?} not decreasing");
        }
    }
}
