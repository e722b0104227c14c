//! Exponential-sum amplitudes g_s, h_s over T_s and Lambda_s, their Weyl
//! limits on the Fourier module, the product formula h(k) = prod g((Q^t)^N k),
//! and Bragg intensities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{sinc, DensityProfile};
use crate::error::Result;
use crate::inflation::TranslationSet;
use crate::modelset::{ModelSetSample, Window};
use crate::ring::FourierModulePoint;

/// Value of an exponential-sum amplitude at a point k, with its intensity.
/// `s_used` records the cutoff radius of the finite sum; `None` marks a
/// closed-form Weyl limit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectralAmplitude {
    pub k: f64,
    pub value: Complex64,
    pub s_used: Option<f64>,
    pub intensity: f64,
}

impl SpectralAmplitude {
    fn new(k: f64, value: Complex64, s_used: Option<f64>) -> Self {
        SpectralAmplitude {
            k,
            value,
            s_used,
            intensity: value.norm_sqr(),
        }
    }
}

fn exp_minus_2pi_i(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * t)
}

/// g_s(k) = (1/#T_s) sum_v e^{-2 pi i k v}.
pub fn g_s(translations: &TranslationSet, k: f64) -> SpectralAmplitude {
    assert!(!translations.is_empty());
    let vals = translations.values();
    let sum: Complex64 = vals.iter().map(|&v| exp_minus_2pi_i(k * v)).sum();
    SpectralAmplitude::new(
        k,
        sum / vals.len() as f64,
        Some(translations.sample.radius),
    )
}

/// h_s(k) = (1/#Lambda_s) sum_w p(w) e^{-2 pi i k w}, with weights
/// p(w) = vol(Omega) f(w*) from the internal-space profile f.
pub fn h_s(sample: &ModelSetSample, weights: &DensityProfile, k: f64) -> SpectralAmplitude {
    assert!(!sample.points.is_empty());
    let vol = sample.window.width();
    let sum: Complex64 = sample
        .points
        .iter()
        .map(|x| {
            let p = vol * weights.eval(x.star(&sample.ring));
            p * exp_minus_2pi_i(k * x.value(&sample.ring))
        })
        .sum();
    SpectralAmplitude::new(k, sum / sample.points.len() as f64, Some(sample.radius))
}

/// The Weyl limit of g_s at an exact module point: by the dual pairing
/// k.v = -k_star.v* (mod 1), the sum becomes the internal-space integral
/// (1/vol(Omega_Q)) int_{Omega_Q} e^{+2 pi i k_star u} du, in closed form.
pub fn g_weyl(k: &FourierModulePoint, omega_q: &Window) -> SpectralAmplitude {
    SpectralAmplitude::new(k.k_value, interval_mean_exp(omega_q, k.k_star), None)
}

/// (1/(hi-lo)) int_lo^hi e^{+2 pi i kappa u} du.
fn interval_mean_exp(w: &Window, kappa: f64) -> Complex64 {
    let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * kappa * w.midpoint());
    phase * sinc(2.0 * std::f64::consts::PI * kappa * w.half_width())
}

/// h(k) = prod_{N=0}^inf g((Q^t)^N k): the module points (Q^t)^N k have
/// internal coordinates (A^t)^N k_star contracting to 0, so the product is
/// cut by the same certified rule as the density product.
pub fn h_product(
    k: &FourierModulePoint,
    omega_q: &Window,
    a: f64,
    tol: f64,
) -> Result<SpectralAmplitude> {
    let c = 2.0
        * std::f64::consts::PI
        * k.k_star.abs()
        * (omega_q.half_width() + omega_q.midpoint().abs());
    let abs_a = a.abs();
    let mut value = Complex64::new(1.0, 0.0);
    let mut kappa = k.k_star;
    let mut n = 0usize;
    while c * abs_a.powi(n as i32) >= tol && n < 400 {
        value *= interval_mean_exp(omega_q, kappa);
        kappa *= a;
        n += 1;
    }
    Ok(SpectralAmplitude::new(k.k_value, value, None))
}

/// Weighting mode for Bragg amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightsMode {
    /// Unweighted window: amplitude g.
    Flat,
    /// Invariant-density weights: amplitude h.
    Invariant,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BraggPeak {
    pub k: f64,
    pub k_star: f64,
    pub amplitude: Complex64,
    pub intensity: f64,
}

/// Intensities |amplitude|^2 over a module slice, sorted by k.
pub fn bragg_intensities(
    module_points: &[FourierModulePoint],
    omega_q: &Window,
    a: f64,
    mode: WeightsMode,
) -> Result<Vec<BraggPeak>> {
    let mut peaks = Vec::with_capacity(module_points.len());
    for k in module_points {
        let amp = match mode {
            WeightsMode::Flat => g_weyl(k, omega_q),
            WeightsMode::Invariant => h_product(k, omega_q, a, 1e-12)?,
        };
        peaks.push(BraggPeak {
            k: k.k_value,
            k_star: k.k_star,
            amplitude: amp.value,
            intensity: amp.intensity,
        });
    }
    peaks.sort_by(|x, y| x.k.partial_cmp(&y.k).unwrap());
    Ok(peaks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::fhat;
    use crate::inflation::{omega_q, translations, Inflation};
    use crate::modelset::generate;
    use crate::ring::{fourier_module_points, EmbeddingLattice, QuadraticRing, RingElement};

    fn golden() -> QuadraticRing {
        QuadraticRing::golden()
    }

    fn window() -> Window {
        Window::new(-1.0, 1.0).unwrap()
    }

    fn golden_translations(s: f64) -> TranslationSet {
        let g = golden();
        let inf = Inflation::new(&g, RingElement::Q).unwrap();
        translations(&g, &window(), &inf, s).unwrap()
    }

    #[test]
    fn g_s_at_zero_is_one() {
        let t = golden_translations(100.0);
        let amp = g_s(&t, 0.0);
        assert_eq!(amp.value, Complex64::new(1.0, 0.0));
        assert_eq!(amp.intensity, 1.0);
    }

    #[test]
    fn g_s_five_term_sum_at_k_one() {
        let g = golden();
        let t = golden_translations(5.0);
        assert_eq!(t.len(), 5);
        let tau = g.q_value;
        let two_pi = 2.0 * std::f64::consts::PI;
        let expect = (1.0
            + 2.0 * (two_pi * (1.0 + tau)).cos()
            + 2.0 * (two_pi * (1.0 + 2.0 * tau)).cos())
            / 5.0;
        let amp = g_s(&t, 1.0);
        assert!((amp.value.re - expect).abs() < 1e-12);
        assert!(amp.value.im.abs() < 1e-12);
    }

    #[test]
    fn g_s_bounded_by_one() {
        let t = golden_translations(200.0);
        for j in 0..50 {
            let k = 0.17 * j as f64;
            assert!(g_s(&t, k).value.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn hermitian_symmetry() {
        let t = golden_translations(200.0);
        for &k in &[0.3, 1.1, 2.7] {
            let plus = g_s(&t, k).value;
            let minus = g_s(&t, -k).value;
            assert!((minus - plus.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn g_weyl_at_zero_is_one() {
        let g = golden();
        let oq = omega_q(&window(), RingElement::Q.star(&g)).unwrap();
        let k0 = FourierModulePoint::zero(&g);
        assert_eq!(g_weyl(&k0, &oq).value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn g_weyl_symmetric_window_is_real_sinc() {
        let g = golden();
        let oq = omega_q(&window(), RingElement::Q.star(&g)).unwrap();
        let k = FourierModulePoint::new(RingElement::new(1, 1), &g);
        let amp = g_weyl(&k, &oq);
        let expect = sinc(2.0 * std::f64::consts::PI * k.k_star * oq.half_width());
        assert!((amp.value - Complex64::new(expect, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn weyl_convergence_of_g_s() {
        let g = golden();
        let oq = omega_q(&window(), RingElement::Q.star(&g)).unwrap();
        // smallest nonzero module point by |k|: (tau - 1)/sqrt5 direction;
        // take k = (0 + 1q)/sqrt5 ... use 1/sqrt5 itself
        let lat = EmbeddingLattice::new(g);
        let pts = fourier_module_points(&lat, 2.0, 2.0).unwrap();
        let k = pts
            .iter()
            .filter(|p| p.k_value > 1e-9)
            .min_by(|x, y| x.k_value.partial_cmp(&y.k_value).unwrap())
            .copied()
            .unwrap();
        let limit = g_weyl(&k, &oq).value;
        let d4 = (g_s(&golden_translations(1e4), k.k_value).value - limit).norm();
        assert!(d4 < 0.02, "d4 = {d4}");
        let d3 = (g_s(&golden_translations(1e3), k.k_value).value - limit).norm();
        assert!(d4 < d3, "no Weyl improvement: {d4} !< {d3}");
    }

    #[test]
    fn h_product_consistent_with_fhat() {
        let g = golden();
        let a = RingElement::Q.star(&g);
        let oq = omega_q(&window(), a).unwrap();
        let lat = EmbeddingLattice::new(g);
        let pts = fourier_module_points(&lat, 3.0, 2.0).unwrap();
        let mut tested = 0;
        for k in pts.iter().filter(|p| p.k_value.abs() > 1e-9).take(5) {
            let h = h_product(k, &oq, a, 1e-13).unwrap().value;
            // h(k) = f^ at the opposite internal coordinate
            let f = fhat(-k.k_star, &oq, a, 1e-13).value;
            assert!((h - f).norm() < 1e-10, "k={}: {h} vs {f}", k.k_value);
            tested += 1;
        }
        assert_eq!(tested, 5);
    }

    #[test]
    fn h_s_converges_to_h_product() {
        let g = golden();
        let a = RingElement::Q.star(&g);
        let oq = omega_q(&window(), a).unwrap();
        let f = crate::density::invariant_density(&window(), &oq, a, 2048).unwrap();
        let sample = generate(&g, &window(), 1e4).unwrap();
        let lat = EmbeddingLattice::new(g);
        let pts = fourier_module_points(&lat, 3.0, 2.0).unwrap();
        for k in pts.iter().filter(|p| p.k_value.abs() > 1e-9).take(5) {
            let finite = h_s(&sample, &f, k.k_value).value;
            let limit = h_product(k, &oq, a, 1e-12).unwrap().value;
            assert!(
                (finite - limit).norm() < 0.03,
                "k={}: |{finite} - {limit}|",
                k.k_value
            );
        }
    }

    #[test]
    fn h_s_at_zero_approaches_one() {
        let g = golden();
        let a = RingElement::Q.star(&g);
        let oq = omega_q(&window(), a).unwrap();
        let f = crate::density::invariant_density(&window(), &oq, a, 2048).unwrap();
        let sample = generate(&g, &window(), 1e4).unwrap();
        let amp = h_s(&sample, &f, 0.0);
        assert!((amp.value.re - 1.0).abs() < 0.01, "{}", amp.value.re);
        assert_eq!(amp.value.im, 0.0);
    }

    #[test]
    fn flat_weights_reduce_to_unweighted_sum() {
        let g = golden();
        let sample = generate(&g, &window(), 500.0).unwrap();
        let flat = DensityProfile::flat(window(), 256);
        let k = 0.7;
        let weighted = h_s(&sample, &flat, k).value;
        let unweighted: Complex64 = sample
            .values()
            .iter()
            .map(|&v| exp_minus_2pi_i(k * v))
            .sum::<Complex64>()
            / sample.points.len() as f64;
        assert!((weighted - unweighted).norm() < 1e-9);
    }

    #[test]
    fn off_module_amplitudes_decay() {
        let g = golden();
        let a = RingElement::Q.star(&g);
        let oq = omega_q(&window(), a).unwrap();
        let f = crate::density::invariant_density(&window(), &oq, a, 2048).unwrap();
        let sample4 = generate(&g, &window(), 1e4).unwrap();
        let sample3 = generate(&g, &window(), 1e3).unwrap();
        // irrational, off-module probes
        for &k in &[0.123456789, 0.77777, 1.414213, 2.89898, 3.33331] {
            let h4 = h_s(&sample4, &f, k).value.norm();
            let h3 = h_s(&sample3, &f, k).value.norm();
            assert!(h4 < 0.05, "k={k}: {h4}");
            assert!(h4 < h3 + 0.01, "k={k}: no decay {h4} vs {h3}");
        }
    }

    #[test]
    fn bragg_support_inclusion_and_envelope() {
        let g = golden();
        let a = RingElement::Q.star(&g);
        let oq = omega_q(&window(), a).unwrap();
        let lat = EmbeddingLattice::new(g);
        let pts = fourier_module_points(&lat, 6.0, 4.0).unwrap();
        let flat = bragg_intensities(&pts, &oq, a, WeightsMode::Flat).unwrap();
        let inv = bragg_intensities(&pts, &oq, a, WeightsMode::Invariant).unwrap();
        // k = 0 intensity 1 in both modes
        let at_zero = |peaks: &[BraggPeak]| {
            peaks
                .iter()
                .find(|p| p.k.abs() < 1e-12)
                .map(|p| p.intensity)
                .unwrap()
        };
        assert!((at_zero(&flat) - 1.0).abs() < 1e-12);
        assert!((at_zero(&inv) - 1.0).abs() < 1e-12);
        // support(h) within support(g)
        for (pf, ph) in flat.iter().zip(&inv) {
            if ph.intensity > 1e-12 {
                assert!(pf.intensity > 1e-12, "h supported off g at k={}", ph.k);
            }
        }
        // sinc envelope: intensities bounded by the envelope in |k_star|
        for p in &flat {
            let x = 2.0 * std::f64::consts::PI * p.k_star.abs() * oq.half_width();
            let env = if x < 1.0 { 1.0 } else { 1.0 / (x * x) };
            assert!(p.intensity <= env + 1e-9);
        }
    }
}
