//! CSV/JSON/SVG serialization. CSV uses '.' decimals, no locale, and floats
//! printed with 17 significant digits for round-trip fidelity. Files are
//! written atomically (temp + rename).

use std::path::Path;

use crate::density::{DensityProfile, FourierProductValue, SpectrumEntry};
use crate::diffraction::BraggPeak;
use crate::error::Result;
use crate::hutchinson::{BinnedMeasure, WeakConvergenceRow};
use crate::inflation::TranslationSet;
use crate::modelset::ModelSetSample;

/// 17 significant digits: enough to reparse the exact f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default()
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn sample_to_csv(sample: &ModelSetSample) -> String {
    let ring = &sample.ring;
    let mut out = String::from("a,b,value,star_value\n");
    for x in &sample.points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            x.a,
            x.b,
            fmt_f64(x.value(ring)),
            fmt_f64(x.star(ring))
        ));
    }
    out
}

pub fn translations_to_csv(t: &TranslationSet) -> String {
    let q = t.inflation.q_factor;
    let mut out = format!(
        "# q = {} + {}q (value {})\n# omega_q = [{}, {}]\n",
        q.a,
        q.b,
        fmt_f64(t.inflation.q_value()),
        fmt_f64(t.omega_q.lo),
        fmt_f64(t.omega_q.hi)
    );
    out.push_str(&sample_to_csv(&t.sample));
    out
}

pub fn profile_to_csv(profile: &DensityProfile) -> String {
    let mut out = String::from("x,value\n");
    for (j, v) in profile.values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", fmt_f64(profile.x(j)), fmt_f64(*v)));
    }
    out
}

pub fn fourier_values_to_csv(values: &[FourierProductValue]) -> String {
    let mut out = String::from("k,re,im,terms,bound\n");
    for v in values {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(v.k),
            fmt_f64(v.value.re),
            fmt_f64(v.value.im),
            v.terms_used,
            fmt_f64(v.truncation_bound)
        ));
    }
    out
}

pub fn spectrum_to_csv(entries: &[SpectrumEntry], residuals: Option<&[f64]>) -> String {
    let mut out = String::from("re,im,multiplicity,multi_index,residual\n");
    for (i, e) in entries.iter().enumerate() {
        let idx = e
            .multi_index
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let resid = residuals
            .and_then(|r| r.get(i))
            .map(|r| fmt_f64(*r))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(e.eigenvalue.re),
            fmt_f64(e.eigenvalue.im),
            e.multiplicity,
            idx,
            resid
        ));
    }
    out
}

pub fn bragg_to_csv(peaks: &[BraggPeak]) -> String {
    let mut out = String::from("k,k_star,re,im,intensity\n");
    for p in peaks {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(p.k),
            fmt_f64(p.k_star),
            fmt_f64(p.amplitude.re),
            fmt_f64(p.amplitude.im),
            fmt_f64(p.intensity)
        ));
    }
    out
}

pub fn measure_to_csv(mu: &BinnedMeasure) -> String {
    let mut out = String::from("bin_center,mass\n");
    for (j, m) in mu.masses.iter().enumerate() {
        out.push_str(&format!("{},{}\n", fmt_f64(mu.bin_center(j)), fmt_f64(*m)));
    }
    out
}

pub fn convergence_to_csv(rows: &[WeakConvergenceRow], labels: &[&str]) -> String {
    let mut out = String::from("s,n_maps");
    for l in labels {
        out.push_str(&format!(",err_{l}"));
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format!("{},{}", fmt_f64(row.s), row.n_maps));
        for e in &row.errors {
            out.push_str(&format!(",{}", fmt_f64(*e)));
        }
        out.push('\n');
    }
    out
}

// ---- SVG plots (self-contained, inline styles) ----

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 240.0;
const MARGIN: f64 = 32.0;

fn svg_header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    )
}

fn panel_polyline(
    xs: &[f64],
    ys: &[f64],
    x0: f64,
    y0: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    color: &str,
) -> String {
    let sx = |x: f64| x0 + MARGIN + (x - x_range.0) / (x_range.1 - x_range.0) * (PANEL_W - 2.0 * MARGIN);
    let sy = |y: f64| y0 + PANEL_H - MARGIN - (y - y_range.0) / (y_range.1 - y_range.0) * (PANEL_H - 2.0 * MARGIN);
    let pts: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"/>\n",
        pts.join(" ")
    )
}

fn panel_frame(x0: f64, y0: f64, title: &str) -> String {
    format!(
        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#444\" stroke-width=\"0.8\"/>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">{title}</text>\n",
        x0 + MARGIN,
        y0 + MARGIN,
        PANEL_W - 2.0 * MARGIN,
        PANEL_H - 2.0 * MARGIN,
        x0 + MARGIN,
        y0 + MARGIN - 8.0,
    )
}

/// Multi-panel line plot of profiles, two panels per row.
pub fn svg_profiles(panels: &[(String, &DensityProfile)]) -> String {
    let cols = 2usize;
    let rows = panels.len().div_ceil(cols);
    let mut out = svg_header(cols as f64 * PANEL_W, rows as f64 * PANEL_H);
    for (i, (title, profile)) in panels.iter().enumerate() {
        let x0 = (i % cols) as f64 * PANEL_W;
        let y0 = (i / cols) as f64 * PANEL_H;
        let xs: Vec<f64> = (0..profile.grid_size()).map(|j| profile.x(j)).collect();
        let y_min = profile.min_value().min(0.0);
        let y_max = profile.values.iter().fold(0.0_f64, |m, v| m.max(*v)).max(y_min + 1e-12);
        out.push_str(&panel_frame(x0, y0, title));
        out.push_str(&panel_polyline(
            &xs,
            &profile.values,
            x0,
            y0,
            (profile.window.lo, profile.window.hi),
            (y_min, y_max * 1.05),
            "#1f5fa8",
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Stem plot of Bragg intensities.
pub fn svg_stems(peaks: &[BraggPeak], title: &str) -> String {
    let mut out = svg_header(2.0 * PANEL_W, 1.5 * PANEL_H);
    let (w, h) = (2.0 * PANEL_W, 1.5 * PANEL_H);
    let k_min = peaks.iter().map(|p| p.k).fold(f64::INFINITY, f64::min);
    let k_max = peaks.iter().map(|p| p.k).fold(f64::NEG_INFINITY, f64::max);
    let i_max = peaks.iter().map(|p| p.intensity).fold(1e-12, f64::max);
    let sx = |k: f64| MARGIN + (k - k_min) / (k_max - k_min) * (w - 2.0 * MARGIN);
    let sy = |i: f64| h - MARGIN - i / i_max * (h - 2.0 * MARGIN);
    out.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"18\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">{title}</text>\n"
    ));
    out.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#444\" stroke-width=\"0.8\"/>\n",
        MARGIN,
        sy(0.0),
        w - MARGIN,
        sy(0.0)
    ));
    for p in peaks {
        out.push_str(&format!(
            "<line x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{0:.2}\" y2=\"{2:.2}\" stroke=\"#a83232\" stroke-width=\"1.0\"/>\n",
            sx(p.k),
            sy(0.0),
            sy(p.intensity)
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Histogram of a binned measure.
pub fn svg_histogram(mu: &BinnedMeasure, title: &str) -> String {
    let mut out = svg_header(2.0 * PANEL_W, 1.5 * PANEL_H);
    let (w, h) = (2.0 * PANEL_W, 1.5 * PANEL_H);
    let m_max = mu.masses.iter().fold(1e-300, |a: f64, &b| a.max(b));
    let bw = (w - 2.0 * MARGIN) / mu.bins() as f64;
    out.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"18\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">{title}</text>\n"
    ));
    for (j, &m) in mu.masses.iter().enumerate() {
        let bh = m / m_max * (h - 2.0 * MARGIN);
        out.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#3a7d44\"/>\n",
            MARGIN + j as f64 * bw,
            h - MARGIN - bh,
            bw.max(0.5),
            bh
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelset::{generate, Window};
    use crate::ring::QuadraticRing;

    #[test]
    fn csv_floats_roundtrip() {
        let x = std::f64::consts::PI * 1e-7;
        let s = fmt_f64(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn sample_json_roundtrip() {
        let g = QuadraticRing::golden();
        let sample = generate(&g, &Window::new(-1.0, 1.0).unwrap(), 20.0).unwrap();
        let json = serde_json::to_string(&sample).unwrap();
        let back: ModelSetSample = serde_json::from_str(&json).unwrap();
        assert_eq!(back.points, sample.points);
        assert_eq!(back.radius, sample.radius);
    }

    #[test]
    fn sample_csv_has_expected_first_rows() {
        let g = QuadraticRing::golden();
        let sample = generate(&g, &Window::new(-1.0, 1.0).unwrap(), 3.0).unwrap();
        let csv = sample_to_csv(&sample);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "a,b,value,star_value");
        assert_eq!(lines.len(), 1 + sample.points.len());
        assert!(lines[1..].iter().any(|l| l.starts_with("0,0,")));
        // every data row has exactly four fields
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 4));
    }

    #[test]
    fn atomic_write_creates_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("x.csv");
        write_atomic(&path, b"hello").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "hello");
    }
}
