//! Job configuration: a small `key = value` file format plus validation.
//! CLI flags override file values; every parameter has a default tuned for
//! the golden-ratio example.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::inflation::Inflation;
use crate::modelset::Window;
use crate::ring::{QuadraticRing, RingElement};

#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    /// Ring coefficients: q^2 = p q + r.
    pub p: i64,
    pub r: i64,
    /// Acceptance window in internal space.
    pub window_lo: f64,
    pub window_hi: f64,
    /// Inflation multiplier Q = qa + qb * q.
    pub qa: i64,
    pub qb: i64,
    /// Half-width of the physical-space sampling interval.
    pub radius: f64,
    /// Grid size for density profiles.
    pub grid: usize,
    /// Bin count for binned measures.
    pub bins: usize,
    /// Fourier truncation tolerance.
    pub tol: f64,
    /// Fixed-point iteration tolerance.
    pub fp_tol: f64,
    pub max_iter: usize,
    /// Max |k| and |k_star| when enumerating Fourier module points.
    pub k_max: f64,
    pub k_star_max: f64,
    /// Patch radius for neighborhood queries.
    pub patch_radius: f64,
    /// Powers of Q for multi-panel density figures.
    pub powers: Vec<u32>,
    /// Radii ladder for convergence tables.
    pub s_ladder: Vec<f64>,
    /// Spectrum degree bound.
    pub degree: u32,
    /// Derivative order for eigenfunctions.
    pub order: u32,
    /// Number of chaos-game points.
    pub chaos_points: usize,
}

impl Default for JobConfig {
    fn default() -> Self {
        JobConfig {
            p: 1,
            r: 1,
            window_lo: -1.0,
            window_hi: 1.0,
            qa: 0,
            qb: 1,
            radius: 300.0,
            grid: 1024,
            bins: 256,
            tol: 1e-12,
            fp_tol: 1e-10,
            max_iter: 10_000,
            k_max: 6.0,
            k_star_max: 6.0,
            patch_radius: 2.0,
            powers: vec![1, 2, 3, 4],
            s_ladder: vec![5.0, 10.0, 20.0, 50.0],
            degree: 4,
            order: 1,
            chaos_points: 200_000,
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::Config(format!("invalid list entry {s:?} for key {key}")))
        })
        .collect()
}

impl JobConfig {
    /// Parse `key = value` lines; `#` starts a comment, blank lines ignored.
    pub fn from_str(text: &str) -> Result<Self> {
        let mut cfg = JobConfig::default();
        let mut seen = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.insert(key.to_string(), n).is_some() {
                return Err(Error::Config(format!("duplicate key {key:?}")));
            }
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse::<T>()
                .map_err(|_| Error::Config(format!("invalid value {v:?} for key {key}")))
        }
        match key {
            "p" => self.p = num(key, value)?,
            "r" => self.r = num(key, value)?,
            "window_lo" => self.window_lo = num(key, value)?,
            "window_hi" => self.window_hi = num(key, value)?,
            "qa" => self.qa = num(key, value)?,
            "qb" => self.qb = num(key, value)?,
            "radius" => self.radius = num(key, value)?,
            "grid" => self.grid = num(key, value)?,
            "bins" => self.bins = num(key, value)?,
            "tol" => self.tol = num(key, value)?,
            "fp_tol" => self.fp_tol = num(key, value)?,
            "max_iter" => self.max_iter = num(key, value)?,
            "k_max" => self.k_max = num(key, value)?,
            "k_star_max" => self.k_star_max = num(key, value)?,
            "patch_radius" => self.patch_radius = num(key, value)?,
            "powers" => self.powers = parse_list(key, value)?,
            "s_ladder" => self.s_ladder = parse_list(key, value)?,
            "degree" => self.degree = num(key, value)?,
            "order" => self.order = num(key, value)?,
            "chaos_points" => self.chaos_points = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Validate and build the derived objects used by every command.
    pub fn build(&self) -> Result<(QuadraticRing, Window, Inflation)> {
        let ring = QuadraticRing::new(self.p, self.r)
            .map_err(|e| Error::Config(format!("ring: {e}")))?;
        let window = Window::new(self.window_lo, self.window_hi)
            .map_err(|e| Error::Config(format!("window: {e}")))?;
        if !(window.lo < 0.0 && window.hi > 0.0) {
            return Err(Error::Config(
                "window must contain 0 in its interior".into(),
            ));
        }
        let q = RingElement::new(self.qa, self.qb);
        let inflation =
            Inflation::new(&ring, q).map_err(|e| Error::Config(format!("inflation: {e}")))?;
        if self.radius <= 0.0 || !self.radius.is_finite() {
            return Err(Error::Config("radius must be positive and finite".into()));
        }
        if self.grid < 8 {
            return Err(Error::Config("grid must be at least 8".into()));
        }
        if self.bins < 2 {
            return Err(Error::Config("bins must be at least 2".into()));
        }
        if !(self.tol > 0.0) || !(self.fp_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.powers.is_empty() || self.powers.iter().any(|&n| n == 0 || n > 24) {
            return Err(Error::Config("powers must be nonempty, each in 1..=24".into()));
        }
        if self.s_ladder.iter().any(|&s| s <= 0.0) {
            return Err(Error::Config("s_ladder entries must be positive".into()));
        }
        Ok((ring, window, inflation))
    }
}
