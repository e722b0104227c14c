use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ring x^2 = {p}x + {r} has discriminant {disc} which is not a positive non-square")]
    InvalidRing { p: i64, r: i64, disc: i64 },

    #[error("integer overflow in ring arithmetic ({context})")]
    Overflow { context: &'static str },

    #[error("coefficient enumeration bounds exceed i64 range (radius too large)")]
    EnumerationOverflow,

    #[error("window empty: lo {lo} >= hi {hi}")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("inflation factor not compatible with the window: Omega_Q has empty interior ([{lo}, {hi}])")]
    NotCompatible { lo: f64, hi: f64 },

    #[error("inflation factor {a} + {b}q is not a unit of the ring (norm {norm})")]
    NotAUnit { a: i64, b: i64, norm: i64 },

    #[error("|q| = {value} must exceed 1 and |q*| = {star} must be below 1 for an inflation")]
    NotAnInflation { value: f64, star: f64 },

    #[error("point k = {k} is not on the Fourier module (dual pairing not integral)")]
    NotOnModule { k: f64 },

    #[error("patch_radius + search_radius = {needed} exceeds sample radius {radius}")]
    PatchExceedsSample { needed: f64, radius: f64 },

    #[error("eigenvalue {0} has modulus outside (0, 1)")]
    EigenvalueOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fixed-point iteration did not converge after {iterations} steps (last L1 distance {last_distance:e})")]
    MaxIterExceeded { iterations: usize, last_distance: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
