//! One-dimensional cut-and-project sets over real quadratic rings:
//! generation, self-similarity, invariant densities, diffraction, and
//! Hutchinson measures.

pub mod config;
pub mod density;
pub mod diffraction;
pub mod error;
pub mod hutchinson;
pub mod inflation;
pub mod io;
pub mod modelset;
pub mod ring;

pub use error::{Error, Result};
pub use inflation::Inflation;
pub use modelset::Window;
pub use ring::{QuadraticRing, RingElement};
