//! Exact truncated models of Witt vectors, tilted period rings, Galois
//! actions with analyticity certificates, (phi, tau)-module checks, and a
//! ramified norm tower — all over exact rationals and finite fields, with
//! every truncation carrying an explicit certificate.

pub mod error;
pub mod galois;
pub mod gf;
pub mod params;
pub mod period;
pub mod rat;
pub mod tilt;
pub mod witt;
pub mod wittpoly;
pub mod zp;

pub use error::{Error, Result};
