//! Slope stability of equivariant vector bundles on smooth complete toric
//! varieties, decided from Klyachko filtration data by comparing average
//! polytopes over the flats of the bundle's matroid.

pub mod cli;
pub mod error;
pub mod exactla;
pub mod fan;
pub mod klyachko;
pub mod matroid;
pub mod parliament;
pub mod stability;

pub use error::{Error, Result};
