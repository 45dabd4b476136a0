//! Tactile and kinesthetic object recognition with iterative closest labeled point (iCLAP)
//! registration.
//!
//! A tactile sensor explores an object; every contact gives a pressure image and a sensor
//! position. Pressure images are quantized into tactile words with a k-means codebook, and each
//! contact becomes a 4D point `(x, y, z, word)`. Objects are recognized by registering the test
//! cloud against stored models in that 4D space ([`registration::register_labeled`]), by
//! comparing word histograms alone, by registering the 3D positions alone, or by fusing these.

pub mod cli;
pub mod codebook;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod fusion;
pub mod geometry;
pub mod recognition;
pub mod registration;
mod util;

pub use error::{Error, Result};
