//! Figure-ground depth annotations for dynamic scenes.
//!
//! Moving occlusion boundaries are found by comparing optical flow across
//! neighbouring frames. Each boundary segment is tested for which side travels
//! with it, and ordinal depth pairs are sampled across and along it.

pub mod boundary;
pub mod error;
pub mod imaging;
pub mod metrics;
pub mod order;
pub mod pipeline;
pub mod sampling;
pub mod synth;

pub use error::{Error, Result};
