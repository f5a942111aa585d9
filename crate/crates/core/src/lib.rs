pub mod area_map;
pub mod curve;
pub mod dissipation;
pub mod embed3d;
pub mod error;
pub mod fields;
pub mod grid;
pub mod harness;
pub mod numerics;
pub mod qss;
pub mod smoothing;
pub mod spectral;
pub mod suites;

pub use error::{Error, Result};
