//! Area-preserving tubular coordinates `Phi(s, y) = gamma(s) + beta(s, y) eta(s)`.
//!
//! `beta` solves `beta - kappa beta^2 / 2 = y / l`, which makes
//! `det D Phi = 1` identically.

mod beta;
mod map;
mod stability;

pub use beta::{beta, beta_fixed_point, BetaSolve};
pub use map::{jet_from_frame, LocalFrame, MapJet, TubularMap};
pub use stability::{jacobian_defect, map_stability_report, MapStabilityReport};
