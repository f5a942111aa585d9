//! Periodic pseudo-spectral tools: transforms, norms and the advection-diffusion solver.

mod fft;
mod field;
mod solver;

pub use fft::Fft2;
pub use field::{BernsteinCheck, SpectralField};
pub use solver::{leray_project, project_velocity, spectral_divergence, truncate, AdvectionDiffusion, RunOutput, SolverSettings, SteadyVelocity, StepRecord, VelocityField};
