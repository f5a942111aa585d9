//! Building-block velocity and scalar fields carried by tubes around moving curves.

mod block;
mod family;
mod perturbation;
mod profile;
mod set;

pub use block::BlockFrame;
pub use family::{CircleFamily, CurveFamily, SnakeFamily};
pub use perturbation::{PerturbationPlan, PerturbedFamily};
pub use profile::{build_cutoff, CutoffProfile};
pub use set::{field_stability_report, transport_residual, velocity_divergence, LocalFieldSet, TransportResidual, TIME_STEP};
