//! Time reparametrisation, the smoothed fields `v^m, rho^m` and their forcing.

mod cache;
mod family;
mod forcing;
mod schedule;

pub use cache::{lobatto_nodes, BlockCache};
pub use family::{spatial_terms, Phase, SmoothedFamily, FORCING_STEP};
pub use forcing::{forcing_sweep, ForcingNorms, ForcingSample, ForcingSettings};
pub use schedule::{Reparametrisation, TimeSchedule, MAX_LEVEL};
