//! Small numerical kernels shared by the geometry, field and solver layers.

pub mod bump;
pub mod fd;
pub mod fit;
pub mod quad;
