//! Kernel interpolation laboratory.
//!
//! Point sets on the unit sphere and in boxes, Sobolev-type kernels,
//! Lagrange functions, Lebesgue constants, Lagrange-decay profiles and
//! convergence studies.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod interpolation;
pub mod io;
pub mod kernels;
pub mod pointsets;

pub use error::{KilabError, Result};
pub use exec::Exec;
pub use geometry::{ManifoldDescriptor, ManifoldKind, MeshStats, Point};
pub use interpolation::{CollocationSystem, Interpolant, LagrangeFunction};
pub use kernels::{Kernel, KernelFamily, KernelSpec};
pub use pointsets::PointSet;
