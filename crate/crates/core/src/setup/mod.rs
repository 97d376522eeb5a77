//! Galerkin hierarchy construction: strength of connection, Ruge–Stüben
//! C/F splitting, direct interpolation, injection and `PᵀAP`.

mod coarsen;
mod hierarchy;
mod interp;
mod strength;

pub use coarsen::{cf_split, CfSplitting, PointKind};
pub use hierarchy::{amg_setup, CoarseSolver, Hierarchy, Level, LevelSummary, SetupOptions, SparsifyMethod};
pub use interp::{galerkin_product, interpolation, interpolation_truncated};
pub use strength::{strength, StrengthMatrix};
