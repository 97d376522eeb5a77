//! Relaxation, V-cycle, Krylov solvers and the adaptive controller.

mod adaptive;
mod krylov;
mod smoother;
mod vcycle;

pub use adaptive::{adaptive_solve, AdaptiveSpec, Trigger};
pub use krylov::{
    gmres, pcg, solve_with_hierarchy, AdaptiveEvent, AmgPreconditioner, IdentityPreconditioner, KrylovMethod,
    KrylovSpec, Preconditioner, SolveReport,
};
pub use smoother::{relax, SmootherKind, SmootherSpec};
pub use vcycle::vcycle;
