//! Krylov solvers and the block preconditioner for the coupled system.

pub mod krylov;
pub mod precond;

pub use krylov::{cg, fgmres, KrylovSettings, LinearOperator, Preconditioner, SolveInfo};
pub use precond::{BlockPreconditioner, InnerPolicy, InnerSolver, PrecondStats, SchurPolicy};
