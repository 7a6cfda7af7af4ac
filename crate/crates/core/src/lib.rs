pub mod amg;
pub mod assembly;
pub mod error;
pub mod fem;
pub mod linsolve;
pub mod mesh;
pub mod model;
pub mod nonlinear;
pub mod output;
pub mod qoi;
pub mod scenario;
pub mod sparse;

pub use error::{Error, Result};
