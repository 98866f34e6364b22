pub mod cli;
pub mod ed;
pub mod error;
pub mod fluctuations;
pub mod lattice;
pub mod meanfield;
pub mod model;
pub mod numerics;

pub use error::{Error, Result};
pub use model::{critical_coupling, Model, ModelParams};
