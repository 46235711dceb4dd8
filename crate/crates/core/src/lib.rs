pub mod cli;
pub mod csbasis;
pub mod error;
pub mod fvcore;
pub mod linalg;
pub mod potentials;
pub mod solver;

pub use error::{FvError, Result};
