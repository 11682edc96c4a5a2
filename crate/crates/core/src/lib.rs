pub mod ansatz;
pub mod config;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod operators;
pub mod oracle;
pub mod simulator;
pub mod symmetry;
pub mod trace;
pub mod trainer;
pub mod vqe;

pub use error::{Error, Result};
