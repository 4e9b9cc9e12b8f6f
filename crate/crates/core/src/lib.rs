pub mod checks;
pub mod error;
pub mod linalg;
pub mod liouville;
pub mod models;
pub mod operators;
pub mod scenario;
pub mod scrambling;
pub mod thermo;

pub use error::{Error, Result};
