pub mod abc;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod linalg;
pub mod models;
pub mod psvm;
pub mod qp;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
