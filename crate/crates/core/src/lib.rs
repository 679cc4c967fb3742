//! Controllability of opinion-dynamics networks under sparse, structured inputs.

pub mod bounds;
pub mod cli;
pub mod control;
pub mod design;
pub mod error;
pub mod graphs;
pub mod linalg;
pub mod montecarlo;
pub mod sparsity;

pub use error::{CoreError, Result};
