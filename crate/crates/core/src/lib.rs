//! Mean-field homogenization of elasto-plastic composites.
//!
//! Plastic strains are treated as eigen-strains of an otherwise elastic
//! heterogeneous medium. Mori–Tanaka concentration and influence tensors
//! localize the macroscopic strain and all phase plastic strains onto the
//! phases, and a coupled multi-phase return mapping integrates the
//! elastic–perfectly plastic phase laws incrementally.

pub mod error;
pub mod eshelby;
pub mod output;
pub mod mean_field;
pub mod plasticity;
pub mod scenario;
pub mod selfcheck;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
