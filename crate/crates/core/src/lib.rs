//! Simulation lab for quantum interactive proofs, their witness
//! indistinguishability, and the transforms and batching constructions built
//! on top of them.

pub mod batch;
pub mod circuit;
pub mod cq;
pub mod eigen;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod grover;
pub mod kernel;
pub mod layout;
pub mod linalg;
pub mod qds;
pub mod qip;
pub mod relation;
pub mod report;
pub mod rng;
pub mod state;
pub mod transforms;

pub use error::{Error, Result};
