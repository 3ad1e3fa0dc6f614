//! Exact fully dynamic 4-cycle counting.
//!
//! The counting engines answer "how many 3-paths join `u` in layer 1 to `v`
//! in layer 4" on a 4-layered graph while edges arrive and leave in the
//! A, B and C matrices. A general graph is handled by replicating every
//! vertex into all four layers (see [`reduction`]).

pub mod engine;
pub mod error;
pub mod graph;
pub mod main_engine;
pub mod matmul;
pub mod metrics;
pub mod naive;
pub mod oracle;
pub mod pairs;
pub mod params;
pub mod reduction;
pub mod stream;
pub mod warmup;

pub use error::{Error, Result};
pub use graph::{GeneralGraph, GeneralUpdate, LayeredGraph, MatrixId, Op, UpdateEvent, VertexRef};

/// Execution strategy for the data-parallel kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// `Parallel` when the crate was built with the `parallel` feature.
    pub fn effective(self) -> Exec {
        if cfg!(feature = "parallel") {
            self
        } else {
            Exec::Sequential
        }
    }
}
