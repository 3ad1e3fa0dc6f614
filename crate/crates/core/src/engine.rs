//! Common interface of the layered 3-path engines.

use crate::error::Result;
use crate::graph::{LayeredGraph, UpdateEvent};
use crate::metrics::Metrics;

/// Maintains a 4-layered graph under A/B/C/D updates and answers
/// "number of 3-paths u -> v through A, B, C" for u in layer 1, v in layer 4.
/// D edges are stored but never take part in paths.
pub trait LayeredEngine {
    fn apply(&mut self, e: &UpdateEvent) -> Result<()>;
    fn query(&mut self, u: u32, v: u32) -> Result<i64>;
    fn graph(&self) -> &LayeredGraph;
    fn metrics(&self) -> &Metrics;
    fn name(&self) -> &'static str;
}

impl<E: LayeredEngine + ?Sized> LayeredEngine for Box<E> {
    fn apply(&mut self, e: &UpdateEvent) -> Result<()> {
        (**self).apply(e)
    }
    fn query(&mut self, u: u32, v: u32) -> Result<i64> {
        (**self).query(u, v)
    }
    fn graph(&self) -> &LayeredGraph {
        (**self).graph()
    }
    fn metrics(&self) -> &Metrics {
        (**self).metrics()
    }
    fn name(&self) -> &'static str {
        (**self).name()
    }
}
