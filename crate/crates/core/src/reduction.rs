//! General graph to 4-layered graph reduction, and the running 4-cycle
//! counters built on a layered engine.
//!
//! A general vertex appears in all four layers. A general edge {u, v} is
//! placed into each of D, C, B, A in both orientations, so the layered graph
//! stays symmetric and length-3 walks u -> v through A, B, C are exactly the
//! 3-paths of the general graph once the edge itself is absent from A, B, C.

use crate::engine::LayeredEngine;
use crate::error::{Error, Result};
use crate::graph::{GeneralGraph, GeneralUpdate, MatrixId, Op, UpdateEvent};

/// The layered events for one general update, grouped by matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedUpdate {
    /// Four matrix steps; each holds the two orientations of the edge.
    pub steps: Vec<[UpdateEvent; 2]>,
    /// Index of the D step, where the query is taken before applying it.
    pub query_step: usize,
    /// Query endpoints (layer-1 vertex, layer-4 vertex).
    pub query: (u32, u32),
    pub sign: i64,
}

fn step(op: Op, m: MatrixId, u: u32, v: u32) -> [UpdateEvent; 2] {
    [UpdateEvent::new(op, m, u, v), UpdateEvent::new(op, m, v, u)]
}

/// Inserts go in D, C, B, A order with the query first; deletes go A, B, C, D
/// with the query once A, B and C no longer hold the edge.
pub fn general_to_layered(e: &GeneralUpdate) -> Result<ReducedUpdate> {
    if e.u == e.v {
        return Err(Error::SelfLoop(e.u));
    }
    let order = match e.op {
        Op::Insert => [MatrixId::D, MatrixId::C, MatrixId::B, MatrixId::A],
        Op::Delete => [MatrixId::A, MatrixId::B, MatrixId::C, MatrixId::D],
    };
    Ok(ReducedUpdate {
        steps: order.iter().map(|&m| step(e.op, m, e.u, e.v)).collect(),
        query_step: if e.op == Op::Insert { 0 } else { 3 },
        query: (e.u, e.v),
        sign: e.op.sign(),
    })
}

/// Running 4-cycle count of a general graph over one layered engine.
pub struct GeneralCounter<E> {
    engine: E,
    g: GeneralGraph,
    total: i64,
}

impl<E: LayeredEngine> GeneralCounter<E> {
    pub fn new(engine: E) -> Self {
        GeneralCounter { engine, g: GeneralGraph::new(), total: 0 }
    }

    /// Applies one update; returns the signed change in the 4-cycle count.
    pub fn apply(&mut self, e: &GeneralUpdate) -> Result<i64> {
        self.g.check(e)?;
        let r = general_to_layered(e)?;
        let mut delta = 0;
        for (i, events) in r.steps.iter().enumerate() {
            if i == r.query_step {
                delta = r.sign * self.engine.query(r.query.0, r.query.1)?;
            }
            for ev in events {
                self.engine.apply(ev)?;
            }
        }
        self.g.apply(e)?;
        self.total += delta;
        Ok(delta)
    }

    pub fn total(&self) -> i64 {
        self.total
    }

    pub fn engine(&self) -> &E {
        &self.engine
    }

    pub fn engine_mut(&mut self) -> &mut E {
        &mut self.engine
    }

    pub fn graph(&self) -> &GeneralGraph {
        &self.g
    }
}

/// Running layered 4-cycle count from four rotated engine copies: copy `r`
/// stores an edge of matrix X as matrix X rotated by `r`, so every update
/// lands in D of exactly one copy, which answers its query.
pub struct FourCopyCounter<E> {
    copies: Vec<E>,
    total: i64,
}

impl<E: LayeredEngine> FourCopyCounter<E> {
    pub fn new(mut factory: impl FnMut(usize) -> E) -> Self {
        FourCopyCounter { copies: (0..4).map(&mut factory).collect(), total: 0 }
    }

    /// The copy in which matrix `m` plays the role of D.
    pub fn copy_for(m: MatrixId) -> usize {
        (3 + 4 - m.index()) % 4
    }

    pub fn apply(&mut self, e: &UpdateEvent) -> Result<i64> {
        self.copies[0].graph().check(e)?;
        let r = Self::copy_for(e.matrix);
        let d = e.rotated(r);
        debug_assert_eq!(d.matrix, MatrixId::D);
        // D holds (layer-4, layer-1); the 3-path runs from d.y to d.x.
        let delta = e.op.sign() * self.copies[r].query(d.y, d.x)?;
        for (k, c) in self.copies.iter_mut().enumerate() {
            c.apply(&e.rotated(k))?;
        }
        self.total += delta;
        Ok(delta)
    }

    pub fn total(&self) -> i64 {
        self.total
    }

    pub fn copies(&self) -> &[E] {
        &self.copies
    }

    pub fn copies_mut(&mut self) -> &mut [E] {
        &mut self.copies
    }
}
