//! Baseline engines: an all-pairs wedge table for general graphs and an
//! A·B table for layered graphs.

use crate::engine::LayeredEngine;
use crate::error::Result;
use crate::graph::{GeneralGraph, GeneralUpdate, LayeredGraph, MatrixId, Op, UpdateEvent};
use crate::metrics::Metrics;
use crate::pairs::PairCount;

fn key(a: u32, b: u32) -> (u32, u32) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Exact 4-cycle counter for a general graph with O(deg) work per update.
#[derive(Debug, Clone, Default)]
pub struct NaiveEngine {
    g: GeneralGraph,
    wedges: PairCount,
    total: i64,
    metrics: Metrics,
}

impl NaiveEngine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Applies an update; returns the signed change of the 4-cycle count.
    pub fn apply(&mut self, e: &GeneralUpdate) -> Result<i64> {
        self.g.check(e)?;
        self.metrics.begin_update();
        let delta = match e.op {
            Op::Insert => {
                let d = self.cycles_through(e.u, e.v);
                self.touch(e.u, e.v, 1);
                self.g.apply(e)?;
                d
            }
            Op::Delete => {
                self.g.apply(e)?;
                self.touch(e.u, e.v, -1);
                -self.cycles_through(e.u, e.v)
            }
        };
        self.total += delta;
        self.metrics.end_update();
        Ok(delta)
    }

    // 4-cycles closed by edge (u, v), with (u, v) absent from the table.
    fn cycles_through(&mut self, u: u32, v: u32) -> i64 {
        self.metrics.queries += 1;
        let mut s = 0;
        for &w in self.g.neighbors(u) {
            if w != v {
                let (x, y) = key(w, v);
                s += self.wedges.get(x, y);
            }
        }
        self.metrics.charge(self.g.deg(u) as u64);
        s
    }

    // New or removed 2-paths w-u-v and w-v-u.
    fn touch(&mut self, u: u32, v: u32, d: i64) {
        for (a, b) in [(u, v), (v, u)] {
            for &w in self.g.neighbors(a) {
                if w != b {
                    let (x, y) = key(w, b);
                    self.wedges.add(x, y, d);
                }
            }
            self.metrics.charge(self.g.deg(a) as u64);
        }
    }

    pub fn total(&self) -> i64 {
        self.total
    }

    pub fn wedges(&self, x: u32, y: u32) -> i64 {
        let (a, b) = key(x, y);
        self.wedges.get(a, b)
    }

    pub fn table(&self) -> &PairCount {
        &self.wedges
    }

    pub fn graph(&self) -> &GeneralGraph {
        &self.g
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }
}

/// Layered 3-path engine keeping the full A·B product keyed by (L1, L3).
#[derive(Debug, Clone, Default)]
pub struct LayeredNaive {
    g: LayeredGraph,
    ab: PairCount,
    metrics: Metrics,
}

impl LayeredNaive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_graph(g: &LayeredGraph) -> Self {
        let mut n = Self::new();
        for m in [MatrixId::A, MatrixId::B, MatrixId::C, MatrixId::D] {
            for (x, y, _) in g.mat(m).entries() {
                n.apply(&UpdateEvent::insert(m, x, y)).expect("edges of a valid graph");
            }
        }
        n.metrics = Metrics::default();
        n
    }

    pub fn ab(&self) -> &PairCount {
        &self.ab
    }

    pub fn into_graph(self) -> LayeredGraph {
        self.g
    }
}

impl LayeredEngine for LayeredNaive {
    fn apply(&mut self, e: &UpdateEvent) -> Result<()> {
        self.g.check(e)?;
        self.metrics.begin_update();
        let d = e.op.sign();
        match e.matrix {
            MatrixId::A => {
                let b = self.g.mat(MatrixId::B);
                for (&w3, &bv) in b.row(e.y) {
                    self.ab.add(e.x, w3, d * bv);
                }
                self.metrics.charge(b.row(e.y).len() as u64 + 1);
            }
            MatrixId::B => {
                let a = self.g.mat(MatrixId::A);
                for (&w1, &av) in a.col(e.x) {
                    self.ab.add(w1, e.y, d * av);
                }
                self.metrics.charge(a.col(e.x).len() as u64 + 1);
            }
            MatrixId::C | MatrixId::D => self.metrics.charge(1),
        }
        self.g.apply(e)?;
        self.metrics.end_update();
        Ok(())
    }

    fn query(&mut self, u: u32, v: u32) -> Result<i64> {
        self.metrics.queries += 1;
        let c = self.g.mat(MatrixId::C);
        let s = c.col(v).iter().map(|(&w3, &cv)| self.ab.get(u, w3) * cv).sum();
        self.metrics.charge(c.col(v).len() as u64 + 1);
        Ok(s)
    }

    fn graph(&self) -> &LayeredGraph {
        &self.g
    }

    fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    fn name(&self) -> &'static str {
        "naive"
    }
}
