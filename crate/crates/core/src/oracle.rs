//! Brute-force counting oracles. Slow on purpose; used as ground truth.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{GeneralGraph, LayeredGraph, MatrixId, VertexRef};
use crate::Exec;

struct Dense {
    n: usize,
    bits: Vec<bool>,
}

impl Dense {
    fn from(g: &GeneralGraph) -> Self {
        let n = g.n();
        let mut bits = vec![false; n * n];
        for (u, v) in g.edges() {
            bits[u as usize * n + v as usize] = true;
            bits[v as usize * n + u as usize] = true;
        }
        Dense { n, bits }
    }

    #[inline]
    fn e(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.n + b]
    }

    /// 4-cycles whose smallest vertex is `a`: every 4-subset {a<b<c<d}
    /// admits exactly three distinct cycles.
    fn count_from(&self, a: usize) -> u64 {
        let n = self.n;
        let mut total = 0;
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    // a-b-c-d, a-b-d-c, a-c-b-d
                    total += (self.e(a, b) && self.e(b, c) && self.e(c, d) && self.e(d, a)) as u64;
                    total += (self.e(a, b) && self.e(b, d) && self.e(d, c) && self.e(c, a)) as u64;
                    total += (self.e(a, c) && self.e(c, b) && self.e(b, d) && self.e(d, a)) as u64;
                }
            }
        }
        total
    }
}

/// Number of distinct 4-cycle subgraphs of a simple graph.
pub fn brute_4cycles_general(g: &GeneralGraph) -> u64 {
    brute_4cycles_general_with(g, Exec::default())
}

pub fn brute_4cycles_general_with(g: &GeneralGraph, exec: Exec) -> u64 {
    let d = Dense::from(g);
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Exec::Parallel => (0..d.n).into_par_iter().map(|a| d.count_from(a)).sum(),
        _ => (0..d.n).map(|a| d.count_from(a)).sum(),
    }
}

fn expect_layer(v: VertexRef, layer: u8) -> Result<()> {
    if v.layer == layer {
        Ok(())
    } else {
        Err(Error::LayerMismatch(format!("expected layer {layer}, got {}", v.layer)))
    }
}

/// Number of (w2, w3) with A(u,w2), B(w2,w3), C(w3,v).
pub fn brute_3paths(g: &LayeredGraph, u: VertexRef, v: VertexRef) -> Result<i64> {
    expect_layer(u, 1)?;
    expect_layer(v, 4)?;
    Ok(paths3(g, u.index, v.index))
}

fn paths3(g: &LayeredGraph, u: u32, v: u32) -> i64 {
    let (a, b, c) = (g.mat(MatrixId::A), g.mat(MatrixId::B), g.mat(MatrixId::C));
    let mut n = 0;
    for &w2 in a.row(u).keys() {
        for &w3 in b.row(w2).keys() {
            if c.get(w3, v) != 0 {
                n += 1;
            }
        }
    }
    n
}

/// Number of w with A(x,w) and B(w,y).
pub fn brute_2paths(g: &LayeredGraph, x: VertexRef, y: VertexRef) -> Result<i64> {
    expect_layer(x, 1)?;
    expect_layer(y, 3)?;
    let (a, b) = (g.mat(MatrixId::A), g.mat(MatrixId::B));
    Ok(a.row(x.index).keys().filter(|&&w| b.get(w, y.index) != 0).count() as i64)
}

/// Tuples (v1, v2, v3, v4) with all four connecting edges, by a quadruple loop.
pub fn brute_layered_4cycles(g: &LayeredGraph) -> u64 {
    brute_layered_4cycles_with(g, Exec::default())
}

pub fn brute_layered_4cycles_with(g: &LayeredGraph, exec: Exec) -> u64 {
    let caps: Vec<u32> = (1..=4).map(|l| g.layer_cap(l) as u32).collect();
    let count_from = |v1: u32| -> u64 {
        let mut n = 0;
        for v2 in 0..caps[1] {
            if !g.has(MatrixId::A, v1, v2) {
                continue;
            }
            for v3 in 0..caps[2] {
                if !g.has(MatrixId::B, v2, v3) {
                    continue;
                }
                for v4 in 0..caps[3] {
                    if g.has(MatrixId::C, v3, v4) && g.has(MatrixId::D, v4, v1) {
                        n += 1;
                    }
                }
            }
        }
        n
    };
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Exec::Parallel => (0..caps[0]).into_par_iter().map(count_from).sum(),
        _ => (0..caps[0]).map(count_from).sum(),
    }
}

/// Sum of 3-path counts over every D edge.
pub fn layered_4cycles_via_paths(g: &LayeredGraph) -> u64 {
    g.mat(MatrixId::D)
        .iter()
        .map(|(v4, v1, _)| paths3(g, v1, v4) as u64)
        .sum()
}

/// Walks u-a-b-v of length 3 in a general graph.
pub fn general_walks3(g: &GeneralGraph, u: u32, v: u32) -> u64 {
    let mut n = 0;
    for &a in g.neighbors(u) {
        for &b in g.neighbors(a) {
            if g.has(b, v) {
                n += 1;
            }
        }
    }
    n
}

/// Simple paths u-a-b-v with four distinct vertices.
pub fn general_paths3(g: &GeneralGraph, u: u32, v: u32) -> u64 {
    let mut n = 0;
    for &a in g.neighbors(u) {
        if a == v {
            continue;
        }
        for &b in g.neighbors(a) {
            if b != u && b != v && g.has(b, v) {
                n += 1;
            }
        }
    }
    n
}
