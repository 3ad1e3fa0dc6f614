#![allow(dead_code)]

use quadcount::graph::{LayeredGraph, MatrixId, SignedAdj, UpdateEvent};
use quadcount::stream::{gen_layered, LayeredSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random biadjacency with a few heavy rows (or columns when `by_col`).
pub fn skewed_adj(rng: &mut ChaCha8Rng, n: u32, heavy: &[(u32, u32)], light_edges: usize, by_col: bool) -> SignedAdj {
    let mut a = SignedAdj::new();
    let put = |a: &mut SignedAdj, x: u32, y: u32| {
        let (x, y) = if by_col { (y, x) } else { (x, y) };
        if a.get(x, y) == 0 {
            a.add(x, y, 1);
        }
    };
    for &(v, deg) in heavy {
        let mut ys: Vec<u32> = (0..n).collect();
        for i in 0..deg.min(n) as usize {
            let j = rng.gen_range(i..ys.len());
            ys.swap(i, j);
            put(&mut a, v, ys[i]);
        }
    }
    for _ in 0..light_edges {
        let x = rng.gen_range(0..n);
        let y = rng.gen_range(0..n);
        put(&mut a, x, y);
    }
    a
}

/// Graph holding the given A, B, C matrices.
pub fn graph_of(a: &SignedAdj, b: &SignedAdj, c: &SignedAdj) -> LayeredGraph {
    let mut g = LayeredGraph::new();
    for (m, adj) in [(MatrixId::A, a), (MatrixId::B, b), (MatrixId::C, c)] {
        for (x, y, v) in adj.entries() {
            assert_eq!(v, 1);
            g.apply(&UpdateEvent::insert(m, x, y)).unwrap();
        }
    }
    g
}

/// Brute 3-path count with signed B weights.
pub fn paths_signed(a: &SignedAdj, b: &SignedAdj, c: &SignedAdj, u: u32, v: u32) -> i64 {
    let mut s = 0;
    for (&w2, &x) in a.row(u) {
        for (&w3, &y) in b.row(w2) {
            s += x * y * c.get(w3, v);
        }
    }
    s
}

/// Layered stream over all four matrices with hub-biased endpoints.
pub fn hub_stream(seed: u64, steps: usize, n: u32) -> Vec<UpdateEvent> {
    gen_layered(&LayeredSpec {
        n,
        steps,
        delete_fraction: 0.4,
        weights: [3, 3, 3, 1],
        hub_bias: 0.5,
        hub_mats: [true; 4],
        seed,
    })
    .unwrap()
}
