//! Layered graph model, update events and degree bookkeeping.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Biadjacency between consecutive layers. D joins layer 4 back to layer 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatrixId {
    A,
    B,
    C,
    D,
}

impl MatrixId {
    pub const ALL: [MatrixId; 4] = [MatrixId::A, MatrixId::B, MatrixId::C, MatrixId::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> MatrixId {
        Self::ALL[i % 4]
    }

    /// Layers (first, second) joined by the matrix; edges are stored in this order.
    pub fn layers(self) -> (u8, u8) {
        match self {
            MatrixId::A => (1, 2),
            MatrixId::B => (2, 3),
            MatrixId::C => (3, 4),
            MatrixId::D => (4, 1),
        }
    }

    /// A -> B -> C -> D -> A, applied `k` times.
    pub fn rotate(self, k: usize) -> MatrixId {
        Self::from_index(self.index() + k)
    }

    pub fn parse(s: &str) -> Option<MatrixId> {
        match s {
            "A" | "a" => Some(MatrixId::A),
            "B" | "b" => Some(MatrixId::B),
            "C" | "c" => Some(MatrixId::C),
            "D" | "d" => Some(MatrixId::D),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexRef {
    pub layer: u8,
    pub index: u32,
}

impl VertexRef {
    pub fn new(layer: u8, index: u32) -> Self {
        VertexRef { layer, index }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Insert,
    Delete,
}

impl Op {
    pub fn sign(self) -> i64 {
        match self {
            Op::Insert => 1,
            Op::Delete => -1,
        }
    }

    pub fn inverse(self) -> Op {
        match self {
            Op::Insert => Op::Delete,
            Op::Delete => Op::Insert,
        }
    }
}

/// A single edge update. `x` lies in the matrix's first layer, `y` in its second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UpdateEvent {
    pub op: Op,
    pub matrix: MatrixId,
    pub x: u32,
    pub y: u32,
}

impl UpdateEvent {
    pub fn new(op: Op, matrix: MatrixId, x: u32, y: u32) -> Self {
        UpdateEvent { op, matrix, x, y }
    }

    pub fn insert(matrix: MatrixId, x: u32, y: u32) -> Self {
        Self::new(Op::Insert, matrix, x, y)
    }

    pub fn delete(matrix: MatrixId, x: u32, y: u32) -> Self {
        Self::new(Op::Delete, matrix, x, y)
    }

    /// Builds an event from endpoints given in either order.
    pub fn from_refs(op: Op, matrix: MatrixId, p: VertexRef, q: VertexRef) -> Result<Self> {
        let (l0, l1) = matrix.layers();
        if p.layer == l0 && q.layer == l1 {
            Ok(Self::new(op, matrix, p.index, q.index))
        } else if q.layer == l0 && p.layer == l1 {
            Ok(Self::new(op, matrix, q.index, p.index))
        } else {
            Err(Error::LayerMismatch(format!(
                "{matrix:?} joins layers {l0},{l1}, got {},{}",
                p.layer, q.layer
            )))
        }
    }

    pub fn endpoints(&self) -> (VertexRef, VertexRef) {
        let (l0, l1) = self.matrix.layers();
        (VertexRef::new(l0, self.x), VertexRef::new(l1, self.y))
    }

    pub fn inverse(&self) -> Self {
        UpdateEvent { op: self.op.inverse(), ..*self }
    }

    /// The same edge placed in the matrix `k` rotation steps further.
    pub fn rotated(&self, k: usize) -> Self {
        UpdateEvent { matrix: self.matrix.rotate(k), ..*self }
    }
}

/// Signed sparse biadjacency with forward (first layer) and backward rows.
/// Zero entries are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SignedAdj {
    fwd: Vec<FxHashMap<u32, i64>>,
    bwd: Vec<FxHashMap<u32, i64>>,
    nnz: usize,
}

fn row_mut(rows: &mut Vec<FxHashMap<u32, i64>>, i: u32) -> &mut FxHashMap<u32, i64> {
    let i = i as usize;
    if rows.len() <= i {
        rows.resize_with(i + 1, FxHashMap::default);
    }
    &mut rows[i]
}

fn bump(rows: &mut Vec<FxHashMap<u32, i64>>, i: u32, j: u32, d: i64) -> i64 {
    let row = row_mut(rows, i);
    let e = row.entry(j).or_insert(0);
    *e += d;
    let v = *e;
    if v == 0 {
        row.remove(&j);
    }
    v
}

static EMPTY_ROW: std::sync::OnceLock<FxHashMap<u32, i64>> = std::sync::OnceLock::new();

fn empty_row() -> &'static FxHashMap<u32, i64> {
    EMPTY_ROW.get_or_init(FxHashMap::default)
}

impl SignedAdj {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `d` to entry (x, y); returns the new value.
    pub fn add(&mut self, x: u32, y: u32, d: i64) -> i64 {
        if d == 0 {
            return self.get(x, y);
        }
        let before = self.get(x, y);
        let v = bump(&mut self.fwd, x, y, d);
        bump(&mut self.bwd, y, x, d);
        match (before != 0, v != 0) {
            (false, true) => self.nnz += 1,
            (true, false) => self.nnz -= 1,
            _ => {}
        }
        v
    }

    pub fn get(&self, x: u32, y: u32) -> i64 {
        self.fwd.get(x as usize).and_then(|r| r.get(&y)).copied().unwrap_or(0)
    }

    pub fn row(&self, x: u32) -> &FxHashMap<u32, i64> {
        self.fwd.get(x as usize).unwrap_or_else(|| empty_row())
    }

    pub fn col(&self, y: u32) -> &FxHashMap<u32, i64> {
        self.bwd.get(y as usize).unwrap_or_else(|| empty_row())
    }

    /// Row of `v` seen from side 0 (first layer) or side 1 (second layer).
    pub fn side(&self, side: usize, v: u32) -> &FxHashMap<u32, i64> {
        if side == 0 {
            self.row(v)
        } else {
            self.col(v)
        }
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn is_empty(&self) -> bool {
        self.nnz == 0
    }

    pub fn row_cap(&self) -> usize {
        self.fwd.len()
    }

    pub fn col_cap(&self) -> usize {
        self.bwd.len()
    }

    /// All nonzero entries in sorted order.
    pub fn entries(&self) -> Vec<(u32, u32, i64)> {
        let mut out: Vec<(u32, u32, i64)> = self
            .fwd
            .iter()
            .enumerate()
            .flat_map(|(x, r)| r.iter().map(move |(&y, &v)| (x as u32, y, v)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Adds every entry of `other`.
    pub fn add_all(&mut self, other: &SignedAdj) {
        for (x, r) in other.fwd.iter().enumerate() {
            for (&y, &v) in r {
                self.add(x as u32, y, v);
            }
        }
    }

    pub fn sub_all(&mut self, other: &SignedAdj) {
        for (x, r) in other.fwd.iter().enumerate() {
            for (&y, &v) in r {
                self.add(x as u32, y, -v);
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, i64)> + '_ {
        self.fwd
            .iter()
            .enumerate()
            .flat_map(|(x, r)| r.iter().map(move |(&y, &v)| (x as u32, y, v)))
    }
}

/// A 4-layered graph: four 0/1 biadjacencies with degree counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LayeredGraph {
    mats: [SignedAdj; 4],
    m: u64,
}

impl LayeredGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn apply(&mut self, e: &UpdateEvent) -> Result<()> {
        let adj = &mut self.mats[e.matrix.index()];
        let present = adj.get(e.x, e.y) != 0;
        match (e.op, present) {
            (Op::Insert, true) => {
                return Err(Error::DuplicateInsert { matrix: e.matrix, x: e.x, y: e.y })
            }
            (Op::Delete, false) => {
                return Err(Error::MissingDelete { matrix: e.matrix, x: e.x, y: e.y })
            }
            _ => {}
        }
        adj.add(e.x, e.y, e.op.sign());
        match e.op {
            Op::Insert => self.m += 1,
            Op::Delete => self.m -= 1,
        }
        Ok(())
    }

    /// Checks that `e` would apply cleanly without mutating.
    pub fn check(&self, e: &UpdateEvent) -> Result<()> {
        let present = self.has(e.matrix, e.x, e.y);
        match (e.op, present) {
            (Op::Insert, true) => Err(Error::DuplicateInsert { matrix: e.matrix, x: e.x, y: e.y }),
            (Op::Delete, false) => Err(Error::MissingDelete { matrix: e.matrix, x: e.x, y: e.y }),
            _ => Ok(()),
        }
    }

    pub fn has(&self, m: MatrixId, x: u32, y: u32) -> bool {
        self.mats[m.index()].get(x, y) != 0
    }

    pub fn mat(&self, m: MatrixId) -> &SignedAdj {
        &self.mats[m.index()]
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn edges(&self, m: MatrixId) -> usize {
        self.mats[m.index()].nnz()
    }

    /// Degree of a vertex in one matrix (0 if the matrix does not touch its layer).
    pub fn deg(&self, m: MatrixId, v: VertexRef) -> usize {
        let (l0, l1) = m.layers();
        let adj = &self.mats[m.index()];
        if v.layer == l0 {
            adj.row(v.index).len()
        } else if v.layer == l1 {
            adj.col(v.index).len()
        } else {
            0
        }
    }

    /// deg_A + deg_B for layer 2, deg_B + deg_C for layer 3, plain degree otherwise.
    pub fn combined_deg(&self, v: VertexRef) -> usize {
        match v.layer {
            1 => self.deg(MatrixId::A, v),
            2 => self.deg(MatrixId::A, v) + self.deg(MatrixId::B, v),
            3 => self.deg(MatrixId::B, v) + self.deg(MatrixId::C, v),
            4 => self.deg(MatrixId::C, v),
            _ => 0,
        }
    }

    /// One past the largest index used in `layer`.
    pub fn layer_cap(&self, layer: u8) -> usize {
        MatrixId::ALL
            .iter()
            .map(|&m| {
                let (l0, l1) = m.layers();
                let adj = &self.mats[m.index()];
                let a = if l0 == layer { adj.row_cap() } else { 0 };
                let b = if l1 == layer { adj.col_cap() } else { 0 };
                a.max(b)
            })
            .max()
            .unwrap_or(0)
    }
}

/// An edge update of an undirected simple graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GeneralUpdate {
    pub op: Op,
    pub u: u32,
    pub v: u32,
}

impl GeneralUpdate {
    pub fn insert(u: u32, v: u32) -> Self {
        GeneralUpdate { op: Op::Insert, u, v }
    }

    pub fn delete(u: u32, v: u32) -> Self {
        GeneralUpdate { op: Op::Delete, u, v }
    }

    pub fn inverse(&self) -> Self {
        GeneralUpdate { op: self.op.inverse(), ..*self }
    }
}

/// Undirected simple graph with adjacency sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeneralGraph {
    adj: Vec<Vec<u32>>,
    m: u64,
}

impl GeneralGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn has(&self, u: u32, v: u32) -> bool {
        self.adj.get(u as usize).is_some_and(|r| r.binary_search(&v).is_ok())
    }

    pub fn check(&self, e: &GeneralUpdate) -> Result<()> {
        if e.u == e.v {
            return Err(Error::SelfLoop(e.u));
        }
        let present = self.has(e.u, e.v);
        match (e.op, present) {
            (Op::Insert, true) => Err(Error::DuplicateInsert { matrix: MatrixId::D, x: e.u, y: e.v }),
            (Op::Delete, false) => Err(Error::MissingDelete { matrix: MatrixId::D, x: e.u, y: e.v }),
            _ => Ok(()),
        }
    }

    pub fn apply(&mut self, e: &GeneralUpdate) -> Result<()> {
        self.check(e)?;
        let n = e.u.max(e.v) as usize + 1;
        if self.adj.len() < n {
            self.adj.resize_with(n, Vec::new);
        }
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            let row = &mut self.adj[a as usize];
            match (e.op, row.binary_search(&b)) {
                (Op::Insert, Err(pos)) => row.insert(pos, b),
                (Op::Delete, Ok(pos)) => {
                    row.remove(pos);
                }
                _ => unreachable!("checked above"),
            }
        }
        match e.op {
            Op::Insert => self.m += 1,
            Op::Delete => self.m -= 1,
        }
        Ok(())
    }

    pub fn neighbors(&self, u: u32) -> &[u32] {
        self.adj.get(u as usize).map(|r| r.as_slice()).unwrap_or(&[])
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn deg(&self, u: u32) -> usize {
        self.neighbors(u).len()
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (u, r) in self.adj.iter().enumerate() {
            for &v in r {
                if (u as u32) < v {
                    out.push((u as u32, v));
                }
            }
        }
        out
    }
}
