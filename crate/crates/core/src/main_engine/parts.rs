//! Old/new split of the first three matrices.
//!
//! `old` holds the edges present at the start of the previous phase, `new`
//! the signed changes since then and `cur` the signed changes of the running
//! phase. `all = old + new` is the live graph.

use rustc_hash::FxHashMap;

use crate::graph::SignedAdj;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Old,
    New,
    All,
}

#[derive(Debug, Clone, Default)]
pub struct Parts {
    pub old: [SignedAdj; 3],
    pub new: [SignedAdj; 3],
    pub cur: [SignedAdj; 3],
    pub all: [SignedAdj; 3],
}

impl Parts {
    /// Every edge of `all` counts as old.
    pub fn rebased(all: [SignedAdj; 3]) -> Self {
        Parts { old: all.clone(), new: Default::default(), cur: Default::default(), all }
    }

    pub fn mat(&self, m: usize, p: Part) -> &SignedAdj {
        match p {
            Part::Old => &self.old[m],
            Part::New => &self.new[m],
            Part::All => &self.all[m],
        }
    }

    pub fn update(&mut self, m: usize, x: u32, y: u32, d: i64) {
        self.new[m].add(x, y, d);
        self.cur[m].add(x, y, d);
        self.all[m].add(x, y, d);
    }

    /// old += new - cur; new = cur; cur = 0.
    pub fn rotate(&mut self) -> u64 {
        let mut ops = 0;
        for m in 0..3 {
            let prev_nnz = self.new[m].nnz() as u64;
            self.old[m].add_all(&self.new[m]);
            self.old[m].sub_all(&self.cur[m]);
            self.new[m] = std::mem::take(&mut self.cur[m]);
            ops += prev_nnz + self.new[m].nnz() as u64;
        }
        ops
    }

    /// The edges the next phase will treat as old: old + new.
    pub fn next_old(&self, m: usize) -> SignedAdj {
        let mut o = self.old[m].clone();
        o.add_all(&self.new[m]);
        o
    }
}

/// Signed changes to `new` and `all` since a snapshot, per matrix.
#[derive(Debug, Clone, Default)]
pub struct ChangeLog {
    pub delta: [SignedAdj; 3],
}

impl ChangeLog {
    pub fn record(&mut self, m: usize, x: u32, y: u32, d: i64) {
        self.delta[m].add(x, y, d);
    }
}

/// Read access to the parts, either live or rolled back to a snapshot.
#[derive(Clone, Copy)]
pub struct View<'a> {
    pub parts: &'a Parts,
    pub log: Option<&'a ChangeLog>,
}

impl<'a> View<'a> {
    pub fn live(parts: &'a Parts) -> Self {
        View { parts, log: None }
    }

    pub fn get(&self, m: usize, p: Part, x: u32, y: u32) -> i64 {
        let v = self.parts.mat(m, p).get(x, y);
        match (self.log, p) {
            (Some(l), Part::New | Part::All) => v - l.delta[m].get(x, y),
            _ => v,
        }
    }

    /// Nonzero entries on one side of `v` (side 0: row, side 1: column).
    pub fn side(&self, m: usize, p: Part, side: usize, v: u32) -> Vec<(u32, i64)> {
        let base = self.parts.mat(m, p).side(side, v);
        match (self.log, p) {
            (Some(l), Part::New | Part::All) => {
                let d = l.delta[m].side(side, v);
                merge(base, d)
            }
            _ => base.iter().map(|(&w, &x)| (w, x)).collect(),
        }
    }

    pub fn side_len(&self, m: usize, p: Part, side: usize, v: u32) -> usize {
        let n = self.parts.mat(m, p).side(side, v).len();
        match (self.log, p) {
            (Some(l), Part::New | Part::All) => n + l.delta[m].side(side, v).len(),
            _ => n,
        }
    }
}

fn merge(base: &FxHashMap<u32, i64>, d: &FxHashMap<u32, i64>) -> Vec<(u32, i64)> {
    let mut out: Vec<(u32, i64)> = Vec::with_capacity(base.len() + d.len());
    for (&w, &x) in base {
        let y = x - d.get(&w).copied().unwrap_or(0);
        if y != 0 {
            out.push((w, y));
        }
    }
    for (&w, &dx) in d {
        if !base.contains_key(&w) {
            out.push((w, -dx));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_keeps_all() {
        let mut p = Parts::default();
        p.update(0, 1, 2, 1);
        p.rotate();
        p.update(0, 1, 3, 1);
        p.update(0, 1, 2, -1);
        p.rotate();
        // old now holds the first phase's edge, new the second phase's changes
        assert_eq!(p.old[0].get(1, 2), 1);
        assert_eq!(p.new[0].get(1, 2), -1);
        assert_eq!(p.new[0].get(1, 3), 1);
        assert_eq!(p.all[0].get(1, 2), 0);
        assert!(p.cur[0].is_empty());
    }

    #[test]
    fn rolled_back_view() {
        let mut p = Parts::default();
        p.update(1, 4, 5, 1);
        let mut log = ChangeLog::default();
        p.update(1, 4, 5, -1);
        log.record(1, 4, 5, -1);
        p.update(1, 4, 6, 1);
        log.record(1, 4, 6, 1);
        let v = View { parts: &p, log: Some(&log) };
        assert_eq!(v.get(1, Part::All, 4, 5), 1);
        assert_eq!(v.get(1, Part::All, 4, 6), 0);
        assert_eq!(v.side(1, Part::All, 0, 4), vec![(5, 1)]);
    }
}
