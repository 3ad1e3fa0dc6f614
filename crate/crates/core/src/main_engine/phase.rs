//! The deferred products that become the old-part tables at the next boundary.

use super::classes::{Class, Classes, Committed};
use super::parts::{Part, View};
use super::stores::{complete, root_at, PHASED, SPECS};
use crate::error::Result;
use crate::graph::SignedAdj;
use crate::matmul::{CountMatrix, JobSet, ProductJob};
use crate::pairs::PairCount;

/// A class commit seen while the job ran: (layer, vertex, from, to).
pub type Commit = (u8, u32, Class, Class);

pub struct PhaseJob {
    pub jobs: JobSet<usize>,
    snapshot: Classes,
    log: Vec<Commit>,
    pub build_ops: u64,
}

fn filt(cls: &Classes, layer: u8, want: Option<Class>) -> impl Fn(u32) -> bool + '_ {
    move |v| want.is_none_or(|c| cls.get(layer, v) == c)
}

impl PhaseJob {
    /// Products over `next_old` (A, B, C) under a snapshot of the classes.
    pub fn start(next_old: &[SignedAdj; 3], classes: &Classes, deadline: u64, budget: u64) -> Self {
        let [a, b, c] = next_old;
        let any = |_: u32| true;
        let mut jobs = Vec::with_capacity(PHASED.len());
        let mut build_ops = 0;
        for &(s, c2, c3) in &PHASED {
            let job = match (c2, c3) {
                (Some(_), Some(_)) => {
                    let am = CountMatrix::from_adj(a, any, filt(classes, 2, c2));
                    let bm = CountMatrix::from_adj(b, filt(classes, 2, c2), filt(classes, 3, c3));
                    let cm = CountMatrix::from_adj(c, filt(classes, 3, c3), any);
                    build_ops += (am.nnz() + bm.nnz() + cm.nnz()) as u64;
                    ProductJob::triple(am, bm, cm, u64::MAX)
                }
                (Some(_), None) => {
                    let am = CountMatrix::from_adj(a, any, filt(classes, 2, c2));
                    let bm = CountMatrix::from_adj(b, filt(classes, 2, c2), any);
                    build_ops += (am.nnz() + bm.nnz()) as u64;
                    ProductJob::new(am, bm, u64::MAX)
                }
                _ => {
                    let bm = CountMatrix::from_adj(b, any, filt(classes, 3, c3));
                    let cm = CountMatrix::from_adj(c, filt(classes, 3, c3), any);
                    build_ops += (bm.nnz() + cm.nnz()) as u64;
                    ProductJob::new(bm, cm, u64::MAX)
                }
            };
            jobs.push((s, job));
        }
        PhaseJob { jobs: JobSet::new(jobs, deadline, budget), snapshot: classes.clone(), log: Vec::new(), build_ops }
    }

    pub fn record(&mut self, c: Commit) {
        self.log.push(c);
    }

    /// Finishes the products and replays the logged commits over the old part
    /// of `view`; returns the tables and the operations spent.
    pub fn fold(mut self, view: &View) -> Result<(Vec<(usize, PairCount)>, u64)> {
        let mut ops = self.jobs.finish()?;
        let mut out: Vec<(usize, PairCount)> = Vec::new();
        for (s, m) in self.jobs.into_results()? {
            let p = m.to_pairs();
            ops += p.len() as u64;
            out.push((s, p));
        }
        let mut snap = self.snapshot;
        for &(layer, z, from, to) in &self.log {
            debug_assert_eq!(snap.get(layer, z), from);
            for (s, table) in out.iter_mut() {
                let spec = &SPECS[*s];
                if !spec.sensitive(layer, from, to) {
                    continue;
                }
                let (f, is_row) = root_at(spec, layer);
                let mat = spec.kind.first_mat() + f;
                debug_assert_eq!(spec.parts[f], Part::Old);
                let cv = Committed { classes: &snap, alt: Some((layer, z, to)) };
                for (w, val) in view.side(mat, Part::Old, if is_row { 0 } else { 1 }, z) {
                    let (x, y) = if is_row { (z, w) } else { (w, z) };
                    ops += complete(spec, f, x, y, val, view, &cv, &mut |k1, k2, wt, o, n| {
                        table.add(k1, k2, wt * (n as i64 - o as i64));
                    });
                }
            }
            snap.set(layer, z, to);
        }
        Ok((out, ops))
    }
}
