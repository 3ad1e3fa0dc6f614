//! 3-path counting with A and C frozen and signed updates arriving in B.
//!
//! B updates are grouped into chunks. Rows of high and medium layer-1/4
//! vertices are maintained on the fly; low rows come from deferred chunk
//! products. A query scans the sealed and the current chunk directly and
//! reads every older contribution from the stores.

use rustc_hash::FxHashMap;

use crate::engine::LayeredEngine;
use crate::error::{Error, Result};
use crate::graph::{LayeredGraph, MatrixId, SignedAdj, UpdateEvent};
use crate::matmul::{CountMatrix, JobSet, ProductJob};
use crate::metrics::Metrics;
use crate::pairs::PairCount;
use crate::params::Thresholds;

/// Degree class of a layer-1 or layer-4 vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WClass {
    L,
    M,
    H,
}

/// Within-chunk sparse/dense label pair of a B edge (layer-2 end, layer-3 end).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    DD,
    SS,
    SD,
    DS,
}

impl Split {
    pub const ALL: [Split; 4] = [Split::DD, Split::SS, Split::SD, Split::DS];

    fn of(dense2: bool, dense3: bool) -> Split {
        match (dense2, dense3) {
            (true, true) => Split::DD,
            (false, false) => Split::SS,
            (false, true) => Split::SD,
            (true, false) => Split::DS,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WarmupConfig {
    pub high: u64,
    pub medium: u64,
    pub chunk_size: u64,
    pub chunk_sparse: u64,
    pub budget: u64,
}

impl WarmupConfig {
    pub fn from_thresholds(t: &Thresholds) -> Self {
        WarmupConfig {
            high: t.chunk_size,
            medium: t.warm_medium,
            chunk_size: t.chunk_size,
            chunk_sparse: t.chunk_sparse,
            budget: t.per_update_budget,
        }
    }
}

/// On-the-fly rows of one chunk for the high and medium endpoints.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Online {
    ah: PairCount,
    am: PairCount,
    ch: PairCount,
    cm: PairCount,
}

#[derive(Debug, Clone, Default)]
struct Chunk {
    edges: Vec<(u32, u32, i64)>,
    deg2: FxHashMap<u32, u64>,
    deg3: FxHashMap<u32, u64>,
    online: Online,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum JobKind {
    HighTriple,
    LowLeft(Split),
    LowRight(Split),
}

#[derive(Debug, Clone)]
struct Sealed {
    edges: Vec<(u32, u32, i64, Split)>,
    online: Online,
    jobs: JobSet<JobKind>,
}

/// Stores over all folded chunks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WarmupStores {
    pub ah_b: PairCount,
    pub ah_b_ch: PairCount,
    pub b_ch: PairCount,
    pub am_b: PairCount,
    pub b_cm: PairCount,
    pub al_bdd: PairCount,
    pub al_bss: PairCount,
    pub al_bsd: PairCount,
    pub bdd_cl: PairCount,
    pub bss_cl: PairCount,
    pub bds_cl: PairCount,
}

impl WarmupStores {
    pub fn named(&self) -> Vec<(&'static str, &PairCount)> {
        vec![
            ("ah_b", &self.ah_b),
            ("ah_b_ch", &self.ah_b_ch),
            ("b_ch", &self.b_ch),
            ("am_b", &self.am_b),
            ("b_cm", &self.b_cm),
            ("al_bdd", &self.al_bdd),
            ("al_bss", &self.al_bss),
            ("al_bsd", &self.al_bsd),
            ("bdd_cl", &self.bdd_cl),
            ("bss_cl", &self.bss_cl),
            ("bds_cl", &self.bds_cl),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct WarmupEngine {
    cfg: WarmupConfig,
    a: SignedAdj,
    c: SignedAdj,
    cls1: Vec<WClass>,
    cls4: Vec<WClass>,
    h1: Vec<u32>,
    m1: Vec<u32>,
    h4: Vec<u32>,
    m4: Vec<u32>,
    cur: Chunk,
    sealed: Option<Sealed>,
    stores: WarmupStores,
    /// Folded B edges by within-chunk split, kept for audits.
    folded: [SignedAdj; 4],
    b_total: SignedAdj,
    metrics: Metrics,
}

fn classify(adj: &SignedAdj, side: usize, cap: usize, cfg: &WarmupConfig) -> Vec<WClass> {
    (0..cap as u32)
        .map(|v| {
            let d = adj.side(side, v).len() as u64;
            if d >= cfg.high {
                WClass::H
            } else if d >= cfg.medium {
                WClass::M
            } else {
                WClass::L
            }
        })
        .collect()
}

impl WarmupEngine {
    /// Freezes `a` (layer 1 to 2) and `c` (layer 3 to 4) and classifies their outer layers.
    pub fn new(a: SignedAdj, c: SignedAdj, cfg: WarmupConfig) -> Result<Self> {
        if cfg.chunk_size == 0 || cfg.medium > cfg.high {
            return Err(Error::BootstrapRange { m_hat: 0, min: 0 });
        }
        let cls1 = classify(&a, 0, a.row_cap(), &cfg);
        let cls4 = classify(&c, 1, c.col_cap(), &cfg);
        let list = |cls: &[WClass], w: WClass| -> Vec<u32> {
            cls.iter().enumerate().filter(|(_, &c)| c == w).map(|(i, _)| i as u32).collect()
        };
        Ok(WarmupEngine {
            h1: list(&cls1, WClass::H),
            m1: list(&cls1, WClass::M),
            h4: list(&cls4, WClass::H),
            m4: list(&cls4, WClass::M),
            cls1,
            cls4,
            cfg,
            a,
            c,
            cur: Chunk::default(),
            sealed: None,
            stores: WarmupStores::default(),
            folded: Default::default(),
            b_total: SignedAdj::new(),
            metrics: Metrics::default(),
        })
    }

    pub fn class1(&self, u: u32) -> WClass {
        self.cls1.get(u as usize).copied().unwrap_or(WClass::L)
    }

    pub fn class4(&self, v: u32) -> WClass {
        self.cls4.get(v as usize).copied().unwrap_or(WClass::L)
    }

    pub fn high_rows(&self) -> &[u32] {
        &self.h1
    }

    pub fn config(&self) -> &WarmupConfig {
        &self.cfg
    }

    pub fn a(&self) -> &SignedAdj {
        &self.a
    }

    pub fn c(&self) -> &SignedAdj {
        &self.c
    }

    pub fn b_total(&self) -> &SignedAdj {
        &self.b_total
    }

    pub fn stores(&self) -> &WarmupStores {
        &self.stores
    }

    pub fn folded(&self, s: Split) -> &SignedAdj {
        &self.folded[s as usize]
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    pub fn metrics_mut(&mut self) -> &mut Metrics {
        &mut self.metrics
    }

    pub fn job_backlog(&self) -> u64 {
        self.sealed.as_ref().map_or(0, |s| s.jobs.backlog())
    }

    /// Edges not yet folded into the stores (sealed plus current chunk).
    pub fn window_len(&self) -> usize {
        self.cur.edges.len() + self.sealed.as_ref().map_or(0, |s| s.edges.len())
    }

    /// Rows u of `cls` class list (or A-neighbors of w2) with A(u, w2) != 0.
    fn a_rows_into(&self, w2: u32, list: &[u32], want: WClass, cls: &[WClass]) -> Vec<(u32, i64)> {
        let col = self.a.col(w2);
        if list.len() < col.len() {
            list.iter().filter_map(|&u| Some((u, self.a.get(u, w2))).filter(|x| x.1 != 0)).collect()
        } else {
            col.iter()
                .filter(|(&u, _)| cls.get(u as usize) == Some(&want))
                .map(|(&u, &v)| (u, v))
                .collect()
        }
    }

    fn c_cols_into(&self, w3: u32, list: &[u32], want: WClass, cls: &[WClass]) -> Vec<(u32, i64)> {
        let row = self.c.row(w3);
        if list.len() < row.len() {
            list.iter().filter_map(|&v| Some((v, self.c.get(w3, v))).filter(|x| x.1 != 0)).collect()
        } else {
            row.iter()
                .filter(|(&v, _)| cls.get(v as usize) == Some(&want))
                .map(|(&v, &x)| (v, x))
                .collect()
        }
    }

    /// Adds signed weight `s` to B(w2, w3).
    pub fn push(&mut self, w2: u32, w3: u32, s: i64) -> Result<()> {
        if s == 0 {
            return Ok(());
        }
        let mut ops = 0u64;
        for (list, want, is_high) in [(&self.h1, WClass::H, true), (&self.m1, WClass::M, false)] {
            let rows = self.a_rows_into(w2, list, want, &self.cls1);
            ops += rows.len() as u64 + 1;
            let t = if is_high { &mut self.cur.online.ah } else { &mut self.cur.online.am };
            for (u, av) in rows {
                t.add(u, w3, av * s);
            }
        }
        for (list, want, is_high) in [(&self.h4, WClass::H, true), (&self.m4, WClass::M, false)] {
            let cols = self.c_cols_into(w3, list, want, &self.cls4);
            ops += cols.len() as u64 + 1;
            let t = if is_high { &mut self.cur.online.ch } else { &mut self.cur.online.cm };
            for (v, cv) in cols {
                t.add(w2, v, s * cv);
            }
        }
        self.cur.edges.push((w2, w3, s));
        *self.cur.deg2.entry(w2).or_insert(0) += s.unsigned_abs();
        *self.cur.deg3.entry(w3).or_insert(0) += s.unsigned_abs();
        self.b_total.add(w2, w3, s);
        self.metrics.charge(ops);
        if let Some(sealed) = self.sealed.as_mut() {
            match sealed.jobs.tick() {
                Ok(used) => self.metrics.charge_job(used),
                Err(_) => self.metrics.deadline_misses += 1,
            }
        }
        if self.cur.edges.len() as u64 >= self.cfg.chunk_size {
            self.seal()?;
        }
        self.metrics.job_backlog = self.job_backlog();
        Ok(())
    }

    /// Folds the previously sealed chunk, then seals the current one and starts its jobs.
    fn seal(&mut self) -> Result<()> {
        self.fold_sealed()?;
        let chunk = std::mem::take(&mut self.cur);
        let sparse = self.cfg.chunk_sparse;
        let edges: Vec<(u32, u32, i64, Split)> = chunk
            .edges
            .iter()
            .map(|&(w2, w3, s)| {
                let d2 = chunk.deg2[&w2] > sparse;
                let d3 = chunk.deg3[&w3] > sparse;
                (w2, w3, s, Split::of(d2, d3))
            })
            .collect();
        let mut jobs = Vec::new();
        let mut build_ops = 0u64;
        // (A^{H*} B_i) C^{*H}
        let ah = CountMatrix::from_pairs(&chunk.online.ah);
        let ch = CountMatrix::from_entries(ah.col_ids().iter().flat_map(|&w3| {
            let cls4 = &self.cls4;
            self.c
                .row(w3)
                .iter()
                .filter(move |(&v, _)| cls4.get(v as usize) == Some(&WClass::H))
                .map(move |(&v, &x)| (w3, v, x))
        }));
        build_ops += (ah.nrows() * ah.ncols() + ch.nrows() * ch.ncols()) as u64;
        jobs.push((JobKind::HighTriple, ProductJob::new(ah, ch, u64::MAX)));
        for split in [Split::DD, Split::SS, Split::SD] {
            let b: Vec<_> = edges.iter().filter(|e| e.3 == split).map(|e| (e.0, e.1, e.2)).collect();
            if b.is_empty() {
                continue;
            }
            let bm = CountMatrix::from_entries(b);
            let al = CountMatrix::from_entries(bm.row_ids().iter().flat_map(|&w2| {
                let cls1 = &self.cls1;
                self.a
                    .col(w2)
                    .iter()
                    .filter(move |(&u, _)| cls1.get(u as usize).copied().unwrap_or(WClass::L) == WClass::L)
                    .map(move |(&u, &x)| (u, w2, x))
            }));
            build_ops += (al.nrows() * al.ncols()) as u64;
            jobs.push((JobKind::LowLeft(split), ProductJob::new(al, bm, u64::MAX)));
        }
        for split in [Split::DD, Split::SS, Split::DS] {
            let b: Vec<_> = edges.iter().filter(|e| e.3 == split).map(|e| (e.0, e.1, e.2)).collect();
            if b.is_empty() {
                continue;
            }
            let bm = CountMatrix::from_entries(b);
            let cl = CountMatrix::from_entries(bm.col_ids().iter().flat_map(|&w3| {
                let cls4 = &self.cls4;
                self.c
                    .row(w3)
                    .iter()
                    .filter(move |(&v, _)| cls4.get(v as usize).copied().unwrap_or(WClass::L) == WClass::L)
                    .map(move |(&v, &x)| (w3, v, x))
            }));
            build_ops += (cl.nrows() * cl.ncols()) as u64;
            jobs.push((JobKind::LowRight(split), ProductJob::new(bm, cl, u64::MAX)));
        }
        self.metrics.charge(build_ops + edges.len() as u64);
        self.metrics.chunks_sealed += 1;
        self.sealed = Some(Sealed {
            edges,
            online: chunk.online,
            jobs: JobSet::new(jobs, self.cfg.chunk_size, self.cfg.budget),
        });
        Ok(())
    }

    fn fold_sealed(&mut self) -> Result<()> {
        let Some(mut sealed) = self.sealed.take() else {
            return Ok(());
        };
        if !sealed.jobs.is_done() {
            if !sealed.jobs.missed() {
                self.metrics.deadline_misses += 1;
            }
            let used = sealed.jobs.finish()?;
            self.metrics.charge_job(used);
        }
        let mut ops = 0u64;
        let st = &mut self.stores;
        for (dst, src) in [
            (&mut st.ah_b, &sealed.online.ah),
            (&mut st.am_b, &sealed.online.am),
            (&mut st.b_ch, &sealed.online.ch),
            (&mut st.b_cm, &sealed.online.cm),
        ] {
            dst.add_all(src);
            ops += src.len() as u64;
        }
        for (kind, m) in sealed.jobs.into_results()? {
            let dst = match kind {
                JobKind::HighTriple => &mut st.ah_b_ch,
                JobKind::LowLeft(Split::DD) => &mut st.al_bdd,
                JobKind::LowLeft(Split::SS) => &mut st.al_bss,
                JobKind::LowLeft(_) => &mut st.al_bsd,
                JobKind::LowRight(Split::DD) => &mut st.bdd_cl,
                JobKind::LowRight(Split::SS) => &mut st.bss_cl,
                JobKind::LowRight(_) => &mut st.bds_cl,
            };
            let p = m.to_pairs();
            ops += p.len() as u64;
            dst.add_all(&p);
        }
        for &(w2, w3, s, split) in &sealed.edges {
            self.folded[split as usize].add(w2, w3, s);
        }
        self.metrics.charge(ops);
        Ok(())
    }

    /// Seals the partial current chunk and folds everything, leaving no window.
    pub fn flush(&mut self) -> Result<()> {
        if !self.cur.edges.is_empty() {
            self.seal()?;
        }
        self.fold_sealed()
    }

    /// 3-path count from `u` (layer 1) to `v` (layer 4) over every pushed B weight.
    pub fn query(&mut self, u: u32, v: u32) -> i64 {
        self.metrics.queries += 1;
        let mut ops = 0u64;
        let mut total = 0i64;
        let (a, c) = (&self.a, &self.c);
        let mut lazy = |w2: u32, w3: u32, s: i64| {
            let av = a.get(u, w2);
            if av != 0 {
                total += s * av * c.get(w3, v);
            }
        };
        if let Some(sealed) = &self.sealed {
            for &(w2, w3, s, _) in &sealed.edges {
                lazy(w2, w3, s);
            }
            ops += sealed.edges.len() as u64;
        }
        for &(w2, w3, s) in &self.cur.edges {
            lazy(w2, w3, s);
        }
        ops += self.cur.edges.len() as u64;
        total += self.stored(u, v, &mut ops);
        self.metrics.charge(ops);
        total
    }

    fn stored(&self, u: u32, v: u32, ops: &mut u64) -> i64 {
        let st = &self.stores;
        let (cu, cv) = (self.class1(u), self.class4(v));
        let via_c = |t: &PairCount, ops: &mut u64| -> i64 {
            let col = self.c.col(v);
            *ops += col.len() as u64;
            col.iter().map(|(&w3, &x)| t.get(u, w3) * x).sum()
        };
        let via_a = |t: &PairCount, ops: &mut u64| -> i64 {
            let row = self.a.row(u);
            *ops += row.len() as u64;
            row.iter().map(|(&w2, &x)| x * t.get(w2, v)).sum()
        };
        match (cu, cv) {
            (WClass::H, WClass::H) => {
                *ops += 1;
                st.ah_b_ch.get(u, v)
            }
            (WClass::H, _) => via_c(&st.ah_b, ops),
            (WClass::M, WClass::M | WClass::L) => via_c(&st.am_b, ops),
            (WClass::M | WClass::L, WClass::H) => via_a(&st.b_ch, ops),
            (WClass::L, WClass::M) => via_a(&st.b_cm, ops),
            (WClass::L, WClass::L) => {
                let col = self.c.col(v);
                *ops += col.len() as u64;
                let left: i64 = col
                    .iter()
                    .map(|(&w3, &x)| (st.al_bdd.get(u, w3) + st.al_bss.get(u, w3) + st.al_bsd.get(u, w3)) * x)
                    .sum();
                left + via_a(&st.bds_cl, ops)
            }
        }
    }

    /// Canonical dump of every store, the window and the folded edges.
    pub fn digest(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, p) in self.stores.named() {
            for ((x, y), v) in p.sorted() {
                out.push(format!("warm.{name}({x},{y})={v}"));
            }
        }
        for s in Split::ALL {
            for (x, y, v) in self.folded[s as usize].entries() {
                out.push(format!("warm.folded{s:?}({x},{y})={v}"));
            }
        }
        for (x, y, v) in self.b_total.entries() {
            out.push(format!("warm.b({x},{y})={v}"));
        }
        out.push(format!("warm.window={}", self.window_len()));
        out
    }
}

/// The warm-up engine behind the layered interface: A and C updates must
/// all arrive before the first B or D update.
#[derive(Debug, Clone)]
pub struct WarmupLayered {
    g: LayeredGraph,
    cfg: WarmupConfig,
    engine: Option<WarmupEngine>,
    metrics: Metrics,
}

impl WarmupLayered {
    pub fn new(cfg: WarmupConfig) -> Self {
        WarmupLayered { g: LayeredGraph::new(), cfg, engine: None, metrics: Metrics::default() }
    }

    pub fn inner(&self) -> Option<&WarmupEngine> {
        self.engine.as_ref()
    }

    pub fn inner_mut(&mut self) -> Option<&mut WarmupEngine> {
        self.engine.as_mut()
    }

    fn freeze(&mut self) -> Result<&mut WarmupEngine> {
        if self.engine.is_none() {
            let e = WarmupEngine::new(self.g.mat(MatrixId::A).clone(), self.g.mat(MatrixId::C).clone(), self.cfg)?;
            self.engine = Some(e);
        }
        Ok(self.engine.as_mut().expect("frozen"))
    }

    /// Change of the layered 4-cycle count caused by toggling B(w2, w3):
    /// the number of (u, v) with A(u,w2), C(w3,v) and D(v,u).
    pub fn b_delta(&self, w2: u32, w3: u32) -> i64 {
        let (a, c, d) = (self.g.mat(MatrixId::A), self.g.mat(MatrixId::C), self.g.mat(MatrixId::D));
        let mut s = 0;
        for &u in a.col(w2).keys() {
            for &v in c.row(w3).keys() {
                s += d.get(v, u);
            }
        }
        s
    }
}

impl LayeredEngine for WarmupLayered {
    fn apply(&mut self, e: &UpdateEvent) -> Result<()> {
        self.g.check(e)?;
        self.metrics.begin_update();
        match e.matrix {
            MatrixId::A | MatrixId::C => {
                if self.engine.is_some() {
                    return Err(Error::Unsupported(
                        "warm-up engine needs every A/C update before the first B/D update".into(),
                    ));
                }
            }
            MatrixId::B => {
                let w = self.freeze()?;
                let before = w.metrics().ops;
                w.push(e.x, e.y, e.op.sign())?;
                let used = w.metrics().ops - before;
                let backlog = w.job_backlog();
                self.metrics.charge(used);
                self.metrics.job_backlog = backlog;
            }
            MatrixId::D => {
                self.freeze()?;
            }
        }
        self.g.apply(e)?;
        if let Some(w) = &self.engine {
            self.metrics.deadline_misses = w.metrics().deadline_misses;
        }
        self.metrics.end_update();
        Ok(())
    }

    fn query(&mut self, u: u32, v: u32) -> Result<i64> {
        self.metrics.queries += 1;
        let w = self.freeze()?;
        let before = w.metrics().ops;
        let r = w.query(u, v);
        let used = w.metrics().ops - before;
        self.metrics.charge(used);
        Ok(r)
    }

    fn graph(&self) -> &LayeredGraph {
        &self.g
    }

    fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    fn name(&self) -> &'static str {
        "warmup"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> WarmupConfig {
        WarmupConfig { high: 4, medium: 2, chunk_size: 3, chunk_sparse: 1, budget: 4 }
    }

    #[test]
    fn empty_engine_answers_zero() {
        let mut w = WarmupEngine::new(SignedAdj::new(), SignedAdj::new(), cfg()).unwrap();
        assert_eq!(w.query(0, 0), 0);
        w.push(1, 1, 1).unwrap();
        assert_eq!(w.query(0, 0), 0);
    }

    #[test]
    fn canon_two_wedges() {
        let mut a = SignedAdj::new();
        a.add(0, 1, 1);
        a.add(0, 2, 1);
        let mut c = SignedAdj::new();
        c.add(0, 0, 1);
        let mut w = WarmupEngine::new(a, c, cfg()).unwrap();
        w.push(1, 0, 1).unwrap();
        assert_eq!(w.query(0, 0), 1);
        w.push(2, 0, 1).unwrap();
        assert_eq!(w.query(0, 0), 2);
        assert_eq!(w.window_len(), 2);
    }

    #[test]
    fn single_high_row() {
        let mut a = SignedAdj::new();
        for j in 0..4 {
            a.add(0, j, 1);
        }
        a.add(1, 0, 1);
        let w = WarmupEngine::new(a, SignedAdj::new(), cfg()).unwrap();
        assert_eq!(w.high_rows(), &[0]);
        assert_eq!(w.class1(1), WClass::L);
    }

    #[test]
    fn late_ac_update_rejected() {
        let mut w = WarmupLayered::new(cfg());
        w.apply(&UpdateEvent::insert(MatrixId::A, 0, 0)).unwrap();
        w.apply(&UpdateEvent::insert(MatrixId::B, 0, 0)).unwrap();
        assert!(matches!(w.apply(&UpdateEvent::insert(MatrixId::C, 0, 0)), Err(Error::Unsupported(_))));
    }
}
