//! Fully dynamic layered 3-path counting with degree classes, phases and
//! deferred products.

pub mod classes;
pub mod parts;
pub mod phase;
pub mod query;
pub mod stores;
pub mod transition;

use crate::engine::LayeredEngine;
use crate::error::Result;
use crate::graph::{LayeredGraph, MatrixId, SignedAdj, UpdateEvent};
use crate::metrics::Metrics;
use crate::naive::LayeredNaive;
use crate::pairs::PairCount;
use crate::params::{bootstrap_minimum, thresholds_with, ParamSet, Thresholds, DEFAULT_BUDGET_MULTIPLIER};
use crate::warmup::{WarmupConfig, WarmupEngine};

use classes::{Bands, Class, Classes, Committed};
use parts::{Parts, View};
use phase::PhaseJob;
use query::{Ctx, Record, Sink, Total};
use stores::{Tables, SPECS};
use transition::{Observed, Transitions};

/// How the reference edge count m̂ is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MHat {
    /// Start on the naive engine and rebuild whenever m leaves [m̂/2, 2m̂].
    Auto,
    Fixed(u64),
}

#[derive(Debug, Clone)]
pub struct MainConfig {
    pub params: ParamSet,
    pub m_hat: MHat,
    pub budget_multiplier: u64,
}

impl Default for MainConfig {
    fn default() -> Self {
        MainConfig { params: ParamSet::best_possible(), m_hat: MHat::Auto, budget_multiplier: DEFAULT_BUDGET_MULTIPLIER }
    }
}

impl MainConfig {
    pub fn fixed(m_hat: u64) -> Self {
        MainConfig { m_hat: MHat::Fixed(m_hat), ..Self::default() }
    }
}

/// Budget slices beyond the phase job's pace allowed per update.
pub const UPDATE_CAP_SLICES: u64 = 3;

/// Index of the embedded warm-up instance for a (layer-2, layer-3) class pair.
fn warm_slot(c2: Class, c3: Class) -> Option<usize> {
    match (c2, c3) {
        (Class::S, Class::S) => Some(0),
        (Class::D, Class::D) => Some(1),
        _ => None,
    }
}

/// The engine state for one m̂.
pub struct Core {
    th: Thresholds,
    bands: Bands,
    parts: Parts,
    classes: Classes,
    stores: Tables,
    warm: [WarmupEngine; 2],
    next_warm: [WarmupEngine; 2],
    job: Option<PhaseJob>,
    phase_len: u64,
    trans: Transitions,
    metrics: Metrics,
    retired_warm_misses: u64,
    retired_warm_chunks: u64,
}

fn warm_pair(a: &SignedAdj, c: &SignedAdj, cfg: WarmupConfig) -> Result<[WarmupEngine; 2]> {
    Ok([WarmupEngine::new(a.clone(), c.clone(), cfg)?, WarmupEngine::new(a.clone(), c.clone(), cfg)?])
}

impl Core {
    /// Builds every table from scratch for the graph `g`.
    pub fn build(g: &LayeredGraph, th: Thresholds) -> Result<Self> {
        let bands = Bands::new(&th);
        let all = [g.mat(MatrixId::A).clone(), g.mat(MatrixId::B).clone(), g.mat(MatrixId::C).clone()];
        let parts = Parts::rebased(all);
        let mut core = Core {
            warm: warm_pair(&parts.old[0], &parts.old[2], WarmupConfig::from_thresholds(&th))?,
            next_warm: warm_pair(&parts.old[0], &parts.old[2], WarmupConfig::from_thresholds(&th))?,
            th,
            bands,
            parts,
            classes: Classes::default(),
            stores: stores::empty_tables(),
            job: None,
            phase_len: 0,
            trans: Transitions::default(),
            metrics: Metrics::default(),
            retired_warm_misses: 0,
            retired_warm_chunks: 0,
        };
        for layer in 1..=4u8 {
            let cap = core.layer_cap(layer);
            for v in 0..cap {
                let d = core.degree(layer, v);
                let c = core.bands.initial(layer == 1 || layer == 4, d);
                if c != Class::T {
                    core.classes.set(layer, v, c);
                }
            }
        }
        let mut ops = 0;
        for s in 0..stores::COUNT {
            let (t, o) = stores::recompute(s, &View::live(&core.parts), &Committed { classes: &core.classes, alt: None });
            core.stores[s] = t;
            ops += o;
        }
        core.start_job();
        core.metrics.boundary_ops += ops;
        Ok(core)
    }

    fn layer_cap(&self, layer: u8) -> u32 {
        let a = &self.parts.all;
        (match layer {
            1 => a[0].row_cap(),
            2 => a[0].col_cap().max(a[1].row_cap()),
            3 => a[1].col_cap().max(a[2].row_cap()),
            _ => a[2].col_cap(),
        }) as u32
    }

    /// Degree used for classification: A for layer 1, C for layer 4, and
    /// both incident matrices for the middle layers.
    pub fn degree(&self, layer: u8, v: u32) -> u64 {
        let a = &self.parts.all;
        (match layer {
            1 => a[0].row(v).len(),
            2 => a[0].col(v).len() + a[1].row(v).len(),
            3 => a[1].col(v).len() + a[2].row(v).len(),
            _ => a[2].col(v).len(),
        }) as u64
    }

    /// Per-update work cap: the phase job's pace plus three budget slices
    /// (transition step with one overrun task, warm-up chunk jobs, maintenance).
    pub fn update_cap(&self) -> u64 {
        let pace = self.job.as_ref().map_or(0, |j| j.jobs.pace());
        pace + UPDATE_CAP_SLICES * self.th.per_update_budget
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.th
    }

    pub fn classes(&self) -> &Classes {
        &self.classes
    }

    pub fn class(&self, layer: u8, v: u32) -> Class {
        self.classes.get(layer, v)
    }

    pub fn parts(&self) -> &Parts {
        &self.parts
    }

    pub fn table(&self, s: usize) -> &PairCount {
        &self.stores[s]
    }

    pub fn transitions(&self) -> &Transitions {
        &self.trans
    }

    pub fn phase_len(&self) -> u64 {
        self.phase_len
    }

    fn start_job(&mut self) {
        let next_old = [self.parts.next_old(0), self.parts.next_old(1), self.parts.next_old(2)];
        let job = PhaseJob::start(&next_old, &self.classes, self.th.phase_size, self.th.per_update_budget);
        self.metrics.boundary_ops += job.build_ops;
        self.metrics.charge(job.build_ops);
        self.job = Some(job);
    }

    /// Applies one A, B or C change (D changes only advance the schedule).
    fn apply_abc(&mut self, m: usize, x: u32, y: u32, d: i64) {
        let alt = self.trans.alt();
        let view = View::live(&self.parts);
        let cv = Committed { classes: &self.classes, alt };
        let mut ops = 0;
        let active = self.trans.active.as_mut();
        let mut overlay = active.map(|a| &mut a.overlay);
        for (s, spec) in SPECS.iter().enumerate() {
            if spec.phased {
                continue;
            }
            let f0 = spec.kind.first_mat();
            if m < f0 || m >= f0 + spec.kind.factors() {
                continue;
            }
            let f = m - f0;
            if spec.parts[f] == parts::Part::Old {
                continue;
            }
            let table = &mut self.stores[s];
            let mut ov = overlay.as_deref_mut().map(|o| &mut o[s]);
            ops += stores::complete(spec, f, x, y, d, &view, &cv, &mut |k1, k2, w, o, n| {
                if o {
                    table.add(k1, k2, w);
                }
                if o != n {
                    if let Some(ov) = ov.as_deref_mut() {
                        ov.add(k1, k2, w * (n as i64 - o as i64));
                    }
                }
            });
        }
        self.parts.update(m, x, y, d);
        self.trans.log_update(m, x, y, d);
        if m == 1 {
            if let Some(slot) = warm_slot(self.classes.get(2, x), self.classes.get(3, y)) {
                for w in [&mut self.warm[slot], &mut self.next_warm[slot]] {
                    let before = w.metrics().ops;
                    // infallible: pushes never fail once the engine exists
                    w.push(x, y, d).ok();
                    ops += w.metrics().ops - before;
                }
            }
        }
        self.metrics.charge(ops);
        let (lx, ly) = (m as u8 + 1, m as u8 + 2);
        self.observe(lx, x);
        self.observe(ly, y);
    }

    fn observe(&mut self, layer: u8, v: u32) {
        let deg = self.degree(layer, v);
        let c = self.classes.get(layer, v);
        let target = self.bands.target(layer == 1 || layer == 4, c, deg);
        let (o, ops) = self.trans.observe(layer, v, deg, target, &self.parts);
        self.metrics.charge(ops);
        match o {
            Observed::Queued => {}
            Observed::Cancelled => self.metrics.transitions_cancelled += 1,
            Observed::Late => self.metrics.deadline_misses += 1,
            Observed::Retargeted => self.metrics.transitions_started += 1,
            Observed::Quiet => {}
        }
    }

    /// Advances the active transition and commits it when done.
    fn step_transitions(&mut self, budget: u64) {
        let classes = &self.classes;
        if let Some(ops) = self.trans.activate(&self.parts, |l, v| classes.get(l, v)) {
            self.metrics.transitions_started += 1;
            self.metrics.charge_job(ops);
        }
        if let Some(a) = self.trans.active.as_mut() {
            let used = a.step(&self.parts, &self.classes, budget);
            self.metrics.charge_job(used);
        }
        self.commit_done();
    }

    fn commit_done(&mut self) {
        let Some(a) = self.trans.take_done() else { return };
        let mut ops = 0;
        for (s, ov) in a.overlay.iter().enumerate() {
            ops += ov.len() as u64;
            self.stores[s].add_all(ov);
        }
        if a.layer == 2 || a.layer == 3 {
            ops += self.rewarm(a.layer, a.v, a.to);
        }
        self.classes.set(a.layer, a.v, a.to);
        if let Some(j) = self.job.as_mut() {
            j.record((a.layer, a.v, a.from, a.to));
        }
        self.metrics.charge_job(ops);
        self.metrics.transitions_committed += 1;
        self.metrics.class_switches += 1;
        self.observe(a.layer, a.v);
    }

    /// Moves the B weights of a reclassified middle vertex between warm-up instances.
    fn rewarm(&mut self, layer: u8, z: u32, to: Class) -> u64 {
        let mut ops = 0;
        for (inst, src) in [(0usize, &self.parts.new[1]), (1, &self.parts.cur[1])] {
            let entries: Vec<(u32, u32, i64)> = if layer == 2 {
                src.row(z).iter().map(|(&w3, &b)| (z, w3, b)).collect()
            } else {
                src.col(z).iter().map(|(&w2, &b)| (w2, z, b)).collect()
            };
            for (w2, w3, b) in entries {
                let (c2, c3) = (self.classes.get(2, w2), self.classes.get(3, w3));
                let (b2, b3) = if layer == 2 { (to, c3) } else { (c2, to) };
                let (before, after) = (warm_slot(c2, c3), warm_slot(b2, b3));
                if before == after {
                    continue;
                }
                let set = if inst == 0 { &mut self.warm } else { &mut self.next_warm };
                if let Some(s) = before {
                    set[s].push(w2, w3, -b).ok();
                }
                if let Some(s) = after {
                    set[s].push(w2, w3, b).ok();
                }
                ops += 2;
            }
        }
        ops
    }

    /// Finishes every active and queued transition.
    fn drain_transitions(&mut self) {
        loop {
            if self.trans.active.is_none() && self.trans.pending.is_empty() {
                break;
            }
            let before = self.metrics.transitions_committed + self.metrics.transitions_cancelled;
            self.step_transitions(u64::MAX);
            if self.trans.active.is_none() && self.trans.queue.is_empty() && !self.trans.pending.is_empty() {
                // stale entries with no queue slot
                let keys: Vec<_> = self.trans.pending.keys().copied().collect();
                self.trans.queue.extend(keys);
            }
            debug_assert!(
                self.metrics.transitions_committed + self.metrics.transitions_cancelled >= before
                    || self.trans.active.is_some()
            );
        }
    }

    /// Phase boundary: commit, rotate, fold the old-part products, re-base
    /// the tables that split on old/new, and start the next products.
    fn boundary(&mut self) -> Result<()> {
        let before = self.metrics.ops;
        if let Some(a) = self.trans.active.as_mut() {
            let used = a.step(&self.parts, &self.classes, u64::MAX);
            self.metrics.charge(used);
            self.commit_done();
        }
        let rot = self.parts.rotate();
        self.metrics.charge(rot);
        if let Some(job) = self.job.take() {
            if !job.jobs.is_done() && !job.jobs.missed() {
                self.metrics.deadline_misses += 1;
            }
            let (tables, ops) = job.fold(&View::live(&self.parts))?;
            for (s, t) in tables {
                self.stores[s] = t;
            }
            self.metrics.charge(ops);
        }
        for s in [stores::AN_BO_DD, stores::BO_CN_DD].into_iter().chain(stores::HSSH) {
            let (t, o) = stores::recompute(s, &View::live(&self.parts), &Committed { classes: &self.classes, alt: None });
            self.stores[s] = t;
            self.metrics.charge(o);
        }
        let cfg = WarmupConfig::from_thresholds(&self.th);
        let next_a = self.parts.next_old(0);
        let next_c = self.parts.next_old(2);
        let fresh = warm_pair(&next_a, &next_c, cfg)?;
        self.metrics.charge((next_a.nnz() + next_c.nnz()) as u64 * 2);
        let old = std::mem::replace(&mut self.warm, std::mem::replace(&mut self.next_warm, fresh));
        self.retired_warm_misses += old.iter().map(|w| w.metrics().deadline_misses).sum::<u64>();
        self.retired_warm_chunks += old.iter().map(|w| w.metrics().chunks_sealed).sum::<u64>();
        self.start_job();
        self.phase_len = 0;
        self.metrics.phases += 1;
        self.metrics.boundary_ops += self.metrics.ops - before;
        Ok(())
    }

    fn tick_job(&mut self) {
        if let Some(j) = self.job.as_mut() {
            match j.jobs.tick() {
                Ok(used) => self.metrics.charge_job(used),
                Err(_) => self.metrics.deadline_misses += 1,
            }
            self.metrics.job_backlog = j.jobs.backlog();
        }
    }

    pub fn apply(&mut self, e: &UpdateEvent) -> Result<()> {
        let d = e.op.sign();
        match e.matrix {
            MatrixId::D => {}
            m => self.apply_abc(m.index(), e.x, e.y, d),
        }
        self.step_transitions(self.th.per_update_budget);
        self.tick_job();
        self.phase_len += 1;
        if self.phase_len >= self.th.phase_size {
            self.boundary()?;
        }
        Ok(())
    }

    fn ctx(&mut self) -> Ctx<'_> {
        Ctx { parts: &self.parts, classes: &self.classes, stores: &self.stores, warm: &mut self.warm, ops: 0 }
    }

    pub fn query_with(&mut self, u: u32, v: u32, sink: &mut impl Sink) -> u64 {
        let mut c = self.ctx();
        c.run(u, v, sink);
        let ops = c.ops;
        self.metrics.charge(ops);
        ops
    }

    pub fn query(&mut self, u: u32, v: u32) -> i64 {
        let mut t = Total::default();
        self.query_with(u, v, &mut t);
        t.0
    }

    /// Terms of one query with the buckets each claims.
    pub fn attribute(&mut self, u: u32, v: u32) -> Record {
        let mut r = Record::default();
        self.query_with(u, v, &mut r);
        r
    }

    /// Completes pending transitions and two empty phases, so the state
    /// depends only on the graph.
    pub fn flush(&mut self) -> Result<()> {
        for _ in 0..2 {
            self.drain_transitions();
            self.boundary()?;
        }
        self.drain_transitions();
        if let Some(j) = self.job.as_mut() {
            let used = j.jobs.finish()?;
            self.metrics.charge(used);
        }
        for w in self.warm.iter_mut().chain(self.next_warm.iter_mut()) {
            w.flush()?;
        }
        Ok(())
    }

    /// Canonical dump of the tables, parts, classes and warm-up instances.
    pub fn digest(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (s, spec) in SPECS.iter().enumerate() {
            for ((x, y), v) in self.stores[s].sorted() {
                out.push(format!("{}({x},{y})={v}", spec.name));
            }
        }
        for (name, set) in [("old", &self.parts.old), ("new", &self.parts.new), ("cur", &self.parts.cur)] {
            for (m, adj) in set.iter().enumerate() {
                for (x, y, v) in adj.entries() {
                    out.push(format!("{name}{m}({x},{y})={v}"));
                }
            }
        }
        for (l, v, c) in self.classes.nondefault() {
            out.push(format!("class{l}({v})={c:?}"));
        }
        for (i, w) in self.warm.iter().chain(self.next_warm.iter()).enumerate() {
            out.extend(w.digest().into_iter().map(|s| format!("w{i}.{s}")));
        }
        out.push(format!("pending={}", self.trans.pending.len()));
        out
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    pub fn warm_chunks(&self) -> u64 {
        self.retired_warm_chunks + self.warm.iter().chain(self.next_warm.iter()).map(|w| w.metrics().chunks_sealed).sum::<u64>()
    }

    /// Chunk-job deadline misses of the embedded warm-up instances.
    pub fn warm_misses(&self) -> u64 {
        self.retired_warm_misses
            + self.warm.iter().chain(self.next_warm.iter()).map(|w| w.metrics().deadline_misses).sum::<u64>()
    }
}

enum State {
    Naive(Box<LayeredNaive>),
    Full(Box<Core>),
}

/// The main engine behind the layered interface.
pub struct MainEngine {
    cfg: MainConfig,
    g: LayeredGraph,
    state: State,
    metrics: Metrics,
    min_m_hat: u64,
}

impl MainEngine {
    pub fn new(cfg: MainConfig) -> Result<Self> {
        let min_m_hat = bootstrap_minimum(&cfg.params);
        let g = LayeredGraph::new();
        let state = match cfg.m_hat {
            MHat::Auto => State::Naive(Box::default()),
            MHat::Fixed(m_hat) => {
                let th = thresholds_with(m_hat, &cfg.params, cfg.budget_multiplier)?;
                State::Full(Box::new(Core::build(&g, th)?))
            }
        };
        Ok(MainEngine { cfg, g, state, metrics: Metrics::default(), min_m_hat })
    }

    pub fn with_m_hat(m_hat: u64) -> Result<Self> {
        Self::new(MainConfig::fixed(m_hat))
    }

    pub fn core(&self) -> Option<&Core> {
        match &self.state {
            State::Full(c) => Some(c),
            State::Naive(_) => None,
        }
    }

    pub fn core_mut(&mut self) -> Option<&mut Core> {
        match &mut self.state {
            State::Full(c) => Some(c),
            State::Naive(_) => None,
        }
    }

    pub fn min_m_hat(&self) -> u64 {
        self.min_m_hat
    }

    fn rebuild(&mut self) -> Result<()> {
        let m = self.g.m();
        let before = self.metrics.ops;
        self.state = if m < self.min_m_hat {
            State::Naive(Box::new(LayeredNaive::from_graph(&self.g)))
        } else {
            let th = thresholds_with(m, &self.cfg.params, self.cfg.budget_multiplier)?;
            let core = Core::build(&self.g, th)?;
            self.metrics.charge(core.metrics().boundary_ops);
            State::Full(Box::new(core))
        };
        self.metrics.charge(m);
        self.metrics.rebuilds += 1;
        self.metrics.last_rebuild = true;
        self.metrics.boundary_ops += self.metrics.ops - before;
        self.metrics.last_boundary_ops += self.metrics.ops - before;
        Ok(())
    }

    fn needs_rebuild(&self) -> bool {
        if self.cfg.m_hat != MHat::Auto {
            return false;
        }
        let m = self.g.m();
        match &self.state {
            State::Naive(_) => m >= self.min_m_hat,
            State::Full(c) => {
                let mh = c.thresholds().m_hat;
                2 * m < mh || m > 2 * mh
            }
        }
    }

    pub fn flush(&mut self) -> Result<()> {
        if let State::Full(c) = &mut self.state {
            c.flush()?;
        }
        Ok(())
    }

    pub fn digest(&self) -> Vec<String> {
        match &self.state {
            State::Full(c) => c.digest(),
            State::Naive(n) => n.ab().sorted().into_iter().map(|((x, y), v)| format!("ab({x},{y})={v}")).collect(),
        }
    }

    pub fn attribute(&mut self, u: u32, v: u32) -> Option<Record> {
        self.core_mut().map(|c| c.attribute(u, v))
    }

    fn sync_metrics(&mut self, inner: &Metrics) {
        let m = &mut self.metrics;
        m.job_backlog = inner.job_backlog;
        m.deadline_misses = inner.deadline_misses;
        m.phases = inner.phases;
        m.transitions_started = inner.transitions_started;
        m.transitions_committed = inner.transitions_committed;
        m.transitions_cancelled = inner.transitions_cancelled;
        m.class_switches = inner.class_switches;
        m.boundary_ops = inner.boundary_ops;
        m.chunks_sealed = inner.chunks_sealed;
    }
}

impl LayeredEngine for MainEngine {
    fn apply(&mut self, e: &UpdateEvent) -> Result<()> {
        self.g.check(e)?;
        self.metrics.begin_update();
        let before = match &self.state {
            State::Full(c) => c.metrics().ops,
            State::Naive(n) => n.metrics().ops,
        };
        match &mut self.state {
            State::Naive(n) => {
                n.apply(e)?;
                let used = n.metrics().ops - before;
                self.metrics.charge(used);
            }
            State::Full(c) => {
                self.metrics.last_cap = c.update_cap();
                let jobs_before = c.metrics.job_ops;
                let boundary_before = c.metrics.boundary_ops;
                c.apply(e)?;
                self.metrics.last_boundary_ops = c.metrics.boundary_ops - boundary_before;
                let used = c.metrics().ops - before;
                let jobs = c.metrics.job_ops - jobs_before;
                self.metrics.charge(used - jobs);
                self.metrics.charge_job(jobs);
                let mut inner = c.metrics().clone();
                inner.deadline_misses += c.warm_misses();
                inner.chunks_sealed += c.warm_chunks();
                self.sync_metrics(&inner);
            }
        }
        self.g.apply(e)?;
        if self.needs_rebuild() {
            self.rebuild()?;
        }
        self.metrics.end_update();
        Ok(())
    }

    fn query(&mut self, u: u32, v: u32) -> Result<i64> {
        self.metrics.queries += 1;
        match &mut self.state {
            State::Naive(n) => {
                let before = n.metrics().ops;
                let r = n.query(u, v)?;
                let used = n.metrics().ops - before;
                self.metrics.charge(used);
                Ok(r)
            }
            State::Full(c) => {
                let before = c.metrics().ops;
                let r = c.query(u, v);
                let used = c.metrics().ops - before;
                self.metrics.charge(used);
                Ok(r)
            }
        }
    }

    fn graph(&self) -> &LayeredGraph {
        &self.g
    }

    fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    fn name(&self) -> &'static str {
        "main"
    }
}

