//! Serialized class transitions.
//!
//! A vertex whose degree leaves the band of its class is queued. The active
//! transition re-enumerates the paths through the vertex as of its start in
//! small steps, while later updates add their own difference directly; the
//! change is committed once the enumeration is complete.

use std::collections::VecDeque;

use rustc_hash::FxHashMap;

use super::classes::{Class, Committed};
use super::parts::{ChangeLog, Parts, View};
use super::stores::{complete, root_at, Tables, COUNT, SPECS};
use crate::pairs::PairCount;

#[derive(Debug, Clone, Copy)]
pub struct Pending {
    pub target: Class,
    /// Degree when the band was left.
    pub deg0: u64,
    pub late: bool,
}

#[derive(Debug, Clone, Copy)]
struct Task {
    store: usize,
    f: usize,
    is_row: bool,
    w: u32,
    val: i64,
}

pub struct Active {
    pub layer: u8,
    pub v: u32,
    pub from: Class,
    pub to: Class,
    tasks: Vec<Task>,
    next: usize,
    pub log: ChangeLog,
    pub overlay: Tables,
}

impl Active {
    /// Snapshots the rows of `v` that root every affected table's paths.
    pub fn start(layer: u8, v: u32, from: Class, to: Class, parts: &Parts) -> (Self, u64) {
        let view = View::live(parts);
        let mut tasks = Vec::new();
        for (s, spec) in SPECS.iter().enumerate() {
            if !spec.sensitive(layer, from, to) {
                continue;
            }
            let (f, is_row) = root_at(spec, layer);
            let mat = spec.kind.first_mat() + f;
            for (w, val) in view.side(mat, spec.parts[f], if is_row { 0 } else { 1 }, v) {
                tasks.push(Task { store: s, f, is_row, w, val });
            }
        }
        let ops = tasks.len() as u64 + 1;
        let a = Active {
            layer,
            v,
            from,
            to,
            tasks,
            next: 0,
            log: ChangeLog::default(),
            overlay: vec![PairCount::new(); COUNT],
        };
        (a, ops)
    }

    pub fn alt(&self) -> Option<(u8, u32, Class)> {
        Some((self.layer, self.v, self.to))
    }

    pub fn is_done(&self) -> bool {
        self.next >= self.tasks.len()
    }

    pub fn remaining(&self) -> usize {
        self.tasks.len() - self.next
    }

    /// Runs tasks until `budget` operations are spent; returns the operations.
    pub fn step(&mut self, parts: &Parts, classes: &super::classes::Classes, budget: u64) -> u64 {
        let view = View { parts, log: Some(&self.log) };
        let cv = Committed { classes, alt: self.alt() };
        let mut used = 0;
        while self.next < self.tasks.len() && used < budget {
            let t = self.tasks[self.next];
            self.next += 1;
            let spec = &SPECS[t.store];
            let (x, y) = if t.is_row { (self.v, t.w) } else { (t.w, self.v) };
            let ov = &mut self.overlay[t.store];
            used += complete(spec, t.f, x, y, t.val, &view, &cv, &mut |k1, k2, wt, o, n| {
                if o != n {
                    ov.add(k1, k2, wt * (n as i64 - o as i64));
                }
            });
        }
        used
    }
}

#[derive(Default)]
pub struct Transitions {
    pub queue: VecDeque<(u8, u32)>,
    pub pending: FxHashMap<(u8, u32), Pending>,
    pub active: Option<Active>,
}

/// Outcome of observing a degree change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observed {
    Quiet,
    Queued,
    Retargeted,
    Cancelled,
    Late,
}

impl Transitions {
    pub fn alt(&self) -> Option<(u8, u32, Class)> {
        self.active.as_ref().and_then(|a| a.alt())
    }

    pub fn is_idle(&self) -> bool {
        self.active.is_none() && self.pending.is_empty()
    }

    /// Reacts to vertex (layer, v) now having degree `deg` and wanting
    /// `target` (None when back inside its band).
    pub fn observe(&mut self, layer: u8, v: u32, deg: u64, target: Option<Class>, parts: &Parts) -> (Observed, u64) {
        let key = (layer, v);
        let is_active = self.active.as_ref().is_some_and(|a| a.layer == layer && a.v == v);
        match (target, self.pending.get_mut(&key)) {
            (None, None) => (Observed::Quiet, 0),
            (None, Some(_)) => {
                self.pending.remove(&key);
                if is_active {
                    self.active = None;
                }
                (Observed::Cancelled, 0)
            }
            (Some(t), None) => {
                self.pending.insert(key, Pending { target: t, deg0: deg, late: false });
                self.queue.push_back(key);
                (Observed::Queued, 0)
            }
            (Some(t), Some(p)) => {
                if p.target != t {
                    p.target = t;
                    p.deg0 = deg;
                    p.late = false;
                    let mut ops = 0;
                    if is_active {
                        let from = self.active.as_ref().map(|a| a.from).expect("active");
                        let (a, o) = Active::start(layer, v, from, t, parts);
                        self.active = Some(a);
                        ops = o;
                    }
                    return (Observed::Retargeted, ops);
                }
                if !p.late && (deg >= 2 * p.deg0.max(1) || 2 * deg <= p.deg0) {
                    p.late = true;
                    return (Observed::Late, 0);
                }
                (Observed::Quiet, 0)
            }
        }
    }

    /// Activates the oldest live queue entry; `class_of` gives its committed class.
    pub fn activate(&mut self, parts: &Parts, class_of: impl Fn(u8, u32) -> Class) -> Option<u64> {
        if self.active.is_some() {
            return None;
        }
        while let Some(key) = self.queue.pop_front() {
            if let Some(p) = self.pending.get(&key) {
                let (a, ops) = Active::start(key.0, key.1, class_of(key.0, key.1), p.target, parts);
                self.active = Some(a);
                return Some(ops);
            }
        }
        None
    }

    /// Records an update of matrix `m` for the active transition's snapshot view.
    pub fn log_update(&mut self, m: usize, x: u32, y: u32, d: i64) {
        if let Some(a) = self.active.as_mut() {
            a.log.record(m, x, y, d);
        }
    }

    /// Removes and returns the active transition once its enumeration is done.
    pub fn take_done(&mut self) -> Option<Active> {
        if self.active.as_ref().is_some_and(|a| a.is_done()) {
            let a = self.active.take().expect("active");
            self.pending.remove(&(a.layer, a.v));
            return Some(a);
        }
        None
    }
}
