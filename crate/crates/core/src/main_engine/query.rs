//! 3-path count from a layer-1 vertex to a layer-4 vertex, split by the
//! classes of the endpoints and the middle vertices.
//!
//! Every path falls into one bucket: the (layer-2, layer-3) class pair of its
//! middle vertices and the old/new part of each of its three edges. Each term
//! reports the buckets it covers so tests can check the split exactly.

use super::classes::{Class, Classes};
use super::parts::Parts;
use super::stores::{self as st, Tables};
use crate::pairs::PairCount;
use crate::warmup::WarmupEngine;

/// Set of buckets: bit `cell * 8 + phase`, cell = 3·class(w2) + class(w3)
/// over T, S, D; phase = 4·A + 2·B + C with old = 0 and new = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Claim(pub u128);

pub const BUCKETS: usize = 72;
pub const ALL_PHASES: u8 = 0xff;

pub fn bucket(c2: Class, c3: Class, phase: usize) -> usize {
    (c2.mid_index() * 3 + c3.mid_index()) * 8 + phase
}

/// Phase bit for old/new flags of the A, B and C edges (true = new).
pub const fn phase(a: bool, b: bool, c: bool) -> u8 {
    1 << ((a as u8) * 4 + (b as u8) * 2 + (c as u8))
}

impl Claim {
    pub fn cells(pairs: &[(Class, Class)], phases: u8) -> Claim {
        let mut m = 0u128;
        for &(c2, c3) in pairs {
            for p in 0..8 {
                if phases & (1 << p) != 0 {
                    m |= 1u128 << bucket(c2, c3, p);
                }
            }
        }
        Claim(m)
    }

    fn grid(c2: &[Class], c3: &[Class]) -> Claim {
        let pairs: Vec<(Class, Class)> = c2.iter().flat_map(|&a| c3.iter().map(move |&b| (a, b))).collect();
        Claim::cells(&pairs, ALL_PHASES)
    }

    pub fn has(self, b: usize) -> bool {
        self.0 >> b & 1 == 1
    }
}

pub trait Sink {
    fn term(&mut self, name: &'static str, claim: Claim, value: i64);
}

#[derive(Default)]
pub struct Total(pub i64);

impl Sink for Total {
    fn term(&mut self, _: &'static str, _: Claim, value: i64) {
        self.0 += value;
    }
}

#[derive(Default)]
pub struct Record(pub Vec<(&'static str, Claim, i64)>);

impl Sink for Record {
    fn term(&mut self, name: &'static str, claim: Claim, value: i64) {
        self.0.push((name, claim, value));
    }
}

pub struct Ctx<'a> {
    pub parts: &'a Parts,
    pub classes: &'a Classes,
    pub stores: &'a Tables,
    pub warm: &'a mut [WarmupEngine; 2],
    pub ops: u64,
}

const T: Class = Class::T;
const S: Class = Class::S;
const D: Class = Class::D;

impl Ctx<'_> {
    fn k2(&self, w: u32) -> Class {
        self.classes.get(2, w)
    }
    fn k3(&self, w: u32) -> Class {
        self.classes.get(3, w)
    }
    fn table(&self, s: usize) -> &PairCount {
        &self.stores[s]
    }

    /// Σ over w2 in N_A(u) with κ2(w2) allowed of A(u,w2)·f(w2).
    fn via_a(&mut self, u: u32, keep: &[Class], f: impl Fn(&Self, u32) -> i64) -> i64 {
        let row = self.parts.all[0].row(u);
        self.ops += row.len() as u64;
        row.iter().filter(|(&w2, _)| keep.contains(&self.k2(w2))).map(|(&w2, &a)| a * f(self, w2)).sum()
    }

    /// Σ over w3 in N_C(v) with κ3(w3) allowed of f(w3)·C(w3,v).
    fn via_c(&mut self, v: u32, keep: &[Class], f: impl Fn(&Self, u32) -> i64) -> i64 {
        let col = self.parts.all[2].col(v);
        self.ops += col.len() as u64;
        col.iter().filter(|(&w3, _)| keep.contains(&self.k3(w3))).map(|(&w3, &c)| f(self, w3) * c).sum()
    }

    /// Σ over layer-2 D vertices of A(u,w2)·f(w2).
    fn list_d2(&mut self, u: u32, f: impl Fn(&Self, u32) -> i64) -> i64 {
        let l = self.classes.list(2, D);
        self.ops += l.len() as u64;
        let a = &self.parts.all[0];
        l.iter().map(|&w2| a.get(u, w2)).zip(l.iter()).filter(|(x, _)| *x != 0).map(|(x, &w2)| x * f(self, w2)).sum()
    }

    /// Σ over layer-3 D vertices of f(w3)·C(w3,v).
    fn list_d3(&mut self, v: u32, f: impl Fn(&Self, u32) -> i64) -> i64 {
        let l = self.classes.list(3, D);
        self.ops += l.len() as u64;
        let c = &self.parts.all[2];
        l.iter().map(|&w3| (w3, c.get(w3, v))).filter(|x| x.1 != 0).map(|(w3, x)| f(self, w3) * x).sum()
    }

    /// Σ over w2 in N_A(u) of A(u,w2)·B(w2,w3).
    fn ab_scan(&self, u: u32, w3: u32) -> i64 {
        let b = &self.parts.all[1];
        self.parts.all[0].row(u).iter().map(|(&w2, &a)| a * b.get(w2, w3)).sum()
    }

    fn bc_scan(&self, w2: u32, v: u32) -> i64 {
        let b = &self.parts.all[1];
        self.parts.all[2].col(v).iter().map(|(&w3, &c)| b.get(w2, w3) * c).sum()
    }

    pub fn run(&mut self, u: u32, v: u32, sink: &mut impl Sink) {
        let cu = self.classes.get(1, u);
        let cv = self.classes.get(4, v);
        let all_mid = [T, S, D];
        match (cu, cv) {
            (Class::T, Class::T | Class::L) | (Class::L, Class::T) => {
                let a = self.parts.all[0].row(u);
                let c = self.parts.all[2].col(v);
                let b = &self.parts.all[1];
                self.ops += (a.len() * c.len()) as u64 + 1;
                let mut s = 0;
                for (&w2, &x) in a {
                    for (&w3, &y) in c {
                        s += x * b.get(w2, w3) * y;
                    }
                }
                sink.term("scan_both", Claim::grid(&all_mid, &all_mid), s);
            }
            (Class::T, _) => {
                let s = self.via_a(u, &all_mid, |c, w2| c.table(st::BC_S).get(w2, v));
                sink.term("a_bc_s", Claim::grid(&all_mid, &[S]), s);
                let s = self.via_a(u, &all_mid, |c, w2| c.table(st::BC_T).get(w2, v));
                sink.term("a_bc_t", Claim::grid(&all_mid, &[T]), s);
                let deg = self.parts.all[0].row(u).len() as u64;
                self.ops += deg * self.classes.list(3, D).len() as u64;
                let s = self.list_d3(v, |c, w3| c.ab_scan(u, w3));
                sink.term("scan_a_d3", Claim::grid(&all_mid, &[D]), s);
            }
            (_, Class::T) => {
                let s = self.via_c(v, &all_mid, |c, w3| c.table(st::AB_S).get(u, w3));
                sink.term("ab_s_c", Claim::grid(&[S], &all_mid), s);
                let s = self.via_c(v, &all_mid, |c, w3| c.table(st::AB_T).get(u, w3));
                sink.term("ab_t_c", Claim::grid(&[T], &all_mid), s);
                let deg = self.parts.all[2].col(v).len() as u64;
                self.ops += deg * self.classes.list(2, D).len() as u64;
                let s = self.list_d2(u, |c, w2| c.bc_scan(w2, v));
                sink.term("scan_d2_c", Claim::grid(&[D], &all_mid), s);
            }
            _ => {
                self.tiny_cells(u, v, cu, cv, sink);
                self.dense_cells(u, v, cu, cv, sink);
            }
        }
    }

    // Cells with a tiny middle vertex, for endpoints in {L, M, H}.
    fn tiny_cells(&mut self, u: u32, v: u32, cu: Class, cv: Class, sink: &mut impl Sink) {
        let td = |c: &mut Self, sink: &mut dyn FnMut(&'static str, Claim, i64)| {
            let s = c.list_d3(v, |c, w3| c.table(st::AB_T).get(u, w3));
            sink("ab_t_d3", Claim::grid(&[T], &[D]), s);
            let s = c.list_d2(u, |c, w2| c.table(st::BC_T).get(w2, v));
            sink("d2_bc_t", Claim::grid(&[D], &[T]), s);
        };
        let mut put = |n: &'static str, cl: Claim, x: i64| sink.term(n, cl, x);
        match (cu, cv) {
            (Class::H, Class::H) => {
                self.ops += 5;
                put("htth", Claim::grid(&[T], &[T]), self.table(st::HTTH).get(u, v));
                put("htsh", Claim::grid(&[T], &[S]), self.table(st::HTSH).get(u, v));
                put("hsth", Claim::grid(&[S], &[T]), self.table(st::HSTH).get(u, v));
                td(self, &mut put);
            }
            (Class::H, Class::M) => {
                self.ops += 1;
                put("httm", Claim::grid(&[T], &[T]), self.table(st::HTTM).get(u, v));
                td(self, &mut put);
                let s = self.via_c(v, &[T], |c, w3| c.table(st::AB_S).get(u, w3));
                put("ab_s_c_t", Claim::grid(&[S], &[T]), s);
                let s = self.via_c(v, &[S], |c, w3| c.table(st::AB_T).get(u, w3));
                put("ab_t_c_s", Claim::grid(&[T], &[S]), s);
            }
            (Class::M, Class::H) => {
                self.ops += 1;
                put("mtth", Claim::grid(&[T], &[T]), self.table(st::MTTH).get(u, v));
                td(self, &mut put);
                let s = self.via_a(u, &[T], |c, w2| c.table(st::BC_S).get(w2, v));
                put("a_t_bc_s", Claim::grid(&[T], &[S]), s);
                let s = self.via_a(u, &[S], |c, w2| c.table(st::BC_T).get(w2, v));
                put("a_s_bc_t", Claim::grid(&[S], &[T]), s);
            }
            (Class::H, Class::L) => {
                let b = &self.parts.all[1];
                let a = &self.parts.all[0];
                let mut s = 0;
                let mut ops = 0;
                for (&w3, &c) in self.parts.all[2].col(v) {
                    if self.classes.get(3, w3) != T {
                        continue;
                    }
                    let col = b.col(w3);
                    ops += col.len() as u64 + 1;
                    s += c * col.iter().map(|(&w2, &x)| a.get(u, w2) * x).sum::<i64>();
                }
                self.ops += ops;
                put("scan_b_c_t", Claim::grid(&[T, S, D], &[T]), s);
                let s = self.via_c(v, &[S, D], |c, w3| c.table(st::AB_T).get(u, w3));
                put("ab_t_c_sd", Claim::grid(&[T], &[S, D]), s);
            }
            (Class::L, Class::H) => {
                let b = &self.parts.all[1];
                let c = &self.parts.all[2];
                let mut s = 0;
                let mut ops = 0;
                for (&w2, &a) in self.parts.all[0].row(u) {
                    if self.classes.get(2, w2) != T {
                        continue;
                    }
                    let row = b.row(w2);
                    ops += row.len() as u64 + 1;
                    s += a * row.iter().map(|(&w3, &x)| x * c.get(w3, v)).sum::<i64>();
                }
                self.ops += ops;
                put("scan_a_t_b", Claim::grid(&[T], &[T, S, D]), s);
                let s = self.via_a(u, &[S, D], |c, w2| c.table(st::BC_T).get(w2, v));
                put("a_sd_bc_t", Claim::grid(&[S, D], &[T]), s);
            }
            _ => {
                let s = self.via_a(u, &[T, S, D], |c, w2| c.table(st::BC_T).get(w2, v));
                put("a_bc_t", Claim::grid(&[T, S, D], &[T]), s);
                let s = self.via_c(v, &[S, D], |c, w3| c.table(st::AB_T).get(u, w3));
                put("ab_t_c_sd", Claim::grid(&[T], &[S, D]), s);
            }
        }
    }

    // Cells with both middle vertices in S or D, for endpoints in {L, M, H}.
    fn dense_cells(&mut self, u: u32, v: u32, cu: Class, cv: Class, sink: &mut impl Sink) {
        let hm = |c: Class| matches!(c, Class::H | Class::M);
        let ad = if cu == Class::H { st::AHD_BDD } else { st::AMD_BDD };
        let dc = if cv == Class::H { st::BDD_CDH } else { st::BDD_CDM };
        match (hm(cu), hm(cv)) {
            (true, true) => {
                let s = self.list_d3(v, |c, w3| c.table(st::AB_S).get(u, w3));
                sink.term("ab_s_d3", Claim::grid(&[S], &[D]), s);
                let s = self.list_d3(v, |c, w3| c.table(ad).get(u, w3));
                sink.term("ad_bdd_d3", Claim::grid(&[D], &[D]), s);
                let s = self.list_d2(u, |c, w2| c.table(st::BC_S).get(w2, v));
                sink.term("d2_bc_s", Claim::grid(&[D], &[S]), s);
                if cu == Class::M {
                    let s = self.via_a(u, &[S], |c, w2| c.table(st::BC_S).get(w2, v));
                    sink.term("a_s_bc_s", Claim::grid(&[S], &[S]), s);
                } else if cv == Class::M {
                    let s = self.via_c(v, &[S], |c, w3| c.table(st::AB_S).get(u, w3));
                    sink.term("ab_s_c_s", Claim::grid(&[S], &[S]), s);
                } else {
                    self.high_ss(u, v, sink);
                }
            }
            (true, false) => {
                let s = self.via_c(v, &[S, D], |c, w3| c.table(st::AB_S).get(u, w3));
                sink.term("ab_s_c_sd", Claim::grid(&[S], &[S, D]), s);
                let s = self.via_c(v, &[D], |c, w3| c.table(ad).get(u, w3));
                sink.term("ad_bdd_c", Claim::grid(&[D], &[D]), s);
                let s = self.list_d2(u, |c, w2| c.table(st::BC_S).get(w2, v));
                sink.term("d2_bc_s", Claim::grid(&[D], &[S]), s);
            }
            (false, true) => {
                let s = self.via_a(u, &[S, D], |c, w2| c.table(st::BC_S).get(w2, v));
                sink.term("a_sd_bc_s", Claim::grid(&[S, D], &[S]), s);
                let s = self.via_a(u, &[D], |c, w2| c.table(dc).get(w2, v));
                sink.term("a_bdd_dc", Claim::grid(&[D], &[D]), s);
                let s = self.list_d3(v, |c, w3| c.table(st::AB_S).get(u, w3));
                sink.term("ab_s_d3", Claim::grid(&[S], &[D]), s);
            }
            (false, false) => {
                let s = self.via_a(u, &[S, D], |c, w2| c.table(st::BC_S).get(w2, v));
                sink.term("a_sd_bc_s", Claim::grid(&[S, D], &[S]), s);
                let s = self.via_c(v, &[D], |c, w3| c.table(st::AB_S).get(u, w3));
                sink.term("ab_s_c_d", Claim::grid(&[S], &[D]), s);
                self.low_dd(u, v, sink);
            }
        }
    }

    fn high_ss(&mut self, u: u32, v: u32, sink: &mut impl Sink) {
        let ss = [(S, S)];
        self.ops += 8;
        sink.term("p_abc_ss", Claim::cells(&ss, phase(false, false, false)), self.table(st::P_ABC_SS).get(u, v));
        let phases = [
            phase(true, true, true),
            phase(true, true, false),
            phase(false, true, true),
            phase(true, false, true),
            phase(true, false, false),
            phase(false, false, true),
        ];
        for (&s, &p) in st::HSSH.iter().zip(phases.iter()) {
            sink.term(st::SPECS[s].name, Claim::cells(&ss, p), self.table(s).get(u, v));
        }
        let before = self.warm[0].metrics().ops;
        let w = self.warm[0].query(u, v);
        self.ops += self.warm[0].metrics().ops - before;
        sink.term("warm_ss", Claim::cells(&ss, phase(false, true, false)), w);
    }

    fn low_dd(&mut self, u: u32, v: u32, sink: &mut impl Sink) {
        let dd = [(D, D)];
        let p = self.parts;
        self.ops += 1;
        sink.term("p_abc_dd", Claim::cells(&dd, phase(false, false, false)), self.table(st::P_ABC_DD).get(u, v));
        let mut acc = 0;
        let col = p.new[2].col(v);
        self.ops += col.len() as u64;
        for (&w3, &c) in col {
            if self.k3(w3) == D {
                acc += self.table(st::P_AB_D).get(u, w3) * c;
            }
        }
        sink.term("p_ab_d_cn", Claim::cells(&dd, phase(false, false, true)), acc);
        let row = p.new[0].row(u);
        self.ops += 2 * row.len() as u64;
        let (mut noo, mut non) = (0, 0);
        for (&w2, &a) in row {
            if self.k2(w2) == D {
                noo += a * self.table(st::P_BC_D).get(w2, v);
                non += a * self.table(st::BO_CN_DD).get(w2, v);
            }
        }
        sink.term("an_p_bc_d", Claim::cells(&dd, phase(true, false, false)), noo);
        sink.term("an_bo_cn_dd", Claim::cells(&dd, phase(true, false, true)), non);
        let mut acc = 0;
        let mut ops = 0;
        for &w2 in self.classes.list(2, D) {
            let brow = p.new[1].row(w2);
            ops += brow.len() as u64 + 1;
            let (a, ao) = (p.all[0].get(u, w2), p.old[0].get(u, w2));
            if a == 0 && ao == 0 {
                continue;
            }
            for (&w3, &b) in brow {
                if self.k3(w3) == D {
                    acc += b * (a * p.all[2].get(w3, v) - ao * p.old[2].get(w3, v));
                }
            }
        }
        self.ops += ops;
        let ph = phase(true, true, true) | phase(true, true, false) | phase(false, true, true);
        sink.term("bn_scan_dd", Claim::cells(&dd, ph), acc);
        let before = self.warm[1].metrics().ops;
        let w = self.warm[1].query(u, v);
        self.ops += self.warm[1].metrics().ops - before;
        sink.term("warm_dd", Claim::cells(&dd, phase(false, true, false)), w);
    }
}

/// Path counts per bucket by direct enumeration over the signed parts.
pub fn bucket_counts(parts: &Parts, classes: &Classes, u: u32, v: u32) -> [i64; BUCKETS] {
    let mut out = [0i64; BUCKETS];
    let side = |m: usize, x: u32, row: bool| -> Vec<u32> {
        let mut ws: Vec<u32> = Vec::new();
        for p in [&parts.old[m], &parts.new[m]] {
            let r = if row { p.row(x) } else { p.col(x) };
            ws.extend(r.keys().copied());
        }
        ws.sort_unstable();
        ws.dedup();
        ws
    };
    let val = |m: usize, new: bool, x: u32, y: u32| if new { parts.new[m].get(x, y) } else { parts.old[m].get(x, y) };
    for w2 in side(0, u, true) {
        for w3 in side(1, w2, true) {
            let (c2, c3) = (classes.get(2, w2), classes.get(3, w3));
            for ph in 0..8usize {
                let (na, nb, nc) = (ph & 4 != 0, ph & 2 != 0, ph & 1 != 0);
                let x = val(0, na, u, w2) * val(1, nb, w2, w3) * val(2, nc, w3, v);
                out[bucket(c2, c3, ph)] += x;
            }
        }
    }
    out
}
