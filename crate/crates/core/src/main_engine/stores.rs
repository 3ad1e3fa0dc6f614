//! The maintained and phase-computed (x, y) tables, and enumeration of the
//! 3-layer paths that define them.

use super::classes::{Class, ClassSet, ClassView, Classes};
use super::parts::{Part, View};
use crate::pairs::PairCount;

/// Which matrices a table multiplies. AB and ABC tables are keyed by
/// (layer 1, layer 3 or 4); BC tables by (layer 2, layer 4).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    AB,
    BC,
    ABC,
}

impl Kind {
    pub fn first_mat(self) -> usize {
        match self {
            Kind::BC => 1,
            _ => 0,
        }
    }

    pub fn factors(self) -> usize {
        match self {
            Kind::ABC => 3,
            _ => 2,
        }
    }

    /// Layer of the key's first vertex.
    pub fn first_layer(self) -> u8 {
        self.first_mat() as u8 + 1
    }

    pub fn last_layer(self) -> u8 {
        self.first_layer() + self.factors() as u8
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StoreSpec {
    pub name: &'static str,
    pub kind: Kind,
    pub parts: [Part; 3],
    /// Allowed classes per layer 1..4.
    pub cls: [ClassSet; 4],
    /// Computed by the phase job over the old part rather than maintained.
    pub phased: bool,
}

impl StoreSpec {
    pub fn set(&self, layer: u8) -> ClassSet {
        self.cls[(layer - 1) as usize]
    }

    /// Whether reclassifying a vertex of `layer` from `from` to `to` changes the table.
    pub fn sensitive(&self, layer: u8, from: Class, to: Class) -> bool {
        if layer < self.kind.first_layer() || layer > self.kind.last_layer() {
            return false;
        }
        let s = self.set(layer);
        s.has(from) != s.has(to)
    }
}

const X: ClassSet = ClassSet::ANY;
const fn one(c: Class) -> ClassSet {
    ClassSet(1 << (c as u8))
}
const T: ClassSet = one(Class::T);
const S: ClassSet = one(Class::S);
const D: ClassSet = one(Class::D);
const H: ClassSet = one(Class::H);
const M: ClassSet = one(Class::M);

use Part::{All as A_, New as N_, Old as O_};

const fn spec(name: &'static str, kind: Kind, parts: [Part; 3], cls: [ClassSet; 4], phased: bool) -> StoreSpec {
    StoreSpec { name, kind, parts, cls, phased }
}

pub const AB_S: usize = 0;
pub const BC_S: usize = 1;
pub const AB_T: usize = 2;
pub const BC_T: usize = 3;
pub const AN_BO_DD: usize = 4;
pub const BO_CN_DD: usize = 5;
pub const AHD_BDD: usize = 6;
pub const AMD_BDD: usize = 7;
pub const BDD_CDH: usize = 8;
pub const BDD_CDM: usize = 9;
/// Six old/new combinations of the H-S-S-H triple product (the all-old and
/// old-new-old ones come from elsewhere).
pub const HSSH: [usize; 6] = [10, 11, 12, 13, 14, 15];
pub const HTTH: usize = 16;
pub const MTTH: usize = 17;
pub const HTTM: usize = 18;
pub const HTSH: usize = 19;
pub const HSTH: usize = 20;
pub const P_ABC_SS: usize = 21;
pub const P_ABC_SD: usize = 22;
pub const P_ABC_DS: usize = 23;
pub const P_ABC_DD: usize = 24;
pub const P_AB_S: usize = 25;
pub const P_AB_D: usize = 26;
pub const P_BC_S: usize = 27;
pub const P_BC_D: usize = 28;
pub const COUNT: usize = 29;

pub static SPECS: [StoreSpec; COUNT] = [
    spec("ab_s", Kind::AB, [A_, A_, A_], [X, S, X, X], false),
    spec("bc_s", Kind::BC, [A_, A_, A_], [X, X, S, X], false),
    spec("ab_t", Kind::AB, [A_, A_, A_], [X, T, X, X], false),
    spec("bc_t", Kind::BC, [A_, A_, A_], [X, X, T, X], false),
    spec("an_bo_dd", Kind::AB, [N_, O_, A_], [X, D, D, X], false),
    spec("bo_cn_dd", Kind::BC, [O_, N_, A_], [X, D, D, X], false),
    spec("ahd_bdd", Kind::AB, [A_, A_, A_], [H, D, D, X], false),
    spec("amd_bdd", Kind::AB, [A_, A_, A_], [M, D, D, X], false),
    spec("bdd_cdh", Kind::BC, [A_, A_, A_], [X, D, D, H], false),
    spec("bdd_cdm", Kind::BC, [A_, A_, A_], [X, D, D, M], false),
    spec("hssh_nnn", Kind::ABC, [N_, N_, N_], [H, S, S, H], false),
    spec("hssh_nno", Kind::ABC, [N_, N_, O_], [H, S, S, H], false),
    spec("hssh_onn", Kind::ABC, [O_, N_, N_], [H, S, S, H], false),
    spec("hssh_non", Kind::ABC, [N_, O_, N_], [H, S, S, H], false),
    spec("hssh_noo", Kind::ABC, [N_, O_, O_], [H, S, S, H], false),
    spec("hssh_oon", Kind::ABC, [O_, O_, N_], [H, S, S, H], false),
    spec("htth", Kind::ABC, [A_, A_, A_], [H, T, T, H], false),
    spec("mtth", Kind::ABC, [A_, A_, A_], [M, T, T, H], false),
    spec("httm", Kind::ABC, [A_, A_, A_], [H, T, T, M], false),
    spec("htsh", Kind::ABC, [A_, A_, A_], [H, T, S, H], false),
    spec("hsth", Kind::ABC, [A_, A_, A_], [H, S, T, H], false),
    spec("p_abc_ss", Kind::ABC, [O_, O_, O_], [X, S, S, X], true),
    spec("p_abc_sd", Kind::ABC, [O_, O_, O_], [X, S, D, X], true),
    spec("p_abc_ds", Kind::ABC, [O_, O_, O_], [X, D, S, X], true),
    spec("p_abc_dd", Kind::ABC, [O_, O_, O_], [X, D, D, X], true),
    spec("p_ab_s", Kind::AB, [O_, O_, A_], [X, S, X, X], true),
    spec("p_ab_d", Kind::AB, [O_, O_, A_], [X, D, X, X], true),
    spec("p_bc_s", Kind::BC, [O_, O_, A_], [X, X, S, X], true),
    spec("p_bc_d", Kind::BC, [O_, O_, A_], [X, X, D, X], true),
];

/// Phase-computed tables and their (layer-2, layer-3) class restriction.
pub const PHASED: [(usize, Option<Class>, Option<Class>); 8] = [
    (P_ABC_SS, Some(Class::S), Some(Class::S)),
    (P_ABC_SD, Some(Class::S), Some(Class::D)),
    (P_ABC_DS, Some(Class::D), Some(Class::S)),
    (P_ABC_DD, Some(Class::D), Some(Class::D)),
    (P_AB_S, Some(Class::S), None),
    (P_AB_D, Some(Class::D), None),
    (P_BC_S, None, Some(Class::S)),
    (P_BC_D, None, Some(Class::D)),
];

pub type Tables = Vec<PairCount>;

pub fn empty_tables() -> Tables {
    vec![PairCount::new(); COUNT]
}

const ALL_CLASSES: [Class; 6] = [Class::T, Class::L, Class::M, Class::H, Class::S, Class::D];

#[derive(Clone, Copy)]
struct Partial {
    v: u32,
    w: i64,
    old: bool,
    new: bool,
}

/// Vertices of `layer` adjacent to `v` through (mat, part), with values.
/// Uses the small-class lists when they are shorter than the adjacency row.
#[allow(clippy::too_many_arguments)]
fn neighbours<C: ClassView>(
    view: &View,
    cls: &C,
    mat: usize,
    part: Part,
    v: u32,
    side: usize,
    layer: u8,
    set: ClassSet,
    ops: &mut u64,
) -> Vec<(u32, i64)> {
    let listable =
        !set.is_any() && ALL_CLASSES.iter().all(|&c| !set.has(c) || Classes::has_list(layer, c));
    if listable {
        let list_len: usize = ALL_CLASSES.iter().filter(|&&c| set.has(c)).map(|&c| cls.list(layer, c).len()).sum();
        if list_len < view.side_len(mat, part, side, v) {
            let mut cands: Vec<u32> = Vec::with_capacity(list_len + 1);
            for &c in ALL_CLASSES.iter().filter(|&&c| set.has(c)) {
                cands.extend_from_slice(cls.list(layer, c));
            }
            if let Some((l, z, _)) = cls.alt() {
                if l == layer && !set.has(cls.class(layer, z)) {
                    cands.push(z);
                }
            }
            *ops += cands.len() as u64;
            return cands
                .into_iter()
                .filter_map(|w| {
                    let (x, y) = if side == 0 { (v, w) } else { (w, v) };
                    let val = view.get(mat, part, x, y);
                    (val != 0).then_some((w, val))
                })
                .collect();
        }
    }
    let row = view.side(mat, part, side, v);
    *ops += row.len() as u64;
    row
}

/// Calls `emit(key1, key2, weight, in_committed, in_pending)` for every path
/// of table `spec` whose factor `f` is the entry (x, y) with value `val`.
/// Returns the elementary operations spent.
#[allow(clippy::too_many_arguments)]
pub fn complete<C: ClassView>(
    spec: &StoreSpec,
    f: usize,
    x: u32,
    y: u32,
    val: i64,
    view: &View,
    cls: &C,
    emit: &mut impl FnMut(u32, u32, i64, bool, bool),
) -> u64 {
    let mut ops = 1;
    let l0 = spec.kind.first_layer();
    let lx = l0 + f as u8;
    let (ox, nx) = cls.ok(lx, x, spec.set(lx));
    let (oy, ny) = cls.ok(lx + 1, y, spec.set(lx + 1));
    if val == 0 || !(ox || nx) || !(oy || ny) {
        return ops;
    }
    let mut left = vec![Partial { v: x, w: val, old: ox, new: nx }];
    for g in (0..f).rev() {
        let layer = l0 + g as u8;
        let mat = spec.kind.first_mat() + g;
        left = extend(&left, view, cls, mat, spec.parts[g], 1, layer, spec.set(layer), &mut ops);
    }
    let mut right = vec![Partial { v: y, w: 1, old: oy, new: ny }];
    for g in f + 1..spec.kind.factors() {
        let layer = l0 + g as u8 + 1;
        let mat = spec.kind.first_mat() + g;
        right = extend(&right, view, cls, mat, spec.parts[g], 0, layer, spec.set(layer), &mut ops);
    }
    for l in &left {
        for r in &right {
            let (o, n) = (l.old && r.old, l.new && r.new);
            if o || n {
                emit(l.v, r.v, l.w * r.w, o, n);
            }
        }
    }
    ops + (left.len() * right.len()) as u64
}

#[allow(clippy::too_many_arguments)]
fn extend<C: ClassView>(
    from: &[Partial],
    view: &View,
    cls: &C,
    mat: usize,
    part: Part,
    side: usize,
    layer: u8,
    set: ClassSet,
    ops: &mut u64,
) -> Vec<Partial> {
    let mut out = Vec::new();
    for p in from {
        for (w, val) in neighbours(view, cls, mat, part, p.v, side, layer, set, ops) {
            let (o, n) = cls.ok(layer, w, set);
            let (o, n) = (o && p.old, n && p.new);
            if o || n {
                out.push(Partial { v: w, w: p.w * val, old: o, new: n });
            }
        }
    }
    out
}

/// Root factor for enumerating every path of `spec` through vertex `z` of `layer`,
/// and whether `z` is the row (true) or the column of that factor.
pub fn root_at(spec: &StoreSpec, layer: u8) -> (usize, bool) {
    let l0 = spec.kind.first_layer();
    let nf = spec.kind.factors();
    let p = (layer - l0) as usize;
    if p < nf {
        (p, true)
    } else {
        (p - 1, false)
    }
}

/// Rebuilds table `s` under committed classes by enumerating from the
/// factor with the sparsest part.
pub fn recompute<C: ClassView>(s: usize, view: &View, cls: &C) -> (PairCount, u64) {
    let spec = &SPECS[s];
    let nf = spec.kind.factors();
    let f = (0..nf)
        .min_by_key(|&g| view.parts.mat(spec.kind.first_mat() + g, spec.parts[g]).nnz())
        .expect("at least two factors");
    let mat = view.parts.mat(spec.kind.first_mat() + f, spec.parts[f]);
    let mut t = PairCount::new();
    let mut ops = 0;
    for (x, y, v) in mat.iter() {
        ops += complete(spec, f, x, y, v, view, cls, &mut |a, b, w, o, _| {
            if o {
                t.add(a, b, w);
            }
        });
    }
    (t, ops)
}
