//! Text update streams and seeded workload generators.
//!
//! General mode lines are `+ u v` / `- u v`; layered mode lines are
//! `+ A x y` with the matrix's first-layer endpoint first. `#` starts a
//! comment and blank lines are skipped.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{GeneralGraph, GeneralUpdate, LayeredGraph, MatrixId, Op, UpdateEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    General,
    Layered,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stream {
    General(Vec<GeneralUpdate>),
    Layered(Vec<UpdateEvent>),
}

impl Stream {
    pub fn len(&self) -> usize {
        match self {
            Stream::General(v) => v.len(),
            Stream::Layered(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn parse_op(tok: &str, line: usize) -> Result<Op> {
    match tok {
        "+" => Ok(Op::Insert),
        "-" => Ok(Op::Delete),
        _ => Err(Error::Parse { line, msg: format!("expected + or -, got {tok:?}") }),
    }
}

fn parse_id(tok: Option<&str>, line: usize) -> Result<u32> {
    let tok = tok.ok_or_else(|| Error::Parse { line, msg: "missing vertex id".into() })?;
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad vertex id {tok:?}") })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            None
        } else {
            Some((i + 1, l.split_whitespace().collect()))
        }
    })
}

pub fn parse(text: &str, mode: Mode) -> Result<Stream> {
    match mode {
        Mode::General => parse_general(text).map(Stream::General),
        Mode::Layered => parse_layered(text).map(Stream::Layered),
    }
}

pub fn parse_general(text: &str) -> Result<Vec<GeneralUpdate>> {
    let mut out = Vec::new();
    for (line, toks) in content_lines(text) {
        if toks.len() != 3 {
            return Err(Error::Parse { line, msg: format!("expected 3 fields, got {}", toks.len()) });
        }
        let op = parse_op(toks[0], line)?;
        let u = parse_id(toks.get(1).copied(), line)?;
        let v = parse_id(toks.get(2).copied(), line)?;
        out.push(GeneralUpdate { op, u, v });
    }
    Ok(out)
}

pub fn parse_layered(text: &str) -> Result<Vec<UpdateEvent>> {
    let mut out = Vec::new();
    for (line, toks) in content_lines(text) {
        if toks.len() != 4 {
            return Err(Error::Parse { line, msg: format!("expected 4 fields, got {}", toks.len()) });
        }
        let op = parse_op(toks[0], line)?;
        let m = MatrixId::parse(toks[1])
            .ok_or_else(|| Error::Parse { line, msg: format!("bad matrix {:?}", toks[1]) })?;
        let x = parse_id(toks.get(2).copied(), line)?;
        let y = parse_id(toks.get(3).copied(), line)?;
        out.push(UpdateEvent::new(op, m, x, y));
    }
    Ok(out)
}

fn op_char(op: Op) -> char {
    match op {
        Op::Insert => '+',
        Op::Delete => '-',
    }
}

pub fn write(s: &Stream) -> String {
    let mut out = String::new();
    match s {
        Stream::General(v) => {
            for e in v {
                let _ = writeln!(out, "{} {} {}", op_char(e.op), e.u, e.v);
            }
        }
        Stream::Layered(v) => {
            for e in v {
                let _ = writeln!(out, "{} {:?} {} {}", op_char(e.op), e.matrix, e.x, e.y);
            }
        }
    }
    out
}

/// Replays a stream against an empty graph; the first invalid update is an error.
pub fn validate(s: &Stream) -> Result<()> {
    match s {
        Stream::General(v) => {
            let mut g = GeneralGraph::new();
            for e in v {
                g.apply(e)?;
            }
        }
        Stream::Layered(v) => {
            let mut g = LayeredGraph::new();
            for e in v {
                g.apply(e)?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Uniform,
    Hub,
    SlidingWindow,
}

impl std::str::FromStr for GenKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(GenKind::Uniform),
            "hub" => Ok(GenKind::Hub),
            "sliding-window" | "window" => Ok(GenKind::SlidingWindow),
            _ => Err(Error::InvalidParam(format!("unknown workload kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: u32,
    pub steps: usize,
    pub delete_fraction: f64,
    pub seed: u64,
}

impl GenSpec {
    fn check(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParam("n must be at least 2".into()));
        }
        if !(0.0..1.0).contains(&self.delete_fraction) {
            return Err(Error::InvalidParam("delete fraction must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Edge pool with O(1) random removal.
struct Pool<T> {
    items: Vec<T>,
}

impl<T: Copy> Pool<T> {
    fn remove_random(&mut self, rng: &mut ChaCha8Rng) -> Option<T> {
        if self.items.is_empty() {
            return None;
        }
        let i = rng.gen_range(0..self.items.len());
        Some(self.items.swap_remove(i))
    }
}

/// Random general-graph stream. `Hub` draws one endpoint from a small hot set
/// half of the time; `SlidingWindow` deletes edges in insertion order and
/// drains the graph at the end.
pub fn gen_general(spec: &GenSpec) -> Result<Vec<GeneralUpdate>> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let max_edges = (n as usize) * (n as usize - 1) / 2;
    let hubs = (n / 10).max(1);
    let mut present: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut pool = Pool { items: Vec::new() };
    let mut window = std::collections::VecDeque::new();
    let mut out = Vec::with_capacity(spec.steps);
    let draw = |rng: &mut ChaCha8Rng| -> (u32, u32) {
        loop {
            let u = if spec.kind == GenKind::Hub && rng.gen_bool(0.5) {
                rng.gen_range(0..hubs)
            } else {
                rng.gen_range(0..n)
            };
            let v = rng.gen_range(0..n);
            if u != v {
                return (u.min(v), u.max(v));
            }
        }
    };
    let window_len = ((spec.steps as f64) * (1.0 - spec.delete_fraction) / 2.0).max(1.0) as usize;
    while out.len() < spec.steps {
        if spec.kind == GenKind::SlidingWindow {
            let remaining = spec.steps - out.len();
            if remaining <= window.len() || window.len() >= window_len || present.len() == max_edges {
                if let Some((u, v)) = window.pop_front() {
                    present.remove(&(u, v));
                    out.push(GeneralUpdate::delete(u, v));
                    continue;
                }
            }
            let e = draw(&mut rng);
            if present.insert(e) {
                window.push_back(e);
                out.push(GeneralUpdate::insert(e.0, e.1));
            }
            continue;
        }
        let delete = !present.is_empty() && (present.len() == max_edges || rng.gen_bool(spec.delete_fraction));
        if delete {
            let (u, v) = pool.remove_random(&mut rng).expect("nonempty");
            present.remove(&(u, v));
            out.push(GeneralUpdate::delete(u, v));
        } else {
            let e = draw(&mut rng);
            if present.insert(e) {
                pool.items.push(e);
                out.push(GeneralUpdate::insert(e.0, e.1));
            }
        }
    }
    // Windowed streams end empty when there is room to drain.
    Ok(out)
}

/// Layered workload: A/B/C/D updates over `n` vertices per layer.
#[derive(Debug, Clone)]
pub struct LayeredSpec {
    pub n: u32,
    pub steps: usize,
    pub delete_fraction: f64,
    /// Relative weights of A, B, C, D events.
    pub weights: [u32; 4],
    /// Fraction of events forced onto hub vertices (layer-1 vertex 0, layer-2
    /// vertex 0, layer-3 vertex 0, layer-4 vertex 0).
    pub hub_bias: f64,
    /// Matrices with a hub bias; others are uniform.
    pub hub_mats: [bool; 4],
    pub seed: u64,
}

impl Default for LayeredSpec {
    fn default() -> Self {
        LayeredSpec {
            n: 16,
            steps: 100,
            delete_fraction: 0.3,
            weights: [1, 1, 1, 1],
            hub_bias: 0.0,
            hub_mats: [true; 4],
            seed: 0,
        }
    }
}

pub fn gen_layered(spec: &LayeredSpec) -> Result<Vec<UpdateEvent>> {
    if spec.n < 1 || !(0.0..1.0).contains(&spec.delete_fraction) {
        return Err(Error::InvalidParam("bad layered workload".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut pools: Vec<Pool<(u32, u32)>> = (0..4).map(|_| Pool { items: Vec::new() }).collect();
    let mut present: Vec<BTreeSet<(u32, u32)>> = vec![BTreeSet::new(); 4];
    let total_w: u32 = spec.weights.iter().sum();
    if total_w == 0 {
        return Err(Error::InvalidParam("all matrix weights are zero".into()));
    }
    let full = (spec.n as usize) * (spec.n as usize);
    let mut out = Vec::with_capacity(spec.steps);
    let mut guard = 0usize;
    while out.len() < spec.steps {
        guard += 1;
        if guard > spec.steps * 1000 + 1000 {
            return Err(Error::InvalidParam("workload generator made no progress".into()));
        }
        let mut pick = rng.gen_range(0..total_w);
        let mut mi = 0;
        while pick >= spec.weights[mi] {
            pick -= spec.weights[mi];
            mi += 1;
        }
        let m = MatrixId::from_index(mi);
        let delete =
            !present[mi].is_empty() && (present[mi].len() == full || rng.gen_bool(spec.delete_fraction));
        if delete {
            let e = pools[mi].remove_random(&mut rng).expect("nonempty");
            present[mi].remove(&e);
            out.push(UpdateEvent::delete(m, e.0, e.1));
        } else {
            let hub = spec.hub_mats[mi] && rng.gen_bool(spec.hub_bias);
            let mut x = rng.gen_range(0..spec.n);
            let mut y = rng.gen_range(0..spec.n);
            if hub {
                if rng.gen_bool(0.5) {
                    x = 0;
                } else {
                    y = 0;
                }
            }
            if present[mi].insert((x, y)) {
                pools[mi].items.push((x, y));
                out.push(UpdateEvent::insert(m, x, y));
            }
        }
    }
    Ok(out)
}

/// Every update of `s` inverted, in reverse order.
pub fn inverse_general(s: &[GeneralUpdate]) -> Vec<GeneralUpdate> {
    s.iter().rev().map(|e| e.inverse()).collect()
}

pub fn inverse_layered(s: &[UpdateEvent]) -> Vec<UpdateEvent> {
    s.iter().rev().map(|e| e.inverse()).collect()
}

/// Shuffles a slice deterministically.
pub fn shuffled<T: Clone>(v: &[T], seed: u64) -> Vec<T> {
    let mut out = v.to_vec();
    out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let text = "# square\n+ 0 1\n\n+ 1 2 # trailing\n- 0 1\n";
        let s = parse(text, Mode::General).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(parse(&write(&s), Mode::General).unwrap(), s);
        let l = parse("+ A 1 2\n- D 3 0\n", Mode::Layered).unwrap();
        assert_eq!(parse(&write(&l), Mode::Layered).unwrap(), l);
    }

    #[test]
    fn parse_errors_carry_line() {
        assert_eq!(
            parse_general("+ 0 1\n* 1 2\n").unwrap_err(),
            Error::Parse { line: 2, msg: "expected + or -, got \"*\"".into() }
        );
        assert!(matches!(parse_layered("+ E 1 2"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn zero_steps_is_empty() {
        let s = gen_general(&GenSpec { kind: GenKind::Uniform, n: 5, steps: 0, delete_fraction: 0.3, seed: 1 })
            .unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn generated_streams_are_valid() {
        for kind in [GenKind::Uniform, GenKind::Hub, GenKind::SlidingWindow] {
            let s = gen_general(&GenSpec { kind, n: 12, steps: 400, delete_fraction: 0.3, seed: 9 }).unwrap();
            assert_eq!(s.len(), 400);
            validate(&Stream::General(s)).unwrap();
        }
        let l = gen_layered(&LayeredSpec { steps: 500, ..Default::default() }).unwrap();
        validate(&Stream::Layered(l)).unwrap();
    }

    #[test]
    fn sliding_window_drains() {
        let s = gen_general(&GenSpec {
            kind: GenKind::SlidingWindow,
            n: 10,
            steps: 200,
            delete_fraction: 0.2,
            seed: 3,
        })
        .unwrap();
        let mut g = GeneralGraph::new();
        for e in &s {
            g.apply(e).unwrap();
        }
        assert_eq!(g.m(), 0);
    }

    #[test]
    fn invalid_delete_fraction() {
        let r = gen_general(&GenSpec { kind: GenKind::Uniform, n: 5, steps: 3, delete_fraction: 1.0, seed: 1 });
        assert!(matches!(r, Err(Error::InvalidParam(_))));
    }
}
