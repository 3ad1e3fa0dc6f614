mod common;

use quadcount::engine::LayeredEngine;
use quadcount::graph::{LayeredGraph, MatrixId, SignedAdj, UpdateEvent, VertexRef};
use quadcount::main_engine::classes::{ClassSet, Classes};
use quadcount::main_engine::parts::Part;
use quadcount::main_engine::query::{bucket_counts, BUCKETS};
use quadcount::main_engine::stores::{Kind, SPECS};
use quadcount::main_engine::{MainConfig, MainEngine, MHat};
use quadcount::matmul::{multiply, multiply3, CountMatrix};
use quadcount::oracle;
use quadcount::pairs::PairCount;
use quadcount::reduction::{FourCopyCounter, GeneralCounter};
use common::hub_stream;
use quadcount::stream::{gen_general, inverse_layered, GenKind, GenSpec};
use rand::Rng;

const M_HAT: u64 = 64;

/// Grows hubs on every layer past the top class, then strips them again.
fn swing_stream(seed: u64, n: u32) -> Vec<UpdateEvent> {
    let mut rng = common::rng(seed);
    let mut g = LayeredGraph::new();
    let mut out = Vec::new();
    let push = |g: &mut LayeredGraph, e: UpdateEvent, out: &mut Vec<UpdateEvent>| {
        if g.check(&e).is_ok() {
            g.apply(&e).unwrap();
            out.push(e);
        }
    };
    for _ in 0..150 {
        let m = MatrixId::from_index(rng.gen_range(0..4));
        let e = UpdateEvent::insert(m, rng.gen_range(0..n), rng.gen_range(0..n));
        push(&mut g, e, &mut out);
    }
    for round in 0..2 {
        for k in (0..n).rev() {
            for m in [MatrixId::A, MatrixId::B, MatrixId::C] {
                let hub = round as u32 + 1;
                for e in [UpdateEvent::insert(m, hub, k), UpdateEvent::insert(m, k, hub)] {
                    push(&mut g, e, &mut out);
                }
            }
        }
        for k in (0..n).rev() {
            for m in [MatrixId::A, MatrixId::B, MatrixId::C] {
                let hub = round as u32 + 1;
                for e in [UpdateEvent::delete(m, hub, k), UpdateEvent::delete(m, k, hub)] {
                    if rng.gen_bool(0.8) {
                        push(&mut g, e, &mut out);
                    }
                }
            }
        }
    }
    out
}

/// Edge pool with D middle hubs and endpoints spread over the L, M and H
/// tiers, inserted in random order and then toggled at random.
fn tiered_stream(seed: u64, churn: usize) -> Vec<UpdateEvent> {
    let n = 40u32;
    let mut rng = common::rng(seed);
    let mut pool = Vec::new();
    let tier = |x: u32| match x {
        20..=22 => n,
        12..=19 => 15,
        4..=11 => 6,
        _ => 1,
    };
    for x in 0..n {
        for h in 0..3 {
            pool.push(UpdateEvent::insert(MatrixId::A, x, h));
            pool.push(UpdateEvent::insert(MatrixId::C, h, x));
            pool.push(UpdateEvent::insert(MatrixId::B, h, x));
            pool.push(UpdateEvent::insert(MatrixId::B, x, h));
        }
        if tier(x) == n {
            for y in 0..n {
                pool.push(UpdateEvent::insert(MatrixId::A, x, y));
                pool.push(UpdateEvent::insert(MatrixId::C, y, x));
            }
        }
        for _ in 0..tier(x) {
            pool.push(UpdateEvent::insert(MatrixId::A, x, rng.gen_range(0..n)));
            pool.push(UpdateEvent::insert(MatrixId::C, rng.gen_range(0..n), x));
        }
        for _ in 0..4 {
            let y = rng.gen_range(3..n);
            let (b2, b3) = if x % 2 == 0 { (x, y) } else { (y, x) };
            pool.push(UpdateEvent::insert(MatrixId::B, b2, b3));
        }
        pool.push(UpdateEvent::insert(MatrixId::D, rng.gen_range(0..n), x));
    }
    pool.sort_by_key(|e| (e.matrix, e.x, e.y));
    pool.dedup();
    let pool = quadcount::stream::shuffled(&pool, seed);
    let mut g = LayeredGraph::new();
    let mut out = Vec::new();
    for e in &pool {
        g.apply(e).unwrap();
        out.push(*e);
    }
    for _ in 0..churn {
        let mut e = pool[rng.gen_range(0..pool.len())];
        if g.has(e.matrix, e.x, e.y) {
            e = e.inverse();
        }
        g.apply(&e).unwrap();
        out.push(e);
    }
    out
}

fn filtered(adj: &SignedAdj, cls: &Classes, l1: u8, s1: ClassSet, l2: u8, s2: ClassSet) -> CountMatrix {
    CountMatrix::from_adj(adj, |x| s1.has(cls.get(l1, x)) || s1.is_any(), |y| s2.has(cls.get(l2, y)) || s2.is_any())
}

/// Every table recomputed by dense products under the committed classes.
fn check_tables(e: &MainEngine) {
    let core = e.core().expect("full engine");
    let cls = core.classes();
    let parts = core.parts();
    for (s, spec) in SPECS.iter().enumerate() {
        let f0 = spec.kind.first_mat();
        let mats: Vec<CountMatrix> = (0..spec.kind.factors())
            .map(|g| {
                let l = (f0 + g) as u8 + 1;
                let adj = match spec.parts[g] {
                    Part::Old => &parts.old[f0 + g],
                    Part::New => &parts.new[f0 + g],
                    Part::All => &parts.all[f0 + g],
                };
                filtered(adj, cls, l, spec.set(l), l + 1, spec.set(l + 1))
            })
            .collect();
        let p = match spec.kind {
            Kind::ABC => multiply3(&mats[0], &mats[1], &mats[2]).unwrap(),
            _ => multiply(&mats[0], &mats[1]).unwrap(),
        }
        .to_pairs();
        assert_eq!(core.table(s).sorted(), p.sorted(), "table {} differs", spec.name);
    }
}

fn check_queries(e: &mut MainEngine, pairs: &[(u32, u32)]) {
    for &(u, v) in pairs {
        let want = oracle::brute_3paths(e.graph(), VertexRef::new(1, u), VertexRef::new(4, v)).unwrap();
        assert_eq!(e.query(u, v).unwrap(), want as i64, "query ({u},{v})");
    }
}

fn check_attribution(e: &mut MainEngine, u: u32, v: u32) {
    let (buckets, rec) = {
        let core = e.core().unwrap();
        let b = bucket_counts(core.parts(), core.classes(), u, v);
        (b, e.attribute(u, v).unwrap())
    };
    let mut covered = [0u32; BUCKETS];
    for (name, claim, value) in &rec.0 {
        let mut want = 0;
        for (b, &x) in buckets.iter().enumerate() {
            if claim.has(b) {
                covered[b] += 1;
                want += x;
            }
        }
        assert_eq!(*value, want, "term {name} for ({u},{v})");
    }
    assert!(covered.iter().all(|&c| c == 1), "buckets covered {:?} for ({u},{v})", covered);
}

fn engine() -> MainEngine {
    MainEngine::with_m_hat(M_HAT).unwrap()
}

#[test]
fn thresholds_at_test_scale() {
    let e = engine();
    let t = e.core().unwrap().thresholds();
    assert_eq!((t.tiny, t.medium, t.high, t.phase_size), (3, 5, 14, 39));
}

#[test]
fn queries_match_brute_force_on_hub_streams() {
    for seed in 0..4 {
        let n = 24;
        let mut e = engine();
        let mut rng = common::rng(100 + seed);
        for (i, ev) in hub_stream(seed, 500, n).iter().enumerate() {
            e.apply(ev).unwrap();
            if i % 3 == 0 {
                let mut pairs = vec![(0, 0), (0, rng.gen_range(0..n)), (rng.gen_range(0..n), 0)];
                pairs.push((rng.gen_range(0..n), rng.gen_range(0..n)));
                check_queries(&mut e, &pairs);
            }
        }
        let m = e.metrics();
        assert!(m.phases >= 5, "phases {}", m.phases);
        assert_eq!(m.deadline_misses, 0);
    }
}

#[test]
fn tables_match_dense_products() {
    let mut e = engine();
    for (i, ev) in hub_stream(7, 400, 20).iter().enumerate() {
        e.apply(ev).unwrap();
        if i % 7 == 0 {
            check_tables(&e);
        }
    }
    check_tables(&e);
}

#[test]
fn class_swings_stay_exact() {
    for seed in 0..3 {
        let n = 40;
        let mut e = engine();
        let mut rng = common::rng(seed);
        for (i, ev) in swing_stream(seed, n).iter().enumerate() {
            e.apply(ev).unwrap();
            if i % 5 == 0 {
                check_tables(&e);
                let hubs = [1, 2];
                let pairs = [(hubs[i % 2], hubs[(i / 2) % 2]), (rng.gen_range(0..n), 1), (2, rng.gen_range(0..n))];
                check_queries(&mut e, &pairs);
            }
        }
        let m = e.metrics().clone();
        assert!(m.transitions_committed >= 4, "committed {}", m.transitions_committed);
        assert!(m.class_switches >= 4);
    }
}

#[test]
fn every_bucket_claimed_once() {
    let n = 40;
    let mut e = engine();
    let mut rng = common::rng(9);
    for (i, ev) in swing_stream(3, n).iter().enumerate() {
        e.apply(ev).unwrap();
        if i % 4 == 0 {
            for _ in 0..3 {
                let u = if rng.gen_bool(0.5) { rng.gen_range(1..3) } else { rng.gen_range(0..n) };
                let v = if rng.gen_bool(0.5) { rng.gen_range(1..3) } else { rng.gen_range(0..n) };
                check_attribution(&mut e, u, v);
            }
        }
    }
}

#[test]
fn inverse_stream_restores_fresh_state() {
    for seed in 0..3 {
        let s = hub_stream(seed, 300, 20);
        let mut e = engine();
        for ev in s.iter().chain(inverse_layered(&s).iter()) {
            e.apply(ev).unwrap();
        }
        e.flush().unwrap();
        let mut fresh = engine();
        fresh.flush().unwrap();
        assert_eq!(e.digest(), fresh.digest());
        assert_eq!(e.graph().m(), 0);
    }
}

#[test]
fn four_copy_totals_match_brute_force() {
    let s = hub_stream(11, 300, 12);
    let mut c = FourCopyCounter::new(|_| engine());
    let mut g = LayeredGraph::new();
    for (i, ev) in s.iter().enumerate() {
        c.apply(ev).unwrap();
        g.apply(ev).unwrap();
        if i % 10 == 0 {
            assert_eq!(c.total() as u64, oracle::brute_layered_4cycles(&g), "step {i}");
        }
    }
}

#[test]
fn general_totals_match_brute_force() {
    for kind in [GenKind::Uniform, GenKind::Hub] {
        let s = gen_general(&GenSpec { kind, n: 16, steps: 160, delete_fraction: 0.3, seed: 5 }).unwrap();
        let mut c = GeneralCounter::new(engine());
        for (i, e) in s.iter().enumerate() {
            c.apply(e).unwrap();
            if i % 8 == 0 {
                assert_eq!(c.total() as u64, oracle::brute_4cycles_general(c.graph()), "{kind:?} step {i}");
            }
        }
    }
}

#[test]
fn auto_m_hat_bootstraps_and_rebuilds() {
    let cfg = MainConfig { m_hat: MHat::Auto, ..MainConfig::default() };
    let mut e = MainEngine::new(cfg).unwrap();
    assert!(e.core().is_none());
    let s = hub_stream(2, 600, 24);
    let mut saw_full = false;
    for (i, ev) in s.iter().enumerate() {
        e.apply(ev).unwrap();
        saw_full |= e.core().is_some();
        if i % 11 == 0 {
            check_queries(&mut e, &[(0, 0), (1, 3)]);
        }
    }
    assert!(saw_full);
    assert!(e.metrics().rebuilds >= 2, "rebuilds {}", e.metrics().rebuilds);
}

#[test]
fn signed_tables_cancel() {
    let mut e = engine();
    let evs = [
        UpdateEvent::insert(MatrixId::A, 0, 1),
        UpdateEvent::insert(MatrixId::B, 1, 2),
        UpdateEvent::insert(MatrixId::C, 2, 3),
    ];
    for ev in &evs {
        e.apply(ev).unwrap();
    }
    assert_eq!(e.query(0, 3).unwrap(), 1);
    for ev in evs.iter().rev() {
        e.apply(&ev.inverse()).unwrap();
    }
    assert_eq!(e.query(0, 3).unwrap(), 0);
    let core = e.core().unwrap();
    for (s, spec) in SPECS.iter().enumerate() {
        if !spec.phased {
            assert_eq!(core.table(s), &PairCount::new(), "{}", spec.name);
        }
    }
}

fn slow_engine() -> MainEngine {
    MainEngine::new(MainConfig { m_hat: MHat::Fixed(M_HAT), budget_multiplier: 1, ..MainConfig::default() }).unwrap()
}

#[test]
fn slow_transitions_stay_exact() {
    let mut rng = common::rng(21);
    for (k, s) in [tiered_stream(2, 900), swing_stream(5, 40)].into_iter().enumerate() {
        let mut e = slow_engine();
        let mut spanning = 0;
        for (i, ev) in s.iter().enumerate() {
            e.apply(ev).unwrap();
            spanning += e.core().unwrap().transitions().active.is_some() as u32;
            if i % 6 == 0 {
                check_tables(&e);
                let pairs: Vec<(u32, u32)> = (0..3).map(|_| (rng.gen_range(0..40), rng.gen_range(0..40))).collect();
                check_queries(&mut e, &pairs);
                check_attribution(&mut e, pairs[0].0, pairs[0].1);
            }
        }
        let m = e.metrics();
        assert!(spanning > 50, "stream {k}: transitions active after only {spanning} updates");
        assert!(m.transitions_committed > 10, "stream {k}: {m:?}");
    }
}

#[test]
fn every_query_term_is_exercised() {
    let mut seen = std::collections::BTreeSet::new();
    let mut rng = common::rng(4);
    let pick = |r: &mut rand_chacha::ChaCha8Rng| match r.gen_range(0..3) {
        0 => r.gen_range(20..23),
        1 => r.gen_range(4..12),
        _ => r.gen_range(0..40),
    };
    // a low endpoint reaching a high one through tiny middles, and the mirror image
    let mut lh = Vec::new();
    for w in 0..30 {
        lh.push(UpdateEvent::insert(MatrixId::C, w, 1));
        lh.push(UpdateEvent::insert(MatrixId::A, 2, w));
    }
    for w in 10..16 {
        lh.extend([UpdateEvent::insert(MatrixId::A, 1, w), UpdateEvent::insert(MatrixId::B, w, w)]);
        lh.extend([UpdateEvent::insert(MatrixId::C, w, 2)]);
    }
    for s in [tiered_stream(1, 1500), swing_stream(3, 40), lh] {
        let mut e = engine();
        for ev in &s {
            e.apply(ev).unwrap();
            {
                for _ in 0..6 {
                    let (u, v) = if rng.gen_bool(0.5) { (pick(&mut rng), pick(&mut rng)) } else { (rng.gen_range(1..3), rng.gen_range(1..3)) };
                    for (name, _, val) in e.attribute(u, v).unwrap().0 {
                        if val != 0 {
                            seen.insert(name);
                        }
                    }
                }
            }
        }
    }
    let src = include_str!("../src/main_engine/query.rs");
    let mut missing = Vec::new();
    for name in src.split('"').skip(1).step_by(2).filter(|n| n.chars().all(|c| c.is_ascii_lowercase() || c == '_' || c.is_ascii_digit())) {
        if !seen.contains(name) {
            missing.push(name);
        }
    }
    for s in quadcount::main_engine::stores::HSSH {
        if !seen.contains(SPECS[s].name) {
            missing.push(SPECS[s].name);
        }
    }
    assert!(missing.is_empty(), "never nonzero: {missing:?}");
}

#[test]
fn transition_cancelled_when_degree_returns() {
    let mut e = slow_engine();
    let mut evs = Vec::new();
    for w in 0..27 {
        evs.push(UpdateEvent::insert(MatrixId::A, 0, w));
        for y in 0..8 {
            evs.push(UpdateEvent::insert(MatrixId::B, w, y));
        }
    }
    for y in 0..8 {
        for v in 0..10 {
            evs.push(UpdateEvent::insert(MatrixId::C, y, v));
        }
    }
    for ev in &evs {
        e.apply(ev).unwrap();
    }
    e.flush().unwrap();
    let core = e.core().unwrap();
    assert_eq!(core.class(1, 0), quadcount::main_engine::classes::Class::M);
    let before = e.metrics().transitions_cancelled;
    e.apply(&UpdateEvent::insert(MatrixId::A, 0, 27)).unwrap();
    let active = e.core().unwrap().transitions().active.as_ref().map(|a| (a.layer, a.v));
    assert_eq!(active, Some((1, 0)), "M to H transition should still be running");
    e.apply(&UpdateEvent::delete(MatrixId::A, 0, 27)).unwrap();
    assert_eq!(e.metrics().transitions_cancelled, before + 1);
    check_tables(&e);
    check_queries(&mut e, &[(0, 0), (0, 5)]);
}
