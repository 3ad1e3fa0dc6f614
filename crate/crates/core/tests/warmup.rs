mod common;

use common::{paths_signed, rng, skewed_adj};
use quadcount::graph::SignedAdj;
use quadcount::matmul::{multiply, CountMatrix};
use quadcount::oracle::brute_3paths;
use quadcount::params::{thresholds_for, ParamSet};
use quadcount::warmup::{Split, WClass, WarmupConfig, WarmupEngine};
use quadcount::VertexRef;
use rand::Rng;

fn config() -> WarmupConfig {
    WarmupConfig::from_thresholds(&thresholds_for(128, &ParamSet::best_possible()).unwrap())
}

fn engine(seed: u64, n: u32) -> WarmupEngine {
    let mut r = rng(seed);
    let a = skewed_adj(&mut r, n, &[(0, 26), (1, 23), (2, 12), (3, 9)], 60, false);
    let c = skewed_adj(&mut r, n, &[(0, 25), (1, 10), (2, 8)], 60, true);
    WarmupEngine::new(a, c, config()).unwrap()
}

/// Random B stream: 0/1 graph semantics, `steps` pushes with deletions.
fn b_stream(seed: u64, n: u32, steps: usize) -> Vec<(u32, u32, i64)> {
    let mut r = rng(seed ^ 0xb);
    let mut b = SignedAdj::new();
    let mut live: Vec<(u32, u32)> = Vec::new();
    let mut out = Vec::new();
    while out.len() < steps {
        if !live.is_empty() && r.gen_bool(0.3) {
            let i = r.gen_range(0..live.len());
            let (x, y) = live.swap_remove(i);
            b.add(x, y, -1);
            out.push((x, y, -1));
        } else {
            // bias some rows and columns so within-chunk dense labels occur
            let x = if r.gen_bool(0.3) { r.gen_range(0..3) } else { r.gen_range(0..n) };
            let y = if r.gen_bool(0.3) { r.gen_range(0..3) } else { r.gen_range(0..n) };
            if b.get(x, y) == 0 {
                b.add(x, y, 1);
                live.push((x, y));
                out.push((x, y, 1));
            }
        }
    }
    out
}

#[test]
fn classes_cover_all_three() {
    let w = engine(1, 32);
    assert_eq!(w.class1(0), WClass::H);
    assert_eq!(w.class1(2), WClass::M);
    assert_eq!(w.class4(0), WClass::H);
    assert_eq!(w.class4(1), WClass::M);
}

#[test]
fn queries_match_brute_force() {
    for seed in 0..5u64 {
        let n = 24 + (seed as u32 % 3) * 4;
        let mut w = engine(seed, n);
        let steps = 6 * config().chunk_size as usize + 5;
        let mut r = rng(seed + 100);
        for (x, y, s) in b_stream(seed, n, steps) {
            w.push(x, y, s).unwrap();
            for _ in 0..4 {
                let u = r.gen_range(0..n);
                let v = r.gen_range(0..n);
                let want = paths_signed(w.a(), w.b_total(), w.c(), u, v);
                assert_eq!(w.query(u, v), want, "seed {seed} u {u} v {v}");
            }
            // hub pairs exercise the stored high/medium rows
            for (u, v) in [(0, 0), (0, 1), (2, 0), (2, 1), (5, 0), (0, 5), (5, 6), (2, 5)] {
                let want = paths_signed(w.a(), w.b_total(), w.c(), u, v);
                assert_eq!(w.query(u, v), want, "seed {seed} u {u} v {v}");
            }
        }
        assert_eq!(w.metrics().deadline_misses, 0);
        assert!(w.metrics().chunks_sealed >= 5);
    }
}

#[test]
fn query_agrees_with_oracle_on_graph() {
    let mut w = engine(7, 28);
    for (x, y, s) in b_stream(7, 28, 120) {
        w.push(x, y, s).unwrap();
    }
    let g = common::graph_of(w.a(), w.b_total(), w.c());
    for u in 0..28 {
        for v in 0..28 {
            let want = brute_3paths(&g, VertexRef::new(1, u), VertexRef::new(4, v)).unwrap();
            assert_eq!(w.query(u, v), want);
        }
    }
}

#[test]
fn stores_equal_one_shot_products_at_fold_points() {
    let mut w = engine(3, 28);
    let cs = config().chunk_size as usize;
    for (i, (x, y, s)) in b_stream(3, 28, 5 * cs).into_iter().enumerate() {
        w.push(x, y, s).unwrap();
        if (i + 1) % cs != 0 {
            continue;
        }
        let mut folded = SignedAdj::new();
        for sp in Split::ALL {
            folded.add_all(w.folded(sp));
        }
        let cls1 = |want: WClass| {
            let w = &w;
            move |u: u32| w.class1(u) == want
        };
        let cls4 = |want: WClass| {
            let w = &w;
            move |v: u32| w.class4(v) == want
        };
        let any = |_: u32| true;
        let b = CountMatrix::from_adj(&folded, any, any);
        let ah = CountMatrix::from_adj(w.a(), cls1(WClass::H), any);
        let ch = CountMatrix::from_adj(w.c(), any, cls4(WClass::H));
        let st = w.stores();
        assert_eq!(multiply(&ah, &b).unwrap().to_pairs(), st.ah_b);
        assert_eq!(multiply(&multiply(&ah, &b).unwrap(), &ch).unwrap().to_pairs(), st.ah_b_ch);
        assert_eq!(multiply(&b, &ch).unwrap().to_pairs(), st.b_ch);
        let al = CountMatrix::from_adj(w.a(), cls1(WClass::L), any);
        let cl = CountMatrix::from_adj(w.c(), any, cls4(WClass::L));
        let split = |s| CountMatrix::from_adj(w.folded(s), any, any);
        assert_eq!(multiply(&al, &split(Split::DD)).unwrap().to_pairs(), st.al_bdd);
        assert_eq!(multiply(&al, &split(Split::SD)).unwrap().to_pairs(), st.al_bsd);
        assert_eq!(multiply(&split(Split::DS), &cl).unwrap().to_pairs(), st.bds_cl);
        assert_eq!(multiply(&split(Split::SS), &cl).unwrap().to_pairs(), st.bss_cl);
    }
}

#[test]
fn lazy_scan_is_bounded_by_two_chunks() {
    let mut w = engine(5, 24);
    let cs = config().chunk_size as usize;
    for (x, y, s) in b_stream(5, 24, 7 * cs + 3) {
        w.push(x, y, s).unwrap();
        assert!(w.window_len() <= 2 * cs);
    }
}

#[test]
fn insert_then_delete_nets_to_zero() {
    let mut w = engine(9, 24);
    let cs = config().chunk_size as usize;
    let fwd = b_stream(9, 24, 3 * cs);
    for &(x, y, s) in &fwd {
        w.push(x, y, s).unwrap();
    }
    for &(x, y, s) in fwd.iter().rev() {
        w.push(x, y, -s).unwrap();
    }
    w.flush().unwrap();
    let fresh = engine(9, 24);
    assert_eq!(w.stores(), fresh.stores());
}
