use proptest::prelude::*;
use quadcount::graph::SignedAdj;
use quadcount::main_engine::parts::Parts;
use quadcount::main_engine::{MainConfig, MainEngine};
use quadcount::matmul::{multiply, multiply3, multiply_with, Backend, CountMatrix, JobState, ProductJob};
use quadcount::naive::NaiveEngine;
use quadcount::params::{self, check_constraints, q, solve_params, OmegaModel, ParamSet, Q, SolveOptions};
use quadcount::reduction::GeneralCounter;
use quadcount::stream::{gen_general, inverse_general, GenKind, GenSpec};
use quadcount::{Exec, GeneralGraph, GeneralUpdate};

fn entries(n: u32, max: usize) -> impl Strategy<Value = Vec<(u32, u32, i64)>> {
    prop::collection::vec((0..n, 0..n, -3i64..4), 0..max)
}

fn matrix(e: &[(u32, u32, i64)]) -> CountMatrix {
    CountMatrix::from_entries(e.iter().copied().filter(|t| t.2 != 0))
}

fn general_stream() -> impl Strategy<Value = Vec<GeneralUpdate>> {
    (4u32..16, 0usize..200, 0.0f64..0.6, any::<u64>()).prop_map(|(n, steps, del, seed)| {
        gen_general(&GenSpec { kind: GenKind::Uniform, n, steps, delete_fraction: del, seed }).unwrap()
    })
}

fn rational() -> impl Strategy<Value = Q> {
    (0i64..=24).prop_map(|k| q(k, 24))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn product_job_result_ignores_budgets(
        a in entries(12, 60),
        b in entries(12, 60),
        budgets in prop::collection::vec(1u64..40, 1..20),
    ) {
        let (a, b) = (matrix(&a), matrix(&b));
        let want = multiply(&a, &b).unwrap();
        let mut job = ProductJob::new(a, b, u64::MAX);
        let mut i = 0;
        while job.step(budgets[i % budgets.len()]).unwrap() != JobState::Done {
            i += 1;
        }
        prop_assert!(job.result().unwrap().same_values(&want));
        prop_assert!(job.ops() <= job.work_bound());
    }

    #[test]
    fn triple_job_matches_multiply3(a in entries(8, 30), b in entries(8, 30), c in entries(8, 30), budget in 1u64..25) {
        let (a, b, c) = (matrix(&a), matrix(&b), matrix(&c));
        let want = multiply3(&a, &b, &c).unwrap();
        let mut job = ProductJob::triple(a, b, c, u64::MAX);
        while job.step(budget).unwrap() != JobState::Done {}
        prop_assert!(job.result().unwrap().same_values(&want));
        prop_assert!(job.ops() <= job.work_bound());
    }

    #[test]
    fn product_is_associative(a in entries(9, 40), b in entries(9, 40), c in entries(9, 40)) {
        let (a, b, c) = (matrix(&a), matrix(&b), matrix(&c));
        let left = multiply(&multiply(&a, &b).unwrap(), &c).unwrap();
        let right = multiply(&a, &multiply(&b, &c).unwrap()).unwrap();
        prop_assert!(left.same_values(&right));
        prop_assert!(left.same_values(&multiply3(&a, &b, &c).unwrap()));
    }

    #[test]
    fn backends_agree(a in entries(20, 120), b in entries(20, 120)) {
        let (a, b) = (matrix(&a), matrix(&b));
        let want = multiply_with(&a, &b, Backend::Schoolbook, Exec::Sequential).unwrap();
        for backend in [Backend::Blocked, Backend::Strassen] {
            for exec in [Exec::Sequential, Exec::Parallel] {
                prop_assert!(multiply_with(&a, &b, backend, exec).unwrap().same_values(&want));
            }
        }
    }

    #[test]
    fn signed_entries_cancel(a in entries(10, 40), b in entries(10, 40)) {
        let neg: Vec<_> = a.iter().map(|&(x, y, v)| (x, y, -v)).collect();
        let (a, neg, b) = (matrix(&a), matrix(&neg), matrix(&b));
        let sum = multiply(&a, &b).unwrap().sum(&multiply(&neg, &b).unwrap()).unwrap();
        prop_assert!(sum.to_pairs().sorted().is_empty());
    }

    #[test]
    fn omega_models_are_monotone(a in rational(), b in rational(), c in rational(), bump in 1i64..6, axis in 0usize..3) {
        let models = [OmegaModel::BestPossible, OmegaModel::SquareInterp(params::qdec("2.371339").unwrap()), OmegaModel::current_best_table()];
        let mut up = [a.clone(), b.clone(), c.clone()];
        up[axis] += q(bump, 24);
        for m in &models {
            let lo = m.eval(&a, &b, &c);
            prop_assert!(lo >= OmegaModel::lower_bound(&a, &b, &c));
            prop_assert!(m.eval(&up[0], &up[1], &up[2]) >= lo, "{m}");
        }
    }

    #[test]
    fn thresholds_stay_ordered_past_bootstrap(extra in 0u64..100_000) {
        let p = ParamSet::best_possible();
        let m = params::bootstrap_minimum(&p) + extra;
        let t = params::thresholds_for(m, &p).unwrap();
        prop_assert!(t.ordered());
        prop_assert!(t.per_update_budget >= t.high);
    }

    #[test]
    fn degrees_are_consistent(s in general_stream()) {
        let mut g = GeneralGraph::new();
        for e in &s {
            g.apply(e).unwrap();
        }
        let edges = g.edges();
        prop_assert_eq!(edges.len() as u64, g.m());
        let deg_sum: usize = (0..64).map(|v| g.deg(v)).sum();
        prop_assert_eq!(deg_sum as u64, 2 * g.m());
        for (u, v) in edges {
            prop_assert!(g.neighbors(u).contains(&v) && g.neighbors(v).contains(&u));
        }
    }

    #[test]
    fn inverse_stream_returns_to_empty(s in general_stream()) {
        let mut n = NaiveEngine::new();
        for e in s.iter().chain(inverse_general(&s).iter()) {
            n.apply(e).unwrap();
        }
        prop_assert_eq!(n.total(), 0);
        prop_assert!(n.table().sorted().is_empty());
        prop_assert_eq!(n.graph().m(), 0);
    }

    #[test]
    fn rotation_keeps_parts_summing_to_all(
        ops in prop::collection::vec((0usize..3, 0u32..6, 0u32..6, prop::bool::ANY, prop::bool::weighted(0.1)), 0..150),
    ) {
        let mut p = Parts::default();
        for (m, x, y, neg, rotate) in ops {
            p.update(m, x, y, if neg { -1 } else { 1 });
            if rotate {
                let before: Vec<SignedAdj> = (0..3)
                    .map(|m| {
                        let mut o = p.next_old(m);
                        o.sub_all(&p.cur[m]);
                        o
                    })
                    .collect();
                let cur = p.cur.clone();
                p.rotate();
                for m in 0..3 {
                    prop_assert_eq!(p.old[m].entries(), before[m].entries());
                    prop_assert_eq!(p.new[m].entries(), cur[m].entries());
                    prop_assert!(p.cur[m].is_empty());
                }
            }
            for m in 0..3 {
                let mut sum = p.old[m].clone();
                sum.add_all(&p.new[m]);
                prop_assert_eq!(sum.entries(), p.all[m].entries());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_output_satisfies_every_constraint(k in 3i64..40) {
        let res = q(1, k);
        for model in [OmegaModel::BestPossible, OmegaModel::SquareInterp(q(2, 1))] {
            if let Ok(p) = solve_params(&model, &res, &SolveOptions::default()) {
                prop_assert!(check_constraints(&p).is_empty(), "{model} at 1/{k}");
            }
        }
    }

    #[test]
    fn main_engine_replay_is_deterministic(s in general_stream()) {
        let run = || {
            let mut c = GeneralCounter::new(MainEngine::new(MainConfig::fixed(64)).unwrap());
            let totals: Vec<i64> = s.iter().map(|e| { c.apply(e).unwrap(); c.total() }).collect();
            (totals, c.engine().digest())
        };
        prop_assert_eq!(run(), run());
    }
}
