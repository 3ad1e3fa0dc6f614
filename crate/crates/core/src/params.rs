//! Exponent parameters, matrix multiplication exponent models, constraint
//! checking and solving, and integer thresholds for a reference edge count.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses a decimal literal such as `0.0098109` or `-1.5` exactly.
pub fn qdec(s: &str) -> Result<Q> {
    let bad = || Error::InvalidParam(format!("not a decimal: {s}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    if let Some((n, d)) = body.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        let v = Q::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    let v = Q::new(n, d);
    Ok(if neg { -v } else { v })
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
    })
}

fn qmax(a: Q, b: Q) -> Q {
    if a >= b {
        a
    } else {
        b
    }
}

fn qmin(a: Q, b: Q) -> Q {
    if a <= b {
        a
    } else {
        b
    }
}

/// A sample point ω(a, b, c) <= value of a rectangular exponent table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaSample {
    pub at: [Q; 3],
    pub value: Q,
}

/// Upper-bound model of the rectangular multiplication exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OmegaModel {
    /// ω(a,b,c) = max(a+b, b+c): multiplication as cheap as reading the input.
    BestPossible,
    /// Pads to square blocks of side min(a,b,c) multiplied at exponent `omega`.
    SquareInterp(Q),
    /// Tabulated sample points; off-sample values grow by the per-coordinate excess.
    TableDriven { samples: Vec<OmegaSample>, square: Q },
}

impl OmegaModel {
    /// The two rectangular samples quoted for ω = 2.371339.
    pub fn current_best_table() -> OmegaModel {
        let s = |a: &str, b: &str, c: &str, v: &str| OmegaSample {
            at: [qdec(a).unwrap(), qdec(b).unwrap(), qdec(c).unwrap()],
            value: qdec(v).unwrap(),
        };
        OmegaModel::TableDriven {
            samples: vec![
                s("0.375353", "0.6246471", "0.375353", "1.10495201"),
                s("0.6764776", "0.436994434", "0.436994434", "1.24039952"),
            ],
            square: qdec("2.371339").unwrap(),
        }
    }

    pub fn lower_bound(a: &Q, b: &Q, c: &Q) -> Q {
        qmax(a + b, b + c)
    }

    fn square_interp(omega: &Q, a: &Q, b: &Q, c: &Q) -> Q {
        let m = qmin(qmin(a.clone(), b.clone()), c.clone());
        a + b + c - (q(3, 1) - omega) * m
    }

    pub fn eval(&self, a: &Q, b: &Q, c: &Q) -> Q {
        let lb = Self::lower_bound(a, b, c);
        match self {
            OmegaModel::BestPossible => lb,
            OmegaModel::SquareInterp(w) => qmax(Self::square_interp(w, a, b, c), lb),
            OmegaModel::TableDriven { samples, square } => {
                let args = [a, b, c];
                let mut best = Self::square_interp(square, a, b, c);
                for s in samples {
                    let mut v = s.value.clone();
                    for (x, y) in args.iter().zip(&s.at) {
                        let ex = *x - y;
                        if ex.is_positive() {
                            v += ex;
                        }
                    }
                    best = qmin(best, v);
                }
                qmax(best, lb)
            }
        }
    }

    /// The square exponent ω(1,1,1).
    pub fn square(&self) -> Q {
        let one = Q::one();
        self.eval(&one, &one, &one)
    }
}

impl fmt::Display for OmegaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaModel::BestPossible => write!(f, "best-possible"),
            OmegaModel::SquareInterp(w) => write!(f, "square({})", to_f64(w)),
            OmegaModel::TableDriven { square, samples } => {
                write!(f, "table({} samples, square {})", samples.len(), to_f64(square))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSet {
    pub eps: Q,
    pub eps1: Q,
    pub eps2: Q,
    pub delta: Q,
    pub omega: OmegaModel,
}

impl ParamSet {
    /// ε = 1/24, δ = 1/8, ε1 = 1/24, ε2 = 5/24 under the best-possible model.
    pub fn best_possible() -> Self {
        ParamSet {
            eps: q(1, 24),
            eps1: q(1, 24),
            eps2: q(5, 24),
            delta: q(1, 8),
            omega: OmegaModel::BestPossible,
        }
    }

    /// ε = 0.0098109, δ = 0.0294327, ε1 = 0.04201965, ε2 = 0.14568075 under the ω = 2.371339 table.
    pub fn current_best() -> Self {
        ParamSet {
            eps: qdec("0.0098109").unwrap(),
            eps1: qdec("0.04201965").unwrap(),
            eps2: qdec("0.14568075").unwrap(),
            delta: qdec("0.0294327").unwrap(),
            omega: OmegaModel::current_best_table(),
        }
    }
}

/// One inequality `lhs <= rhs` of the parameter system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintRow {
    pub name: &'static str,
    pub lhs: Q,
    pub rhs: Q,
}

impl ConstraintRow {
    pub fn slack(&self) -> Q {
        &self.rhs - &self.lhs
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Constraint names in report order.
pub const CONSTRAINT_NAMES: [&str; 8] = [
    "chunk_high_product",
    "chunk_low_hh_product",
    "chunk_low_sparse",
    "phase_product",
    "dense_pairs",
    "warmup_class_order",
    "warmup_sparse_order",
    "class_order",
];

/// Evaluates every inequality of the parameter system.
pub fn constraint_report(p: &ParamSet) -> Vec<ConstraintRow> {
    let (e, e1, e2, d) = (&p.eps, &p.eps1, &p.eps2, &p.delta);
    let third = q(1, 3);
    let two3 = q(2, 3);
    let four3 = q(4, 3);
    let w = |a: Q, b: Q, c: Q| p.omega.eval(&a, &b, &c);
    let sq = p.omega.square();
    let row = |name, lhs, rhs| ConstraintRow { name, lhs, rhs };
    vec![
        row(
            CONSTRAINT_NAMES[0],
            w(&third + e1, &two3 - e1, &third + e1),
            &four3 - q(2, 1) * e1,
        ),
        row(
            CONSTRAINT_NAMES[1],
            w(&two3 + q(2, 1) * e, &third - e1 + e2, &third - e1 + e2),
            &four3 - q(2, 1) * e1,
        ),
        row(CONSTRAINT_NAMES[2], q(3, 1) * e1 + q(2, 1) * e, e2.clone()),
        row(
            CONSTRAINT_NAMES[3],
            (q(2, 1) * &sq + Q::one()) * e + (&sq - Q::one()) * &two3,
            Q::one() - d,
        ),
        row(CONSTRAINT_NAMES[4], q(3, 1) * e, d.clone()),
        row(CONSTRAINT_NAMES[5], e1.clone(), q(1, 6)),
        row(CONSTRAINT_NAMES[6], e1 - e2, third.clone()),
        row(CONSTRAINT_NAMES[7], e.clone(), q(1, 6)),
    ]
}

/// Violated inequalities only; empty when the parameter set is feasible.
pub fn check_constraints(p: &ParamSet) -> Vec<ConstraintRow> {
    constraint_report(p).into_iter().filter(|r| !r.holds()).collect()
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Reject solutions with ε = 0.
    pub strict_positive: bool,
    /// Require ε1 >= ε so the warm-up subroutine fits the main update time.
    pub eps1_at_least_eps: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { strict_positive: true, eps1_at_least_eps: true }
    }
}

/// Grid search over multiples of `resolution` in [0, 1/3]: maximal ε, then
/// maximal δ, then minimal ε2, then maximal ε1.
pub fn solve_params(model: &OmegaModel, resolution: &Q, opts: &SolveOptions) -> Result<ParamSet> {
    if !resolution.is_positive() {
        return Err(Error::InvalidParam("resolution must be positive".into()));
    }
    let third = q(1, 3);
    let mut grid = Vec::new();
    let mut x = Q::zero();
    while x <= third {
        grid.push(x.clone());
        x += resolution;
    }
    let feasible = |p: &ParamSet| check_constraints(p).is_empty();
    // ε descending; the first ε with any feasible point wins.
    for e in grid.iter().rev() {
        if opts.strict_positive && !e.is_positive() {
            continue;
        }
        let mut best: Option<ParamSet> = None;
        for d in grid.iter().rev() {
            for e2 in grid.iter() {
                for e1 in grid.iter().rev() {
                    if opts.eps1_at_least_eps && e1 < e {
                        continue;
                    }
                    let p = ParamSet {
                        eps: e.clone(),
                        eps1: e1.clone(),
                        eps2: e2.clone(),
                        delta: d.clone(),
                        omega: model.clone(),
                    };
                    if feasible(&p) {
                        best = Some(p);
                        break;
                    }
                }
                if best.is_some() {
                    break;
                }
            }
            if best.is_some() {
                break;
            }
        }
        if let Some(p) = best {
            return Ok(p);
        }
    }
    Err(Error::Infeasible)
}

/// Integer thresholds for a reference edge count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thresholds {
    pub m_hat: u64,
    pub high: u64,
    pub medium: u64,
    pub tiny: u64,
    pub chunk_size: u64,
    pub chunk_sparse: u64,
    /// Layer-1/4 medium cut used by the warm-up algorithm, ⌈m̂^{1/3+ε1}⌉.
    pub warm_medium: u64,
    pub phase_size: u64,
    pub per_update_budget: u64,
    pub chunk_job_work_cap: u64,
    pub phase_job_work_cap: u64,
}

/// Default multiplier on the high threshold for per-update work.
pub const DEFAULT_BUDGET_MULTIPLIER: u64 = 64;

/// ⌈m^e⌉ for a non-negative rational exponent, exact for small denominators.
pub fn ceil_pow(m: u64, e: &Q) -> u64 {
    if m <= 1 || e.is_zero() {
        return 1;
    }
    let (num, den) = (e.numer(), e.denom());
    if let (Some(p), Some(qd)) = (num.to_u32(), den.to_u32()) {
        if qd <= 240 && (p as u64) * 64 <= 20_000 * qd as u64 {
            let x = num_traits::pow(BigUint::from(m), p as usize);
            let r = x.nth_root(qd);
            let exact = num_traits::pow(r.clone(), qd as usize) == x;
            let c = if exact { r } else { r + 1u32 };
            return c.to_u64().unwrap_or(u64::MAX);
        }
    }
    let f = (m as f64).powf(to_f64(e));
    let r = f.round();
    if (f - r).abs() <= 1e-9 * f.max(1.0) {
        r as u64
    } else {
        f.ceil() as u64
    }
}

fn raw_thresholds(m_hat: u64, p: &ParamSet, multiplier: u64) -> Thresholds {
    let (e, e1, e2, d) = (&p.eps, &p.eps1, &p.eps2, &p.delta);
    let third = q(1, 3);
    let two3 = q(2, 3);
    let high = ceil_pow(m_hat, &(&two3 - e));
    let medium = ceil_pow(m_hat, &(&third + e));
    let tiny = ceil_pow(m_hat, &(&third - q(2, 1) * e));
    let chunk_size = ceil_pow(m_hat, &(&two3 - e1));
    let chunk_sparse = ceil_pow(m_hat, &(&third - e2));
    let warm_medium = ceil_pow(m_hat, &(&third + e1));
    let phase_size = ceil_pow(m_hat, &(Q::one() - d));
    let chunk_job_work_cap = ceil_pow(m_hat, &(q(4, 3) - q(2, 1) * e1));
    let phase_job_work_cap = ceil_pow(m_hat, &(p.omega.square() * (&two3 + q(2, 1) * e)));
    let per_update_budget = (multiplier.saturating_mul(high))
        .max(chunk_job_work_cap.div_ceil(chunk_size))
        .max(phase_job_work_cap.div_ceil(phase_size));
    Thresholds {
        m_hat,
        high,
        medium,
        tiny,
        chunk_size,
        chunk_sparse,
        warm_medium,
        phase_size,
        per_update_budget,
        chunk_job_work_cap,
        phase_job_work_cap,
    }
}

impl Thresholds {
    /// Strict class ordering holds for both algorithms.
    pub fn ordered(&self) -> bool {
        1 <= self.tiny
            && self.tiny < self.medium
            && self.medium < self.high
            && self.warm_medium < self.chunk_size
    }
}

/// Smallest m̂ whose thresholds are strictly ordered (searched up to 2^20).
pub fn bootstrap_minimum(p: &ParamSet) -> u64 {
    (2..=1u64 << 20)
        .find(|&m| raw_thresholds(m, p, DEFAULT_BUDGET_MULTIPLIER).ordered())
        .unwrap_or(u64::MAX)
}

pub fn thresholds_for(m_hat: u64, p: &ParamSet) -> Result<Thresholds> {
    thresholds_with(m_hat, p, DEFAULT_BUDGET_MULTIPLIER)
}

pub fn thresholds_with(m_hat: u64, p: &ParamSet, multiplier: u64) -> Result<Thresholds> {
    let t = raw_thresholds(m_hat, p, multiplier);
    if !t.ordered() {
        return Err(Error::BootstrapRange { m_hat, min: bootstrap_minimum(p) });
    }
    Ok(t)
}
