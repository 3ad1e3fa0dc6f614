//! Exact signed integer matrix products over vertex-indexed matrices and
//! budget-stepped deferred product jobs.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::graph::SignedAdj;
use crate::pairs::PairCount;
use crate::Exec;

/// Dense signed matrix whose rows and columns are labelled by vertex ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountMatrix {
    rows: Vec<u32>,
    cols: Vec<u32>,
    row_index: FxHashMap<u32, usize>,
    col_index: FxHashMap<u32, usize>,
    data: Vec<i64>,
}

fn index_of(ids: &[u32]) -> FxHashMap<u32, usize> {
    ids.iter().enumerate().map(|(i, &v)| (v, i)).collect()
}

impl CountMatrix {
    pub fn from_pairs(p: &PairCount) -> Self {
        Self::from_entries(p.iter().map(|((x, y), v)| (x, y, v)))
    }

    pub fn zeros(rows: Vec<u32>, cols: Vec<u32>) -> Self {
        let data = vec![0; rows.len() * cols.len()];
        CountMatrix {
            row_index: index_of(&rows),
            col_index: index_of(&cols),
            rows,
            cols,
            data,
        }
    }

    pub fn identity(ids: Vec<u32>) -> Self {
        let mut m = Self::zeros(ids.clone(), ids);
        for i in 0..m.rows.len() {
            let n = m.cols.len();
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from (row, col, value) triples; ids are sorted.
    pub fn from_entries(entries: impl IntoIterator<Item = (u32, u32, i64)>) -> Self {
        let entries: Vec<_> = entries.into_iter().filter(|e| e.2 != 0).collect();
        let mut rows: Vec<u32> = entries.iter().map(|e| e.0).collect();
        let mut cols: Vec<u32> = entries.iter().map(|e| e.1).collect();
        rows.sort_unstable();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        let mut m = Self::zeros(rows, cols);
        for (x, y, v) in entries {
            let (i, j) = (m.row_index[&x], m.col_index[&y]);
            let n = m.cols.len();
            m.data[i * n + j] += v;
        }
        m
    }

    /// The entries of `adj` whose row and column pass the filters.
    pub fn from_adj(adj: &SignedAdj, rows: impl Fn(u32) -> bool, cols: impl Fn(u32) -> bool) -> Self {
        Self::from_entries(adj.iter().filter(|&(x, y, _)| rows(x) && cols(y)))
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn row_ids(&self) -> &[u32] {
        &self.rows
    }

    pub fn col_ids(&self) -> &[u32] {
        &self.cols
    }

    /// Entry for vertex ids; unmapped ids read as 0.
    pub fn get(&self, x: u32, y: u32) -> i64 {
        match (self.row_index.get(&x), self.col_index.get(&y)) {
            (Some(&i), Some(&j)) => self.data[i * self.cols.len() + j],
            _ => 0,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols.len() + j]
    }

    pub fn to_pairs(&self) -> PairCount {
        let mut p = PairCount::new();
        let n = self.cols.len();
        for (i, &x) in self.rows.iter().enumerate() {
            for (j, &y) in self.cols.iter().enumerate() {
                p.add(x, y, self.data[i * n + j]);
            }
        }
        p
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    /// Entrywise sum over the union of index sets.
    pub fn sum(&self, other: &CountMatrix) -> Result<CountMatrix> {
        let mut p = self.to_pairs();
        for ((x, y), v) in other.to_pairs().iter() {
            let cur = p.get(x, y);
            cur.checked_add(v).ok_or(Error::Overflow("matrix sum"))?;
            p.add(x, y, v);
        }
        Ok(CountMatrix::from_entries(p.iter().map(|((x, y), v)| (x, y, v))))
    }

    /// Same nonzero entries, independent of index-map layout.
    pub fn same_values(&self, other: &CountMatrix) -> bool {
        self.to_pairs() == other.to_pairs()
    }
}

/// Restricts rows and columns, then drops rows and columns that are all zero.
pub fn submatrix(a: &CountMatrix, rows: impl Fn(u32) -> bool, cols: impl Fn(u32) -> bool) -> CountMatrix {
    let n = a.cols.len();
    let mut entries = Vec::new();
    for (i, &x) in a.rows.iter().enumerate() {
        if !rows(x) {
            continue;
        }
        for (j, &y) in a.cols.iter().enumerate() {
            let v = a.data[i * n + j];
            if v != 0 && cols(y) {
                entries.push((x, y, v));
            }
        }
    }
    CountMatrix::from_entries(entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    Schoolbook,
    #[default]
    Blocked,
    Strassen,
}

const BLOCK: usize = 64;
const STRASSEN_CUTOFF: usize = 64;

/// Operand pair re-indexed over the shared inner vertex set.
struct Aligned {
    n: usize,
    k: usize,
    p: usize,
    a: Vec<i64>,
    b: Vec<i64>,
}

fn align(a: &CountMatrix, b: &CountMatrix) -> Aligned {
    let inner: Vec<u32> = a.cols.iter().copied().filter(|c| b.row_index.contains_key(c)).collect();
    let (n, k, p) = (a.rows.len(), inner.len(), b.cols.len());
    let mut am = vec![0; n * k];
    let mut bm = vec![0; k * p];
    for (t, w) in inner.iter().enumerate() {
        let ja = a.col_index[w];
        let ib = b.row_index[w];
        for i in 0..n {
            am[i * k + t] = a.at(i, ja);
        }
        bm[t * p..(t + 1) * p].copy_from_slice(&b.data[ib * p..(ib + 1) * p]);
    }
    Aligned { n, k, p, a: am, b: bm }
}

fn mac(acc: i64, x: i64, y: i64) -> Result<i64> {
    x.checked_mul(y)
        .and_then(|t| acc.checked_add(t))
        .ok_or(Error::Overflow("multiply-accumulate"))
}

fn schoolbook_row(al: &Aligned, i: usize, out: &mut [i64]) -> Result<()> {
    for t in 0..al.k {
        let x = al.a[i * al.k + t];
        if x == 0 {
            continue;
        }
        let brow = &al.b[t * al.p..(t + 1) * al.p];
        for (o, &y) in out.iter_mut().zip(brow) {
            *o = mac(*o, x, y)?;
        }
    }
    Ok(())
}

fn blocked_rows(al: &Aligned, i0: usize, out: &mut [i64]) -> Result<()> {
    let rows = out.len() / al.p.max(1);
    for k0 in (0..al.k).step_by(BLOCK) {
        let k1 = (k0 + BLOCK).min(al.k);
        for j0 in (0..al.p).step_by(BLOCK) {
            let j1 = (j0 + BLOCK).min(al.p);
            for r in 0..rows {
                let i = i0 + r;
                for t in k0..k1 {
                    let x = al.a[i * al.k + t];
                    if x == 0 {
                        continue;
                    }
                    for j in j0..j1 {
                        let o = &mut out[r * al.p + j];
                        *o = mac(*o, x, al.b[t * al.p + j])?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn by_rows(
    al: &Aligned,
    exec: Exec,
    rows_per_task: usize,
    f: impl Fn(&Aligned, usize, &mut [i64]) -> Result<()> + Sync,
) -> Result<Vec<i64>> {
    let mut out = vec![0i64; al.n * al.p];
    if al.p == 0 || al.n == 0 {
        return Ok(out);
    }
    let chunk = rows_per_task * al.p;
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Exec::Parallel => out
            .par_chunks_mut(chunk)
            .enumerate()
            .try_for_each(|(c, o)| f(al, c * rows_per_task, o))?,
        _ => out
            .chunks_mut(chunk)
            .enumerate()
            .try_for_each(|(c, o)| f(al, c * rows_per_task, o))?,
    }
    Ok(out)
}

// Strassen on square power-of-two blocks, in i128 so intermediate sums
// cannot overflow before the final range check.
fn strassen(a: &[i128], b: &[i128], n: usize) -> Vec<i128> {
    if n <= STRASSEN_CUTOFF {
        let mut c = vec![0i128; n * n];
        for i in 0..n {
            for t in 0..n {
                let x = a[i * n + t];
                if x == 0 {
                    continue;
                }
                for j in 0..n {
                    c[i * n + j] += x * b[t * n + j];
                }
            }
        }
        return c;
    }
    let h = n / 2;
    let quad = |m: &[i128], qi: usize, qj: usize| -> Vec<i128> {
        let mut q = vec![0i128; h * h];
        for i in 0..h {
            q[i * h..(i + 1) * h].copy_from_slice(&m[(qi * h + i) * n + qj * h..(qi * h + i) * n + qj * h + h]);
        }
        q
    };
    let add = |x: &[i128], y: &[i128]| -> Vec<i128> { x.iter().zip(y).map(|(p, q)| p + q).collect() };
    let sub = |x: &[i128], y: &[i128]| -> Vec<i128> { x.iter().zip(y).map(|(p, q)| p - q).collect() };
    let (a11, a12, a21, a22) = (quad(a, 0, 0), quad(a, 0, 1), quad(a, 1, 0), quad(a, 1, 1));
    let (b11, b12, b21, b22) = (quad(b, 0, 0), quad(b, 0, 1), quad(b, 1, 0), quad(b, 1, 1));
    let m1 = strassen(&add(&a11, &a22), &add(&b11, &b22), h);
    let m2 = strassen(&add(&a21, &a22), &b11, h);
    let m3 = strassen(&a11, &sub(&b12, &b22), h);
    let m4 = strassen(&a22, &sub(&b21, &b11), h);
    let m5 = strassen(&add(&a11, &a12), &b22, h);
    let m6 = strassen(&sub(&a21, &a11), &add(&b11, &b12), h);
    let m7 = strassen(&sub(&a12, &a22), &add(&b21, &b22), h);
    let c11 = add(&sub(&add(&m1, &m4), &m5), &m7);
    let c12 = add(&m3, &m5);
    let c21 = add(&m2, &m4);
    let c22 = add(&add(&sub(&m1, &m2), &m3), &m6);
    let mut c = vec![0i128; n * n];
    for (q, (qi, qj)) in [(c11, (0, 0)), (c12, (0, 1)), (c21, (1, 0)), (c22, (1, 1))] {
        for i in 0..h {
            c[(qi * h + i) * n + qj * h..(qi * h + i) * n + qj * h + h].copy_from_slice(&q[i * h..(i + 1) * h]);
        }
    }
    c
}

fn strassen_product(al: &Aligned) -> Result<Vec<i64>> {
    let dim = al.n.max(al.k).max(al.p).next_power_of_two().max(1);
    let mut a = vec![0i128; dim * dim];
    let mut b = vec![0i128; dim * dim];
    for i in 0..al.n {
        for t in 0..al.k {
            a[i * dim + t] = al.a[i * al.k + t] as i128;
        }
    }
    for t in 0..al.k {
        for j in 0..al.p {
            b[t * dim + j] = al.b[t * al.p + j] as i128;
        }
    }
    let c = strassen(&a, &b, dim);
    let mut out = vec![0i64; al.n * al.p];
    for i in 0..al.n {
        for j in 0..al.p {
            out[i * al.p + j] = i64::try_from(c[i * dim + j]).map_err(|_| Error::Overflow("strassen"))?;
        }
    }
    Ok(out)
}

/// Product over the shared inner vertex set; ids missing on one side act as zero.
pub fn multiply(a: &CountMatrix, b: &CountMatrix) -> Result<CountMatrix> {
    multiply_with(a, b, Backend::default(), Exec::default())
}

pub fn multiply_with(a: &CountMatrix, b: &CountMatrix, backend: Backend, exec: Exec) -> Result<CountMatrix> {
    let al = align(a, b);
    let data = match backend {
        Backend::Schoolbook => by_rows(&al, exec, 1, schoolbook_row)?,
        Backend::Blocked => by_rows(&al, exec, 8, blocked_rows)?,
        Backend::Strassen if al.n.min(al.k).min(al.p) >= STRASSEN_CUTOFF => strassen_product(&al)?,
        Backend::Strassen => by_rows(&al, exec, 8, blocked_rows)?,
    };
    let mut out = CountMatrix::zeros(a.rows.clone(), b.cols.clone());
    out.data = data;
    Ok(out)
}

pub fn multiply3(a: &CountMatrix, b: &CountMatrix, c: &CountMatrix) -> Result<CountMatrix> {
    multiply(&multiply(a, b)?, c)
}

/// Progress report of a [`ProductJob`] step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JobState {
    Running,
    Done,
}

#[derive(Debug, Clone)]
struct Stage {
    n: usize,
    k: usize,
    p: usize,
    a: Vec<i64>,
    b: Vec<i64>,
    out: Vec<i64>,
    // cursor over (i, t, j); j == 0 means "about to inspect a[i][t]"
    i: usize,
    t: usize,
    j: usize,
}

impl Stage {
    fn new(al: Aligned) -> Self {
        let out = vec![0; al.n * al.p];
        Stage { n: al.n, k: al.k, p: al.p, a: al.a, b: al.b, out, i: 0, t: 0, j: 0 }
    }

    fn done(&self) -> bool {
        self.i >= self.n || self.k == 0
    }

    fn total_work(&self) -> u64 {
        let mut w = 0u64;
        for &x in &self.a {
            w += if x == 0 { 1 } else { self.p.max(1) as u64 };
        }
        w
    }

    /// Runs up to `budget` elementary operations; returns operations used.
    fn run(&mut self, mut budget: u64) -> Result<u64> {
        let mut used = 0;
        while budget > 0 && !self.done() {
            let x = self.a[self.i * self.k + self.t];
            if x == 0 || self.p == 0 {
                budget -= 1;
                used += 1;
                self.advance_t();
                continue;
            }
            let take = ((self.p - self.j) as u64).min(budget) as usize;
            let base = self.t * self.p;
            for j in self.j..self.j + take {
                let o = &mut self.out[self.i * self.p + j];
                *o = mac(*o, x, self.b[base + j])?;
            }
            self.j += take;
            budget -= take as u64;
            used += take as u64;
            if self.j == self.p {
                self.j = 0;
                self.advance_t();
            }
        }
        Ok(used)
    }

    fn advance_t(&mut self) {
        self.t += 1;
        if self.t == self.k {
            self.t = 0;
            self.i += 1;
        }
    }
}

/// A deferred product of two or three frozen operands, advanced a bounded
/// number of multiply-accumulates at a time. A triple product runs as
/// (A·B) followed by (A·B)·C.
#[derive(Debug, Clone)]
pub struct ProductJob {
    bound: u64,
    rows: Vec<u32>,
    mid_cols: Vec<u32>,
    last: Option<CountMatrix>,
    stage: Stage,
    second: bool,
    deadline: u64,
    ticks: u64,
    ops: u64,
    result: Option<CountMatrix>,
}

impl ProductJob {
    pub fn new(a: CountMatrix, b: CountMatrix, deadline: u64) -> Self {
        let al = align(&a, &b);
        let stage = Stage::new(al);
        ProductJob {
            bound: stage.total_work(),
            rows: a.rows.clone(),
            mid_cols: b.cols.clone(),
            last: None,
            stage,
            second: false,
            deadline,
            ticks: 0,
            ops: 0,
            result: None,
        }
    }

    pub fn triple(a: CountMatrix, b: CountMatrix, c: CountMatrix, deadline: u64) -> Self {
        let inner = b.cols.iter().filter(|w| c.row_index.contains_key(w)).count() as u64;
        let mut j = Self::new(a, b, deadline);
        j.bound += (j.rows.len() as u64) * inner.max(1) * (c.cols.len() as u64).max(1);
        j.last = Some(c);
        j
    }

    /// Upper bound on the job's total elementary operations, known at creation.
    pub fn work_bound(&self) -> u64 {
        self.bound
    }

    /// Exact elementary-operation count of the remaining first stage.
    pub fn first_stage_work(&self) -> u64 {
        self.stage.total_work()
    }

    pub fn ops(&self) -> u64 {
        self.ops
    }

    pub fn is_done(&self) -> bool {
        self.result.is_some()
    }

    pub fn deadline(&self) -> u64 {
        self.deadline
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    fn settle(&mut self) {
        while self.result.is_none() && self.stage.done() {
            let mut m = CountMatrix::zeros(self.rows.clone(), self.mid_cols.clone());
            m.data = std::mem::take(&mut self.stage.out);
            match self.last.take() {
                Some(c) if !self.second => {
                    self.second = true;
                    self.mid_cols = c.cols.clone();
                    self.stage = Stage::new(align(&m, &c));
                }
                _ => self.result = Some(m),
            }
        }
    }

    /// Advances by at most `budget` operations and counts one update tick.
    /// Returns `DeadlineMissed` if the tick budget is exhausted while running;
    /// the job stays usable and can still be finished.
    pub fn step(&mut self, budget: u64) -> Result<JobState> {
        self.settle();
        let mut left = budget;
        while left > 0 && self.result.is_none() {
            let used = self.stage.run(left)?;
            self.ops += used;
            left -= used;
            self.settle();
            if used == 0 && self.result.is_none() {
                break;
            }
        }
        self.ticks += 1;
        if self.result.is_some() {
            Ok(JobState::Done)
        } else if self.ticks >= self.deadline {
            Err(Error::DeadlineMissed(format!(
                "product job unfinished after {} updates",
                self.ticks
            )))
        } else {
            Ok(JobState::Running)
        }
    }

    /// Runs the job to completion regardless of budget.
    pub fn finish(&mut self) -> Result<&CountMatrix> {
        self.settle();
        while self.result.is_none() {
            let used = self.stage.run(u64::MAX)?;
            self.ops += used;
            self.settle();
        }
        Ok(self.result.as_ref().expect("settled"))
    }

    pub fn result(&self) -> Option<&CountMatrix> {
        self.result.as_ref()
    }

    pub fn into_result(mut self) -> Result<CountMatrix> {
        self.finish()?;
        Ok(self.result.take().expect("finished"))
    }
}

/// Jobs sharing one deadline, stepped in order from a per-update budget.
/// The pace is the larger of the configured budget and the work bound spread
/// evenly over the deadline, so conforming schedules cannot miss.
#[derive(Debug, Clone, Default)]
pub struct JobSet<K> {
    jobs: Vec<(K, ProductJob)>,
    deadline: u64,
    ticks: u64,
    pace: u64,
    missed: bool,
}

impl<K: Clone> JobSet<K> {
    pub fn new(jobs: Vec<(K, ProductJob)>, deadline: u64, budget: u64) -> Self {
        let deadline = deadline.max(1);
        let bound: u64 = jobs.iter().map(|(_, j)| j.work_bound()).sum();
        let pace = budget.max(bound.div_ceil(deadline)).max(1);
        JobSet { jobs, deadline, ticks: 0, pace, missed: false }
    }

    pub fn pace(&self) -> u64 {
        self.pace
    }

    pub fn is_done(&self) -> bool {
        self.jobs.iter().all(|(_, j)| j.is_done())
    }

    pub fn backlog(&self) -> u64 {
        self.jobs.iter().filter(|(_, j)| !j.is_done()).count() as u64
    }

    pub fn missed(&self) -> bool {
        self.missed
    }

    /// One update tick: spends up to `pace` operations; returns them.
    pub fn tick(&mut self) -> Result<u64> {
        let mut left = self.pace;
        let mut used = 0;
        for (_, j) in self.jobs.iter_mut() {
            if left == 0 {
                break;
            }
            if j.is_done() {
                continue;
            }
            let before = j.ops();
            j.step(left).ok();
            let spent = j.ops() - before;
            used += spent;
            left -= spent.min(left);
        }
        self.ticks += 1;
        if !self.is_done() && self.ticks >= self.deadline && !self.missed {
            self.missed = true;
            return Err(Error::DeadlineMissed(format!(
                "{} jobs unfinished after {} updates",
                self.backlog(),
                self.ticks
            )));
        }
        Ok(used)
    }

    /// Finishes every job; returns the operations spent.
    pub fn finish(&mut self) -> Result<u64> {
        let mut used = 0;
        for (_, j) in self.jobs.iter_mut() {
            let before = j.ops();
            j.finish()?;
            used += j.ops() - before;
        }
        Ok(used)
    }

    /// Finished results with their keys; call after `finish`.
    pub fn into_results(self) -> Result<Vec<(K, CountMatrix)>> {
        self.jobs.into_iter().map(|(k, j)| Ok((k, j.into_result()?))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, n: u32, p: u32, lo: i64, hi: i64) -> CountMatrix {
        let mut m = CountMatrix::zeros((0..n).collect(), (0..p).collect());
        for v in m.data.iter_mut() {
            *v = rng.gen_range(lo..=hi);
        }
        m
    }

    fn triple_loop(a: &CountMatrix, b: &CountMatrix) -> PairCount {
        let mut p = PairCount::new();
        for &x in a.row_ids() {
            for &y in b.col_ids() {
                let mut s = 0;
                for &w in a.col_ids() {
                    s += a.get(x, w) * b.get(w, y);
                }
                p.add(x, y, s);
            }
        }
        p
    }

    #[test]
    fn identity_product() {
        let i = CountMatrix::identity(vec![3, 5, 9]);
        assert!(multiply(&i, &i).unwrap().same_values(&i));
    }

    #[test]
    fn backends_agree_with_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(n, k, p) in &[(6, 6, 6), (1, 9, 3), (70, 80, 66), (130, 65, 129)] {
            let a = random(&mut rng, n, k, -3, 3);
            let b = random(&mut rng, k, p, -3, 3);
            let want = triple_loop(&a, &b);
            for backend in [Backend::Schoolbook, Backend::Blocked, Backend::Strassen] {
                for exec in [Exec::Sequential, Exec::Parallel] {
                    let got = multiply_with(&a, &b, backend, exec).unwrap();
                    assert_eq!(got.to_pairs(), want, "{backend:?} {exec:?} {n}x{k}x{p}");
                }
            }
        }
    }

    #[test]
    fn unmapped_ids_are_zero() {
        let a = CountMatrix::from_entries([(0, 1, 2), (0, 2, 1)]);
        let b = CountMatrix::from_entries([(2, 7, 5), (4, 7, 9)]);
        let c = multiply(&a, &b).unwrap();
        assert_eq!(c.get(0, 7), 5);
        assert_eq!(c.get(99, 7), 0);
    }

    #[test]
    fn overflow_is_an_error() {
        let a = CountMatrix::from_entries([(0, 0, i64::MAX), (0, 1, 1)]);
        let b = CountMatrix::from_entries([(0, 0, 1), (1, 0, 1)]);
        assert!(matches!(multiply(&a, &b), Err(Error::Overflow(_))));
    }

    #[test]
    fn empty_submatrix() {
        let a = CountMatrix::identity(vec![0, 1]);
        let s = submatrix(&a, |_| false, |_| true);
        assert_eq!((s.nrows(), s.ncols()), (0, 0));
    }

    #[test]
    fn job_single_step_when_budget_covers_work() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random(&mut rng, 4, 4, -2, 2);
        let b = random(&mut rng, 4, 4, -2, 2);
        let mut j = ProductJob::new(a.clone(), b.clone(), 1);
        assert_eq!(j.step(1 << 20).unwrap(), JobState::Done);
        assert!(j.result().unwrap().same_values(&multiply(&a, &b).unwrap()));
    }

    #[test]
    fn job_unit_budget_dense_3x3() {
        let ones = CountMatrix::from_entries((0..3).flat_map(|i| (0..3).map(move |j| (i, j, 1))));
        let mut j = ProductJob::new(ones.clone(), ones.clone(), 100);
        let mut steps = 0;
        while j.step(1).unwrap() == JobState::Running {
            steps += 1;
        }
        steps += 1;
        assert!(steps <= 27, "{steps}");
        assert_eq!(j.ops(), 27);
        assert!(j.result().unwrap().same_values(&multiply(&ones, &ones).unwrap()));
    }

    #[test]
    fn interleaved_jobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, b, c) = (random(&mut rng, 5, 5, -2, 2), random(&mut rng, 5, 5, -2, 2), random(&mut rng, 5, 5, -2, 2));
        let mut j1 = ProductJob::new(a.clone(), b.clone(), 1000);
        let mut j2 = ProductJob::triple(a.clone(), b.clone(), c.clone(), 1000);
        while !(j1.is_done() && j2.is_done()) {
            if !j1.is_done() {
                j1.step(rng.gen_range(1..7)).unwrap();
            }
            if !j2.is_done() {
                j2.step(rng.gen_range(1..7)).unwrap();
            }
        }
        assert!(j1.result().unwrap().same_values(&multiply(&a, &b).unwrap()));
        assert!(j2.result().unwrap().same_values(&multiply3(&a, &b, &c).unwrap()));
    }

    #[test]
    fn deadline_missed_then_finish() {
        let ones = CountMatrix::from_entries((0..3).flat_map(|i| (0..3).map(move |j| (i, j, 1))));
        let mut j = ProductJob::new(ones.clone(), ones.clone(), 2);
        assert_eq!(j.step(1).unwrap(), JobState::Running);
        assert!(matches!(j.step(1), Err(Error::DeadlineMissed(_))));
        assert!(j.finish().unwrap().same_values(&multiply(&ones, &ones).unwrap()));
    }
}
