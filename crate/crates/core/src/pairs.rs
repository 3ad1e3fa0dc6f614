//! Sparse signed pair counts: absent keys read as zero.

use rustc_hash::FxHashMap;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairCount {
    map: FxHashMap<(u32, u32), i64>,
}

impl PairCount {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, x: u32, y: u32) -> i64 {
        self.map.get(&(x, y)).copied().unwrap_or(0)
    }

    pub fn add(&mut self, x: u32, y: u32, d: i64) {
        if d == 0 {
            return;
        }
        let e = self.map.entry((x, y)).or_insert(0);
        *e += d;
        if *e == 0 {
            self.map.remove(&(x, y));
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn clear(&mut self) {
        self.map.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), i64)> + '_ {
        self.map.iter().map(|(&k, &v)| (k, v))
    }

    pub fn add_all(&mut self, other: &PairCount) {
        for (&(x, y), &v) in &other.map {
            self.add(x, y, v);
        }
    }

    /// Entries in sorted key order.
    pub fn sorted(&self) -> Vec<((u32, u32), i64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable();
        v
    }

    pub fn sum(&self) -> i64 {
        self.map.values().sum()
    }
}

impl FromIterator<((u32, u32), i64)> for PairCount {
    fn from_iter<I: IntoIterator<Item = ((u32, u32), i64)>>(iter: I) -> Self {
        let mut p = PairCount::new();
        for ((x, y), v) in iter {
            p.add(x, y, v);
        }
        p
    }
}
