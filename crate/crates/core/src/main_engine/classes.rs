//! Degree classes with factor-2 hysteresis bands.

use rustc_hash::FxHashMap;

use crate::params::Thresholds;

/// Layer-1/4 vertices use T, L, M, H; layer-2/3 vertices use T, S, D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    T,
    L,
    M,
    H,
    S,
    D,
}

impl Class {
    pub fn bit(self) -> u8 {
        1 << (self as u8)
    }

    /// Index among the middle-layer classes T, S, D.
    pub fn mid_index(self) -> usize {
        match self {
            Class::T => 0,
            Class::S => 1,
            Class::D => 2,
            _ => panic!("{self:?} is not a middle-layer class"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ClassSet(pub u8);

impl ClassSet {
    pub const ANY: ClassSet = ClassSet(0xff);

    pub fn of(cs: &[Class]) -> ClassSet {
        ClassSet(cs.iter().fold(0, |m, c| m | c.bit()))
    }

    pub fn has(self, c: Class) -> bool {
        self.0 & c.bit() != 0
    }

    pub fn is_any(self) -> bool {
        self.0 == 0xff
    }
}

/// Hysteresis bands [lo, hi) per class for one layer kind.
#[derive(Debug, Clone)]
pub struct Bands {
    pub tiny: u64,
    pub medium: u64,
    pub high: u64,
}

impl Bands {
    pub fn new(t: &Thresholds) -> Self {
        Bands { tiny: t.tiny, medium: t.medium, high: t.high }
    }

    pub fn band(&self, c: Class) -> (u64, u64) {
        match c {
            Class::T => (0, 2 * self.tiny),
            Class::L => (self.tiny, 2 * self.medium),
            Class::M => (self.medium, 2 * self.high),
            Class::H => (self.high, u64::MAX),
            Class::S => (self.tiny, 2 * self.high),
            Class::D => (self.high, u64::MAX),
        }
    }

    pub fn contains(&self, c: Class, deg: u64) -> bool {
        let (lo, hi) = self.band(c);
        lo <= deg && deg < hi
    }

    pub fn ladder(outer: bool) -> &'static [Class] {
        if outer {
            &[Class::T, Class::L, Class::M, Class::H]
        } else {
            &[Class::T, Class::S, Class::D]
        }
    }

    /// Lowest class whose band holds `deg`.
    pub fn initial(&self, outer: bool, deg: u64) -> Class {
        *Self::ladder(outer)
            .iter()
            .find(|&&c| self.contains(c, deg))
            .expect("bands cover every degree")
    }

    /// Neighbouring class in the direction `deg` left the band of `c`; None if inside.
    pub fn target(&self, outer: bool, c: Class, deg: u64) -> Option<Class> {
        if self.contains(c, deg) {
            return None;
        }
        let ladder = Self::ladder(outer);
        let i = ladder.iter().position(|&x| x == c).expect("class on ladder");
        let (lo, _) = self.band(c);
        if deg < lo {
            Some(ladder[i - 1])
        } else {
            Some(ladder[i + 1])
        }
    }
}

/// Vertex list with O(1) insert and remove.
#[derive(Debug, Clone, Default)]
pub struct VList {
    items: Vec<u32>,
    pos: FxHashMap<u32, usize>,
}

impl VList {
    pub fn insert(&mut self, v: u32) {
        if !self.pos.contains_key(&v) {
            self.pos.insert(v, self.items.len());
            self.items.push(v);
        }
    }

    pub fn remove(&mut self, v: u32) {
        if let Some(i) = self.pos.remove(&v) {
            self.items.swap_remove(i);
            if i < self.items.len() {
                self.pos.insert(self.items[i], i);
            }
        }
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Committed classes of every vertex plus lists for the small classes.
#[derive(Debug, Clone, Default)]
pub struct Classes {
    cls: [Vec<Class>; 4],
    // small-class lists: layer 1 and 4 keep H and M, layers 2 and 3 keep D
    lists: [[VList; 2]; 4],
}

fn list_slot(layer: u8, c: Class) -> Option<usize> {
    match (layer, c) {
        (1 | 4, Class::H) | (2 | 3, Class::D) => Some(0),
        (1 | 4, Class::M) => Some(1),
        _ => None,
    }
}

impl Classes {
    pub fn get(&self, layer: u8, v: u32) -> Class {
        self.cls[(layer - 1) as usize].get(v as usize).copied().unwrap_or(Class::T)
    }

    pub fn set(&mut self, layer: u8, v: u32, c: Class) {
        let old = self.get(layer, v);
        let row = &mut self.cls[(layer - 1) as usize];
        if row.len() <= v as usize {
            row.resize(v as usize + 1, Class::T);
        }
        row[v as usize] = c;
        let lists = &mut self.lists[(layer - 1) as usize];
        if let Some(s) = list_slot(layer, old) {
            lists[s].remove(v);
        }
        if let Some(s) = list_slot(layer, c) {
            lists[s].insert(v);
        }
    }

    /// Members of a small class (H or M on layers 1/4, D on layers 2/3).
    pub fn list(&self, layer: u8, c: Class) -> &[u32] {
        match list_slot(layer, c) {
            Some(s) => self.lists[(layer - 1) as usize][s].as_slice(),
            None => &[],
        }
    }

    pub fn has_list(layer: u8, c: Class) -> bool {
        list_slot(layer, c).is_some()
    }

    /// Non-tiny-default entries, sorted, for digests.
    pub fn nondefault(&self) -> Vec<(u8, u32, Class)> {
        let mut out = Vec::new();
        for (l, row) in self.cls.iter().enumerate() {
            for (v, &c) in row.iter().enumerate() {
                if c != Class::T {
                    out.push((l as u8 + 1, v as u32, c));
                }
            }
        }
        out
    }
}

/// Class lookup that may carry one pending reassignment.
pub trait ClassView {
    fn class(&self, layer: u8, v: u32) -> Class;
    /// Pending (layer, vertex, target class), if any.
    fn alt(&self) -> Option<(u8, u32, Class)>;
    fn list(&self, layer: u8, c: Class) -> &[u32];

    /// Membership under the committed classes and under the pending change.
    #[inline]
    fn ok(&self, layer: u8, v: u32, set: ClassSet) -> (bool, bool) {
        if set.is_any() {
            return (true, true);
        }
        let o = set.has(self.class(layer, v));
        match self.alt() {
            Some((l, z, c)) if l == layer && z == v => (o, set.has(c)),
            _ => (o, o),
        }
    }
}

pub struct Committed<'a> {
    pub classes: &'a Classes,
    pub alt: Option<(u8, u32, Class)>,
}

impl ClassView for Committed<'_> {
    fn class(&self, layer: u8, v: u32) -> Class {
        self.classes.get(layer, v)
    }
    fn alt(&self) -> Option<(u8, u32, Class)> {
        self.alt
    }
    fn list(&self, layer: u8, c: Class) -> &[u32] {
        self.classes.list(layer, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bands() -> Bands {
        Bands { tiny: 3, medium: 5, high: 14 }
    }

    #[test]
    fn initial_prefers_lower_class() {
        let b = bands();
        assert_eq!(b.initial(true, 0), Class::T);
        assert_eq!(b.initial(true, 4), Class::T);
        assert_eq!(b.initial(true, 6), Class::L);
        assert_eq!(b.initial(true, 27), Class::M);
        assert_eq!(b.initial(true, 28), Class::H);
        assert_eq!(b.initial(false, 27), Class::S);
        assert_eq!(b.initial(false, 28), Class::D);
    }

    #[test]
    fn targets_are_adjacent() {
        let b = bands();
        assert_eq!(b.target(true, Class::T, 6), Some(Class::L));
        assert_eq!(b.target(true, Class::L, 2), Some(Class::T));
        assert_eq!(b.target(true, Class::M, 28), Some(Class::H));
        assert_eq!(b.target(true, Class::M, 20), None);
        assert_eq!(b.target(false, Class::D, 13), Some(Class::S));
    }

    #[test]
    fn lists_follow_classes() {
        let mut c = Classes::default();
        c.set(2, 5, Class::D);
        c.set(2, 7, Class::D);
        assert_eq!(c.list(2, Class::D).len(), 2);
        c.set(2, 5, Class::S);
        assert_eq!(c.list(2, Class::D), &[7]);
        assert_eq!(c.get(3, 100), Class::T);
    }
}
