use serde::{Deserialize, Serialize};
use std::fmt;

/// Largest supported ground set for bit-mask item sets.
pub const MAX_ITEMS: usize = 24;

/// A subset of the ground set {0, .., m-1}, encoded as a bit mask.
///
/// The set itself does not remember `m`; operations that need the ground-set
/// size take it as a parameter and validate with [`ItemSet::valid_for`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ItemSet(pub u32);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub fn full(m: usize) -> ItemSet {
        debug_assert!(m <= MAX_ITEMS);
        ItemSet(((1u64 << m) - 1) as u32)
    }

    pub fn singleton(j: usize) -> ItemSet {
        ItemSet(1 << j)
    }

    pub fn from_indices(indices: &[usize]) -> ItemSet {
        let mut mask = 0u32;
        for &j in indices {
            mask |= 1 << j;
        }
        ItemSet(mask)
    }

    pub fn indices(self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut mask = self.0;
        std::iter::from_fn(move || {
            if mask == 0 {
                None
            } else {
                let j = mask.trailing_zeros() as usize;
                mask &= mask - 1;
                Some(j)
            }
        })
    }

    pub fn card(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, j: usize) -> bool {
        self.0 >> j & 1 == 1
    }

    pub fn insert(self, j: usize) -> ItemSet {
        ItemSet(self.0 | 1 << j)
    }

    pub fn remove(self, j: usize) -> ItemSet {
        ItemSet(self.0 & !(1 << j))
    }

    pub fn union(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 | other.0)
    }

    pub fn inter(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 & other.0)
    }

    pub fn minus(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn valid_for(self, m: usize) -> bool {
        m <= MAX_ITEMS && self.is_subset_of(ItemSet::full(m))
    }

    /// All subsets of `self`, in descending numeric mask order, ending with
    /// the empty set. The standard sub-mask walk.
    pub fn subsets(self) -> SubsetIter {
        SubsetIter { mask: self.0, sub: self.0, done: false }
    }

    /// Subset-lexicographic order: S precedes T when the smallest item on
    /// which they differ belongs to S. Under this order the full set is the
    /// minimum, which is what tie-breaking "toward the lexicographically
    /// smallest bit pattern" resolves to.
    pub fn lex_before(self, other: ItemSet) -> bool {
        let diff = self.0 ^ other.0;
        diff != 0 && self.0 & diff & diff.wrapping_neg() != 0
    }
}

pub struct SubsetIter {
    mask: u32,
    sub: u32,
    done: bool,
}

impl Iterator for SubsetIter {
    type Item = ItemSet;

    fn next(&mut self) -> Option<ItemSet> {
        if self.done {
            return None;
        }
        let cur = self.sub;
        if self.sub == 0 {
            self.done = true;
        } else {
            self.sub = (self.sub - 1) & self.mask;
        }
        Some(ItemSet(cur))
    }
}

/// All subsets of `{0..m}` of cardinality between `lo` and `hi`, ascending
/// by cardinality and numeric mask within a cardinality.
pub fn subsets_of_size(ground: ItemSet, lo: usize, hi: usize) -> Vec<ItemSet> {
    let items = ground.indices();
    let mut out = Vec::new();
    for size in lo..=hi.min(items.len()) {
        let mut sized = Vec::new();
        combinations(&items, size, &mut sized);
        sized.sort_by_key(|s| s.0);
        out.extend(sized);
    }
    out
}

fn combinations(items: &[usize], size: usize, out: &mut Vec<ItemSet>) {
    fn rec(items: &[usize], size: usize, start: usize, cur: ItemSet, out: &mut Vec<ItemSet>) {
        if cur.card() == size {
            out.push(cur);
            return;
        }
        let need = size - cur.card();
        for i in start..=items.len().saturating_sub(need) {
            rec(items, size, i + 1, cur.insert(items[i]), out);
        }
    }
    if size == 0 {
        out.push(ItemSet::EMPTY);
    } else {
        rec(items, size, 0, ItemSet::EMPTY, out);
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, j) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for ItemSet {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.indices().serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ItemSet {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let idx = Vec::<usize>::deserialize(de)?;
        for &j in &idx {
            if j >= MAX_ITEMS {
                return Err(serde::de::Error::custom(format!(
                    "item index {j} out of range (max {})",
                    MAX_ITEMS - 1
                )));
            }
        }
        Ok(ItemSet::from_indices(&idx))
    }
}
