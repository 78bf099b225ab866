//! Subsets of a ground set of at most 64 items, stored as a characteristic integer.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest ground set an [`ItemSet`] can address.
pub const MAX_ITEMS: usize = 64;

/// A set of item indices `0..64`. The characteristic integer is the canonical
/// form, so equality is structural and the subset code used in files is simply
/// `bits()` in decimal.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ItemSet(u64);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        ItemSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// The ground set `{0, .., m-1}`.
    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_ITEMS, "ground set of {m} items exceeds {MAX_ITEMS}");
        if m == MAX_ITEMS {
            ItemSet(u64::MAX)
        } else {
            ItemSet((1u64 << m) - 1)
        }
    }

    pub fn singleton(item: usize) -> Self {
        assert!(item < MAX_ITEMS, "item index {item} out of range");
        ItemSet(1u64 << item)
    }

    pub fn contains(self, item: usize) -> bool {
        item < MAX_ITEMS && self.0 & (1u64 << item) != 0
    }

    pub fn insert(&mut self, item: usize) {
        *self = self.with(item);
    }

    pub fn remove(&mut self, item: usize) {
        *self = self.without(item);
    }

    #[must_use]
    pub fn with(self, item: usize) -> Self {
        self.union(ItemSet::singleton(item))
    }

    #[must_use]
    pub fn without(self, item: usize) -> Self {
        self.difference(ItemSet::singleton(item))
    }

    pub const fn union(self, other: ItemSet) -> Self {
        ItemSet(self.0 | other.0)
    }

    pub const fn intersection(self, other: ItemSet) -> Self {
        ItemSet(self.0 & other.0)
    }

    pub const fn difference(self, other: ItemSet) -> Self {
        ItemSet(self.0 & !other.0)
    }

    pub const fn is_subset(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Lowest member, if any.
    pub fn first(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    /// Members in increasing order.
    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    /// All subsets of `self`, starting from the empty set, in increasing code order.
    pub fn subsets(self) -> Subsets {
        Subsets {
            mask: self.0,
            next: Some(0),
        }
    }
}

pub struct Iter(u64);

impl Iterator for Iter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

pub struct Subsets {
    mask: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = ItemSet;

    fn next(&mut self) -> Option<ItemSet> {
        let cur = self.next?;
        // Standard submask increment: (cur - mask) & mask walks submasks upward.
        let succ = cur.wrapping_sub(self.mask) & self.mask;
        self.next = if succ == 0 { None } else { Some(succ) };
        Some(ItemSet(cur))
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(ItemSet::EMPTY, |s, i| s.with(i))
    }
}

impl IntoIterator for ItemSet {
    type Item = usize;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Serialized as the sorted list of item indices.
impl Serialize for ItemSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ItemSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let items = Vec::<usize>::deserialize(deserializer)?;
        let mut set = ItemSet::EMPTY;
        for i in items {
            if i >= MAX_ITEMS {
                return Err(D::Error::custom(format!("item index {i} out of range")));
            }
            set.insert(i);
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let s: ItemSet = [0, 2, 5].into_iter().collect();
        assert_eq!(s.len(), 3);
        assert!(s.contains(2) && !s.contains(1));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 2, 5]);
        assert_eq!(s.without(2).with(1).bits(), 0b100011);
        assert!(ItemSet::singleton(5).is_subset(s));
        assert_eq!(s.to_string(), "{0,2,5}");
        assert_eq!(ItemSet::full(64).len(), 64);
    }

    #[test]
    fn subsets_enumerate_all() {
        let s: ItemSet = [1, 3, 4].into_iter().collect();
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert_eq!(subs[0], ItemSet::EMPTY);
        assert_eq!(*subs.last().unwrap(), s);
        assert!(subs.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(ItemSet::EMPTY.subsets().count(), 1);
    }
}
