//! Subsets of caches as bitmasks.
//!
//! Cache `k` (1-based) maps to bit `k - 1`. Iteration is always in
//! ascending bitmask order so plans and schedules can be indexed by the raw
//! mask value.

use std::fmt;

/// A set of caches, stored as a bitmask over `1..=K`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CacheSubset(u32);

impl CacheSubset {
    pub const EMPTY: CacheSubset = CacheSubset(0);

    pub const fn from_mask(mask: u32) -> Self {
        CacheSubset(mask)
    }

    /// Builds a subset from 1-based cache indices.
    pub fn from_members<I: IntoIterator<Item = usize>>(members: I) -> Self {
        let mut mask = 0u32;
        for k in members {
            debug_assert!((1..=32).contains(&k), "cache index {k} out of range");
            mask |= 1 << (k - 1);
        }
        CacheSubset(mask)
    }

    /// The full set `{1, ..., caches}`.
    pub fn full(caches: usize) -> Self {
        if caches >= 32 {
            CacheSubset(u32::MAX)
        } else {
            CacheSubset((1u32 << caches) - 1)
        }
    }

    pub const fn mask(self) -> u32 {
        self.0
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn contains(self, cache: usize) -> bool {
        cache >= 1 && cache <= 32 && self.0 & (1 << (cache - 1)) != 0
    }

    pub const fn with(self, cache: usize) -> Self {
        CacheSubset(self.0 | (1 << (cache - 1)))
    }

    pub const fn without(self, cache: usize) -> Self {
        CacheSubset(self.0 & !(1 << (cache - 1)))
    }

    /// Members in increasing order, 1-based.
    pub fn members(self) -> Members {
        Members(self.0)
    }
}

impl fmt::Debug for CacheSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}

impl fmt::Display for CacheSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, k) in self.members().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, "}}")
    }
}

pub struct Members(u32);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let bit = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(bit as usize + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

/// All subsets of `{1..=caches}` with exactly `size` members, in ascending
/// mask order (Gosper's hack).
pub fn subsets_of_size(caches: usize, size: usize) -> SubsetsOfSize {
    assert!(caches < 32, "at most 31 caches can be enumerated");
    let limit = 1u64 << caches;
    let next = if size > caches {
        None
    } else {
        Some((1u64 << size) - 1)
    };
    SubsetsOfSize { next, limit }
}

pub struct SubsetsOfSize {
    next: Option<u64>,
    limit: u64,
}

impl Iterator for SubsetsOfSize {
    type Item = CacheSubset;

    fn next(&mut self) -> Option<CacheSubset> {
        let cur = self.next?;
        if cur >= self.limit {
            self.next = None;
            return None;
        }
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some((((r ^ cur) >> 2) / c) | r)
        };
        Some(CacheSubset(cur as u32))
    }
}

/// Every subset of `{1..=caches}`, ascending by mask.
pub fn all_subsets(caches: usize) -> impl Iterator<Item = CacheSubset> {
    assert!(caches < 32, "at most 31 caches can be enumerated");
    (0..(1u32 << caches)).map(CacheSubset)
}
