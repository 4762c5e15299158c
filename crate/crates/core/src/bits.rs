//! Fixed-capacity id sets used for devices and files.

use std::fmt;

const WORDS: usize = 4;

/// Largest number of devices or files a network may hold.
pub const MAX_IDS: usize = WORDS * 64;

/// A copyable set of small integer ids (`< MAX_IDS`), stored inline as a bitmap.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct IdSet {
    words: [u64; WORDS],
}

impl IdSet {
    pub const fn new() -> Self {
        IdSet { words: [0; WORDS] }
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_IDS, "id {n} exceeds capacity");
        let mut s = IdSet::new();
        for (w, word) in s.words.iter_mut().enumerate() {
            let lo = w * 64;
            if n >= lo + 64 {
                *word = u64::MAX;
            } else if n > lo {
                *word = (1u64 << (n - lo)) - 1;
            }
        }
        s
    }

    pub fn single(id: usize) -> Self {
        let mut s = IdSet::new();
        s.insert(id);
        s
    }

    #[inline]
    pub fn insert(&mut self, id: usize) -> bool {
        assert!(id < MAX_IDS, "id {id} exceeds capacity");
        let (w, b) = (id / 64, id % 64);
        let was = self.words[w] >> b & 1 == 1;
        self.words[w] |= 1 << b;
        !was
    }

    #[inline]
    pub fn remove(&mut self, id: usize) -> bool {
        if id >= MAX_IDS {
            return false;
        }
        let (w, b) = (id / 64, id % 64);
        let was = self.words[w] >> b & 1 == 1;
        self.words[w] &= !(1 << b);
        was
    }

    #[inline]
    pub fn contains(&self, id: usize) -> bool {
        id < MAX_IDS && self.words[id / 64] >> (id % 64) & 1 == 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn union(&self, other: &IdSet) -> IdSet {
        let mut s = *self;
        for (a, b) in s.words.iter_mut().zip(other.words) {
            *a |= b;
        }
        s
    }

    #[inline]
    pub fn intersection(&self, other: &IdSet) -> IdSet {
        let mut s = *self;
        for (a, b) in s.words.iter_mut().zip(other.words) {
            *a &= b;
        }
        s
    }

    #[inline]
    pub fn difference(&self, other: &IdSet) -> IdSet {
        let mut s = *self;
        for (a, b) in s.words.iter_mut().zip(other.words) {
            *a &= !b;
        }
        s
    }

    #[inline]
    pub fn intersects(&self, other: &IdSet) -> bool {
        self.words.iter().zip(other.words).any(|(a, b)| a & b != 0)
    }

    #[inline]
    pub fn is_subset(&self, other: &IdSet) -> bool {
        self.words.iter().zip(other.words).all(|(a, b)| a & !b == 0)
    }

    /// Smallest element, if any.
    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn iter(&self) -> Iter {
        Iter { words: self.words, word: 0 }
    }
}

impl FromIterator<usize> for IdSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = IdSet::new();
        for id in iter {
            s.insert(id);
        }
        s
    }
}

impl IntoIterator for &IdSet {
    type Item = usize;
    type IntoIter = Iter;
    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl fmt::Debug for IdSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Ascending iterator over an [`IdSet`].
pub struct Iter {
    words: [u64; WORDS],
    word: usize,
}

impl Iterator for Iter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while self.word < WORDS {
            let w = self.words[self.word];
            if w != 0 {
                let bit = w.trailing_zeros() as usize;
                self.words[self.word] &= w - 1;
                return Some(self.word * 64 + bit);
            }
            self.word += 1;
        }
        None
    }
}
