//! Finite integer index windows.

use serde::{Deserialize, Serialize};

/// Closed integer interval `[lo, hi]`; empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Self {
        Window { lo, hi }
    }

    /// `[-n, n]`.
    pub fn symmetric(n: i64) -> Self {
        Window { lo: -n, hi: n }
    }

    pub fn empty() -> Self {
        Window { lo: 0, hi: -1 }
    }

    pub fn single(i: i64) -> Self {
        Window { lo: i, hi: i }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo + 1) as usize
        }
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    pub fn intersect(&self, other: &Window) -> Window {
        Window::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Every difference `j - k` with `j, k` in the window.
    pub fn differences(&self) -> Window {
        if self.is_empty() {
            return Window::empty();
        }
        Window::new(self.lo - self.hi, self.hi - self.lo)
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}
