//! Words over `{0..q}` indexed lexicographically, first letter most significant,
//! and the enumeration budget shared by every brute-force routine.

use crate::configuration::Letter;
use crate::error::{NucaError, Result};

/// Default number of patterns a single operation may enumerate.
pub const DEFAULT_BUDGET: u64 = 1 << 20;

/// Upper bound on enumerated patterns (or table entries) per operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

impl Budget {
    /// Reads `NUCA_BUDGET`, falling back to the default.
    pub fn from_env() -> Self {
        std::env::var("NUCA_BUDGET")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(Budget)
            .unwrap_or_default()
    }

    /// `q^len` if it fits in the budget.
    pub fn words(&self, q: usize, len: usize) -> Result<u64> {
        match word_count(q, len) {
            Some(n) if n <= self.0 => Ok(n),
            _ => Err(NucaError::BudgetExceeded { needed: format!("{q}^{len}"), budget: self.0 }),
        }
    }

    pub fn allows(&self, q: usize, len: usize) -> bool {
        self.words(q, len).is_ok()
    }
}

pub fn word_count(q: usize, len: usize) -> Option<u64> {
    (q as u64).checked_pow(u32::try_from(len).ok()?)
}

pub fn word_index(word: &[Letter], q: usize) -> u64 {
    word.iter().fold(0u64, |acc, &a| acc * q as u64 + a as u64)
}

pub fn index_to_word(mut index: u64, q: usize, out: &mut [Letter]) {
    for slot in out.iter_mut().rev() {
        *slot = (index % q as u64) as Letter;
        index /= q as u64;
    }
}

/// Steps `word` to its lexicographic successor; returns false after the last word.
pub fn next_word(word: &mut [Letter], q: usize) -> bool {
    for slot in word.iter_mut().rev() {
        if (*slot as usize) + 1 < q {
            *slot += 1;
            return true;
        }
        *slot = 0;
    }
    false
}

/// Calls `f` on every word of length `len`, in index order.
pub fn for_each_word(q: usize, len: usize, mut f: impl FnMut(&[Letter])) {
    let mut w = vec![0 as Letter; len];
    loop {
        f(&w);
        if !next_word(&mut w, q) {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for q in 1..=3usize {
            for len in 0..=3usize {
                let mut seen = 0u64;
                for_each_word(q, len, |w| {
                    assert_eq!(word_index(w, q), seen);
                    let mut back = vec![0; len];
                    index_to_word(seen, q, &mut back);
                    assert_eq!(back, w);
                    seen += 1;
                });
                assert_eq!(seen, word_count(q, len).unwrap());
            }
        }
    }

    #[test]
    fn budget_limits() {
        let b = Budget(16);
        assert_eq!(b.words(2, 4).unwrap(), 16);
        assert!(b.words(2, 5).is_err());
        assert!(Budget::default().words(2, 64).is_err());
    }
}
