//! Lexicographic enumeration of fixed-size index subsets, with a hard cap
//! that turns oversized enumerations into errors instead of long loops.

use crate::{Error, Result};

/// Largest number of subsets any checker will enumerate.
pub const SUBSET_CAP: u64 = 1_000_000;

/// Binomial coefficient, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u64) {
            Some(v) => v / (i as u64 + 1),
            None => return u64::MAX,
        };
    }
    acc
}

/// Errors out when `C(n, k)` exceeds [`SUBSET_CAP`].
pub fn check_cap(n: usize, k: usize) -> Result<()> {
    if binomial(n, k) > SUBSET_CAP {
        return Err(Error::TooManySupports {
            n,
            s: k,
            cap: SUBSET_CAP,
        });
    }
    Ok(())
}

/// Errors out when the total count of subsets of size at most `k` exceeds
/// [`SUBSET_CAP`].
pub fn check_cap_upto(n: usize, k: usize) -> Result<()> {
    let total: u64 = (0..=k).fold(0u64, |acc, j| acc.saturating_add(binomial(n, j)));
    if total > SUBSET_CAP {
        return Err(Error::TooManySupports {
            n,
            s: k,
            cap: SUBSET_CAP,
        });
    }
    Ok(())
}

/// Iterator over all strictly increasing `k`-subsets of `0..n` in
/// lexicographic order. Empty when `k > n`; yields one empty subset when
/// `k == 0`.
pub struct Combinations {
    n: usize,
    k: usize,
    cur: Vec<usize>,
    started: bool,
    done: bool,
}

pub fn combinations(n: usize, k: usize) -> Combinations {
    Combinations {
        n,
        k,
        cur: (0..k).collect(),
        started: false,
        done: k > n,
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.cur.clone());
        }
        // Advance the rightmost index that still has room.
        let k = self.k;
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                return None;
            }
            i -= 1;
            if self.cur[i] + 1 <= self.n - (k - i) {
                self.cur[i] += 1;
                for j in (i + 1)..k {
                    self.cur[j] = self.cur[j - 1] + 1;
                }
                return Some(self.cur.clone());
            }
        }
    }
}
