//! Segmented sieve of Eratosthenes.

use crate::modular::isqrt;

const SEGMENT: u64 = 1 << 18;

/// All primes `p < bound`.
pub fn small_primes(bound: u64) -> Vec<u64> {
    if bound < 3 {
        return Vec::new();
    }
    let mut composite = vec![false; bound as usize];
    let mut out = Vec::new();
    for i in 2..bound as usize {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j < bound as usize {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Primes in `[lo, hi)`, produced one segment at a time.
pub struct SegmentedSieve {
    base: Vec<u64>,
    next: u64,
    hi: u64,
}

impl SegmentedSieve {
    pub fn new(lo: u64, hi: u64) -> Self {
        let root = isqrt(hi.saturating_sub(1)) + 1;
        SegmentedSieve {
            base: small_primes(root + 1),
            next: lo.max(2),
            hi,
        }
    }

    /// Primes of the next segment, or `None` when exhausted.
    pub fn next_segment(&mut self) -> Option<Vec<u64>> {
        if self.next >= self.hi {
            return None;
        }
        let lo = self.next;
        let hi = lo.saturating_add(SEGMENT).min(self.hi);
        self.next = hi;
        let mut composite = vec![false; (hi - lo) as usize];
        for &p in &self.base {
            if p * p >= hi {
                break;
            }
            let start = (p * p).max(lo.div_ceil(p) * p);
            let mut j = start;
            while j < hi {
                composite[(j - lo) as usize] = true;
                j += p;
            }
        }
        Some(
            composite
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| lo + i as u64)
                .collect(),
        )
    }
}

/// All primes in `[lo, hi)`.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    let mut s = SegmentedSieve::new(lo, hi);
    let mut out = Vec::new();
    while let Some(seg) = s.next_segment() {
        out.extend(seg);
    }
    out
}
