//! Segmented divisor-marking machinery.
//!
//! A query is a range of integers `(a, b]`, a divisor window `dlo..=dhi`
//! and an optional membership filter. Each segment `[lo, hi)` is processed
//! independently: small divisors (`d <= len`) step through their multiples,
//! large divisors are reached through their cofactor `m = n/d`, so the work
//! per segment is the number of marks plus `O(len + hi/len)`.

use rayon::prelude::*;

use crate::arith::{isqrt, primes_up_to, segment_primality};
use crate::{Error, Result};

/// Which integers of a range participate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Filter {
    pub squarefree: bool,
    /// Keep `n` only when `n - shift` is prime.
    pub shift: Option<i64>,
}

impl Filter {
    pub fn is_trivial(&self) -> bool {
        !self.squarefree && self.shift.is_none()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Query {
    /// Exclusive lower end of the `n` range.
    pub a: u64,
    /// Inclusive upper end of the `n` range.
    pub b: u64,
    pub dlo: u64,
    pub dhi: u64,
    pub filter: Filter,
    pub segment_len: u64,
    pub parallel: bool,
}

struct BasePrimes {
    squarefree: Vec<u64>,
    shifted: Vec<u64>,
}

impl Query {
    fn segments(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut lo = self.a + 1;
        let end = self.b + 1;
        while lo < end {
            let hi = (lo + self.segment_len).min(end);
            out.push((lo, hi));
            lo = hi;
        }
        out
    }

    fn base_primes(&self) -> BasePrimes {
        let squarefree = if self.filter.squarefree {
            primes_up_to(isqrt(self.b))
        } else {
            Vec::new()
        };
        let shifted = match self.filter.shift {
            Some(l) => {
                let top = (self.b as i128 - l as i128).max(0) as u64;
                primes_up_to(isqrt(top) + 1)
            }
            None => Vec::new(),
        };
        BasePrimes { squarefree, shifted }
    }

    /// Effective divisor window, clipped to divisors that can occur.
    fn dwindow(&self) -> (u64, u64) {
        (self.dlo.max(1), self.dhi.min(self.b))
    }

    /// Estimated marking work: multiples visited plus per-segment overhead.
    pub fn marking_cost(&self) -> f64 {
        let (dlo, dhi) = self.dwindow();
        if dlo > dhi {
            return 0.0;
        }
        let span = (self.b - self.a) as f64;
        let marks = span * ((dhi as f64 + 0.5) / (dlo as f64 - 0.5)).ln() + (dhi - dlo + 1) as f64;
        let segs = self.segments().len() as f64;
        marks + segs * (dhi - dlo + 1).min(self.segment_len) as f64 + segs * (self.b as f64 / self.segment_len as f64)
    }

    fn run<T: Send, F>(&self, per_segment: F) -> Vec<T>
    where
        F: Fn(u64, u64, &BasePrimes) -> T + Sync + Send,
    {
        let base = self.base_primes();
        let segs = self.segments();
        if self.parallel {
            segs.par_iter().map(|&(lo, hi)| per_segment(lo, hi, &base)).collect()
        } else {
            segs.iter().map(|&(lo, hi)| per_segment(lo, hi, &base)).collect()
        }
    }

    /// Number of filtered `n` in `(a, b]` with at least one divisor in the window.
    pub fn count_any(&self) -> u64 {
        let (dlo, dhi) = self.dwindow();
        self.run(|lo, hi, base| {
            let len = (hi - lo) as usize;
            let mut marks = vec![0u64; len.div_ceil(64)];
            for_each_multiple(lo, hi, dlo, dhi, |i| marks[i >> 6] |= 1u64 << (i & 63));
            match filter_mask(lo, hi, &self.filter, base) {
                Some(mask) => marks.iter().zip(&mask).map(|(m, f)| (m & f).count_ones() as u64).sum::<u64>(),
                None => marks.iter().map(|m| m.count_ones() as u64).sum::<u64>(),
            }
        })
        .into_iter()
        .sum()
    }

    /// Number of filtered `n` in `(a, b]`.
    pub fn count_filtered(&self) -> u64 {
        if self.filter.is_trivial() {
            return self.b - self.a;
        }
        self.run(|lo, hi, base| {
            filter_mask(lo, hi, &self.filter, base)
                .map(|m| m.iter().map(|w| w.count_ones() as u64).sum())
                .unwrap_or(hi - lo)
        })
        .into_iter()
        .sum()
    }

    /// `hist[r]` = number of filtered `n` in `(a, b]` with exactly `r`
    /// divisors in the window.
    pub fn histogram(&self) -> Result<Vec<u64>> {
        let (dlo, dhi) = self.dwindow();
        let parts = self.run(|lo, hi, base| {
            let mask = filter_mask(lo, hi, &self.filter, base);
            segment_histogram::<u8>(lo, hi, dlo, dhi, mask.as_deref())
                .or_else(|_| segment_histogram::<u16>(lo, hi, dlo, dhi, mask.as_deref()))
                .or_else(|_| segment_histogram::<u32>(lo, hi, dlo, dhi, mask.as_deref()))
        });
        let mut hist: Vec<u64> = Vec::new();
        for part in parts {
            let part = part?;
            if part.len() > hist.len() {
                hist.resize(part.len(), 0);
            }
            for (h, p) in hist.iter_mut().zip(part) {
                *h += p;
            }
        }
        if hist.is_empty() {
            hist.push(0);
        }
        Ok(hist)
    }
}

/// Calls `f(n - lo)` once for every pair `(d, n)` with `dlo <= d <= dhi`,
/// `lo <= n < hi` and `d | n`.
#[inline]
pub(crate) fn for_each_multiple<F: FnMut(usize)>(lo: u64, hi: u64, dlo: u64, dhi: u64, mut f: F) {
    if dlo > dhi || lo >= hi {
        return;
    }
    let len = hi - lo;
    let split = dhi.min(len);
    for d in dlo..=split {
        let mut n = lo.div_ceil(d) * d;
        while n < hi {
            f((n - lo) as usize);
            n += d;
        }
    }
    let big_lo = dlo.max(split + 1);
    if big_lo > dhi {
        return;
    }
    // d > len: at most one multiple per d; walk cofactors instead.
    let m_max = (hi - 1) / big_lo;
    for m in 1..=m_max {
        let d_from = lo.div_ceil(m).max(big_lo);
        let d_to = ((hi - 1) / m).min(dhi);
        if d_from > d_to {
            continue;
        }
        let mut n = d_from * m;
        let stop = d_to * m;
        while n <= stop {
            f((n - lo) as usize);
            n += m;
        }
    }
}

/// Bit mask of the filtered integers in `[lo, hi)`, or `None` when the
/// filter keeps everything.
fn filter_mask(lo: u64, hi: u64, filter: &Filter, base: &BasePrimes) -> Option<Vec<u64>> {
    if filter.is_trivial() {
        return None;
    }
    let len = (hi - lo) as usize;
    let words = len.div_ceil(64);
    let mut mask = vec![!0u64; words];
    if !len.is_multiple_of(64) {
        mask[words - 1] = (1u64 << (len % 64)) - 1;
    }
    if filter.squarefree {
        for &p in &base.squarefree {
            let sq = p * p;
            if sq >= hi {
                break;
            }
            let mut n = lo.div_ceil(sq) * sq;
            while n < hi {
                let i = (n - lo) as usize;
                mask[i >> 6] &= !(1u64 << (i & 63));
                n += sq;
            }
        }
    }
    if let Some(shift) = filter.shift {
        // q = n - shift ranges over [lo - shift, hi - shift).
        let qlo = lo as i128 - shift as i128;
        let qhi = hi as i128 - shift as i128;
        let start = qlo.max(0) as u64;
        let end = qhi.max(0) as u64;
        let flags = segment_primality(start, end, &base.shifted);
        for i in 0..len {
            let q = qlo + i as i128;
            let prime = q >= 2 && flags[(q - start as i128) as usize];
            if !prime {
                mask[i >> 6] &= !(1u64 << (i & 63));
            }
        }
    }
    Some(mask)
}

trait CellCounter: Copy + Default + Send {
    fn bump(&mut self) -> bool;
    fn value(self) -> usize;
}

macro_rules! cell_counter {
    ($t:ty) => {
        impl CellCounter for $t {
            #[inline]
            fn bump(&mut self) -> bool {
                match self.checked_add(1) {
                    Some(v) => {
                        *self = v;
                        true
                    }
                    None => false,
                }
            }

            fn value(self) -> usize {
                self as usize
            }
        }
    };
}

cell_counter!(u8);
cell_counter!(u16);
cell_counter!(u32);

fn segment_histogram<C: CellCounter>(
    lo: u64,
    hi: u64,
    dlo: u64,
    dhi: u64,
    mask: Option<&[u64]>,
) -> Result<Vec<u64>> {
    let len = (hi - lo) as usize;
    let mut cells = vec![C::default(); len];
    let mut saturated: Option<usize> = None;
    for_each_multiple(lo, hi, dlo, dhi, |i| {
        if !cells[i].bump() && saturated.is_none() {
            saturated = Some(i);
        }
    });
    if let Some(i) = saturated {
        return Err(Error::CounterSaturation { n: lo + i as u64 });
    }
    let mut hist = vec![0u64; 8];
    for (i, c) in cells.iter().enumerate() {
        if let Some(m) = mask {
            if m[i >> 6] >> (i & 63) & 1 == 0 {
                continue;
            }
        }
        let v = c.value();
        if v >= hist.len() {
            hist.resize(v + 1, 0);
        }
        hist[v] += 1;
    }
    while hist.len() > 1 && *hist.last().unwrap() == 0 {
        hist.pop();
    }
    Ok(hist)
}
