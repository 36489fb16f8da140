use crate::{Error, Result};

/// Default memory guard for [`FactorTable`], in table entries.
pub const DEFAULT_MEMORY_CEILING: u64 = 200_000_000;

/// Smallest-prime-factor table for `0..=limit`.
///
/// `spf[n]` is the least prime dividing `n` for `n >= 2`; entries 0 and 1 are
/// zero. The table is immutable after construction and can be shared freely
/// between threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorTable {
    limit: u64,
    spf: Vec<u32>,
}

impl FactorTable {
    pub fn build(limit: u64) -> Result<Self> {
        Self::build_with_ceiling(limit, DEFAULT_MEMORY_CEILING)
    }

    pub fn build_with_ceiling(limit: u64, ceiling: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::domain("limit", "factor table limit must be >= 2"));
        }
        if limit > ceiling || limit >= u32::MAX as u64 {
            return Err(Error::Capacity {
                what: "factor table limit",
                requested: limit,
                limit: ceiling.min(u32::MAX as u64 - 1),
            });
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut i = 2usize;
        while i <= n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                if let Some(sq) = i.checked_mul(i) {
                    let mut j = sq;
                    while j <= n {
                        if spf[j] == 0 {
                            spf[j] = i as u32;
                        }
                        j += i;
                    }
                }
            }
            i += 1;
        }
        Ok(FactorTable { limit, spf })
    }

    pub(crate) fn from_raw(limit: u64, spf: Vec<u32>) -> Self {
        FactorTable { limit, spf }
    }

    pub(crate) fn raw(&self) -> &[u32] {
        &self.spf
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn check(&self, n: u64) -> Result<()> {
        if n == 0 || n > self.limit {
            return Err(Error::range("n", n, format!("[1, {}]", self.limit)));
        }
        Ok(())
    }

    /// Smallest prime factor, `P⁻(n)`; `None` for `n = 1`.
    pub fn spf(&self, n: u64) -> Result<Option<u64>> {
        self.check(n)?;
        Ok(match self.spf[n as usize] {
            0 => None,
            p => Some(p as u64),
        })
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        self.check(n)?;
        Ok(n >= 2 && self.spf[n as usize] as u64 == n)
    }

    /// Prime factorization as `(p, e)` pairs with increasing `p`.
    pub fn factorize(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        self.check(n)?;
        let mut out: Vec<(u64, u32)> = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        Ok(out)
    }

    /// `τ(n)`.
    pub fn tau(&self, n: u64) -> Result<u64> {
        Ok(self.factorize(n)?.iter().map(|&(_, e)| e as u64 + 1).product())
    }

    /// `ω(n)`, the number of distinct prime factors.
    pub fn omega(&self, n: u64) -> Result<u32> {
        Ok(self.factorize(n)?.len() as u32)
    }

    /// `Ω(n)`, prime factors counted with multiplicity.
    pub fn big_omega(&self, n: u64) -> Result<u32> {
        Ok(self.factorize(n)?.iter().map(|&(_, e)| e).sum())
    }

    /// `P⁺(n)`, with `P⁺(1) = 0`.
    pub fn largest_prime_factor(&self, n: u64) -> Result<u64> {
        Ok(self.factorize(n)?.last().map_or(0, |&(p, _)| p))
    }

    /// `μ²(n) = 1`.
    pub fn is_squarefree(&self, n: u64) -> Result<bool> {
        Ok(self.factorize(n)?.iter().all(|&(_, e)| e == 1))
    }

    pub fn divisors(&self, n: u64) -> Result<DivisorList> {
        let fac = self.factorize(n)?;
        Ok(DivisorList::from_factorization(n, &fac))
    }
}

/// All divisors of `n` in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorList {
    pub n: u64,
    pub divisors: Vec<u64>,
}

impl DivisorList {
    pub fn from_factorization(n: u64, fac: &[(u64, u32)]) -> Self {
        let mut divisors = vec![1u64];
        for &(p, e) in fac {
            let len = divisors.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divisors.push(divisors[i] * pk);
                }
            }
        }
        divisors.sort_unstable();
        DivisorList { n, divisors }
    }

    pub fn len(&self) -> usize {
        self.divisors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.divisors.is_empty()
    }

    /// `d_j(n)`, the `j`-th smallest divisor (1-based).
    pub fn nth(&self, j: usize) -> Option<u64> {
        j.checked_sub(1).and_then(|i| self.divisors.get(i).copied())
    }

    /// `τ(n; y, z)` from the stored list.
    pub fn count_in(&self, y: f64, z: f64) -> u64 {
        if !(y < z) {
            return 0;
        }
        let lo = if y < 0.0 { 1 } else { y.floor() as u64 + 1 };
        let hi = if z < 1.0 { 0 } else { z.floor() as u64 };
        if lo > hi {
            return 0;
        }
        let a = self.divisors.partition_point(|&d| d < lo);
        let b = self.divisors.partition_point(|&d| d <= hi);
        (b - a) as u64
    }

    pub fn iter(&self) -> std::slice::Iter<'_, u64> {
        self.divisors.iter()
    }
}
