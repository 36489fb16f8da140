//! Sieves, factorization, divisor enumeration, and the elementary counting
//! functions `Φ(x,z)` and `Ψ(x,y)`.

mod cache;
mod factor;
mod sifted;

pub use cache::{read_cache, write_cache, CACHE_MAGIC, CACHE_VERSION};
pub use factor::{DivisorList, FactorTable, DEFAULT_MEMORY_CEILING};
pub use sifted::{phi_sifted, psi_smooth};

use crate::{Error, Result};

/// Integers `d` with `y < d <= z`, as the inclusive range `lo..=hi`
/// (empty when `lo > hi`).
pub fn integer_window(y: f64, z: f64) -> Result<(u64, u64)> {
    if !(y.is_finite() && z.is_finite()) || y < 0.0 {
        return Err(Error::domain("y", format!("need finite 0 <= y, got y={y}, z={z}")));
    }
    let lo = y.floor() as u64 + 1;
    let hi = if z < 1.0 { 0 } else { z.floor() as u64 };
    Ok((lo, hi))
}

/// `τ(n; y, z)`: the number of divisors `d | n` with `y < d <= z`.
pub fn tau_interval(n: u64, y: f64, z: f64) -> Result<u64> {
    if n == 0 {
        return Err(Error::domain("n", "n must be positive"));
    }
    if !(y < z) {
        return Ok(0);
    }
    let (lo, hi) = integer_window(y.max(0.0), z)?;
    let mut count = 0;
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            if (lo..=hi).contains(&d) {
                count += 1;
            }
            let e = n / d;
            if e != d && (lo..=hi).contains(&e) {
                count += 1;
            }
        }
        d += 1;
    }
    Ok(count)
}

/// Prime factorization of `n >= 1` by trial division, primes increasing.
pub fn factorize_trial(n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// Divisors of `n >= 1` via [`factorize_trial`].
pub fn divisors_trial(n: u64) -> Result<DivisorList> {
    if n == 0 {
        return Err(Error::domain("n", "n must be positive"));
    }
    Ok(DivisorList::from_factorization(n, &factorize_trial(n)))
}

/// All primes `<= n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// `⌊√n⌋` computed exactly.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

/// Primality flags for the integers in `[lo, hi)`, given all primes up to
/// at least `√(hi-1)`.
pub fn segment_primality(lo: u64, hi: u64, base_primes: &[u64]) -> Vec<bool> {
    let len = hi.saturating_sub(lo) as usize;
    let mut flags = vec![true; len];
    for (i, f) in flags.iter_mut().enumerate() {
        if lo + (i as u64) < 2 {
            *f = false;
        }
    }
    for &p in base_primes {
        if p * p >= hi {
            break;
        }
        let start = (p * p).max(lo.div_ceil(p) * p);
        let mut m = start;
        while m < hi {
            flags[(m - lo) as usize] = false;
            m += p;
        }
    }
    flags
}
