//! `Φ(x,z)` (z-rough numbers) and `Ψ(x,y)` (y-smooth numbers) by direct
//! segmented sieve scans. Cost is `O(x log log x)` time and `O(√x)` memory.

use super::{isqrt, primes_up_to};
use crate::{Error, Result};

const SEGMENT: u64 = 1 << 18;

/// `Φ(x, z) = |{n <= x : P⁻(n) > z}|`, counting `n = 1` (`P⁻(1) = ∞`).
pub fn phi_sifted(x: u64, z: f64) -> Result<u64> {
    if x == 0 {
        return Err(Error::domain("x", "x must be >= 1"));
    }
    if !(z >= 1.0) {
        return Err(Error::domain("z", format!("need z >= 1, got {z}")));
    }
    let zf = z.floor() as u64;
    let root = isqrt(x);
    let base = primes_up_to(zf.min(root));
    // Primes <= min(z, √x) and their multiples are struck out. Survivors
    // above 1 have P⁻(n) > min(z, √x); when z > √x they are primes.
    let threshold = if zf > root { zf } else { 0 };
    let mut count = 1u64; // n = 1
    let mut lo = 2u64;
    let mut marks = vec![false; SEGMENT as usize];
    while lo <= x {
        let hi = (lo + SEGMENT).min(x + 1);
        let len = (hi - lo) as usize;
        marks[..len].iter_mut().for_each(|m| *m = false);
        for &p in &base {
            let mut m = lo.div_ceil(p) * p;
            while m < hi {
                marks[(m - lo) as usize] = true;
                m += p;
            }
        }
        for (i, &m) in marks[..len].iter().enumerate() {
            if !m && lo + i as u64 > threshold {
                count += 1;
            }
        }
        lo = hi;
    }
    Ok(count)
}

/// `Ψ(x, y) = |{n <= x : P⁺(n) <= y}|`, counting `n = 1` (`P⁺(1) = 0`).
pub fn psi_smooth(x: u64, y: f64) -> Result<u64> {
    if x == 0 {
        return Err(Error::domain("x", "x must be >= 1"));
    }
    if !(y >= 2.0) {
        return Err(Error::domain("y", format!("need y >= 2, got {y}")));
    }
    let yf = y.floor() as u64;
    if yf >= x {
        return Ok(x);
    }
    let root = isqrt(x);
    let base = primes_up_to(yf.min(root));
    let mut count = 1u64;
    let mut lo = 2u64;
    let mut rem = vec![0u64; SEGMENT as usize];
    while lo <= x {
        let hi = (lo + SEGMENT).min(x + 1);
        let len = (hi - lo) as usize;
        for (i, r) in rem[..len].iter_mut().enumerate() {
            *r = lo + i as u64;
        }
        for &p in &base {
            let mut m = lo.div_ceil(p) * p;
            while m < hi {
                let r = &mut rem[(m - lo) as usize];
                while (*r).is_multiple_of(p) {
                    *r /= p;
                }
                m += p;
            }
        }
        // After removing primes <= min(y, √x) the cofactor is 1, or (when
        // y >= √x) possibly one prime above √x, or something not y-smooth.
        for &r in &rem[..len] {
            if r == 1 || (yf > root && r <= yf) {
                count += 1;
            }
        }
        lo = hi;
    }
    Ok(count)
}
