//! Quantities built from the divisor-window counts: distinct products in the
//! multiplication table, distinct Farey gaps, and the sums of `τ⁺`, `ρ_1`
//! and the consecutive-divisibility count `g`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{divisors_trial, isqrt, DivisorList, FactorTable};
use crate::counts::{count_h, count_h_star};
use crate::{Error, Result};

/// Largest `x` for [`mult_table_count`].
pub const MULT_TABLE_MAX: u64 = 100_000_000;

/// Largest `Q` for the Farey gap counts.
pub const FAREY_Q_MAX: u64 = 10_000;

/// Fixed-size bitset over `0..len`.
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: u64) -> Self {
        Bits(vec![0; (len as usize).div_ceil(64)])
    }

    fn set(&mut self, i: u64) {
        self.0[(i / 64) as usize] |= 1 << (i % 64);
    }

    fn count(&self) -> u64 {
        self.0.iter().map(|w| w.count_ones() as u64).sum()
    }
}

/// `A(x)`: distinct values `m_1 m_2 <= x` with `m_1, m_2 <= √x`.
pub fn mult_table_count(x: u64) -> Result<u64> {
    if x == 0 {
        return Err(Error::domain("x", "need x >= 1"));
    }
    if x > MULT_TABLE_MAX {
        return Err(Error::Capacity {
            what: "x",
            requested: x,
            limit: MULT_TABLE_MAX,
        });
    }
    let s = isqrt(x);
    let mut bits = Bits::new(s * s + 1);
    for m1 in 1..=s {
        for m2 in m1..=s {
            bits.set(m1 * m2);
        }
    }
    Ok(bits.count())
}

/// `H(⌊x/4⌋, √x/4, √x/2) <= A(x) <= Σ_{k>=0} H(⌊x/2^k⌋, √x/2^{k+1}, √x/2^k)`.
pub fn mult_table_sandwich(x: u64) -> Result<(u64, u64)> {
    let r = (x as f64).sqrt();
    let lower = if x >= 4 { count_h(x / 4, r / 4.0, r / 2.0)? } else { 0 };
    let mut upper = 0;
    let mut k = 0;
    while x >> k >= 1 {
        let scale = (1u64 << k) as f64;
        upper += count_h(x >> k, r / (2.0 * scale), r / scale)?;
        k += 1;
    }
    Ok((lower, upper))
}

fn check_q(q: u64) -> Result<()> {
    if q < 2 {
        return Err(Error::domain("Q", "need Q >= 2"));
    }
    if q > FAREY_Q_MAX {
        return Err(Error::Capacity {
            what: "Q",
            requested: q,
            limit: FAREY_Q_MAX,
        });
    }
    Ok(())
}

/// `N(Q)`: distinct gaps between neighbours of the Farey sequence of order
/// `Q`, counted as distinct products `q q'` with `q, q' <= Q`, `(q, q') = 1`,
/// `q + q' > Q`.
pub fn farey_gap_count(q: u64) -> Result<u64> {
    check_q(q)?;
    let mut bits = Bits::new(q * q + 1);
    for a in 1..=q {
        for b in a.max(q + 1 - a)..=q {
            if num_integer::gcd(a, b) == 1 {
                bits.set(a * b);
            }
        }
    }
    Ok(bits.count())
}

/// `N(Q)` by walking the Farey sequence with the next-term recurrence and
/// collecting the gap denominators `b d` of neighbours `a/b < c/d`.
pub fn farey_gap_count_adjacent(q: u64) -> Result<u64> {
    check_q(q)?;
    let mut bits = Bits::new(q * q + 1);
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, q);
    loop {
        bits.set(b * d);
        if c == 1 && d == 1 {
            break;
        }
        let k = (q + b) / d;
        let (na, nb) = (c, d);
        c = k * c - a;
        d = k * d - b;
        a = na;
        b = nb;
    }
    Ok(bits.count())
}

/// `H*(⌊9Q²/25⌋, Q/2, 3Q/5) - H*(⌊3Q²/10⌋, Q/2, 3Q/5) <= N(Q) <= H(Q², Q/2, Q)`.
pub fn farey_sandwich(q: u64) -> Result<(u64, u64)> {
    let qf = q as f64;
    let (y, z) = (qf / 2.0, 3.0 * qf / 5.0);
    let hi = count_h_star(9 * q * q / 25, y, z)?;
    let lo = count_h_star(3 * q * q / 10, y, z)?;
    let upper = count_h(q * q, qf / 2.0, qf)?;
    Ok((hi.saturating_sub(lo), upper))
}

/// Dyadic class `k` with `d ∈ (2^k, 2^{k+1}]`; `d = 1` is class `-1`.
pub fn dyadic_class(d: u64) -> i32 {
    let ceil_log2 = 64 - (d - 1).leading_zeros() as i32;
    ceil_log2 - 1
}

/// `τ⁺(n)`: dyadic classes containing a divisor of `n`.
pub fn tau_plus_of(divs: &DivisorList) -> u64 {
    let mut count = 0;
    let mut last = i32::MIN;
    for &d in divs.iter() {
        let c = dyadic_class(d);
        if c != last {
            count += 1;
            last = c;
        }
    }
    count
}

/// `ρ_1(n)`: the largest divisor `d` with `d² <= n`.
pub fn rho1_of(divs: &DivisorList) -> u64 {
    divs.iter()
        .copied()
        .take_while(|&d| d as u128 * d as u128 <= divs.n as u128)
        .last()
        .unwrap_or(1)
}

/// `g(n)`: consecutive divisors `d_i < d_{i+1}` with `d_i | d_{i+1}`.
pub fn g_of(divs: &DivisorList) -> u64 {
    divs.divisors.windows(2).filter(|w| w[1] % w[0] == 0).count() as u64
}

pub fn tau_plus(n: u64) -> Result<u64> {
    Ok(tau_plus_of(&divisors_trial(n)?))
}

pub fn rho1(n: u64) -> Result<u64> {
    Ok(rho1_of(&divisors_trial(n)?))
}

pub fn g(n: u64) -> Result<u64> {
    Ok(g_of(&divisors_trial(n)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DivisorSums {
    pub x: u64,
    pub tau_plus: u64,
    pub rho1: u64,
    pub g: u64,
}

const CHUNK: u64 = 1 << 14;

/// `Σ_{n<=x} τ⁺(n)`, `Σ ρ_1(n)` and `Σ g(n)` in one pass over a factor table.
pub fn divisor_sums(x: u64) -> Result<DivisorSums> {
    if x == 0 {
        return Ok(DivisorSums::default());
    }
    let table = FactorTable::build(x.max(2))?;
    let chunks: Vec<Result<DivisorSums>> = (0..x.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut s = DivisorSums::default();
            for n in c * CHUNK + 1..=((c + 1) * CHUNK).min(x) {
                let divs = table.divisors(n)?;
                s.tau_plus += tau_plus_of(&divs);
                s.rho1 += rho1_of(&divs);
                s.g += g_of(&divs);
            }
            Ok(s)
        })
        .collect();
    let mut total = DivisorSums {
        x,
        ..DivisorSums::default()
    };
    for c in chunks {
        let c = c?;
        total.tau_plus += c.tau_plus;
        total.rho1 += c.rho1;
        total.g += c.g;
    }
    Ok(total)
}

pub fn tau_plus_sum(x: u64) -> Result<u64> {
    Ok(divisor_sums(x)?.tau_plus)
}

pub fn rho1_sum(x: u64) -> Result<u64> {
    Ok(divisor_sums(x)?.rho1)
}

pub fn erdos_montgomery_sum(x: u64) -> Result<u64> {
    Ok(divisor_sums(x)?.g)
}
