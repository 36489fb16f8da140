//! Greedy partition of the primes into blocks `D_j = (λ_{j-1}, λ_j]` with
//! reciprocal sums just below `log 2`, starting from `λ_0 = 1.9`.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::primes_up_to;
use crate::scalar::ln2_bracket;
use crate::{Error, Result};

pub const LAMBDA0: f64 = 1.9;

/// Default sieve limit; enough for `λ_4`.
pub const DEFAULT_PRIME_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub j: usize,
    /// `λ_j`, the largest prime of the block.
    pub lambda: u64,
    /// `μ_j = log2 log λ_j`.
    pub mu: f64,
    /// `Σ_{p ∈ D_j} 1/p`.
    pub reciprocal_sum: f64,
    pub primes: usize,
    /// The first prime of the next block, whose reciprocal would overflow this one.
    pub next_prime: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTable {
    pub prime_limit: u64,
    /// Completed blocks `j = 1, 2, ...`.
    pub blocks: Vec<Block>,
}

impl BlockTable {
    /// `[λ_0, λ_1, ...]`.
    pub fn lambda(&self) -> Vec<f64> {
        std::iter::once(LAMBDA0)
            .chain(self.blocks.iter().map(|b| b.lambda as f64))
            .collect()
    }

    /// `[μ_1, μ_2, ...]`.
    pub fn mu(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.mu).collect()
    }

    pub fn reciprocal_sums(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.reciprocal_sum).collect()
    }

    pub fn last_lambda(&self) -> Option<u64> {
        self.blocks.last().map(|b| b.lambda)
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Whether `Σ 1/p` over `primes` is at most `log 2`; decided exactly when the
/// float sum lies within `1e-12` of `log 2`.
fn fits_in_log2(primes: &[u64], approx: f64) -> bool {
    let ln2 = std::f64::consts::LN_2;
    if (approx - ln2).abs() > 1e-12 {
        return approx <= ln2;
    }
    let exact = primes
        .iter()
        .fold(BigRational::from_integer(BigInt::from(0)), |acc, &p| {
            acc + BigRational::new(BigInt::from(1), BigInt::from(p))
        });
    let (lo, hi) = ln2_bracket(100);
    if exact <= lo {
        true
    } else if exact > hi {
        false
    } else {
        // Enclosure too wide; ln 2 is irrational so a rational sum never equals it.
        let (lo, _) = ln2_bracket(400);
        exact <= lo
    }
}

/// Greedy maximal blocks over primes up to `prime_limit`. A block is kept only
/// when the prime that closes it (the first one that does not fit) is within
/// the limit.
pub fn build_blocks(prime_limit: u64) -> Result<BlockTable> {
    if prime_limit < 2 {
        return Err(Error::domain("prime_limit", "need prime_limit >= 2"));
    }
    let primes = primes_up_to(prime_limit);
    let ln2 = std::f64::consts::LN_2;
    let mut blocks = Vec::new();
    let mut start = 0;
    'outer: while start < primes.len() {
        let mut acc = Compensated::default();
        let mut end = start;
        while end < primes.len() {
            let mut trial = acc;
            trial.add(1.0 / primes[end] as f64);
            let fits = if (trial.value() - ln2).abs() > 1e-12 {
                trial.value() <= ln2
            } else {
                fits_in_log2(&primes[start..=end], trial.value())
            };
            if !fits {
                break;
            }
            acc = trial;
            end += 1;
        }
        if end == primes.len() {
            break 'outer;
        }
        let lambda = primes[end - 1];
        blocks.push(Block {
            j: blocks.len() + 1,
            lambda,
            mu: (lambda as f64).ln().log2(),
            reciprocal_sum: acc.value(),
            primes: end - start,
            next_prime: primes[end],
        });
        start = end;
    }
    Ok(BlockTable { prime_limit, blocks })
}

/// The `j` with `λ_{j-1} < p <= λ_j`.
pub fn block_index(p: u64, table: &BlockTable) -> Result<usize> {
    let last = table.last_lambda().unwrap_or(0);
    if (p as f64) <= LAMBDA0 || p > last {
        return Err(Error::range("p", p as f64, format!("(1.9, {last}]")));
    }
    Ok(table.blocks.partition_point(|b| b.lambda < p) + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MujReport {
    /// `ĉ_3`, the last available `μ_j - j`.
    pub c3_hat: f64,
    /// `(j, μ_j - j)` for every block.
    pub offsets: Vec<(usize, f64)>,
    /// `(j, |μ_j - j - ĉ_3|)` for `j >= 2`.
    pub deviations: Vec<(usize, f64)>,
    pub strictly_decreasing: bool,
    /// Ratios `|Δ_j| / |Δ_{j+1}|` of successive increments `Δ_j = (μ_{j+1} - j - 1) - (μ_j - j)`.
    pub shrink_factors: Vec<f64>,
    /// Every shrink factor is at least 1.5.
    pub shrinks_by_1_5: bool,
}

/// Convergence report for `μ_j - j`.
pub fn check_muj(table: &BlockTable) -> Result<MujReport> {
    if table.blocks.len() < 4 {
        return Err(Error::Capacity {
            what: "blocks",
            requested: 4,
            limit: table.blocks.len() as u64,
        });
    }
    let offsets: Vec<(usize, f64)> = table.blocks.iter().map(|b| (b.j, b.mu - b.j as f64)).collect();
    let c3_hat = offsets.last().expect("nonempty").1;
    let deviations: Vec<(usize, f64)> = offsets
        .iter()
        .filter(|(j, _)| *j >= 2)
        .map(|&(j, o)| (j, (o - c3_hat).abs()))
        .collect();
    let strictly_decreasing = deviations.windows(2).all(|w| w[1].1 < w[0].1);
    let incr: Vec<f64> = offsets.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    let shrink_factors: Vec<f64> = incr.windows(2).map(|w| w[0] / w[1]).collect();
    let shrinks_by_1_5 = shrink_factors.iter().all(|&f| f >= 1.5);
    Ok(MujReport {
        c3_hat,
        offsets,
        deviations,
        strictly_decreasing,
        shrink_factors,
        shrinks_by_1_5,
    })
}
