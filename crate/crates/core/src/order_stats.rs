//! Uniform order statistics crossing a linear lower boundary.
//!
//! `Q_k(u, v)` is the probability that the sorted uniforms
//! `ξ_1 <= ... <= ξ_k` satisfy `ξ_i >= (i - u)/v` for every `i`
//! (boundary values clipped to `[0, 1]`).

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::scalar::{rational, Scalar};
use crate::{Error, Result};

/// Largest `k` accepted by [`qk_exact`].
pub const K_MAX: usize = 400;

/// Largest `k` evaluated in exact rational arithmetic by [`qk_exact`].
pub const EXACT_K_MAX: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub k: usize,
    pub u: f64,
    pub v: f64,
    /// `u + v - k`.
    pub w: f64,
}

impl BoundarySpec {
    pub fn new(k: usize, u: f64, v: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("k", "need k >= 1"));
        }
        if !u.is_finite() {
            return Err(Error::domain("u", "u must be finite"));
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain("v", format!("need finite v > 0, got {v}")));
        }
        Ok(BoundarySpec {
            k,
            u,
            v,
            w: u + v - k as f64,
        })
    }

    /// Spec with `v = k + w - u`.
    pub fn from_uw(k: usize, u: f64, w: f64) -> Result<Self> {
        Self::new(k, u, k as f64 + w - u)
    }

    /// Clipped lower boundary `b_i = clip((i - u)/v)`, `i = 1..=k`.
    pub fn lower_bounds(&self) -> Vec<f64> {
        (1..=self.k)
            .map(|i| ((i as f64 - self.u) / self.v).clamp(0.0, 1.0))
            .collect()
    }
}

fn clip<S: Scalar>(x: S) -> S {
    x.max_val(S::zero()).min_val(S::one())
}

/// `Q_k(u, v)` by the upper-boundary recursion after reflecting
/// `η_i = 1 - ξ_{k+1-i}`:
/// `V_0 = 1`, `V_m = Σ_{j=1}^m (-1)^{j+1} c_{m-j+1}^j / j! · V_{m-j}`, result `k! V_k`,
/// where `c_i = 1 - clip((k+1-i-u)/v)`.
///
/// Exact for rational scalars; the alternating sum loses accuracy in floating
/// point once `k` exceeds a few dozen.
pub fn qk_steck<S: Scalar>(k: usize, u: &S, v: &S) -> S {
    let c: Vec<S> = (1..=k)
        .map(|i| S::one() - clip((S::of_int((k + 1 - i) as i64) - u.clone()) / v.clone()))
        .collect();
    // pow[i][j] = c_{i+1}^j / j!
    let pow: Vec<Vec<S>> = c
        .iter()
        .enumerate()
        .map(|(i, ci)| {
            let mut row = Vec::with_capacity(k - i + 1);
            row.push(S::one());
            for j in 1..=k - i {
                let next = row[j - 1].clone() * ci.clone() / S::of_int(j as i64);
                row.push(next);
            }
            row
        })
        .collect();
    let mut vals: Vec<S> = Vec::with_capacity(k + 1);
    vals.push(S::one());
    for m in 1..=k {
        let mut acc = S::zero();
        for j in 1..=m {
            let term = pow[m - j][j].clone() * vals[m - j].clone();
            if j % 2 == 1 {
                acc = acc + term;
            } else {
                acc = acc - term;
            }
        }
        vals.push(acc);
    }
    let mut fact = S::one();
    for i in 2..=k {
        fact = fact * S::of_int(i as i64);
    }
    fact * vals[k].clone()
}

/// `Q_k(u, v)` in exact rational arithmetic for rational `u`, `v > 0`.
pub fn qk_rational(k: usize, u: &BigRational, v: &BigRational) -> Result<BigRational> {
    if k == 0 || k > K_MAX {
        return Err(Error::Capacity {
            what: "k",
            requested: k as u64,
            limit: K_MAX as u64,
        });
    }
    if !(*v > BigRational::zero()) {
        return Err(Error::domain("v", "need v > 0"));
    }
    Ok(qk_steck(k, u, v))
}

/// `ln(n!)` for `n = 0..=k`.
fn log_factorials(k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..=k {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

/// `Q_k(u, v)` by a forward recursion on the lower boundary directly.
///
/// With `N(t) = #{i : ξ_i < t}`, the event is `N(b_i) <= i - 1` for all `i`.
/// Between consecutive boundary values the points still above the previous
/// value fall below the next one binomially, so the state distribution of
/// `N` is propagated with binomial transitions. All terms are nonnegative;
/// cost `O(k^3)`.
pub fn qk_lower_dp(spec: &BoundarySpec) -> f64 {
    let k = spec.k;
    let b = spec.lower_bounds();
    if b.iter().any(|&x| x >= 1.0) {
        return 0.0;
    }
    let lf = log_factorials(k);
    let mut dist = vec![1.0f64];
    let mut prev = 0.0f64;
    for (i, &bi) in b.iter().enumerate() {
        let cap = i; // N(b_{i+1}) <= i
        let p = if bi > prev { (bi - prev) / (1.0 - prev) } else { 0.0 };
        let mut next = vec![0.0f64; cap + 1];
        for (n, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            if p == 0.0 {
                if n <= cap {
                    next[n] += mass;
                }
                continue;
            }
            let rem = k - n;
            let (lp, lq) = (p.ln(), (-p).ln_1p());
            for m in 0..=rem.min(cap.saturating_sub(n)) {
                if n + m > cap {
                    break;
                }
                let lc = lf[rem] - lf[m] - lf[rem - m];
                let lq_term = if rem - m == 0 { 0.0 } else { (rem - m) as f64 * lq };
                let lp_term = if m == 0 { 0.0 } else { m as f64 * lp };
                next[n + m] += mass * (lc + lp_term + lq_term).exp();
            }
        }
        dist = next;
        prev = bi.max(prev);
    }
    dist.iter().sum::<f64>().clamp(0.0, 1.0)
}

/// `Q_k(u, v)`: exact rational evaluation (rounded to `f64`) for
/// `k <= 60`, the nonnegative binomial recursion up to `k = 400`.
pub fn qk_exact(spec: &BoundarySpec) -> Result<f64> {
    if spec.k > K_MAX {
        return Err(Error::Capacity {
            what: "k",
            requested: spec.k as u64,
            limit: K_MAX as u64,
        });
    }
    if spec.k <= EXACT_K_MAX {
        let u = BigRational::of_f64(spec.u);
        let v = BigRational::of_f64(spec.v);
        Ok(qk_rational(spec.k, &u, &v)?.approx())
    } else {
        Ok(qk_lower_dp(spec))
    }
}

/// `1 - e^{-2λ²}`.
pub fn smirnov_limit(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::domain("lambda", "need λ >= 0"));
    }
    Ok(-(-2.0 * lambda * lambda).exp_m1())
}

/// `D_k^+ = -√k min_i (ξ_(i) - i/k)` of a sample.
pub fn dk_plus(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::domain("sample", "sample must be nonempty"));
    }
    if let Some(&bad) = sample.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::domain("sample", format!("value {bad} outside [0, 1]")));
    }
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let k = s.len() as f64;
    let min = s
        .iter()
        .enumerate()
        .map(|(i, &x)| x - (i + 1) as f64 / k)
        .fold(f64::INFINITY, f64::min);
    Ok(-k.sqrt() * min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Q2Report {
    pub k_max: usize,
    /// Integer pairs `1 <= u <= k <= k_max` checked against the lower bound.
    pub lower_checked: usize,
    /// Pairs `(k, u)` where `Q_k(u, k+1-u) < (u - 1/2)/(k + 1/2)`.
    pub lower_failures: Vec<(usize, usize)>,
    /// `sup Q_k k / ((u+1)(w+1)²)` over integers `1 <= u, w <= k <= k_max`.
    pub upper_sup: f64,
    /// `(k, u, w)` attaining the supremum.
    pub upper_argmax: (usize, usize, usize),
    pub upper_points: usize,
}

/// Checks `Q_k(u, k+1-u) >= (u-1/2)/(k+1/2)` in exact rationals for all
/// integers `1 <= u <= k <= k_max`, and records the empirical constant in
/// `Q_k(u,v) <= C (u+1)(w+1)²/k` over the integer `(u, w)` grid.
pub fn check_q2_bounds(k_max: usize) -> Result<Q2Report> {
    if k_max == 0 || k_max > K_MAX {
        return Err(Error::Capacity {
            what: "k_max",
            requested: k_max as u64,
            limit: K_MAX as u64,
        });
    }
    let mut lower_checked = 0;
    let mut lower_failures = Vec::new();
    let half = rational(1, 2);
    for k in 1..=k_max {
        for u in 1..=k {
            let q = qk_rational(
                k,
                &BigRational::of_int(u as i64),
                &BigRational::of_int((k + 1 - u) as i64),
            )?;
            let bound = (BigRational::of_int(u as i64) - &half) / (BigRational::of_int(k as i64) + &half);
            lower_checked += 1;
            if q < bound {
                lower_failures.push((k, u));
            }
        }
    }
    let mut upper_sup = 0.0;
    let mut upper_argmax = (0, 0, 0);
    let mut upper_points = 0;
    for k in 1..=k_max {
        for u in 1..=k {
            for w in 1..=k {
                let spec = BoundarySpec::from_uw(k, u as f64, w as f64)?;
                let q = qk_lower_dp(&spec);
                let ratio = q * k as f64 / ((u as f64 + 1.0) * (w as f64 + 1.0).powi(2));
                upper_points += 1;
                if ratio > upper_sup {
                    upper_sup = ratio;
                    upper_argmax = (k, u, w);
                }
            }
        }
    }
    Ok(Q2Report {
        k_max,
        lower_checked,
        lower_failures,
        upper_sup,
        upper_argmax,
        upper_points,
    })
}
