//! Global distribution of divisors on the logarithmic scale.
//!
//! For `a >= 1` and `σ > 0` the set `{x : τ(a, e^x, e^{x+σ}) >= 1}` is the
//! union of `[log d - σ, log d)` over `d | a`; [`DivisorGeometry`] measures it,
//! splits it by multiplicity, and counts close and isolated divisor pairs.

use num_bigint::BigInt;
use num_traits::{Float, Signed};
use serde::{Deserialize, Serialize};

use crate::arith::{factorize_trial, DivisorList};
use crate::{Error, Result};

/// Largest `a` accepted by the trial-division entry points.
pub const GEOMETRY_MAX: u64 = 100_000_000_000_000;

/// Absolute tolerance for comparing log-divisor endpoints.
pub const LOG_TOL: f64 = 1e-12;

/// Sorted, disjoint half-open intervals `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntervalUnion<F> {
    intervals: Vec<(F, F)>,
}

impl<F: Float> IntervalUnion<F> {
    /// Union of arbitrary intervals; empty ones are dropped, overlapping or
    /// touching ones merged.
    pub fn from_intervals<I: IntoIterator<Item = (F, F)>>(it: I) -> Self {
        let mut v: Vec<(F, F)> = it.into_iter().filter(|&(lo, hi)| lo < hi).collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite endpoints"));
        let mut out: Vec<(F, F)> = Vec::with_capacity(v.len());
        for (lo, hi) in v {
            match out.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        IntervalUnion { intervals: out }
    }

    pub fn intervals(&self) -> &[(F, F)] {
        &self.intervals
    }

    pub fn measure(&self) -> F {
        self.intervals
            .iter()
            .fold(F::zero(), |acc, &(lo, hi)| acc + (hi - lo))
    }

    pub fn contains(&self, x: F) -> bool {
        let i = self.intervals.partition_point(|&(lo, _)| lo <= x);
        i > 0 && x < self.intervals[i - 1].1
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("sigma", format!("need finite σ > 0, got {sigma}")))
    }
}

/// Divisors of one integer with their logarithms.
#[derive(Debug, Clone)]
pub struct DivisorGeometry {
    pub n: u64,
    factorization: Vec<(u64, u32)>,
    divisors: Vec<u64>,
    logs: Vec<f64>,
}

impl DivisorGeometry {
    /// Factors `n` by trial division.
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n", "n must be positive"));
        }
        if n > GEOMETRY_MAX {
            return Err(Error::range("n", n as f64, format!("[1, {GEOMETRY_MAX}]")));
        }
        Ok(Self::from_factorization(n, factorize_trial(n)))
    }

    /// From a known factorization (primes increasing).
    pub fn from_factorization(n: u64, factorization: Vec<(u64, u32)>) -> Self {
        let list = DivisorList::from_factorization(n, &factorization);
        let logs = list.divisors.iter().map(|&d| (d as f64).ln()).collect();
        DivisorGeometry {
            n,
            factorization,
            divisors: list.divisors,
            logs,
        }
    }

    pub fn tau(&self) -> usize {
        self.divisors.len()
    }

    pub fn divisors(&self) -> &[u64] {
        &self.divisors
    }

    pub fn factorization(&self) -> &[(u64, u32)] {
        &self.factorization
    }

    /// The set `𝓛(n; σ)`.
    pub fn l_union(&self, sigma: f64) -> Result<IntervalUnion<f64>> {
        check_sigma(sigma)?;
        Ok(IntervalUnion::from_intervals(self.logs.iter().map(|&l| (l - sigma, l))))
    }

    /// `L(n; σ)`, the measure of `𝓛(n; σ)`.
    pub fn l_measure(&self, sigma: f64) -> Result<f64> {
        Ok(self.multiplicity_profile(sigma)?.iter().skip(1).sum())
    }

    /// `profile[r] = L_r(n; σ)` for `1 <= r <= τ(n)`; `profile[0]` is unused
    /// and set to `0`.
    ///
    /// Computed by one sweep over the `2τ(n)` endpoints; the accumulated
    /// rounding error is at most about `4 τ(n) ε log n`.
    pub fn multiplicity_profile(&self, sigma: f64) -> Result<Vec<f64>> {
        check_sigma(sigma)?;
        let mut events: Vec<(f64, i64)> = Vec::with_capacity(2 * self.logs.len());
        for &l in &self.logs {
            events.push((l - sigma, 1));
            events.push((l, -1));
        }
        events.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite logs"));
        let mut profile = vec![0.0; self.tau() + 1];
        let mut mult = 0i64;
        let mut prev = events[0].0;
        for &(pos, delta) in &events {
            let len = pos - prev;
            if len > LOG_TOL && mult > 0 {
                profile[mult as usize] += len;
            }
            prev = pos;
            mult += delta;
        }
        profile[0] = 0.0;
        Ok(profile)
    }

    /// `L_r(n; σ)`: measure of `{x : τ(n, e^x, e^{x+σ}) = r}` for `r >= 1`.
    pub fn l_r_measure(&self, sigma: f64, r: usize) -> Result<f64> {
        if r == 0 {
            return Err(Error::domain("r", "L_r needs r >= 1"));
        }
        Ok(self.multiplicity_profile(sigma)?.get(r).copied().unwrap_or(0.0))
    }

    /// `W(n; σ)`: ordered pairs `(d, d')` of divisors with `|log(d/d')| <= σ`,
    /// diagonal included.
    pub fn w_pairs(&self, sigma: f64) -> Result<u64> {
        check_sigma(sigma)?;
        let mut off = 0u64;
        let mut j = 0;
        for i in 0..self.logs.len() {
            j = j.max(i + 1);
            while j < self.logs.len() && self.logs[j] - self.logs[i] <= sigma + LOG_TOL {
                j += 1;
            }
            off += (j - i - 1) as u64;
        }
        Ok(self.tau() as u64 + 2 * off)
    }

    /// `I(n; σ)`: divisors `d` with no other divisor in `(d e^{-σ}, d e^σ]`.
    pub fn isolated_count(&self, sigma: f64) -> Result<u64> {
        check_sigma(sigma)?;
        let l = &self.logs;
        let count = (0..l.len())
            .filter(|&i| {
                let prev_close = i > 0 && l[i] - l[i - 1] < sigma - LOG_TOL;
                let next_close = i + 1 < l.len() && l[i + 1] - l[i] <= sigma + LOG_TOL;
                !prev_close && !next_close
            })
            .count();
        Ok(count as u64)
    }

    /// Indices `ℓ` (1-based) where `d_{ℓ+1}/d_ℓ > p_v`, with `v` the least
    /// index such that `(e_1+1)⋯(e_v+1)` does not divide `ℓ`.
    pub fn gap_bound_violations(&self) -> Vec<usize> {
        let mut bad = Vec::new();
        for ell in 1..self.tau() {
            let mut prod = 1usize;
            let mut pv = 0u64;
            for &(p, e) in &self.factorization {
                prod *= e as usize + 1;
                pv = p;
                if ell % prod != 0 {
                    break;
                }
            }
            let (lo, hi) = (self.divisors[ell - 1], self.divisors[ell]);
            if hi as u128 > lo as u128 * pv as u128 {
                bad.push(ell);
            }
        }
        bad
    }
}

pub fn l_measure(a: u64, sigma: f64) -> Result<f64> {
    DivisorGeometry::new(a)?.l_measure(sigma)
}

pub fn l_r_measure(a: u64, sigma: f64, r: usize) -> Result<f64> {
    DivisorGeometry::new(a)?.l_r_measure(sigma, r)
}

pub fn w_pairs(a: u64, sigma: f64) -> Result<u64> {
    DivisorGeometry::new(a)?.w_pairs(sigma)
}

pub fn isolated_count(n: u64, sigma: f64) -> Result<u64> {
    DivisorGeometry::new(n)?.isolated_count(sigma)
}

/// Whether every consecutive divisor ratio of `n` obeys the `p_v` bound.
pub fn divisor_gap_bound_check(n: u64) -> Result<bool> {
    if n < 2 {
        return Err(Error::domain("n", "need n >= 2"));
    }
    Ok(DivisorGeometry::new(n)?.gap_bound_violations().is_empty())
}

/// `2^r I(a;σ)^r >= τ(a)^{r-1} (3τ(a) - 2W(a;σ))`, compared in integers.
pub fn ilow_inequality_check(a: u64, sigma: f64, r: u32) -> Result<bool> {
    let g = DivisorGeometry::new(a)?;
    ilow_holds(&g, sigma, r)
}

pub fn ilow_holds(g: &DivisorGeometry, sigma: f64, r: u32) -> Result<bool> {
    if r == 0 {
        return Err(Error::domain("r", "need r >= 1"));
    }
    let i = BigInt::from(g.isolated_count(sigma)?);
    let w = BigInt::from(g.w_pairs(sigma)?);
    let tau = BigInt::from(g.tau());
    let lhs = num_traits::pow(BigInt::from(2) * i, r as usize);
    let rhs = num_traits::pow(tau.clone(), r as usize - 1) * (BigInt::from(3) * tau - BigInt::from(2) * w);
    Ok(rhs.is_negative() || lhs >= rhs)
}

/// The five `L` inequalities, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LBound {
    /// `L(a;σ) <= min(σ τ(a), σ + log a)`.
    TauOrLength,
    /// `L(ab;σ) <= τ(b) L(a;σ)` for coprime `a, b`.
    CoprimeTau,
    /// `L(ab;σ) <= L(a; σ + log b)` for coprime `a, b`.
    CoprimeShift,
    /// `L(a;σ) <= (σ/γ) L(a;γ)` for `γ <= σ`.
    Scaling,
    /// `L(p_1⋯p_k;σ) <= min_j 2^{k-j} (log(p_1⋯p_j) + σ)` for squarefree `a`.
    Squarefree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub slack: f64,
    pub holds: bool,
}

impl Comparison {
    fn new(lhs: f64, rhs: f64) -> Self {
        Comparison {
            lhs,
            rhs,
            slack: rhs - lhs,
            holds: lhs <= rhs + 1e-9 * rhs.abs().max(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LInequalityReport {
    pub parts: Vec<(LBound, Result<Comparison>)>,
}

impl LInequalityReport {
    /// True when no evaluated part fails (parts skipped on preconditions count as passing).
    pub fn all_hold(&self) -> bool {
        self.parts.iter().all(|(_, r)| r.as_ref().map_or(true, |c| c.holds))
    }

    pub fn get(&self, which: LBound) -> Option<&Result<Comparison>> {
        self.parts.iter().find(|(b, _)| *b == which).map(|(_, r)| r)
    }
}

/// Evaluates all five `L` inequalities at `(a, b, σ, γ)`.
pub fn check_l_inequalities(a: u64, b: u64, sigma: f64, gamma: f64) -> Result<LInequalityReport> {
    check_sigma(sigma)?;
    let ga = DivisorGeometry::new(a)?;
    let la = ga.l_measure(sigma)?;
    let mut parts = Vec::with_capacity(5);

    let tau = ga.tau() as f64;
    parts.push((
        LBound::TauOrLength,
        Ok(Comparison::new(la, (sigma * tau).min(sigma + (a as f64).ln()))),
    ));

    let coprime = num_integer::gcd(a, b) == 1;
    let ab = (a as u128) * (b as u128);
    let (two, three) = if b == 0 {
        let e = Error::domain("b", "b must be positive");
        (Err(e.clone()), Err(e))
    } else if !coprime {
        let e = Error::Precondition(format!("gcd({a}, {b}) != 1"));
        (Err(e.clone()), Err(e))
    } else if ab > GEOMETRY_MAX as u128 {
        let e = Error::range("ab", ab as f64, format!("[1, {GEOMETRY_MAX}]"));
        (Err(e.clone()), Err(e))
    } else {
        let gb = DivisorGeometry::new(b)?;
        let mut fac: Vec<(u64, u32)> = ga.factorization().to_vec();
        fac.extend_from_slice(gb.factorization());
        fac.sort_unstable();
        let gab = DivisorGeometry::from_factorization(ab as u64, fac);
        let lab = gab.l_measure(sigma)?;
        (
            Ok(Comparison::new(lab, gb.tau() as f64 * la)),
            Ok(Comparison::new(lab, ga.l_measure(sigma + (b as f64).ln())?)),
        )
    };
    parts.push((LBound::CoprimeTau, two));
    parts.push((LBound::CoprimeShift, three));

    let four = if !(gamma > 0.0 && gamma <= sigma) {
        Err(Error::Precondition(format!("need 0 < γ <= σ, got γ={gamma}, σ={sigma}")))
    } else {
        ga.l_measure(gamma).map(|lg| Comparison::new(la, sigma / gamma * lg))
    };
    parts.push((LBound::Scaling, four));

    let five = if ga.factorization().iter().any(|&(_, e)| e > 1) {
        Err(Error::Precondition(format!("{a} is not squarefree")))
    } else {
        Ok(Comparison::new(la, squarefree_bound(ga.factorization(), sigma)))
    };
    parts.push((LBound::Squarefree, five));

    Ok(LInequalityReport { parts })
}

/// `min_{0<=j<=k} 2^{k-j} (log(p_1⋯p_j) + σ)`.
fn squarefree_bound(fac: &[(u64, u32)], sigma: f64) -> f64 {
    let k = fac.len() as i32;
    let mut log_prod = 0.0;
    let mut best = 2f64.powi(k) * sigma;
    for (j, &(p, _)) in fac.iter().enumerate() {
        log_prod += (p as f64).ln();
        best = best.min(2f64.powi(k - j as i32 - 1) * (log_prod + sigma));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{tau_interval, FactorTable};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn interval_union_basics() {
        let u = IntervalUnion::from_intervals(vec![(0.0, 1.0), (0.5, 2.0), (3.0, 3.0), (2.0, 2.5), (4.0, 5.0)]);
        assert_eq!(u.intervals(), &[(0.0, 2.5), (4.0, 5.0)]);
        assert_eq!(u.measure(), 3.5);
        assert!(u.contains(0.0) && !u.contains(2.5) && u.contains(4.5) && !u.contains(-1.0));
        let f: IntervalUnion<f32> = IntervalUnion::from_intervals(vec![(0.0f32, 1.0)]);
        assert_eq!(f.measure(), 1.0);
    }

    #[test]
    fn l_examples() {
        assert!(close(l_measure(1, 0.7).unwrap(), 0.7, 1e-15));
        assert!(close(l_measure(7, 0.5).unwrap(), 1.0, 1e-15));
        assert!(close(l_measure(6, 0.5).unwrap(), 1.9055, 5e-5));
        // Closed forms: L = 3/2 + log(3/2), L_2 = 1/2 - log(3/2), L_1 = 1 + 2 log(3/2).
        let l32 = 1.5f64.ln();
        assert!(close(l_measure(6, 0.5).unwrap(), 1.5 + l32, 1e-12));
        assert!(close(l_r_measure(6, 0.5, 1).unwrap(), 1.0 + 2.0 * l32, 1e-12));
        assert!(close(l_r_measure(6, 0.5, 1).unwrap(), 1.8110, 1e-4));
        assert!(close(l_r_measure(6, 0.5, 2).unwrap(), 0.5 - l32, 1e-12));
        assert!(close(l_r_measure(6, 0.5, 2).unwrap(), 0.0945, 5e-5));
        assert_eq!(l_r_measure(6, 0.5, 5).unwrap(), 0.0);
        let g = DivisorGeometry::new(6).unwrap();
        assert!(close(g.l_union(0.5).unwrap().measure(), 1.9055, 5e-5));
        assert!(l_measure(6, 0.0).is_err());
        assert!(l_measure(0, 1.0).is_err());
    }

    #[test]
    fn w_and_i_examples() {
        assert_eq!(w_pairs(6, 0.5).unwrap(), 6);
        assert_eq!(w_pairs(6, 0.3).unwrap(), 4);
        assert_eq!(w_pairs(30, 0.01).unwrap(), 8);
        assert_eq!(isolated_count(6, 0.5).unwrap(), 2);
        assert_eq!(isolated_count(13, 1.0).unwrap(), 2);
        assert_eq!(isolated_count(30, 0.01).unwrap(), 8);
        // Ratio exactly e^σ: d' = d e^σ is inside (d e^{-σ}, d e^σ].
        // From 2 the neighbourhood (1, 4] excludes 1, so only 1 loses isolation.
        assert_eq!(isolated_count(2, 2f64.ln()).unwrap(), 1);
        assert_eq!(w_pairs(2, 2f64.ln()).unwrap(), 4);
    }

    #[test]
    fn gap_bound_examples() {
        assert!(divisor_gap_bound_check(12).unwrap());
        assert!(divisor_gap_bound_check(3u64.pow(10)).unwrap());
        assert!(divisor_gap_bound_check(1).is_err());
    }

    #[test]
    fn gap_bound_exhaustive() {
        let t = FactorTable::build(100_000).unwrap();
        for n in 2..=100_000u64 {
            let g = DivisorGeometry::from_factorization(n, t.factorize(n).unwrap());
            assert!(g.gap_bound_violations().is_empty(), "n={n}");
        }
    }

    #[test]
    fn l_inequality_examples() {
        let rep = check_l_inequalities(6, 1, 0.5, 0.5).unwrap();
        let c = rep.get(LBound::TauOrLength).unwrap().as_ref().unwrap();
        assert!(c.holds && close(c.rhs, 2.0, 1e-15) && close(c.lhs, 1.9055, 5e-5));
        let c = rep.get(LBound::Scaling).unwrap().as_ref().unwrap();
        assert!(c.holds && close(c.slack, 0.0, 1e-12));
        let rep = check_l_inequalities(2, 3, 0.5, 0.25).unwrap();
        let c = rep.get(LBound::CoprimeTau).unwrap().as_ref().unwrap();
        assert!(c.holds && close(c.rhs, 2.0, 1e-15));
        assert!(rep.all_hold());
        let rep = check_l_inequalities(4, 6, 0.5, 0.25).unwrap();
        assert!(matches!(rep.get(LBound::CoprimeTau), Some(Err(Error::Precondition(_)))));
        assert!(matches!(rep.get(LBound::Squarefree), Some(Err(Error::Precondition(_)))));
        let rep = check_l_inequalities(5, 6, 0.5, 0.75).unwrap();
        assert!(matches!(rep.get(LBound::Scaling), Some(Err(Error::Precondition(_)))));
    }

    #[test]
    fn ilow_examples_and_sweep() {
        assert!(ilow_inequality_check(6, 0.5, 1).unwrap());
        let t = FactorTable::build(10_000).unwrap();
        for a in 1..=10_000u64 {
            let g = DivisorGeometry::from_factorization(a, t.factorize(a).unwrap());
            for sigma in [0.1, 0.5, 1.0] {
                for r in 1..=3 {
                    assert!(ilow_holds(&g, sigma, r).unwrap(), "a={a} σ={sigma} r={r}");
                }
            }
        }
    }

    #[test]
    fn squarefree_part_against_every_j() {
        let primes = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31];
        for k in 1..=8 {
            for start in 0..=primes.len() - k {
                let ps = &primes[start..start + k];
                let a: u64 = ps.iter().product();
                for sigma in [0.05, 0.3, 1.0, 3.0] {
                    let l = l_measure(a, sigma).unwrap();
                    let mut lp = 0.0;
                    for j in 0..=k {
                        if j > 0 {
                            lp += (ps[j - 1] as f64).ln();
                        }
                        assert!(l <= 2f64.powi((k - j) as i32) * (lp + sigma) + 1e-9);
                    }
                }
            }
        }
    }

    fn oracle_l(a: u64, sigma: f64) -> f64 {
        // Merge intervals one by one in divisor order.
        let mut total = 0.0;
        let mut cur: Option<(f64, f64)> = None;
        let mut d = 1;
        while d <= a {
            if a.is_multiple_of(d) {
                let (lo, hi) = ((d as f64).ln() - sigma, (d as f64).ln());
                cur = match cur {
                    Some((clo, chi)) if lo <= chi => Some((clo, hi.max(chi))),
                    Some((clo, chi)) => {
                        total += chi - clo;
                        Some((lo, hi))
                    }
                    None => Some((lo, hi)),
                };
            }
            d += 1;
        }
        let (lo, hi) = cur.unwrap();
        total + hi - lo
    }

    proptest! {
        #[test]
        fn functional_invariants(a in 1u64..50_000, sigma in 0.01f64..3.0) {
            let g = DivisorGeometry::new(a).unwrap();
            let prof = g.multiplicity_profile(sigma).unwrap();
            let l = g.l_measure(sigma).unwrap();
            let weighted: f64 = prof.iter().enumerate().map(|(r, v)| r as f64 * v).sum();
            prop_assert!((weighted - sigma * g.tau() as f64).abs() < 1e-9);
            prop_assert!((l - prof.iter().sum::<f64>()).abs() < 1e-12);
            prop_assert!((l - oracle_l(a, sigma)).abs() < 1e-9);
            let w = g.w_pairs(sigma).unwrap();
            let i = g.isolated_count(sigma).unwrap();
            prop_assert!(w + i >= 2 * g.tau() as u64);
            let logs: Vec<f64> = g.divisors().iter().map(|&d| (d as f64).ln()).collect();
            let brute_w = logs.iter().flat_map(|x| logs.iter().map(move |y| (x - y).abs()))
                .filter(|&t| t <= sigma).count() as u64;
            prop_assert_eq!(w, brute_w);
            let brute_i = g.divisors().iter()
                .filter(|&&d| tau_interval(a, d as f64 * (-sigma).exp(), d as f64 * sigma.exp()).unwrap() == 1)
                .count() as u64;
            prop_assert_eq!(i, brute_i);
        }

        #[test]
        fn monotone_in_sigma(a in 1u64..20_000, s1 in 0.01f64..2.0, ds in 0.0f64..2.0) {
            let g = DivisorGeometry::new(a).unwrap();
            let s2 = s1 + ds;
            prop_assert!(g.l_measure(s1).unwrap() <= g.l_measure(s2).unwrap() + 1e-12);
            prop_assert!(g.w_pairs(s1).unwrap() <= g.w_pairs(s2).unwrap());
            prop_assert!(g.isolated_count(s1).unwrap() >= g.isolated_count(s2).unwrap());
        }

        #[test]
        fn l_inequalities_hold(a in 1u64..5_000, b in 1u64..200, sigma in 0.05f64..2.0, f in 0.05f64..1.0) {
            let rep = check_l_inequalities(a, b, sigma, sigma * f).unwrap();
            prop_assert!(rep.all_hold());
        }
    }
}
