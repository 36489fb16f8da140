//! Exact checks of Abel's binomial identity, the truncated sum `C_t(a,b)`
//! and its exponential bound, partial sums of the exponential series, and
//! Stirling's formula.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::{exp_lower_bound, Scalar};
use crate::{Error, Result};

/// Largest `t` for the exact Abel check.
pub const ABEL_T_MAX: u32 = 25;

fn binomial_row<S: Scalar>(t: u32) -> Vec<S> {
    let mut row = Vec::with_capacity(t as usize + 1);
    let mut c = S::one();
    row.push(c.clone());
    for j in 1..=t {
        c = c * S::of_int((t - j + 1) as i64) / S::of_int(j as i64);
        row.push(c.clone());
    }
    row
}

/// `C(t,j) (a+j)^{j-1} (b+t-j)^{t-j-1}`, with `0^0 = 1`.
fn abel_term<S: Scalar>(binom: &S, t: u32, j: u32, a: &S, b: &S) -> S {
    let x = a.clone() + S::of_int(j as i64);
    let y = b.clone() + S::of_int((t - j) as i64);
    binom.clone() * x.pow_int(j as i32 - 1) * y.pow_int((t - j) as i32 - 1)
}

/// `Σ_{j=0}^t C(t,j)(a+j)^{j-1}(b+t-j)^{t-j-1}` and `(1/a + 1/b)(t+a+b)^{t-1}`.
pub fn abel_sides<S: Scalar>(t: u32, a: &S, b: &S) -> Result<(S, S)> {
    if *a == S::zero() || *b == S::zero() {
        return Err(Error::Precondition("Abel's identity needs ab != 0".into()));
    }
    if t == 0 {
        return Err(Error::domain("t", "need t >= 1"));
    }
    let row = binomial_row::<S>(t);
    let lhs = (0..=t).fold(S::zero(), |acc, j| acc + abel_term(&row[j as usize], t, j, a, b));
    let rhs = (S::one() / a.clone() + S::one() / b.clone())
        * (S::of_int(t as i64) + a.clone() + b.clone()).pow_int(t as i32 - 1);
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbelCheck {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub equal: bool,
}

/// Both sides of Abel's identity in exact rationals.
pub fn abel_identity_check(t: u32, a: &BigRational, b: &BigRational) -> Result<AbelCheck> {
    if t > ABEL_T_MAX {
        return Err(Error::Capacity {
            what: "t",
            requested: t as u64,
            limit: ABEL_T_MAX as u64,
        });
    }
    let (lhs, rhs) = abel_sides(t, a, b)?;
    let equal = lhs == rhs;
    Ok(AbelCheck { lhs, rhs, equal })
}

/// `C_t(a,b) = Σ C(t,j)(a+j)^{j-1}(b+t-j)^{t-j-1}` over `1 <= j <= t-1`
/// with `-a < j < b+t`; both bases are then positive.
pub fn c_t_sum<S: Scalar>(t: u32, a: &S, b: &S) -> Result<S> {
    if t < 2 {
        return Err(Error::domain("t", "need t >= 2"));
    }
    let row = binomial_row::<S>(t);
    let mut acc = S::zero();
    for j in 1..t {
        let jj = S::of_int(j as i64);
        if -a.clone() < jj && jj < b.clone() + S::of_int(t as i64) {
            acc = acc + abel_term(&row[j as usize], t, j, a, b);
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombsumReport {
    pub t: u32,
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    pub c_t: f64,
    /// `C_t / (e^{5+1/ε}(t+a+b)^{t-1})`.
    pub ratio: f64,
    /// Certified: `C_t` is at most a rational lower bound of the right side.
    pub holds: bool,
}

/// `C_t(a,b) <= e^{5+1/ε}(t+a+b)^{t-1}` for `0 < ε <= 1`, `t >= 10`,
/// `a + b >= -(1-ε)t`. The left side is exact; the exponential is replaced
/// by a truncated-series lower bound, so `holds` never errs in favour of the
/// inequality.
pub fn check_combsum_bound(t: u32, a: &BigRational, b: &BigRational, epsilon: &BigRational) -> Result<CombsumReport> {
    let one = BigRational::from_integer(BigInt::from(1));
    let tq = BigRational::from_integer(BigInt::from(t));
    if !(epsilon > &BigRational::zero() && epsilon <= &one) {
        return Err(Error::Regime("need 0 < ε <= 1".into()));
    }
    if t < 10 {
        return Err(Error::Regime(format!("need t >= 10, got {t}")));
    }
    if a.clone() + b < -(one.clone() - epsilon) * &tq {
        return Err(Error::Regime("need a + b >= -(1-ε)t".into()));
    }
    let c = c_t_sum(t, a, b)?;
    let exponent = BigRational::from_integer(BigInt::from(5)) + one / epsilon;
    let terms = (4.0 * exponent.approx()).ceil() as u32 + 40;
    let base = tq + a + b;
    let power = base.pow_int(t as i32 - 1);
    let rhs_lower = exp_lower_bound(&exponent, terms) * &power;
    let log_ratio = if c.is_zero() {
        f64::NEG_INFINITY
    } else {
        log_rational(&c) - exponent.approx() - log_rational(&power)
    };
    Ok(CombsumReport {
        t,
        a: a.approx(),
        b: b.approx(),
        epsilon: epsilon.approx(),
        c_t: c.approx(),
        ratio: log_ratio.exp(),
        holds: c <= rhs_lower,
    })
}

/// Natural log of a positive rational without overflow.
fn log_rational(r: &BigRational) -> f64 {
    fn log_int(n: &BigInt) -> f64 {
        let bits = n.bits();
        if bits < 1000 {
            n.to_f64().expect("finite").ln()
        } else {
            let shift = bits - 64;
            (n >> shift as usize).to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
    log_int(r.numer()) - log_int(r.denom())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NortonReport {
    pub x: f64,
    pub h: u64,
    pub m: u64,
    /// `log Σ_{h<=k<=m} x^k/k!`.
    pub log_sum: f64,
    /// `log(min(√x, x/(x-m)) x^m/m!)`.
    pub log_comparator: f64,
    pub ratio: f64,
}

/// `Σ_{h<=k<=m} x^k/k!` against `min(√x, x/(x-m)) x^m/m!` for
/// `0 <= h < m <= x`, `m - h >= √x`. The sum is taken relative to its last
/// term, `Σ_k Π_{i=k+1}^m (i/x)`, so every term is positive and at most 1.
pub fn norton_partial_sum(x: f64, h: u64, m: u64) -> Result<NortonReport> {
    let mf = m as f64;
    if !(x.is_finite() && h < m && mf <= x && (m - h) as f64 >= x.sqrt()) {
        return Err(Error::Regime(format!(
            "need 0 <= h < m <= x and m - h >= √x, got x={x}, h={h}, m={m}"
        )));
    }
    let mut term = 1.0f64;
    let mut rel = 1.0f64;
    for k in (h + 1..=m).rev() {
        term *= k as f64 / x;
        rel += term;
    }
    let log_last = mf * x.ln() - libm::lgamma(mf + 1.0);
    let factor = if mf == x { x.sqrt() } else { x.sqrt().min(x / (x - mf)) };
    Ok(NortonReport {
        x,
        h,
        m,
        log_sum: log_last + rel.ln(),
        log_comparator: log_last + factor.ln(),
        ratio: rel / factor,
    })
}

/// `|k! / (√(2πk)(k/e)^k) - 1|`.
pub fn stirling_check(k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("k", "need k >= 1"));
    }
    let kf = k as f64;
    let log_fact: f64 = if k <= 1000 {
        (2..=k).map(|i| (i as f64).ln()).sum()
    } else {
        libm::lgamma(kf + 1.0)
    };
    let log_stirling = 0.5 * (2.0 * std::f64::consts::PI * kf).ln() + kf * kf.ln() - kf;
    Ok((log_fact - log_stirling).exp_m1().abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use proptest::prelude::*;

    #[test]
    fn abel_examples() {
        let one = rational(1, 1);
        let c = abel_identity_check(2, &one, &one).unwrap();
        assert_eq!(c.lhs, rational(8, 1));
        assert!(c.equal);
        let c = abel_identity_check(1, &one, &one).unwrap();
        assert_eq!(c.lhs, rational(2, 1));
        assert!(c.equal);
        assert!(matches!(
            abel_identity_check(3, &rational(0, 1), &one),
            Err(Error::Precondition(_))
        ));
        assert!(abel_identity_check(26, &one, &one).is_err());
        // a + j = 0 at j = 1 gives 0^0 = 1; at larger j the factor vanishes.
        assert!(abel_identity_check(5, &rational(-1, 1), &rational(3, 7)).unwrap().equal);
        assert!(abel_identity_check(6, &rational(-3, 1), &rational(-2, 5)).unwrap().equal);
    }

    #[test]
    fn abel_in_floats_is_close() {
        let (l, r) = abel_sides(8, &0.7f64, &1.3f64).unwrap();
        assert!((l - r).abs() < 1e-9 * r.abs());
    }

    #[test]
    fn ct_examples() {
        let z = rational(0, 1);
        assert_eq!(c_t_sum(3, &z, &z).unwrap(), rational(12, 1));
        assert_eq!(c_t_sum(5, &rational(-4, 1), &rational(-4, 1)).unwrap(), z);
        let (a, b) = (rational(-3, 2), rational(7, 3));
        assert_eq!(c_t_sum(9, &a, &b).unwrap(), c_t_sum(9, &b, &a).unwrap());
        assert!(c_t_sum(1, &z, &z).is_err());
    }

    /// Brute force over all `j` with the constraint checked in integers.
    #[test]
    fn ct_integer_oracle() {
        for t in 2..=9u32 {
            for a in -5i64..=5 {
                for b in -5i64..=5 {
                    let mut expect = BigInt::from(0);
                    for j in 1..t as i64 {
                        if -a < j && j < b + t as i64 {
                            let binom: BigInt = (1..=j).fold(BigInt::from(1), |c, i| c * (t as i64 - i + 1) / i);
                            expect += binom
                                * num_traits::pow(BigInt::from(a + j), (j - 1) as usize)
                                * num_traits::pow(BigInt::from(b + t as i64 - j), (t as i64 - j - 1) as usize);
                        }
                    }
                    let got = c_t_sum(t, &rational(a, 1), &rational(b, 1)).unwrap();
                    assert_eq!(got, BigRational::from_integer(expect), "t={t} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn ct_monotone_on_grid() {
        for t in [4u32, 7, 10] {
            let grid: Vec<BigRational> = (-8..=8).map(|i| rational(i, 2)).collect();
            for b in &grid {
                let vals: Vec<BigRational> = grid.iter().map(|a| c_t_sum(t, a, b).unwrap()).collect();
                assert!(vals.windows(2).all(|w| w[0] <= w[1]), "t={t}");
            }
        }
    }

    #[test]
    fn combsum_examples() {
        let z = rational(0, 1);
        let r = check_combsum_bound(10, &z, &z, &rational(1, 1)).unwrap();
        assert!(r.holds && r.ratio <= 1.0);
        let r = check_combsum_bound(10, &rational(-5, 1), &rational(-3, 1), &rational(1, 10)).unwrap();
        assert!(r.holds);
        assert!(matches!(
            check_combsum_bound(10, &rational(-5, 1), &rational(-5, 1), &rational(1, 10)),
            Err(Error::Regime(_))
        ));
        assert!(check_combsum_bound(9, &z, &z, &rational(1, 1)).is_err());
    }

    #[test]
    fn norton_examples() {
        let r = norton_partial_sum(25.0, 0, 25).unwrap();
        assert!((0.1..=10.0).contains(&r.ratio));
        let r = norton_partial_sum(100.0, 10, 20).unwrap();
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
        let r = norton_partial_sum(49.0, 0, 49).unwrap();
        assert!((r.log_comparator - (49f64.ln() * 49.0 - libm::lgamma(50.0) + 7f64.ln())).abs() < 1e-9);
        assert!(norton_partial_sum(100.0, 10, 15).is_err());
        assert!(norton_partial_sum(10.0, 0, 11).is_err());
    }

    /// The sum by direct `f64` accumulation of `x^k/k!` for moderate `x`.
    #[test]
    fn norton_direct_oracle() {
        for &(x, h, m) in &[(25.0f64, 0u64, 25u64), (30.0, 5, 24), (50.5, 20, 50)] {
            let mut term = 1.0f64;
            let mut sum = 0.0;
            for k in 0..=m {
                if k > 0 {
                    term *= x / k as f64;
                }
                if k >= h {
                    sum += term;
                }
            }
            let r = norton_partial_sum(x, h, m).unwrap();
            assert!((r.log_sum - sum.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn stirling_examples() {
        assert!((stirling_check(1).unwrap() - 0.0844).abs() < 1e-4);
        assert!((stirling_check(10).unwrap() - 0.00836).abs() < 2e-5);
        let mut prev = f64::INFINITY;
        for k in 1..=50 {
            let e = stirling_check(k).unwrap();
            assert!(e < prev && e <= 0.2 / k as f64);
            prev = e;
        }
        assert!(stirling_check(0).is_err());
    }

    fn small_rational() -> impl Strategy<Value = BigRational> {
        (-40i64..40, 1i64..12)
            .prop_filter("nonzero", |(p, _)| *p != 0)
            .prop_map(|(p, q)| rational(p, q))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn abel_random(t in 1u32..=12, a in small_rational(), b in small_rational()) {
            prop_assert!(abel_identity_check(t, &a, &b).unwrap().equal);
        }
    }
}
