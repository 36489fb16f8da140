//! Field scalars shared by the numeric modules.
//!
//! Binary floats and [`BigRational`] both implement [`Scalar`], so recursions
//! such as the order-statistics boundary recursion and the combinatorial sums
//! can be evaluated either in floating point or exactly.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

pub trait Scalar: Num + Neg<Output = Self> + Clone + Debug + PartialOrd + Send + Sync {
    /// `true` when arithmetic is exact (no rounding).
    const EXACT: bool;

    fn of_int(v: i64) -> Self;

    /// Converts a finite `f64`. Rational scalars take the exact binary value.
    fn of_f64(v: f64) -> Self;

    fn approx(&self) -> f64;

    /// Integer power; negative exponents invert.
    fn pow_int(&self, e: i32) -> Self {
        let mut acc = Self::one();
        let mut base = if e < 0 { Self::one() / self.clone() } else { self.clone() };
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            k >>= 1;
        }
        acc
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn max_val(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_val(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn of_int(v: i64) -> Self {
                v as $t
            }

            fn of_f64(v: f64) -> Self {
                v as $t
            }

            fn approx(&self) -> f64 {
                *self as f64
            }

            fn pow_int(&self, e: i32) -> Self {
                <$t>::powi(*self, e)
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn of_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn of_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite f64")
    }

    fn approx(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }
}

/// Nearest-ish `f64` for a big rational, robust when numerator and
/// denominator individually overflow `f64`.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both to ~64 significant bits before dividing.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 64).max(0);
    let shift_d = (db - 64).max(0);
    let n = (r.numer() >> shift_n as usize).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap_or(f64::NAN);
    let e = shift_n - shift_d;
    (n / d) * 2f64.powi(e.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}

/// `p/q` as a big rational.
pub fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Exact rational lower bound for `exp(c)`, `c >= 0`, from a truncated
/// Taylor series (every dropped term is positive).
pub fn exp_lower_bound(c: &BigRational, terms: u32) -> BigRational {
    assert!(!c.is_negative(), "exp_lower_bound needs c >= 0");
    let mut sum = BigRational::one();
    let mut term = BigRational::one();
    for n in 1..=terms {
        term = term * c / BigRational::from_integer(BigInt::from(n));
        sum += term.clone();
    }
    sum
}

/// Rational enclosure `(lo, hi)` of `ln 2` with width below `2^-bits`,
/// from `ln 2 = Σ_{k≥1} 1/(k 2^k)`.
pub fn ln2_bracket(bits: u32) -> (BigRational, BigRational) {
    let mut lo = BigRational::zero();
    let mut k: u32 = 1;
    loop {
        let term = BigRational::new(BigInt::one(), BigInt::from(k) << (k as usize));
        lo += term;
        // Tail after term k is below 1/((k+1) 2^k).
        if k > bits {
            let tail = BigRational::new(BigInt::one(), BigInt::from(k + 1) << (k as usize));
            return (lo.clone(), lo + tail);
        }
        k += 1;
    }
}
