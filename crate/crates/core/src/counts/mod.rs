//! Exact counts of integers with a divisor in `(y, z]`.
//!
//! All counts treat `y` and `z` as reals and use only the integers
//! `d` with `y < d <= z`. The default method marks every multiple of every
//! such `d` in a segmented bitset (or a per-`n` counter array for `H_r`);
//! the per-`n` enumeration method walks divisor lists from a
//! [`FactorTable`] and serves as the fallback when marking is too costly.

mod engine;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use engine::Filter;
use engine::Query;

use crate::arith::{integer_window, FactorTable, DEFAULT_MEMORY_CEILING};
use crate::{Error, Result};

/// Largest supported `x`.
pub const MAX_X: u64 = 10_000_000_000;

/// A counting query `(x, y, z)` with optional window length, exact-multiplicity
/// `r`, squarefree restriction and prime shift `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub x: u64,
    pub y: f64,
    pub z: f64,
    #[serde(default)]
    pub delta: Option<u64>,
    #[serde(default)]
    pub r: Option<u32>,
    #[serde(default)]
    pub shift: Option<i64>,
    #[serde(default)]
    pub squarefree: bool,
}

impl WindowSpec {
    pub fn new(x: u64, y: f64, z: f64) -> Self {
        WindowSpec {
            x,
            y,
            z,
            delta: None,
            r: None,
            shift: None,
            squarefree: false,
        }
    }

    pub fn with_r(mut self, r: u32) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_delta(mut self, delta: u64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_shift(mut self, shift: i64) -> Self {
        self.shift = Some(shift);
        self
    }

    pub fn squarefree(mut self) -> Self {
        self.squarefree = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.x == 0 {
            return Err(Error::Spec("x must be >= 1".into()));
        }
        if self.x > MAX_X {
            return Err(Error::Capacity {
                what: "x",
                requested: self.x,
                limit: MAX_X,
            });
        }
        if !(self.y.is_finite() && self.z.is_finite()) || self.y < 0.0 || self.y > self.z {
            return Err(Error::Spec(format!(
                "need 0 <= y <= z, got y={}, z={}",
                self.y, self.z
            )));
        }
        if let Some(d) = self.delta {
            if d == 0 || d > self.x {
                return Err(Error::Spec(format!("need 0 < delta <= x, got {d}")));
            }
        }
        if let Some(l) = self.shift {
            if l == 0 {
                return Err(Error::Spec("shift must be non-zero".into()));
            }
            if self.x as i128 + (l.unsigned_abs() as i128) > MAX_X as i128 {
                return Err(Error::Capacity {
                    what: "x + |shift|",
                    requested: self.x.saturating_add(l.unsigned_abs()),
                    limit: MAX_X,
                });
            }
        }
        Ok(())
    }

    fn filter(&self) -> Filter {
        Filter {
            squarefree: self.squarefree,
            shift: self.shift,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DivisorMarking,
    PerNEnumeration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub spec: WindowSpec,
    pub value: u64,
    /// Wall-clock seconds.
    pub elapsed: f64,
    pub method: Method,
}

/// Selects which count [`count_window`] differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    H,
    HStar,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountConfig {
    /// Integers per segment (one bit each in the marking bitset).
    pub segment_len: u64,
    /// Marking work above which a long window switches to per-`n` enumeration.
    pub op_budget: f64,
    pub parallel: bool,
    /// Memory guard passed to [`FactorTable`] for the per-`n` method.
    pub table_ceiling: u64,
}

impl Default for CountConfig {
    fn default() -> Self {
        CountConfig {
            segment_len: 1 << 22,
            op_budget: 1e12,
            parallel: true,
            table_ceiling: DEFAULT_MEMORY_CEILING,
        }
    }
}

/// Divisor-in-interval counter with a fixed configuration.
#[derive(Debug, Clone, Copy, Default)]
pub struct IntervalCounter {
    pub config: CountConfig,
}

impl IntervalCounter {
    pub fn new(config: CountConfig) -> Self {
        IntervalCounter { config }
    }

    fn query(&self, spec: &WindowSpec) -> Result<Query> {
        spec.validate()?;
        let (dlo, dhi) = integer_window(spec.y, spec.z)?;
        let a = spec.delta.map_or(0, |d| spec.x - d);
        Ok(Query {
            a,
            b: spec.x,
            dlo,
            dhi,
            filter: spec.filter(),
            segment_len: self.config.segment_len.max(64),
            parallel: self.config.parallel,
        })
    }

    /// Method the counter would use for `spec`.
    pub fn choose_method(&self, spec: &WindowSpec) -> Result<Method> {
        let q = self.query(spec)?;
        let long_window = spec.z - spec.y > (spec.x as f64).sqrt();
        if long_window
            && q.marking_cost() > self.config.op_budget
            && spec.x <= self.config.table_ceiling
        {
            Ok(Method::PerNEnumeration)
        } else {
            Ok(Method::DivisorMarking)
        }
    }

    /// Evaluates a full [`WindowSpec`]: with `r` set, counts `τ(n;y,z) = r`,
    /// otherwise `τ(n;y,z) >= 1`; restricted to `(x-Δ, x]`, squarefree `n`
    /// and `n - λ` prime as requested.
    pub fn evaluate(&self, spec: &WindowSpec) -> Result<CountResult> {
        let start = Instant::now();
        let method = self.choose_method(spec)?;
        let value = match method {
            Method::DivisorMarking => self.evaluate_marking(spec)?,
            Method::PerNEnumeration => evaluate_per_n(spec, self.config.table_ceiling)?,
        };
        Ok(CountResult {
            spec: spec.clone(),
            value,
            elapsed: start.elapsed().as_secs_f64(),
            method,
        })
    }

    /// Evaluates with the given method regardless of cost.
    pub fn evaluate_with(&self, spec: &WindowSpec, method: Method) -> Result<u64> {
        match method {
            Method::DivisorMarking => self.evaluate_marking(spec),
            Method::PerNEnumeration => evaluate_per_n(spec, self.config.table_ceiling),
        }
    }

    fn evaluate_marking(&self, spec: &WindowSpec) -> Result<u64> {
        let q = self.query(spec)?;
        match spec.r {
            None => Ok(q.count_any()),
            Some(0) => Ok(q.count_filtered() - q.count_any()),
            Some(r) => Ok(q.histogram()?.get(r as usize).copied().unwrap_or(0)),
        }
    }

    fn value(&self, spec: WindowSpec) -> Result<u64> {
        Ok(self.evaluate(&spec)?.value)
    }

    /// `H(x, y, z)`.
    pub fn count_h(&self, x: u64, y: f64, z: f64) -> Result<u64> {
        self.value(WindowSpec::new(x, y, z))
    }

    /// `H_r(x, y, z)`.
    pub fn count_hr(&self, x: u64, y: f64, z: f64, r: u32) -> Result<u64> {
        self.value(WindowSpec::new(x, y, z).with_r(r))
    }

    /// `H*(x, y, z)`: squarefree `n` only.
    pub fn count_h_star(&self, x: u64, y: f64, z: f64) -> Result<u64> {
        self.value(WindowSpec::new(x, y, z).squarefree())
    }

    /// `hist[r] = H_r(x, y, z)` for every `r` that occurs.
    pub fn histogram(&self, x: u64, y: f64, z: f64) -> Result<Vec<u64>> {
        self.query(&WindowSpec::new(x, y, z))?.histogram()
    }

    /// `H(x,y,z) - H(x-Δ,y,z)` (or the `H*` analogue) from one pass over `(x-Δ, x]`.
    pub fn count_window(&self, x: u64, delta: u64, y: f64, z: f64, variant: Variant) -> Result<u64> {
        let mut spec = WindowSpec::new(x, y, z).with_delta(delta);
        spec.squarefree = variant == Variant::HStar;
        self.value(spec)
    }

    /// `H(x, y, z; P_λ)`: `n <= x` with `n - λ` prime and a divisor in `(y, z]`.
    pub fn count_shifted_primes(&self, x: u64, y: f64, z: f64, shift: i64) -> Result<u64> {
        self.value(WindowSpec::new(x, y, z).with_shift(shift))
    }

    /// Raw ratios `H(x, y, z) / x` along an increasing grid of `x`.
    pub fn density_estimate(&self, y: f64, z: f64, x_grid: &[u64]) -> Result<Vec<(u64, f64)>> {
        if x_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Spec("x grid must be strictly increasing".into()));
        }
        x_grid
            .iter()
            .map(|&x| Ok((x, self.count_h(x, y, z)? as f64 / x as f64)))
            .collect()
    }
}

fn evaluate_per_n(spec: &WindowSpec, ceiling: u64) -> Result<u64> {
    spec.validate()?;
    let table = FactorTable::build_with_ceiling(spec.x.max(2), ceiling)?;
    let a = spec.delta.map_or(0, |d| spec.x - d);
    let base = spec
        .shift
        .map(|l| crate::arith::primes_up_to(crate::arith::isqrt((spec.x as i128 - l as i128).max(0) as u64) + 1));
    let mut count = 0;
    for n in a + 1..=spec.x {
        if spec.squarefree && !table.is_squarefree(n)? {
            continue;
        }
        if let (Some(l), Some(base)) = (spec.shift, base.as_ref()) {
            let q = n as i128 - l as i128;
            if q < 2 || !crate::arith::segment_primality(q as u64, q as u64 + 1, base)[0] {
                continue;
            }
        }
        let t = table.divisors(n)?.count_in(spec.y, spec.z);
        let hit = match spec.r {
            None => t >= 1,
            Some(r) => t == r as u64,
        };
        if hit {
            count += 1;
        }
    }
    Ok(count)
}

/// `H(x, y, z)` with the default configuration.
pub fn count_h(x: u64, y: f64, z: f64) -> Result<u64> {
    IntervalCounter::default().count_h(x, y, z)
}

/// `H_r(x, y, z)` with the default configuration.
pub fn count_hr(x: u64, y: f64, z: f64, r: u32) -> Result<u64> {
    IntervalCounter::default().count_hr(x, y, z, r)
}

/// `H*(x, y, z)` with the default configuration.
pub fn count_h_star(x: u64, y: f64, z: f64) -> Result<u64> {
    IntervalCounter::default().count_h_star(x, y, z)
}

pub fn count_window(x: u64, delta: u64, y: f64, z: f64, variant: Variant) -> Result<u64> {
    IntervalCounter::default().count_window(x, delta, y, z, variant)
}

pub fn count_shifted_primes(x: u64, y: f64, z: f64, shift: i64) -> Result<u64> {
    IntervalCounter::default().count_shifted_primes(x, y, z, shift)
}

pub fn density_estimate(y: f64, z: f64, x_grid: &[u64]) -> Result<Vec<(u64, f64)>> {
    IntervalCounter::default().density_estimate(y, z, x_grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> IntervalCounter {
        IntervalCounter::new(CountConfig {
            segment_len: 64,
            ..CountConfig::default()
        })
    }

    #[test]
    fn h_examples() {
        assert_eq!(count_h(100, 3.0, 4.0).unwrap(), 25);
        assert_eq!(count_h(20, 2.0, 4.0).unwrap(), 10);
        assert_eq!(count_h(1000, 7.2, 7.9).unwrap(), 0);
        assert_eq!(count_h(1000, 7.2, 8.0).unwrap(), 125);
    }

    #[test]
    fn hr_examples() {
        assert_eq!(count_hr(20, 2.0, 4.0, 1).unwrap(), 9);
        assert_eq!(count_hr(20, 2.0, 4.0, 2).unwrap(), 1);
        assert_eq!(count_hr(20, 2.0, 4.0, 0).unwrap(), 10);
        // r beyond log2(x) + 1 cannot occur.
        assert_eq!(count_hr(1000, 1.0, 1000.0, 12).unwrap(), 0);
    }

    #[test]
    fn h_star_examples() {
        assert_eq!(count_h_star(100, 3.0, 4.0).unwrap(), 0);
        assert_eq!(count_h_star(20, 2.0, 4.0).unwrap(), 3);
        // Squarefree n <= 10 are 1,2,3,5,6,7,10; n = 1 has no divisor in (1,10].
        assert_eq!(count_h_star(10, 1.0, 10.0).unwrap(), 6);
    }

    #[test]
    fn window_examples() {
        assert_eq!(count_window(100, 100, 3.0, 4.0, Variant::H).unwrap(), 25);
        assert_eq!(count_window(100, 50, 3.0, 4.0, Variant::H).unwrap(), 13);
        assert_eq!(count_window(20, 10, 2.0, 4.0, Variant::H).unwrap(), 5);
        assert_eq!(count_window(20, 10, 2.0, 4.0, Variant::HStar).unwrap(), 1);
    }

    #[test]
    fn shifted_prime_examples() {
        assert_eq!(count_shifted_primes(20, 2.0, 4.0, 1).unwrap(), 7);
        assert_eq!(count_shifted_primes(20, 2.0, 4.0, -1).unwrap(), 5);
        // n - 30 is never prime for n <= 20.
        assert_eq!(count_shifted_primes(20, 2.0, 4.0, 30).unwrap(), 0);
    }

    #[test]
    fn density_examples() {
        assert_eq!(density_estimate(3.0, 4.0, &[100]).unwrap(), vec![(100, 0.25)]);
        assert_eq!(density_estimate(2.0, 4.0, &[20]).unwrap(), vec![(20, 0.5)]);
        let d = density_estimate(6.5, 6.5, &[10, 100]).unwrap();
        assert_eq!(d, vec![(10, 0.0), (100, 0.0)]);
        let d = density_estimate(6.5, 7.0, &[14, 100]).unwrap();
        assert_eq!(d, vec![(14, 2.0 / 14.0), (100, 0.14)]);
        assert!(density_estimate(2.0, 4.0, &[20, 10]).is_err());
    }

    #[test]
    fn validation_errors() {
        assert!(count_h(0, 1.0, 2.0).is_err());
        assert!(count_h(10, 3.0, 2.0).is_err());
        assert!(count_window(10, 11, 1.0, 2.0, Variant::H).is_err());
        assert!(count_shifted_primes(10, 1.0, 2.0, 0).is_err());
        assert!(matches!(count_h(MAX_X + 1, 1.0, 2.0), Err(Error::Capacity { .. })));
    }

    #[test]
    fn tiny_segments_agree_with_default() {
        let c = small();
        for &(x, y, z) in &[(1000u64, 3.5, 40.0), (999, 30.0, 700.0), (777, 0.0, 5.0)] {
            assert_eq!(c.count_h(x, y, z).unwrap(), count_h(x, y, z).unwrap());
            assert_eq!(c.histogram(x, y, z).unwrap(), IntervalCounter::default().histogram(x, y, z).unwrap());
            assert_eq!(c.count_h_star(x, y, z).unwrap(), count_h_star(x, y, z).unwrap());
            assert_eq!(
                c.count_shifted_primes(x, y, z, -3).unwrap(),
                count_shifted_primes(x, y, z, -3).unwrap()
            );
        }
    }

    #[test]
    fn per_n_method_agrees_and_is_selected_under_budget() {
        let tight = IntervalCounter::new(CountConfig {
            op_budget: 10.0,
            ..CountConfig::default()
        });
        let spec = WindowSpec::new(5000, 10.0, 3000.0).with_r(2).squarefree();
        assert_eq!(tight.choose_method(&spec).unwrap(), Method::PerNEnumeration);
        let res = tight.evaluate(&spec).unwrap();
        assert_eq!(res.method, Method::PerNEnumeration);
        assert_eq!(
            res.value,
            IntervalCounter::default().evaluate_with(&spec, Method::DivisorMarking).unwrap()
        );
        // Short windows never switch.
        let short = WindowSpec::new(5000, 10.0, 20.0);
        assert_eq!(tight.choose_method(&short).unwrap(), Method::DivisorMarking);
    }

    #[test]
    fn shifted_windowed_and_squarefree_combine() {
        let spec = WindowSpec::new(3000, 5.0, 60.0).with_delta(1200).with_shift(2).squarefree().with_r(1);
        let c = IntervalCounter::default();
        assert_eq!(
            c.evaluate_with(&spec, Method::DivisorMarking).unwrap(),
            c.evaluate_with(&spec, Method::PerNEnumeration).unwrap()
        );
    }
}
