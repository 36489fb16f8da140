use serde::{Deserialize, Serialize};

use super::{mc_estimate, MCEstimate, RegionSpec};
use crate::{Error, Result};

/// Ceiling on the ratio of the estimated `U_k(v;α)` to its bound expression.
pub const UNLEM_CEILING: f64 = 50.0;

/// `α min(k+1, (1 + |v - k - log2 α|²) log(2/α)) / ((k+1)! (α 2^{k-v} + 1))`,
/// multiplied by `k!` to match the probability-scale estimate.
pub fn unlem_bound(k: u32, v: u32, alpha: f64) -> f64 {
    let kf = k as f64;
    let vf = v as f64;
    let dev = vf - kf - alpha.log2();
    let inner = (kf + 1.0).min((1.0 + dev * dev) * (2.0 / alpha).ln());
    alpha * inner / ((kf + 1.0) * (alpha * (kf - vf).exp2() + 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnlemReport {
    pub k: u32,
    pub v: u32,
    pub alpha: f64,
    /// Estimate of `k! U_k(v;α)`.
    pub estimate: MCEstimate,
    /// `k!` times the bound expression.
    pub bound: f64,
    pub ratio: f64,
    pub ceiling: f64,
    pub holds: bool,
}

/// Estimates `U_k(v;α)` and compares it with the bound
/// `α min(k+1, (1+|v-k-log α/log 2|²) log(2/α)) / ((k+1)!(α 2^{k-v}+1))`.
/// Requires integers `0 <= k <= 10v` and `0 < α <= 1`.
pub fn check_unlem(k: u32, v: u32, alpha: f64, n: u64, seed: u64) -> Result<UnlemReport> {
    if v == 0 || k > 10 * v {
        return Err(Error::Regime(format!("need v >= 1 and 0 <= k <= 10v, got k={k}, v={v}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Regime(format!("need 0 < α <= 1, got {alpha}")));
    }
    let estimate = mc_estimate(&RegionSpec::u_integrand(k as usize, v as f64, alpha), n, seed)?;
    let bound = unlem_bound(k, v, alpha);
    let ratio = estimate.mean / bound;
    Ok(UnlemReport {
        k,
        v,
        alpha,
        estimate,
        bound,
        ratio,
        ceiling: UNLEM_CEILING,
        holds: ratio.is_finite() && ratio <= UNLEM_CEILING,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolYReport {
    pub k: usize,
    pub v: f64,
    pub s: f64,
    pub m: usize,
    /// Estimate of `k! Vol(Y_k(s,v))`.
    pub estimate: MCEstimate,
    /// `(k - v + 1)/(k + 1)`, the lower-bound shape on the same scale.
    pub target: f64,
    pub ratio: f64,
    /// `mean - 3 stderr > 0`.
    pub positive: bool,
}

/// Estimates `k! Vol(Y_k(s,v))` under `v >= 1`, `10M <= k <= 100(v-1)`,
/// `s >= M/2 + 1` and `0 <= k - v <= s - M/3 - 1`.
pub fn check_volynsv(k: usize, v: f64, s: f64, m: usize, n: u64, seed: u64) -> Result<VolYReport> {
    let (kf, mf) = (k as f64, m as f64);
    if m == 0 {
        return Err(Error::Regime("need M >= 1".into()));
    }
    if !(v >= 1.0) {
        return Err(Error::Regime(format!("need v >= 1, got {v}")));
    }
    if !(10.0 * mf <= kf && kf <= 100.0 * (v - 1.0)) {
        return Err(Error::Regime(format!("need 10M <= k <= 100(v-1), got k={k}, M={m}, v={v}")));
    }
    if !(s >= mf / 2.0 + 1.0) {
        return Err(Error::Regime(format!("need s >= M/2 + 1, got s={s}")));
    }
    if !(kf - v >= 0.0 && kf - v <= s - mf / 3.0 - 1.0) {
        return Err(Error::Regime(format!("need 0 <= k - v <= s - M/3 - 1, got k-v={}", kf - v)));
    }
    let estimate = mc_estimate(&RegionSpec::y_set(k, v, s, m), n, seed)?;
    let target = (kf - v + 1.0) / (kf + 1.0);
    Ok(VolYReport {
        k,
        v,
        s,
        m,
        estimate,
        target,
        ratio: estimate.mean / target,
        positive: estimate.mean - 3.0 * estimate.stderr > 0.0,
    })
}
