//! Monte Carlo volumes of regions of the ordered simplex
//! `R_k = {0 <= ξ_1 <= ... <= ξ_k <= 1}`.
//!
//! Every estimand is reported on the probability scale `k! · Vol` (or
//! `k! · ∫`), i.e. as an expectation over `k` sorted independent uniforms.

mod checks;
mod quadrature;

pub use checks::{check_unlem, check_volynsv, unlem_bound, UnlemReport, VolYReport, UNLEM_CEILING};
pub use quadrature::{exact_small_k, EXACT_K_MAX};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Samples per independently seeded batch.
pub const BATCH: u64 = 4096;

/// Smallest accepted sample count.
pub const MIN_SAMPLES: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionKind {
    /// `min_{0<=j<=k} 2^{-j} (2^{vξ_1} + ... + 2^{vξ_j} + α)`.
    #[serde(rename = "U")]
    UIntegrand,
    /// Ordered points with the index conditions `ξ_{M+i²} > i/v`,
    /// `ξ_{k+1-(M+i²)} < 1 - i/v` for `1 <= i <= √(k-M)`, and
    /// `Σ_j 2^{j - vξ_j} <= 2^s`.
    #[serde(rename = "Y")]
    YSet,
    /// `2^{vξ_1} + ... + 2^{vξ_j} >= 2^{j-γ}` for `1 <= j <= k`.
    #[serde(rename = "T")]
    TSet,
    /// `ξ_i >= (i - u)/v` for every `i`.
    #[serde(rename = "S")]
    SSet,
}

impl std::str::FromStr for RegionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "U" | "u" => Ok(RegionKind::UIntegrand),
            "Y" | "y" => Ok(RegionKind::YSet),
            "T" | "t" => Ok(RegionKind::TSet),
            "S" | "s" => Ok(RegionKind::SSet),
            _ => Err(Error::Lookup {
                kind: "region kind",
                id: s.to_string(),
            }),
        }
    }
}

impl std::fmt::Display for RegionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegionKind::UIntegrand => "U",
            RegionKind::YSet => "Y",
            RegionKind::TSet => "T",
            RegionKind::SSet => "S",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub k: usize,
    pub v: f64,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub u: Option<f64>,
    #[serde(default)]
    pub m: Option<usize>,
}

/// Default `M` for the `Y` region.
pub const DEFAULT_M: usize = 10;

impl RegionSpec {
    fn base(kind: RegionKind, k: usize, v: f64) -> Self {
        RegionSpec {
            kind,
            k,
            v,
            alpha: None,
            s: None,
            gamma: None,
            u: None,
            m: None,
        }
    }

    pub fn u_integrand(k: usize, v: f64, alpha: f64) -> Self {
        RegionSpec {
            alpha: Some(alpha),
            ..Self::base(RegionKind::UIntegrand, k, v)
        }
    }

    pub fn y_set(k: usize, v: f64, s: f64, m: usize) -> Self {
        RegionSpec {
            s: Some(s),
            m: Some(m),
            ..Self::base(RegionKind::YSet, k, v)
        }
    }

    pub fn t_set(k: usize, v: f64, gamma: f64) -> Self {
        RegionSpec {
            gamma: Some(gamma),
            ..Self::base(RegionKind::TSet, k, v)
        }
    }

    pub fn s_set(k: usize, u: f64, v: f64) -> Self {
        RegionSpec {
            u: Some(u),
            ..Self::base(RegionKind::SSet, k, v)
        }
    }

    fn need(&self, value: Option<f64>, name: &str) -> Result<f64> {
        match value {
            Some(x) if x.is_finite() => Ok(x),
            Some(x) => Err(Error::Spec(format!("{} region: {name} = {x} is not finite", self.kind))),
            None => Err(Error::Spec(format!("{} region needs {name}", self.kind))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v > 0.0 && self.v.is_finite()) {
            return Err(Error::Spec(format!("{} region needs finite v > 0, got {}", self.kind, self.v)));
        }
        if self.k == 0 && self.kind != RegionKind::UIntegrand {
            return Err(Error::Spec(format!("{} region needs k >= 1", self.kind)));
        }
        match self.kind {
            RegionKind::UIntegrand => {
                let a = self.need(self.alpha, "alpha")?;
                if a <= 0.0 {
                    return Err(Error::Spec(format!("U region needs alpha > 0, got {a}")));
                }
                if self.k as f64 > 10.0 * self.v {
                    return Err(Error::Spec(format!("U region needs k <= 10v, got k={}, v={}", self.k, self.v)));
                }
            }
            RegionKind::YSet => {
                self.need(self.s, "s")?;
                if self.m.is_none_or(|m| m == 0) {
                    return Err(Error::Spec("Y region needs M >= 1".into()));
                }
            }
            RegionKind::TSet => {
                self.need(self.gamma, "gamma")?;
            }
            RegionKind::SSet => {
                self.need(self.u, "u")?;
            }
        }
        Ok(())
    }

    /// Index pairs `(M+i², k+1-(M+i²))` (1-based) for `1 <= i <= √(k-M)`.
    pub(crate) fn y_index_conditions(&self) -> Vec<(usize, usize, f64)> {
        let m = self.m.unwrap_or(DEFAULT_M);
        let mut out = Vec::new();
        if self.k <= m {
            return out;
        }
        let mut i = 1;
        while i * i <= self.k - m {
            out.push((m + i * i, self.k + 1 - (m + i * i), i as f64 / self.v));
            i += 1;
        }
        out
    }

    /// The estimand at one sorted point.
    pub fn evaluate(&self, xi: &[f64]) -> f64 {
        let v = self.v;
        match self.kind {
            RegionKind::UIntegrand => {
                let alpha = self.alpha.unwrap_or(1.0);
                let mut sum = 0.0;
                let mut best = alpha;
                let mut scale = 1.0;
                for &x in xi {
                    sum += (v * x).exp2();
                    scale *= 0.5;
                    best = best.min(scale * (sum + alpha));
                }
                best
            }
            RegionKind::SSet => {
                let u = self.u.unwrap_or(0.0);
                let ok = xi.iter().enumerate().all(|(i, &x)| x >= (i as f64 + 1.0 - u) / v);
                ok as u8 as f64
            }
            RegionKind::TSet => {
                let gamma = self.gamma.unwrap_or(0.0);
                // Running log2 of Σ 2^{vξ_i}.
                let mut log_sum = f64::NEG_INFINITY;
                for (j, &x) in xi.iter().enumerate() {
                    log_sum = log2_add(log_sum, v * x);
                    if log_sum < (j + 1) as f64 - gamma {
                        return 0.0;
                    }
                }
                1.0
            }
            RegionKind::YSet => {
                let s = self.s.unwrap_or(0.0);
                if xi.last().is_some_and(|&x| x >= 1.0) {
                    return 0.0;
                }
                for (lo_idx, hi_idx, t) in self.y_index_conditions() {
                    if !(xi[lo_idx - 1] > t && xi[hi_idx - 1] < 1.0 - t) {
                        return 0.0;
                    }
                }
                let log_sum = xi
                    .iter()
                    .enumerate()
                    .fold(f64::NEG_INFINITY, |acc, (j, &x)| log2_add(acc, (j + 1) as f64 - v * x));
                (log_sum <= s) as u8 as f64
            }
        }
    }
}

/// `log2(2^a + 2^b)`.
pub(crate) fn log2_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Fills `buf` with sorted uniforms from `rng`.
fn sorted_uniforms(rng: &mut ChaCha8Rng, buf: &mut [f64]) {
    for x in buf.iter_mut() {
        *x = rng.random::<f64>();
    }
    buf.sort_unstable_by(|a, b| a.partial_cmp(b).expect("uniforms are finite"));
}

/// Estimates several regions of equal `k` on the same sorted samples.
///
/// Batch `b` draws from ChaCha8 seeded with `seed` on stream `b`; per-batch
/// sums are combined in batch order, so results depend only on
/// `(regions, n, seed)`.
pub fn mc_estimate_crn(regions: &[RegionSpec], n: u64, seed: u64) -> Result<Vec<MCEstimate>> {
    if n < MIN_SAMPLES {
        return Err(Error::Spec(format!("need at least {MIN_SAMPLES} samples, got {n}")));
    }
    let Some(first) = regions.first() else {
        return Ok(Vec::new());
    };
    for r in regions {
        r.validate()?;
        if r.k != first.k {
            return Err(Error::Spec("common-sample regions must share k".into()));
        }
    }
    let k = first.k;
    let nb = n.div_ceil(BATCH);
    let batch_sums: Vec<Vec<(f64, f64)>> = (0..nb)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BATCH.min(n - b * BATCH);
            let mut buf = vec![0.0; k];
            let mut acc = vec![(0.0, 0.0); regions.len()];
            for _ in 0..count {
                sorted_uniforms(&mut rng, &mut buf);
                for (a, r) in acc.iter_mut().zip(regions) {
                    let val = r.evaluate(&buf);
                    a.0 += val;
                    a.1 += val * val;
                }
            }
            acc
        })
        .collect();
    let nf = n as f64;
    Ok((0..regions.len())
        .map(|i| {
            let (sum, sq) = batch_sums
                .iter()
                .fold((0.0, 0.0), |(s, q), b| (s + b[i].0, q + b[i].1));
            let mean = sum / nf;
            let var = ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
            MCEstimate {
                mean,
                stderr: (var / nf).sqrt(),
                samples: n,
                seed,
            }
        })
        .collect())
}

/// Monte Carlo estimate of `k! · Vol` (or `k! · ∫`) for one region.
/// `U` with `k = 0` is the constant `α` and is returned without sampling.
pub fn mc_estimate(region: &RegionSpec, n: u64, seed: u64) -> Result<MCEstimate> {
    region.validate()?;
    if region.kind == RegionKind::UIntegrand && region.k == 0 {
        if n < MIN_SAMPLES {
            return Err(Error::Spec(format!("need at least {MIN_SAMPLES} samples, got {n}")));
        }
        return Ok(MCEstimate {
            mean: region.alpha.unwrap_or(1.0),
            stderr: 0.0,
            samples: n,
            seed,
        });
    }
    Ok(mc_estimate_crn(std::slice::from_ref(region), n, seed)?.remove(0))
}
