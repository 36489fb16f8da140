//! Deterministic nested quadrature for the Monte Carlo estimands at small `k`.
//!
//! The outer `k - 1` coordinates are integrated by adaptive Gauss–Kronrod
//! (3/7) over the range allowed by the constraints that involve only the
//! coordinates fixed so far; the innermost coordinate is integrated in
//! closed form. Ranges are split at points where the active constraint set
//! of a later coordinate can change, so that each panel sees a smooth
//! integrand.

use super::{RegionKind, RegionSpec};
use crate::{Error, Result};

/// Largest `k` handled by [`exact_small_k`].
pub const EXACT_K_MAX: usize = 6;

/// Absolute error target on the probability scale.
const TARGET: f64 = 1e-7;

const MAX_SPLITS: usize = 400;

const XGK: [f64; 4] = [
    0.960_491_268_708_020_3,
    0.774_596_669_241_483_4,
    0.434_243_749_346_802_6,
    0.0,
];
const WGK: [f64; 4] = [
    0.104_656_226_026_467_27,
    0.268_488_089_868_333_44,
    0.401_397_414_775_962_2,
    0.450_916_538_658_474_14,
];
const WG: [f64; 2] = [5.0 / 9.0, 8.0 / 9.0];

/// Gauss(3)–Kronrod(7) estimate and error on `[a, b]`.
fn gk7<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[3] * fc;
    let mut g = WG[1] * fc;
    for i in 0..3 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i == 1 {
            g += WG[0] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive integration over consecutive panels `cuts`: the panel
/// with the largest error estimate is bisected until the summed estimate
/// drops below `tol`.
fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, cuts: &[f64], tol: f64) -> f64 {
    let mut panels: Vec<(f64, f64, f64, f64)> = cuts
        .windows(2)
        .map(|w| {
            let (est, err) = gk7(f, w[0], w[1]);
            (w[0], w[1], est, err)
        })
        .collect();
    for _ in 0..MAX_SPLITS {
        let total: f64 = panels.iter().map(|p| p.3).sum();
        if total <= tol {
            break;
        }
        let (i, _) = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.partial_cmp(&b.1 .3).expect("finite error"))
            .expect("at least one panel");
        let (a, b, _, _) = panels[i];
        if b - a < 1e-13 {
            break;
        }
        let m = 0.5 * (a + b);
        let (e1, r1) = gk7(f, a, m);
        let (e2, r2) = gk7(f, m, b);
        panels[i] = (a, m, e1, r1);
        panels.push((m, b, e2, r2));
    }
    panels.iter().map(|p| p.2).sum()
}

#[derive(Clone, Copy)]
struct State {
    prev: f64,
    /// `Σ 2^{vξ_i}` (U, T) or `Σ 2^{i - vξ_i}` (Y).
    sum: f64,
    /// Running minimum of the U integrand.
    best: f64,
}

struct Nested<'a> {
    r: &'a RegionSpec,
    k: usize,
    v: f64,
    /// Constraint-free lower/upper limits per 1-based index.
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Y: `Σ_{i>j} 2^{i-v}`, the least possible contribution of later terms.
    tail: Vec<f64>,
    tol: f64,
}

impl<'a> Nested<'a> {
    fn new(r: &'a RegionSpec, tol: f64) -> Self {
        let k = r.k;
        let v = r.v;
        let mut lo = vec![0.0f64; k + 1];
        let mut hi = vec![1.0f64; k + 1];
        let mut tail = vec![0.0; k + 2];
        match r.kind {
            RegionKind::SSet => {
                let u = r.u.unwrap_or(0.0);
                for (i, l) in lo.iter_mut().enumerate().skip(1) {
                    *l = ((i as f64 - u) / v).max(0.0);
                }
            }
            RegionKind::YSet => {
                for (a, b, t) in r.y_index_conditions() {
                    lo[a] = lo[a].max(t);
                    hi[b] = hi[b].min(1.0 - t);
                }
                for j in (1..=k).rev() {
                    tail[j - 1] = tail[j] + (j as f64 - v).exp2();
                }
            }
            _ => {}
        }
        Nested {
            r,
            k,
            v,
            lo,
            hi,
            tail,
            tol,
        }
    }

    /// Lower limit of `ξ_j` given the earlier coordinates.
    fn lower(&self, j: usize, st: &State) -> f64 {
        let base = st.prev.max(self.lo[j]);
        match self.r.kind {
            RegionKind::TSet => {
                let rhs = (j as f64 - self.r.gamma.unwrap_or(0.0)).exp2() - st.sum;
                if rhs > 0.0 {
                    base.max(rhs.log2() / self.v)
                } else {
                    base
                }
            }
            RegionKind::YSet => {
                let rem = self.r.s.unwrap_or(0.0).exp2() - st.sum - self.tail[j];
                if rem <= 0.0 {
                    f64::INFINITY
                } else {
                    base.max((j as f64 - rem.log2()) / self.v)
                }
            }
            _ => base,
        }
    }

    fn advance(&self, j: usize, st: &State, x: f64) -> State {
        match self.r.kind {
            RegionKind::UIntegrand => {
                let sum = st.sum + (self.v * x).exp2();
                let term = (-(j as f64)).exp2() * (sum + self.r.alpha.unwrap_or(1.0));
                State {
                    prev: x,
                    sum,
                    best: st.best.min(term),
                }
            }
            RegionKind::TSet => State {
                prev: x,
                sum: st.sum + (self.v * x).exp2(),
                best: st.best,
            },
            RegionKind::YSet => State {
                prev: x,
                sum: st.sum + (j as f64 - self.v * x).exp2(),
                best: st.best,
            },
            RegionKind::SSet => State { prev: x, ..*st },
        }
    }

    /// `∫ over ξ_k` in closed form.
    fn innermost(&self, lo: f64, hi: f64, st: &State) -> f64 {
        if self.r.kind != RegionKind::UIntegrand {
            return hi - lo;
        }
        // min(best, A + B 2^{vx}) with A = 2^{-k}(S + α), B = 2^{-k}.
        let b = (-(self.k as f64)).exp2();
        let a = b * (st.sum + self.r.alpha.unwrap_or(1.0));
        let mn = st.best;
        let v = self.v;
        let at = |x: f64| a + b * (v * x).exp2();
        if at(lo) >= mn {
            return mn * (hi - lo);
        }
        let cross = ((mn - a) / b).log2() / v;
        let x1 = cross.min(hi);
        let ln2 = std::f64::consts::LN_2;
        a * (x1 - lo) + b * ((v * x1).exp2() - (v * lo).exp2()) / (v * ln2) + mn * (hi - x1)
    }

    /// Points in `(lo, hi)` where the integrand in `ξ_j` may lose smoothness.
    fn breakpoints(&self, j: usize, st: &State, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts: Vec<f64> = Vec::new();
        pts.extend(self.lo[j + 1..].iter().copied());
        pts.extend(self.hi[j + 1..].iter().copied());
        let v = self.v;
        let rest = self.k - j + 1;
        match self.r.kind {
            RegionKind::TSet => {
                // `a` coordinates at x and `b` at 1 make constraint j+a+b-1 tight.
                let g = self.r.gamma.unwrap_or(0.0);
                for a in 1..=rest {
                    for b in 0..=rest - a {
                        let rhs = ((j + a + b - 1) as f64 - g).exp2() - st.sum - b as f64 * v.exp2();
                        if rhs > 0.0 {
                            pts.push((rhs / a as f64).log2() / v);
                        }
                    }
                }
            }
            RegionKind::YSet => {
                let s2 = self.r.s.unwrap_or(0.0).exp2();
                for a in 1..=rest {
                    for b in 0..=rest - a {
                        let at_one: f64 = (j + a..j + a + b).map(|i| (i as f64 - v).exp2()).sum();
                        let later = self.tail[j + a + b - 1];
                        let coef: f64 = (j..j + a).map(|i| (i as f64).exp2()).sum();
                        let rem = s2 - st.sum - at_one - later;
                        if rem > 0.0 {
                            pts.push((coef / rem).log2() / v);
                        }
                    }
                }
            }
            RegionKind::UIntegrand => {
                let alpha = self.r.alpha.unwrap_or(1.0);
                // Ties between the running minimum and later terms with `a`
                // coordinates at x.
                for a in 1..=rest {
                    let scale = (-((j + a - 1) as f64)).exp2();
                    let rhs = st.best / scale - st.sum - alpha;
                    if rhs > 0.0 {
                        pts.push((rhs / a as f64).log2() / v);
                    }
                }
            }
            RegionKind::SSet => {}
        }
        pts.retain(|p| p.is_finite() && *p > lo && *p < hi);
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        pts
    }

    fn level(&self, j: usize, st: State) -> f64 {
        let lo = self.lower(j, &st);
        let hi = self.hi[j];
        if !(lo < hi) {
            return 0.0;
        }
        if j == self.k {
            return self.innermost(lo, hi, &st);
        }
        let mut cuts = vec![lo];
        cuts.extend(self.breakpoints(j, &st, lo, hi));
        cuts.push(hi);
        let mut f = |x: f64| self.level(j + 1, self.advance(j, &st, x));
        adaptive(&mut f, &cuts, self.tol)
    }
}

/// Deterministic value of the Monte Carlo estimand (`k! · Vol` or `k! · ∫`)
/// for `k <= 6`.
pub fn exact_small_k(region: &RegionSpec) -> Result<f64> {
    region.validate()?;
    if region.k > EXACT_K_MAX {
        return Err(Error::Capacity {
            what: "k",
            requested: region.k as u64,
            limit: EXACT_K_MAX as u64,
        });
    }
    if region.k == 0 {
        return Ok(region.alpha.unwrap_or(1.0));
    }
    let fact: f64 = (1..=region.k).map(|i| i as f64).product();
    let nested = Nested::new(region, TARGET / fact);
    let start = State {
        prev: 0.0,
        sum: 0.0,
        best: region.alpha.unwrap_or(1.0),
    };
    Ok(fact * nested.level(1, start))
}
