//! Named counters and predictors for grid scans.
//!
//! A counter maps a grid point to a value; a predictor gives the predicted
//! value of the same quantity, and the row ratio is `value / predicted`.
//! For window counts the order predictors scale the predicted density by `x`
//! (ratio `H / (prediction · x)`); `order_hr_ratio` against a count counter
//! scales by the exact `H(x, y, z)`, and against `H1_over_H` it is used as is.

use crate::counts::{IntervalCounter, WindowSpec};
use crate::harness::config::GridPoint;
use crate::mc::{exact_small_k, mc_estimate, unlem_bound};
use crate::shape::{erdos_delta, order_h, order_hr_ratio};
use crate::{Error, Result};

/// Value of a counter at one point; `stderr` is set for Monte Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub stderr: Option<f64>,
}

impl Measured {
    fn exact(value: f64) -> Self {
        Measured { value, stderr: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// A count of integers `n <= x`.
    Count,
    /// A count relative to `H(x, y, z)`.
    RatioToH,
    /// `k!` times a region volume.
    Volume,
}

/// Shared context for evaluating counters at grid points.
#[derive(Debug, Clone, Copy)]
pub struct EvalContext {
    pub counter: IntervalCounter,
    pub samples: u64,
    pub seed: u64,
}

type CounterFn = fn(&EvalContext, &GridPoint) -> Result<Measured>;
type PredictorFn = fn(&EvalContext, Quantity, &GridPoint) -> Result<f64>;

pub struct CounterDef {
    pub id: &'static str,
    pub about: &'static str,
    pub quantity: Quantity,
    eval: CounterFn,
}

impl CounterDef {
    pub fn eval(&self, ctx: &EvalContext, point: &GridPoint) -> Result<Measured> {
        (self.eval)(ctx, point)
    }
}

pub struct PredictorDef {
    pub id: &'static str,
    pub about: &'static str,
    eval: PredictorFn,
}

impl PredictorDef {
    pub fn eval(&self, ctx: &EvalContext, quantity: Quantity, point: &GridPoint) -> Result<f64> {
        (self.eval)(ctx, quantity, point)
    }
}

fn window(point: &GridPoint) -> Result<&WindowSpec> {
    match point {
        GridPoint::Window(w) => Ok(w),
        GridPoint::Region(_) => Err(Error::Config("window counter applied to a region point".into())),
    }
}

fn region(point: &GridPoint) -> Result<&crate::mc::RegionSpec> {
    match point {
        GridPoint::Region(r) => Ok(r),
        GridPoint::Window(_) => Err(Error::Config("region counter applied to a window point".into())),
    }
}

fn plain(w: &WindowSpec) -> WindowSpec {
    WindowSpec {
        r: None,
        shift: None,
        squarefree: false,
        ..w.clone()
    }
}

fn count(ctx: &EvalContext, w: &WindowSpec) -> Result<f64> {
    Ok(ctx.counter.evaluate(w)?.value as f64)
}

fn c_h(ctx: &EvalContext, p: &GridPoint) -> Result<Measured> {
    Ok(Measured::exact(count(ctx, &plain(window(p)?))?))
}

fn c_hr(ctx: &EvalContext, p: &GridPoint) -> Result<Measured> {
    let w = window(p)?;
    let spec = plain(w).with_r(w.r.unwrap_or(1));
    Ok(Measured::exact(count(ctx, &spec)?))
}

fn c_hstar(ctx: &EvalContext, p: &GridPoint) -> Result<Measured> {
    Ok(Measured::exact(count(ctx, &plain(window(p)?).squarefree())?))
}

fn c_spec(ctx: &EvalContext, p: &GridPoint) -> Result<Measured> {
    Ok(Measured::exact(count(ctx, window(p)?)?))
}

fn shift_of(w: &WindowSpec) -> Result<i64> {
    w.shift.ok_or_else(|| Error::Config("shifted-prime counter needs `shift`".into()))
}

fn c_hshift(ctx: &EvalContext, p: &GridPoint) -> Result<Measured> {
    let w = window(p)?;
    let spec = plain(w).with_shift(shift_of(w)?);
    Ok(Measured::exact(count(ctx, &spec)?))
}

fn c_h1_over_h(ctx: &EvalContext, p: &GridPoint) -> Result<Measured> {
    let w = plain(window(p)?);
    let h = count(ctx, &w)?;
    let h1 = count(ctx, &w.clone().with_r(1))?;
    Ok(Measured::exact(if h > 0.0 { h1 / h } else { f64::NAN }))
}

fn c_hshift_log_over_h(ctx: &EvalContext, p: &GridPoint) -> Result<Measured> {
    let w = window(p)?;
    let base = plain(w);
    let h = count(ctx, &base)?;
    let hp = count(ctx, &base.clone().with_shift(shift_of(w)?))?;
    Ok(Measured::exact(if h > 0.0 { hp * (w.x as f64).ln() / h } else { f64::NAN }))
}

fn c_mc(ctx: &EvalContext, p: &GridPoint) -> Result<Measured> {
    let est = mc_estimate(region(p)?, ctx.samples, ctx.seed)?;
    Ok(Measured {
        value: est.mean,
        stderr: Some(est.stderr),
    })
}

fn c_exact_region(_: &EvalContext, p: &GridPoint) -> Result<Measured> {
    Ok(Measured::exact(exact_small_k(region(p)?)?))
}

pub static COUNTERS: &[CounterDef] = &[
    CounterDef {
        id: "H",
        about: "H(x,y,z)",
        quantity: Quantity::Count,
        eval: c_h,
    },
    CounterDef {
        id: "Hr",
        about: "H_r(x,y,z), r from the grid (default 1)",
        quantity: Quantity::Count,
        eval: c_hr,
    },
    CounterDef {
        id: "Hstar",
        about: "H*(x,y,z), squarefree n",
        quantity: Quantity::Count,
        eval: c_hstar,
    },
    CounterDef {
        id: "Hshift",
        about: "H(x,y,z;P_shift)",
        quantity: Quantity::Count,
        eval: c_hshift,
    },
    CounterDef {
        id: "spec",
        about: "count with every grid flag applied (r, delta, shift, squarefree)",
        quantity: Quantity::Count,
        eval: c_spec,
    },
    CounterDef {
        id: "H1_over_H",
        about: "H_1(x,y,z)/H(x,y,z)",
        quantity: Quantity::RatioToH,
        eval: c_h1_over_h,
    },
    CounterDef {
        id: "Hshift_log_over_H",
        about: "H(x,y,z;P_shift) log x / H(x,y,z)",
        quantity: Quantity::RatioToH,
        eval: c_hshift_log_over_h,
    },
    CounterDef {
        id: "mc",
        about: "Monte Carlo estimate of k! Vol(region)",
        quantity: Quantity::Volume,
        eval: c_mc,
    },
    CounterDef {
        id: "exact",
        about: "k! Vol(region) by nested quadrature (k <= 6)",
        quantity: Quantity::Volume,
        eval: c_exact_region,
    },
];

fn need_count(q: Quantity, id: &str) -> Result<()> {
    if q == Quantity::Count {
        Ok(())
    } else {
        Err(Error::Config(format!("predictor `{id}` needs a count counter")))
    }
}

fn p_order_h(_: &EvalContext, q: Quantity, p: &GridPoint) -> Result<f64> {
    need_count(q, "order_h")?;
    let w = window(p)?;
    let x = w.x as f64;
    Ok(order_h(x, w.y, w.z)?.value * x)
}

fn p_cor2(_: &EvalContext, q: Quantity, p: &GridPoint) -> Result<f64> {
    need_count(q, "cor2")?;
    let w = window(p)?;
    if w.y <= std::f64::consts::E {
        return Err(Error::Regime(format!("cor2 needs y > e, got {}", w.y)));
    }
    let ly = w.y.ln();
    Ok(w.x as f64 * ly.powf(-erdos_delta::<f64>()) * ly.ln().powf(-1.5))
}

fn p_order_hr_ratio(ctx: &EvalContext, q: Quantity, p: &GridPoint) -> Result<f64> {
    let w = window(p)?;
    let ratio = order_hr_ratio(w.x as f64, w.y, w.z, w.r.unwrap_or(1))?;
    match q {
        Quantity::RatioToH => Ok(ratio),
        Quantity::Count => Ok(ratio * count(ctx, &plain(w))?),
        Quantity::Volume => Err(Error::Config("order_hr_ratio needs a window counter".into())),
    }
}

fn p_exact_region(_: &EvalContext, _: Quantity, p: &GridPoint) -> Result<f64> {
    exact_small_k(region(p)?)
}

fn p_unlem(_: &EvalContext, _: Quantity, p: &GridPoint) -> Result<f64> {
    let r = region(p)?;
    let alpha = r.alpha.ok_or_else(|| Error::Config("unlem needs alpha".into()))?;
    Ok(unlem_bound(r.k as u32, r.v.round() as u32, alpha))
}

fn p_voly(_: &EvalContext, _: Quantity, p: &GridPoint) -> Result<f64> {
    let r = region(p)?;
    Ok((r.k as f64 - r.v + 1.0) / (r.k as f64 + 1.0))
}

pub static PREDICTORS: &[PredictorDef] = &[
    PredictorDef {
        id: "order_h",
        about: "piecewise order of H/x, times x",
        eval: p_order_h,
    },
    PredictorDef {
        id: "cor2",
        about: "x (log y)^-delta (log log y)^-3/2",
        eval: p_cor2,
    },
    PredictorDef {
        id: "order_hr_ratio",
        about: "predicted H_r/H (times exact H for count counters)",
        eval: p_order_hr_ratio,
    },
    PredictorDef {
        id: "exact",
        about: "k! Vol(region) by nested quadrature (k <= 6)",
        eval: p_exact_region,
    },
    PredictorDef {
        id: "unlem",
        about: "upper bound for the U integrand",
        eval: p_unlem,
    },
    PredictorDef {
        id: "voly",
        about: "(k - v + 1)/(k + 1)",
        eval: p_voly,
    },
];

pub fn counter(id: &str) -> Result<&'static CounterDef> {
    COUNTERS.iter().find(|c| c.id == id).ok_or_else(|| Error::Lookup {
        kind: "counter",
        id: id.to_string(),
    })
}

pub fn predictor(id: &str) -> Result<&'static PredictorDef> {
    PREDICTORS.iter().find(|p| p.id == id).ok_or_else(|| Error::Lookup {
        kind: "predictor",
        id: id.to_string(),
    })
}
