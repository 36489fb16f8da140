//! Shape parameters of a divisor window and closed-form order predictors.
//!
//! For `4 <= y < z` the window is reparameterised as
//! `z = e^η y = y^{1+u}`, `η = (log y)^{-β}`,
//! `β = log 4 - 1 + ξ / √(log log y)`.
//! Predictors return the order of magnitude of `H/x` (or `H_r/H`) with the
//! unspecified implied constants dropped.

use std::sync::LazyLock;

use num_traits::{Float, FloatConst};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn c<F: Float>(v: f64) -> F {
    F::from(v).expect("representable constant")
}

/// `log 4 - 1`, the critical exponent.
pub fn critical_beta<F: Float + FloatConst>() -> F {
    F::LN_2() + F::LN_2() - F::one()
}

/// `δ = 1 - (1 + log log 2)/log 2 = 0.086071...`, evaluated from its definition.
pub fn erdos_delta<F: Float + FloatConst>() -> F {
    F::one() - (F::one() + F::LN_2().ln()) / F::LN_2()
}

/// `δ` in `f64`.
pub static DELTA: LazyLock<f64> = LazyLock::new(erdos_delta::<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams<F> {
    pub y: F,
    pub z: F,
    /// `log(z/y)`.
    pub eta: F,
    /// `z = y^{1+u}`.
    pub u: F,
    /// `η = (log y)^{-β}`.
    pub beta: F,
    /// `β = log 4 - 1 + ξ/√(log log y)`.
    pub xi: F,
    /// `θ(η, y)`: defined by `η = (log y)^{-θ}`; equals `β`.
    pub theta: F,
    /// `ν(η, y)`: defined by `θ = log 4 - 1 - ν/√(log log y)`; equals `-ξ`.
    pub nu: F,
}

impl<F: Float + FloatConst> ShapeParams<F> {
    /// Shape parameters of the window `(y, z]`. Needs `y > e` so that
    /// `log log y > 0` and `ξ` is defined.
    pub fn new(y: F, z: F) -> Result<Self> {
        if !(y > F::E()) {
            return Err(Error::domain(
                "xi",
                format!("ξ needs log log y > 0, i.e. y > e; got y = {}", y.to_f64().unwrap_or(f64::NAN)),
            ));
        }
        if !(z > y) {
            return Err(Error::domain("z", "need z > y"));
        }
        let ly = y.ln();
        let lly = ly.ln();
        let eta = (z / y).ln();
        let u = eta / ly;
        let beta = -eta.ln() / lly;
        let xi = (beta - critical_beta::<F>()) * lly.sqrt();
        let (theta, nu) = theta_nu(eta, y)?;
        Ok(ShapeParams {
            y,
            z,
            eta,
            u,
            beta,
            xi,
            theta,
            nu,
        })
    }

    /// `z` rebuilt from `y` and `η`.
    pub fn z_from_eta(&self) -> F {
        self.y * self.eta.exp()
    }
}

/// `compute_shape` with `f64`.
pub fn compute_shape(y: f64, z: f64) -> Result<ShapeParams<f64>> {
    ShapeParams::new(y, z)
}

/// `(θ, ν)` with `σ = (log P)^{-θ}` and `θ = log 4 - 1 - ν (log log P)^{-1/2}`.
pub fn theta_nu<F: Float + FloatConst>(sigma: F, p: F) -> Result<(F, F)> {
    if !(p > F::E()) || !(sigma > F::zero()) {
        return Err(Error::domain("P", "need P > e and σ > 0"));
    }
    let llp = p.ln().ln();
    let theta = -sigma.ln() / llp;
    let nu = (critical_beta::<F>() - theta) * llp.sqrt();
    Ok((theta, nu))
}

/// The exponent function `G(β)`:
/// `((1+β)/log 2) log((1+β)/(e log 2)) + 1` below `log 4 - 1`, `β` above.
pub fn g_exponent<F: Float + FloatConst>(beta: F) -> Result<F> {
    if !(beta >= F::zero()) {
        return Err(Error::domain("beta", "G(β) needs β >= 0"));
    }
    if beta >= critical_beta::<F>() {
        return Ok(beta);
    }
    let l2 = F::LN_2();
    let b1 = F::one() + beta;
    Ok(b1 / l2 * (b1 / (F::E() * l2)).ln() + F::one())
}

/// Threshold `z_0(y) = y exp{(log y)^{1 - log 4}}`.
pub fn z0<F: Float + FloatConst>(y: F) -> Result<F> {
    if !(y > F::one()) {
        return Err(Error::domain("y", "z0(y) needs y > 1"));
    }
    Ok(y * y.ln().powf(F::one() - F::LN_2() - F::LN_2()).exp())
}

/// `F(ξ) = π^{-1/2} ∫_{-∞}^{ξ/log 4} e^{-t²} dt = erfc(-ξ/log 4)/2`.
pub fn hall_f<F: Float + FloatConst>(xi: F) -> F {
    let t = xi.to_f64().unwrap_or(f64::NAN) / (2.0 * std::f64::consts::LN_2);
    c(0.5 * libm::erfc(-t))
}

/// 2-adic valuation `ν(r)`, `2^{ν(r)} ∥ r`.
pub fn nu2(r: u64) -> Result<u32> {
    if r == 0 {
        return Err(Error::domain("r", "ν(r) needs r >= 1"));
    }
    Ok(r.trailing_zeros())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `z < ⌊y⌋ + 1`: no integer in the window.
    TrivialZero,
    /// `⌊y⌋ + 1 <= z < y + 1`: exactly one integer in the window.
    TrivialFloor,
    /// `x <= 100000`.
    SmallX,
    /// `x > 100000`, `y < 100`.
    SmallY,
    /// `y + 1 <= z < z_0(y)`.
    SmallEta,
    /// `z_0(y) <= z < 2y`.
    NearThreshold,
    /// `2y <= z < y²`.
    MidRange,
    /// `z >= y²`.
    LargeZ,
    /// `y > √x`, reduced through `d ↔ n/d`.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderPrediction {
    pub regime: Regime,
    /// Predicted `H/x` up to constants (exact for the trivial regimes).
    pub value: f64,
}

const SMALL_X: f64 = 100_000.0;
const SMALL_Y: f64 = 100.0;

/// Piecewise order of `H(x, y, z)/x`.
///
/// Regime boundaries are half-open: `[y+1, z_0)`, `[z_0, 2y)`, `[2y, y²)`,
/// `[y², ∞)`; `x <= 100000` is the small-`x` case and `y < 100` the small-`y`
/// case. Every `1 <= y <= z <= x` lands in exactly one regime.
pub fn order_h(x: f64, y: f64, z: f64) -> Result<OrderPrediction> {
    if !(1.0 <= y && y <= z && z <= x) {
        return Err(Error::Spec(format!("need 1 <= y <= z <= x, got ({x}, {y}, {z})")));
    }
    let fy = y.floor();
    if z < fy + 1.0 {
        return Ok(OrderPrediction {
            regime: Regime::TrivialZero,
            value: 0.0,
        });
    }
    if z < y + 1.0 {
        return Ok(OrderPrediction {
            regime: Regime::TrivialFloor,
            value: (x / (fy + 1.0)).floor() / x,
        });
    }
    if x <= SMALL_X {
        return Ok(OrderPrediction {
            regime: Regime::SmallX,
            value: 1.0 / x,
        });
    }
    if y < SMALL_Y {
        return Ok(OrderPrediction {
            regime: Regime::SmallY,
            value: 1.0,
        });
    }
    if y > x.sqrt() {
        let eta = (z / y).ln();
        let value = if x / y >= x / z + 1.0 {
            order_h(x, x / z, x / y)?.value
        } else {
            eta
        };
        return Ok(OrderPrediction {
            regime: Regime::Symmetric,
            value,
        });
    }
    let s = compute_shape(y, z)?;
    let (regime, value) = if z < z0(y)? {
        (Regime::SmallEta, s.eta)
    } else if z < 2.0 * y {
        let g = g_exponent(s.beta)?;
        (Regime::NearThreshold, s.beta / ((-s.xi).max(1.0) * y.ln().powf(g)))
    } else if z < y * y {
        (
            Regime::MidRange,
            s.u.powf(*DELTA) * (2.0 / s.u).ln().powf(-1.5),
        )
    } else {
        (Regime::LargeZ, 1.0)
    };
    Ok(OrderPrediction { regime, value })
}

/// Predicted `H_r/H` up to constants.
///
/// * `r = 1`, any `z >= y + 1`: `log log(z/y + 10) / log(z/y + 10)`.
/// * `r >= 2`, `z_0(y) <= z < 10y`: the lower-bound form `max(1,-ξ)/√(log log y)`.
/// * `r >= 2`, `10y <= z < y²`: `(log log(z/y))^{ν(r)+1} / log(z/y)`.
/// * `r >= 2`, `z >= y²`: `(log log y)^{ν(r)+1} / log z`.
///
/// Inputs with `z > x^{5/8}` or `yz > x`, or below the ranges above, are
/// rejected.
pub fn order_hr_ratio(x: f64, y: f64, z: f64, r: u32) -> Result<f64> {
    if r == 0 {
        return Err(Error::domain("r", "ratio laws need r >= 1"));
    }
    if !(y > std::f64::consts::E && z >= y + 1.0) {
        return Err(Error::Regime(format!("need e < y and z >= y + 1, got y={y}, z={z}")));
    }
    if z > x.powf(0.625) * (1.0 + 1e-12) {
        return Err(Error::Regime(format!("z = {z} exceeds x^(5/8)")));
    }
    if y * z > x {
        return Err(Error::Regime(format!("yz = {} exceeds x", y * z)));
    }
    let q = z / y;
    if r == 1 {
        let t = q + 10.0;
        return Ok(t.ln().ln() / t.ln());
    }
    let nu = nu2(r as u64)? as i32;
    if z < z0(y)? {
        return Err(Error::Regime(format!("r >= 2 needs z >= z0(y) = {}", z0(y)?)));
    }
    if z < 10.0 * y {
        let s = compute_shape(y, z)?;
        Ok((-s.xi).max(1.0) / y.ln().ln().sqrt())
    } else if z < y * y {
        Ok(q.ln().ln().powi(nu + 1) / q.ln())
    } else {
        Ok(y.ln().ln().powi(nu + 1) / z.ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shape_example_y100_z200() {
        let s = compute_shape(100.0, 200.0).unwrap();
        assert!((s.eta - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((s.u - 0.150515).abs() < 1e-6);
        assert!((s.beta - 0.24000).abs() < 1e-5);
        assert!((s.xi - (-0.18081)).abs() < 1e-4);
        assert_eq!(s.theta, s.beta);
        assert_eq!(s.nu, -s.xi);
    }

    #[test]
    fn shape_special_points() {
        let y = 100.0f64;
        let s = compute_shape(y, std::f64::consts::E * y).unwrap();
        assert!((s.eta - 1.0).abs() < 1e-14);
        assert!(s.beta.abs() < 1e-14);
        let z = z0(y).unwrap();
        let s = compute_shape(y, z).unwrap();
        assert!((s.beta - critical_beta::<f64>()).abs() < 1e-12);
        assert!(s.xi.abs() < 1e-12);
    }

    #[test]
    fn shape_needs_y_above_e() {
        let e = compute_shape(2.0, 5.0).unwrap_err();
        assert!(matches!(e, Error::Domain { param: "xi", .. }));
        assert!(compute_shape(10.0, 10.0).is_err());
    }

    #[test]
    fn shape_in_f32() {
        let s = ShapeParams::<f32>::new(100.0, 200.0).unwrap();
        assert!((s.beta - 0.24).abs() < 1e-4);
    }

    #[test]
    fn g_examples() {
        let b0 = critical_beta::<f64>();
        assert_eq!(g_exponent(0.5).unwrap(), 0.5);
        assert!((g_exponent(b0).unwrap() - b0).abs() < 1e-15);
        let left = g_exponent(b0 - 1e-9).unwrap();
        assert!((left - b0).abs() < 1e-8);
        let d = g_exponent(0.0).unwrap();
        assert!((d - 0.086071).abs() < 1e-6);
        assert!((d - (1.0 - (1.0 + 2f64.ln().ln()) / 2f64.ln())).abs() < 1e-12);
        assert!((*DELTA - d).abs() < 1e-15);
        assert!(g_exponent(-0.1).is_err());
    }

    #[test]
    fn g_dominates_identity_and_is_convex() {
        let b0 = critical_beta::<f64>();
        let pts: Vec<f64> = (0..=1000).map(|i| i as f64 * 1e-3).collect();
        let g: Vec<f64> = pts.iter().map(|&b| g_exponent(b).unwrap()).collect();
        for (&b, &gv) in pts.iter().zip(&g) {
            assert!(gv >= b - 1e-15);
            if b < b0 - 1e-9 {
                assert!(gv > b);
            } else if b >= b0 {
                assert_eq!(gv, b);
            }
        }
        for i in 1..pts.len() - 1 {
            assert!(g[i - 1] + g[i + 1] - 2.0 * g[i] >= -1e-12);
            assert!((g[i + 1] - g[i]).abs() < 2e-3);
        }
    }

    #[test]
    fn z0_examples() {
        assert!((z0(100.0f64).unwrap() - 174.1).abs() < 0.05);
        let e = std::f64::consts::E;
        assert!((z0(e).unwrap() - e * e).abs() < 1e-12);
        for y in [4.0f64, 10.0, 1e3, 1e9] {
            assert!(z0(y).unwrap() > y);
        }
    }

    #[test]
    fn hall_f_values() {
        assert!((hall_f(0.0f64) - 0.5).abs() < 1e-15);
        assert!((hall_f(1e6f64) - 1.0).abs() < 1e-15);
        let l4 = 4f64.ln();
        assert!((hall_f(l4) - 0.92135).abs() < 1e-5);
        let mut prev = 0.0;
        for i in -100..=100 {
            let v = hall_f(i as f64 * 0.05);
            assert!(v > prev && v < 1.0);
            prev = v;
        }
    }

    /// `erf` by its Maclaurin series, summed in long form.
    fn erf_series(x: f64) -> f64 {
        let mut sum = 0.0;
        let mut term = x;
        let mut n = 0.0;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) || n < 5.0 {
            sum += term / (2.0 * n + 1.0);
            n += 1.0;
            term *= -x * x / n;
        }
        2.0 / std::f64::consts::PI.sqrt() * sum
    }

    #[test]
    fn erf_backend_matches_series() {
        for i in 0..=40 {
            let x = i as f64 * 0.05;
            let series = erf_series(x);
            assert!((libm::erf(x) - series).abs() < 1e-13, "x={x}");
        }
        // ξ = log 4 gives t = 1.
        assert!(((1.0 + erf_series(1.0)) / 2.0 - hall_f(4f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn nu2_examples() {
        assert_eq!(nu2(1).unwrap(), 0);
        assert_eq!(nu2(4).unwrap(), 2);
        assert_eq!(nu2(12).unwrap(), 2);
        assert!(nu2(0).is_err());
    }

    #[test]
    fn order_h_examples() {
        let x = 1e8;
        let p = order_h(x, 100.0, 1e4).unwrap();
        assert_eq!(p.regime, Regime::LargeZ);
        assert_eq!(p.value, 1.0);
        let y = 1000.0;
        let p = order_h(x, y, y + 50.0).unwrap();
        assert_eq!(p.regime, Regime::SmallEta);
        assert!((p.value - (1.05f64).ln()).abs() < 1e-12);
        // y > √x with x/y < x/z + 1.
        let p = order_h(x, 20_000.0, 20_001.0).unwrap();
        assert_eq!(p.regime, Regime::Symmetric);
        assert!((p.value - (20_001.0f64 / 20_000.0).ln()).abs() < 1e-15);
        // y > √x reducing to the dual window.
        let p = order_h(x, 1e6, 4e6).unwrap();
        assert_eq!(p.regime, Regime::Symmetric);
        assert_eq!(p.value, order_h(x, 25.0, 100.0).unwrap().value);
        assert_eq!(order_h(1e6, 5.2, 5.9).unwrap().regime, Regime::TrivialZero);
        let p = order_h(1e6, 5.2, 6.1).unwrap();
        assert_eq!(p.regime, Regime::TrivialFloor);
        assert_eq!(p.value, 166_666.0 / 1e6);
        assert_eq!(order_h(1e5, 5.0, 60.0).unwrap().regime, Regime::SmallX);
        assert_eq!(order_h(1e6, 5.0, 60.0).unwrap().regime, Regime::SmallY);
        assert_eq!(order_h(1e8, 1000.0, 1800.0).unwrap().regime, Regime::NearThreshold);
        assert_eq!(order_h(1e8, 1000.0, 2000.0).unwrap().regime, Regime::MidRange);
        assert!(order_h(10.0, 3.0, 11.0).is_err());
    }

    proptest! {
        #[test]
        fn eta_roundtrip(y in 3.0f64..1e12, eta in 1e-6f64..20.0) {
            let s = compute_shape(y, y * eta.exp()).unwrap();
            prop_assert!((s.eta - eta).abs() <= 1e-12 * eta.max(1.0) * 10.0);
            prop_assert!(((s.z_from_eta() - s.z) / s.z).abs() < 1e-12);
            prop_assert!((s.u * y.ln() - s.eta).abs() < 1e-12 * s.eta.max(1.0));
            prop_assert!((s.beta * y.ln().ln() + s.eta.ln()).abs() < 1e-9);
        }

        #[test]
        fn order_h_is_total(x in 1.0f64..1e10, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let y = 1.0 + a * (x - 1.0);
            let z = y + b * (x - y);
            let p = order_h(x, y, z).unwrap();
            prop_assert!(p.value.is_finite() && p.value >= 0.0);
        }
    }

    #[test]
    fn hr_ratio_examples() {
        let x = 1e12;
        let v = order_hr_ratio(x, 100.0, 9000.0, 1).unwrap();
        assert!((v - 100f64.ln().ln() / 100f64.ln()).abs() < 1e-15);
        assert!((v - 0.3316).abs() < 1e-4);
        let v = order_hr_ratio(x, 100.0, 2000.0, 2).unwrap();
        assert!((v - 20f64.ln().ln().powi(2) / 20f64.ln()).abs() < 1e-15);
        let v = order_hr_ratio(1e40, 1e6, 1e6 * 1e12, 1).unwrap();
        let t = 1e12f64 + 10.0;
        assert!((v - t.ln().ln() / t.ln()).abs() < 1e-15);
        let s = compute_shape(1e4, 5e4).unwrap();
        let v = order_hr_ratio(1e12, 1e4, 5e4, 3).unwrap();
        assert!((v - (-s.xi).max(1.0) / 1e4f64.ln().ln().sqrt()).abs() < 1e-15);
        let v = order_hr_ratio(1e20, 100.0, 1e5, 4).unwrap();
        assert!((v - 100f64.ln().ln().powi(3) / 1e5f64.ln()).abs() < 1e-15);
        assert!(matches!(order_hr_ratio(1e12, 1e4, 1e4 + 10.0, 2), Err(Error::Regime(_))));
        assert!(matches!(order_hr_ratio(1e6, 1e3, 5e3, 1), Err(Error::Regime(_))));
    }
}
