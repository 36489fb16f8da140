//! Exact divisor-in-interval counting and numerical checks of the laws that
//! govern how divisors of integers spread out.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: smallest-prime-factor tables, divisor lists, `Φ(x,z)` and `Ψ(x,y)`.
//! * [`counts`]: segmented divisor-marking sieves for `H`, `H_r`, `H*`,
//!   short windows and shifted primes.
//! * [`shape`]: the shape parameters `η, u, β, ξ`, the exponent function `G`,
//!   and closed-form order predictors.
//! * [`geometry`]: the log-divisor functionals `L`, `L_r`, `W`, `I`.
//! * [`order_stats`]: boundary-crossing probabilities of uniform order statistics.
//! * [`mc`]: Monte Carlo and quadrature estimates of simplex-region volumes.
//! * [`blocks`]: the greedy reciprocal-sum partition of the primes.
//! * [`identities`]: exact combinatorial identities and bounds.
//! * [`apps`]: multiplication table, Farey gaps, and divisor-function sums.
//! * [`harness`]: experiment configs, ratio scans, result store and plots.
//!
//! Numerical code that does not depend on the integer sieves is written over
//! the [`Scalar`] trait (or [`num_traits::Float`]) so it runs on `f32`, `f64`
//! and exact [`Rational`] values alike.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apps;
pub mod arith;
pub mod blocks;
pub mod counts;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod identities;
pub mod mc;
pub mod order_stats;
pub mod scalar;
pub mod shape;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default real scalar.
pub type Real = f64;
/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

pub type ShapeParams = shape::ShapeParams<Real>;
pub type ShapeParams32 = shape::ShapeParams<f32>;
pub type IntervalUnion = geometry::IntervalUnion<Real>;
