//! The two exactly solvable quadratic BSDEs driven by a 2-D Brownian motion.
//!
//! Both examples use `α = -1`, `γ = 2`, `η̄ = 0`.
//!
//! * Example 1: `A_t = ½∫(W² + W⊥²) ds`. The level-`n` integrands are
//!   `α_n (T-s)^(2n+1) W_s` and `β_n (T-s)^(2n+1) W⊥_s`, and the summed
//!   series solve `α' = 1 + 2α²`, `β' = 1 - 2β²` with zero initial value.
//! * Example 2: `A_t = ∫W W⊥ ds`, a coupled recurrence whose generating
//!   functions are the real and imaginary parts of `ζ' = i + 2ζ²`.
//!
//! On the sign of Example 1's `β`: the recurrence starts from `β_0 = +1` and
//! its ODE is `β' = 1 - 2β²`, so `β(s) = +tanh(√2 s)/√2`. That is the sign
//! implemented here.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::ops::Neg;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{convolve_slices, OddPowerSeries};

/// Highest order computed in exact rationals before switching to floats.
pub const EXACT_ORDER_LIMIT: usize = 30;

/// Distance from the `tan` pole treated as the blow-up point.
pub const POLE_TOLERANCE: f64 = 1e-6;

/// Residual checks only accept grid points inside this fraction of the radius.
pub const RESIDUAL_SAFE_FRACTION: f64 = 0.9;

/// Scalar types the coefficient recurrences run over (`f64`, `BigRational`).
pub trait Coefficient: Clone + Num + Neg<Output = Self> + FromPrimitive {}

impl<T: Clone + Num + Neg<Output = T> + FromPrimitive> Coefficient for T {}

fn ratio<T: Coefficient>(num: u64, den: u64) -> T {
    T::from_u64(num).expect("small integer") / T::from_u64(den).expect("small integer")
}

/// `T = π/(2√2)`: the pole of `tan(√2 s)` closest to the origin.
pub fn blowup_horizon() -> f64 {
    PI / (2.0 * SQRT_2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ex1Coefficients<T = f64> {
    pub alpha: OddPowerSeries<T>,
    pub beta: OddPowerSeries<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ex2Coefficients<T = f64> {
    pub alpha: OddPowerSeries<T>,
    pub beta: OddPowerSeries<T>,
}

impl Ex1Coefficients<BigRational> {
    pub fn to_f64(&self) -> Ex1Coefficients<f64> {
        Ex1Coefficients {
            alpha: self.alpha.to_f64(),
            beta: self.beta.to_f64(),
        }
    }
}

impl Ex2Coefficients<BigRational> {
    pub fn to_f64(&self) -> Ex2Coefficients<f64> {
        Ex2Coefficients {
            alpha: self.alpha.to_f64(),
            beta: self.beta.to_f64(),
        }
    }
}

// Example 1: α_{n+1} = 2/(2n+3) Σ α_k α_{n-k},  β_{n+1} = -2/(2n+3) Σ β_k β_{n-k}.
fn extend_ex1<T: Coefficient>(alpha: &mut Vec<T>, beta: &mut Vec<T>, order: usize) {
    while alpha.len() <= order {
        let n = alpha.len() - 1;
        let w: T = ratio(2, 2 * n as u64 + 3);
        let a = w.clone() * convolve_slices(alpha, alpha, n);
        let b = -(w * convolve_slices(beta, beta, n));
        alpha.push(a);
        beta.push(b);
    }
}

// Example 2: α_{n+1} = 2/(2n+3) Σ (α_k α_{n-k} - β_k β_{n-k}),
//            β_{n+1} = 4/(2n+3) Σ α_k β_{n-k}.
fn extend_ex2<T: Coefficient>(alpha: &mut Vec<T>, beta: &mut Vec<T>, order: usize) {
    while alpha.len() <= order {
        let n = alpha.len() - 1;
        let a = ratio::<T>(2, 2 * n as u64 + 3)
            * (convolve_slices(alpha, alpha, n) - convolve_slices(beta, beta, n));
        let b = ratio::<T>(4, 2 * n as u64 + 3) * convolve_slices(alpha, beta, n);
        alpha.push(a);
        beta.push(b);
    }
}

fn ex1_generic<T: Coefficient>(order: usize) -> (Vec<T>, Vec<T>) {
    let mut alpha = vec![T::one()];
    let mut beta = vec![T::one()];
    extend_ex1(&mut alpha, &mut beta, order);
    (alpha, beta)
}

fn ex2_generic<T: Coefficient>(order: usize) -> (Vec<T>, Vec<T>) {
    let mut alpha = vec![T::zero()];
    let mut beta = vec![T::one()];
    extend_ex2(&mut alpha, &mut beta, order);
    (alpha, beta)
}

/// Example 1 coefficients through `order` in exact rationals.
pub fn ex1_coefficients_exact(order: usize) -> Ex1Coefficients<BigRational> {
    let (alpha, beta) = ex1_generic(order);
    Ex1Coefficients {
        alpha: OddPowerSeries::new(alpha).expect("non-empty"),
        beta: OddPowerSeries::new(beta).expect("non-empty"),
    }
}

/// Example 1 coefficients through `order` as floats. Orders up to
/// [`EXACT_ORDER_LIMIT`] are computed in rationals and rounded once; the tail
/// continues the recurrence in `f64`.
pub fn ex1_coefficients(order: usize) -> Ex1Coefficients<f64> {
    let head = ex1_coefficients_exact(order.min(EXACT_ORDER_LIMIT)).to_f64();
    let mut alpha = head.alpha.into_coeffs();
    let mut beta = head.beta.into_coeffs();
    extend_ex1(&mut alpha, &mut beta, order);
    Ex1Coefficients {
        alpha: OddPowerSeries::new(alpha).expect("non-empty"),
        beta: OddPowerSeries::new(beta).expect("non-empty"),
    }
}

pub fn ex2_coefficients_exact(order: usize) -> Ex2Coefficients<BigRational> {
    let (alpha, beta) = ex2_generic(order);
    Ex2Coefficients {
        alpha: OddPowerSeries::new(alpha).expect("non-empty"),
        beta: OddPowerSeries::new(beta).expect("non-empty"),
    }
}

/// Example 2 coefficients as floats, rational head as in [`ex1_coefficients`].
pub fn ex2_coefficients(order: usize) -> Ex2Coefficients<f64> {
    let head = ex2_coefficients_exact(order.min(EXACT_ORDER_LIMIT)).to_f64();
    let mut alpha = head.alpha.into_coeffs();
    let mut beta = head.beta.into_coeffs();
    extend_ex2(&mut alpha, &mut beta, order);
    Ex2Coefficients {
        alpha: OddPowerSeries::new(alpha).expect("non-empty"),
        beta: OddPowerSeries::new(beta).expect("non-empty"),
    }
}

/// `((1/√2) tan(√2 s), (1/√2) tanh(√2 s))`.
pub fn ex1_closed(s: f64) -> Result<(f64, f64)> {
    let horizon = blowup_horizon();
    if s.abs() > horizon - POLE_TOLERANCE {
        return Err(Error::BlowUp {
            s,
            horizon,
            tolerance: POLE_TOLERANCE,
        });
    }
    let x = SQRT_2 * s;
    Ok((FRAC_1_SQRT_2 * x.tan(), FRAC_1_SQRT_2 * x.tanh()))
}

/// Maximum Riccati residuals of the truncated Example 1 series on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiccatiResidual {
    /// `max |α'(s) - 1 - 2α²(s)|`
    pub alpha: f64,
    /// `max |β'(s) - 1 + 2β²(s)|`
    pub beta: f64,
}

/// Residual of `α' = 1 + 2α²`, `β' = 1 - 2β²` for the order-`order` truncation,
/// with derivatives from term-wise differentiation.
pub fn ex1_riccati_residual(order: usize, s_grid: &[f64]) -> Result<RiccatiResidual> {
    let limit = RESIDUAL_SAFE_FRACTION * blowup_horizon();
    if let Some(&s) = s_grid.iter().find(|s| s.abs() >= limit) {
        return Err(Error::OutsideRadius {
            s,
            limit,
            radius: blowup_horizon(),
        });
    }
    let c = ex1_coefficients(order);
    let mut out = RiccatiResidual {
        alpha: 0.0,
        beta: 0.0,
    };
    for &s in s_grid {
        let a = c.alpha.eval(s);
        let b = c.beta.eval(s);
        let ra = (c.alpha.eval_derivative(s) - 1.0 - 2.0 * a * a).abs();
        let rb = (c.beta.eval_derivative(s) - 1.0 + 2.0 * b * b).abs();
        out.alpha = out.alpha.max(ra);
        out.beta = out.beta.max(rb);
    }
    Ok(out)
}

/// `cos²(s) cosh²(s) + sin²(s) sinh²(s) = |cos((1+i)s)|²`.
pub fn ex2_denominator(s: f64) -> f64 {
    let (c, ch, sn, sh) = (s.cos(), s.cosh(), s.sin(), s.sinh());
    c * c * ch * ch + sn * sn * sh * sh
}

/// `ζ(s) = tan((1+i)s) / (1-i)`, returned as `(re, im)`.
pub fn ex2_zeta(s: f64) -> (f64, f64) {
    let z = Complex64::new(s, s).tan() / Complex64::new(1.0, -1.0);
    (z.re, z.im)
}

/// `ζ'(s) = (1+i)/(1-i) · sec²((1+i)s) = i (1 + tan²((1+i)s))`.
pub fn ex2_zeta_derivative(s: f64) -> (f64, f64) {
    let t = Complex64::new(s, s).tan();
    let d = Complex64::i() * (1.0 + t * t);
    (d.re, d.im)
}

/// The displayed real formulas for Example 2's `(α(s), β(s))`.
pub fn ex2_closed(s: f64) -> (f64, f64) {
    let den = 4.0 * ex2_denominator(s);
    let (s2, sh2) = ((2.0 * s).sin(), (2.0 * s).sinh());
    let alpha = (s2 - sh2) / den;
    let beta = (s2 + sh2) / den;
    debug_assert!({
        let (re, im) = ex2_zeta(s);
        (re - alpha).abs() <= 1e-12 * (1.0 + alpha.abs())
            && (im - beta).abs() <= 1e-12 * (1.0 + beta.abs())
    });
    (alpha, beta)
}

/// `max |ζ'(s) - i - 2ζ²(s)|` over the grid.
pub fn ex2_zeta_residual(s_grid: &[f64]) -> f64 {
    s_grid
        .iter()
        .map(|&s| {
            let (re, im) = ex2_zeta(s);
            let z = Complex64::new(re, im);
            let (dre, dim) = ex2_zeta_derivative(s);
            (Complex64::new(dre, dim) - Complex64::i() - 2.0 * z * z).norm()
        })
        .fold(0.0, f64::max)
}

/// How the logarithm in the Example 1 constant is read: `cos·cosh` or `cos/cosh`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantReading {
    Product,
    Quotient,
}

impl ConstantReading {
    pub const ALL: [ConstantReading; 2] = [ConstantReading::Product, ConstantReading::Quotient];

    pub fn as_str(self) -> &'static str {
        match self {
            ConstantReading::Product => "product",
            ConstantReading::Quotient => "quotient",
        }
    }
}

impl std::str::FromStr for ConstantReading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(Self::Product),
            "quotient" => Ok(Self::Quotient),
            other => Err(Error::InvalidParameter(format!(
                "unknown constant reading '{other}' (expected product or quotient)"
            ))),
        }
    }
}

/// The reading that makes the exponential equation hold pathwise.
pub const SHIPPED_READING: ConstantReading = ConstantReading::Quotient;

/// `log c` of `ℰ_T(m) ℰ_T^α(m⊥) = c e^η` for Example 1:
/// `½ ln(cos(√2T) cosh(√2T))` or `½ ln(cos(√2T) / cosh(√2T))`.
///
/// The constant of the additive form `L_T + L⊥_T = c + ...` is half of this.
pub fn ex1_constant(horizon: f64, reading: ConstantReading) -> Result<f64> {
    let limit = blowup_horizon();
    if horizon >= limit {
        return Err(Error::BeyondBlowUp { horizon, limit });
    }
    if horizon < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "T must be positive, got {horizon}"
        )));
    }
    let x = SQRT_2 * horizon;
    let inner = match reading {
        ConstantReading::Product => x.cos() * x.cosh(),
        ConstantReading::Quotient => x.cos() / x.cosh(),
    };
    Ok(0.5 * inner.ln())
}
