//! Conditional bracket of Example 1's level martingale.
//!
//! With `L = ∫ α(T-s) W_s dW_s` and `E[W_s² | W_t = x] = x² + (s - t)`,
//!
//! ```text
//! E[⟨L⟩_T - ⟨L⟩_t | W_t = x] = x² ∫_t^T α²(T-s) ds + ∫_t^T α²(T-s)(s - t) ds.
//! ```
//!
//! The first term is unbounded in `x`, so `L` is not a BMO martingale even
//! though the series for `α` converges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{blowup_horizon, ex1_coefficients};

/// Simpson intervals used for both integrals.
pub const SIMPSON_INTERVALS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalBracket {
    pub t: f64,
    pub horizon: f64,
    pub order: usize,
    /// `∫_t^T α²(T-s) ds`
    pub quadratic_coeff: f64,
    /// `∫_t^T α²(T-s)(s-t) ds`
    pub offset: f64,
}

impl ConditionalBracket {
    pub fn value(&self, x: f64) -> f64 {
        self.quadratic_coeff * x * x + self.offset
    }

    /// The part that grows with `|x|`.
    pub fn quadratic_part(&self, x: f64) -> f64 {
        self.quadratic_coeff * x * x
    }
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// Bracket coefficients at time `t` using the order-`order` truncated `α`.
pub fn ex1_conditional_bracket_coeffs(
    t: f64,
    horizon: f64,
    order: usize,
) -> Result<ConditionalBracket> {
    let limit = blowup_horizon();
    if horizon >= limit {
        return Err(Error::BeyondBlowUp { horizon, limit });
    }
    if !(t >= 0.0 && t <= horizon) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= t <= T, got t = {t}, T = {horizon}"
        )));
    }
    let alpha = ex1_coefficients(order).alpha;
    let a2 = |s: f64| {
        let v = alpha.eval(horizon - s);
        v * v
    };
    Ok(ConditionalBracket {
        t,
        horizon,
        order,
        quadratic_coeff: simpson(a2, t, horizon, SIMPSON_INTERVALS),
        offset: simpson(|s| a2(s) * (s - t), t, horizon, SIMPSON_INTERVALS),
    })
}

/// `E[∫_t^T α²(T-s) W_s² ds | W_t = x]`.
pub fn ex1_conditional_bracket(t: f64, x: f64, horizon: f64, order: usize) -> Result<f64> {
    Ok(ex1_conditional_bracket_coeffs(t, horizon, order)?.value(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishes_at_terminal_time() {
        assert!(ex1_conditional_bracket(0.5, 0.0, 0.5, 20).unwrap().abs() < 1e-15);
    }

    #[test]
    fn doubling_x_quadruples_quadratic_part() {
        let b = ex1_conditional_bracket_coeffs(0.0, 0.5, 20).unwrap();
        assert_eq!(b.quadratic_part(2.0), 4.0 * b.quadratic_part(1.0));
    }

    #[test]
    fn leading_order_matches_hand_integral() {
        // α ≡ τ at order 0: ∫_0^T (T-s)² ds = T³/3, ∫_0^T (T-s)² s ds = T⁴/12.
        let b = ex1_conditional_bracket_coeffs(0.0, 0.5, 0).unwrap();
        assert!((b.quadratic_coeff - 0.125 / 3.0).abs() < 1e-14);
        assert!((b.offset - 0.0625 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_times() {
        assert!(ex1_conditional_bracket(0.6, 0.0, 0.5, 5).is_err());
        assert!(ex1_conditional_bracket(0.0, 0.0, 1.2, 5).is_err());
    }
}
