//! Odd power series, the Catalan majorant and root-test radius estimation.
//!
//! Every coefficient sequence in this crate describes a series with only odd
//! powers, `c_0 s + c_1 s^3 + c_2 s^5 + ...`. Index `n` always refers to the
//! coefficient of `s^(2n+1)`.

use std::ops::{Add, Mul};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of coefficients accepted by [`root_test_radius`].
pub const MIN_ROOT_TEST_COEFFS: usize = 16;

/// Guarded evaluation refuses `|s| >= GUARD_FRACTION * radius`.
pub const GUARD_FRACTION: f64 = 0.95;

/// Truncated series `Σ_{n=0}^{N} c_n s^(2n+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddPowerSeries<T = f64> {
    coeffs: Vec<T>,
}

impl<T> OddPowerSeries<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(Self { coeffs })
    }

    /// Truncation order `N`; the series holds `N + 1` coefficients.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Option<&T> {
        self.coeffs.get(n)
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Drops every coefficient above `order`.
    pub fn truncated(&self, order: usize) -> Self
    where
        T: Clone,
    {
        let end = (order + 1).min(self.coeffs.len());
        Self {
            coeffs: self.coeffs[..end].to_vec(),
        }
    }
}

impl OddPowerSeries<f64> {
    /// Partial sum at `s`, Horner in `s²` then one multiplication by `s`.
    pub fn eval(&self, s: f64) -> f64 {
        let s2 = s * s;
        let inner = self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s2 + c);
        s * inner
    }

    /// Like [`eval`](Self::eval) but refuses points at or beyond
    /// `GUARD_FRACTION` of the estimated radius.
    pub fn eval_guarded(&self, s: f64) -> Result<f64> {
        let radius = root_test_radius(self)?;
        let limit = GUARD_FRACTION * radius;
        if s.abs() >= limit {
            return Err(Error::OutsideRadius { s, limit, radius });
        }
        Ok(self.eval(s))
    }

    /// Term-wise derivative `Σ (2n+1) c_n s^(2n)` of the truncated series.
    pub fn eval_derivative(&self, s: f64) -> f64 {
        let s2 = s * s;
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (n, &c)| acc * s2 + (2 * n + 1) as f64 * c)
    }
}

impl OddPowerSeries<BigRational> {
    pub fn to_f64(&self) -> OddPowerSeries<f64> {
        OddPowerSeries {
            coeffs: self.coeffs.iter().map(rational_to_f64).collect(),
        }
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `Σ_{k=0}^{n} a_k b_{n-k}` over raw slices; callers guarantee the length.
pub(crate) fn convolve_slices<T>(a: &[T], b: &[T], n: usize) -> T
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T>,
{
    (0..=n).fold(T::zero(), |acc, k| acc + a[k].clone() * b[n - k].clone())
}

/// Cauchy-product coefficient `Σ_{k=0}^{n} a_k b_{n-k}`, the quadratic kernel
/// shared by every recurrence in the crate.
pub fn cauchy_convolve<T>(a: &OddPowerSeries<T>, b: &OddPowerSeries<T>, n: usize) -> Result<T>
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T>,
{
    let available = a.order().min(b.order());
    if n > available {
        return Err(Error::InsufficientOrder {
            requested: n,
            available,
        });
    }
    Ok(convolve_slices(&a.coeffs, &b.coeffs, n))
}

/// Exact table `a_0..a_N` of the quadratic majorant recurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalanTable {
    values: Vec<BigUint>,
}

impl CatalanTable {
    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    /// Floating copy as an odd series, `c_n = a_n`.
    pub fn to_series(&self) -> OddPowerSeries<f64> {
        OddPowerSeries {
            coeffs: self.values.iter().map(biguint_to_f64).collect(),
        }
    }
}

/// `a_0 = 1`, `a_{n+1} = Σ_{k=0}^{n} a_k a_{n-k}` by exact integer convolution.
pub fn catalan_recurrence(order: usize) -> CatalanTable {
    let mut values: Vec<BigUint> = Vec::with_capacity(order + 1);
    values.push(BigUint::one());
    for n in 0..order {
        let next = convolve_slices(&values, &values, n);
        values.push(next);
    }
    CatalanTable { values }
}

/// Closed form `binom(2n+2, n+1) / (4n+2)`; the division is exact.
pub fn catalan_closed(n: usize) -> BigUint {
    let m = n + 1;
    // binom(2m, m) built incrementally: binom(m+i, i) * (m+i+1) / (i+1) stays integral.
    let mut binom = BigUint::one();
    for i in 0..m {
        binom = binom * BigUint::from(m + i + 1) / BigUint::from(i + 1);
    }
    binom / BigUint::from(4 * n + 2)
}

fn biguint_to_f64(v: &BigUint) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}

/// Natural log of a big integer without overflowing `f64`.
fn ln_biguint(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return biguint_to_f64(v).ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Inputs of the BMO majorant `a_n (1+|β|)^n |L0|^(n+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MajorantParams {
    /// Orthogonal-bracket coupling, identified with `1/α`.
    pub beta: f64,
    /// BMO norm of the level-0 martingale.
    pub l0_norm: f64,
    /// `|A|_ω`, the conditional remaining-variation bound of `A`.
    pub a_omega: f64,
    /// Scale `γ` of the finite-variation part of the terminal value.
    pub gamma: f64,
}

impl MajorantParams {
    pub fn new(beta: f64, l0_norm: f64, a_omega: f64, gamma: f64) -> Result<Self> {
        if !(l0_norm >= 0.0) || !(a_omega >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "L0 norm and |A|_ω must be non-negative (got {l0_norm}, {a_omega})"
            )));
        }
        Ok(Self {
            beta,
            l0_norm,
            a_omega,
            gamma,
        })
    }

    /// Parameters with the level-0 norm bounded by `γ |A|_ω` (the `η̄ = 0` case).
    pub fn from_source(beta: f64, a_omega: f64, gamma: f64) -> Result<Self> {
        Self::new(beta, gamma.abs() * a_omega, a_omega, gamma)
    }
}

/// `a_n (1+|β|)^n L0^(n+1)` with `a_n` taken from [`catalan_closed`].
pub fn majorant_term(n: usize, p: &MajorantParams) -> f64 {
    if p.l0_norm == 0.0 {
        return 0.0;
    }
    let a_n = catalan_closed(n);
    // Direct product while every factor is representable; log space beyond.
    if let Some(a) = a_n.to_f64().filter(|a| a.is_finite()) {
        let direct = a * (1.0 + p.beta.abs()).powi(n as i32) * p.l0_norm.powi(n as i32 + 1);
        if direct.is_normal() {
            return direct;
        }
    }
    let log =
        ln_biguint(&a_n) + n as f64 * (1.0 + p.beta.abs()).ln() + (n + 1) as f64 * p.l0_norm.ln();
    log.exp()
}

/// Successive ratio `majorant_term(n+1) / majorant_term(n)`, zero when the
/// majorant vanishes identically.
pub fn majorant_ratio(n: usize, p: &MajorantParams) -> f64 {
    if p.l0_norm == 0.0 {
        return 0.0;
    }
    let log = ln_biguint(&catalan_closed(n + 1)) - ln_biguint(&catalan_closed(n))
        + (1.0 + p.beta.abs()).ln()
        + p.l0_norm.ln();
    log.exp()
}

/// Largest admissible `γ`: `1 / (4 |A|_ω (1+|β|))`.
pub fn convergence_threshold(p: &MajorantParams) -> Result<f64> {
    if p.a_omega == 0.0 {
        return Err(Error::ThresholdUndefined);
    }
    Ok(1.0 / (4.0 * p.a_omega * (1.0 + p.beta.abs())))
}

/// Radius of convergence (in `s`) of `Σ c_n s^(2n+1)`.
///
/// Estimator: over the tail window `[len/2, len)` take the first and last
/// nonzero coefficients `c_lo`, `c_hi` and return
/// `(|c_lo| / |c_hi|)^(1 / (2 (hi - lo)))`. This is the geometric mean of the
/// successive ratios `|c_n / c_{n+1}|^(1/2)` across the window, and it skips
/// the structural zeros of series like the Example 2 components. Fewer than two
/// nonzero tail coefficients means the tail vanishes: the radius is infinite.
pub fn root_test_radius(series: &OddPowerSeries<f64>) -> Result<f64> {
    let coeffs = series.coeffs();
    if coeffs.len() < MIN_ROOT_TEST_COEFFS {
        return Err(Error::TooFewCoefficients {
            required: MIN_ROOT_TEST_COEFFS,
            available: coeffs.len(),
        });
    }
    let start = coeffs.len() / 2;
    let mut nonzero = coeffs
        .iter()
        .enumerate()
        .skip(start)
        .filter(|(_, c)| **c != 0.0 && c.is_finite());
    let Some((lo, c_lo)) = nonzero.next() else {
        return Ok(f64::INFINITY);
    };
    let Some((hi, c_hi)) = nonzero.next_back() else {
        return Ok(f64::INFINITY);
    };
    let log_ratio = c_lo.abs().ln() - c_hi.abs().ln();
    Ok((log_ratio / (2 * (hi - lo)) as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(c: &[f64]) -> OddPowerSeries<f64> {
        OddPowerSeries::new(c.to_vec()).unwrap()
    }

    #[test]
    fn catalan_small_tables() {
        let as_u64 = |t: CatalanTable| -> Vec<u64> {
            t.values().iter().map(|v| v.to_u64().unwrap()).collect()
        };
        assert_eq!(as_u64(catalan_recurrence(0)), vec![1]);
        assert_eq!(as_u64(catalan_recurrence(4)), vec![1, 1, 2, 5, 14]);
        assert_eq!(catalan_recurrence(2).values()[2], BigUint::from(2u32));
    }

    #[test]
    fn catalan_closed_values() {
        assert_eq!(catalan_closed(0), BigUint::from(1u32));
        assert_eq!(catalan_closed(2), BigUint::from(2u32));
        assert_eq!(catalan_closed(4), BigUint::from(14u32));
    }

    #[test]
    fn convolve_examples() {
        let a = series(&[1.0, 1.0, 2.0]);
        assert_eq!(cauchy_convolve(&a, &a, 2).unwrap(), 5.0);
        let z = series(&[0.0, 0.0, 0.0]);
        assert_eq!(cauchy_convolve(&z, &a, 2).unwrap(), 0.0);
        let one = series(&[1.0]);
        assert_eq!(cauchy_convolve(&one, &one, 0).unwrap(), 1.0);
    }

    #[test]
    fn convolve_names_missing_index() {
        let a = series(&[1.0, 1.0]);
        let err = cauchy_convolve(&a, &a, 3).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientOrder {
                requested: 3,
                available: 1
            }
        ));
        assert!(err.to_string().contains("index 3"));
    }

    #[test]
    fn empty_series_rejected() {
        assert!(matches!(
            OddPowerSeries::<f64>::new(vec![]),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn majorant_examples() {
        let p = MajorantParams::new(3.7, 0.3, 1.0, 0.1).unwrap();
        assert!((majorant_term(0, &p) - 0.3).abs() < 1e-15);
        let p = MajorantParams::new(1.0, 0.5, 1.0, 0.1).unwrap();
        // 1 · 2 · 0.5² = 0.5
        assert!((majorant_term(1, &p) - 0.5).abs() < 1e-15);
        let p = MajorantParams::new(0.0, 1.0, 1.0, 0.1).unwrap();
        assert!((majorant_term(2, &p) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn majorant_far_out_does_not_overflow() {
        let p = MajorantParams::new(0.0, 0.2, 1.0, 0.2).unwrap();
        let t = majorant_term(2000, &p);
        assert!(t.is_finite() && t < 1e-100);
    }

    #[test]
    fn threshold_examples() {
        let th =
            |a, b| convergence_threshold(&MajorantParams::new(b, 0.0, a, 0.0).unwrap()).unwrap();
        assert!((th(1.0, 0.0) - 0.25).abs() < 1e-15);
        assert!((th(0.5, 1.0) - 0.25).abs() < 1e-15);
        assert!((th(1.0, -1.0) - 0.125).abs() < 1e-15);
        let zero = MajorantParams::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let err = convergence_threshold(&zero).unwrap_err();
        assert_eq!(
            err.to_string(),
            "threshold undefined; any γ admissible (|A|_ω = 0)"
        );
    }

    #[test]
    fn negative_norms_rejected() {
        assert!(MajorantParams::new(0.0, -1.0, 1.0, 0.0).is_err());
        assert!(MajorantParams::new(0.0, 1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn radius_of_geometric_series_is_one() {
        let s = series(&[1.0; 40]);
        assert!((root_test_radius(&s).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn radius_of_vanishing_tail_is_infinite() {
        let mut c = vec![0.0; 32];
        c[0] = 1.0;
        c[3] = 2.0;
        assert_eq!(root_test_radius(&series(&c)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn radius_needs_sixteen_coefficients() {
        assert!(matches!(
            root_test_radius(&series(&[1.0; 15])),
            Err(Error::TooFewCoefficients { .. })
        ));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(series(&[1.0]).eval(0.5), 0.5);
        assert_eq!(series(&[3.0, -2.0, 5.0]).eval(0.0), 0.0);
        // 0.5 + 2 * 0.125
        assert_eq!(series(&[1.0, 2.0]).eval(0.5), 0.75);
        assert_eq!(series(&[1.0, 2.0]).eval_derivative(0.5), 1.0 + 6.0 * 0.25);
    }

    #[test]
    fn guarded_eval_refuses_outside_radius() {
        let s = series(&[1.0; 20]);
        assert!(s.eval_guarded(0.5).is_ok());
        let err = s.eval_guarded(0.96).unwrap_err();
        assert!(matches!(err, Error::OutsideRadius { .. }));
        assert!(err.to_string().contains("estimated radius 1"));
    }
}
