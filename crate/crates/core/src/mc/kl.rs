//! `E exp(∫_0^T W_t² dt)` by path sampling and by the Karhunen–Loève product.
//!
//! Scaling time to `[0, 1]` gives `∫_0^T W² dt = T² ∫_0^1 W² dt`. The
//! covariance operator `f ↦ ∫_0^1 (t ∧ s) f(s) ds` has eigenpairs
//! `λ_n = 1/((n - ½)² π²)`, `e_n(t) = √2 sin((n - ½) π t)`, and the
//! coordinates of `W` along `e_n` are independent `N(0, λ_n)`. Hence
//!
//! ```text
//! E exp(∫_0^T W²) = Π_n (1 - 2T² λ_n)^(-1/2) = 1 / √cos(√2 T),   T < π/(2√2),
//! ```
//!
//! and the expectation is infinite from `T = π/(2√2)` on.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::blowup_horizon;
use crate::mc::paths::BrownianSource;
use crate::mc::stats::{summarize, Estimate};

/// Path sampling refuses horizons beyond this fraction of the blow-up time:
/// the estimator's variance is already infinite well before it.
pub const SAMPLING_FRACTION: f64 = 0.9;

/// `1 / √cos(√2 T)`.
pub fn exp_quadratic_closed_form(horizon: f64) -> Result<f64> {
    let limit = blowup_horizon();
    if horizon >= limit {
        return Err(Error::BeyondBlowUp { horizon, limit });
    }
    Ok(1.0 / (SQRT_2 * horizon).cos().sqrt())
}

/// Eigenpairs of the Brownian covariance operator on `[0, 1]`, indexed from 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KLExpansion {
    pub n_modes: usize,
}

impl KLExpansion {
    pub fn new(n_modes: usize) -> Self {
        Self { n_modes }
    }

    pub fn lambda(n: usize) -> f64 {
        let k = n as f64 - 0.5;
        1.0 / (k * k * PI * PI)
    }

    pub fn efunc(n: usize, t: f64) -> f64 {
        SQRT_2 * ((n as f64 - 0.5) * PI * t).sin()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        (1..=self.n_modes).map(Self::lambda).collect()
    }
}

/// Truncated product and a bound on the logarithm of the omitted factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlProduct {
    pub horizon: f64,
    pub n_modes: usize,
    pub value: f64,
    /// Upper bound on `log(full product) - log(value)`.
    pub log_tail_bound: f64,
}

impl KlProduct {
    /// Upper end of the interval known to contain the full product.
    pub fn upper(&self) -> f64 {
        self.value * self.log_tail_bound.exp()
    }
}

/// `Π_{n ≤ n_modes} (1 - 2T² λ_n)^(-1/2)`.
///
/// The omitted log-factors satisfy `-½ ln(1 - x_n) ≤ ½ x_n / (1 - x_{N+1})`
/// and `Σ_{n>N} λ_n ≤ 1 / ((N - ½) π²)`.
pub fn kl_product_formula(horizon: f64, n_modes: usize) -> Result<KlProduct> {
    if n_modes == 0 {
        return Err(Error::InvalidParameter("n_modes must be >= 1".into()));
    }
    let x1 = 2.0 * horizon * horizon * KLExpansion::lambda(1);
    if x1 >= 1.0 {
        return Err(Error::BeyondBlowUp {
            horizon,
            limit: blowup_horizon(),
        });
    }
    let log: f64 = (1..=n_modes)
        .map(|n| -0.5 * (-2.0 * horizon * horizon * KLExpansion::lambda(n)).ln_1p())
        .sum();
    let t2 = horizon * horizon;
    let tail_lambda = 1.0 / ((n_modes as f64 - 0.5) * PI * PI);
    let next = 2.0 * t2 * KLExpansion::lambda(n_modes + 1);
    Ok(KlProduct {
        horizon,
        n_modes,
        value: log.exp(),
        log_tail_bound: t2 * tail_lambda / (1.0 - next),
    })
}

/// Quadrature diagnostics for the eigenpairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlCheck {
    pub n_modes: usize,
    pub quadrature_points: usize,
    /// `max_{n≠m} |∫ e_n e_m|`
    pub max_off_diagonal: f64,
    /// `max_n |∫ e_n² - 1|`
    pub max_diagonal_error: f64,
    /// `max_{n,t} |∫ (t∧s) e_n(s) ds - λ_n e_n(t)|`
    pub max_eigen_residual: f64,
}

/// Midpoint-rule check of orthonormality and of the eigen-equation.
pub fn kl_orthogonality_check(n_modes: usize, quadrature_points: usize) -> Result<KlCheck> {
    if n_modes == 0 || quadrature_points < 2 {
        return Err(Error::InvalidParameter(
            "need at least one mode and two quadrature points".into(),
        ));
    }
    let h = 1.0 / quadrature_points as f64;
    let nodes: Vec<f64> = (0..quadrature_points)
        .map(|i| (i as f64 + 0.5) * h)
        .collect();
    let table: Vec<Vec<f64>> = (1..=n_modes)
        .map(|n| nodes.iter().map(|&t| KLExpansion::efunc(n, t)).collect())
        .collect();

    let mut max_off = 0.0f64;
    let mut max_diag = 0.0f64;
    for i in 0..n_modes {
        for j in i..n_modes {
            let ip: f64 = table[i]
                .iter()
                .zip(&table[j])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                * h;
            if i == j {
                max_diag = max_diag.max((ip - 1.0).abs());
            } else {
                max_off = max_off.max(ip.abs());
            }
        }
    }

    // ∫_0^1 (t_j ∧ s) e(s) ds = Σ_{i<j} s_i e_i h + t_j Σ_{i≥j} e_i h.
    let mut max_res = 0.0f64;
    for (n, e) in table.iter().enumerate() {
        let lambda = KLExpansion::lambda(n + 1);
        let mut suffix: Vec<f64> = vec![0.0; quadrature_points + 1];
        for i in (0..quadrature_points).rev() {
            suffix[i] = suffix[i + 1] + e[i];
        }
        let mut prefix = 0.0;
        for j in 0..quadrature_points {
            let integral = (prefix + nodes[j] * suffix[j]) * h;
            max_res = max_res.max((integral - lambda * e[j]).abs());
            prefix += nodes[j] * e[j];
        }
    }
    Ok(KlCheck {
        n_modes,
        quadrature_points,
        max_off_diagonal: max_off,
        max_diagonal_error: max_diag,
        max_eigen_residual: max_res,
    })
}

/// Monte Carlo mean of `exp(Σ W_{t_i}² dt)` (left-endpoint sum) with its
/// standard error; the target is `1/√cos(√2 T)`.
pub fn estimate_exp_quadratic_functional(
    horizon: f64,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
) -> Result<Estimate> {
    let target = exp_quadratic_closed_form(horizon)?;
    let limit = SAMPLING_FRACTION * blowup_horizon();
    if horizon > limit {
        return Err(Error::HorizonTooLarge {
            horizon,
            limit,
            reason: "E exp(∫W²) is infinite from π/(2√2) on and the estimator variance diverges before it",
        });
    }
    if n_paths < 2 {
        return Err(Error::InvalidParameter("n_paths must be >= 2".into()));
    }
    let source = BrownianSource::new(horizon, n_steps, seed)?;
    let samples = source.map_paths(n_paths, |p| p.time_integral(|_, w, _| w * w).exp());
    let s = summarize(&samples);
    Ok(Estimate {
        mean: s.mean,
        std_error: s.std_error,
        n_paths,
        n_steps,
        seed,
        target,
    })
}
