//! Pathwise check of `ℰ_T(m) ℰ_T^α(m⊥) = c e^η` on Example 1.
//!
//! # From the additive equation to the exponential one
//!
//! Taking logarithms, the exponential equation reads
//!
//! ```text
//! m_T - ½⟨m⟩_T + α (m⊥_T - ½⟨m⊥⟩_T) = log c + η̄ + γ A_T.
//! ```
//!
//! Substituting `m = 2L` and `m⊥ = (2/α) L⊥` turns the left side into
//! `2 (L_T + L⊥_T - ⟨L⟩_T - (1/α)⟨L⊥⟩_T)`, so the pair solves the additive
//! equation `L_T + L⊥_T = c' + ⟨L⟩_T + (1/α)⟨L⊥⟩_T + (γ/2) A_T` exactly when
//! `log c = 2 c'`.
//!
//! For Example 1 (`α = -1`, `A_t = ½∫(W² + W⊥²)`) with a general `γ ≥ 0`,
//! write `k = √(γ/2)`. The Markovian ansatz `L = ∫ f(T-s) W_s dW_s`,
//! `L⊥ = ∫ h(T-s) W⊥_s dW⊥_s` gives `f' = γ/2 + 2f²`, `h' = γ/2 - 2h²`, so
//! `f(τ) = k α(kτ)` and `h(τ) = k β(kτ)` with `α = tan(√2·)/√2`,
//! `β = +tanh(√2·)/√2`, and
//!
//! ```text
//! log c = ½ ln( cos(√γ T) / cosh(√γ T) ).
//! ```
//!
//! At `γ = 2` this is the quotient reading of the Example 1 constant.
//!
//! # Discretisation bias
//!
//! Every term uses left-endpoint sums. The Itô sums have mean zero, so the
//! residual mean is `Σ φ(t_i) dt - ∫ φ dt` with
//! `φ(t) = t (2h(T-t)² - 2f(T-t)² - γ)`, whose leading part is `γ T dt / 2`.
//! The acceptance band is `4 · std_error + γ T dt`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{blowup_horizon, ex1_closed, ex1_constant, ConstantReading};
use crate::mc::paths::{BrownianSource, Path2};
use crate::mc::stats::summarize;

/// Coupling `α` of Example 1.
pub const EX1_ALPHA: f64 = -1.0;

/// Refuse horizons beyond this fraction of the blow-up time.
pub const HORIZON_FRACTION: f64 = 0.95;

/// Standard errors allowed in the residual band.
pub const BAND_STD_ERRORS: f64 = 4.0;

/// Statistics of the per-path log-residual for one constant reading and one
/// time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub reading: ConstantReading,
    pub horizon: f64,
    pub gamma: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub dt: f64,
    pub seed: u64,
    pub log_c: f64,
    pub mean: f64,
    pub std: f64,
    pub std_error: f64,
    pub max_abs: f64,
    /// `4 · std_error + γ T dt`
    pub band: f64,
    pub within_band: bool,
}

/// Setup shared by every resolution of one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpEquationConfig {
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub gamma: f64,
}

impl ExpEquationConfig {
    pub fn example1(horizon: f64, n_paths: usize, seed: u64) -> Self {
        Self {
            horizon,
            n_paths,
            seed,
            gamma: 2.0,
        }
    }

    fn scale(&self) -> f64 {
        (self.gamma / 2.0).sqrt()
    }

    /// Blow-up time `π / (2√γ)` of the scaled example.
    pub fn blowup(&self) -> f64 {
        if self.gamma == 0.0 {
            f64::INFINITY
        } else {
            blowup_horizon() / self.scale()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "γ must be >= 0, got {}",
                self.gamma
            )));
        }
        if self.n_paths < 2 {
            return Err(Error::InvalidParameter("n_paths must be >= 2".into()));
        }
        let limit = HORIZON_FRACTION * self.blowup();
        if self.horizon >= limit {
            return Err(Error::HorizonTooLarge {
                horizon: self.horizon,
                limit,
                reason: "too close to the blow-up horizon",
            });
        }
        Ok(())
    }

    /// `log c` for the chosen reading, in the scaled variables.
    pub fn log_c(&self, reading: ConstantReading) -> Result<f64> {
        if self.gamma == 0.0 {
            return Ok(0.0);
        }
        ex1_constant(self.scale() * self.horizon, reading)
    }

    /// `(f(τ), h(τ))` at `τ = T - t`.
    fn integrands(&self, tau: f64) -> (f64, f64) {
        if self.gamma == 0.0 {
            return (0.0, 0.0);
        }
        let k = self.scale();
        let (a, b) = ex1_closed(k * tau).expect("validated horizon");
        (k * a, k * b)
    }
}

/// Per-path `log ℰ_T(m) + α log ℰ_T(m⊥) - γ A_T` with `m = 2L`,
/// `m⊥ = (2/α) L⊥`, on the path's own grid.
fn raw_residual(path: &Path2, coeffs: &[(f64, f64)], gamma: f64) -> f64 {
    let dt = path.dt;
    let (mut m, mut qm, mut mp, mut qmp, mut a) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &(f, h)) in coeffs.iter().enumerate() {
        let (w, wp) = (path.w[i], path.w_perp[i]);
        let (dw, dwp) = (path.w[i + 1] - w, path.w_perp[i + 1] - wp);
        let g = 2.0 * f * w;
        let gp = 2.0 / EX1_ALPHA * h * wp;
        m += g * dw;
        qm += g * g;
        mp += gp * dwp;
        qmp += gp * gp;
        a += 0.5 * (w * w + wp * wp);
    }
    (m - 0.5 * qm * dt) + EX1_ALPHA * (mp - 0.5 * qmp * dt) - gamma * a * dt
}

/// Per-path raw residuals (before subtracting `log c`) for each step count.
///
/// Paths are drawn once on the finest grid and subsampled, so the coarser
/// resolutions see the same Brownian motions.
pub fn raw_residual_sweep(cfg: &ExpEquationConfig, step_counts: &[usize]) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let finest = *step_counts
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidParameter("no step counts given".into()))?;
    if let Some(bad) = step_counts.iter().find(|&&n| n < 2 || finest % n != 0) {
        return Err(Error::InvalidParameter(format!(
            "step count {bad} must be >= 2 and divide the finest count {finest}"
        )));
    }
    let source = BrownianSource::new(cfg.horizon, finest, cfg.seed)?;
    let tables: Vec<Vec<(f64, f64)>> = step_counts
        .iter()
        .map(|&n| {
            let dt = cfg.horizon / n as f64;
            (0..n)
                .map(|i| cfg.integrands(cfg.horizon - i as f64 * dt))
                .collect()
        })
        .collect();
    let per_path: Vec<Vec<f64>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = source.path(i);
            step_counts
                .iter()
                .zip(&tables)
                .map(|(&n, table)| raw_residual(&path.subsample(finest / n), table, cfg.gamma))
                .collect()
        })
        .collect();
    Ok((0..step_counts.len())
        .map(|k| per_path.iter().map(|r| r[k]).collect())
        .collect())
}

/// Turns raw residuals into a report for one reading.
pub fn report(
    cfg: &ExpEquationConfig,
    n_steps: usize,
    raw: &[f64],
    reading: ConstantReading,
) -> Result<ResidualReport> {
    let log_c = cfg.log_c(reading)?;
    let residuals: Vec<f64> = raw.iter().map(|r| r - log_c).collect();
    let s = summarize(&residuals);
    let dt = cfg.horizon / n_steps as f64;
    let band = BAND_STD_ERRORS * s.std_error + cfg.gamma * cfg.horizon * dt;
    Ok(ResidualReport {
        reading,
        horizon: cfg.horizon,
        gamma: cfg.gamma,
        n_paths: cfg.n_paths,
        n_steps,
        dt,
        seed: cfg.seed,
        log_c,
        mean: s.mean,
        std: s.std,
        std_error: s.std_error,
        max_abs: s.max_abs,
        band,
        within_band: s.mean.abs() <= band,
    })
}

/// Reports for every `(step count, reading)` pair, step-major.
pub fn verify_exponential_equation_sweep(
    cfg: &ExpEquationConfig,
    step_counts: &[usize],
    readings: &[ConstantReading],
) -> Result<Vec<ResidualReport>> {
    let raw = raw_residual_sweep(cfg, step_counts)?;
    let mut out = Vec::with_capacity(step_counts.len() * readings.len());
    for (&n, r) in step_counts.iter().zip(&raw) {
        for &reading in readings {
            out.push(report(cfg, n, r, reading)?);
        }
    }
    Ok(out)
}

/// Single-resolution residual check for Example 1 (`γ = 2`).
pub fn verify_exponential_equation_ex1(
    horizon: f64,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
    reading: ConstantReading,
) -> Result<ResidualReport> {
    let cfg = ExpEquationConfig::example1(horizon, n_paths, seed);
    let raw = raw_residual_sweep(&cfg, &[n_steps])?;
    report(&cfg, n_steps, &raw[0], reading)
}
