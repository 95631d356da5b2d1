//! Reproducible 2-D Brownian paths.
//!
//! Randomness comes from ChaCha8, a counter-based stream cipher generator.
//! The generator for path `i` is keyed by `seed` and switched to stream `i`,
//! so a path depends only on `(seed, i, n_steps)`: serial, parallel and
//! partial runs all see the same numbers. Increments are drawn as
//! `(dW_1, dW⊥_1, dW_2, dW⊥_2, ...)` from the ziggurat standard normal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which Brownian component drives a stochastic integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Driver {
    W,
    WPerp,
}

/// Seeded source of independent paths on a uniform grid of `n_steps` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrownianSource {
    horizon: f64,
    n_steps: usize,
    seed: u64,
}

impl BrownianSource {
    pub fn new(horizon: f64, n_steps: usize, seed: u64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if n_steps < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_steps must be >= 2, got {n_steps}"
            )));
        }
        Ok(Self {
            horizon,
            n_steps,
            seed,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    /// Path number `index`; always the same numbers for the same source.
    pub fn path(&self, index: u64) -> Path2 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let sd = self.dt().sqrt();
        let mut w = Vec::with_capacity(self.n_steps + 1);
        let mut w_perp = Vec::with_capacity(self.n_steps + 1);
        let (mut a, mut b) = (0.0, 0.0);
        w.push(a);
        w_perp.push(b);
        for _ in 0..self.n_steps {
            let za: f64 = rng.sample(StandardNormal);
            let zb: f64 = rng.sample(StandardNormal);
            a += sd * za;
            b += sd * zb;
            w.push(a);
            w_perp.push(b);
        }
        Path2 {
            w,
            w_perp,
            dt: self.dt(),
        }
    }

    /// Maps every path index through `f` in parallel; output order is path order.
    pub fn map_paths<T, F>(&self, n_paths: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&Path2) -> T + Sync,
    {
        (0..n_paths as u64)
            .into_par_iter()
            .map(|i| f(&self.path(i)))
            .collect()
    }
}

/// One sampled path of `(W, W⊥)` at times `t_i = i dt`, with `W_0 = W⊥_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path2 {
    pub w: Vec<f64>,
    pub w_perp: Vec<f64>,
    pub dt: f64,
}

impl Path2 {
    pub fn n_steps(&self) -> usize {
        self.w.len() - 1
    }

    pub fn driver(&self, driver: Driver) -> &[f64] {
        match driver {
            Driver::W => &self.w,
            Driver::WPerp => &self.w_perp,
        }
    }

    /// The same path observed every `stride` steps.
    pub fn subsample(&self, stride: usize) -> Path2 {
        assert!(
            stride >= 1 && self.n_steps() % stride == 0,
            "stride must divide n_steps"
        );
        Path2 {
            w: self.w.iter().step_by(stride).copied().collect(),
            w_perp: self.w_perp.iter().step_by(stride).copied().collect(),
            dt: self.dt * stride as f64,
        }
    }

    /// Left-endpoint Itô sum `Σ f(t_i, W_i, W⊥_i) (X_{i+1} - X_i)`.
    pub fn ito_integral<F: Fn(f64, f64, f64) -> f64>(&self, f: F, driver: Driver) -> f64 {
        let x = self.driver(driver);
        (0..self.n_steps())
            .map(|i| f(i as f64 * self.dt, self.w[i], self.w_perp[i]) * (x[i + 1] - x[i]))
            .sum()
    }

    /// Left-endpoint Riemann sum `Σ g(t_i, W_i, W⊥_i) dt`; with `g = f²` this is
    /// the bracket of the matching Itô integral.
    pub fn time_integral<F: Fn(f64, f64, f64) -> f64>(&self, g: F) -> f64 {
        (0..self.n_steps())
            .map(|i| g(i as f64 * self.dt, self.w[i], self.w_perp[i]))
            .sum::<f64>()
            * self.dt
    }
}

/// A materialised set of paths, for experiments small enough to hold in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub source: BrownianSource,
    pub paths: Vec<Path2>,
}

/// Samples `n_paths` independent 2-D Brownian paths on `[0, T]`.
pub fn sample_paths(horizon: f64, n_paths: usize, n_steps: usize, seed: u64) -> Result<PathBundle> {
    if n_paths == 0 {
        return Err(Error::InvalidParameter("n_paths must be >= 1".into()));
    }
    let source = BrownianSource::new(horizon, n_steps, seed)?;
    let paths = source.map_paths(n_paths, Path2::clone);
    Ok(PathBundle { source, paths })
}

impl PathBundle {
    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn n_steps(&self) -> usize {
        self.source.n_steps()
    }

    pub fn dt(&self) -> f64 {
        self.source.dt()
    }

    pub fn seed(&self) -> u64 {
        self.source.seed()
    }

    /// Per-path left-endpoint Itô integrals of `f(t, W_t, W⊥_t)` against `driver`.
    pub fn ito_integral<F>(&self, f: F, driver: Driver) -> Vec<f64>
    where
        F: Fn(f64, f64, f64) -> f64 + Sync,
    {
        self.paths
            .par_iter()
            .map(|p| p.ito_integral(&f, driver))
            .collect()
    }

    /// Per-path `Σ g(t_i, W_i, W⊥_i) dt`.
    pub fn time_integral<F>(&self, g: F) -> Vec<f64>
    where
        F: Fn(f64, f64, f64) -> f64 + Sync,
    {
        self.paths.par_iter().map(|p| p.time_integral(&g)).collect()
    }

    /// Terminal values of the chosen component.
    pub fn terminal(&self, driver: Driver) -> Vec<f64> {
        self.paths
            .iter()
            .map(|p| *p.driver(driver).last().unwrap())
            .collect()
    }

    /// Every increment of both components, path-major.
    pub fn increments(&self) -> Vec<f64> {
        self.paths
            .iter()
            .flat_map(|p| {
                p.w.windows(2)
                    .map(|d| d[1] - d[0])
                    .chain(p.w_perp.windows(2).map(|d| d[1] - d[0]))
            })
            .collect()
    }
}

/// `exp(M_T - ½ ⟨M⟩_T)` per path.
pub fn stochastic_exponential(martingale: &[f64], bracket: &[f64]) -> Vec<f64> {
    martingale
        .iter()
        .zip(bracket)
        .map(|(m, q)| (m - 0.5 * q).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::stats::summarize;

    #[test]
    fn paths_start_at_zero_and_are_deterministic() {
        let a = sample_paths(1.0, 16, 50, 3).unwrap();
        let b = sample_paths(1.0, 16, 50, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.paths.iter().all(|p| p.w[0] == 0.0 && p.w_perp[0] == 0.0));
        let c = sample_paths(1.0, 16, 50, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn path_prefix_independent_of_bundle_size() {
        let small = sample_paths(1.0, 3, 20, 9).unwrap();
        let large = sample_paths(1.0, 10, 20, 9).unwrap();
        assert_eq!(small.paths[..], large.paths[..3]);
    }

    #[test]
    fn increments_pass_sanity_gate() {
        let b = sample_paths(1.0, 400, 100, 11).unwrap();
        let inc = b.increments();
        let s = summarize(&inc);
        let n = inc.len() as f64;
        assert!(s.mean.abs() <= 5.0 / n.sqrt(), "{s:?}");
        assert!((s.std * s.std / b.dt() - 1.0).abs() < 0.05);
    }

    #[test]
    fn constant_integrand_gives_terminal_value() {
        let b = sample_paths(1.0, 8, 64, 1).unwrap();
        let i = b.ito_integral(|_, _, _| 1.0, Driver::WPerp);
        for (x, y) in i.iter().zip(b.terminal(Driver::WPerp)) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn subsample_keeps_grid_values() {
        let p = BrownianSource::new(1.0, 8, 5).unwrap().path(2);
        let q = p.subsample(4);
        assert_eq!(q.w, vec![p.w[0], p.w[4], p.w[8]]);
        assert_eq!(q.dt, 0.5);
    }

    #[test]
    fn exponential_of_zero_is_one() {
        assert_eq!(stochastic_exponential(&[0.0], &[0.0]), vec![1.0]);
        assert!(stochastic_exponential(&[-50.0, 3.0], &[100.0, 0.1])
            .iter()
            .all(|v| *v > 0.0));
    }

    #[test]
    fn rejects_degenerate_shapes() {
        assert!(sample_paths(1.0, 0, 10, 0).is_err());
        assert!(sample_paths(1.0, 1, 1, 0).is_err());
        assert!(sample_paths(-1.0, 1, 10, 0).is_err());
    }
}
