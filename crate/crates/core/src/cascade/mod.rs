//! The Markovian Adomian cascade: backward heat equations for the levels
//! `v⁰, v¹, ...` of `Y_t = v(t, W_t, W⊥_t)`.
//!
//! With `a = (γ/2) ρ` where `ρ` is the density of `A`, the levels solve
//!
//! ```text
//! (∂_t + ½Δ) v⁰ + a = 0,                                   v⁰(T) = ½ η̄,
//! (∂_t + ½Δ) vⁿ + κ Σ_{k<n} (v_x^k v_x^{n-1-k} + w v_y^k v_y^{n-1-k}) = 0,   vⁿ(T) = 0.
//! ```
//!
//! The prefactor `κ` and the weight `w` are explicit. Matching the generator
//! `⟨L⟩ + (1/α)⟨L⊥⟩` of the additive equation needs `κ = 1` and `w = 1/α`;
//! with these, `∂_x Σvⁿ` reproduces the coefficient series of both examples
//! (level 1 of Example 1 has `v¹_x = (2/3)(T-t)³ x`). Those are the defaults.
//!
//! All levels are marched backward together: at every step level `n` takes
//! its source from the already-updated levels `0..n`. Only a fixed number of
//! time slices is retained.

mod grid;
pub mod io;
mod solver;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use grid::{GridFunction, GridSpec};
use solver::{half_laplacian_neumann, EdgeRow, ImplicitStepper};

type SpaceTimeFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
type SpaceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Density `ρ(t, x, y)` of the finite-variation process `A_t = ∫ρ ds`.
#[derive(Clone)]
pub enum Density {
    Zero,
    /// `½(x² + y²)`, Example 1.
    HalfSquares,
    /// `x y`, Example 2.
    Product,
    Custom {
        label: String,
        f: SpaceTimeFn,
    },
}

impl Density {
    pub fn custom<F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static>(label: &str, f: F) -> Self {
        Density::Custom {
            label: label.to_string(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, t: f64, x: f64, y: f64) -> f64 {
        match self {
            Density::Zero => 0.0,
            Density::HalfSquares => 0.5 * (x * x + y * y),
            Density::Product => x * y,
            Density::Custom { f, .. } => f(t, x, y),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Density::Zero => "0",
            Density::HalfSquares => "(x^2+y^2)/2",
            Density::Product => "x*y",
            Density::Custom { label, .. } => label,
        }
    }
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Bounded terminal data `η̄(x, y)`.
#[derive(Clone)]
pub enum Terminal {
    Zero,
    Custom { label: String, f: SpaceFn },
}

impl Terminal {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Terminal::Zero => 0.0,
            Terminal::Custom { f, .. } => f(x, y),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Terminal::Zero => "0",
            Terminal::Custom { label, .. } => label,
        }
    }
}

impl fmt::Debug for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One BSDE instance `η = η̄ + γ A_T` in the Markovian 2-D Brownian setting.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub alpha_coupling: f64,
    /// `1/α`, the weight on the orthogonal bracket.
    pub beta: f64,
    pub gamma: f64,
    pub horizon: f64,
    pub density: Density,
    pub eta_bar: Terminal,
}

impl ProblemSpec {
    pub fn new(
        alpha_coupling: f64,
        gamma: f64,
        horizon: f64,
        density: Density,
        eta_bar: Terminal,
    ) -> Result<Self> {
        if alpha_coupling == 0.0 || !alpha_coupling.is_finite() {
            return Err(Error::InvalidParameter(
                "α must be finite and nonzero".into(),
            ));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "T must be positive, got {horizon}"
            )));
        }
        Ok(Self {
            alpha_coupling,
            beta: 1.0 / alpha_coupling,
            gamma,
            horizon,
            density,
            eta_bar,
        })
    }

    /// `α = -1`, `γ = 2`, `ρ = ½(x² + y²)`.
    pub fn example1(horizon: f64) -> Result<Self> {
        Self::new(-1.0, 2.0, horizon, Density::HalfSquares, Terminal::Zero)
    }

    /// `α = -1`, `γ = 2`, `ρ = x y`.
    pub fn example2(horizon: f64) -> Result<Self> {
        Self::new(-1.0, 2.0, horizon, Density::Product, Terminal::Zero)
    }

    /// PDE source `a = (γ/2) ρ`.
    pub fn source(&self, t: f64, x: f64, y: f64) -> f64 {
        0.5 * self.gamma * self.density.eval(t, x, y)
    }

    /// Closed-form `v⁰(t, x, y)` when one is known (`η̄ = 0`, built-in densities).
    pub fn level0_exact(&self) -> Option<impl Fn(f64, f64, f64) -> f64 + Sync + '_> {
        if !matches!(self.eta_bar, Terminal::Zero) {
            return None;
        }
        let k = 0.5 * self.gamma;
        let horizon = self.horizon;
        let kind = match self.density {
            Density::Zero => 0,
            Density::HalfSquares => 1,
            Density::Product => 2,
            Density::Custom { .. } => return None,
        };
        Some(move |t: f64, x: f64, y: f64| {
            let tau = horizon - t;
            match kind {
                1 => k * (0.5 * tau * (x * x + y * y) + 0.5 * tau * tau),
                2 => k * tau * x * y,
                _ => 0.0,
            }
        })
    }

    pub fn check(&self) -> Result<()> {
        if (self.beta * self.alpha_coupling - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "β·α must equal 1 (β = {}, α = {})",
                self.beta, self.alpha_coupling
            )));
        }
        Ok(())
    }
}

/// Time discretisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeScheme {
    /// Split backward Euler; unconditionally stable.
    Implicit,
    /// Forward Euler, refused unless `dt ≤ h²/4`.
    Explicit,
}

/// Boundary handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryMode {
    /// Zero normal derivative for every level.
    ZeroNeumann,
    /// Dirichlet data from the closed-form `v⁰` when the problem has one;
    /// zero Neumann for the higher levels.
    AnalyticLevel0,
}

/// Coefficients of the quadratic cascade source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeWeights {
    /// Prefactor `κ` of the convolution sum.
    pub scale: f64,
    /// Weight `w` on the `v_y` products.
    pub y_weight: f64,
}

impl CascadeWeights {
    /// `κ = 1`, `w = β`.
    pub fn for_problem(spec: &ProblemSpec) -> Self {
        Self {
            scale: 1.0,
            y_weight: spec.beta,
        }
    }

    /// `κ = ½` with weight `w`: the normalisation sometimes written for the
    /// level system. It halves every level above 0 relative to the
    /// coefficient recurrences, so it is only used on request.
    pub fn halved(y_weight: f64) -> Self {
        Self {
            scale: 0.5,
            y_weight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeOptions {
    pub scheme: TimeScheme,
    pub boundary: BoundaryMode,
    /// Number of retained time slices, evenly spaced and including `t = 0` and `t = T`.
    pub snapshots: usize,
    /// Half-width of the probe square used for level norms.
    pub probe_half_width: f64,
    /// Overrides [`CascadeWeights::for_problem`] when set.
    pub weights: Option<CascadeWeights>,
}

impl Default for CascadeOptions {
    fn default() -> Self {
        Self {
            scheme: TimeScheme::Implicit,
            boundary: BoundaryMode::AnalyticLevel0,
            snapshots: 5,
            probe_half_width: 1.0,
            weights: None,
        }
    }
}

/// Default depth of the cascade.
pub const DEFAULT_DEPTH: usize = 6;

/// Retained time slices of a single level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelHistory {
    /// Ascending, first `0`, last `T`.
    pub times: Vec<f64>,
    pub slices: Vec<GridFunction>,
}

#[derive(Debug, Clone)]
pub struct CascadeResult {
    pub grid: GridSpec,
    pub nt: usize,
    pub dt: f64,
    pub horizon: f64,
    pub weights: CascadeWeights,
    pub options: CascadeOptions,
    /// Ascending, first `0`, last `T`.
    pub times: Vec<f64>,
    /// `levels[n][k]` is `vⁿ` at `times[k]`.
    pub levels: Vec<Vec<GridFunction>>,
    /// `partial_sums[n][k] = Σ_{m ≤ n} v^m` at `times[k]`.
    pub partial_sums: Vec<Vec<GridFunction>>,
    /// Space-time sup of each level over the probe square and retained slices.
    pub level_norms: Vec<f64>,
}

impl CascadeResult {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// `Σ_{n ≤ depth} vⁿ` at `t = 0`.
    pub fn sum_at_start(&self) -> &GridFunction {
        &self.partial_sums[self.depth()][0]
    }

    /// `(∂_x, ∂_y)` of the summed cascade at `t = 0`, interpolated to `(x, y)`.
    pub fn summed_gradient_at_start(&self, x: f64, y: f64) -> (f64, f64) {
        let (dx, dy) = self.sum_at_start().gradient();
        (dx.sample(x, y), dy.sample(x, y))
    }

    pub fn level_history(&self, n: usize) -> LevelHistory {
        LevelHistory {
            times: self.times.clone(),
            slices: self.levels[n].clone(),
        }
    }
}

/// `κ Σ_{k<n} (v_x^k v_x^{n-1-k} + w v_y^k v_y^{n-1-k})` on one time slice,
/// with gradients from [`GridFunction::gradient`].
pub fn cascade_source(
    levels: &[GridFunction],
    n: usize,
    weights: CascadeWeights,
) -> Result<GridFunction> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "level 0 has no cascade source".into(),
        ));
    }
    if levels.len() < n {
        return Err(Error::InvalidParameter(format!(
            "level {n} needs levels 0..{}, got {}",
            n - 1,
            levels.len()
        )));
    }
    for l in &levels[1..n] {
        levels[0].ensure_same_grid(l)?;
    }
    let grads: Vec<_> = levels[..n].iter().map(GridFunction::gradient).collect();
    let mut out = GridFunction::zeros(levels[0].grid);
    accumulate_source(&grads, n, weights, &mut out.values);
    Ok(out)
}

fn accumulate_source(
    grads: &[(GridFunction, GridFunction)],
    n: usize,
    weights: CascadeWeights,
    out: &mut [f64],
) {
    out.iter_mut().for_each(|v| *v = 0.0);
    // Pair k with n-1-k once and double off-diagonal pairs.
    for k in 0..n {
        let m = n - 1 - k;
        if m < k {
            break;
        }
        let factor = if k == m {
            weights.scale
        } else {
            2.0 * weights.scale
        };
        let (ax, ay) = (&grads[k].0.values, &grads[k].1.values);
        let (bx, by) = (&grads[m].0.values, &grads[m].1.values);
        for i in 0..out.len() {
            out[i] += factor * (ax[i] * bx[i] + weights.y_weight * ay[i] * by[i]);
        }
    }
}

fn snapshot_steps(nt: usize, snapshots: usize) -> Vec<usize> {
    let s = snapshots.max(2);
    let mut steps: Vec<usize> = (0..s)
        .map(|j| ((j as f64) * nt as f64 / (s - 1) as f64).round() as usize)
        .collect();
    steps.dedup();
    steps
}

/// Runs the cascade with [`CascadeOptions::default`].
pub fn run_cascade(
    spec: &ProblemSpec,
    grid: GridSpec,
    nt: usize,
    depth: usize,
) -> Result<CascadeResult> {
    run_cascade_with(spec, grid, nt, depth, &CascadeOptions::default())
}

/// The linear level alone.
pub fn solve_level0(
    spec: &ProblemSpec,
    grid: GridSpec,
    nt: usize,
    options: &CascadeOptions,
) -> Result<LevelHistory> {
    let r = run_cascade_with(spec, grid, nt, 0, options)?;
    Ok(r.level_history(0))
}

/// `‖v^(n+1)‖ / ‖vⁿ‖` on the probe square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelRatio {
    pub n: usize,
    pub ratio: f64,
    /// Set when `‖vⁿ‖ = 0`; `ratio` is then reported as 0.
    pub degenerate: bool,
}

pub fn level_norm_ratio(result: &CascadeResult) -> Result<Vec<LevelRatio>> {
    let norms = &result.level_norms;
    if norms.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "norm ratios need at least 3 levels, got {}",
            norms.len()
        )));
    }
    Ok(norms
        .windows(2)
        .enumerate()
        .map(|(n, w)| {
            if w[0] == 0.0 {
                LevelRatio {
                    n,
                    ratio: 0.0,
                    degenerate: true,
                }
            } else {
                LevelRatio {
                    n,
                    ratio: w[1] / w[0],
                    degenerate: false,
                }
            }
        })
        .collect())
}

/// Marches `v⁰..v^depth` from `T` back to `0` on `grid` with `nt` steps.
pub fn run_cascade_with(
    spec: &ProblemSpec,
    grid: GridSpec,
    nt: usize,
    depth: usize,
    options: &CascadeOptions,
) -> Result<CascadeResult> {
    spec.check()?;
    grid.validate()?;
    if nt == 0 {
        return Err(Error::InvalidParameter("nt must be >= 1".into()));
    }
    let dt = spec.horizon / nt as f64;
    let h = grid.hx().min(grid.hy());
    if options.scheme == TimeScheme::Explicit && dt > 0.25 * h * h {
        return Err(Error::Unstable {
            dt,
            limit: 0.25 * h * h,
        });
    }
    let weights = options
        .weights
        .unwrap_or_else(|| CascadeWeights::for_problem(spec));
    let exact0 = match options.boundary {
        BoundaryMode::AnalyticLevel0 => spec.level0_exact(),
        BoundaryMode::ZeroNeumann => None,
    };

    let neumann = ImplicitStepper::new(grid, dt, EdgeRow::Neumann);
    let dirichlet = exact0
        .as_ref()
        .map(|_| ImplicitStepper::new(grid, dt, EdgeRow::Dirichlet));

    let mut levels: Vec<GridFunction> = (0..=depth).map(|_| GridFunction::zeros(grid)).collect();
    levels[0] = GridFunction::from_fn(grid, |x, y| 0.5 * spec.eta_bar.eval(x, y));

    let keep = snapshot_steps(nt, options.snapshots);
    let mut stored: Vec<Vec<GridFunction>> = vec![Vec::with_capacity(keep.len()); depth + 1];
    let mut times = Vec::with_capacity(keep.len());
    let mut store = |k: usize, levels: &[GridFunction], stored: &mut Vec<Vec<GridFunction>>| {
        times.push(k as f64 * dt);
        for (n, l) in levels.iter().enumerate() {
            stored[n].push(l.clone());
        }
    };
    if keep.contains(&nt) {
        store(nt, &levels, &mut stored);
    }

    let mut src = vec![0.0; grid.len()];
    let mut lap = vec![0.0; grid.len()];
    let mut grads: Vec<(GridFunction, GridFunction)> = Vec::with_capacity(depth);
    for k in (0..nt).rev() {
        let t_new = k as f64 * dt;
        let t_old = t_new + dt;
        grads.clear();
        match options.scheme {
            TimeScheme::Implicit => {
                for (n, v) in levels.iter_mut().enumerate() {
                    fill_source(spec, &grid, &grads, n, weights, t_new, &mut src);
                    for (a, s) in v.values.iter_mut().zip(&src) {
                        *a += dt * s;
                    }
                    match (n, &exact0, &dirichlet) {
                        (0, Some(g), Some(stepper)) => {
                            let b = |x: f64, y: f64| g(t_new, x, y);
                            stepper.solve(v, Some(&b));
                        }
                        _ => neumann.solve(v, None),
                    }
                    if n < depth {
                        grads.push(v.gradient());
                    }
                }
            }
            TimeScheme::Explicit => {
                for l in levels.iter().take(depth) {
                    grads.push(l.gradient());
                }
                for (n, v) in levels.iter_mut().enumerate() {
                    fill_source(spec, &grid, &grads, n, weights, t_old, &mut src);
                    half_laplacian_neumann(v, &mut lap);
                    for ((a, l), s) in v.values.iter_mut().zip(&lap).zip(&src) {
                        *a += dt * (l + s);
                    }
                    if let (0, Some(g)) = (n, &exact0) {
                        set_edges(v, |x, y| g(t_new, x, y));
                    }
                }
            }
        }
        if keep.contains(&k) {
            store(k, &levels, &mut stored);
        }
        if let Some(bad) = levels.iter().position(|l| !l.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "level {bad} became non-finite at t = {t_new}"
            )));
        }
    }

    // Stored in decreasing time; flip to ascending.
    times.reverse();
    for s in &mut stored {
        s.reverse();
    }
    let mut partial_sums: Vec<Vec<GridFunction>> = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let sums: Vec<GridFunction> = stored[n]
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let mut s = l.clone();
                if n > 0 {
                    s.add_assign(&partial_sums[n - 1][k]);
                }
                s
            })
            .collect();
        partial_sums.push(sums);
    }
    let level_norms = stored
        .iter()
        .map(|slices| {
            slices
                .iter()
                .map(|s| s.sup_on_probe(options.probe_half_width))
                .fold(0.0, f64::max)
        })
        .collect();

    Ok(CascadeResult {
        grid,
        nt,
        dt,
        horizon: spec.horizon,
        weights,
        options: *options,
        times,
        levels: stored,
        partial_sums,
        level_norms,
    })
}

fn fill_source(
    spec: &ProblemSpec,
    grid: &GridSpec,
    grads: &[(GridFunction, GridFunction)],
    n: usize,
    weights: CascadeWeights,
    t: f64,
    out: &mut [f64],
) {
    if n > 0 {
        return accumulate_source(grads, n, weights, out);
    }
    for i in 0..grid.nx {
        let x = grid.x(i);
        for j in 0..grid.ny {
            out[grid.index(i, j)] = spec.source(t, x, grid.y(j));
        }
    }
}

fn set_edges<F: Fn(f64, f64) -> f64>(v: &mut GridFunction, g: F) {
    let grid = v.grid;
    for i in 0..grid.nx {
        let x = grid.x(i);
        if i == 0 || i == grid.nx - 1 {
            for j in 0..grid.ny {
                v.values[grid.index(i, j)] = g(x, grid.y(j));
            }
        } else {
            v.values[grid.index(i, 0)] = g(x, grid.y(0));
            v.values[grid.index(i, grid.ny - 1)] = g(x, grid.y(grid.ny - 1));
        }
    }
}
