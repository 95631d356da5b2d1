use std::path::Path;

use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use adomian_core::cascade::{
    self, io::write_cascade_dir, level_norm_ratio, BoundaryMode, CascadeOptions, GridSpec,
    ProblemSpec, TimeScheme,
};
use adomian_core::exact::{ex1_riccati_residual, ex2_zeta_residual};
use adomian_core::gates::{self, GateConfig};
use adomian_core::mc::{
    estimate_exp_quadratic_functional, kl_orthogonality_check, kl_product_formula,
    raw_residual_sweep, report, ExpEquationConfig,
};
use adomian_core::{
    blowup_horizon, catalan_closed, catalan_recurrence, ex1_closed, ex1_coefficients,
    ex1_coefficients_exact, ex2_closed, ex2_coefficients, ex2_coefficients_exact, root_test_radius,
    ConstantReading, Error, Result,
};

use crate::output::{f, Output};

pub fn load_config(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text)?;
    if !v.is_object() {
        return Err(Error::InvalidParameter(
            "--config must hold a JSON object".into(),
        ));
    }
    Ok(v)
}

/// Overlays the config object (or its `command` entry) on the parsed flags.
fn effective<T: Serialize + DeserializeOwned>(
    args: T,
    config: Option<&Value>,
    command: &str,
) -> Result<(T, Value)> {
    let mut base = serde_json::to_value(&args)?;
    if let Some(cfg) = config {
        let layer = cfg.get(command).filter(|v| v.is_object()).unwrap_or(cfg);
        let (Value::Object(b), Value::Object(l)) = (&mut base, layer) else {
            unreachable!("both are objects");
        };
        for (k, v) in l {
            if v.is_object() && k != command && !b.contains_key(k) {
                // Entries for other commands.
                continue;
            }
            if !b.contains_key(k) {
                return Err(Error::InvalidParameter(format!(
                    "unknown config key `{k}` for `{command}`"
                )));
            }
            b.insert(k.clone(), v.clone());
        }
    }
    let args: T = serde_json::from_value(base.clone())
        .map_err(|e| Error::InvalidParameter(format!("config for `{command}`: {e}")))?;
    Ok((args, base))
}

fn out_dir(out: &Path) -> Result<Output> {
    Output::create(out)
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CatalanArgs {
    /// Highest index.
    #[arg(long, default_value_t = 30)]
    pub n: usize,
}

pub fn catalan(args: CatalanArgs, config: Option<&Value>, out: &Path) -> Result<bool> {
    let (args, eff) = effective(args, config, "catalan")?;
    let mut o = out_dir(out)?;
    let table = catalan_recurrence(args.n);
    let rows: Vec<(usize, String, String, bool)> = (0..=args.n)
        .map(|k| {
            let closed = catalan_closed(k);
            let eq = closed == table.values()[k];
            (k, table.values()[k].to_string(), closed.to_string(), eq)
        })
        .collect();
    let all = rows.iter().all(|r| r.3);
    o.csv(
        "catalan.csv",
        &["n", "recurrence", "closed", "equal"],
        rows.iter()
            .map(|(k, a, b, e)| vec![k.to_string(), a.clone(), b.clone(), e.to_string()]),
    )?;
    o.json("results.json", &json!({ "n": args.n, "all_equal": all }))?;
    o.line(format!(
        "catalan: recurrence vs closed form for n <= {}",
        args.n
    ));
    o.line(format!("  a_{} = {}", args.n, table.values()[args.n]));
    o.line(format!("  all equal: {all}"));
    o.finish("catalan", &eff, None, all, Value::Null)?;
    Ok(all)
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExArgs {
    /// Truncation order N.
    #[arg(long, default_value_t = 15)]
    pub order: usize,
    /// Compare the truncated series with the closed form.
    #[arg(long)]
    pub check_closed: bool,
    /// Evaluation points for the closed-form comparison.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5")]
    pub points: Vec<f64>,
    /// Largest accepted series/closed-form deviation.
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
}

fn coefficient_rows<R: ToString>(exact: (&[R], &[R]), float: (&[f64], &[f64])) -> Vec<Vec<String>> {
    (0..float.0.len())
        .map(|n| {
            let rat = |v: &[R]| v.get(n).map(|r| r.to_string()).unwrap_or_default();
            vec![
                n.to_string(),
                rat(exact.0),
                f(float.0[n]),
                rat(exact.1),
                f(float.1[n]),
            ]
        })
        .collect()
}

pub fn ex1(args: ExArgs, config: Option<&Value>, out: &Path) -> Result<bool> {
    let (args, eff) = effective(args, config, "ex1")?;
    let mut o = out_dir(out)?;
    let series = ex1_coefficients(args.order);
    let exact = ex1_coefficients_exact(args.order.min(adomian_core::exact::EXACT_ORDER_LIMIT));
    o.csv(
        "coefficients.csv",
        &["n", "alpha_exact", "alpha", "beta_exact", "beta"],
        coefficient_rows(
            (exact.alpha.coeffs(), exact.beta.coeffs()),
            (series.alpha.coeffs(), series.beta.coeffs()),
        ),
    )?;
    o.line(format!("ex1: order {}", args.order));
    let mut passed = true;
    let mut results = json!({ "order": args.order });
    if args.check_closed {
        let mut rows = Vec::new();
        let mut worst = 0.0f64;
        for &s in &args.points {
            let (a, b) = ex1_closed(s)?;
            let (sa, sb) = (series.alpha.eval(s), series.beta.eval(s));
            worst = worst.max((sa - a).abs()).max((sb - b).abs());
            rows.push(vec![f(s), f(sa), f(a), f(sb), f(b)]);
        }
        o.csv(
            "closed.csv",
            &[
                "s",
                "alpha_series",
                "alpha_closed",
                "beta_series",
                "beta_closed",
            ],
            rows,
        )?;
        let ok = worst < args.tolerance;
        passed &= ok;
        o.line(format!(
            "  max |series - closed| = {worst:.3e} (tolerance {:.1e}): {}",
            args.tolerance,
            pass(ok)
        ));
        results["max_closed_deviation"] = json!(worst);
    }
    let safe: Vec<f64> = args
        .points
        .iter()
        .copied()
        .filter(|s| s.abs() < 0.9 * blowup_horizon())
        .collect();
    let res = ex1_riccati_residual(args.order, &safe)?;
    o.line(format!(
        "  Riccati residual on the safe points: α {:.3e}, β {:.3e}",
        res.alpha, res.beta
    ));
    results["riccati_residual"] = json!({ "alpha": res.alpha, "beta": res.beta });
    if let Ok(r) = root_test_radius(&series.alpha) {
        o.line(format!(
            "  root-test radius of α: {r:.10} (π/(2√2) = {:.10})",
            blowup_horizon()
        ));
        results["radius"] = json!(r);
    }
    o.json("results.json", &results)?;
    o.finish("ex1", &eff, None, passed, Value::Null)?;
    Ok(passed)
}

pub fn ex2(args: ExArgs, config: Option<&Value>, out: &Path) -> Result<bool> {
    let (args, eff) = effective(args, config, "ex2")?;
    let mut o = out_dir(out)?;
    let series = ex2_coefficients(args.order);
    let exact = ex2_coefficients_exact(args.order.min(adomian_core::exact::EXACT_ORDER_LIMIT));
    o.csv(
        "coefficients.csv",
        &["n", "alpha_exact", "alpha", "beta_exact", "beta"],
        coefficient_rows(
            (exact.alpha.coeffs(), exact.beta.coeffs()),
            (series.alpha.coeffs(), series.beta.coeffs()),
        ),
    )?;
    o.line(format!("ex2: order {}", args.order));
    let mut passed = true;
    let mut results = json!({ "order": args.order });
    if args.check_closed {
        let mut rows = Vec::new();
        let mut worst = 0.0f64;
        for &s in &args.points {
            let (a, b) = ex2_closed(s);
            let (sa, sb) = (series.alpha.eval(s), series.beta.eval(s));
            worst = worst.max((sa - a).abs()).max((sb - b).abs());
            rows.push(vec![f(s), f(sa), f(a), f(sb), f(b)]);
        }
        o.csv(
            "closed.csv",
            &[
                "s",
                "alpha_series",
                "alpha_closed",
                "beta_series",
                "beta_closed",
            ],
            rows,
        )?;
        let ok = worst < args.tolerance;
        passed &= ok;
        o.line(format!(
            "  max |series - closed| = {worst:.3e} (tolerance {:.1e}): {}",
            args.tolerance,
            pass(ok)
        ));
        results["max_closed_deviation"] = json!(worst);
    }
    let grid: Vec<f64> = (0..=10_000).map(|k| k as f64 * 1e-3).collect();
    let zres = ex2_zeta_residual(&grid);
    let ok = zres < 1e-12;
    passed &= ok;
    o.line(format!(
        "  ζ' - i - 2ζ² residual on [0, 10]: {zres:.3e}: {}",
        pass(ok)
    ));
    results["zeta_residual"] = json!(zres);
    o.json("results.json", &results)?;
    o.finish("ex2", &eff, None, passed, Value::Null)?;
    Ok(passed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Implicit,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Analytic,
    Neumann,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CascadeArgs {
    /// 1: source ½(x²+y²); 2: source x·y.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub example: u8,
    /// Horizon T.
    #[arg(long = "T", default_value_t = 0.5)]
    pub horizon: f64,
    /// Nodes per axis.
    #[arg(long, default_value_t = 241)]
    pub grid: usize,
    /// Domain is [-half_width, half_width]².
    #[arg(long, default_value_t = 6.0)]
    pub half_width: f64,
    /// Time steps.
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    /// Highest level.
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    #[arg(long, value_enum, default_value_t = Scheme::Implicit)]
    pub scheme: Scheme,
    #[arg(long, value_enum, default_value_t = Boundary::Analytic)]
    pub boundary: Boundary,
    /// Retained time slices.
    #[arg(long, default_value_t = 5)]
    pub snapshots: usize,
    /// Relative tolerance of the gradient check (the grid term h² is added as a floor).
    #[arg(long, default_value_t = 0.02)]
    pub tolerance: f64,
    /// Also write every retained slice as CSV.
    #[arg(long)]
    pub write_slices: bool,
}

pub fn cascade(args: CascadeArgs, config: Option<&Value>, out: &Path) -> Result<bool> {
    let (args, eff) = effective(args, config, "cascade")?;
    let spec = match args.example {
        1 => ProblemSpec::example1(args.horizon)?,
        2 => ProblemSpec::example2(args.horizon)?,
        e => return Err(Error::InvalidParameter(format!("unknown example {e}"))),
    };
    let grid = GridSpec::square(args.grid, args.half_width);
    let options = CascadeOptions {
        scheme: match args.scheme {
            Scheme::Implicit => TimeScheme::Implicit,
            Scheme::Explicit => TimeScheme::Explicit,
        },
        boundary: match args.boundary {
            Boundary::Analytic => BoundaryMode::AnalyticLevel0,
            Boundary::Neumann => BoundaryMode::ZeroNeumann,
        },
        snapshots: args.snapshots,
        ..CascadeOptions::default()
    };
    let mut o = out_dir(out)?;
    let r = cascade::run_cascade_with(&spec, grid, args.steps, args.depth, &options)?;

    let (ax, bx) = if args.example == 1 {
        (ex1_coefficients(args.depth).alpha.eval(args.horizon), 0.0)
    } else {
        let s = ex2_coefficients(args.depth);
        (s.alpha.eval(args.horizon), s.beta.eval(args.horizon))
    };
    let tol = args.tolerance.max(grid.hx() * grid.hx());
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for x in [-1.0, -0.5, 0.5, 1.0] {
        for y in [-1.0, 0.0, 0.5] {
            let (gx, gy) = r.summed_gradient_at_start(x, y);
            let pred = ax * x + bx * y;
            let rel = (gx - pred).abs() / pred.abs().max(1e-12);
            worst = worst.max(rel);
            rows.push(vec![f(x), f(y), f(gx), f(gy), f(pred), f(rel)]);
        }
    }
    o.csv(
        "gradient_probe.csv",
        &["x", "y", "dvdx", "dvdy", "dvdx_series", "rel_error"],
        rows,
    )?;
    let ratios = level_norm_ratio(&r).unwrap_or_default();
    o.csv(
        "level_norms.csv",
        &["n", "norm", "ratio_to_next", "degenerate"],
        r.level_norms.iter().enumerate().map(|(n, norm)| {
            let (ratio, deg) = ratios.get(n).map_or((String::new(), String::new()), |q| {
                (f(q.ratio), q.degenerate.to_string())
            });
            vec![n.to_string(), f(*norm), ratio, deg]
        }),
    )?;
    if args.write_slices {
        let files = write_cascade_dir(&r, &o.path("slices"))?;
        for p in files {
            if let Some(name) = p.file_name() {
                o.record_file(format!("slices/{}", name.to_string_lossy()));
            }
        }
    }
    o.json(
        "cascade.json",
        &adomian_core::cascade::io::CascadeManifest::from(&r),
    )?;
    let ok = worst <= tol;
    o.line(format!(
        "cascade: example {}, T = {}, {}² grid on [-{hw}, {hw}]², {} steps, depth {}",
        args.example,
        args.horizon,
        args.grid,
        args.steps,
        args.depth,
        hw = args.half_width
    ));
    o.line(format!(
        "  level norms on |x|,|y| <= 1: {:?}",
        r.level_norms
            .iter()
            .map(|v| format!("{v:.3e}"))
            .collect::<Vec<_>>()
    ));
    o.line(format!(
        "  summed ∂_x v vs series: worst rel {worst:.3e} (tolerance {tol:.3e}): {}",
        pass(ok)
    ));
    o.finish("cascade", &eff, None, ok, Value::Null)?;
    Ok(ok)
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct McEqArgs {
    #[arg(long = "T", default_value_t = 0.5)]
    pub horizon: f64,
    #[arg(long, default_value_t = 20_000)]
    pub paths: usize,
    /// Step counts; each must divide the largest.
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000")]
    pub steps: Vec<usize>,
    #[arg(long, default_value_t = gates::DEFAULT_SEED)]
    pub seed: u64,
    /// Write per-path residuals (finest grid, shipped reading).
    #[arg(long)]
    pub per_path_csv: bool,
}

pub fn mc_eq(args: McEqArgs, config: Option<&Value>, out: &Path) -> Result<bool> {
    let (args, eff) = effective(args, config, "mc-eq")?;
    let cfg = ExpEquationConfig::example1(args.horizon, args.paths, args.seed);
    let raw = raw_residual_sweep(&cfg, &args.steps)?;
    let mut o = out_dir(out)?;
    let mut reports = Vec::new();
    for (&n, r) in args.steps.iter().zip(&raw) {
        for reading in ConstantReading::ALL {
            reports.push(report(&cfg, n, r, reading)?);
        }
    }
    o.csv(
        "residuals.csv",
        &[
            "reading",
            "n_steps",
            "dt",
            "log_c",
            "mean",
            "std",
            "std_error",
            "max_abs",
            "band",
            "within_band",
        ],
        reports.iter().map(|r| {
            vec![
                r.reading.as_str().to_string(),
                r.n_steps.to_string(),
                f(r.dt),
                f(r.log_c),
                f(r.mean),
                f(r.std),
                f(r.std_error),
                f(r.max_abs),
                f(r.band),
                r.within_band.to_string(),
            ]
        }),
    )?;
    let reading = gates::passing_reading(&reports);
    if args.per_path_csv {
        let finest = args.steps.iter().copied().max().unwrap_or(0);
        let k = args.steps.iter().position(|&n| n == finest).unwrap_or(0);
        let log_c = cfg.log_c(reading.unwrap_or(adomian_core::SHIPPED_READING))?;
        o.csv(
            "per_path.csv",
            &["path", "residual"],
            raw[k]
                .iter()
                .enumerate()
                .map(|(i, v)| vec![i.to_string(), f(v - log_c)]),
        )?;
    }
    o.json(
        "results.json",
        &json!({ "reports": reports, "passing_reading": reading }),
    )?;
    o.line(format!(
        "mc-eq: Example 1, T = {}, {} paths, seed {}",
        args.horizon, args.paths, args.seed
    ));
    for r in &reports {
        o.line(format!(
            "  {:>8} n_steps = {:>5}: mean {:+.3e}, std err {:.2e}, band {:.3e}, {}",
            r.reading.as_str(),
            r.n_steps,
            r.mean,
            r.std_error,
            r.band,
            if r.within_band { "inside" } else { "outside" }
        ));
    }
    let ok = reading.is_some();
    o.line(format!(
        "  passing reading: {}: {}",
        reading.map_or("none or both", |r| r.as_str()),
        pass(ok)
    ));
    o.finish("mc-eq", &eff, Some(args.seed), ok, Value::Null)?;
    Ok(ok)
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct McExpfuncArgs {
    #[arg(long = "T", default_value_t = 0.5)]
    pub horizon: f64,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    #[arg(long, default_value_t = gates::DEFAULT_SEED)]
    pub seed: u64,
    /// Modes of the KL product used for the cross-check.
    #[arg(long, default_value_t = 10_000)]
    pub modes: usize,
    /// Largest accepted distance from the closed form, in standard errors.
    #[arg(long, default_value_t = 4.0)]
    pub max_z: f64,
}

pub fn mc_expfunc(args: McExpfuncArgs, config: Option<&Value>, out: &Path) -> Result<bool> {
    let (args, eff) = effective(args, config, "mc-expfunc")?;
    let est = estimate_exp_quadratic_functional(args.horizon, args.paths, args.steps, args.seed)?;
    let kl = kl_product_formula(args.horizon, args.modes)?;
    let mut o = out_dir(out)?;
    let z = est.z_score();
    let bar = 4.0 * est.std_error + (kl.upper() - kl.value);
    let gap = (est.mean - kl.value).abs();
    let ok = z <= args.max_z && gap <= bar;
    o.json(
        "results.json",
        &json!({ "estimate": est, "z": z, "kl": kl, "mc_kl_gap": gap, "combined_bar": bar }),
    )?;
    o.line(format!(
        "mc-expfunc: T = {}, {} paths × {} steps, seed {}",
        args.horizon, args.paths, args.steps, args.seed
    ));
    o.line(format!("  MC mean {:.8} ± {:.3e}", est.mean, est.std_error));
    o.line(format!("  1/√cos(√2T) = {:.8}, |z| = {z:.3}", est.target));
    o.line(format!(
        "  KL product ({} modes) = {:.8}, |MC - KL| = {gap:.3e} <= {bar:.3e}",
        kl.n_modes, kl.value
    ));
    o.line(format!("  {}", pass(ok)));
    o.finish("mc-expfunc", &eff, Some(args.seed), ok, Value::Null)?;
    Ok(ok)
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct KlArgs {
    #[arg(long = "T", default_value_t = 0.5)]
    pub horizon: f64,
    #[arg(long, default_value_t = 10_000)]
    pub modes: usize,
    /// Eigenpairs checked for orthonormality.
    #[arg(long, default_value_t = 8)]
    pub check_modes: usize,
    #[arg(long, default_value_t = 10_000)]
    pub quadrature: usize,
}

pub fn kl(args: KlArgs, config: Option<&Value>, out: &Path) -> Result<bool> {
    let (args, eff) = effective(args, config, "kl")?;
    let p = kl_product_formula(args.horizon, args.modes)?;
    let check = kl_orthogonality_check(args.check_modes, args.quadrature)?;
    let target = adomian_core::mc::exp_quadratic_closed_form(args.horizon)?;
    let mut o = out_dir(out)?;
    let err = (p.value - target).abs();
    let ok = err < 1e-4
        && check.max_off_diagonal < 1e-8
        && check.max_diagonal_error < 1e-8
        && check.max_eigen_residual < 1e-6;
    o.csv(
        "lambdas.csv",
        &["n", "lambda"],
        (1..=args.check_modes)
            .map(|n| vec![n.to_string(), f(adomian_core::mc::KLExpansion::lambda(n))]),
    )?;
    o.json("results.json", &json!({ "product": p, "closed_form": target, "product_error": err, "orthogonality": check }))?;
    o.line(format!("kl: T = {}, {} modes", args.horizon, args.modes));
    o.line(format!(
        "  product {:.10} vs 1/√cos(√2T) = {target:.10}, error {err:.3e}",
        p.value
    ));
    o.line(format!(
        "  {} modes, {} points: off-diagonal {:.2e}, diagonal {:.2e}, eigen residual {:.2e}",
        check.n_modes,
        check.quadrature_points,
        check.max_off_diagonal,
        check.max_diagonal_error,
        check.max_eigen_residual
    ));
    o.line(format!("  {}", pass(ok)));
    o.finish("kl", &eff, None, ok, Value::Null)?;
    Ok(ok)
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReportArgs {
    #[arg(long, default_value_t = gates::DEFAULT_SEED)]
    pub seed: u64,
    /// Reduced sizes (smoke test); wall-clock limits still apply.
    #[arg(long)]
    pub quick: bool,
}

pub fn report_all(args: ReportArgs, config: Option<&Value>, out: &Path) -> Result<bool> {
    let (args, eff) = effective(args, config, "report-all")?;
    let mut cfg = if args.quick {
        GateConfig {
            cascade_grid: 61,
            cascade_steps: 128,
            expfunc_paths: 20_000,
            expfunc_steps: 400,
            expeq_paths: 4000,
            expeq_steps: [100, 200, 400],
            ..GateConfig::default()
        }
    } else {
        GateConfig::default()
    };
    cfg.seed = args.seed;
    let mut o = out_dir(out)?;
    let reports = gates::run_all(&cfg);
    let all = reports.iter().all(|g| g.passed);
    o.json(
        "gates.json",
        &json!({ "config": cfg, "gates": reports, "all_passed": all }),
    )?;
    o.csv(
        "gates.csv",
        &["id", "name", "passed"],
        reports
            .iter()
            .map(|g| vec![g.id.to_string(), g.name.clone(), g.passed.to_string()]),
    )?;
    for g in &reports {
        o.line(format!("[{}] {}: {}", g.id, g.name, pass(g.passed)));
        for l in &g.checks {
            o.line(format!("    {l}"));
        }
    }
    let timings: Value = reports
        .iter()
        .map(|g| {
            let detail: serde_json::Map<String, Value> = g
                .timings
                .iter()
                .map(|(label, secs)| (label.clone(), json!(secs)))
                .collect();
            (
                g.id.to_string(),
                json!({ "total": g.elapsed_seconds, "checks": detail }),
            )
        })
        .collect::<serde_json::Map<_, _>>()
        .into();
    o.finish(
        "report-all",
        &eff,
        Some(args.seed),
        all,
        json!({ "elapsed_seconds": timings }),
    )?;
    Ok(all)
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
