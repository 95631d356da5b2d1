use adomian_core::cascade::{
    self, cascade_source, io, level_norm_ratio, run_cascade, run_cascade_with, solve_level0,
    BoundaryMode, CascadeOptions, CascadeWeights, Density, GridFunction, GridSpec, ProblemSpec,
    Terminal, TimeScheme,
};
use adomian_core::{ex1_coefficients, ex2_coefficients, Error};

fn max_error<F: Fn(f64, f64) -> f64>(v: &GridFunction, f: F, probe: f64) -> f64 {
    let g = v.grid;
    let mut m = 0.0f64;
    for i in 0..g.nx {
        for j in 0..g.ny {
            let (x, y) = (g.x(i), g.y(j));
            if x.abs() <= probe && y.abs() <= probe {
                m = m.max((v.at(i, j) - f(x, y)).abs());
            }
        }
    }
    m
}

#[test]
fn level0_quadratic_source_value() {
    // v⁰(0, 1, 0) = ½T·1 + ½T² = 1 at T = 1; backward Euler adds T·dt/2.
    let spec = ProblemSpec::example1(1.0).unwrap();
    let h = solve_level0(
        &spec,
        GridSpec::square(61, 6.0),
        200,
        &CascadeOptions::default(),
    )
    .unwrap();
    assert_eq!(h.times[0], 0.0);
    let v = h.slices[0].sample(1.0, 0.0);
    assert!((v - 1.0 - 0.5 / 200.0).abs() < 1e-8, "{v}");
}

#[test]
fn level0_product_source_is_exact() {
    let spec = ProblemSpec::example2(1.0).unwrap();
    let h = solve_level0(
        &spec,
        GridSpec::square(41, 6.0),
        50,
        &CascadeOptions::default(),
    )
    .unwrap();
    for (t, v) in h.times.iter().zip(&h.slices) {
        let err = max_error(v, |x, y| (1.0 - t) * x * y, 6.0);
        assert!(err < 1e-11, "t = {t}: {err}");
    }
}

#[test]
fn zero_data_gives_zero_levels() {
    let spec = ProblemSpec::new(-1.0, 2.0, 0.5, Density::Zero, Terminal::Zero).unwrap();
    let r = run_cascade(&spec, GridSpec::square(21, 3.0), 20, 4).unwrap();
    for level in &r.levels {
        for s in level {
            assert!(s.values.iter().all(|&v| v == 0.0));
        }
    }
    let ratios = level_norm_ratio(&r).unwrap();
    assert!(ratios.iter().all(|q| q.degenerate && q.ratio == 0.0));
}

#[test]
fn terminal_conditions_hold_exactly() {
    let eta = Terminal::Custom {
        label: "cos x".into(),
        f: std::sync::Arc::new(|x: f64, _y: f64| x.cos()),
    };
    let spec = ProblemSpec::new(-1.0, 2.0, 0.4, Density::HalfSquares, eta).unwrap();
    let r = run_cascade_with(
        &spec,
        GridSpec::square(31, 4.0),
        40,
        3,
        &CascadeOptions {
            boundary: BoundaryMode::ZeroNeumann,
            ..CascadeOptions::default()
        },
    )
    .unwrap();
    assert_eq!(*r.times.last().unwrap(), 0.4);
    let last = r.levels[0].last().unwrap();
    assert_eq!(max_error(last, |x, _| 0.5 * x.cos(), 4.0), 0.0);
    for level in &r.levels[1..] {
        assert_eq!(level.last().unwrap().max_abs(), 0.0);
    }
}

#[test]
fn source_examples_with_halved_weights() {
    let grid = GridSpec::square(21, 2.0);
    let tau = 0.3;
    let v0 = GridFunction::from_fn(grid, |x, _| tau * x);
    let s = cascade_source(&[v0], 1, CascadeWeights::halved(-1.0)).unwrap();
    assert!(max_error(&s, |_, _| 0.5 * tau * tau, 2.0) < 1e-14);

    let v0 = GridFunction::from_fn(grid, |x, y| 0.5 * tau * (x * x + y * y) + 0.5 * tau * tau);
    let s = cascade_source(&[v0], 1, CascadeWeights::halved(-1.0)).unwrap();
    assert!(max_error(&s, |x, y| 0.5 * tau * tau * (x * x - y * y), 2.0) < 1e-12);
}

#[test]
fn source_of_zero_levels_is_zero() {
    let grid = GridSpec::square(11, 1.0);
    let zeros = vec![GridFunction::zeros(grid); 4];
    let s = cascade_source(
        &zeros,
        4,
        CascadeWeights {
            scale: 1.0,
            y_weight: -1.0,
        },
    )
    .unwrap();
    assert_eq!(s.max_abs(), 0.0);
}

#[test]
fn source_rejects_mismatched_grids() {
    let a = GridFunction::zeros(GridSpec::square(11, 1.0));
    let b = GridFunction::zeros(GridSpec::square(13, 1.0));
    let err = cascade_source(&[a, b], 2, CascadeWeights::halved(1.0)).unwrap_err();
    assert!(matches!(err, Error::GridMismatch(_)));
}

#[test]
fn unit_weights_reproduce_first_recurrence_step() {
    // v¹ = τ³/3 (x² - y²) solves the level-1 equation, so v¹_x = (2/3) τ³ x = α_1 τ³ x.
    let spec = ProblemSpec::example1(0.5).unwrap();
    let r = run_cascade(&spec, GridSpec::square(61, 6.0), 250, 1).unwrap();
    let (dx, _) = r.levels[1][0].gradient();
    let expect = 2.0 / 3.0 * 0.125 * 0.5;
    assert!((dx.sample(0.5, 0.2) - expect).abs() < 0.01 * expect);
}

fn summed_gradient_error(
    spec: &ProblemSpec,
    a: f64,
    b: f64,
    grid: GridSpec,
    nt: usize,
    opts: &CascadeOptions,
) -> f64 {
    let r = run_cascade_with(spec, grid, nt, 6, opts).unwrap();
    let mut worst = 0.0f64;
    for (x, y) in [(0.5, 0.0), (0.5, 0.5), (-1.0, 0.25), (0.75, -1.0)] {
        let (gx, _) = r.summed_gradient_at_start(x, y);
        let p = a * x + b * y;
        worst = worst.max((gx - p).abs() / p.abs());
    }
    worst
}

#[test]
fn example1_summed_gradient_matches_series() {
    let spec = ProblemSpec::example1(0.5).unwrap();
    let a = ex1_coefficients(6).alpha.eval(0.5);
    let e = summed_gradient_error(
        &spec,
        a,
        0.0,
        GridSpec::square(121, 6.0),
        500,
        &CascadeOptions::default(),
    );
    assert!(e < 0.02, "{e}");
}

#[test]
fn example2_summed_gradient_matches_series() {
    let spec = ProblemSpec::example2(0.5).unwrap();
    let c = ex2_coefficients(6);
    let (a, b) = (c.alpha.eval(0.5), c.beta.eval(0.5));
    let e = summed_gradient_error(
        &spec,
        a,
        b,
        GridSpec::square(121, 6.0),
        500,
        &CascadeOptions::default(),
    );
    assert!(e < 0.02, "{e}");
}

#[test]
fn neumann_boundary_is_harmless_on_the_probe() {
    let spec = ProblemSpec::example1(0.5).unwrap();
    let a = ex1_coefficients(6).alpha.eval(0.5);
    let opts = CascadeOptions {
        boundary: BoundaryMode::ZeroNeumann,
        ..CascadeOptions::default()
    };
    let e = summed_gradient_error(&spec, a, 0.0, GridSpec::square(121, 6.0), 500, &opts);
    assert!(e < 0.02, "{e}");
}

#[test]
fn depth_zero_is_level0_solve() {
    let spec = ProblemSpec::example1(0.5).unwrap();
    let grid = GridSpec::square(31, 4.0);
    let opts = CascadeOptions::default();
    let r = run_cascade_with(&spec, grid, 30, 0, &opts).unwrap();
    let h = solve_level0(&spec, grid, 30, &opts).unwrap();
    assert_eq!(r.levels[0], h.slices);
    assert_eq!(r.partial_sums[0], h.slices);
}

#[test]
fn grid_refinement_is_second_order() {
    let spec = ProblemSpec::example1(1.0).unwrap();
    let exact = spec.level0_exact().unwrap();
    let errs: Vec<f64> = [(31, 20), (61, 80), (121, 320)]
        .iter()
        .map(|&(n, nt)| {
            let h = solve_level0(
                &spec,
                GridSpec::square(n, 6.0),
                nt,
                &CascadeOptions::default(),
            )
            .unwrap();
            max_error(&h.slices[0], |x, y| exact(0.0, x, y), 6.0)
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn swap_symmetric_problem_stays_symmetric() {
    let spec = ProblemSpec::new(1.0, 2.0, 0.5, Density::HalfSquares, Terminal::Zero).unwrap();
    let r = run_cascade(&spec, GridSpec::square(41, 4.0), 50, 4).unwrap();
    for level in &r.levels {
        for s in level {
            let scale = s.max_abs().max(1e-300);
            assert!(s.swap_asymmetry().unwrap() <= 1e-12 * scale);
        }
    }
}

#[test]
fn explicit_scheme_refuses_large_steps() {
    let spec = ProblemSpec::example1(0.5).unwrap();
    let opts = CascadeOptions {
        scheme: TimeScheme::Explicit,
        ..CascadeOptions::default()
    };
    let err = run_cascade_with(&spec, GridSpec::square(61, 6.0), 10, 2, &opts).unwrap_err();
    assert!(matches!(err, Error::Unstable { .. }));
}

#[test]
fn explicit_and_implicit_agree() {
    let spec = ProblemSpec::example1(0.5).unwrap();
    let grid = GridSpec::square(41, 4.0);
    let h = grid.hx();
    let nt = (0.5 / (0.25 * h * h)).ceil() as usize * 4;
    let imp = run_cascade(&spec, grid, nt, 3).unwrap();
    let exp = run_cascade_with(
        &spec,
        grid,
        nt,
        3,
        &CascadeOptions {
            scheme: TimeScheme::Explicit,
            ..CascadeOptions::default()
        },
    )
    .unwrap();
    // First-order time errors of opposite sign; compare on the probe square.
    let (a, b) = (imp.sum_at_start(), exp.sum_at_start());
    let diff = max_error(a, |x, y| b.sample(x, y), 1.0);
    // Each scheme is off by about T·dt/2 per level in opposite directions.
    let dt = 0.5 / nt as f64;
    assert!(diff < 4.0 * 0.5 * dt, "{diff}");
}

#[test]
fn norm_ratios_decay_well_inside_the_horizon() {
    let spec = ProblemSpec::example1(0.3).unwrap();
    let r = run_cascade(&spec, GridSpec::square(61, 6.0), 120, 6).unwrap();
    let ratios = level_norm_ratio(&r).unwrap();
    assert!(
        ratios[2..].iter().all(|q| !q.degenerate && q.ratio < 0.5),
        "{ratios:?}"
    );
}

#[test]
fn norm_ratios_grow_near_blowup() {
    let ratio_tail = |t: f64| {
        let spec = ProblemSpec::example1(t).unwrap();
        let r = run_cascade(&spec, GridSpec::square(61, 6.0), 400, 8).unwrap();
        let q = level_norm_ratio(&r).unwrap();
        // Levels alternate between x²-y² and x²+y² shapes; compare two apart.
        q[5].ratio * q[6].ratio
    };
    let near = ratio_tail(1.05);
    let far = ratio_tail(0.3);
    assert!(near > 0.6 && near > 50.0 * far, "near {near}, far {far}");
}

#[test]
fn norm_ratio_needs_three_levels() {
    let spec = ProblemSpec::example1(0.3).unwrap();
    let r = run_cascade(&spec, GridSpec::square(11, 2.0), 5, 1).unwrap();
    assert!(level_norm_ratio(&r).is_err());
}

#[test]
fn invalid_problems_rejected() {
    assert!(ProblemSpec::new(0.0, 2.0, 0.5, Density::Zero, Terminal::Zero).is_err());
    assert!(ProblemSpec::new(-1.0, 2.0, 0.0, Density::Zero, Terminal::Zero).is_err());
    let mut spec = ProblemSpec::example1(0.5).unwrap();
    spec.beta = 2.0;
    assert!(run_cascade(&spec, GridSpec::square(11, 1.0), 5, 1).is_err());
    let spec = ProblemSpec::example1(0.5).unwrap();
    assert!(run_cascade(&spec, GridSpec::square(3, 1.0), 5, 1).is_err());
}

#[test]
fn thread_count_does_not_change_results() {
    let spec = ProblemSpec::example2(0.5).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_cascade(&spec, GridSpec::square(33, 4.0), 40, 3).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.partial_sums, b.partial_sums);
    assert_eq!(a.level_norms, b.level_norms);
}

#[test]
fn csv_and_manifest_output() {
    let spec = ProblemSpec::example1(0.2).unwrap();
    let r = cascade::run_cascade(&spec, GridSpec::square(9, 2.0), 4, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = io::write_cascade_dir(&r, dir.path()).unwrap();
    assert_eq!(files.len(), 1 + 3 * r.times.len());
    let text = std::fs::read_to_string(dir.path().join("level1_t0.csv")).unwrap();
    assert!(text.starts_with("x,y,value\n"));
    assert_eq!(text.lines().count(), 1 + 81);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cascade.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["depth"], 2);
    assert_eq!(manifest["grid"]["nx"], 9);
}
