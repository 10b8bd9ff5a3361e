//! End-to-end solves of small contouring instances.

use contourtime::{
    build_nlp, initial_guess, kkt_residuals, make_sharp_spiral, make_smooth_spiral,
    resample_constant_arclength, solve, tolerance_sweep, BoundSet, ControllerGains, Objective,
    Point, RawPath, SolveStatus, SolverConfig, Weights,
};

fn gains() -> ControllerGains {
    ControllerGains::new(1e4, 2e2, 1e4, 2e2).unwrap()
}

fn line_objective(n: usize) -> Objective {
    let path = RawPath::new(vec![Point::new(0.0, 0.0), Point::new(0.05, 0.0)], false).unwrap();
    resample_constant_arclength(&path, n).unwrap()
}

#[test]
fn straight_line_solves_to_optimality() {
    let objective = line_objective(24);
    let bounds = BoundSet {
        relax_count: 4,
        ..BoundSet::default()
    };
    let config = SolverConfig::default();
    let problem = build_nlp(&objective, &gains(), &Weights::default(), &bounds, &config).unwrap();
    let guess = initial_guess(&objective, &bounds, &config);
    let sol = solve(&problem, &guess, &config).unwrap();
    println!(
        "line: status {:?} iters {} objective {:.6e} time {:.4} s",
        sol.status,
        sol.iterations,
        sol.objective_value,
        sol.traversal_time()
    );
    assert_eq!(sol.status, SolveStatus::Optimal);
    let r = kkt_residuals(&problem, &sol);
    println!(
        "line: kkt stat {:.2e} feas {:.2e} comp {:.2e}",
        r.stationarity, r.feasibility, r.complementarity
    );
    assert!(r.feasibility <= config.feasibility_tol * 1.01);
    assert!(r.stationarity <= config.optimality_tol * 1.01);
    // straight line: everything should stay on the contour
    for (k, s) in sol.omega_local.iter().enumerate() {
        assert!(
            s.py.abs() < 2e-5 + 1e-9,
            "deviation at {k}: {}",
            s.py
        );
    }
    // all inputs within bounds
    for &(ux, uy) in &sol.u {
        assert!(ux.abs() <= 2.0 + 1e-9 && uy.abs() <= 2.0 + 1e-9);
    }
}

#[test]
fn small_smooth_spiral_solves() {
    let path = make_smooth_spiral(0.010, 1.0, 0.002).unwrap();
    let objective = resample_constant_arclength(&path, 48).unwrap();
    let bounds = BoundSet {
        relax_count: 6,
        ..BoundSet::default()
    };
    let config = SolverConfig::default();
    let problem = build_nlp(&objective, &gains(), &Weights::default(), &bounds, &config).unwrap();
    let guess = initial_guess(&objective, &bounds, &config);
    let t0 = std::time::Instant::now();
    let sol = solve(&problem, &guess, &config).unwrap();
    println!(
        "spiral48: status {:?} iters {} objective {:.6e} time {:.4} s wall {:.2?}",
        sol.status,
        sol.iterations,
        sol.objective_value,
        sol.traversal_time(),
        t0.elapsed()
    );
    let r = kkt_residuals(&problem, &sol);
    println!(
        "spiral48: kkt stat {:.2e} feas {:.2e} comp {:.2e}",
        r.stationarity, r.feasibility, r.complementarity
    );
    assert_eq!(sol.status, SolveStatus::Optimal);
    for (k, s) in sol.omega_local.iter().enumerate() {
        if problem.is_stage_constrained(k) {
            assert!(s.py.abs() <= 20e-6 + 1e-9, "deviation at {k}: {}", s.py);
        }
    }
}

#[test]
fn small_sharp_spiral_solves() {
    let path = make_sharp_spiral(0.001, 6).unwrap();
    let objective = resample_constant_arclength(&path, 64).unwrap();
    let bounds = BoundSet {
        relax_count: 8,
        ..BoundSet::default()
    };
    let config = SolverConfig::default();
    let problem = build_nlp(&objective, &gains(), &Weights::default(), &bounds, &config).unwrap();
    let guess = initial_guess(&objective, &bounds, &config);
    let t0 = std::time::Instant::now();
    let sol = solve(&problem, &guess, &config).unwrap();
    println!(
        "sharp64: status {:?} iters {} objective {:.6e} time {:.4} s wall {:.2?}",
        sol.status,
        sol.iterations,
        sol.objective_value,
        sol.traversal_time(),
        t0.elapsed()
    );
    assert!(sol.status.is_usable(), "status {:?}", sol.status);
    let r = kkt_residuals(&problem, &sol);
    println!(
        "sharp64: kkt stat {:.2e} feas {:.2e} comp {:.2e}",
        r.stationarity, r.feasibility, r.complementarity
    );
}

/// Independent feasibility oracle for a guess: evaluate every constraint
/// through the plant module's local step and the PD law instead of the
/// problem's own residual code.
#[test]
fn guess_feasibility_equals_max_defect_from_plant_oracle() {
    use contourtime::nlp::{SCALE_ACC, SCALE_POS, SCALE_VEL};
    use contourtime::{frame_of, pd_input, step_local, to_global};

    let objective = line_objective(20);
    let bounds = BoundSet {
        relax_count: 4,
        ..BoundSet::default()
    };
    let config = SolverConfig::default();
    let problem = build_nlp(&objective, &gains(), &Weights::default(), &bounds, &config).unwrap();
    let guess = initial_guess(&objective, &bounds, &config);
    let r = kkt_residuals(&problem, &guess);

    let pts = objective.points();
    let g = gains();
    let mut oracle: f64 = 0.0;
    for k in 0..19 {
        let fk = frame_of(&pts[k]);
        let fk1 = frame_of(&pts[k + 1]);
        let dt = guess.dt[k];
        let w_next = step_local(&guess.omega_local[k], guess.u[k], dt, &fk, &fk1);
        oracle = oracle
            .max(w_next.px.abs() * SCALE_POS)
            .max((guess.omega_local[k + 1].py - w_next.py).abs() * SCALE_POS)
            .max((guess.omega_local[k + 1].vx - w_next.vx).abs() * SCALE_VEL)
            .max((guess.omega_local[k + 1].vy - w_next.vy).abs() * SCALE_VEL);
        let g_next = step_local(&guess.gamma_local[k], guess.v[k], dt, &fk, &fk1);
        oracle = oracle
            .max((guess.gamma_local[k + 1].px - g_next.px).abs() * SCALE_POS)
            .max((guess.gamma_local[k + 1].py - g_next.py).abs() * SCALE_POS)
            .max((guess.gamma_local[k + 1].vx - g_next.vx).abs() * SCALE_VEL)
            .max((guess.gamma_local[k + 1].vy - g_next.vy).abs() * SCALE_VEL);
        let pd = pd_input(
            &g,
            &to_global(&guess.gamma_local[k], &fk),
            &to_global(&guess.omega_local[k], &fk),
        );
        oracle = oracle
            .max((guess.u[k + 1].0 - pd.0).abs() * SCALE_ACC)
            .max((guess.u[k + 1].1 - pd.1).abs() * SCALE_ACC);
    }
    assert!(
        (r.feasibility - oracle).abs() <= 1e-9 * oracle.max(1.0),
        "kkt feasibility {} vs oracle {}",
        r.feasibility,
        oracle
    );
    // without multipliers the stationarity residual is the bare gradient
    assert!(r.stationarity > 0.0);
}

#[test]
fn perturbing_one_stage_duration_breaks_feasibility() {
    let objective = line_objective(20);
    let bounds = BoundSet {
        relax_count: 4,
        ..BoundSet::default()
    };
    let config = SolverConfig::default();
    let problem = build_nlp(&objective, &gains(), &Weights::default(), &bounds, &config).unwrap();
    let sol = solve(&problem, &initial_guess(&objective, &bounds, &config), &config).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!(sol.dt.iter().all(|&d| d > 0.0));
    let base = kkt_residuals(&problem, &sol).feasibility;
    let mut nudged = sol.clone();
    nudged.dt[10] += 1e-4;
    let moved = kkt_residuals(&problem, &nudged).feasibility;
    assert!(
        moved > base + 1e-6,
        "feasibility did not increase: {base} -> {moved}"
    );
}

#[test]
fn sweep_propagates_failures_and_objective_is_monotone() {
    let path = make_sharp_spiral(0.001, 5).unwrap();
    let objective = resample_constant_arclength(&path, 48).unwrap();
    let bounds = BoundSet {
        relax_count: 6,
        ..BoundSet::default()
    };
    // tol = 0 fails validation for its row; the sweep must carry on
    let (table, solutions) = tolerance_sweep(
        &objective,
        &gains(),
        &Weights::default(),
        &bounds,
        &[0.0, 1e-5, 2e-5],
        &SolverConfig::default(),
    )
    .unwrap();
    assert_eq!(table.rows.len(), 3);
    assert_eq!(table.rows[0].status, SolveStatus::Infeasible);
    assert!(solutions[0].is_none());
    assert!(table.rows[1].status.is_usable());
    assert!(table.rows[2].status.is_usable());
    // nested feasible sets: the looser problem can only do better
    let j1 = solutions[1].as_ref().unwrap().objective_value;
    let j2 = solutions[2].as_ref().unwrap().objective_value;
    assert!(j2 <= j1 * 1.01, "objective not monotone: {j1} -> {j2}");
}

#[test]
fn one_micron_band_is_slower_than_twenty() {
    let path = make_sharp_spiral(0.001, 5).unwrap();
    let objective = resample_constant_arclength(&path, 64).unwrap();
    let bounds = BoundSet {
        relax_count: 8,
        ..BoundSet::default()
    };
    let config = SolverConfig::default();
    let solve_at = |tol: f64, warm: Option<&contourtime::NlpSolution>| {
        let b = BoundSet { tol, ..bounds };
        let problem = build_nlp(&objective, &gains(), &Weights::default(), &b, &config).unwrap();
        let guess = warm
            .cloned()
            .unwrap_or_else(|| initial_guess(&objective, &b, &config));
        solve(&problem, &guess, &config).unwrap()
    };
    let tight = solve_at(1e-6, None);
    assert!(tight.status.is_usable(), "status {:?}", tight.status);
    let loose = solve_at(20e-6, Some(&tight));
    assert!(loose.status.is_usable());
    assert!(
        tight.traversal_time() > loose.traversal_time(),
        "1 um band not slower: {} vs {}",
        tight.traversal_time(),
        loose.traversal_time()
    );
}

#[test]
fn very_loose_band_is_no_slower_than_twenty_microns() {
    let path = make_smooth_spiral(0.010, 0.5, 0.002).unwrap();
    let objective = resample_constant_arclength(&path, 64).unwrap();
    let bounds = BoundSet {
        relax_count: 8,
        ..BoundSet::default()
    };
    let config = SolverConfig::default();
    let solve_at = |tol: f64| {
        let b = BoundSet { tol, ..bounds };
        let problem = build_nlp(&objective, &gains(), &Weights::default(), &b, &config).unwrap();
        let guess = initial_guess(&objective, &b, &config);
        solve(&problem, &guess, &config).unwrap()
    };
    let nominal = solve_at(20e-6);
    let loose = solve_at(1e-3);
    assert!(nominal.status.is_usable() && loose.status.is_usable());
    // the loose feasible set contains the tight solution
    assert!(
        loose.traversal_time() <= nominal.traversal_time() * 1.01,
        "loose band slower: {} vs {}",
        loose.traversal_time(),
        nominal.traversal_time()
    );
}

#[test]
fn published_defaults_match_the_benchmark_setup() {
    let b = BoundSet::default();
    assert_eq!(b.u_max, 2.0);
    assert_eq!(b.vel_max, 2.0);
    assert_eq!(b.tol, 20e-6);
    assert_eq!(b.relax_count, 16);
    let w = Weights::default();
    assert_eq!(w.q_omega, [1e7, 1.0]);
    assert_eq!(w.q_gamma, [1e6, 1.0]);
    assert_eq!(w.r_u, [[1.0, 0.0], [0.0, 1.0]]);
    assert_eq!(w.r_v, [[1.0, 0.0], [0.0, 1.0]]);
    let s = SolverConfig::default();
    assert_eq!(s.feasibility_tol, 1e-8);
    assert_eq!(s.optimality_tol, 1e-6);
    assert_eq!((s.dt_min, s.dt_max), (1e-5, 1e-1));
}
