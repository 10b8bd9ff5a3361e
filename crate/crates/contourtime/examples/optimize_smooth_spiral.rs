//! Minimum-time reference for the smooth Archimedean spiral: build the
//! objective, solve the optimization, and inspect where the solution rides
//! its bounds.
//!
//! Run with: cargo run --release --example optimize_smooth_spiral

use contourtime::{
    build_nlp, initial_guess, kkt_residuals, make_smooth_spiral, resample_constant_arclength,
    solve, BoundSet, ControllerGains, SolverConfig, Weights,
};

fn main() -> contourtime::Result<()> {
    let path = make_smooth_spiral(0.010, 1.0, 0.002)?;
    let objective = resample_constant_arclength(&path, 256)?;
    let gains = ControllerGains::new(4.0e4, 4.0e2, 3.6e4, 3.8e2)?;
    let weights = Weights::default();
    let bounds = BoundSet::default();
    let config = SolverConfig::default();

    let problem = build_nlp(&objective, &gains, &weights, &bounds, &config)?;
    println!(
        "problem: {} points, {} variables, {} constraints",
        problem.n_points(),
        problem.n_variables(),
        problem.n_constraints()
    );
    let guess = initial_guess(&objective, &bounds, &config);
    let t0 = std::time::Instant::now();
    let solution = solve(&problem, &guess, &config)?;
    println!(
        "solved: status {}, {} iterations, {:.2?} wall",
        solution.status.as_str(),
        solution.iterations,
        t0.elapsed()
    );
    println!(
        "traversal time {:.4} s, objective {:.4e}",
        solution.traversal_time(),
        solution.objective_value
    );
    let r = kkt_residuals(&problem, &solution);
    println!(
        "KKT residuals: stationarity {:.2e}, feasibility {:.2e}, complementarity {:.2e}",
        r.stationarity, r.feasibility, r.complementarity
    );

    let mut max_dev: f64 = 0.0;
    let mut sat_points = 0usize;
    for (k, s) in solution.omega_local.iter().enumerate() {
        if problem.is_stage_constrained(k) {
            max_dev = max_dev.max(s.py.abs());
        }
        if solution.u[k].0.abs() > bounds.u_max - 1e-6 {
            sat_points += 1;
        }
    }
    println!(
        "max deviation over constrained points: {:.3} um (band {:.0} um)",
        max_dev * 1e6,
        bounds.tol * 1e6
    );
    println!("points with saturated u_x: {sat_points}");
    let dt_min = solution.dt[..255].iter().cloned().fold(f64::INFINITY, f64::min);
    let dt_max = solution.dt[..255].iter().cloned().fold(0.0f64, f64::max);
    println!("stage durations span [{:.3} ms, {:.3} ms]", dt_min * 1e3, dt_max * 1e3);
    Ok(())
}
