//! End to end: optimize the smooth spiral, translate the variable-step
//! solution into a constant 100 us reference, play it through the
//! simulated closed loop, and score the contour error.
//!
//! Run with: cargo run --release --example simulate_reference

use contourtime::{
    build_nlp, compute_metrics, initial_guess, make_smooth_spiral, resample_constant_arclength,
    resample_reference, simulate_closed_loop, solve, BoundSet, ControllerGains, SolverConfig,
    StateMatrix, Weights,
};
use std::fs;

fn main() -> contourtime::Result<()> {
    let objective = resample_constant_arclength(&make_smooth_spiral(0.010, 1.0, 0.002)?, 256)?;
    let gains = ControllerGains::new(4.0e4, 4.0e2, 3.6e4, 3.8e2)?;
    let bounds = BoundSet::default();
    let config = SolverConfig::default();
    let problem = build_nlp(&objective, &gains, &Weights::default(), &bounds, &config)?;
    let solution = solve(&problem, &initial_guess(&objective, &bounds, &config), &config)?;
    println!(
        "optimized: {} in {} iterations, traversal {:.4} s",
        solution.status.as_str(),
        solution.iterations,
        solution.traversal_time()
    );

    let reference = resample_reference(&solution, &objective, 1e-4)?;
    println!(
        "reference: {} rows at dt = {} s, velocity consistency {:.2e} m/s",
        reference.rows.len(),
        reference.dt,
        reference.velocity_consistency
    );
    let out = std::path::Path::new("examples_out/simulate");
    fs::create_dir_all(out)?;
    reference.to_csv(&out.join("reference.csv"))?;

    let initial = StateMatrix::at_rest(reference.rows[0].pos.0, reference.rows[0].pos.1);
    let trajectory = simulate_closed_loop(&reference, &gains, &initial);
    let metrics = compute_metrics(&trajectory, &objective, &bounds)?;
    print!("{}", metrics.human_summary());
    println!(
        "band: {:.0} um; playback stays within {:.1}% of it",
        bounds.tol * 1e6,
        100.0 * metrics.linf_error / bounds.tol
    );
    Ok(())
}
