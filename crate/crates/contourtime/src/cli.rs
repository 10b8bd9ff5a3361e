//! Command implementations behind the `contourtime` binary. Each command
//! is a thin, deterministic wrapper over the library pipeline; outputs go
//! to a per-run directory and inputs are never mutated.

use crate::config::{load_config, LoadedConfig};
use crate::contour::Objective;
use crate::error::{Error, Result};
use crate::frames::StateMatrix;
use crate::nlp::{
    build_nlp, initial_guess, kkt_residuals, solve, write_solution, NlpProblem, NlpSolution,
};
use crate::plant::ControllerGains;
use crate::plot::{write_chart, Series};
use crate::postprocess::{
    compute_metrics, resample_reference, simulate_closed_loop, synthesize_tracking_log,
    tolerance_sweep, ReferenceFile,
};
use crate::sysid::{fit_gains, FitReport, TrackingLog};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Identifies the PD gains from a tracking log and writes the fit report.
pub fn cmd_fit(log_path: &Path, out_path: &Path) -> Result<()> {
    let log = TrackingLog::from_csv(log_path)?;
    let report = fit_gains(&log)?;
    report.write_key_values(out_path)?;
    print!("{}", report.human_summary());
    println!("gains written to {}", out_path.display());
    Ok(())
}

fn write_manifest(
    dir: &Path,
    loaded: &LoadedConfig,
    command: &str,
    extra: &[(&str, String)],
) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# contourtime run manifest");
    let _ = writeln!(out, "command = {command}");
    let _ = writeln!(out, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "config = {}", loaded.source_path.display());
    let _ = writeln!(out, "config_hash = {}", loaded.hash);
    for (k, v) in extra {
        let _ = writeln!(out, "{k} = {v}");
    }
    std::fs::write(dir.join("manifest.txt"), out)?;
    Ok(())
}

fn solution_plots(
    dir: &Path,
    problem: &NlpProblem,
    solution: &NlpSolution,
    objective: &Objective,
) -> Result<()> {
    let omega_g = problem.omega_global(solution);
    let gamma_g = problem.gamma_global(solution);
    let overlay = [
        Series {
            label: "objective",
            points: objective.points().iter().map(|p| (p.x, p.y)).collect(),
        },
        Series {
            label: "output",
            points: omega_g.iter().map(|s| (s.px, s.py)).collect(),
        },
        Series {
            label: "reference",
            points: gamma_g.iter().map(|s| (s.px, s.py)).collect(),
        },
    ];
    write_chart(&dir.join("overlay.svg"), "contour, output and reference", "x [m]", "y [m]", &overlay)?;

    let tol_um = problem.bounds.tol * 1e6;
    let deviation = [
        Series {
            label: "deviation",
            points: solution
                .omega_local
                .iter()
                .enumerate()
                .map(|(k, s)| (k as f64, s.py * 1e6))
                .collect(),
        },
        Series {
            label: "+tol",
            points: vec![(0.0, tol_um), (solution.n_points() as f64 - 1.0, tol_um)],
        },
        Series {
            label: "-tol",
            points: vec![(0.0, -tol_um), (solution.n_points() as f64 - 1.0, -tol_um)],
        },
    ];
    write_chart(
        &dir.join("deviation.svg"),
        "perpendicular deviation per point",
        "point index",
        "deviation [um]",
        &deviation,
    )?;

    let umax = problem.bounds.u_max;
    let n = solution.n_points() as f64 - 1.0;
    let inputs = [
        Series {
            label: "u_x",
            points: solution.u.iter().enumerate().map(|(k, u)| (k as f64, u.0)).collect(),
        },
        Series {
            label: "u_y",
            points: solution.u.iter().enumerate().map(|(k, u)| (k as f64, u.1)).collect(),
        },
        Series {
            label: "+u_max",
            points: vec![(0.0, umax), (n, umax)],
        },
        Series {
            label: "-u_max",
            points: vec![(0.0, -umax), (n, -umax)],
        },
    ];
    write_chart(
        &dir.join("inputs.svg"),
        "input per point",
        "point index",
        "input [m/s^2]",
        &inputs,
    )?;
    Ok(())
}

/// Full pipeline: objective, optimization, reference file, closed-loop
/// simulation, metrics, plots and a run manifest.
pub fn cmd_optimize(config_path: &Path, out_dir: Option<&Path>) -> Result<PathBuf> {
    let loaded = load_config(config_path)?;
    let objective = loaded.build_objective()?;
    let gains = loaded.gains()?;
    let weights = loaded.weights();
    let bounds = loaded.bounds();
    let solver_config = loaded.solver_config();

    let t0 = Instant::now();
    let problem = build_nlp(&objective, &gains, &weights, &bounds, &solver_config)?;
    let guess = initial_guess(&objective, &bounds, &solver_config);
    let solution = solve(&problem, &guess, &solver_config)?;
    let solve_wall = t0.elapsed().as_secs_f64();

    if !solution.status.is_usable() {
        let r = kkt_residuals(&problem, &solution);
        return Err(Error::Solver(format!(
            "status {} after {} iterations (stationarity {:.3e}, feasibility {:.3e}, complementarity {:.3e})",
            solution.status.as_str(),
            solution.iterations,
            r.stationarity,
            r.feasibility,
            r.complementarity
        )));
    }

    let dir = loaded.out_dir(out_dir);
    std::fs::create_dir_all(&dir)?;
    objective.to_csv(&dir.join("objective.csv"))?;
    write_solution(&dir.join("solution.txt"), &solution, &loaded.hash)?;

    let reference = resample_reference(&solution, &objective, loaded.dt_out())?;
    reference.to_csv(&dir.join("reference.csv"))?;

    let initial = StateMatrix::at_rest(reference.rows[0].pos.0, reference.rows[0].pos.1);
    let trajectory = simulate_closed_loop(&reference, &gains, &initial);
    let metrics = compute_metrics(&trajectory, &objective, &bounds)?;
    std::fs::write(dir.join("metrics.csv"), metrics.to_csv_string())?;
    std::fs::write(dir.join("metrics.txt"), metrics.human_summary())?;

    solution_plots(&dir, &problem, &solution, &objective)?;

    let residuals = kkt_residuals(&problem, &solution);
    let total_wall = t0.elapsed().as_secs_f64();
    write_manifest(
        &dir,
        &loaded,
        "optimize",
        &[
            ("status", solution.status.as_str().to_string()),
            ("iterations", solution.iterations.to_string()),
            ("objective_value", format!("{:.9e}", solution.objective_value)),
            ("traversal_time_s", format!("{:.9e}", solution.traversal_time())),
            ("kkt_stationarity", format!("{:.3e}", residuals.stationarity)),
            ("kkt_feasibility", format!("{:.3e}", residuals.feasibility)),
            ("kkt_complementarity", format!("{:.3e}", residuals.complementarity)),
            (
                "reference_velocity_consistency",
                format!("{:.3e}", reference.velocity_consistency),
            ),
            ("solve_wall_s", format!("{solve_wall:.3}")),
            ("total_wall_s", format!("{total_wall:.3}")),
        ],
    )?;
    println!(
        "status {}; traversal {:.6} s; objective {:.6e}; {} iterations; wall {:.2} s",
        solution.status.as_str(),
        solution.traversal_time(),
        solution.objective_value,
        solution.iterations,
        total_wall
    );
    println!("outputs in {}", dir.display());
    Ok(dir)
}

/// Per-tolerance optimization study with warm starts, tightest first.
pub fn cmd_sweep(
    config_path: &Path,
    tolerances: &[f64],
    out_dir: Option<&Path>,
) -> Result<PathBuf> {
    let loaded = load_config(config_path)?;
    let objective = loaded.build_objective()?;
    let gains = loaded.gains()?;
    let weights = loaded.weights();
    let bounds = loaded.bounds();
    let solver_config = loaded.solver_config();

    let t0 = Instant::now();
    let (table, _solutions) = tolerance_sweep(
        &objective,
        &gains,
        &weights,
        &bounds,
        tolerances,
        &solver_config,
    )?;
    let wall = t0.elapsed().as_secs_f64();

    let dir = loaded.out_dir(out_dir).join("sweep");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("sweep.csv"), table.to_csv_string())?;

    let time_series = [Series {
        label: "traversal time",
        points: table
            .rows
            .iter()
            .map(|r| (r.tol * 1e6, r.traversal_time * 1e3))
            .collect(),
    }];
    write_chart(
        &dir.join("sweep_time.svg"),
        "traversal time vs tolerance",
        "tolerance [um]",
        "time [ms]",
        &time_series,
    )?;
    let l2_series = [
        Series {
            label: "L2 error",
            points: table.rows.iter().map(|r| (r.tol * 1e6, r.l2 * 1e6)).collect(),
        },
        Series {
            label: "band line",
            points: table
                .rows
                .iter()
                .map(|r| (r.tol * 1e6, r.l2_band * 1e6))
                .collect(),
        },
    ];
    write_chart(
        &dir.join("sweep_l2.svg"),
        "L2 error vs tolerance",
        "tolerance [um]",
        "L2 [um]",
        &l2_series,
    )?;
    write_manifest(
        &dir,
        &loaded,
        "sweep",
        &[
            ("rows", table.rows.len().to_string()),
            ("wall_s", format!("{wall:.3}")),
        ],
    )?;
    let mut human = String::from("tol [um]  time [ms]  L2 [um]  Linf [um]  status\n");
    for r in &table.rows {
        let _ = writeln!(
            human,
            "{:8.2}  {:9.3}  {:7.3}  {:9.3}  {}",
            r.tol * 1e6,
            r.traversal_time * 1e3,
            r.l2 * 1e6,
            r.linf * 1e6,
            r.status.as_str()
        );
    }
    print!("{human}");
    std::fs::write(dir.join("sweep.txt"), human)?;
    println!("outputs in {}", dir.display());
    Ok(dir)
}

/// Plays a reference file through the simulated closed loop and scores it
/// against the config's objective.
pub fn cmd_simulate(
    reference_path: &Path,
    gains_path: &Path,
    config_path: &Path,
    out_dir: Option<&Path>,
) -> Result<PathBuf> {
    let loaded = load_config(config_path)?;
    let objective = loaded.build_objective()?;
    let bounds = loaded.bounds();
    let gains = FitReport::gains_from_key_values(gains_path)?;
    let reference = ReferenceFile::from_csv(reference_path)?;

    let initial = StateMatrix::at_rest(reference.rows[0].pos.0, reference.rows[0].pos.1);
    let trajectory = simulate_closed_loop(&reference, &gains, &initial);
    let metrics = compute_metrics(&trajectory, &objective, &bounds)?;

    let dir = loaded.out_dir(out_dir).join("simulate");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("metrics.csv"), metrics.to_csv_string())?;
    std::fs::write(dir.join("metrics.txt"), metrics.human_summary())?;

    // deviation over time, sampled down for the plot
    let stride = (trajectory.len() / 4000).max(1);
    let dev_points: Vec<(f64, f64)> = trajectory
        .iter()
        .step_by(stride)
        .map(|s| {
            let (dev, _) = crate::postprocess::project_to_polyline(
                objective.source_polyline(),
                s.state.position(),
            );
            (s.t, dev * 1e6)
        })
        .collect();
    let series = [Series {
        label: "deviation",
        points: dev_points,
    }];
    write_chart(
        &dir.join("sim_deviation.svg"),
        "simulated deviation over time",
        "t [s]",
        "deviation [um]",
        &series,
    )?;
    write_manifest(
        &dir,
        &loaded,
        "simulate",
        &[
            ("reference", reference_path.display().to_string()),
            ("gains", gains_path.display().to_string()),
            ("linf_m", format!("{:.6e}", metrics.linf_error)),
            ("l2_m", format!("{:.6e}", metrics.l2_error)),
        ],
    )?;
    print!("{}", metrics.human_summary());
    println!("outputs in {}", dir.display());
    Ok(dir)
}

/// Generates a synthetic tracking log by simulating the closed loop on a
/// reference with seeded Gaussian actuator noise.
pub fn cmd_synth_log(
    gains_path: &Path,
    reference_path: &Path,
    noise_std: f64,
    seed: u64,
    out_path: &Path,
) -> Result<()> {
    let gains: ControllerGains = FitReport::gains_from_key_values(gains_path)?;
    let reference = ReferenceFile::from_csv(reference_path)?;
    let initial = StateMatrix::at_rest(reference.rows[0].pos.0, reference.rows[0].pos.1);
    let log = synthesize_tracking_log(&reference, &gains, &initial, noise_std, seed)?;
    log.to_csv(out_path)?;
    println!(
        "{} samples written to {} (noise std {noise_std}, seed {seed})",
        log.samples.len(),
        out_path.display()
    );
    Ok(())
}

/// Writes the resampled objective of a config as CSV.
pub fn cmd_contour(config_path: &Path, out_path: &Path) -> Result<()> {
    let loaded = load_config(config_path)?;
    let objective = loaded.build_objective()?;
    objective.to_csv(out_path)?;
    println!(
        "{} points at delta_s = {:.6e} m written to {}",
        objective.len(),
        objective.delta_s(),
        out_path.display()
    );
    Ok(())
}
