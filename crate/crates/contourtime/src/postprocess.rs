//! From an optimal solution to something a machine can play back:
//! constant-timestep reference generation, closed-loop simulation at the
//! playback rate, and contour-error metrics.

use crate::contour::{Objective, Point};
use crate::csvio;
use crate::error::{Error, Result};
use crate::frames::StateMatrix;
use crate::nlp::{
    build_nlp, initial_guess, solve, BoundSet, NlpProblem, NlpSolution, SolveStatus, SolverConfig,
    Weights,
};
use crate::plant::{pd_input, step_global, ControllerGains};
use std::fmt::Write as _;
use std::path::Path;

pub const REFERENCE_HEADER: &str = "t,rx,ry,rvx,rvy";

/// One reference row: time, position and velocity in global coordinates.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceRow {
    pub t: f64,
    pub pos: (f64, f64),
    pub vel: (f64, f64),
}

/// A constant-timestep reference for machine playback.
#[derive(Debug, Clone)]
pub struct ReferenceFile {
    pub dt: f64,
    pub rows: Vec<ReferenceRow>,
    /// Worst mismatch between row velocities and the finite-difference
    /// slope of the row positions, reported alongside the file.
    pub velocity_consistency: f64,
}

impl ReferenceFile {
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from(REFERENCE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                csvio::fmt15(r.t),
                csvio::fmt15(r.pos.0),
                csvio::fmt15(r.pos.1),
                csvio::fmt15(r.vel.0),
                csvio::fmt15(r.vel.1)
            );
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let rows_raw = csvio::read_table(path, REFERENCE_HEADER)?;
        if rows_raw.len() < 2 {
            return Err(Error::InvalidInput(
                "reference file needs at least 2 rows".into(),
            ));
        }
        let rows: Vec<ReferenceRow> = rows_raw
            .iter()
            .map(|r| ReferenceRow {
                t: r[0],
                pos: (r[1], r[2]),
                vel: (r[3], r[4]),
            })
            .collect();
        let dt = rows[1].t - rows[0].t;
        if !(dt > 0.0) {
            return Err(Error::InvalidInput("reference times must increase".into()));
        }
        Ok(Self {
            dt,
            rows,
            velocity_consistency: f64::NAN,
        })
    }

    pub fn duration(&self) -> f64 {
        self.rows.last().map(|r| r.t).unwrap_or(0.0)
    }
}

/// Evaluates the reference chain of a solution at an arbitrary time using
/// the exact double-integrator flow under the zero-order-hold virtual
/// inputs. Times beyond the final knot clamp to the final state.
pub fn reference_state_at(
    gamma_global: &[StateMatrix],
    v: &[(f64, f64)],
    knots: &[f64],
    t: f64,
) -> (f64, f64, f64, f64) {
    let n = knots.len();
    debug_assert_eq!(gamma_global.len(), n);
    if t >= knots[n - 1] {
        let s = &gamma_global[n - 1];
        return (s.px, s.py, s.vx, s.vy);
    }
    // locate the interval containing t
    let mut k = match knots.binary_search_by(|probe| probe.partial_cmp(&t).unwrap()) {
        Ok(i) => i,
        Err(i) => i.saturating_sub(1),
    };
    if k >= n - 1 {
        k = n - 2;
    }
    let s = &gamma_global[k];
    let (ax, ay) = v[k];
    let h = t - knots[k];
    (
        s.px + s.vx * h + 0.5 * ax * h * h,
        s.py + s.vy * h + 0.5 * ay * h * h,
        s.vx + ax * h,
        s.vy + ay * h,
    )
}

/// Converts a variable-timestep solution into a constant-timestep
/// reference sampled at `dt_out`.
pub fn resample_reference(
    solution: &NlpSolution,
    objective: &Objective,
    dt_out: f64,
) -> Result<ReferenceFile> {
    if !(dt_out > 0.0) {
        return Err(Error::InvalidInput(format!(
            "dt_out must be > 0, got {dt_out}"
        )));
    }
    if !solution.status.is_usable() {
        return Err(Error::Solver(format!(
            "cannot resample a solution with status {}",
            solution.status.as_str()
        )));
    }
    let n = solution.n_points();
    if objective.len() != n {
        return Err(Error::InvalidInput(format!(
            "objective has {} points, solution has {n}",
            objective.len()
        )));
    }
    let min_dt = solution.dt[..n - 1]
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b));
    if dt_out > min_dt {
        log::warn!(
            "dt_out = {dt_out} undersamples the solution (min stage duration {min_dt:.3e})"
        );
    }
    let gamma_global: Vec<crate::frames::StateMatrix> = solution
        .gamma_local
        .iter()
        .zip(objective.points())
        .map(|(s, p)| crate::frames::to_global(s, &crate::frames::frame_of(p)))
        .collect();
    let knots = solution.knot_times();
    let t_end = knots[n - 1];
    let steps = (t_end / dt_out).floor() as usize;
    let mut rows = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = i as f64 * dt_out;
        let (px, py, vx, vy) = reference_state_at(&gamma_global, &solution.v, &knots, t);
        rows.push(ReferenceRow {
            t,
            pos: (px, py),
            vel: (vx, vy),
        });
    }
    // velocity/position consistency: trapezoid slope vs reported velocities
    let mut consistency = 0.0f64;
    for pair in rows.windows(2) {
        let slope_x = (pair[1].pos.0 - pair[0].pos.0) / dt_out;
        let slope_y = (pair[1].pos.1 - pair[0].pos.1) / dt_out;
        let mid_x = 0.5 * (pair[0].vel.0 + pair[1].vel.0);
        let mid_y = 0.5 * (pair[0].vel.1 + pair[1].vel.1);
        consistency = consistency
            .max((slope_x - mid_x).abs())
            .max((slope_y - mid_y).abs());
    }
    Ok(ReferenceFile {
        dt: dt_out,
        rows,
        velocity_consistency: consistency,
    })
}

/// One simulated sample: time, plant state and the input applied over the
/// following interval.
#[derive(Debug, Clone, Copy)]
pub struct SimSample {
    pub t: f64,
    pub state: StateMatrix,
    pub input: (f64, f64),
}

/// Steps the double integrator at the reference rate under the PD law with
/// its one-step delay; the very first interval holds the input computed
/// from the initial error.
pub fn simulate_closed_loop(
    reference: &ReferenceFile,
    gains: &ControllerGains,
    initial_state: &StateMatrix,
) -> Vec<SimSample> {
    let n = reference.rows.len();
    let mut samples = Vec::with_capacity(n);
    if n == 0 {
        return samples;
    }
    let dt = reference.dt;
    let row_state = |r: &ReferenceRow| StateMatrix::new(r.pos.0, r.pos.1, r.vel.0, r.vel.1);
    let mut state = *initial_state;
    let mut prev_error_input = pd_input(gains, &row_state(&reference.rows[0]), &state);
    for i in 0..n {
        let u = prev_error_input;
        samples.push(SimSample {
            t: reference.rows[i].t,
            state,
            input: u,
        });
        // the error observed now drives the input one interval later
        prev_error_input = pd_input(gains, &row_state(&reference.rows[i]), &state);
        if i + 1 < n {
            state = step_global(&state, u, dt);
        }
    }
    samples
}

/// Contour-tracking quality of a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct MetricsReport {
    pub traversal_time: f64,
    /// RMS of the perpendicular deviation over the constrained region, m.
    pub l2_error: f64,
    /// Max perpendicular deviation over the constrained region, m.
    pub linf_error: f64,
    pub violation_count: usize,
    pub samples_scored: usize,
}

impl MetricsReport {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("traversal_time_s,l2_m,linf_m,violation_count,samples\n");
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csvio::fmt15(self.traversal_time),
            csvio::fmt15(self.l2_error),
            csvio::fmt15(self.linf_error),
            self.violation_count,
            self.samples_scored
        );
        out
    }

    pub fn human_summary(&self) -> String {
        format!(
            "traversal time {:.6} s, L2 {:.3} um, Linf {:.3} um, {} violations over {} samples\n",
            self.traversal_time,
            self.l2_error * 1e6,
            self.linf_error * 1e6,
            self.violation_count,
            self.samples_scored
        )
    }
}

/// Signed perpendicular distance from a point to the nearest spot on a
/// polyline, plus the arc-length position of that spot. Positive is left
/// of the travel direction, the same sign convention as the local frames.
pub fn project_to_polyline(polyline: &[Point], p: (f64, f64)) -> (f64, f64) {
    let mut best_d2 = f64::INFINITY;
    let mut best = (0.0, 0.0);
    let mut arc = 0.0;
    for w in polyline.windows(2) {
        let (a, b) = (w[0], w[1]);
        let vx = b.x - a.x;
        let vy = b.y - a.y;
        let len2 = vx * vx + vy * vy;
        let t = (((p.0 - a.x) * vx + (p.1 - a.y) * vy) / len2).clamp(0.0, 1.0);
        let fx = a.x + t * vx;
        let fy = a.y + t * vy;
        let dx = p.0 - fx;
        let dy = p.1 - fy;
        let d2 = dx * dx + dy * dy;
        if d2 < best_d2 {
            best_d2 = d2;
            let len = len2.sqrt();
            let cross = (vx * dy - vy * dx) / len;
            best = (cross, arc + t * len);
        }
        arc += len2.sqrt();
    }
    best
}

/// Projects every trajectory sample onto the dense source polyline and
/// scores the perpendicular deviation over the region past the relax zone.
pub fn compute_metrics(
    trajectory: &[SimSample],
    objective: &Objective,
    bounds: &BoundSet,
) -> Result<MetricsReport> {
    if trajectory.is_empty() {
        return Err(Error::InvalidInput("empty trajectory".into()));
    }
    let polyline = objective.source_polyline();
    let arc_min = bounds.relax_count as f64 * objective.delta_s();
    let mut sum_sq = 0.0;
    let mut linf: f64 = 0.0;
    let mut violations = 0usize;
    let mut scored = 0usize;
    for s in trajectory {
        let (dev, arc) = project_to_polyline(polyline, s.state.position());
        if arc < arc_min {
            continue;
        }
        scored += 1;
        sum_sq += dev * dev;
        linf = linf.max(dev.abs());
        if dev.abs() > bounds.tol {
            violations += 1;
        }
    }
    let l2 = if scored > 0 {
        (sum_sq / scored as f64).sqrt()
    } else {
        0.0
    };
    Ok(MetricsReport {
        traversal_time: trajectory.last().unwrap().t - trajectory[0].t,
        l2_error: l2,
        linf_error: linf,
        violation_count: violations,
        samples_scored: scored,
    })
}

/// Simulates the closed loop on a reference with additive Gaussian
/// actuator noise and records a tracking log, deterministically per seed.
pub fn synthesize_tracking_log(
    reference: &ReferenceFile,
    gains: &ControllerGains,
    initial_state: &StateMatrix,
    noise_std: f64,
    seed: u64,
) -> Result<crate::sysid::TrackingLog> {
    use rand::SeedableRng;
    use rand_distr::Distribution;
    if noise_std < 0.0 {
        return Err(Error::InvalidInput("noise_std must be >= 0".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::Normal::new(0.0, noise_std.max(1e-300))
        .map_err(|e| Error::InvalidInput(format!("bad noise parameter: {e}")))?;
    let n = reference.rows.len();
    let dt = reference.dt;
    let row_state = |r: &ReferenceRow| StateMatrix::new(r.pos.0, r.pos.1, r.vel.0, r.vel.1);
    let mut state = *initial_state;
    let mut pending = pd_input(gains, &row_state(&reference.rows[0]), &state);
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let mut u = pending;
        if noise_std > 0.0 {
            u.0 += normal.sample(&mut rng);
            u.1 += normal.sample(&mut rng);
        }
        let r = &reference.rows[i];
        samples.push(crate::sysid::LogSample {
            t: r.t,
            ref_pos: r.pos,
            ref_vel: r.vel,
            out_pos: state.position(),
            out_vel: state.velocity(),
            accel: u,
        });
        pending = pd_input(gains, &row_state(r), &state);
        if i + 1 < n {
            state = step_global(&state, u, dt);
        }
    }
    crate::sysid::TrackingLog::new(samples)
}

/// One row of the tolerance sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub tol: f64,
    pub traversal_time: f64,
    pub l2: f64,
    pub linf: f64,
    /// The band line: the L2 error of a trajectory pinned at the band.
    pub l2_band: f64,
    pub status: SolveStatus,
}

#[derive(Debug, Clone, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("tol_m,traversal_time_s,l2_m,linf_m,l2_band_m,status\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                csvio::fmt15(r.tol),
                csvio::fmt15(r.traversal_time),
                csvio::fmt15(r.l2),
                csvio::fmt15(r.linf),
                csvio::fmt15(r.l2_band),
                r.status.as_str()
            );
        }
        out
    }
}

/// Solution-level deviation statistics over the constrained stages.
pub fn solution_deviation_stats(problem: &NlpProblem, solution: &NlpSolution) -> (f64, f64) {
    let mut sum_sq = 0.0;
    let mut linf: f64 = 0.0;
    let mut count = 0usize;
    for (k, s) in solution.omega_local.iter().enumerate() {
        if !problem.is_stage_constrained(k) {
            continue;
        }
        sum_sq += s.py * s.py;
        linf = linf.max(s.py.abs());
        count += 1;
    }
    let l2 = if count > 0 {
        (sum_sq / count as f64).sqrt()
    } else {
        0.0
    };
    (l2, linf)
}

/// Solves the problem once per tolerance, tightest first, warm-starting
/// each solve from the previous solution. Per-tolerance failures become
/// row statuses instead of aborting the sweep.
pub fn tolerance_sweep(
    objective: &Objective,
    gains: &ControllerGains,
    weights: &Weights,
    bounds_template: &BoundSet,
    tolerances: &[f64],
    config: &SolverConfig,
) -> Result<(SweepTable, Vec<Option<NlpSolution>>)> {
    if tolerances.len() < 2 {
        return Err(Error::InvalidInput(
            "tolerance sweep needs at least 2 tolerance values".into(),
        ));
    }
    let mut tols = tolerances.to_vec();
    tols.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut table = SweepTable::default();
    let mut solutions = Vec::with_capacity(tols.len());
    let mut warm: Option<NlpSolution> = None;
    for &tol in &tols {
        let bounds = BoundSet {
            tol,
            ..*bounds_template
        };
        let row = (|| -> Result<(SweepRow, NlpSolution)> {
            let problem = build_nlp(objective, gains, weights, &bounds, config)?;
            let guess = match &warm {
                Some(prev) => prev.clone(),
                None => initial_guess(objective, &bounds, config),
            };
            let sol = solve(&problem, &guess, config)?;
            let (l2, linf) = solution_deviation_stats(&problem, &sol);
            Ok((
                SweepRow {
                    tol,
                    traversal_time: sol.traversal_time(),
                    l2,
                    linf,
                    l2_band: tol,
                    status: sol.status,
                },
                sol,
            ))
        })();
        match row {
            Ok((row, sol)) => {
                if sol.status.is_usable() {
                    warm = Some(sol.clone());
                }
                solutions.push(Some(sol));
                table.rows.push(row);
            }
            Err(err) => {
                log::warn!("sweep at tol {tol:.1e} failed: {err}");
                solutions.push(None);
                table.rows.push(SweepRow {
                    tol,
                    traversal_time: f64::NAN,
                    l2: f64::NAN,
                    linf: f64::NAN,
                    l2_band: tol,
                    status: SolveStatus::Infeasible,
                });
            }
        }
    }
    Ok((table, solutions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{resample_constant_arclength, RawPath};
    use crate::frames::{frame_of, to_global};
    use approx::assert_relative_eq;

    fn line_objective(n: usize) -> Objective {
        let path = RawPath::new(
            vec![Point::new(0.0, 0.0), Point::new(0.2, 0.0)],
            false,
        )
        .unwrap();
        resample_constant_arclength(&path, n).unwrap()
    }

    fn synthetic_solution(objective: &Objective) -> (NlpProblem, NlpSolution) {
        // uniform-speed coasting along a straight contour is dynamically
        // consistent, so it doubles as a feasible-chain fixture
        let gains = ControllerGains::new(1e4, 2e2, 1e4, 2e2).unwrap();
        let bounds = BoundSet {
            relax_count: 4,
            ..BoundSet::default()
        };
        let config = SolverConfig::default();
        let problem = build_nlp(objective, &gains, &Weights::default(), &bounds, &config).unwrap();
        let n = objective.len();
        let speed = 0.05;
        let dt = objective.delta_s() / speed;
        let state = StateMatrix::new(0.0, 0.0, speed, 0.0);
        let sol = NlpSolution {
            omega_local: vec![state; n],
            gamma_local: vec![state; n],
            u: vec![(0.0, 0.0); n],
            v: vec![(0.0, 0.0); n],
            dt: vec![dt; n],
            status: SolveStatus::Optimal,
            objective_value: 0.0,
            max_constraint_violation: 0.0,
            iterations: 0,
            multipliers: None,
        };
        (problem, sol)
    }

    #[test]
    fn resampling_at_original_grid_reproduces_knots() {
        let objective = line_objective(21);
        let (problem, sol) = synthetic_solution(&objective);
        let reference = resample_reference(&sol, &objective, sol.dt[0]).unwrap();
        let gamma_global = problem.gamma_global(&sol);
        for (k, row) in reference.rows.iter().enumerate().take(21) {
            assert_relative_eq!(row.pos.0, gamma_global[k].px, epsilon = 1e-12);
            assert_relative_eq!(row.pos.1, gamma_global[k].py, epsilon = 1e-12);
            assert_relative_eq!(row.vel.0, gamma_global[k].vx, epsilon = 1e-12);
        }
        assert!(reference.velocity_consistency < 1e-12);
    }

    #[test]
    fn constant_velocity_rows_are_linear_in_time() {
        let objective = line_objective(21);
        let (_, sol) = synthetic_solution(&objective);
        let reference = resample_reference(&sol, &objective, 1e-3).unwrap();
        let v = reference.rows[0].vel.0;
        for row in &reference.rows {
            assert_relative_eq!(row.pos.0, v * row.t, epsilon = 1e-12);
            assert_eq!(row.pos.1, 0.0);
        }
    }

    #[test]
    fn random_chain_knot_consistency() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let path = crate::contour::make_smooth_spiral(0.01, 0.5, 0.002).unwrap();
        let objective = resample_constant_arclength(&path, 30).unwrap();
        let (problem, mut sol) = {
            let gains = ControllerGains::new(1e4, 2e2, 1e4, 2e2).unwrap();
            let bounds = BoundSet {
                relax_count: 4,
                ..BoundSet::default()
            };
            let config = SolverConfig::default();
            let problem =
                build_nlp(&objective, &gains, &Weights::default(), &bounds, &config).unwrap();
            let guess = initial_guess(&objective, &bounds, &config);
            (problem, guess)
        };
        // randomize the virtual inputs and integrate the gamma chain so it
        // is exactly flow-consistent in global coordinates
        let n = sol.n_points();
        for k in 0..n {
            sol.dt[k] = rng.random_range(1e-3..8e-3);
            sol.v[k] = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let pts = objective.points();
        let mut g_global = to_global(&sol.gamma_local[0], &frame_of(&pts[0]));
        for k in 0..n - 1 {
            sol.gamma_local[k] =
                crate::frames::to_local(&g_global, &frame_of(&pts[k]));
            g_global = step_global(&g_global, sol.v[k], sol.dt[k]);
        }
        sol.gamma_local[n - 1] = crate::frames::to_local(&g_global, &frame_of(&pts[n - 1]));
        sol.status = SolveStatus::Optimal;

        let knots = sol.knot_times();
        let gamma_global = problem.gamma_global(&sol);
        for k in 0..n {
            let (px, py, vx, vy) =
                reference_state_at(&gamma_global, &sol.v, &knots, knots[k]);
            assert!((px - gamma_global[k].px).abs() < 1e-12);
            assert!((py - gamma_global[k].py).abs() < 1e-12);
            assert!((vx - gamma_global[k].vx).abs() < 1e-12);
            assert!((vy - gamma_global[k].vy).abs() < 1e-12);
        }
    }

    #[test]
    fn steady_reference_from_rest_means_zero_input() {
        let rows: Vec<ReferenceRow> = (0..100)
            .map(|i| ReferenceRow {
                t: i as f64 * 1e-3,
                pos: (0.5, -0.25),
                vel: (0.0, 0.0),
            })
            .collect();
        let reference = ReferenceFile {
            dt: 1e-3,
            rows,
            velocity_consistency: 0.0,
        };
        let gains = ControllerGains::new(1e4, 2e2, 1e4, 2e2).unwrap();
        let traj = simulate_closed_loop(&reference, &gains, &StateMatrix::at_rest(0.5, -0.25));
        for s in traj {
            assert_eq!(s.input, (0.0, 0.0));
            assert_eq!(s.state.position(), (0.5, -0.25));
        }
    }

    #[test]
    fn step_reference_converges() {
        let rows: Vec<ReferenceRow> = (0..100_000)
            .map(|i| ReferenceRow {
                t: i as f64 * 1e-4,
                pos: (1e-3, 2e-3),
                vel: (0.0, 0.0),
            })
            .collect();
        let reference = ReferenceFile {
            dt: 1e-4,
            rows,
            velocity_consistency: 0.0,
        };
        let gains = ControllerGains::new(1e4, 2e2, 1e4, 2e2).unwrap();
        let traj = simulate_closed_loop(&reference, &gains, &StateMatrix::at_rest(0.0, 0.0));
        let last = traj.last().unwrap();
        let err = (last.state.px - 1e-3).hypot(last.state.py - 2e-3);
        assert!(err < 1e-9, "final error {err}");
    }

    #[test]
    fn metrics_on_contour_are_zero() {
        let objective = line_objective(21);
        let traj: Vec<SimSample> = (0..50)
            .map(|i| SimSample {
                t: i as f64 * 1e-3,
                state: StateMatrix::new(0.004 * i as f64, 0.0, 0.2, 0.0),
                input: (0.0, 0.0),
            })
            .collect();
        let bounds = BoundSet {
            relax_count: 4,
            ..BoundSet::default()
        };
        let m = compute_metrics(&traj, &objective, &bounds).unwrap();
        assert_eq!(m.l2_error, 0.0);
        assert_eq!(m.linf_error, 0.0);
        assert_eq!(m.violation_count, 0);
    }

    #[test]
    fn constant_offset_gives_l2_equal_linf_equal_offset() {
        let objective = line_objective(21);
        let d = 5e-6;
        let traj: Vec<SimSample> = (0..100)
            .map(|i| SimSample {
                t: i as f64 * 1e-3,
                state: StateMatrix::new(0.002 * i as f64, d, 0.2, 0.0),
                input: (0.0, 0.0),
            })
            .collect();
        let bounds = BoundSet {
            relax_count: 4,
            ..BoundSet::default()
        };
        let m = compute_metrics(&traj, &objective, &bounds).unwrap();
        assert_relative_eq!(m.l2_error, d, max_relative = 1e-12);
        assert_relative_eq!(m.linf_error, d, max_relative = 1e-12);
        assert_eq!(m.violation_count, 0);
        // offset sign: +y is left of the +x travel direction
        let (dev, _) = project_to_polyline(objective.source_polyline(), (0.05, d));
        assert!(dev > 0.0);
    }

    #[test]
    fn sinusoidal_deviation_rms() {
        let objective = line_objective(21);
        let a = 8e-6;
        let traj: Vec<SimSample> = (0..20_000)
            .map(|i| {
                let x = 0.2 * i as f64 / 20_000.0;
                SimSample {
                    t: i as f64 * 1e-4,
                    state: StateMatrix::new(
                        x,
                        a * (x / 0.2 * 200.0 * std::f64::consts::PI).sin(),
                        0.2,
                        0.0,
                    ),
                    input: (0.0, 0.0),
                }
            })
            .collect();
        let bounds = BoundSet {
            relax_count: 0,
            ..BoundSet::default()
        };
        let m = compute_metrics(&traj, &objective, &bounds).unwrap();
        assert!(
            (m.l2_error - a / 2.0f64.sqrt()).abs() / (a / 2.0f64.sqrt()) < 0.01,
            "l2 {} vs {}",
            m.l2_error,
            a / 2.0f64.sqrt()
        );
        assert!(m.l2_error <= m.linf_error);
    }

    #[test]
    fn empty_trajectory_rejected() {
        let objective = line_objective(11);
        let bounds = BoundSet::default();
        assert!(compute_metrics(&[], &objective, &bounds).is_err());
    }

    #[test]
    fn sweep_requires_two_tolerances() {
        let objective = line_objective(11);
        let gains = ControllerGains::new(1e4, 2e2, 1e4, 2e2).unwrap();
        let err = tolerance_sweep(
            &objective,
            &gains,
            &Weights::default(),
            &BoundSet::default(),
            &[1e-5],
            &SolverConfig::default(),
        );
        assert!(err.is_err());
    }
}
