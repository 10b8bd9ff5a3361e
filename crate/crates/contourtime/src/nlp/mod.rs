//! The variable-timestep contouring optimization: minimum traversal time
//! with the machine's closed loop embedded as equality constraints, a
//! perpendicular tolerance band on the output, and actuation bounds.

pub mod band;
pub mod ipm;
mod model;

use crate::contour::Objective;
use crate::csvio;
use crate::error::{Error, Result};
use crate::frames::{frame_of, to_global, StateMatrix};
use crate::plant::ControllerGains;
use ipm::{IpmOptions, IpmStatus, NlpModel};
use model::{ContourModel, B, GU, GV, GX, GY, SX, SY, TAU, UX, UY, VN, VT, VXI, VYI};
use std::fmt::Write as _;
use std::path::Path;

/// Cost weights, applied to unscaled SI quantities.
///
/// `time_weight` multiplies the summed stage durations (in seconds). The
/// state and input weights keep their customary published values, which
/// assume deviations measured in meters; the time weight of 1000 puts one
/// cost unit per millisecond of traversal, the regime in which the band
/// and the input bounds actually become active.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub time_weight: f64,
    /// Diagonal of the output weight: (position, velocity).
    pub q_omega: [f64; 2],
    /// Symmetric 2x2 input weight.
    pub r_u: [[f64; 2]; 2],
    /// Diagonal of the reference weight: (position, velocity).
    pub q_gamma: [f64; 2],
    /// Symmetric 2x2 virtual-input weight.
    pub r_v: [[f64; 2]; 2],
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            time_weight: 1e3,
            q_omega: [1e7, 1.0],
            r_u: [[1.0, 0.0], [0.0, 1.0]],
            q_gamma: [1e6, 1.0],
            r_v: [[1.0, 0.0], [0.0, 1.0]],
        }
    }
}

impl Weights {
    pub fn validate(&self) -> Result<()> {
        let dependent = [
            ("time_weight", self.time_weight),
            ("q_omega[0]", self.q_omega[0]),
            ("q_omega[1]", self.q_omega[1]),
            ("q_gamma[0]", self.q_gamma[0]),
            ("q_gamma[1]", self.q_gamma[1]),
        ];
        for (name, v) in dependent {
            if !(v > 0.0) {
                return Err(Error::Validation(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, r) in [("r_u", &self.r_u), ("r_v", &self.r_v)] {
            if (r[0][1] - r[1][0]).abs() > 1e-12 {
                return Err(Error::Validation(format!("{name} must be symmetric")));
            }
            let det = r[0][0] * r[1][1] - r[0][1] * r[1][0];
            if !(r[0][0] > 0.0 && det > 0.0) {
                return Err(Error::Validation(format!(
                    "{name} must be positive definite"
                )));
            }
        }
        Ok(())
    }
}

/// Actuation and tolerance bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSet {
    /// Per-axis input bound, m/s^2.
    pub u_max: f64,
    /// Per-axis global velocity bound, m/s.
    pub vel_max: f64,
    /// Half-width of the perpendicular deviation band, m.
    pub tol: f64,
    /// Number of initial points where the output bounds are not enforced.
    pub relax_count: usize,
}

impl Default for BoundSet {
    fn default() -> Self {
        Self {
            u_max: 2.0,
            vel_max: 2.0,
            tol: 20e-6,
            relax_count: 16,
        }
    }
}

impl BoundSet {
    pub fn validate(&self, n_points: usize) -> Result<()> {
        for (name, v) in [
            ("u_max", self.u_max),
            ("vel_max", self.vel_max),
            ("tol", self.tol),
        ] {
            if !(v > 0.0) {
                return Err(Error::Validation(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.relax_count >= n_points {
            return Err(Error::Validation(format!(
                "relax_count {} must be < N = {n_points}",
                self.relax_count
            )));
        }
        Ok(())
    }
}

/// Solver tolerances and variable limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Feasibility tolerance in internally scaled units.
    pub feasibility_tol: f64,
    /// Stationarity tolerance in internally scaled units.
    pub optimality_tol: f64,
    pub max_iterations: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Tangential speed used to seed the initial guess, m/s.
    pub initial_speed_guess: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-8,
            optimality_tol: 1e-6,
            max_iterations: 3000,
            dt_min: 1e-5,
            dt_max: 1e-1,
            initial_speed_guess: 0.05,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.feasibility_tol > 0.0 && self.optimality_tol > 0.0) {
            return Err(Error::Validation("solver tolerances must be > 0".into()));
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_max) {
            return Err(Error::Validation(format!(
                "need 0 < dt_min < dt_max, got {} and {}",
                self.dt_min, self.dt_max
            )));
        }
        if !(self.initial_speed_guess > 0.0) {
            return Err(Error::Validation("initial_speed_guess must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    FeasibleSuboptimal,
    Infeasible,
    IterationLimit,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleSuboptimal => "feasible-suboptimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::IterationLimit => "iteration-limit",
        }
    }

    pub fn from_str(s: &str) -> Option<Self> {
        match s {
            "optimal" => Some(SolveStatus::Optimal),
            "feasible-suboptimal" => Some(SolveStatus::FeasibleSuboptimal),
            "infeasible" => Some(SolveStatus::Infeasible),
            "iteration-limit" => Some(SolveStatus::IterationLimit),
            _ => None,
        }
    }

    pub fn is_usable(&self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::FeasibleSuboptimal)
    }
}

/// Multipliers in internally scaled units, kept for certification and
/// warm starts.
#[derive(Debug, Clone)]
pub struct Multipliers {
    pub lam: Vec<f64>,
    pub zl: Vec<f64>,
    pub zu: Vec<f64>,
}

/// A point of the optimization, in SI units per stage.
#[derive(Debug, Clone)]
pub struct NlpSolution {
    /// Output state in local coordinates; the x entry is the (pinned)
    /// tangential offset.
    pub omega_local: Vec<StateMatrix>,
    /// Reference state in local coordinates.
    pub gamma_local: Vec<StateMatrix>,
    /// Physical input, global axes, m/s^2.
    pub u: Vec<(f64, f64)>,
    /// Virtual input, global axes, m/s^2.
    pub v: Vec<(f64, f64)>,
    /// Stage durations, s. The final entry follows the cost only.
    pub dt: Vec<f64>,
    pub status: SolveStatus,
    pub objective_value: f64,
    /// Max constraint violation in scaled units.
    pub max_constraint_violation: f64,
    pub iterations: usize,
    pub(crate) multipliers: Option<Multipliers>,
}

impl NlpSolution {
    pub fn n_points(&self) -> usize {
        self.dt.len()
    }

    /// Total traversal time: the sum of the N-1 intervals actually used by
    /// the dynamics.
    pub fn traversal_time(&self) -> f64 {
        self.dt[..self.dt.len() - 1].iter().sum()
    }

    /// Knot times, starting at zero.
    pub fn knot_times(&self) -> Vec<f64> {
        let mut t = Vec::with_capacity(self.dt.len());
        let mut acc = 0.0;
        t.push(0.0);
        for &d in &self.dt[..self.dt.len() - 1] {
            acc += d;
            t.push(acc);
        }
        t
    }

    pub fn has_multipliers(&self) -> bool {
        self.multipliers.is_some()
    }
}

/// An assembled problem instance.
pub struct NlpProblem {
    model: ContourModel,
    objective: Objective,
    pub gains: ControllerGains,
    pub weights: Weights,
    pub bounds: BoundSet,
    pub config: SolverConfig,
}

/// Residual magnitudes of the first-order optimality system.
#[derive(Debug, Clone, Copy)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub feasibility: f64,
    pub complementarity: f64,
}

/// Assembles the optimization problem for one objective.
pub fn build_nlp(
    objective: &Objective,
    gains: &ControllerGains,
    weights: &Weights,
    bounds: &BoundSet,
    config: &SolverConfig,
) -> Result<NlpProblem> {
    weights.validate()?;
    bounds.validate(objective.len())?;
    config.validate()?;
    let model = ContourModel::new(objective, gains, weights, bounds, config)?;
    Ok(NlpProblem {
        model,
        objective: objective.clone(),
        gains: *gains,
        weights: weights.clone(),
        bounds: *bounds,
        config: *config,
    })
}

impl NlpProblem {
    pub fn n_points(&self) -> usize {
        self.model.n_stages
    }

    pub fn n_variables(&self) -> usize {
        self.model.num_vars()
    }

    pub fn n_constraints(&self) -> usize {
        self.model.num_cons()
    }

    pub fn n_timestep_vars(&self) -> usize {
        self.model.n_timestep_vars()
    }

    pub fn n_dynamics_blocks(&self) -> usize {
        self.model.n_dynamics_blocks()
    }

    pub fn objective_geometry(&self) -> &Objective {
        &self.objective
    }

    pub fn is_stage_constrained(&self, k: usize) -> bool {
        self.model.is_stage_constrained(k)
    }

    /// Stage values -> scaled decision vector.
    fn pack(&self, sol: &NlpSolution) -> Vec<f64> {
        let n = self.model.n_stages;
        let mut x = vec![0.0; self.model.num_vars()];
        for k in 0..n {
            let w = &sol.omega_local[k];
            self.model.set_raw(&mut x, k, B, w.py);
            self.model.set_raw(&mut x, k, VT, w.vx);
            self.model.set_raw(&mut x, k, VN, w.vy);
            let g = &sol.gamma_local[k];
            self.model.set_raw(&mut x, k, GX, g.px);
            self.model.set_raw(&mut x, k, GY, g.py);
            self.model.set_raw(&mut x, k, GU, g.vx);
            self.model.set_raw(&mut x, k, GV, g.vy);
            self.model.set_raw(&mut x, k, UX, sol.u[k].0);
            self.model.set_raw(&mut x, k, UY, sol.u[k].1);
            self.model.set_raw(&mut x, k, VXI, sol.v[k].0);
            self.model.set_raw(&mut x, k, VYI, sol.v[k].1);
            self.model.set_raw(&mut x, k, TAU, sol.dt[k]);
            // slacks carry the global velocity components
            let alpha = self.objective.points()[k].alpha;
            let (ca, sa) = (alpha.cos(), alpha.sin());
            self.model
                .set_raw(&mut x, k, SX, w.vx * ca - w.vy * sa);
            self.model
                .set_raw(&mut x, k, SY, w.vx * sa + w.vy * ca);
        }
        x
    }

    /// Scaled decision vector -> stage values.
    fn unpack(
        &self,
        x: &[f64],
        status: SolveStatus,
        iterations: usize,
        violation: f64,
        multipliers: Option<Multipliers>,
    ) -> NlpSolution {
        let n = self.model.n_stages;
        let m = &self.model;
        let mut omega = Vec::with_capacity(n);
        let mut gamma = Vec::with_capacity(n);
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        let mut dt = Vec::with_capacity(n);
        for k in 0..n {
            omega.push(StateMatrix::new(
                0.0,
                m.raw(x, k, B),
                m.raw(x, k, VT),
                m.raw(x, k, VN),
            ));
            gamma.push(StateMatrix::new(
                m.raw(x, k, GX),
                m.raw(x, k, GY),
                m.raw(x, k, GU),
                m.raw(x, k, GV),
            ));
            u.push((m.raw(x, k, UX), m.raw(x, k, UY)));
            v.push((m.raw(x, k, VXI), m.raw(x, k, VYI)));
            dt.push(m.raw(x, k, TAU));
        }
        NlpSolution {
            omega_local: omega,
            gamma_local: gamma,
            u,
            v,
            dt,
            status,
            objective_value: m.objective_raw(x),
            max_constraint_violation: violation,
            iterations,
            multipliers,
        }
    }

    /// Output states in global coordinates.
    pub fn omega_global(&self, sol: &NlpSolution) -> Vec<StateMatrix> {
        sol.omega_local
            .iter()
            .zip(self.objective.points())
            .map(|(s, p)| to_global(s, &frame_of(p)))
            .collect()
    }

    /// Reference states in global coordinates.
    pub fn gamma_global(&self, sol: &NlpSolution) -> Vec<StateMatrix> {
        sol.gamma_local
            .iter()
            .zip(self.objective.points())
            .map(|(s, p)| to_global(s, &frame_of(p)))
            .collect()
    }
}

/// Builds the warm-startable initial point: both chains exactly on the
/// contour, constant stage duration from the guess speed, velocities
/// tapered linearly to zero over the first and last `relax_count` points,
/// and inputs from inverse dynamics of the velocity differences.
pub fn initial_guess(
    objective: &Objective,
    bounds: &BoundSet,
    config: &SolverConfig,
) -> NlpSolution {
    let n = objective.len();
    let pts = objective.points();
    let speed = config.initial_speed_guess;
    let dt_each = (objective.delta_s() / speed).clamp(config.dt_min, config.dt_max);
    let ramp = bounds.relax_count.max(1) as f64;

    let mut omega = Vec::with_capacity(n);
    let mut gamma = Vec::with_capacity(n);
    let mut vel_global = Vec::with_capacity(n);
    for (k, p) in pts.iter().enumerate() {
        let factor = 1.0f64
            .min(k as f64 / ramp)
            .min((n - 1 - k) as f64 / ramp);
        let vt = speed * factor;
        let s = StateMatrix::new(0.0, 0.0, vt, 0.0);
        omega.push(s);
        gamma.push(s);
        vel_global.push((vt * p.alpha.cos(), vt * p.alpha.sin()));
    }
    let mut u = Vec::with_capacity(n);
    for k in 0..n {
        if k + 1 < n {
            let du = (
                (vel_global[k + 1].0 - vel_global[k].0) / dt_each,
                (vel_global[k + 1].1 - vel_global[k].1) / dt_each,
            );
            u.push(du);
        } else {
            u.push((0.0, 0.0));
        }
    }
    NlpSolution {
        omega_local: omega,
        gamma_local: gamma,
        v: u.clone(),
        u,
        dt: vec![dt_each; n],
        status: SolveStatus::IterationLimit,
        objective_value: f64::NAN,
        max_constraint_violation: f64::NAN,
        iterations: 0,
        multipliers: None,
    }
}

/// Solves the problem from a guess. Deterministic for identical inputs.
pub fn solve(
    problem: &NlpProblem,
    guess: &NlpSolution,
    config: &SolverConfig,
) -> Result<NlpSolution> {
    if guess.n_points() != problem.n_points() {
        return Err(Error::InvalidInput(format!(
            "guess has {} points, problem has {}",
            guess.n_points(),
            problem.n_points()
        )));
    }
    let x0 = problem.pack(guess);
    let warm = guess.multipliers.as_ref();
    let opts = IpmOptions {
        tol_feas: config.feasibility_tol,
        tol_stat: config.optimality_tol,
        tol_comp: config.optimality_tol,
        max_iter: config.max_iterations,
        mu_init: if warm.is_some() { 1e-3 } else { 0.1 },
        verbose: log::log_enabled!(log::Level::Debug),
    };
    let result = ipm::solve(
        &problem.model,
        &x0,
        warm.map(|m| m.lam.as_slice()),
        &opts,
    );
    let status = match result.status {
        IpmStatus::Converged => SolveStatus::Optimal,
        IpmStatus::MaxIterations => {
            if result.feasibility <= config.feasibility_tol {
                SolveStatus::FeasibleSuboptimal
            } else {
                SolveStatus::IterationLimit
            }
        }
        IpmStatus::Stalled => {
            if result.feasibility <= config.feasibility_tol {
                SolveStatus::FeasibleSuboptimal
            } else {
                SolveStatus::Infeasible
            }
        }
    };
    let multipliers = Multipliers {
        lam: result.lam,
        zl: result.zl,
        zu: result.zu,
    };
    Ok(problem.unpack(
        &result.x,
        status,
        result.iterations,
        result.feasibility,
        Some(multipliers),
    ))
}

/// Max-norm KKT residuals at a point, using its stored multipliers (zeros
/// when the point carries none, e.g. an initial guess).
pub fn kkt_residuals(problem: &NlpProblem, point: &NlpSolution) -> KktResiduals {
    let m = &problem.model;
    let x = problem.pack(point);
    let n = m.num_vars();
    let nc = m.num_cons();
    let zeros = Multipliers {
        lam: vec![0.0; nc],
        zl: vec![0.0; n],
        zu: vec![0.0; n],
    };
    let mult = point.multipliers.as_ref().unwrap_or(&zeros);

    let mut grad = vec![0.0; n];
    m.gradient(&x, &mut grad);
    let (jr, jc) = m.jac_structure();
    let mut jv = vec![0.0; jr.len()];
    m.jac_values(&x, &mut jv);
    for (t, (&r, &c)) in jr.iter().zip(jc).enumerate() {
        grad[c] += mult.lam[r] * jv[t];
    }
    let (xl, xu) = m.bounds();
    let mut stationarity = 0.0f64;
    let mut complementarity = 0.0f64;
    let mut bound_violation = 0.0f64;
    for i in 0..n {
        let mut g = grad[i];
        if xl[i] > -ipm::UNBOUNDED * 0.9 {
            g -= mult.zl[i];
            complementarity = complementarity.max(((x[i] - xl[i]) * mult.zl[i]).abs());
            bound_violation = bound_violation.max(xl[i] - x[i]);
        }
        if xu[i] < ipm::UNBOUNDED * 0.9 {
            g += mult.zu[i];
            complementarity = complementarity.max(((xu[i] - x[i]) * mult.zu[i]).abs());
            bound_violation = bound_violation.max(x[i] - xu[i]);
        }
        stationarity = stationarity.max(g.abs());
    }
    let mut c = vec![0.0; nc];
    m.constraints(&x, &mut c);
    let feasibility = c
        .iter()
        .fold(bound_violation.max(0.0), |a, v| a.max(v.abs()));
    KktResiduals {
        stationarity,
        feasibility,
        complementarity,
    }
}

const SOLUTION_MAGIC: &str = "contourtime-solution v1";

fn write_array(out: &mut String, name: &str, values: impl Iterator<Item = f64>) {
    let _ = write!(out, "{name} =");
    for v in values {
        let _ = write!(out, " {}", csvio::fmt17(v));
    }
    out.push('\n');
}

/// Serializes a solution (including multipliers) as versioned key-value
/// text with fixed formatting, so identical runs produce identical bytes.
pub fn solution_to_string(solution: &NlpSolution, config_hash: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SOLUTION_MAGIC}");
    let _ = writeln!(out, "status = {}", solution.status.as_str());
    let _ = writeln!(out, "n_points = {}", solution.n_points());
    let _ = writeln!(out, "iterations = {}", solution.iterations);
    let _ = writeln!(out, "objective = {}", csvio::fmt17(solution.objective_value));
    let _ = writeln!(
        out,
        "max_constraint_violation = {}",
        csvio::fmt17(solution.max_constraint_violation)
    );
    let _ = writeln!(
        out,
        "traversal_time = {}",
        csvio::fmt17(solution.traversal_time())
    );
    let _ = writeln!(out, "config_hash = {config_hash}");
    write_array(&mut out, "dt", solution.dt.iter().copied());
    write_array(&mut out, "y_omega", solution.omega_local.iter().map(|s| s.py));
    write_array(
        &mut out,
        "xdot_omega",
        solution.omega_local.iter().map(|s| s.vx),
    );
    write_array(
        &mut out,
        "ydot_omega",
        solution.omega_local.iter().map(|s| s.vy),
    );
    write_array(&mut out, "x_gamma", solution.gamma_local.iter().map(|s| s.px));
    write_array(&mut out, "y_gamma", solution.gamma_local.iter().map(|s| s.py));
    write_array(
        &mut out,
        "xdot_gamma",
        solution.gamma_local.iter().map(|s| s.vx),
    );
    write_array(
        &mut out,
        "ydot_gamma",
        solution.gamma_local.iter().map(|s| s.vy),
    );
    write_array(&mut out, "u_x", solution.u.iter().map(|p| p.0));
    write_array(&mut out, "u_y", solution.u.iter().map(|p| p.1));
    write_array(&mut out, "v_x", solution.v.iter().map(|p| p.0));
    write_array(&mut out, "v_y", solution.v.iter().map(|p| p.1));
    if let Some(mult) = &solution.multipliers {
        // multipliers are reported in internal scaled units
        write_array(&mut out, "lambda", mult.lam.iter().copied());
        write_array(&mut out, "z_lower", mult.zl.iter().copied());
        write_array(&mut out, "z_upper", mult.zu.iter().copied());
    }
    out
}

pub fn write_solution(path: &Path, solution: &NlpSolution, config_hash: &str) -> Result<()> {
    std::fs::write(path, solution_to_string(solution, config_hash))?;
    Ok(())
}

/// Reads a solution file written by [`write_solution`].
pub fn read_solution(path: &Path) -> Result<NlpSolution> {
    let text = std::fs::read_to_string(path)?;
    let name = path.display().to_string();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == SOLUTION_MAGIC => {}
        _ => {
            return Err(Error::Parse {
                path: name,
                line: 1,
                msg: format!("expected `{SOLUTION_MAGIC}` header"),
            })
        }
    }
    let mut scalars = std::collections::BTreeMap::new();
    let mut arrays: std::collections::BTreeMap<String, Vec<f64>> = std::collections::BTreeMap::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: name.clone(),
            line: idx + 1,
            msg: "expected `key = value`".into(),
        })?;
        let key = key.trim().to_string();
        let value = value.trim();
        let fields: Vec<&str> = value.split_whitespace().collect();
        let parse_all: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        match parse_all {
            Ok(vals) if !vals.is_empty() => {
                arrays.insert(key, vals);
            }
            _ => {
                scalars.insert(key, value.to_string());
            }
        }
    }
    let take = |k: &str| -> Result<Vec<f64>> {
        arrays.get(k).cloned().ok_or_else(|| Error::Parse {
            path: name.clone(),
            line: 0,
            msg: format!("missing array `{k}`"),
        })
    };
    let dt = take("dt")?;
    let n = dt.len();
    let grab4 = |a: &str, b: &str, c: &str, d: &str| -> Result<Vec<StateMatrix>> {
        let (pa, pb, pc, pd) = (take(a)?, take(b)?, take(c)?, take(d)?);
        if pa.len() != n || pb.len() != n || pc.len() != n || pd.len() != n {
            return Err(Error::Parse {
                path: name.clone(),
                line: 0,
                msg: "array length mismatch".into(),
            });
        }
        Ok((0..n)
            .map(|k| StateMatrix::new(pa[k], pb[k], pc[k], pd[k]))
            .collect())
    };
    let zeros = vec![0.0; n];
    let y_omega = take("y_omega")?;
    let omega: Vec<StateMatrix> = {
        let vx = take("xdot_omega")?;
        let vy = take("ydot_omega")?;
        (0..n)
            .map(|k| StateMatrix::new(zeros[k], y_omega[k], vx[k], vy[k]))
            .collect()
    };
    let gamma = grab4("x_gamma", "y_gamma", "xdot_gamma", "ydot_gamma")?;
    let ux = take("u_x")?;
    let uy = take("u_y")?;
    let vx = take("v_x")?;
    let vy = take("v_y")?;
    let status = scalars
        .get("status")
        .and_then(|s| SolveStatus::from_str(s))
        .ok_or_else(|| Error::Parse {
            path: name.clone(),
            line: 0,
            msg: "missing or invalid status".into(),
        })?;
    let scalar_f = |k: &str| -> f64 {
        scalars
            .get(k)
            .and_then(|s| s.parse().ok())
            .or_else(|| arrays.get(k).and_then(|a| a.first().copied()))
            .unwrap_or(f64::NAN)
    };
    let multipliers = match (arrays.get("lambda"), arrays.get("z_lower"), arrays.get("z_upper")) {
        (Some(l), Some(zl), Some(zu)) => Some(Multipliers {
            lam: l.clone(),
            zl: zl.clone(),
            zu: zu.clone(),
        }),
        _ => None,
    };
    Ok(NlpSolution {
        omega_local: omega,
        gamma_local: gamma,
        u: ux.into_iter().zip(uy).collect(),
        v: vx.into_iter().zip(vy).collect(),
        dt,
        status,
        objective_value: scalar_f("objective"),
        max_constraint_violation: scalar_f("max_constraint_violation"),
        iterations: scalar_f("iterations") as usize,
        multipliers,
    })
}

/// Internal variable scales, exposed so callers can convert the scaled
/// feasibility tolerance back to physical units.
pub use model::{SCALE_ACC, SCALE_POS, SCALE_TIME, SCALE_VEL};
