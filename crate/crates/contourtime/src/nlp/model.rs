//! Assembly of the contouring NLP in solver form.
//!
//! Decision variables live per contour stage: the output state in local
//! coordinates (its tangential position is eliminated, pinned to zero),
//! the reference state in local coordinates, the physical and virtual
//! acceleration inputs in global axes, the stage duration, and two slack
//! variables carrying the global velocity bounds. All inequalities are
//! variable bounds after that rewrite, and every constraint couples at
//! most two neighboring stages, which keeps the KKT system banded.
//!
//! Variables are diagonally rescaled so that a 10 um deviation, a 2 m/s^2
//! input and a 10 ms step are all order one; constraint rows are scaled
//! the same way. Objective weights apply to unscaled SI quantities.

use super::ipm::{NlpModel, UNBOUNDED};
use super::{BoundSet, SolverConfig, Weights};
use crate::contour::Objective;
use crate::error::{Error, Result};
use crate::plant::ControllerGains;

pub(crate) const B: usize = 0; // local normal deviation of the output, m
pub(crate) const VT: usize = 1; // local tangential output velocity, m/s
pub(crate) const VN: usize = 2; // local normal output velocity, m/s
pub(crate) const GX: usize = 3; // local reference position x, m
pub(crate) const GY: usize = 4; // local reference position y, m
pub(crate) const GU: usize = 5; // local reference velocity x, m/s
pub(crate) const GV: usize = 6; // local reference velocity y, m/s
pub(crate) const UX: usize = 7; // input x, global axes, m/s^2
pub(crate) const UY: usize = 8; // input y, m/s^2
pub(crate) const VXI: usize = 9; // virtual input x, m/s^2
pub(crate) const VYI: usize = 10; // virtual input y, m/s^2
pub(crate) const TAU: usize = 11; // stage duration, s
pub(crate) const SX: usize = 12; // slack: global output velocity x, m/s
pub(crate) const SY: usize = 13; // slack: global output velocity y, m/s
pub(crate) const NUM_ROLES: usize = 14;

/// Internal scaling: positions in 10 um units, accelerations halved,
/// time in 10 ms units, velocities as-is.
pub const SCALE_POS: f64 = 1e5;
pub const SCALE_VEL: f64 = 1.0;
pub const SCALE_ACC: f64 = 0.5;
pub const SCALE_TIME: f64 = 1e2;

pub(crate) fn role_scale(role: usize) -> f64 {
    match role {
        B | GX | GY => SCALE_POS,
        VT | VN | GU | GV | SX | SY => SCALE_VEL,
        UX | UY | VXI | VYI => SCALE_ACC,
        TAU => SCALE_TIME,
        _ => unreachable!(),
    }
}

pub(crate) struct ContourModel {
    pub n_stages: usize,
    pub relax: usize,
    cx: Vec<f64>,
    cy: Vec<f64>,
    ca: Vec<f64>,
    sa: Vec<f64>,
    gains: ControllerGains,
    weights: Weights,
    /// var_of[k][role] >= 0 is the flat variable index; -1 means the slot
    /// is pinned (or an absent slack) with value fixed[k][role].
    var_of: Vec<[i32; NUM_ROLES]>,
    fixed: Vec<[f64; NUM_ROLES]>,
    pub var_scale: Vec<f64>,
    pub var_stage_role: Vec<(usize, usize)>,
    xl: Vec<f64>,
    xu: Vec<f64>,
    pub row_scale: Vec<f64>,
    n_vars: usize,
    n_cons: usize,
    jac_rows: Vec<usize>,
    jac_cols: Vec<usize>,
    hess_rows: Vec<usize>,
    hess_cols: Vec<usize>,
}

impl ContourModel {
    pub fn new(
        objective: &Objective,
        gains: &ControllerGains,
        weights: &Weights,
        bounds: &BoundSet,
        config: &SolverConfig,
    ) -> Result<Self> {
        let n = objective.len();
        if n < 3 {
            return Err(Error::InvalidInput(format!(
                "objective needs at least 3 points, got {n}"
            )));
        }
        if bounds.relax_count >= n {
            return Err(Error::InvalidInput(format!(
                "relax_count {} must be smaller than N = {n}",
                bounds.relax_count
            )));
        }
        let relax = bounds.relax_count;

        let mut model = Self {
            n_stages: n,
            relax,
            cx: objective.points().iter().map(|p| p.x).collect(),
            cy: objective.points().iter().map(|p| p.y).collect(),
            ca: objective.points().iter().map(|p| p.alpha.cos()).collect(),
            sa: objective.points().iter().map(|p| p.alpha.sin()).collect(),
            gains: *gains,
            weights: weights.clone(),
            var_of: vec![[-1; NUM_ROLES]; n],
            fixed: vec![[0.0; NUM_ROLES]; n],
            var_scale: Vec::new(),
            var_stage_role: Vec::new(),
            xl: Vec::new(),
            xu: Vec::new(),
            row_scale: Vec::new(),
            n_vars: 0,
            n_cons: 0,
            jac_rows: Vec::new(),
            jac_cols: Vec::new(),
            hess_rows: Vec::new(),
            hess_cols: Vec::new(),
        };

        // variable layout; pinned slots keep var_of = -1 and value 0:
        // the output starts on the contour at rest and ends at rest, the
        // reference ends on the contour at rest so the playback file has a
        // sane terminal point, and the final virtual input has no role
        // anywhere.
        let last = n - 1;
        let pinned = |k: usize, role: usize| -> bool {
            (k == 0 && (role == B || role == VT || role == VN))
                || (k == last && (role == VT || role == VN))
                || (k == last && matches!(role, GX | GY | GU | GV))
                || (k == last && (role == VXI || role == VYI))
        };
        for k in 0..n {
            let constrained = k >= relax;
            for role in 0..NUM_ROLES {
                if (role == SX || role == SY) && !constrained {
                    continue; // slack only exists where the bound applies
                }
                if pinned(k, role) {
                    continue;
                }
                let idx = model.var_scale.len();
                model.var_of[k][role] = idx as i32;
                model.var_scale.push(role_scale(role));
                model.var_stage_role.push((k, role));
                let (lo, hi) = match role {
                    B if constrained => (-bounds.tol, bounds.tol),
                    UX | UY => (-bounds.u_max, bounds.u_max),
                    SX | SY => (-bounds.vel_max, bounds.vel_max),
                    TAU => (config.dt_min, config.dt_max),
                    _ => (-f64::INFINITY, f64::INFINITY),
                };
                let s = role_scale(role);
                model.xl.push(if lo.is_finite() { lo * s } else { -UNBOUNDED });
                model.xu.push(if hi.is_finite() { hi * s } else { UNBOUNDED });
            }
        }
        model.n_vars = model.var_scale.len();

        // constraint rows, stage major; scales follow the residual units
        for k in 0..n {
            if k >= relax {
                model.row_scale.push(SCALE_VEL); // slack link x
                model.row_scale.push(SCALE_VEL); // slack link y
            }
            if k + 1 < n {
                for scale in [
                    SCALE_POS, SCALE_POS, SCALE_VEL, SCALE_VEL, // output chain
                    SCALE_POS, SCALE_POS, SCALE_VEL, SCALE_VEL, // reference chain
                    SCALE_ACC, SCALE_ACC, // control law
                ] {
                    model.row_scale.push(scale);
                }
            }
        }
        model.n_cons = model.row_scale.len();

        // static sparsity from one structure walk
        let probe = vec![1.0; model.n_vars];
        let lam_probe = vec![1.0; model.n_cons];
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        model.walk_jacobian(&probe, &mut |r, c, _| {
            rows.push(r);
            cols.push(c);
        });
        model.jac_rows = rows;
        model.jac_cols = cols;
        let mut hrows = Vec::new();
        let mut hcols = Vec::new();
        model.walk_hessian(&probe, &lam_probe, 1.0, &mut |r, c, _| {
            hrows.push(r);
            hcols.push(c);
        });
        model.hess_rows = hrows;
        model.hess_cols = hcols;
        Ok(model)
    }

    pub fn n_timestep_vars(&self) -> usize {
        self.n_stages
    }

    pub fn n_dynamics_blocks(&self) -> usize {
        self.n_stages - 1
    }

    pub fn is_stage_constrained(&self, k: usize) -> bool {
        k >= self.relax
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn var_index(&self, k: usize, role: usize) -> Option<usize> {
        let idx = self.var_of[k][role];
        (idx >= 0).then_some(idx as usize)
    }

    /// Raw (SI) value of a slot, from the scaled vector or the pin.
    #[inline]
    pub fn raw(&self, x: &[f64], k: usize, role: usize) -> f64 {
        let idx = self.var_of[k][role];
        if idx >= 0 {
            x[idx as usize] / self.var_scale[idx as usize]
        } else {
            self.fixed[k][role]
        }
    }

    /// Writes a raw slot value into the scaled vector; pinned slots are
    /// ignored.
    pub fn set_raw(&self, x: &mut [f64], k: usize, role: usize, value: f64) {
        let idx = self.var_of[k][role];
        if idx >= 0 {
            x[idx as usize] = value * self.var_scale[idx as usize];
        }
    }

    fn stage_trig(&self, k: usize) -> (f64, f64, f64, f64) {
        let (ca, sa) = (self.ca[k], self.sa[k]);
        let (ca1, sa1) = (self.ca[k + 1], self.sa[k + 1]);
        (ca, sa, ca1, sa1)
    }

    /// Walks every constraint residual in row order.
    fn walk_constraints(&self, x: &[f64], out: &mut impl FnMut(f64)) {
        let n = self.n_stages;
        for k in 0..n {
            let vt = self.raw(x, k, VT);
            let vn = self.raw(x, k, VN);
            let (ca, sa) = (self.ca[k], self.sa[k]);
            if self.is_stage_constrained(k) {
                let sx = self.raw(x, k, SX);
                let sy = self.raw(x, k, SY);
                out((vt * ca - vn * sa - sx) * SCALE_VEL);
                out((vt * sa + vn * ca - sy) * SCALE_VEL);
            }
            if k + 1 == n {
                continue;
            }
            let (_, _, ca1, sa1) = self.stage_trig(k);
            let (tx, ty) = (self.cx[k], self.cy[k]);
            let (tx1, ty1) = (self.cx[k + 1], self.cy[k + 1]);
            let tau = self.raw(x, k, TAU);
            let half = 0.5 * tau * tau;

            // output chain
            let b = self.raw(x, k, B);
            let (ux, uy) = (self.raw(x, k, UX), self.raw(x, k, UY));
            let px = tx - b * sa;
            let py = ty + b * ca;
            let vx = vt * ca - vn * sa;
            let vy = vt * sa + vn * ca;
            let ppx = px + tau * vx + half * ux;
            let ppy = py + tau * vy + half * uy;
            let vpx = vx + tau * ux;
            let vpy = vy + tau * uy;
            let dx = ppx - tx1;
            let dy = ppy - ty1;
            out((-(dx * ca1 + dy * sa1)) * SCALE_POS);
            out((self.raw(x, k + 1, B) - (-dx * sa1 + dy * ca1)) * SCALE_POS);
            out((self.raw(x, k + 1, VT) - (vpx * ca1 + vpy * sa1)) * SCALE_VEL);
            out((self.raw(x, k + 1, VN) - (-vpx * sa1 + vpy * ca1)) * SCALE_VEL);

            // reference chain
            let (gx, gy) = (self.raw(x, k, GX), self.raw(x, k, GY));
            let (gu, gv) = (self.raw(x, k, GU), self.raw(x, k, GV));
            let (wx, wy) = (self.raw(x, k, VXI), self.raw(x, k, VYI));
            let pgx = tx + gx * ca - gy * sa;
            let pgy = ty + gx * sa + gy * ca;
            let vgx = gu * ca - gv * sa;
            let vgy = gu * sa + gv * ca;
            let pgpx = pgx + tau * vgx + half * wx;
            let pgpy = pgy + tau * vgy + half * wy;
            let vgpx = vgx + tau * wx;
            let vgpy = vgy + tau * wy;
            let dgx = pgpx - tx1;
            let dgy = pgpy - ty1;
            out((self.raw(x, k + 1, GX) - (dgx * ca1 + dgy * sa1)) * SCALE_POS);
            out((self.raw(x, k + 1, GY) - (-dgx * sa1 + dgy * ca1)) * SCALE_POS);
            out((self.raw(x, k + 1, GU) - (vgpx * ca1 + vgpy * sa1)) * SCALE_VEL);
            out((self.raw(x, k + 1, GV) - (-vgpx * sa1 + vgpy * ca1)) * SCALE_VEL);

            // control law: next input from the current error, global axes
            let epx = gx * ca - (gy - b) * sa;
            let epy = gx * sa + (gy - b) * ca;
            let evx = (gu - vt) * ca - (gv - vn) * sa;
            let evy = (gu - vt) * sa + (gv - vn) * ca;
            let g = &self.gains;
            out((self.raw(x, k + 1, UX) - g.kp_x * epx - g.kd_x * evx) * SCALE_ACC);
            out((self.raw(x, k + 1, UY) - g.kp_y * epy - g.kd_y * evy) * SCALE_ACC);
        }
    }

    /// Walks the Jacobian in a fixed order; `out` receives scaled entries.
    fn walk_jacobian(&self, x: &[f64], out: &mut impl FnMut(usize, usize, f64)) {
        let n = self.n_stages;
        let mut row = 0usize;
        let emit = |this: &Self, row: usize, k: usize, role: usize, d_raw: f64,
                    out: &mut dyn FnMut(usize, usize, f64)| {
            let idx = this.var_of[k][role];
            if idx >= 0 {
                let i = idx as usize;
                out(row, i, d_raw * this.row_scale[row] / this.var_scale[i]);
            }
        };
        for k in 0..n {
            let (ca, sa) = (self.ca[k], self.sa[k]);
            if self.is_stage_constrained(k) {
                emit(self, row, k, VT, ca, out);
                emit(self, row, k, VN, -sa, out);
                emit(self, row, k, SX, -1.0, out);
                row += 1;
                emit(self, row, k, VT, sa, out);
                emit(self, row, k, VN, ca, out);
                emit(self, row, k, SY, -1.0, out);
                row += 1;
            }
            if k + 1 == n {
                continue;
            }
            let (_, _, ca1, sa1) = self.stage_trig(k);
            let dca = ca * ca1 + sa * sa1; // cos(alpha1 - alpha)
            let dsa = sa1 * ca - ca1 * sa; // sin(alpha1 - alpha)
            let tau = self.raw(x, k, TAU);
            let half = 0.5 * tau * tau;
            let vt = self.raw(x, k, VT);
            let vn = self.raw(x, k, VN);
            let (ux, uy) = (self.raw(x, k, UX), self.raw(x, k, UY));
            let vx = vt * ca - vn * sa;
            let vy = vt * sa + vn * ca;

            // w1: tangential closure
            emit(self, row, k, B, -dsa, out);
            emit(self, row, k, VT, -tau * dca, out);
            emit(self, row, k, VN, -tau * dsa, out);
            emit(self, row, k, UX, -half * ca1, out);
            emit(self, row, k, UY, -half * sa1, out);
            emit(self, row, k, TAU, -((vx + tau * ux) * ca1 + (vy + tau * uy) * sa1), out);
            row += 1;
            // w2: normal deviation propagation
            emit(self, row, k, B, -dca, out);
            emit(self, row, k, VT, tau * dsa, out);
            emit(self, row, k, VN, -tau * dca, out);
            emit(self, row, k, UX, half * sa1, out);
            emit(self, row, k, UY, -half * ca1, out);
            emit(self, row, k, TAU, (vx + tau * ux) * sa1 - (vy + tau * uy) * ca1, out);
            emit(self, row, k + 1, B, 1.0, out);
            row += 1;
            // w3, w4: velocity propagation
            emit(self, row, k, VT, -dca, out);
            emit(self, row, k, VN, -dsa, out);
            emit(self, row, k, UX, -tau * ca1, out);
            emit(self, row, k, UY, -tau * sa1, out);
            emit(self, row, k, TAU, -(ux * ca1 + uy * sa1), out);
            emit(self, row, k + 1, VT, 1.0, out);
            row += 1;
            emit(self, row, k, VT, dsa, out);
            emit(self, row, k, VN, -dca, out);
            emit(self, row, k, UX, tau * sa1, out);
            emit(self, row, k, UY, -tau * ca1, out);
            emit(self, row, k, TAU, ux * sa1 - uy * ca1, out);
            emit(self, row, k + 1, VN, 1.0, out);
            row += 1;

            // reference chain
            let (gu, gv) = (self.raw(x, k, GU), self.raw(x, k, GV));
            let (wx, wy) = (self.raw(x, k, VXI), self.raw(x, k, VYI));
            let vgx = gu * ca - gv * sa;
            let vgy = gu * sa + gv * ca;
            emit(self, row, k, GX, -dca, out);
            emit(self, row, k, GY, -dsa, out);
            emit(self, row, k, GU, -tau * dca, out);
            emit(self, row, k, GV, -tau * dsa, out);
            emit(self, row, k, VXI, -half * ca1, out);
            emit(self, row, k, VYI, -half * sa1, out);
            emit(self, row, k, TAU, -((vgx + tau * wx) * ca1 + (vgy + tau * wy) * sa1), out);
            emit(self, row, k + 1, GX, 1.0, out);
            row += 1;
            emit(self, row, k, GX, dsa, out);
            emit(self, row, k, GY, -dca, out);
            emit(self, row, k, GU, tau * dsa, out);
            emit(self, row, k, GV, -tau * dca, out);
            emit(self, row, k, VXI, half * sa1, out);
            emit(self, row, k, VYI, -half * ca1, out);
            emit(self, row, k, TAU, (vgx + tau * wx) * sa1 - (vgy + tau * wy) * ca1, out);
            emit(self, row, k + 1, GY, 1.0, out);
            row += 1;
            emit(self, row, k, GU, -dca, out);
            emit(self, row, k, GV, -dsa, out);
            emit(self, row, k, VXI, -tau * ca1, out);
            emit(self, row, k, VYI, -tau * sa1, out);
            emit(self, row, k, TAU, -(wx * ca1 + wy * sa1), out);
            emit(self, row, k + 1, GU, 1.0, out);
            row += 1;
            emit(self, row, k, GU, dsa, out);
            emit(self, row, k, GV, -dca, out);
            emit(self, row, k, VXI, tau * sa1, out);
            emit(self, row, k, VYI, -tau * ca1, out);
            emit(self, row, k, TAU, wx * sa1 - wy * ca1, out);
            emit(self, row, k + 1, GV, 1.0, out);
            row += 1;

            // control law rows
            let g = &self.gains;
            emit(self, row, k, B, -g.kp_x * sa, out);
            emit(self, row, k, GX, -g.kp_x * ca, out);
            emit(self, row, k, GY, g.kp_x * sa, out);
            emit(self, row, k, VT, g.kd_x * ca, out);
            emit(self, row, k, VN, -g.kd_x * sa, out);
            emit(self, row, k, GU, -g.kd_x * ca, out);
            emit(self, row, k, GV, g.kd_x * sa, out);
            emit(self, row, k + 1, UX, 1.0, out);
            row += 1;
            emit(self, row, k, B, g.kp_y * ca, out);
            emit(self, row, k, GX, -g.kp_y * sa, out);
            emit(self, row, k, GY, -g.kp_y * ca, out);
            emit(self, row, k, VT, g.kd_y * sa, out);
            emit(self, row, k, VN, g.kd_y * ca, out);
            emit(self, row, k, GU, -g.kd_y * sa, out);
            emit(self, row, k, GV, -g.kd_y * ca, out);
            emit(self, row, k + 1, UY, 1.0, out);
            row += 1;
        }
        debug_assert_eq!(row, self.n_cons);
    }

    /// Walks the lower-triangular Lagrangian Hessian.
    ///
    /// Only the dynamics rows carry curvature: products of the stage
    /// duration with velocities, and its square with inputs.
    fn walk_hessian(
        &self,
        x: &[f64],
        lam: &[f64],
        obj_w: f64,
        out: &mut impl FnMut(usize, usize, f64),
    ) {
        let n = self.n_stages;
        let w = &self.weights;
        let pair = |this: &Self,
                    ka: usize,
                    ra: usize,
                    kb: usize,
                    rb: usize,
                    raw: f64,
                    out: &mut dyn FnMut(usize, usize, f64)| {
            let (ia, ib) = (this.var_of[ka][ra], this.var_of[kb][rb]);
            if ia >= 0 && ib >= 0 {
                let (mut i, mut j) = (ia as usize, ib as usize);
                let v = raw / (this.var_scale[i] * this.var_scale[j]);
                if i < j {
                    std::mem::swap(&mut i, &mut j);
                }
                out(i, j, v);
            }
        };

        let mut row = 0usize;
        for k in 0..n {
            // objective curvature (diagonal plus input cross terms)
            pair(self, k, B, k, B, 2.0 * obj_w * w.q_omega[0], out);
            pair(self, k, VT, k, VT, 2.0 * obj_w * w.q_omega[1], out);
            pair(self, k, VN, k, VN, 2.0 * obj_w * w.q_omega[1], out);
            if k + 1 < n {
                pair(self, k, GX, k, GX, 2.0 * obj_w * w.q_gamma[0], out);
                pair(self, k, GY, k, GY, 2.0 * obj_w * w.q_gamma[0], out);
                pair(self, k, GU, k, GU, 2.0 * obj_w * w.q_gamma[1], out);
                pair(self, k, GV, k, GV, 2.0 * obj_w * w.q_gamma[1], out);
                pair(self, k, UX, k, UX, 2.0 * obj_w * w.r_u[0][0], out);
                pair(self, k, UY, k, UY, 2.0 * obj_w * w.r_u[1][1], out);
                pair(self, k, UY, k, UX, 2.0 * obj_w * w.r_u[0][1], out);
                pair(self, k, VXI, k, VXI, 2.0 * obj_w * w.r_v[0][0], out);
                pair(self, k, VYI, k, VYI, 2.0 * obj_w * w.r_v[1][1], out);
                pair(self, k, VYI, k, VXI, 2.0 * obj_w * w.r_v[0][1], out);
            }

            // constraint curvature, weighted by the scaled multipliers
            if self.is_stage_constrained(k) {
                row += 2; // slack links are linear
            }
            if k + 1 == n {
                continue;
            }
            let (ca, sa, ca1, sa1) = self.stage_trig(k);
            let dca = ca * ca1 + sa * sa1;
            let dsa = sa1 * ca - ca1 * sa;
            let tau = self.raw(x, k, TAU);
            let (ux, uy) = (self.raw(x, k, UX), self.raw(x, k, UY));
            let (wx, wy) = (self.raw(x, k, VXI), self.raw(x, k, VYI));
            let lw: Vec<f64> = (0..10)
                .map(|i| lam[row + i] * self.row_scale[row + i])
                .collect();
            let (l1, l2, l3, l4) = (lw[0], lw[1], lw[2], lw[3]);
            let (m1, m2, m3, m4) = (lw[4], lw[5], lw[6], lw[7]);
            row += 10;

            // output chain second derivatives
            pair(self, k, TAU, k, VT, -l1 * dca + l2 * dsa, out);
            pair(self, k, TAU, k, VN, -l1 * dsa - l2 * dca, out);
            pair(
                self,
                k,
                TAU,
                k,
                UX,
                -l1 * tau * ca1 + l2 * tau * sa1 - l3 * ca1 + l4 * sa1,
                out,
            );
            pair(
                self,
                k,
                TAU,
                k,
                UY,
                -l1 * tau * sa1 - l2 * tau * ca1 - l3 * sa1 - l4 * ca1,
                out,
            );
            // reference chain second derivatives
            pair(self, k, TAU, k, GU, -m1 * dca + m2 * dsa, out);
            pair(self, k, TAU, k, GV, -m1 * dsa - m2 * dca, out);
            pair(
                self,
                k,
                TAU,
                k,
                VXI,
                -m1 * tau * ca1 + m2 * tau * sa1 - m3 * ca1 + m4 * sa1,
                out,
            );
            pair(
                self,
                k,
                TAU,
                k,
                VYI,
                -m1 * tau * sa1 - m2 * tau * ca1 - m3 * sa1 - m4 * ca1,
                out,
            );
            // d2/dtau2 from both chains
            let d2tau = l1 * (-(ux * ca1 + uy * sa1))
                + l2 * (ux * sa1 - uy * ca1)
                + m1 * (-(wx * ca1 + wy * sa1))
                + m2 * (wx * sa1 - wy * ca1);
            pair(self, k, TAU, k, TAU, d2tau, out);
        }
        debug_assert_eq!(row, self.n_cons);
    }

    /// Raw-unit objective value; the reported objective is this number.
    pub fn objective_raw(&self, x: &[f64]) -> f64 {
        let n = self.n_stages;
        let w = &self.weights;
        let mut j = 0.0;
        for k in 0..n {
            j += w.time_weight * self.raw(x, k, TAU);
            let b = self.raw(x, k, B);
            let vt = self.raw(x, k, VT);
            let vn = self.raw(x, k, VN);
            j += w.q_omega[0] * b * b + w.q_omega[1] * (vt * vt + vn * vn);
            if k + 1 < n {
                let (gx, gy) = (self.raw(x, k, GX), self.raw(x, k, GY));
                let (gu, gv) = (self.raw(x, k, GU), self.raw(x, k, GV));
                j += w.q_gamma[0] * (gx * gx + gy * gy) + w.q_gamma[1] * (gu * gu + gv * gv);
                let (ux, uy) = (self.raw(x, k, UX), self.raw(x, k, UY));
                j += w.r_u[0][0] * ux * ux + 2.0 * w.r_u[0][1] * ux * uy + w.r_u[1][1] * uy * uy;
                let (wx, wy) = (self.raw(x, k, VXI), self.raw(x, k, VYI));
                j += w.r_v[0][0] * wx * wx + 2.0 * w.r_v[0][1] * wx * wy + w.r_v[1][1] * wy * wy;
            }
        }
        j
    }
}

impl NlpModel for ContourModel {
    fn num_vars(&self) -> usize {
        self.n_vars
    }

    fn num_cons(&self) -> usize {
        self.n_cons
    }

    fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.xl, &self.xu)
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.objective_raw(x)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        grad.fill(0.0);
        let n = self.n_stages;
        let w = &self.weights;
        let mut add = |k: usize, role: usize, raw: f64| {
            let idx = self.var_of[k][role];
            if idx >= 0 {
                grad[idx as usize] += raw / self.var_scale[idx as usize];
            }
        };
        for k in 0..n {
            add(k, TAU, w.time_weight);
            add(k, B, 2.0 * w.q_omega[0] * self.raw(x, k, B));
            add(k, VT, 2.0 * w.q_omega[1] * self.raw(x, k, VT));
            add(k, VN, 2.0 * w.q_omega[1] * self.raw(x, k, VN));
            if k + 1 < n {
                add(k, GX, 2.0 * w.q_gamma[0] * self.raw(x, k, GX));
                add(k, GY, 2.0 * w.q_gamma[0] * self.raw(x, k, GY));
                add(k, GU, 2.0 * w.q_gamma[1] * self.raw(x, k, GU));
                add(k, GV, 2.0 * w.q_gamma[1] * self.raw(x, k, GV));
                let (ux, uy) = (self.raw(x, k, UX), self.raw(x, k, UY));
                add(k, UX, 2.0 * (w.r_u[0][0] * ux + w.r_u[0][1] * uy));
                add(k, UY, 2.0 * (w.r_u[1][1] * uy + w.r_u[0][1] * ux));
                let (wx, wy) = (self.raw(x, k, VXI), self.raw(x, k, VYI));
                add(k, VXI, 2.0 * (w.r_v[0][0] * wx + w.r_v[0][1] * wy));
                add(k, VYI, 2.0 * (w.r_v[1][1] * wy + w.r_v[0][1] * wx));
            }
        }
    }

    fn constraints(&self, x: &[f64], c: &mut [f64]) {
        let mut i = 0usize;
        self.walk_constraints(x, &mut |v| {
            c[i] = v;
            i += 1;
        });
        debug_assert_eq!(i, self.n_cons);
    }

    fn jac_structure(&self) -> (&[usize], &[usize]) {
        (&self.jac_rows, &self.jac_cols)
    }

    fn jac_values(&self, x: &[f64], vals: &mut [f64]) {
        let mut i = 0usize;
        self.walk_jacobian(x, &mut |_, _, v| {
            vals[i] = v;
            i += 1;
        });
        debug_assert_eq!(i, vals.len());
    }

    fn hess_structure(&self) -> (&[usize], &[usize]) {
        (&self.hess_rows, &self.hess_cols)
    }

    fn hess_values(&self, x: &[f64], lambda: &[f64], obj_weight: f64, vals: &mut [f64]) {
        let mut i = 0usize;
        self.walk_hessian(x, lambda, obj_weight, &mut |_, _, v| {
            vals[i] = v;
            i += 1;
        });
        debug_assert_eq!(i, vals.len());
    }
}
