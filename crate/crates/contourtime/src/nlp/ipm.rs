//! A primal-dual interior-point method for smooth equality-constrained
//! problems with variable bounds.
//!
//! The method follows the usual barrier scheme: a monotone decreasing
//! barrier parameter, a fraction-to-boundary rule, an l1 merit line search
//! with one second-order correction, and inertia-corrected unpivoted
//! banded LDL^T solves of the primal-dual system. All derivatives come
//! from the model in closed form; no finite differencing happens here.

use super::band::{ldlt, BandMatrix};

/// Problem interface in solver (already scaled) units.
///
/// Inequalities other than variable bounds are expected to be rewritten by
/// the model as slack equalities with bounded slacks.
pub trait NlpModel {
    fn num_vars(&self) -> usize;
    fn num_cons(&self) -> usize;
    /// Lower/upper variable bounds; entries beyond +-1e19 count as absent.
    fn bounds(&self) -> (&[f64], &[f64]);
    fn objective(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], grad: &mut [f64]);
    fn constraints(&self, x: &[f64], c: &mut [f64]);
    /// Static Jacobian sparsity as parallel (row, col) lists.
    fn jac_structure(&self) -> (&[usize], &[usize]);
    fn jac_values(&self, x: &[f64], vals: &mut [f64]);
    /// Static Lagrangian Hessian sparsity, lower triangle (row >= col).
    fn hess_structure(&self) -> (&[usize], &[usize]);
    /// Hessian of `obj_weight * f + lambda' c` at `x`.
    fn hess_values(&self, x: &[f64], lambda: &[f64], obj_weight: f64, vals: &mut [f64]);
}

pub const UNBOUNDED: f64 = 1e20;

#[derive(Debug, Clone)]
pub struct IpmOptions {
    pub tol_feas: f64,
    pub tol_stat: f64,
    pub tol_comp: f64,
    pub max_iter: usize,
    pub mu_init: f64,
    pub verbose: bool,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self {
            tol_feas: 1e-8,
            tol_stat: 1e-6,
            tol_comp: 1e-6,
            max_iter: 3000,
            mu_init: 0.1,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpmStatus {
    Converged,
    MaxIterations,
    /// Line search or regularization could make no further progress.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct IpmResult {
    pub x: Vec<f64>,
    pub lam: Vec<f64>,
    pub zl: Vec<f64>,
    pub zu: Vec<f64>,
    pub status: IpmStatus,
    pub iterations: usize,
    pub objective: f64,
    pub stationarity: f64,
    pub feasibility: f64,
    pub complementarity: f64,
    pub mu: f64,
}

const KAPPA_EPS: f64 = 10.0;
const KAPPA_MU: f64 = 0.2;
const THETA_MU: f64 = 1.5;
const TAU_MIN: f64 = 0.99;
const KAPPA_SIGMA: f64 = 1e10;
const ETA_ARMIJO: f64 = 1e-4;
const RHO_NU: f64 = 0.1;
const MAX_BACKTRACKS: usize = 30;

struct Work {
    grad: Vec<f64>,
    c: Vec<f64>,
    jac: Vec<f64>,
    hess: Vec<f64>,
    rhs: Vec<f64>,
    sol: Vec<f64>,
    resid: Vec<f64>,
    x_trial: Vec<f64>,
    c_trial: Vec<f64>,
}

/// KKT ordering: variables and constraint rows interleaved so that each
/// constraint sits next to the first variable it touches. For stage-chained
/// problems this produces a small bandwidth.
fn kkt_permutation(
    n: usize,
    m: usize,
    jac_rows: &[usize],
    jac_cols: &[usize],
) -> (Vec<usize>, Vec<usize>) {
    let mut anchor = vec![usize::MAX; m];
    for (&r, &c) in jac_rows.iter().zip(jac_cols) {
        anchor[r] = anchor[r].min(c);
    }
    // keys: variables (i, 0), constraints (anchor, 1); stable order by index
    let mut order: Vec<(usize, u8, usize)> = (0..n).map(|i| (i, 0u8, i)).collect();
    order.extend((0..m).map(|j| (anchor[j].min(n - 1), 1u8, j)));
    order.sort();
    let mut pv = vec![0usize; n];
    let mut pc = vec![0usize; m];
    for (pos, &(_, kind, idx)) in order.iter().enumerate() {
        if kind == 0 {
            pv[idx] = pos;
        } else {
            pc[idx] = pos;
        }
    }
    (pv, pc)
}

pub fn solve(
    model: &dyn NlpModel,
    x0: &[f64],
    lam0: Option<&[f64]>,
    opts: &IpmOptions,
) -> IpmResult {
    let n = model.num_vars();
    let m = model.num_cons();
    let (xl, xu) = model.bounds();
    let has_lb: Vec<bool> = xl.iter().map(|&v| v > -UNBOUNDED * 0.9).collect();
    let has_ub: Vec<bool> = xu.iter().map(|&v| v < UNBOUNDED * 0.9).collect();

    // push the start into the interior of the bounds
    let mut x = x0.to_vec();
    for i in 0..n {
        let (lb, ub) = (xl[i], xu[i]);
        if has_lb[i] && has_ub[i] {
            let width = ub - lb;
            let pl = (0.01 * lb.abs().max(1.0)).min(0.01 * width);
            let pu = (0.01 * ub.abs().max(1.0)).min(0.01 * width);
            x[i] = x[i].clamp(lb + pl, ub - pu);
        } else if has_lb[i] {
            x[i] = x[i].max(lb + 0.01 * lb.abs().max(1.0));
        } else if has_ub[i] {
            x[i] = x[i].min(ub - 0.01 * ub.abs().max(1.0));
        }
    }

    let mut mu = opts.mu_init;
    let mu_min = opts.tol_comp / 20.0;
    let mut tau = TAU_MIN.max(1.0 - mu);

    let mut zl = vec![0.0; n];
    let mut zu = vec![0.0; n];
    for i in 0..n {
        if has_lb[i] {
            zl[i] = (mu / (x[i] - xl[i])).clamp(1e-8, 1e8);
        }
        if has_ub[i] {
            zu[i] = (mu / (xu[i] - x[i])).clamp(1e-8, 1e8);
        }
    }
    let mut lam = match lam0 {
        Some(l) => l.to_vec(),
        None => vec![0.0; m],
    };

    let (jr, jc) = {
        let (r, c) = model.jac_structure();
        (r.to_vec(), c.to_vec())
    };
    let (hr, hc) = {
        let (r, c) = model.hess_structure();
        (r.to_vec(), c.to_vec())
    };
    let (pv, pc) = if m > 0 {
        kkt_permutation(n, m, &jr, &jc)
    } else {
        ((0..n).collect(), Vec::new())
    };
    let dim = n + m;
    let mut hb = 0usize;
    for (&r, &c) in jr.iter().zip(&jc) {
        hb = hb.max(pc[r].abs_diff(pv[c]));
    }
    for (&r, &c) in hr.iter().zip(&hc) {
        hb = hb.max(pv[r].abs_diff(pv[c]));
    }
    let mut kkt = BandMatrix::new(dim, hb);

    let mut w = Work {
        grad: vec![0.0; n],
        c: vec![0.0; m],
        jac: vec![0.0; jr.len()],
        hess: vec![0.0; hr.len()],
        rhs: vec![0.0; dim],
        sol: vec![0.0; dim],
        resid: vec![0.0; dim],
        x_trial: vec![0.0; n],
        c_trial: vec![0.0; m],
    };

    let mut delta_w_last = 0.0f64;
    let mut nu = 1.0f64; // merit penalty weight
    let mut consecutive_failures = 0usize;
    let mut status = IpmStatus::MaxIterations;
    let mut iter = 0usize;

    let barrier = |x: &[f64], f: f64, mu: f64| -> f64 {
        let mut phi = f;
        for i in 0..n {
            if has_lb[i] {
                let s = x[i] - xl[i];
                if s <= 0.0 {
                    return f64::INFINITY;
                }
                phi -= mu * s.ln();
            }
            if has_ub[i] {
                let s = xu[i] - x[i];
                if s <= 0.0 {
                    return f64::INFINITY;
                }
                phi -= mu * s.ln();
            }
        }
        phi
    };

    while iter < opts.max_iter {
        model.gradient(&x, &mut w.grad);
        model.constraints(&x, &mut w.c);
        model.jac_values(&x, &mut w.jac);

        // dual residual: grad + J' lam - zl + zu
        let mut rd: Vec<f64> = w.grad.clone();
        for (t, (&r, &c)) in jr.iter().zip(&jc).enumerate() {
            rd[c] += w.jac[t] * lam[r];
        }
        for i in 0..n {
            rd[i] += zu[i] - zl[i];
        }

        let err_stat = rd.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let err_feas = w.c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut err_comp0 = 0.0f64;
        let mut err_comp_mu = 0.0f64;
        for i in 0..n {
            if has_lb[i] {
                let p = (x[i] - xl[i]) * zl[i];
                err_comp0 = err_comp0.max(p.abs());
                err_comp_mu = err_comp_mu.max((p - mu).abs());
            }
            if has_ub[i] {
                let p = (xu[i] - x[i]) * zu[i];
                err_comp0 = err_comp0.max(p.abs());
                err_comp_mu = err_comp_mu.max((p - mu).abs());
            }
        }

        if opts.verbose {
            log::debug!(
                "ipm iter {iter}: mu={mu:.2e} stat={err_stat:.3e} feas={err_feas:.3e} comp={err_comp0:.3e}"
            );
        }

        if err_stat <= opts.tol_stat && err_feas <= opts.tol_feas && err_comp0 <= opts.tol_comp {
            status = IpmStatus::Converged;
            break;
        }

        // advance the barrier parameter when the inner problem is solved
        if mu > mu_min
            && err_stat <= KAPPA_EPS * mu
            && err_feas <= KAPPA_EPS * mu
            && err_comp_mu <= KAPPA_EPS * mu
        {
            mu = (KAPPA_MU * mu).min(mu.powf(THETA_MU)).max(mu_min);
            tau = TAU_MIN.max(1.0 - mu);
            continue;
        }

        model.hess_values(&x, &lam, 1.0, &mut w.hess);

        // barrier gradient and rhs
        let mut grad_phi = w.grad.clone();
        for i in 0..n {
            if has_lb[i] {
                grad_phi[i] -= mu / (x[i] - xl[i]);
            }
            if has_ub[i] {
                grad_phi[i] += mu / (xu[i] - x[i]);
            }
        }
        w.rhs.fill(0.0);
        for i in 0..n {
            w.rhs[pv[i]] = -grad_phi[i];
        }
        for (t, (&r, &c)) in jr.iter().zip(&jc).enumerate() {
            w.rhs[pv[c]] -= w.jac[t] * lam[r];
        }
        for j in 0..m {
            w.rhs[pc[j]] = -w.c[j];
        }

        // inertia-corrected factorization
        let mut delta_w = 0.0f64;
        let mut delta_c = 0.0f64;
        let mut first_try = true;
        let factor = loop {
            kkt.reset();
            for (t, (&r, &c)) in hr.iter().zip(&hc).enumerate() {
                kkt.add(pv[r], pv[c], w.hess[t]);
            }
            for (t, (&r, &c)) in jr.iter().zip(&jc).enumerate() {
                kkt.add(pc[r], pv[c], w.jac[t]);
            }
            for i in 0..n {
                let mut sig = delta_w;
                if has_lb[i] {
                    sig += zl[i] / (x[i] - xl[i]);
                }
                if has_ub[i] {
                    sig += zu[i] / (xu[i] - x[i]);
                }
                kkt.add(pv[i], pv[i], sig);
            }
            for j in 0..m {
                kkt.add(pc[j], pc[j], -delta_c);
            }
            let f = ldlt(&kkt, 1e-12);
            if f.inertia.positive == n && f.inertia.negative == m && f.inertia.zero == 0 {
                break Some(f);
            }
            if f.inertia.zero > 0 && delta_c == 0.0 {
                delta_c = 1e-8 * mu.powf(0.25);
            }
            if first_try {
                delta_w = if delta_w_last == 0.0 {
                    1e-4
                } else {
                    (delta_w_last / 3.0).max(1e-20)
                };
                first_try = false;
            } else {
                delta_w *= if delta_w_last == 0.0 { 100.0 } else { 8.0 };
            }
            if delta_w > 1e20 {
                break None;
            }
        };
        let factor = match factor {
            Some(f) => f,
            None => {
                status = IpmStatus::Stalled;
                break;
            }
        };
        if delta_w > 0.0 {
            delta_w_last = delta_w;
        }

        // solve with iterative refinement against the regularized matrix
        w.sol.copy_from_slice(&w.rhs);
        factor.solve_in_place(&mut w.sol);
        for _ in 0..2 {
            kkt.mul_vec(&w.sol, &mut w.resid);
            let mut worst = 0.0f64;
            for i in 0..dim {
                w.resid[i] = w.rhs[i] - w.resid[i];
                worst = worst.max(w.resid[i].abs());
            }
            let scale = w.rhs.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            if worst <= 1e-12 * scale {
                break;
            }
            factor.solve_in_place(&mut w.resid);
            for i in 0..dim {
                w.sol[i] += w.resid[i];
            }
        }

        let dx: Vec<f64> = (0..n).map(|i| w.sol[pv[i]]).collect();
        let dlam: Vec<f64> = (0..m).map(|j| w.sol[pc[j]]).collect();

        // bound multiplier steps
        let mut dzl = vec![0.0; n];
        let mut dzu = vec![0.0; n];
        for i in 0..n {
            if has_lb[i] {
                let s = x[i] - xl[i];
                dzl[i] = mu / s - zl[i] - zl[i] / s * dx[i];
            }
            if has_ub[i] {
                let s = xu[i] - x[i];
                dzu[i] = mu / s - zu[i] + zu[i] / s * dx[i];
            }
        }

        // fraction-to-boundary step limits
        let mut alpha_max = 1.0f64;
        for i in 0..n {
            if has_lb[i] && dx[i] < 0.0 {
                alpha_max = alpha_max.min(-tau * (x[i] - xl[i]) / dx[i]);
            }
            if has_ub[i] && dx[i] > 0.0 {
                alpha_max = alpha_max.min(tau * (xu[i] - x[i]) / dx[i]);
            }
        }
        let mut alpha_z = 1.0f64;
        for i in 0..n {
            if has_lb[i] && dzl[i] < 0.0 {
                alpha_z = alpha_z.min(-tau * zl[i] / dzl[i]);
            }
            if has_ub[i] && dzu[i] < 0.0 {
                alpha_z = alpha_z.min(-tau * zu[i] / dzu[i]);
            }
        }

        // merit line search
        let f0 = model.objective(&x);
        let theta0_phi = barrier(&x, f0, mu);
        let c_l1: f64 = w.c.iter().map(|v| v.abs()).sum();
        let dphi: f64 = grad_phi.iter().zip(&dx).map(|(g, d)| g * d).sum();
        if c_l1 > 1e-14 && dphi > 0.0 {
            let needed = dphi / ((1.0 - RHO_NU) * c_l1);
            if needed + 1.0 > nu {
                nu = needed + 1.0;
            }
        }
        let descent = dphi - nu * c_l1;
        let theta0 = theta0_phi + nu * c_l1;

        let mut accepted = false;
        let mut alpha = alpha_max;
        let mut used_dx = dx.clone();
        let mut used_dlam = dlam.clone();
        for bt in 0..MAX_BACKTRACKS {
            for i in 0..n {
                w.x_trial[i] = x[i] + alpha * used_dx[i];
            }
            let f_trial = model.objective(&w.x_trial);
            model.constraints(&w.x_trial, &mut w.c_trial);
            let c1_trial: f64 = w.c_trial.iter().map(|v| v.abs()).sum();
            let theta_trial = barrier(&w.x_trial, f_trial, mu) + nu * c1_trial;
            if theta_trial.is_finite() && theta_trial <= theta0 + ETA_ARMIJO * alpha * descent {
                accepted = true;
                break;
            }
            // one second-order correction on the first rejection when the
            // constraint violation grew
            if bt == 0 && m > 0 && c1_trial >= c_l1 {
                let mut rhs2 = w.rhs.clone();
                for j in 0..m {
                    rhs2[pc[j]] = -(alpha * w.c[j] + w.c_trial[j]);
                }
                let mut sol2 = rhs2.clone();
                factor.solve_in_place(&mut sol2);
                let dx2: Vec<f64> = (0..n).map(|i| sol2[pv[i]]).collect();
                let mut a2 = 1.0f64;
                for i in 0..n {
                    if has_lb[i] && dx2[i] < 0.0 {
                        a2 = a2.min(-tau * (x[i] - xl[i]) / dx2[i]);
                    }
                    if has_ub[i] && dx2[i] > 0.0 {
                        a2 = a2.min(tau * (xu[i] - x[i]) / dx2[i]);
                    }
                }
                for i in 0..n {
                    w.x_trial[i] = x[i] + a2 * dx2[i];
                }
                let f2 = model.objective(&w.x_trial);
                model.constraints(&w.x_trial, &mut w.c_trial);
                let c1_2: f64 = w.c_trial.iter().map(|v| v.abs()).sum();
                let theta2 = barrier(&w.x_trial, f2, mu) + nu * c1_2;
                if theta2.is_finite() && theta2 <= theta0 + ETA_ARMIJO * a2 * descent {
                    used_dx = dx2;
                    used_dlam = (0..m).map(|j| sol2[pc[j]]).collect();
                    alpha = a2;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                break;
            }
        }

        if !accepted {
            consecutive_failures += 1;
            delta_w_last = (delta_w_last.max(1e-6)) * 10.0;
            if consecutive_failures >= 5 {
                status = IpmStatus::Stalled;
                break;
            }
            iter += 1;
            continue;
        }
        consecutive_failures = 0;

        for i in 0..n {
            x[i] += alpha * used_dx[i];
        }
        for j in 0..m {
            lam[j] += alpha * used_dlam[j];
        }
        for i in 0..n {
            if has_lb[i] {
                zl[i] += alpha_z * dzl[i];
                let s = x[i] - xl[i];
                zl[i] = zl[i].clamp(mu / (KAPPA_SIGMA * s), KAPPA_SIGMA * mu / s);
            }
            if has_ub[i] {
                zu[i] += alpha_z * dzu[i];
                let s = xu[i] - x[i];
                zu[i] = zu[i].clamp(mu / (KAPPA_SIGMA * s), KAPPA_SIGMA * mu / s);
            }
        }
        iter += 1;
    }

    // final measures
    model.gradient(&x, &mut w.grad);
    model.constraints(&x, &mut w.c);
    model.jac_values(&x, &mut w.jac);
    let mut rd = w.grad.clone();
    for (t, (&r, &c)) in jr.iter().zip(&jc).enumerate() {
        rd[c] += w.jac[t] * lam[r];
    }
    for i in 0..n {
        rd[i] += zu[i] - zl[i];
    }
    let stationarity = rd.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let feasibility = w.c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut complementarity = 0.0f64;
    for i in 0..n {
        if has_lb[i] {
            complementarity = complementarity.max(((x[i] - xl[i]) * zl[i]).abs());
        }
        if has_ub[i] {
            complementarity = complementarity.max(((xu[i] - x[i]) * zu[i]).abs());
        }
    }

    IpmResult {
        objective: model.objective(&x),
        x,
        lam,
        zl,
        zu,
        status,
        iterations: iter,
        stationarity,
        feasibility,
        complementarity,
        mu,
    }
}
