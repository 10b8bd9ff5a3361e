//! Discrete-time double-integrator dynamics with variable timestep and the
//! per-axis PD control law of the machine's existing loop.

use crate::error::{Error, Result};
use crate::frames::{FrameTransform, StateMatrix};

/// Zero-order-hold discretization of a double integrator over `dt`.
#[derive(Debug, Clone, Copy)]
pub struct StepMatrices {
    /// `[[1, dt], [0, 1]]`
    pub a: [[f64; 2]; 2],
    /// `[dt^2 / 2, dt]`
    pub b: [f64; 2],
    pub dt: f64,
}

pub fn step_matrices(dt: f64) -> Result<StepMatrices> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    Ok(StepMatrices {
        a: [[1.0, dt], [0.0, 1.0]],
        b: [0.5 * dt * dt, dt],
        dt,
    })
}

/// Per-axis proportional and derivative gains (one column of the gain
/// matrix per axis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerGains {
    pub kp_x: f64,
    pub kd_x: f64,
    pub kp_y: f64,
    pub kd_y: f64,
}

impl ControllerGains {
    pub fn new(kp_x: f64, kd_x: f64, kp_y: f64, kd_y: f64) -> Result<Self> {
        let g = Self {
            kp_x,
            kd_x,
            kp_y,
            kd_y,
        };
        for (name, v) in [
            ("kp_x", kp_x),
            ("kd_x", kd_x),
            ("kp_y", kp_y),
            ("kd_y", kd_y),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("gain {name} must be finite")));
            }
            if v <= 0.0 {
                // a non-stabilizing controller is suspicious but not illegal
                log::warn!("gain {name} = {v} is not positive; closed loop may be unstable");
            }
        }
        Ok(g)
    }
}

/// Advances a global state one step under constant acceleration input.
pub fn step_global(state: &StateMatrix, input: (f64, f64), dt: f64) -> StateMatrix {
    debug_assert!(dt > 0.0);
    let (ux, uy) = input;
    let half = 0.5 * dt * dt;
    StateMatrix {
        px: state.px + state.vx * dt + ux * half,
        py: state.py + state.vy * dt + uy * half,
        vx: state.vx + ux * dt,
        vy: state.vy + uy * dt,
    }
}

fn mul_23_33(s: &StateMatrix, m: &[[f64; 3]; 3]) -> StateMatrix {
    StateMatrix {
        px: s.px * m[0][0] + s.py * m[1][0] + m[2][0],
        py: s.px * m[0][1] + s.py * m[1][1] + m[2][1],
        vx: s.vx * m[0][0] + s.vy * m[1][0],
        vy: s.vx * m[0][1] + s.vy * m[1][1],
    }
}

/// One dynamics step expressed in local coordinates: the state in frame `k`
/// advances under a global-axes input and lands expressed in frame `k+1`.
///
/// This is the matrix form `A s T^g_k T^{k+1}_g + B u T^{k+1}_g`, written
/// out directly rather than by round-tripping through `to_global`.
pub fn step_local(
    state_local_k: &StateMatrix,
    input: (f64, f64),
    dt: f64,
    frame_k: &FrameTransform,
    frame_k1: &FrameTransform,
) -> StateMatrix {
    debug_assert!(dt > 0.0);
    // A s: mixes the rows of the local state
    let a_s = StateMatrix {
        px: state_local_k.px + dt * state_local_k.vx,
        py: state_local_k.py + dt * state_local_k.vy,
        vx: state_local_k.vx,
        vy: state_local_k.vy,
    };
    // careful: A also mixes the homogeneous column, but the contribution of
    // the velocity row's 0 keeps position homogeneous at 1, so the 2x3
    // product below stays valid.
    let inv_k1 = frame_k1.inverse_matrix();
    let t_fwd = frame_k.matrix();
    // T^g_k T^{k+1}_g composed once
    let mut comp = [[0.0; 3]; 3];
    for (i, row) in t_fwd.iter().enumerate() {
        for j in 0..3 {
            comp[i][j] = (0..3).map(|k| row[k] * inv_k1[k][j]).sum();
        }
    }
    let propagated = mul_23_33(&a_s, &comp);
    // B u T^{k+1}_g: position row gets dt^2/2 * u, velocity row dt * u, both
    // rotated into frame k+1 (homogeneous third entry of u is 0)
    let (ux, uy) = input;
    let half = 0.5 * dt * dt;
    let bu_pos = (
        ux * half * inv_k1[0][0] + uy * half * inv_k1[1][0],
        ux * half * inv_k1[0][1] + uy * half * inv_k1[1][1],
    );
    let bu_vel = (
        ux * dt * inv_k1[0][0] + uy * dt * inv_k1[1][0],
        ux * dt * inv_k1[0][1] + uy * dt * inv_k1[1][1],
    );
    StateMatrix {
        px: propagated.px + bu_pos.0,
        py: propagated.py + bu_pos.1,
        vx: propagated.vx + bu_vel.0,
        vy: propagated.vy + bu_vel.1,
    }
}

/// PD law: per-axis acceleration from position and velocity error
/// (reference minus output), both in global coordinates.
///
/// Note the control structure applies this input one step later than the
/// error it was computed from.
pub fn pd_input(
    gains: &ControllerGains,
    reference_global: &StateMatrix,
    output_global: &StateMatrix,
) -> (f64, f64) {
    let ex = reference_global.px - output_global.px;
    let ey = reference_global.py - output_global.py;
    let evx = reference_global.vx - output_global.vx;
    let evy = reference_global.vy - output_global.vy;
    (
        gains.kp_x * ex + gains.kd_x * evx,
        gains.kp_y * ey + gains.kd_y * evy,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{to_global, to_local};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn matrices_at_unit_dt() {
        let m = step_matrices(1.0).unwrap();
        assert_eq!(m.a, [[1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(m.b, [0.5, 1.0]);
    }

    #[test]
    fn matrices_at_millisecond() {
        let m = step_matrices(0.001).unwrap();
        assert_relative_eq!(m.b[0], 5e-7, epsilon = 1e-20);
        assert_relative_eq!(m.b[1], 1e-3, epsilon = 1e-18);
    }

    #[test]
    fn rejects_nonpositive_dt() {
        assert!(step_matrices(0.0).is_err());
        assert!(step_matrices(-1.0).is_err());
    }

    #[test]
    fn semigroup_property() {
        // A(dt) * A(dt') = A(dt + dt') for the position/velocity block
        for (dt, dt2) in [(0.1, 0.2), (1e-4, 3e-2), (0.5, 0.5)] {
            let a1 = step_matrices(dt).unwrap().a;
            let a2 = step_matrices(dt2).unwrap().a;
            let sum = step_matrices(dt + dt2).unwrap().a;
            for i in 0..2 {
                for j in 0..2 {
                    let prod: f64 = (0..2).map(|k| a1[i][k] * a2[k][j]).sum();
                    assert_relative_eq!(prod, sum[i][j], max_relative = 1e-15);
                }
            }
        }
    }

    #[test]
    fn ballistic_step() {
        let s = StateMatrix::new(0.0, 0.0, 1.0, 0.0);
        let out = step_global(&s, (0.0, 0.0), 0.5);
        assert_eq!(out.position(), (0.5, 0.0));
        assert_eq!(out.velocity(), (1.0, 0.0));
    }

    #[test]
    fn half_u_t_squared() {
        let s = StateMatrix::at_rest(0.0, 0.0);
        let out = step_global(&s, (2.0, 0.0), 1.0);
        assert_eq!(out.position(), (1.0, 0.0));
        assert_eq!(out.velocity(), (2.0, 0.0));
    }

    #[test]
    fn two_half_steps_equal_full_step() {
        let s = StateMatrix::new(0.3, -0.2, 0.7, 1.1);
        let u = (0.4, -0.9);
        let full = step_global(&s, u, 0.02);
        let half = step_global(&step_global(&s, u, 0.01), u, 0.01);
        assert_relative_eq!(full.px, half.px, max_relative = 1e-13);
        assert_relative_eq!(full.py, half.py, max_relative = 1e-13);
        assert_relative_eq!(full.vx, half.vx, max_relative = 1e-13);
        assert_relative_eq!(full.vy, half.vy, max_relative = 1e-13);
    }

    #[test]
    fn identical_frames_reduce_to_global_step() {
        let f = FrameTransform::from_alpha_origin(0.0, 0.0, 0.0);
        let s = StateMatrix::new(0.1, 0.2, 0.3, 0.4);
        let u = (1.0, -1.0);
        let a = step_local(&s, u, 0.05, &f, &f);
        let b = step_global(&s, u, 0.05);
        assert_relative_eq!(a.px, b.px, epsilon = 1e-15);
        assert_relative_eq!(a.vy, b.vy, epsilon = 1e-15);
    }

    #[test]
    fn coasting_at_rest_is_a_pure_frame_change() {
        let f0 = FrameTransform::from_alpha_origin(0.3, 1.0, 2.0);
        let f1 = FrameTransform::from_alpha_origin(-0.7, 1.5, 1.0);
        let s = StateMatrix::at_rest(0.0, 0.1);
        let out = step_local(&s, (0.0, 0.0), 0.01, &f0, &f1);
        let expect = to_local(&to_global(&s, &f0), &f1);
        assert_relative_eq!(out.px, expect.px, epsilon = 1e-14);
        assert_relative_eq!(out.py, expect.py, epsilon = 1e-14);
    }

    #[test]
    fn pd_zero_error_zero_input() {
        let g = ControllerGains::new(100.0, 10.0, 120.0, 12.0).unwrap();
        let s = StateMatrix::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(pd_input(&g, &s, &s), (0.0, 0.0));
    }

    #[test]
    fn pd_linear_evaluation() {
        let g = ControllerGains::new(100.0, 7.0, 50.0, 3.0).unwrap();
        let r = StateMatrix::at_rest(0.01, 0.0);
        let o = StateMatrix::at_rest(0.0, 0.0);
        assert_eq!(pd_input(&g, &r, &o), (1.0, 0.0));
    }

    #[test]
    fn pd_axes_independent() {
        let g = ControllerGains::new(100.0, 10.0, 999.0, 99.0).unwrap();
        let r = StateMatrix::new(0.5, 0.0, 0.25, 0.0);
        let o = StateMatrix::at_rest(0.0, 0.0);
        let (ux, uy) = pd_input(&g, &r, &o);
        assert_eq!(ux, 100.0 * 0.5 + 10.0 * 0.25);
        assert_eq!(uy, 0.0);
    }

    #[test]
    fn stable_gains_converge_on_constant_reference() {
        let dt = 1e-3;
        let g = ControllerGains::new(400.0, 40.0, 400.0, 40.0).unwrap();
        let reference = StateMatrix::at_rest(1.0, -1.0);
        let mut s = StateMatrix::new(0.0, 0.0, 0.1, -0.1);
        let mut u = pd_input(&g, &reference, &s);
        let e0 = (reference.px - s.px).hypot(reference.py - s.py);
        for _ in 0..1000 {
            let next_u = pd_input(&g, &reference, &s);
            s = step_global(&s, u, dt);
            u = next_u;
        }
        let e1 = (reference.px - s.px).hypot(reference.py - s.py);
        assert!(e1 < e0 * 1e-2, "error did not decay: {e0} -> {e1}");
    }

    proptest! {
        /// step_local agrees with the transform-step-transform composition.
        #[test]
        fn local_step_matches_composition(
            a0 in -PI..PI, a1 in -PI..PI,
            x0 in -1.0..1.0f64, y0 in -1.0..1.0f64,
            x1 in -1.0..1.0f64, y1 in -1.0..1.0f64,
            px in -0.5..0.5f64, py in -0.5..0.5f64,
            vx in -2.0..2.0f64, vy in -2.0..2.0f64,
            ux in -2.0..2.0f64, uy in -2.0..2.0f64,
            dt in 1e-5..0.1f64,
        ) {
            let fk = FrameTransform::from_alpha_origin(a0, x0, y0);
            let fk1 = FrameTransform::from_alpha_origin(a1, x1, y1);
            let s = StateMatrix::new(px, py, vx, vy);
            let direct = step_local(&s, (ux, uy), dt, &fk, &fk1);
            let composed = to_local(&step_global(&to_global(&s, &fk), (ux, uy), dt), &fk1);
            prop_assert!((direct.px - composed.px).abs() < 1e-12);
            prop_assert!((direct.py - composed.py).abs() < 1e-12);
            prop_assert!((direct.vx - composed.vx).abs() < 1e-12);
            prop_assert!((direct.vy - composed.vy).abs() < 1e-12);
        }

        /// The PD law is linear in the error.
        #[test]
        fn pd_superposition(
            e1 in -1.0..1.0f64, e2 in -1.0..1.0f64,
            ev1 in -1.0..1.0f64, ev2 in -1.0..1.0f64,
            a in -3.0..3.0f64, b in -3.0..3.0f64,
        ) {
            let g = ControllerGains::new(123.0, 4.5, 67.0, 8.9).unwrap();
            let zero = StateMatrix::at_rest(0.0, 0.0);
            let r1 = StateMatrix::new(e1, ev1, ev1, e1);
            let r2 = StateMatrix::new(e2, ev2, ev2, e2);
            let mix = StateMatrix::new(
                a * e1 + b * e2,
                a * ev1 + b * ev2,
                a * ev1 + b * ev2,
                a * e1 + b * e2,
            );
            let u1 = pd_input(&g, &r1, &zero);
            let u2 = pd_input(&g, &r2, &zero);
            let um = pd_input(&g, &mix, &zero);
            prop_assert!((um.0 - (a * u1.0 + b * u2.0)).abs() < 1e-9);
            prop_assert!((um.1 - (a * u1.1 + b * u2.1)).abs() < 1e-9);
        }
    }
}
