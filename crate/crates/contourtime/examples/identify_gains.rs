//! Closed-loop identification on synthetic data: simulate a PD-controlled
//! stage on a reference, log it with actuator noise, and recover the gains
//! by least squares.
//!
//! Run with: cargo run --release --example identify_gains

use contourtime::postprocess::{synthesize_tracking_log, ReferenceFile, ReferenceRow};
use contourtime::{fit_gains, ControllerGains, StateMatrix};

fn main() -> contourtime::Result<()> {
    let truth = ControllerGains::new(4.0e4, 4.0e2, 3.6e4, 3.8e2)?;

    // an exciting reference: two incommensurate circles
    let dt = 1e-3;
    let rows: Vec<ReferenceRow> = (0..4000)
        .map(|i| {
            let t = i as f64 * dt;
            ReferenceRow {
                t,
                pos: (0.01 * (3.0 * t).sin(), 0.008 * ((2.2 * t).cos() - 1.0)),
                vel: (0.03 * (3.0 * t).cos(), -0.0176 * (2.2 * t).sin()),
            }
        })
        .collect();
    let reference = ReferenceFile {
        dt,
        rows,
        velocity_consistency: 0.0,
    };

    for noise in [0.0, 0.01, 0.05] {
        let log = synthesize_tracking_log(
            &reference,
            &truth,
            &StateMatrix::at_rest(0.0, 0.0),
            noise,
            42,
        )?;
        let fit = fit_gains(&log)?;
        println!("noise std {noise} m/s^2:");
        print!("{}", fit.human_summary());
        if noise > 0.0 {
            println!(
                "  kp_x error {:+.2e} ({:.1} standard errors)",
                fit.gains.kp_x - truth.kp_x,
                (fit.gains.kp_x - truth.kp_x).abs() / fit.x_axis.se_kp
            );
        }
    }
    Ok(())
}
