//! The state and frame machinery: the 2x3 state rows, local/global
//! transforms, and the double-integrator step in local coordinates.
//!
//! Run with: cargo run --release --example local_frames

use contourtime::{
    frame_of, step_global, step_local, to_global, to_local, ContourPoint, StateMatrix,
};

fn main() {
    // a contour point at (1 mm, 2 mm) with a 30 degree tangent
    let point = ContourPoint {
        x: 0.001,
        y: 0.002,
        alpha: 30f64.to_radians(),
    };
    let frame = frame_of(&point);
    println!("frame matrix rows: {:?}", frame.matrix());

    // a state sitting on the contour point, moving along the tangent
    let local = StateMatrix::new(0.0, 0.0, 0.05, 0.0);
    let global = to_global(&local, &frame);
    println!(
        "local (0,0) at 0.05 m/s tangential -> global pos ({:.6}, {:.6}), vel ({:.6}, {:.6})",
        global.px, global.py, global.vx, global.vy
    );
    let back = to_local(&global, &frame);
    println!(
        "round trip error: {:.2e}",
        (back.px - local.px)
            .abs()
            .max((back.vx - local.vx).abs())
    );

    // stepping in local coordinates lands the state expressed in the next
    // frame; identical to transform -> global step -> transform
    let next_point = ContourPoint {
        x: 0.0012,
        y: 0.0021,
        alpha: 35f64.to_radians(),
    };
    let next_frame = frame_of(&next_point);
    let input = (0.5, -0.2);
    let dt = 0.004;
    let direct = step_local(&local, input, dt, &frame, &next_frame);
    let composed = to_local(&step_global(&to_global(&local, &frame), input, dt), &next_frame);
    println!(
        "local step: deviation {:.3} um, tangential speed {:.4} m/s",
        direct.py * 1e6,
        direct.vx
    );
    println!(
        "agreement with composition: {:.2e}",
        (direct.px - composed.px)
            .abs()
            .max((direct.py - composed.py).abs())
            .max((direct.vx - composed.vx).abs())
    );
}
