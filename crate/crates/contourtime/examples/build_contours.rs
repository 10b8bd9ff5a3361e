//! Builds the two benchmark geometries plus a custom polyline, resamples
//! them at constant arc-length steps and writes the objectives as CSV.
//!
//! Run with: cargo run --release --example build_contours

use contourtime::{
    make_sharp_spiral, make_smooth_spiral, resample_constant_arclength, Point, RawPath,
};
use std::fs;

fn main() -> contourtime::Result<()> {
    let out = std::path::Path::new("examples_out/contours");
    fs::create_dir_all(out)?;

    let smooth = make_smooth_spiral(0.010, 1.0, 0.002)?;
    println!(
        "smooth spiral: {} vertices, length {:.4} m",
        smooth.vertices().len(),
        smooth.total_length()
    );
    let objective = resample_constant_arclength(&smooth, 256)?;
    println!(
        "  resampled to {} points, delta_s = {:.6e} m",
        objective.len(),
        objective.delta_s()
    );
    objective.to_csv(&out.join("smooth_spiral_objective.csv"))?;

    let sharp = make_sharp_spiral(0.001, 8)?;
    println!(
        "sharp spiral: {} segments, length {:.4} m",
        sharp.vertices().len() - 1,
        sharp.total_length()
    );
    let objective = resample_constant_arclength(&sharp, 256)?;
    objective.to_csv(&out.join("sharp_spiral_objective.csv"))?;

    // a hand-made open polyline works the same way
    let custom = RawPath::new(
        vec![
            Point::new(0.0, 0.0),
            Point::new(0.02, 0.0),
            Point::new(0.03, 0.01),
            Point::new(0.03, 0.03),
        ],
        false,
    )?;
    let objective = resample_constant_arclength(&custom, 64)?;
    println!("custom path: {} points", objective.len());
    for p in objective.points().iter().step_by(16) {
        println!(
            "  ({:+.5}, {:+.5}) tangent {:+.4} rad",
            p.x, p.y, p.alpha
        );
    }
    objective.to_csv(&out.join("custom_objective.csv"))?;
    println!("objectives written to {}", out.display());
    Ok(())
}
