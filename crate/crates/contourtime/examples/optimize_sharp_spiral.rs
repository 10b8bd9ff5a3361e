//! The sharp rectilinear spiral: right-angle corners force the solver to
//! slow down and cut inside the tolerance band. Prints the per-corner band
//! usage and where the speed peaks within each straight segment.
//!
//! Run with: cargo run --release --example optimize_sharp_spiral

use contourtime::{
    build_nlp, initial_guess, make_sharp_spiral, resample_constant_arclength, solve, BoundSet,
    ControllerGains, SolverConfig, Weights,
};

fn main() -> contourtime::Result<()> {
    let r0 = 0.001;
    let steps = 8;
    let path = make_sharp_spiral(r0, steps)?;
    let objective = resample_constant_arclength(&path, 256)?;
    let gains = ControllerGains::new(4.0e4, 4.0e2, 3.6e4, 3.8e2)?;
    let bounds = BoundSet::default();
    let config = SolverConfig::default();
    let problem = build_nlp(&objective, &gains, &Weights::default(), &bounds, &config)?;
    let guess = initial_guess(&objective, &bounds, &config);
    let solution = solve(&problem, &guess, &config)?;
    println!(
        "status {}, traversal {:.4} s, {} iterations",
        solution.status.as_str(),
        solution.traversal_time(),
        solution.iterations
    );

    // corner arc positions: cumulative segment lengths r0, 2 r0, ...
    let mut corner_arcs = Vec::new();
    let mut acc = 0.0;
    for i in 0..steps - 1 {
        acc += (i + 1) as f64 * r0;
        corner_arcs.push(acc);
    }
    let sample_of = |arc: f64| (arc / objective.delta_s()).round() as usize;
    println!("corner band usage (band {:.0} um):", bounds.tol * 1e6);
    for (c, &arc) in corner_arcs.iter().enumerate() {
        let k = sample_of(arc).min(objective.len() - 1);
        let dev = solution.omega_local[k].py;
        println!(
            "  corner {c} at sample {k}: deviation {:+.2} um{}",
            dev * 1e6,
            if k < bounds.relax_count { " (relaxed zone)" } else { "" }
        );
    }

    // speed profile along each interior segment
    println!("speed peaks per segment:");
    let mut seg_start = 0.0;
    for i in 0..steps {
        let seg_end = seg_start + (i + 1) as f64 * r0;
        let k0 = sample_of(seg_start);
        let k1 = sample_of(seg_end).min(objective.len() - 1);
        let (mut best_k, mut best_v) = (k0, 0.0f64);
        for k in k0..=k1 {
            let s = &solution.omega_local[k];
            let v = s.vx.hypot(s.vy);
            if v > best_v {
                best_v = v;
                best_k = k;
            }
        }
        println!(
            "  segment {i}: samples {k0}..{k1}, peak {:.4} m/s at sample {best_k}",
            best_v
        );
        seg_start = seg_end;
    }
    Ok(())
}
