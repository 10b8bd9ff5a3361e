//! Tolerance study on the sharp spiral: tighter bands cost traversal time,
//! and the L2 error of every feasible solution stays at or below the band
//! line.
//!
//! Run with: cargo run --release --example tolerance_sweep

use contourtime::{
    make_sharp_spiral, resample_constant_arclength, tolerance_sweep, BoundSet, ControllerGains,
    SolverConfig, Weights,
};

fn main() -> contourtime::Result<()> {
    let objective = resample_constant_arclength(&make_sharp_spiral(0.001, 8)?, 256)?;
    let gains = ControllerGains::new(4.0e4, 4.0e2, 3.6e4, 3.8e2)?;
    let tolerances = [5e-6, 10e-6, 20e-6, 40e-6];
    let t0 = std::time::Instant::now();
    let (table, _) = tolerance_sweep(
        &objective,
        &gains,
        &Weights::default(),
        &BoundSet::default(),
        &tolerances,
        &SolverConfig::default(),
    )?;
    println!("swept {} tolerances in {:.2?}", table.rows.len(), t0.elapsed());
    println!("tol [um]  time [ms]  L2 [um]  Linf [um]  band L2 [um]  status");
    for r in &table.rows {
        println!(
            "{:8.1}  {:9.3}  {:7.3}  {:9.3}  {:12.1}  {}",
            r.tol * 1e6,
            r.traversal_time * 1e3,
            r.l2 * 1e6,
            r.linf * 1e6,
            r.l2_band * 1e6,
            r.status.as_str()
        );
    }
    Ok(())
}
