//! contourtime computes modified references for biaxial precision
//! positioning stages: given a target contour, a tolerance band and the
//! identified characteristic of the machine's existing PD loop, it solves
//! an offline minimum-time optimization and emits a constant-timestep
//! reference file for the machine to play back.
//!
//! The pipeline is
//!
//! 1. [`contour`] — resample the geometry at constant arc-length steps and
//!    attach tangent orientations,
//! 2. [`sysid`] — identify the closed-loop PD gains from logged tracking
//!    data,
//! 3. [`nlp`] — solve the variable-timestep optimization with the closed
//!    loop embedded as constraints,
//! 4. [`postprocess`] — translate the solution into a constant-timestep
//!    reference, simulate the loop and score the result.
//!
//! The `examples/` directory has one runnable example per capability; the
//! `contourtime` binary wires the same calls to config files.

pub mod cli;
pub mod config;
pub mod contour;
mod csvio;
pub mod error;
pub mod frames;
pub mod nlp;
pub mod plant;
pub mod plot;
pub mod postprocess;
pub mod sysid;

pub use contour::{
    make_sharp_spiral, make_smooth_spiral, resample_constant_arclength, tangent_orientations,
    ContourPoint, Objective, Point, RawPath,
};
pub use error::{Error, Result};
pub use frames::{frame_of, to_global, to_local, FrameTransform, StateMatrix};
pub use nlp::{
    build_nlp, initial_guess, kkt_residuals, solve, BoundSet, NlpProblem, NlpSolution,
    SolveStatus, SolverConfig, Weights,
};
pub use plant::{pd_input, step_global, step_local, step_matrices, ControllerGains, StepMatrices};
pub use postprocess::{
    compute_metrics, resample_reference, simulate_closed_loop, tolerance_sweep, MetricsReport,
    ReferenceFile, SimSample, SweepRow, SweepTable,
};
pub use sysid::{fit_gains, FitReport, TrackingLog};
