//! Declarative run configuration. One TOML file drives a reproducible run;
//! every physical field name carries its unit.

use crate::contour::{
    make_sharp_spiral, make_smooth_spiral, resample_constant_arclength, Objective, RawPath,
};
use crate::error::{Error, Result};
use crate::nlp::{BoundSet, SolverConfig, Weights};
use crate::plant::ControllerGains;
use crate::sysid::FitReport;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const OUT_ROOT_ENV: &str = "CONTOURTIME_OUT_ROOT";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub objective: ObjectiveConfig,
    pub gains: GainsConfig,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    /// "smooth_spiral", "sharp_spiral" or "csv".
    pub source: String,
    pub n_points: usize,
    #[serde(default)]
    pub closed: bool,
    pub r0_m: Option<f64>,
    pub turns: Option<f64>,
    pub pitch_m_per_turn: Option<f64>,
    pub steps: Option<usize>,
    pub path_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    pub kp_x_per_s2: Option<f64>,
    pub kd_x_per_s: Option<f64>,
    pub kp_y_per_s2: Option<f64>,
    pub kd_y_per_s: Option<f64>,
    /// Alternative: a gains key-value file written by the fit command.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    /// Cost per second of traversal time.
    pub time_weight_per_s: f64,
    /// Diagonal output weight: [position 1/m^2, velocity s^2/m^2].
    pub q_omega: [f64; 2],
    pub r_u: [[f64; 2]; 2],
    pub q_gamma: [f64; 2],
    pub r_v: [[f64; 2]; 2],
}

impl Default for WeightsConfig {
    fn default() -> Self {
        let w = Weights::default();
        Self {
            time_weight_per_s: w.time_weight,
            q_omega: w.q_omega,
            r_u: w.r_u,
            q_gamma: w.q_gamma,
            r_v: w.r_v,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub u_max_m_per_s2: f64,
    pub vel_max_m_per_s: f64,
    pub tol_m: f64,
    pub relax_count: usize,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        let b = BoundSet::default();
        Self {
            u_max_m_per_s2: b.u_max,
            vel_max_m_per_s: b.vel_max,
            tol_m: b.tol,
            relax_count: b.relax_count,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub max_iterations: usize,
    pub dt_min_s: f64,
    pub dt_max_s: f64,
    pub initial_speed_m_per_s: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self {
            feasibility_tol: s.feasibility_tol,
            optimality_tol: s.optimality_tol,
            max_iterations: s.max_iterations,
            dt_min_s: s.dt_min,
            dt_max_s: s.dt_max,
            initial_speed_m_per_s: s.initial_speed_guess,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Reference playback timestep; defaults to 100 us.
    pub dt_out_s: Option<f64>,
    /// Output directory; defaults to `<root>/<config stem>` where root is
    /// the CONTOURTIME_OUT_ROOT environment variable or `runs`.
    pub dir: Option<PathBuf>,
}

/// A parsed and validated configuration plus the hash of its source bytes.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub hash: String,
    pub source_path: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8_lossy(&bytes);
    let config: RunConfig = toml::from_str(&text)
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    if config.version != 1 {
        return Err(Error::Validation(format!(
            "unsupported config version {}",
            config.version
        )));
    }
    let loaded = LoadedConfig {
        config,
        hash: sha256_hex(&bytes),
        source_path: path.to_path_buf(),
    };
    loaded.validate()?;
    Ok(loaded)
}

impl LoadedConfig {
    pub fn validate(&self) -> Result<()> {
        let c = &self.config;
        self.weights().validate()?;
        self.bounds().validate(c.objective.n_points)?;
        self.solver_config().validate()?;
        if c.objective.n_points < 3 {
            return Err(Error::Validation("objective.n_points must be >= 3".into()));
        }
        match c.objective.source.as_str() {
            "smooth_spiral" => {
                if c.objective.r0_m.is_none() || c.objective.turns.is_none() {
                    return Err(Error::Validation(
                        "smooth_spiral needs r0_m and turns".into(),
                    ));
                }
            }
            "sharp_spiral" => {
                if c.objective.r0_m.is_none() || c.objective.steps.is_none() {
                    return Err(Error::Validation(
                        "sharp_spiral needs r0_m and steps".into(),
                    ));
                }
            }
            "csv" => {
                let p = c.objective.path_csv.as_ref().ok_or_else(|| {
                    Error::Validation("csv objective needs path_csv".into())
                })?;
                let resolved = self.resolve(p);
                if !resolved.exists() {
                    return Err(Error::Validation(format!(
                        "path_csv {} does not exist",
                        resolved.display()
                    )));
                }
            }
            other => {
                return Err(Error::Validation(format!(
                    "unknown objective.source `{other}`"
                )))
            }
        }
        let g = &c.gains;
        let inline = [
            g.kp_x_per_s2,
            g.kd_x_per_s,
            g.kp_y_per_s2,
            g.kd_y_per_s,
        ];
        if g.file.is_none() && inline.iter().any(|v| v.is_none()) {
            return Err(Error::Validation(
                "gains need either all four inline values or a file".into(),
            ));
        }
        if let Some(dt) = c.output.dt_out_s {
            if !(dt > 0.0) {
                return Err(Error::Validation("output.dt_out_s must be > 0".into()));
            }
        }
        Ok(())
    }

    /// Paths in the config resolve relative to the config file location.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.source_path
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(p)
        }
    }

    pub fn build_objective(&self) -> Result<Objective> {
        let o = &self.config.objective;
        let path = match o.source.as_str() {
            "smooth_spiral" => make_smooth_spiral(
                o.r0_m.unwrap(),
                o.turns.unwrap(),
                o.pitch_m_per_turn.unwrap_or(0.0),
            )?,
            "sharp_spiral" => make_sharp_spiral(o.r0_m.unwrap(), o.steps.unwrap())?,
            "csv" => RawPath::from_csv(&self.resolve(o.path_csv.as_ref().unwrap()), o.closed)?,
            other => {
                return Err(Error::Validation(format!(
                    "unknown objective.source `{other}`"
                )))
            }
        };
        resample_constant_arclength(&path, o.n_points)
    }

    pub fn gains(&self) -> Result<ControllerGains> {
        let g = &self.config.gains;
        if let Some(file) = &g.file {
            return FitReport::gains_from_key_values(&self.resolve(file));
        }
        ControllerGains::new(
            g.kp_x_per_s2.unwrap(),
            g.kd_x_per_s.unwrap(),
            g.kp_y_per_s2.unwrap(),
            g.kd_y_per_s.unwrap(),
        )
    }

    pub fn weights(&self) -> Weights {
        let w = &self.config.weights;
        Weights {
            time_weight: w.time_weight_per_s,
            q_omega: w.q_omega,
            r_u: w.r_u,
            q_gamma: w.q_gamma,
            r_v: w.r_v,
        }
    }

    pub fn bounds(&self) -> BoundSet {
        let b = &self.config.bounds;
        BoundSet {
            u_max: b.u_max_m_per_s2,
            vel_max: b.vel_max_m_per_s,
            tol: b.tol_m,
            relax_count: b.relax_count,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.config.solver;
        SolverConfig {
            feasibility_tol: s.feasibility_tol,
            optimality_tol: s.optimality_tol,
            max_iterations: s.max_iterations,
            dt_min: s.dt_min_s,
            dt_max: s.dt_max_s,
            initial_speed_guess: s.initial_speed_m_per_s,
        }
    }

    pub fn dt_out(&self) -> f64 {
        self.config.output.dt_out_s.unwrap_or(1e-4)
    }

    /// Output directory for this run.
    pub fn out_dir(&self, cli_override: Option<&Path>) -> PathBuf {
        if let Some(p) = cli_override {
            return p.to_path_buf();
        }
        if let Some(p) = &self.config.output.dir {
            return self.resolve(p);
        }
        let root = std::env::var_os(OUT_ROOT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("runs"));
        let stem = self
            .source_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into());
        root.join(stem)
    }
}
