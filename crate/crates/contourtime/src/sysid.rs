//! Closed-loop identification: recovers the PD gain matrix from logged
//! tracking data by linear least squares.
//!
//! Each axis is fit independently. The regressors are the position and
//! velocity errors (reference minus output) and the response is the
//! commanded acceleration one sample later, matching the one-step delay of
//! the control structure. The fit goes strictly through the origin.

use crate::csvio;
use crate::error::{Error, Result};
use crate::plant::ControllerGains;
use std::fmt::Write as _;
use std::path::Path;

pub const MAX_CONDITION_NUMBER: f64 = 1e12;

/// One logged sample of the running closed loop.
#[derive(Debug, Clone, Copy)]
pub struct LogSample {
    pub t: f64,
    pub ref_pos: (f64, f64),
    pub ref_vel: (f64, f64),
    pub out_pos: (f64, f64),
    pub out_vel: (f64, f64),
    pub accel: (f64, f64),
}

/// A time-ordered tracking log.
#[derive(Debug, Clone, Default)]
pub struct TrackingLog {
    pub samples: Vec<LogSample>,
}

pub const LOG_HEADER: &str = "t,rx,ry,rvx,rvy,ox,oy,ovx,ovy,ux,uy";

impl TrackingLog {
    pub fn new(samples: Vec<LogSample>) -> Result<Self> {
        for pair in samples.windows(2) {
            if pair[1].t <= pair[0].t {
                return Err(Error::InvalidInput(
                    "log timestamps must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self { samples })
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let rows = csvio::read_table(path, LOG_HEADER)?;
        let samples = rows
            .iter()
            .map(|r| LogSample {
                t: r[0],
                ref_pos: (r[1], r[2]),
                ref_vel: (r[3], r[4]),
                out_pos: (r[5], r[6]),
                out_vel: (r[7], r[8]),
                accel: (r[9], r[10]),
            })
            .collect();
        Self::new(samples)
    }

    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from(LOG_HEADER);
        out.push('\n');
        for s in &self.samples {
            let row = [
                s.t, s.ref_pos.0, s.ref_pos.1, s.ref_vel.0, s.ref_vel.1, s.out_pos.0, s.out_pos.1,
                s.out_vel.0, s.out_vel.1, s.accel.0, s.accel.1,
            ];
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                let _ = write!(out, "{}", csvio::fmt17(v));
                first = false;
            }
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Per-axis fit quality.
#[derive(Debug, Clone, Copy)]
pub struct AxisFit {
    pub kp: f64,
    pub kd: f64,
    /// RMS of the acceleration residual, m/s^2.
    pub residual_rms: f64,
    /// Uncentered R^2 (fit through the origin), in [0, 1].
    pub r_squared: f64,
    pub se_kp: f64,
    pub se_kd: f64,
    pub condition: f64,
    pub n_samples: usize,
}

/// Result of fitting both axes.
#[derive(Debug, Clone, Copy)]
pub struct FitReport {
    pub gains: ControllerGains,
    pub x_axis: AxisFit,
    pub y_axis: AxisFit,
}

impl FitReport {
    /// Machine-readable key-value form.
    pub fn to_key_values(&self) -> String {
        let mut s = String::from("# contourtime gains v1\n");
        let items = [
            ("kp_x", self.gains.kp_x),
            ("kd_x", self.gains.kd_x),
            ("kp_y", self.gains.kp_y),
            ("kd_y", self.gains.kd_y),
            ("residual_rms_x", self.x_axis.residual_rms),
            ("residual_rms_y", self.y_axis.residual_rms),
            ("r_squared_x", self.x_axis.r_squared),
            ("r_squared_y", self.y_axis.r_squared),
            ("se_kp_x", self.x_axis.se_kp),
            ("se_kd_x", self.x_axis.se_kd),
            ("se_kp_y", self.y_axis.se_kp),
            ("se_kd_y", self.y_axis.se_kd),
            ("condition_x", self.x_axis.condition),
            ("condition_y", self.y_axis.condition),
        ];
        for (k, v) in items {
            let _ = writeln!(s, "{k} = {}", csvio::fmt17(v));
        }
        s
    }

    pub fn write_key_values(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_key_values())?;
        Ok(())
    }

    /// Loads the gain values back from a key-value file.
    pub fn gains_from_key_values(path: &Path) -> Result<ControllerGains> {
        let text = std::fs::read_to_string(path)?;
        let mut vals = [f64::NAN; 4];
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                msg: "expected `key = value`".into(),
            })?;
            let slot = match key.trim() {
                "kp_x" => 0,
                "kd_x" => 1,
                "kp_y" => 2,
                "kd_y" => 3,
                _ => continue,
            };
            vals[slot] = value.trim().parse().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                msg: format!("not a number: `{}`", value.trim()),
            })?;
        }
        if vals.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidInput(format!(
                "gains file {} is missing kp_x/kd_x/kp_y/kd_y entries",
                path.display()
            )));
        }
        ControllerGains::new(vals[0], vals[1], vals[2], vals[3])
    }

    pub fn human_summary(&self) -> String {
        format!(
            "x axis: Kp = {:.6} 1/s^2, Kd = {:.6} 1/s (rms {:.3e} m/s^2, R^2 {:.6})\n\
             y axis: Kp = {:.6} 1/s^2, Kd = {:.6} 1/s (rms {:.3e} m/s^2, R^2 {:.6})\n",
            self.gains.kp_x,
            self.gains.kd_x,
            self.x_axis.residual_rms,
            self.x_axis.r_squared,
            self.gains.kp_y,
            self.gains.kd_y,
            self.y_axis.residual_rms,
            self.y_axis.r_squared,
        )
    }
}

/// Two-column least squares through the origin via Householder QR on
/// column-equilibrated regressors.
///
/// Column scaling keeps the factorization well conditioned when position
/// errors (~1e-5 m) and velocity errors (~1e-3 m/s) differ by orders of
/// magnitude; the solution is identical in exact arithmetic.
fn fit_axis(e_pos: &[f64], e_vel: &[f64], u_next: &[f64]) -> Result<AxisFit> {
    let n = u_next.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 aligned samples per axis, got {n}"
        )));
    }

    let rms = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
    let s1 = rms(e_pos);
    let s2 = rms(e_vel);
    if s1 == 0.0 || s2 == 0.0 {
        return Err(Error::Identifiability(
            "regressor column is identically zero (no excitation)".into(),
        ));
    }

    let a1: Vec<f64> = e_pos.iter().map(|v| v / s1).collect();
    let mut a2: Vec<f64> = e_vel.iter().map(|v| v / s2).collect();
    let mut b: Vec<f64> = u_next.to_vec();

    // first Householder reflection, zeroing a1 below row 0
    let norm1 = a1.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sign1 = if a1[0] >= 0.0 { 1.0 } else { -1.0 };
    let r11 = -sign1 * norm1;
    let mut w: Vec<f64> = a1.clone();
    w[0] -= r11;
    let wnorm2: f64 = w.iter().map(|v| v * v).sum();
    if wnorm2 > 0.0 {
        let tau = 2.0 / wnorm2;
        let wa: f64 = w.iter().zip(&a2).map(|(wi, ai)| wi * ai).sum();
        for (ai, wi) in a2.iter_mut().zip(&w) {
            *ai -= tau * wa * wi;
        }
        let wb: f64 = w.iter().zip(&b).map(|(wi, bi)| wi * bi).sum();
        for (bi, wi) in b.iter_mut().zip(&w) {
            *bi -= tau * wb * wi;
        }
    }
    let r12 = a2[0];

    // second reflection on rows 1.. of a2
    let norm2 = a2[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    let sign2 = if a2[1] >= 0.0 { 1.0 } else { -1.0 };
    let r22 = -sign2 * norm2;
    let mut w2: Vec<f64> = a2[1..].to_vec();
    w2[0] -= r22;
    let w2norm2: f64 = w2.iter().map(|v| v * v).sum();
    if w2norm2 > 0.0 {
        let tau2 = 2.0 / w2norm2;
        let wb: f64 = w2.iter().zip(&b[1..]).map(|(wi, bi)| wi * bi).sum();
        for (bi, wi) in b[1..].iter_mut().zip(&w2) {
            *bi -= tau2 * wb * wi;
        }
    }

    // condition number from the singular values of the 2x2 R factor
    let m11 = r11 * r11;
    let m12 = r11 * r12;
    let m22 = r12 * r12 + r22 * r22;
    let tr = m11 + m22;
    let det = (r11 * r22) * (r11 * r22);
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let sig_max = ((tr + disc) / 2.0).max(0.0).sqrt();
    let sig_min = ((tr - disc) / 2.0).max(0.0).sqrt();
    let _ = m12;
    let condition = if sig_min > 0.0 {
        sig_max / sig_min
    } else {
        f64::INFINITY
    };
    if !condition.is_finite() || condition >= MAX_CONDITION_NUMBER {
        return Err(Error::Identifiability(format!(
            "regressor condition number {condition:.3e} exceeds {MAX_CONDITION_NUMBER:.0e}"
        )));
    }

    // back substitution in the scaled basis, then unscale
    let beta2_s = b[1] / r22;
    let beta1_s = (b[0] - r12 * beta2_s) / r11;
    let kp = beta1_s / s1;
    let kd = beta2_s / s2;

    // explicit residual pass for accuracy
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..n {
        let r = u_next[i] - kp * e_pos[i] - kd * e_vel[i];
        ss_res += r * r;
        ss_tot += u_next[i] * u_next[i];
    }
    let residual_rms = (ss_res / n as f64).sqrt();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };

    // standard errors from sigma^2 (X^T X)^{-1}, via R^{-1} in scaled space
    let dof = (n.saturating_sub(2)).max(1) as f64;
    let sigma2 = ss_res / dof;
    // (R^T R)^{-1} entries for the scaled regressors
    let inv11 = (1.0 + (r12 / r22) * (r12 / r22)) / (r11 * r11);
    let inv22 = 1.0 / (r22 * r22);
    let se_kp = (sigma2 * inv11).sqrt() / s1;
    let se_kd = (sigma2 * inv22).sqrt() / s2;

    Ok(AxisFit {
        kp,
        kd,
        residual_rms,
        r_squared,
        se_kp,
        se_kd,
        condition,
        n_samples: n,
    })
}

/// Fits the gain matrix from a tracking log.
///
/// Pairs the acceleration at sample `k+1` with the errors at sample `k`.
pub fn fit_gains(log: &TrackingLog) -> Result<FitReport> {
    let m = log.samples.len();
    if m < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 log samples, got {m}"
        )));
    }
    let pairs = m - 1;
    let mut epx = Vec::with_capacity(pairs);
    let mut evx = Vec::with_capacity(pairs);
    let mut ux = Vec::with_capacity(pairs);
    let mut epy = Vec::with_capacity(pairs);
    let mut evy = Vec::with_capacity(pairs);
    let mut uy = Vec::with_capacity(pairs);
    for k in 0..pairs {
        let s = &log.samples[k];
        let next = &log.samples[k + 1];
        epx.push(s.ref_pos.0 - s.out_pos.0);
        epy.push(s.ref_pos.1 - s.out_pos.1);
        evx.push(s.ref_vel.0 - s.out_vel.0);
        evy.push(s.ref_vel.1 - s.out_vel.1);
        ux.push(next.accel.0);
        uy.push(next.accel.1);
    }
    let x_axis = fit_axis(&epx, &evx, &ux)?;
    let y_axis = fit_axis(&epy, &evy, &uy)?;
    let gains = ControllerGains::new(x_axis.kp, x_axis.kd, y_axis.kp, y_axis.kd)?;
    Ok(FitReport {
        gains,
        x_axis,
        y_axis,
    })
}
