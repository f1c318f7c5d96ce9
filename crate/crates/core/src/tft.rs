//! Gradual-channel compact model for lateral organic thin-film transistors.
//!
//! Above threshold the drain current follows the plate-capacitor/gradual
//! channel equations (linear and saturation branches). Below threshold the
//! current falls off exponentially with a fixed decade slope. The two regimes
//! are joined at a small overdrive `stitch_overdrive` above `v_th`: the
//! exponential branch is anchored to the gradual-channel current at that
//! overdrive, which makes the current continuous in `v_gs`.
//!
//! p-type devices are evaluated in the n-type convention by flipping the sign
//! of all voltages and of the returned current.

use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_10, PI};

use crate::constants::thermal_voltage;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    #[default]
    N,
    P,
}

/// Device parameters in SI units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TftParams {
    /// Field-effect mobility, m²/(V·s).
    pub mobility: f64,
    /// Gate-insulator capacitance per area, F/m².
    pub c_ins: f64,
    pub width: f64,
    pub length: f64,
    /// Threshold voltage in the user's sign convention, V.
    pub v_th: f64,
    /// Gate overlap with source and drain, m.
    #[serde(default)]
    pub overlap: f64,
    /// V/decade.
    pub subthreshold_slope: f64,
    #[serde(default)]
    pub polarity: Polarity,
    /// Temperature used to check the thermionic limit of the subthreshold slope, K.
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Overdrive above threshold at which the exponential branch is joined, V.
    #[serde(default = "default_stitch")]
    pub stitch_overdrive: f64,
}

fn default_temperature() -> f64 {
    298.15
}

fn default_stitch() -> f64 {
    1.0e-3
}

impl TftParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mobility", self.mobility),
            ("c_ins", self.c_ins),
            ("width", self.width),
            ("length", self.length),
            ("temperature", self.temperature),
            ("stitch_overdrive", self.stitch_overdrive),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.overlap >= 0.0) {
            return Err(Error::domain(format!("overlap must be >= 0, got {}", self.overlap)));
        }
        if !self.v_th.is_finite() {
            return Err(Error::domain("v_th must be finite"));
        }
        let limit = thermal_voltage(self.temperature) * LN_10;
        // allow for rounding in user-supplied values sitting on the limit
        if !(self.subthreshold_slope >= limit * (1.0 - 1e-9)) {
            return Err(Error::domain(format!(
                "subthreshold slope {:.4} V/dec is below the thermionic limit {:.4} V/dec at {} K",
                self.subthreshold_slope, limit, self.temperature
            )));
        }
        Ok(())
    }
}

/// A validated transistor model.
#[derive(Debug, Clone)]
pub struct Tft {
    params: TftParams,
    beta: f64,
    v_th_n: f64,
    sign: f64,
}

impl Tft {
    pub fn new(params: TftParams) -> Result<Self> {
        params.validate()?;
        let beta = params.mobility * params.c_ins * params.width / params.length;
        let sign = match params.polarity {
            Polarity::N => 1.0,
            Polarity::P => -1.0,
        };
        Ok(Tft {
            v_th_n: sign * params.v_th,
            beta,
            sign,
            params,
        })
    }

    pub fn params(&self) -> &TftParams {
        &self.params
    }

    /// µ·C̃·W/L, A/V².
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Drain current in amperes, signed in the user's convention.
    pub fn drain_current(&self, v_gs: f64, v_ds: f64) -> f64 {
        self.sign * self.current_n(self.sign * v_gs, self.sign * v_ds)
    }

    /// ∂I_D/∂V_GS at fixed V_DS, analytic on the active branch.
    pub fn transconductance(&self, v_gs: f64, v_ds: f64) -> f64 {
        self.gm_n(self.sign * v_gs, self.sign * v_ds)
    }

    /// Gradual-channel current without the subthreshold branch; zero at and
    /// below threshold.
    pub fn gradual_channel_current(&self, v_gs: f64, v_ds: f64) -> f64 {
        let (vgs, vds) = (self.sign * v_gs, self.sign * v_ds);
        let i = if vds < 0.0 {
            -self.above_n(vgs - vds - self.v_th_n, -vds)
        } else {
            self.above_n(vgs - self.v_th_n, vds)
        };
        self.sign * i
    }

    /// Transconductance of the gradual-channel branch alone.
    pub fn gradual_channel_transconductance(&self, v_gs: f64, v_ds: f64) -> f64 {
        let (vgs, vds) = (self.sign * v_gs, self.sign * v_ds);
        if vds < 0.0 {
            -self.above_gm_n(vgs - vds - self.v_th_n, -vds)
        } else {
            self.above_gm_n(vgs - self.v_th_n, vds)
        }
    }

    /// Upper bound on the transition frequency for a given transconductance,
    /// using the minimal device capacitance C̃·W·(L + 2·L_OV).
    pub fn transition_frequency(&self, g_m: f64) -> f64 {
        g_m / (2.0 * PI * self.min_capacitance())
    }

    /// C̃·W·(L + 2·L_OV), F.
    pub fn min_capacitance(&self) -> f64 {
        let p = &self.params;
        p.c_ins * p.width * (p.length + 2.0 * p.overlap)
    }

    fn current_n(&self, vgs: f64, vds: f64) -> f64 {
        if vds < 0.0 {
            // source and drain swap roles
            return -self.current_n(vgs - vds, -vds);
        }
        let vov = vgs - self.v_th_n;
        let eps = self.params.stitch_overdrive;
        if vov > eps {
            self.above_n(vov, vds)
        } else {
            self.above_n(eps, vds) * 10f64.powf((vov - eps) / self.params.subthreshold_slope)
        }
    }

    fn gm_n(&self, vgs: f64, vds: f64) -> f64 {
        if vds < 0.0 {
            return -self.gm_n(vgs - vds, -vds);
        }
        let vov = vgs - self.v_th_n;
        let eps = self.params.stitch_overdrive;
        let s = self.params.subthreshold_slope;
        if vov > eps {
            self.above_gm_n(vov, vds)
        } else {
            self.above_n(eps, vds) * 10f64.powf((vov - eps) / s) * LN_10 / s
        }
    }

    // vds >= 0 in the n-type frame
    fn above_n(&self, vov: f64, vds: f64) -> f64 {
        if vov <= 0.0 {
            0.0
        } else if vds <= vov {
            self.beta * (vov * vds - 0.5 * vds * vds)
        } else {
            0.5 * self.beta * vov * vov
        }
    }

    fn above_gm_n(&self, vov: f64, vds: f64) -> f64 {
        if vov <= 0.0 {
            0.0
        } else if vds <= vov {
            self.beta * vds
        } else {
            self.beta * vov
        }
    }
}

/// Small-signal current gain g_m/(2π·f·C_tot).
pub fn differential_gain(g_m: f64, frequency: f64, c_tot: f64) -> Result<f64> {
    if !(frequency > 0.0) {
        return Err(Error::domain(format!("frequency must be positive, got {frequency}")));
    }
    if !(c_tot > 0.0) {
        return Err(Error::domain(format!("capacitance must be positive, got {c_tot}")));
    }
    Ok(g_m / (2.0 * PI * frequency * c_tot))
}

/// One transmission-line-method sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlmPoint {
    /// Channel length, m.
    pub length: f64,
    /// Width-normalized total resistance, Ω·m.
    pub r_tot_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TlmResult {
    /// Width-normalized contact resistance (intercept at L = 0), Ω·m.
    pub r_c_w: f64,
    /// Contact resistance over channel slope, m.
    pub transfer_length: f64,
    /// Width-normalized sheet resistance of the channel, Ω·m per m.
    pub channel_slope: f64,
    /// Euclidean norm of the fit residuals, Ω·m.
    pub residual_norm: f64,
    /// False when the fitted slope or intercept is negative (or the slope is zero).
    pub physical: bool,
}

/// Least-squares line through R_tot·W versus L.
pub fn tlm_extract(points: &[TlmPoint]) -> Result<TlmResult> {
    for p in points {
        if !(p.length > 0.0 && p.r_tot_w > 0.0) {
            return Err(Error::domain(format!(
                "TLM point needs positive length and resistance, got ({}, {})",
                p.length, p.r_tot_w
            )));
        }
    }
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(Error::Degenerate("TLM needs at least two points".into()));
    }
    let mean_l = points.iter().map(|p| p.length).sum::<f64>() / n;
    let mean_r = points.iter().map(|p| p.r_tot_w).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.length - mean_l).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.length - mean_l) * (p.r_tot_w - mean_r))
        .sum();
    let spread = points
        .iter()
        .map(|p| (p.length - mean_l).abs())
        .fold(0.0, f64::max);
    if spread <= 1e-12 * mean_l {
        return Err(Error::Degenerate(
            "TLM needs at least two distinct channel lengths".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_r - slope * mean_l;
    let residual_norm = points
        .iter()
        .map(|p| (p.r_tot_w - intercept - slope * p.length).powi(2))
        .sum::<f64>()
        .sqrt();
    let transfer_length = intercept / slope;
    Ok(TlmResult {
        r_c_w: intercept,
        transfer_length,
        channel_slope: slope,
        residual_norm,
        physical: slope > 0.0 && intercept >= 0.0,
    })
}
