//! Zero-dimensional electrothermal model of organic permeable-base
//! transistors.
//!
//! The conductivity is thermally activated, `F(T) = exp(-(E_act/k_B)(1/T - 1/T_a))`,
//! and the on-state current follows a power law in voltage:
//!
//! ```text
//! I(V, T) = I_ref · (V/V_ref)^α · F₁(T) + I_off · F₂(T)
//! ```
//!
//! Heat flows to ambient through a constant substrate thermal resistance, so
//! a voltage-biased device sits at a temperature solving
//! `T = T_a + Θ_th · V · I(V, T)`. Strong activation makes this balance
//! multi-valued, which shows up under current drive as an S-shaped negative
//! differential resistance.

use serde::{Deserialize, Serialize};

use crate::constants::BOLTZMANN_EV;
use crate::exec::Execution;
use crate::{Error, Result};

/// Thermal activation factor relative to ambient.
pub fn activation_factor(e_act: f64, t: f64, t_ambient: f64) -> Result<f64> {
    if !(t > 0.0) || !(t_ambient > 0.0) {
        return Err(Error::domain(format!(
            "temperatures must be positive (T = {t} K, T_a = {t_ambient} K)"
        )));
    }
    Ok(activation(e_act, t, t_ambient))
}

#[inline]
fn activation(e_act: f64, t: f64, t_ambient: f64) -> f64 {
    (-(e_act / BOLTZMANN_EV) * (1.0 / t - 1.0 / t_ambient)).exp()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpbtThermalParams {
    pub i_ref: f64,
    pub v_ref: f64,
    pub alpha: f64,
    pub i_off: f64,
    /// Activation energy of the on-state term, eV.
    pub e_act_on: f64,
    /// Activation energy of the off-state term, eV.
    pub e_act_off: f64,
    /// Substrate thermal resistance, K/W.
    pub theta_th: f64,
    pub t_ambient: f64,
    /// Ceiling for the steady-state temperature search, K.
    #[serde(default = "default_t_max")]
    pub t_max: f64,
}

fn default_t_max() -> f64 {
    600.0
}

impl OpbtThermalParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.i_ref > 0.0, "i_ref > 0"),
            (self.v_ref > 0.0, "v_ref > 0"),
            (self.alpha >= 1.0, "alpha >= 1"),
            (self.i_off >= 0.0, "i_off >= 0"),
            (self.e_act_on >= 0.0 && self.e_act_off >= 0.0, "activation energies >= 0"),
            (self.theta_th >= 0.0, "theta_th >= 0"),
            (self.t_ambient > 0.0, "t_ambient > 0"),
            (self.t_max > self.t_ambient, "t_max > t_ambient"),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(Error::domain(format!("invalid thermal parameters: need {what}")));
            }
        }
        Ok(())
    }

    /// Current at voltage `v` and device temperature `t`.
    pub fn current_at(&self, v: f64, t: f64) -> f64 {
        let on = if v > 0.0 {
            self.i_ref * (v / self.v_ref).powf(self.alpha) * activation(self.e_act_on, t, self.t_ambient)
        } else {
            0.0
        };
        on + self.i_off * activation(self.e_act_off, t, self.t_ambient)
    }

    fn d_current_dt(&self, v: f64, t: f64) -> f64 {
        let k_on = self.e_act_on / BOLTZMANN_EV / (t * t);
        let k_off = self.e_act_off / BOLTZMANN_EV / (t * t);
        let on = if v > 0.0 {
            self.i_ref * (v / self.v_ref).powf(self.alpha) * activation(self.e_act_on, t, self.t_ambient)
        } else {
            0.0
        };
        on * k_on + self.i_off * activation(self.e_act_off, t, self.t_ambient) * k_off
    }

    /// Heat-balance residual `T - T_a - Θ·V·I(V,T)` in kelvin.
    pub fn balance_residual(&self, v: f64, t: f64) -> f64 {
        t - self.t_ambient - self.theta_th * v * self.current_at(v, t)
    }

    /// d/dT of the heat-balance residual. Positive means removed power grows
    /// faster than dissipated power: a stable operating point under voltage drive.
    pub fn balance_slope(&self, v: f64, t: f64) -> f64 {
        1.0 - self.theta_th * v * self.d_current_dt(v, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub voltage: f64,
    pub current: f64,
    pub temperature: f64,
    /// Stability under voltage drive.
    pub stable: bool,
}

impl OperatingPoint {
    pub fn power(&self) -> f64 {
        self.voltage * self.current
    }

    /// Heat-balance residual normalized by ambient temperature.
    pub fn normalized_residual(&self, p: &OpbtThermalParams) -> f64 {
        (self.temperature - p.t_ambient - p.theta_th * self.voltage * self.current).abs() / p.t_ambient
    }
}

/// Grid resolution for bracketing steady-state roots.
pub const STEADY_STATE_GRID: usize = 2000;

/// All steady-state operating points at voltage `v` with `T_a ≤ T ≤ T_max`,
/// ordered by temperature.
pub fn solve_steady_state(p: &OpbtThermalParams, v: f64) -> Result<Vec<OperatingPoint>> {
    p.validate()?;
    if !(v >= 0.0) {
        return Err(Error::domain(format!("voltage must be >= 0, got {v}")));
    }
    let g = |t: f64| p.balance_residual(v, t);
    let n = STEADY_STATE_GRID;
    let dt = (p.t_max - p.t_ambient) / (n - 1) as f64;
    let mut roots = Vec::new();
    let mut t_prev = p.t_ambient;
    let mut g_prev = g(t_prev);
    if g_prev == 0.0 {
        roots.push(t_prev);
    }
    for i in 1..n {
        let t = if i == n - 1 { p.t_max } else { p.t_ambient + i as f64 * dt };
        let gi = g(t);
        if gi == 0.0 {
            roots.push(t);
        } else if g_prev != 0.0 && (g_prev < 0.0) != (gi < 0.0) {
            roots.push(bisect(&g, t_prev, t, g_prev));
        }
        t_prev = t;
        g_prev = gi;
    }
    if roots.is_empty() {
        return Err(Error::ThermalRunaway {
            voltage: v,
            detail: format!(
                "dissipated power exceeds removable heat up to T_max = {} K (residual {:.3e} K there)",
                p.t_max, g_prev
            ),
        });
    }
    Ok(roots
        .into_iter()
        .map(|t| OperatingPoint {
            voltage: v,
            current: p.current_at(v, t),
            temperature: t,
            stable: p.balance_slope(v, t) > 0.0,
        })
        .collect())
}

/// Bisection down to floating-point resolution of the bracket.
fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut g_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Steady states for a vector of voltages, evaluated independently.
pub fn sweep_voltage(
    p: &OpbtThermalParams,
    voltages: &[f64],
    exec: Execution,
) -> Vec<Result<Vec<OperatingPoint>>> {
    exec.map(voltages, |&v| solve_steady_state(p, v))
}

const TRACE_MAX_ITER: usize = 400;

/// Operating point under current drive.
///
/// For a fixed current the voltage is a decreasing function of temperature,
/// so the heat balance has exactly one root in the temperature window where
/// the on-state term can carry the requested current.
pub fn current_controlled_point(p: &OpbtThermalParams, current: f64) -> Result<OperatingPoint> {
    if !(current > 0.0) {
        return Err(Error::domain(format!("current must be positive, got {current}")));
    }
    let voltage_at = |t: f64| -> Option<f64> {
        let on = current - p.i_off * activation(p.e_act_off, t, p.t_ambient);
        if on <= 0.0 {
            return None;
        }
        let f1 = activation(p.e_act_on, t, p.t_ambient);
        Some(p.v_ref * (on / (p.i_ref * f1)).powf(1.0 / p.alpha))
    };
    let h = |t: f64| -> f64 {
        match voltage_at(t) {
            Some(v) => t - p.t_ambient - p.theta_th * v * current,
            // beyond the window the off-current alone exceeds the drive: V = 0
            None => t - p.t_ambient,
        }
    };
    if voltage_at(p.t_ambient).is_none() {
        return Err(Error::domain(format!(
            "current {current} A is below the off-state current at ambient"
        )));
    }
    let mut lo = p.t_ambient;
    let h_lo = h(lo);
    let t = if h_lo >= 0.0 {
        lo
    } else {
        let mut hi = p.t_max;
        if h(hi) < 0.0 {
            return Err(Error::ThermalRunaway {
                voltage: voltage_at(hi).unwrap_or(0.0),
                detail: format!("no steady state below T_max = {} K at I = {current} A", p.t_max),
            });
        }
        let mut iter = 0;
        while hi - lo > 1e-12 * hi {
            iter += 1;
            if iter > TRACE_MAX_ITER {
                return Err(Error::NonConvergence {
                    iterations: iter,
                    detail: format!("current-controlled bisection at I = {current} A, bracket [{lo}, {hi}] K"),
                });
            }
            let mid = 0.5 * (lo + hi);
            if h(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let v = voltage_at(t).ok_or_else(|| Error::NonConvergence {
        iterations: 0,
        detail: format!("root at T = {t} K falls outside the conduction window"),
    })?;
    Ok(OperatingPoint {
        voltage: v,
        current,
        temperature: t,
        stable: p.balance_slope(v, t) > 0.0,
    })
}

/// Traces V(I) under current drive, one independent solve per current.
pub fn trace_current_controlled(
    p: &OpbtThermalParams,
    currents: &[f64],
    exec: Execution,
) -> Result<Vec<OperatingPoint>> {
    p.validate()?;
    if currents.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("currents must be strictly ascending"));
    }
    exec.map(currents, |&i| current_controlled_point(p, i))
        .into_iter()
        .collect()
}

/// Indices where dV/dI changes sign along a traced curve.
pub fn ndr_turning_points(trace: &[OperatingPoint]) -> Vec<usize> {
    let slopes: Vec<f64> = trace
        .windows(2)
        .map(|w| (w[1].voltage - w[0].voltage) / (w[1].current - w[0].current))
        .collect();
    slopes
        .windows(2)
        .enumerate()
        .filter(|(_, s)| (s[0] > 0.0) != (s[1] > 0.0))
        .map(|(i, _)| i + 1)
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PulseSpec {
    /// On-time per period, s.
    pub pulse_width: f64,
    /// On-time over period, in (0, 1].
    pub duty_cycle: f64,
    /// Lumped heat capacity of the device, J/K.
    pub thermal_capacitance: f64,
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.pulse_width > 0.0) {
            return Err(Error::domain("pulse width must be positive"));
        }
        if !(self.duty_cycle > 0.0 && self.duty_cycle <= 1.0) {
            return Err(Error::domain("duty cycle must lie in (0, 1]"));
        }
        if !(self.thermal_capacitance > 0.0) {
            return Err(Error::domain("thermal capacitance must be positive"));
        }
        Ok(())
    }
}

/// Peak temperature change per period below which the pulse train is
/// considered periodic, K.
pub const PERIODIC_TOLERANCE: f64 = 1e-6;
const MAX_PERIODS: usize = 100_000;

/// Peak temperature of the periodic steady state under a voltage pulse train.
///
/// The device is a single thermal pole (Θ_th, C_th) heated by `V·I(V, T)`
/// while the pulse is on. Periods are stepped with RK4 during the pulse and
/// the exact exponential relaxation between pulses. Period iteration is
/// accelerated with Aitken extrapolation once the sequence contracts
/// monotonically; it stops when the peak moves less than
/// [`PERIODIC_TOLERANCE`] over one period.
pub fn pulsed_steady_temperature(p: &OpbtThermalParams, pulse: &PulseSpec, v: f64) -> Result<f64> {
    p.validate()?;
    pulse.validate()?;
    if !(v >= 0.0) {
        return Err(Error::domain(format!("voltage must be >= 0, got {v}")));
    }
    if p.theta_th == 0.0 {
        return Ok(p.t_ambient);
    }
    let tau = p.theta_th * pulse.thermal_capacitance;
    let period = pulse.pulse_width / pulse.duty_cycle;
    let off = period - pulse.pulse_width;
    let steps = ((pulse.pulse_width / tau) * 400.0).ceil().clamp(64.0, 200_000.0) as usize;
    let h = pulse.pulse_width / steps as f64;

    let rhs = |t: f64| (v * p.current_at(v, t) - (t - p.t_ambient) / p.theta_th) / pulse.thermal_capacitance;
    // start of period -> end of pulse
    let heat = |mut t: f64| -> Result<f64> {
        for _ in 0..steps {
            let k1 = rhs(t);
            let k2 = rhs(t + 0.5 * h * k1);
            let k3 = rhs(t + 0.5 * h * k2);
            let k4 = rhs(t + h * k3);
            t += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if !(t < p.t_max) {
                return Err(Error::ThermalRunaway {
                    voltage: v,
                    detail: format!("temperature passed T_max = {} K during a pulse", p.t_max),
                });
            }
        }
        Ok(t)
    };
    let relax = |t: f64| p.t_ambient + (t - p.t_ambient) * (-off / tau).exp();

    // start-of-period temperature -> (peak, next start)
    let period_map = |s: f64| -> Result<(f64, f64)> {
        let peak = heat(s)?;
        Ok((peak, relax(peak)))
    };

    let mut s = p.t_ambient;
    let (mut peak, mut next) = period_map(s)?;
    let mut last_ratio: Option<f64> = None;
    for _ in 0..MAX_PERIODS {
        let (peak2, next2) = period_map(next)?;
        if (peak2 - peak).abs() < PERIODIC_TOLERANCE {
            return Ok(peak2);
        }
        let (d1, d2) = (next - s, next2 - next);
        let ratio = d2 / d1;
        let steady_contraction = ratio > 0.0
            && ratio < 1.0
            && last_ratio.is_some_and(|r| (r - ratio).abs() < 0.1 * ratio);
        last_ratio = Some(ratio);
        if steady_contraction {
            // geometric tail: jump to the limit of the start temperatures
            let jumped = next2 + d2 * ratio / (1.0 - ratio);
            if jumped.is_finite() && jumped > p.t_ambient && jumped < p.t_max {
                s = jumped;
                (peak, next) = period_map(s)?;
                last_ratio = None;
                continue;
            }
        }
        s = next;
        peak = peak2;
        next = next2;
    }
    Err(Error::NonConvergence {
        iterations: MAX_PERIODS,
        detail: format!("pulse train at V = {v} V did not become periodic (start {s} K)"),
    })
}
