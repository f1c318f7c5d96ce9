//! Bernards-type model of organic electrochemical transistors.
//!
//! The device is split into an ionic RC circuit and an electronic resistor
//! chain coupled through the double-layer capacitance. This yields closed
//! forms for the steady-state current, the transient after a gate step, and
//! the two time constants. Sensing helpers convert between ion concentration
//! and Nernst/turn-off-voltage shifts.

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_10;

use crate::constants::{thermal_voltage, ELEMENTARY_CHARGE};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OectParams {
    /// Hole mobility, m²/(V·s).
    pub mobility: f64,
    /// Initial volumetric hole density, 1/m³.
    pub p0: f64,
    /// Semiconductor film thickness, m.
    pub t_osc: f64,
    pub width: f64,
    pub length: f64,
    /// Double-layer capacitance per area, F/m².
    pub c_d: f64,
    /// Spatial non-uniformity of de-doping, in [0, 1].
    pub f_nonuniform: f64,
    /// Gate to channel distance, m.
    pub gate_distance: f64,
    /// Calibration constant of the ionic time constant, s·m⁻¹·(mol/l)^½.
    pub kappa_ionic: f64,
}

impl OectParams {
    /// PEDOT:PSS-like film: p₀ = 10²⁶ m⁻³, 100 nm thick, W/L = 100/10 µm.
    pub fn pedot_pss() -> Self {
        OectParams {
            mobility: 1e-4,
            p0: 1e26,
            t_osc: 100e-9,
            width: 100e-6,
            length: 10e-6,
            c_d: 1e-2,
            f_nonuniform: 0.5,
            gate_distance: 1e-3,
            kappa_ionic: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mobility", self.mobility),
            ("p0", self.p0),
            ("t_osc", self.t_osc),
            ("width", self.width),
            ("length", self.length),
            ("c_d", self.c_d),
            ("gate_distance", self.gate_distance),
            ("kappa_ionic", self.kappa_ionic),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.f_nonuniform) {
            return Err(Error::domain(format!(
                "f_nonuniform must lie in [0, 1], got {}",
                self.f_nonuniform
            )));
        }
        Ok(())
    }

    /// e·p₀·t_OSC/c_d, V.
    pub fn pinch_off_voltage(&self) -> f64 {
        ELEMENTARY_CHARGE * self.p0 * self.t_osc / self.c_d
    }

    /// Channel conductance at zero gate bias, µ·e·p₀·t_OSC·W/L, S.
    pub fn conductance(&self) -> f64 {
        self.mobility * ELEMENTARY_CHARGE * self.p0 * self.t_osc * self.width / self.length
    }

    /// Steady-state drain current.
    ///
    /// The linear form applies for `v_ds <= v_gs`, the saturated form above;
    /// both agree at `v_ds == v_gs`.
    pub fn steady_state_current(&self, v_gs: f64, v_ds: f64) -> f64 {
        let g0 = self.conductance();
        let vp = self.pinch_off_voltage();
        if v_ds <= v_gs {
            g0 * (1.0 - (v_gs - 0.5 * v_ds) / vp) * v_ds
        } else {
            g0 * (v_ds - v_gs * v_gs / (2.0 * vp))
        }
    }

    /// Electronic transit time L²/(µ·|V_DS|) and ionic RC time κ·l/√c.
    pub fn time_constants(&self, v_ds: f64, electrolyte: &ElectrolyteSpec) -> Result<(f64, f64)> {
        if v_ds == 0.0 || !v_ds.is_finite() {
            return Err(Error::domain("transit time needs a non-zero drain voltage"));
        }
        electrolyte.validate()?;
        let tau_e = self.length * self.length / (self.mobility * v_ds.abs());
        let tau_i = self.kappa_ionic * self.gate_distance / electrolyte.concentration.sqrt();
        Ok((tau_e, tau_i))
    }

    /// Drain current `t` seconds after a gate step.
    ///
    /// `i_ss` is the steady-state current at the new gate bias and `delta_i_ss`
    /// the difference I_SS(V_GS = 0) − I_SS(V_GS).
    pub fn transient_current(&self, t: f64, i_ss: f64, delta_i_ss: f64, tau_e: f64, tau_i: f64) -> Result<f64> {
        transient_current(self.f_nonuniform, t, i_ss, delta_i_ss, tau_e, tau_i)
    }
}

/// Transient response for an explicit non-uniformity factor `f`.
pub fn transient_current(f: f64, t: f64, i_ss: f64, delta_i_ss: f64, tau_e: f64, tau_i: f64) -> Result<f64> {
    if !(tau_e > 0.0 && tau_i > 0.0) {
        return Err(Error::domain("time constants must be positive"));
    }
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    Ok(i_ss + delta_i_ss * transient_prefactor(f, tau_e, tau_i) * (-t / tau_i).exp())
}

/// `1 - f·τ_e/τ_i`; negative values give a spike before settling.
pub fn transient_prefactor(f: f64, tau_e: f64, tau_i: f64) -> f64 {
    1.0 - f * tau_e / tau_i
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TransientShape {
    /// Starts on the I_SS + ΔI_SS side and relaxes monotonically.
    Monotone,
    /// Prefactor vanishes; the current sits at I_SS.
    Flat,
    /// Starts beyond I_SS on the opposite side and relaxes back.
    Spike,
}

pub fn classify_transient(f: f64, tau_e: f64, tau_i: f64) -> TransientShape {
    let a = transient_prefactor(f, tau_e, tau_i);
    if a > 0.0 {
        TransientShape::Monotone
    } else if a < 0.0 {
        TransientShape::Spike
    } else {
        TransientShape::Flat
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ElectrolyteSpec {
    /// mol/l
    pub concentration: f64,
    /// Charge number of the transferred species.
    pub valence: i32,
    /// K
    pub temperature: f64,
}

impl ElectrolyteSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.concentration > 0.0) {
            return Err(Error::domain("concentration must be positive"));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::domain("temperature must be positive"));
        }
        if self.valence == 0 {
            return Err(Error::domain("valence must be non-zero"));
        }
        Ok(())
    }
}

/// Electrochemical potential after a Nernst shift, in volts (numerically eV
/// per elementary charge).
pub fn nernst_potential(e_f0: f64, electrolyte: &ElectrolyteSpec, activity_ratio: f64) -> Result<f64> {
    electrolyte.validate()?;
    if !(activity_ratio > 0.0) {
        return Err(Error::domain(format!("activity ratio must be positive, got {activity_ratio}")));
    }
    Ok(e_f0 + thermal_voltage(electrolyte.temperature) / electrolyte.valence as f64 * activity_ratio.ln())
}

/// Ideal Nernst sensitivity k_B·T·ln(10)/(z·e), V/decade.
pub fn nernst_slope(temperature: f64, valence: i32) -> f64 {
    thermal_voltage(temperature) * LN_10 / valence as f64
}

/// Turn-off voltage on a calibrated logarithmic sensing curve.
pub fn turn_off_voltage(c: f64, slope: f64, v_ref: f64, c_ref: f64) -> Result<f64> {
    if !(c > 0.0 && c_ref > 0.0) {
        return Err(Error::domain(format!("concentrations must be positive (c = {c}, c_ref = {c_ref})")));
    }
    Ok(v_ref - slope * (c / c_ref).log10())
}

/// Inverse of [`turn_off_voltage`].
pub fn concentration_from_turn_off(v_to: f64, slope: f64, v_ref: f64, c_ref: f64) -> Result<f64> {
    if slope == 0.0 {
        return Err(Error::domain("zero sensitivity cannot be inverted"));
    }
    Ok(c_ref * 10f64.powf((v_ref - v_to) / slope))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn pedot() -> OectParams {
        OectParams::pedot_pss()
    }

    #[test]
    fn pinch_off_hand_value() {
        let p = pedot();
        assert_relative_eq!(p.pinch_off_voltage(), 160.217_663_4, max_relative = 1e-9);
        let mut q = pedot();
        q.t_osc *= 2.0;
        assert_relative_eq!(q.pinch_off_voltage(), 2.0 * p.pinch_off_voltage());
        q.c_d = 1e12;
        assert!(q.pinch_off_voltage() < 1e-9);
    }

    #[test]
    fn branches_meet_on_the_diagonal() {
        let p = pedot();
        let vp = p.pinch_off_voltage();
        for v in [0.0, 0.1 * vp, 0.5 * vp, vp, -0.3 * vp] {
            let g0 = p.conductance();
            let lin = g0 * (1.0 - (v - 0.5 * v) / vp) * v;
            let sat = g0 * (v - v * v / (2.0 * vp));
            assert_relative_eq!(lin, sat, max_relative = 1e-14, epsilon = 1e-300);
            assert_relative_eq!(p.steady_state_current(v, v), lin, max_relative = 1e-14, epsilon = 1e-300);
        }
    }

    #[test]
    fn small_drain_bias_expansion() {
        let p = pedot();
        let vp = p.pinch_off_voltage();
        let g0 = p.conductance();
        // on the linear branch the expansion is exact
        let v = -0.01 * vp;
        assert_relative_eq!(p.steady_state_current(0.0, v), g0 * v * (1.0 + v / (2.0 * vp)), max_relative = 1e-13);
        // positive drain bias sits on the saturated branch, within half a percent
        let v = 0.01 * vp;
        let approx = g0 * v * (1.0 + v / (2.0 * vp));
        assert_relative_eq!(p.steady_state_current(0.0, v), approx, max_relative = 6e-3);
    }

    #[test]
    fn saturation_at_pinch_off() {
        let p = pedot();
        let vp = p.pinch_off_voltage();
        let vds = 10.0 * vp;
        assert_relative_eq!(p.steady_state_current(vp, vds), p.conductance() * (vds - 0.5 * vp), max_relative = 1e-13);
    }

    #[test]
    fn transient_limits() {
        let i = transient_current(0.5, 1e6, 1e-3, 2e-4, 1e-3, 1e-2).unwrap();
        assert_relative_eq!(i, 1e-3);
        // f·τe/τi = 1 cancels the exponential exactly
        for t in [0.0, 1e-4, 1e-2, 1.0] {
            assert_eq!(transient_current(0.5, t, 1e-3, 2e-4, 2e-2, 1e-2).unwrap(), 1e-3);
        }
        // f·τe/τi = 2: starts below I_SS although ΔI_SS > 0
        let i0 = transient_current(1.0, 0.0, 1e-3, 2e-4, 2e-2, 1e-2).unwrap();
        assert!(i0 < 1e-3);
        assert_relative_eq!(i0, 1e-3 - 2e-4);
        assert!(transient_current(0.5, -1.0, 1e-3, 2e-4, 1e-3, 1e-2).is_err());
        assert!(transient_current(0.5, 0.0, 1e-3, 2e-4, 0.0, 1e-2).is_err());
    }

    #[test]
    fn time_constant_scaling() {
        let p = pedot();
        let el = ElectrolyteSpec { concentration: 0.1, valence: 1, temperature: 293.15 };
        let (te, ti) = p.time_constants(1.0, &el).unwrap();
        assert_relative_eq!(te, 1e-6, max_relative = 1e-12);
        let mut q = pedot();
        q.length *= 2.0;
        assert_relative_eq!(q.time_constants(1.0, &el).unwrap().0, 4.0 * te, max_relative = 1e-12);
        let el4 = ElectrolyteSpec { concentration: 0.4, ..el };
        assert_relative_eq!(p.time_constants(1.0, &el4).unwrap().1, 0.5 * ti, max_relative = 1e-12);
        assert!(p.time_constants(0.0, &el).is_err());
    }

    #[test]
    fn nernst_shift() {
        let el = ElectrolyteSpec { concentration: 0.1, valence: 1, temperature: 293.15 };
        assert_eq!(nernst_potential(0.2, &el, 1.0).unwrap(), 0.2);
        let shift = nernst_potential(0.0, &el, 10.0).unwrap();
        assert!((shift - 0.0582).abs() < 1e-4, "{shift}");
        let neg = ElectrolyteSpec { valence: -1, ..el };
        assert_relative_eq!(nernst_potential(0.0, &neg, 10.0).unwrap(), -shift);
        assert!(nernst_potential(0.0, &el, 0.0).is_err());
        assert_relative_eq!(nernst_slope(293.15, 1), shift, max_relative = 1e-12);
    }

    #[test]
    fn turn_off_examples() {
        assert_eq!(turn_off_voltage(1e-3, 0.1, 0.4, 1e-3).unwrap(), 0.4);
        assert_relative_eq!(turn_off_voltage(1e-2, 0.1, 0.4, 1e-3).unwrap(), 0.3, max_relative = 1e-12);
        assert_relative_eq!(turn_off_voltage(1e-5, 0.1, 0.4, 1e-3).unwrap(), 0.6, max_relative = 1e-12);
        assert!(turn_off_voltage(0.0, 0.1, 0.4, 1e-3).is_err());
        let c = concentration_from_turn_off(0.3, 0.1, 0.4, 1e-3).unwrap();
        assert_relative_eq!(c, 1e-2, max_relative = 1e-12);
    }

    #[test]
    fn validation() {
        let mut p = pedot();
        p.f_nonuniform = 1.5;
        assert!(p.validate().is_err());
        assert!(pedot().validate().is_ok());
    }
}
