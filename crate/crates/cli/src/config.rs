//! Run configuration: one TOML file with an optional section per model.
//!
//! Every section has defaults, so a run needs no file at all. Values are SI.

use std::path::Path;

use otkit::electrothermal::{OpbtThermalParams, PulseSpec};
use otkit::impedance::{Boundary, CircuitModel, FitOptions, RcElement, WarburgParams};
use otkit::oect::{ElectrolyteSpec, OectParams};
use otkit::reservoir::{IrisConfig, Nonlinearity, OectTransfer};
use otkit::synapse::{DecayModel, DigitConfig, GrowthRule, PavlovConfig, PlasticityWindows};
use otkit::tft::{Polarity, TftParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Evenly spaced (or log-spaced) points, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub log: bool,
}

impl Sweep {
    pub const fn linear(start: f64, stop: f64, points: usize) -> Self {
        Sweep { start, stop, points, log: false }
    }

    pub const fn logarithmic(start: f64, stop: f64, points: usize) -> Self {
        Sweep { start, stop, points, log: true }
    }

    pub fn values(&self, name: &str) -> CliResult<Vec<f64>> {
        if self.points == 0 || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::config(format!("{name}: sweep needs finite ends and at least one point")));
        }
        if self.log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(CliError::config(format!("{name}: logarithmic sweep needs positive ends")));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let n = (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|k| {
                let s = k as f64 / n;
                if self.log {
                    self.start * (self.stop / self.start).powf(s)
                } else {
                    self.start + (self.stop - self.start) * s
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tft: TftSection,
    pub opbt: OpbtSection,
    pub oect: OectSection,
    pub impedance: ImpedanceSection,
    pub reservoir: ReservoirSection,
    pub synapse: SynapseSection,
}

impl RunConfig {
    pub fn parse(text: &str, source: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::config(format!("{source}: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| CliError::config(format!("{}: not valid UTF-8", path.display())))?;
        Ok((Self::parse(text, &path.display().to_string())?, bytes))
    }

    /// Canonical TOML of the configuration with all defaults filled in.
    pub fn effective(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::config(format!("cannot serialize configuration: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TftSection {
    pub device: TftParams,
    pub v_gs: Sweep,
    /// Drain biases of the transfer curves, V.
    pub v_ds_transfer: Vec<f64>,
    pub v_ds: Sweep,
    /// Gate biases of the output curves, V.
    pub v_gs_output: Vec<f64>,
}

impl Default for TftSection {
    fn default() -> Self {
        TftSection {
            device: TftParams {
                mobility: 1e-4,
                c_ins: 5e-4,
                width: 1e-3,
                length: 20e-6,
                v_th: 1.0,
                overlap: 5e-6,
                subthreshold_slope: 0.2,
                polarity: Polarity::N,
                temperature: 298.15,
                stitch_overdrive: 1e-3,
            },
            v_gs: Sweep::linear(-5.0, 20.0, 251),
            v_ds_transfer: vec![1.0, 20.0],
            v_ds: Sweep::linear(0.0, 20.0, 201),
            v_gs_output: vec![5.0, 10.0, 15.0, 20.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpbtSection {
    pub device: OpbtThermalParams,
    pub voltages: Sweep,
    pub currents: Sweep,
    pub pulse: PulseSpec,
    pub pulse_voltages: Sweep,
}

impl Default for OpbtSection {
    fn default() -> Self {
        OpbtSection {
            device: OpbtThermalParams {
                i_ref: 1e-3,
                v_ref: 1.0,
                alpha: 2.0,
                i_off: 1e-7,
                e_act_on: 0.3,
                e_act_off: 0.3,
                theta_th: 1e4,
                t_ambient: 293.15,
                t_max: 600.0,
            },
            voltages: Sweep::linear(0.05, 1.2, 116),
            currents: Sweep::logarithmic(1e-4, 5e-2, 121),
            pulse: PulseSpec { pulse_width: 1e-3, duty_cycle: 0.3, thermal_capacitance: 1e-6 },
            pulse_voltages: Sweep::linear(0.1, 1.2, 12),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OectSection {
    pub device: OectParams,
    pub electrolyte: ElectrolyteSpec,
    pub v_gs_output: Vec<f64>,
    pub v_ds: Sweep,
    pub transient: TransientSection,
    pub sensing: SensingSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransientSection {
    /// Gate voltage applied at t = 0, V.
    pub v_gs: f64,
    pub v_ds: f64,
    pub time: Sweep,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensingSection {
    /// V/decade.
    pub slope: f64,
    pub v_ref: f64,
    pub c_ref: f64,
    pub concentrations: Sweep,
}

impl Default for OectSection {
    fn default() -> Self {
        OectSection {
            device: OectParams::pedot_pss(),
            electrolyte: ElectrolyteSpec { concentration: 0.1, valence: 1, temperature: 293.15 },
            v_gs_output: vec![0.0, 40.0, 80.0, 120.0],
            v_ds: Sweep::linear(0.0, 200.0, 201),
            transient: TransientSection::default(),
            sensing: SensingSection::default(),
        }
    }
}

impl Default for TransientSection {
    fn default() -> Self {
        TransientSection { v_gs: 40.0, v_ds: 10.0, time: Sweep::linear(0.0, 0.02, 401) }
    }
}

impl Default for SensingSection {
    fn default() -> Self {
        SensingSection { slope: 0.1, v_ref: 0.4, c_ref: 1e-3, concentrations: Sweep::logarithmic(1e-6, 1.0, 61) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpedanceSection {
    /// Model used by `simulate`, and the default fit guess.
    pub model: CircuitModel,
    pub omega: Sweep,
    /// Relative multiplicative noise added by `simulate`.
    pub noise: f64,
    pub guess: Option<CircuitModel>,
    pub fit: FitOptions,
    /// Electrode spacing b used to turn ω_D into a diffusion constant, m.
    pub electrode_distance: f64,
}

impl Default for ImpedanceSection {
    fn default() -> Self {
        ImpedanceSection {
            model: CircuitModel {
                r_s: 200.0,
                rc1: RcElement { r: 2e3, c: 5e-9 },
                rc2: RcElement { r: 1e3, c: 1e-6 },
                warburg: WarburgParams { r_w: 1e5, omega_d: 0.1, exponent: 0.4, boundary: Boundary::Reflecting },
            },
            omega: Sweep::logarithmic(1e-4, 1e7, 111),
            noise: 0.0,
            guess: None,
            fit: FitOptions::default(),
            electrode_distance: 100e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Logistic,
    Oect,
}

/// OECT used as the reservoir's nonlinear node.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OectNode {
    pub device: OectParams,
    /// Drain bias as a fraction of the pinch-off voltage.
    pub v_ds_fraction: f64,
}

impl Default for OectNode {
    fn default() -> Self {
        OectNode { device: OectParams::pedot_pss(), v_ds_fraction: -0.1 }
    }
}

impl OectNode {
    pub fn nonlinearity(&self, kind: NodeKind) -> Nonlinearity {
        match kind {
            NodeKind::Logistic => Nonlinearity::Logistic,
            NodeKind::Oect => {
                let v_ds = self.v_ds_fraction * self.device.pinch_off_voltage();
                Nonlinearity::Oect(OectTransfer::spanning(self.device, v_ds))
            }
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReservoirSection {
    pub oect: OectNode,
    pub delay: DelaySection,
    pub bifurcation: BifurcationSection,
    pub iris: IrisSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelaySection {
    pub node: NodeKind,
    pub tau_nl: f64,
    pub tau: f64,
    pub gain: f64,
    pub step: f64,
    /// Constant history on [−τ, 0].
    pub history: f64,
    pub horizon: f64,
    /// Time discarded before the phase portrait, s.
    pub transient: f64,
    pub box_eps_min: f64,
    pub box_eps_max: f64,
    pub box_scales: usize,
}

impl Default for DelaySection {
    fn default() -> Self {
        DelaySection {
            node: NodeKind::Logistic,
            tau_nl: 0.03,
            tau: 1.0,
            gain: 3.8,
            step: 1e-3,
            history: 0.3,
            horizon: 600.0,
            transient: 100.0,
            box_eps_min: 1.0 / 256.0,
            box_eps_max: 1.0 / 16.0,
            box_scales: 6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BifurcationSection {
    pub node: NodeKind,
    pub gains: Sweep,
    pub n_transient: usize,
    pub n_sample: usize,
    pub history: f64,
    /// Distinct-value tolerance for locating the first period doubling.
    pub tolerance: f64,
}

impl Default for BifurcationSection {
    fn default() -> Self {
        BifurcationSection {
            node: NodeKind::Logistic,
            gains: Sweep::linear(2.5, 4.0, 301),
            n_transient: 5000,
            n_sample: 64,
            history: 0.3,
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IrisSection {
    pub node: NodeKind,
    pub tau_nl: f64,
    pub tau: f64,
    pub gain: f64,
    pub n_virtual_nodes: usize,
    pub steps_per_node: usize,
    pub input_scale: f64,
    pub mask_seed: u64,
    pub skip_periods: usize,
    pub sample_periods: usize,
    pub ridge: f64,
    pub n_train: usize,
}

impl Default for IrisSection {
    fn default() -> Self {
        let d = IrisConfig::default();
        IrisSection {
            node: NodeKind::Oect,
            tau_nl: d.tau_nl,
            tau: d.tau,
            gain: d.gain,
            n_virtual_nodes: d.n_virtual_nodes,
            steps_per_node: d.steps_per_node,
            input_scale: d.input_scale,
            mask_seed: d.mask_seed,
            skip_periods: d.skip_periods,
            sample_periods: d.sample_periods,
            ridge: d.ridge,
            n_train: d.n_train,
        }
    }
}

impl IrisSection {
    pub fn to_config(&self, node: &OectNode) -> IrisConfig {
        IrisConfig {
            tau_nl: self.tau_nl,
            tau: self.tau,
            gain: self.gain,
            nonlinearity: node.nonlinearity(self.node),
            n_virtual_nodes: self.n_virtual_nodes,
            steps_per_node: self.steps_per_node,
            input_scale: self.input_scale,
            mask_seed: self.mask_seed,
            skip_periods: self.skip_periods,
            sample_periods: self.sample_periods,
            ridge: self.ridge,
            n_train: self.n_train,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynapseSection {
    /// Growth rule of the conditioning network.
    pub rule: GrowthRule,
    pub pavlov: PavlovConfig,
    pub digits: DigitConfig,
    pub windows: PlasticityWindows,
    pub decay: DecayModel,
    pub decay_hours: Sweep,
    pub reinforcement: Vec<f64>,
}

impl Default for SynapseSection {
    fn default() -> Self {
        SynapseSection {
            rule: GrowthRule::default(),
            pavlov: PavlovConfig::default(),
            digits: DigitConfig::default(),
            windows: PlasticityWindows::default(),
            decay: DecayModel::calibrated(),
            decay_hours: Sweep::linear(0.0, 96.0, 97),
            reinforcement: vec![0.05, 0.5, 1.0],
        }
    }
}
