//! Single-node delayed-feedback reservoir.
//!
//! The node obeys τ_NL·ẏ(t) + y(t) = λ·f(y(t−τ), x(t)); in the adiabatic limit
//! this collapses to the map yₖ = λ·f(yₖ₋₁, xₖ). Virtual nodes are obtained by
//! time-multiplexing the input with a mask over one delay period.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::oect::OectParams;
use crate::{Error, Result};

/// Instantaneous input seen by the node: a source-drain drive and an
/// additive gate perturbation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    pub drive: f64,
    pub gate: f64,
}

impl Stimulus {
    pub const ZERO: Stimulus = Stimulus { drive: 0.0, gate: 0.0 };

    pub fn total(&self) -> f64 {
        self.drive + self.gate
    }
}

pub type TransferFn = Arc<dyn Fn(f64, Stimulus) -> f64 + Send + Sync>;

/// Normalized OECT transfer used as a node nonlinearity.
///
/// The fed-back value sets the gate voltage, the gate perturbation adds to it
/// and the drive modulates the drain voltage around `v_ds`. The output is the
/// steady-state drain current relative to its value at zero gate bias,
/// clipped to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OectTransfer {
    pub device: OectParams,
    pub v_ds: f64,
    pub v_gs_bias: f64,
    /// Gate volts per unit of node state.
    pub v_gs_scale: f64,
}

impl OectTransfer {
    /// Gate scale set to the pinch-off voltage, so node states in [0, 1]
    /// sweep the full depletion range.
    pub fn spanning(device: OectParams, v_ds: f64) -> Self {
        OectTransfer { v_gs_scale: device.pinch_off_voltage(), device, v_ds, v_gs_bias: 0.0 }
    }

    pub fn evaluate(&self, feedback: f64, input: Stimulus) -> f64 {
        let v_gs = self.v_gs_bias + self.v_gs_scale * (feedback + input.gate);
        let v_ds = self.v_ds * (1.0 + input.drive);
        let reference = self.device.steady_state_current(0.0, self.v_ds);
        if reference == 0.0 {
            return 0.0;
        }
        (self.device.steady_state_current(v_gs, v_ds) / reference).clamp(0.0, 1.0)
    }
}

#[derive(Clone)]
pub enum Nonlinearity {
    /// z·(1 − z) with z = feedback + drive + gate.
    Logistic,
    Oect(OectTransfer),
    Custom(TransferFn),
}

impl Nonlinearity {
    pub fn custom(f: impl Fn(f64, Stimulus) -> f64 + Send + Sync + 'static) -> Self {
        Nonlinearity::Custom(Arc::new(f))
    }

    pub fn evaluate(&self, feedback: f64, input: Stimulus) -> f64 {
        match self {
            Nonlinearity::Logistic => {
                let z = feedback + input.total();
                z * (1.0 - z)
            }
            Nonlinearity::Oect(t) => t.evaluate(feedback, input),
            Nonlinearity::Custom(f) => f(feedback, input),
        }
    }
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nonlinearity::Logistic => write!(f, "Logistic"),
            Nonlinearity::Oect(t) => f.debug_tuple("Oect").field(t).finish(),
            Nonlinearity::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Initial function on [−τ, 0]. Functions are sampled on the step grid down
/// to one step before −τ.
#[derive(Clone)]
pub enum History {
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl History {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            History::Constant(v) => *v,
            History::Function(f) => f(t),
        }
    }
}

impl fmt::Debug for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            History::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            History::Function(_) => write!(f, "Function(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DelayFeedbackConfig {
    /// Intrinsic response time τ_NL, s. Zero gives the algebraic limit.
    pub tau_nl: f64,
    /// Delay-line time τ, s.
    pub tau: f64,
    /// Feedback gain λ.
    pub gain: f64,
    pub nonlinearity: Nonlinearity,
    /// Integrator step, s.
    pub step: f64,
    pub history: History,
    /// Divergence bound on |y|.
    pub bound: f64,
}

impl DelayFeedbackConfig {
    pub fn new(tau_nl: f64, tau: f64, gain: f64, nonlinearity: Nonlinearity) -> Self {
        DelayFeedbackConfig {
            tau_nl,
            tau,
            gain,
            nonlinearity,
            step: tau / 100.0,
            history: History::Constant(0.0),
            bound: 1e6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!("delay time must be positive, got {}", self.tau)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("step must be positive, got {}", self.step)));
        }
        if self.step > self.tau / 50.0 * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "step {} exceeds tau/50 = {}",
                self.step,
                self.tau / 50.0
            )));
        }
        if !(self.tau_nl >= 0.0 && self.tau_nl.is_finite()) {
            return Err(Error::Config(format!("tau_nl must be >= 0, got {}", self.tau_nl)));
        }
        if !self.gain.is_finite() {
            return Err(Error::Config("gain must be finite".into()));
        }
        if !(self.bound > 0.0) {
            return Err(Error::Config("divergence bound must be positive".into()));
        }
        Ok(())
    }
}

/// Uniformly sampled solution, `values[n] = y(n·step)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub step: f64,
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn span(&self) -> f64 {
        self.step * (self.values.len().saturating_sub(1)) as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.step
    }

    /// Linear interpolation, clamped to the sampled range.
    pub fn value_at(&self, t: f64) -> f64 {
        let last = self.values.len() - 1;
        let mut x = (t / self.step).clamp(0.0, last as f64);
        if (x - x.round()).abs() < 1e-9 {
            x = x.round();
        }
        let i = (x.floor() as usize).min(last);
        if i == last {
            return self.values[last];
        }
        let frac = x - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    pub fn sup_distance(&self, other: &Trajectory, times: &[f64]) -> f64 {
        times
            .iter()
            .map(|&t| (self.value_at(t) - other.value_at(t)).abs())
            .fold(0.0, f64::max)
    }
}

/// Stepper with a ring buffer of the last ⌈τ/h⌉ + 2 values.
struct DelayLine {
    buf: Vec<f64>,
    head: usize,
    lag: usize,
    frac: f64,
}

impl DelayLine {
    fn new(cfg: &DelayFeedbackConfig) -> Self {
        let d = cfg.tau / cfg.step;
        let mut lag = d.floor() as usize;
        let mut frac = d - lag as f64;
        if frac > 1.0 - 1e-9 {
            lag += 1;
            frac = 0.0;
        } else if frac < 1e-9 {
            frac = 0.0;
        }
        let cap = lag + 2;
        // buf[(head - k) mod cap] holds y(t_n - k·h)
        let mut buf = vec![0.0; cap];
        for k in 0..cap {
            let t = -(k as f64) * cfg.step;
            buf[(cap - k) % cap] = cfg.history.at(t);
        }
        DelayLine { buf, head: 0, lag, frac }
    }

    fn back(&self, k: usize) -> f64 {
        let cap = self.buf.len();
        self.buf[(self.head + cap - k) % cap]
    }

    fn delayed(&self) -> f64 {
        let a = self.back(self.lag);
        if self.frac == 0.0 {
            a
        } else {
            a * (1.0 - self.frac) + self.back(self.lag + 1) * self.frac
        }
    }

    fn push(&mut self, y: f64) {
        self.head = (self.head + 1) % self.buf.len();
        self.buf[self.head] = y;
    }
}

/// Fixed-step exponential integrator for τ_NL·ẏ + y = λ·f(y(t−τ), x(t)).
///
/// The nonlinear term is held over each step; the delayed value is linearly
/// interpolated between stored samples.
pub fn integrate_delay_system<F>(cfg: &DelayFeedbackConfig, input: F, horizon: f64) -> Result<Trajectory>
where
    F: Fn(f64) -> Stimulus,
{
    cfg.validate()?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!("horizon must be >= 0, got {horizon}")));
    }
    let n_steps = steps_for(horizon, cfg.step);
    let h = cfg.step;
    let decay = if cfg.tau_nl == 0.0 { 0.0 } else { (-h / cfg.tau_nl).exp() };

    let mut line = DelayLine::new(cfg);
    let mut y = cfg.history.at(0.0);
    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(y);
    for n in 0..n_steps {
        let t = n as f64 * h;
        let drive = cfg.gain * cfg.nonlinearity.evaluate(line.delayed(), input(t));
        y = decay * y + (1.0 - decay) * drive;
        if !y.is_finite() || y.abs() > cfg.bound {
            return Err(Error::Instability { time: t + h, value: y.abs() });
        }
        line.push(y);
        values.push(y);
    }
    Ok(Trajectory { step: h, values })
}

fn steps_for(horizon: f64, step: f64) -> usize {
    let x = horizon / step;
    let r = x.round();
    if (x - r).abs() < 1e-9 * r.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// yₖ = λ·f(yₖ₋₁, xₖ) for k = 1..=n, starting from the history value at 0.
/// Missing inputs are taken as zero.
pub fn iterate_adiabatic_map(cfg: &DelayFeedbackConfig, inputs: &[Stimulus], n: usize) -> Vec<f64> {
    let mut y = cfg.history.at(0.0);
    (0..n)
        .map(|k| {
            let x = inputs.get(k).copied().unwrap_or(Stimulus::ZERO);
            y = cfg.gain * cfg.nonlinearity.evaluate(y, x);
            y
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationColumn {
    pub param: f64,
    pub samples: Vec<f64>,
}

impl BifurcationColumn {
    pub fn distinct(&self, tol: f64) -> usize {
        count_clusters(&self.samples, tol)
    }
}

/// Runs `system(param)` for each parameter, discards `n_transient` leading
/// values and keeps the next `n_sample`.
pub fn bifurcation_diagram<S>(
    params: &[f64],
    n_transient: usize,
    n_sample: usize,
    exec: Execution,
    system: S,
) -> Result<Vec<BifurcationColumn>>
where
    S: Fn(f64, usize) -> Vec<f64> + Sync + Send,
{
    if n_transient == 0 || n_sample == 0 {
        return Err(Error::domain("transient and sample counts must be >= 1"));
    }
    let total = n_transient + n_sample;
    Ok(exec.map(params, |&param| {
        let series = system(param, total);
        let samples = series.into_iter().skip(n_transient).take(n_sample).collect();
        BifurcationColumn { param, samples }
    }))
}

/// Bifurcation diagram of the adiabatic map with the gain as parameter.
pub fn map_bifurcation(
    cfg: &DelayFeedbackConfig,
    gains: &[f64],
    n_transient: usize,
    n_sample: usize,
    exec: Execution,
) -> Result<Vec<BifurcationColumn>> {
    bifurcation_diagram(gains, n_transient, n_sample, exec, |gain, total| {
        let c = DelayFeedbackConfig { gain, ..cfg.clone() };
        iterate_adiabatic_map(&c, &[], total)
    })
}

/// Number of clusters after sorting, splitting wherever consecutive values
/// differ by more than `tol`.
pub fn count_clusters(samples: &[f64], tol: f64) -> usize {
    let mut v: Vec<f64> = samples.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return 0;
    }
    v.sort_by(f64::total_cmp);
    1 + v.windows(2).filter(|w| w[1] - w[0] > tol).count()
}

/// Smallest p ≤ `max_period` with |y_{k+p} − y_k| ≤ tol over the series.
pub fn detect_period(samples: &[f64], tol: f64, max_period: usize) -> Option<usize> {
    (1..=max_period.min(samples.len().saturating_sub(1)))
        .find(|&p| samples.windows(p + 1).all(|w| (w[p] - w[0]).abs() <= tol))
}

/// First column (in parameter order) whose asymptotic orbit has more than one
/// cluster, preceded by a single-cluster column.
pub fn first_period_doubling(columns: &[BifurcationColumn], tol: f64) -> Option<f64> {
    columns
        .windows(2)
        .find(|w| w[0].distinct(tol) == 1 && w[1].distinct(tol) > 1)
        .map(|w| 0.5 * (w[0].param + w[1].param))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePortrait {
    /// (y(t), y(t − τ)).
    pub points: Vec<(f64, f64)>,
}

/// Delay embedding of the trajectory on t ≥ transient + τ.
pub fn phase_portrait(traj: &Trajectory, tau: f64, transient: f64) -> Result<PhasePortrait> {
    if !(tau > 0.0) || !(transient >= 0.0) {
        return Err(Error::domain("tau must be positive and transient non-negative"));
    }
    if traj.len() < 2 || traj.span() <= tau + transient {
        return Err(Error::domain(format!(
            "trajectory span {} s does not exceed tau + transient = {} s",
            traj.span(),
            tau + transient
        )));
    }
    let start = ((tau + transient) / traj.step - 1e-9).ceil() as usize;
    let points = (start..traj.len())
        .map(|n| {
            let t = traj.time(n);
            (traj.values[n], traj.value_at(t - tau))
        })
        .collect();
    Ok(PhasePortrait { points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCounting {
    pub dimension: f64,
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    /// Fewer than [`MIN_BOX_OCCUPANCY`] points per occupied box at the
    /// smallest scale.
    pub resolution_warning: bool,
}

pub const MIN_BOX_OCCUPANCY: f64 = 5.0;

/// Box-counting dimension: least-squares slope of log N(ε) against log(1/ε)
/// for `n_scales` box sizes log-spaced between `eps_min` and `eps_max`.
pub fn box_counting_dimension(points: &[(f64, f64)], eps_min: f64, eps_max: f64, n_scales: usize) -> Result<BoxCounting> {
    if points.len() < 2 {
        return Err(Error::domain("box counting needs at least two points"));
    }
    if !(eps_min > 0.0 && eps_max > eps_min) || n_scales < 2 {
        return Err(Error::domain("need 0 < eps_min < eps_max and at least two scales"));
    }
    let x0 = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let y0 = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let ratio = (eps_max / eps_min).ln();
    let scales: Vec<f64> = (0..n_scales)
        .map(|i| eps_min * (ratio * i as f64 / (n_scales - 1) as f64).exp())
        .collect();
    let counts: Vec<usize> = scales
        .iter()
        .map(|&eps| {
            points
                .iter()
                .map(|&(x, y)| (((x - x0) / eps).floor() as i64, ((y - y0) / eps).floor() as i64))
                .collect::<HashSet<_>>()
                .len()
        })
        .collect();
    let xs: Vec<f64> = scales.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let dimension = slope(&xs, &ys);
    let resolution_warning = (points.len() as f64) < MIN_BOX_OCCUPANCY * counts[0] as f64;
    if resolution_warning {
        log::warn!(
            "box counting: {} points for {} boxes at eps = {eps_min:e}; smallest scale under-resolved",
            points.len(),
            counts[0]
        );
    }
    Ok(BoxCounting { dimension, scales, counts, resolution_warning })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub mask: Vec<f64>,
    /// Node spacing θ, s.
    pub theta: f64,
    pub n_virtual_nodes: usize,
}

impl MaskSpec {
    /// Spreads `mask` over one delay period, θ = τ/n.
    pub fn over_delay(mask: Vec<f64>, tau: f64) -> Result<Self> {
        if mask.is_empty() || !(tau > 0.0) {
            return Err(Error::Config("mask must be non-empty and tau positive".into()));
        }
        let n = mask.len();
        Ok(MaskSpec { theta: tau / n as f64, n_virtual_nodes: n, mask })
    }

    /// Seeded random ±1 mask.
    pub fn random_binary(n: usize, tau: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        Self::over_delay(mask, tau)
    }

    pub fn tau(&self) -> f64 {
        self.theta * self.n_virtual_nodes as f64
    }

    pub fn validate(&self, tau: f64) -> Result<()> {
        if self.mask.len() != self.n_virtual_nodes {
            return Err(Error::Config(format!(
                "mask has {} entries for {} virtual nodes",
                self.mask.len(),
                self.n_virtual_nodes
            )));
        }
        if !(self.theta > 0.0) {
            return Err(Error::Config("node spacing must be positive".into()));
        }
        if ((self.tau() - tau) / tau).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "{} nodes x theta {} = {} s does not match tau = {tau} s",
                self.n_virtual_nodes,
                self.theta,
                self.tau()
            )));
        }
        Ok(())
    }

    /// Virtual node active at time `t`, periodic in τ.
    pub fn node_at(&self, t: f64) -> usize {
        let k = (t / self.theta + 1e-9).floor();
        (k.rem_euclid(self.n_virtual_nodes as f64)) as usize
    }
}

/// Sample-and-hold drive over one delay period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeldDrive {
    pub theta: f64,
    pub levels: Vec<f64>,
}

impl HeldDrive {
    pub fn span(&self) -> f64 {
        self.theta * self.levels.len() as f64
    }

    /// Level at `t`, repeating with period τ.
    pub fn at(&self, t: f64) -> f64 {
        let k = (t / self.theta + 1e-9).floor().rem_euclid(self.levels.len() as f64);
        self.levels[k as usize]
    }

    pub fn node_centers(&self) -> Vec<f64> {
        (0..self.levels.len()).map(|i| (i as f64 + 0.5) * self.theta).collect()
    }
}

/// Holds `u[i]·mask[i]` for θ at node i. A scalar `u` is broadcast.
pub fn mask_and_multiplex(u: &[f64], mask: &MaskSpec) -> Result<HeldDrive> {
    mask.validate(mask.tau())?;
    let levels = match u.len() {
        1 => mask.mask.iter().map(|m| m * u[0]).collect(),
        n if n == mask.n_virtual_nodes => mask.mask.iter().zip(u).map(|(m, x)| m * x).collect(),
        n => {
            return Err(Error::Config(format!(
                "input of length {n} does not match {} virtual nodes",
                mask.n_virtual_nodes
            )))
        }
    };
    Ok(HeldDrive { theta: mask.theta, levels })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    /// (n_features + 1) × n_outputs; the last row is the bias.
    pub weights: DMatrix<f64>,
    pub ridge: f64,
}

impl ReadoutModel {
    pub fn n_features(&self) -> usize {
        self.weights.nrows() - 1
    }

    pub fn predict(&self, state: &[f64]) -> Vec<f64> {
        let n = self.n_features();
        (0..self.weights.ncols())
            .map(|j| {
                let col = self.weights.column(j);
                state.iter().zip(col.iter()).map(|(s, w)| s * w).sum::<f64>() + col[n]
            })
            .collect()
    }

    pub fn classify(&self, state: &[f64]) -> usize {
        argmax(&self.predict(state))
    }
}

pub fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
        .0
}

/// Ridge regression with an appended bias column; the bias is regularized
/// like every other weight. With `ridge == 0` the design matrix must have
/// full column rank.
pub fn train_readout(states: &[Vec<f64>], targets: &[Vec<f64>], ridge: f64) -> Result<ReadoutModel> {
    if states.is_empty() || states.len() != targets.len() {
        return Err(Error::domain(format!(
            "{} state rows for {} target rows",
            states.len(),
            targets.len()
        )));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::domain(format!("ridge must be finite and >= 0, got {ridge}")));
    }
    let p = states[0].len();
    let k = targets[0].len();
    if states.iter().any(|r| r.len() != p) || targets.iter().any(|r| r.len() != k) {
        return Err(Error::domain("ragged state or target rows"));
    }
    let m = states.len();
    let x = DMatrix::from_fn(m, p + 1, |i, j| if j < p { states[i][j] } else { 1.0 });
    let y = DMatrix::from_fn(m, k, |i, j| targets[i][j]);

    let weights = if ridge == 0.0 {
        let svd = x.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let tol = smax * f64::EPSILON * (m.max(p + 1) as f64);
        let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
        if rank < p + 1 {
            return Err(Error::Singular(format!(
                "state matrix has rank {rank} < {} columns; use ridge > 0",
                p + 1
            )));
        }
        svd.solve(&y, tol).map_err(|e| Error::Singular(e.to_string()))?
    } else {
        let xtx = x.transpose() * &x + DMatrix::identity(p + 1, p + 1) * ridge;
        let xty = x.transpose() * &y;
        xtx.cholesky()
            .ok_or_else(|| Error::Singular("regularized normal matrix is not positive definite".into()))?
            .solve(&xty)
    };
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Singular("non-finite readout weights".into()));
    }
    Ok(ReadoutModel { weights, ridge })
}

// ---------------------------------------------------------------------------
// Iris

pub const IRIS_SPECIES: [&str; 3] = ["setosa", "versicolor", "virginica"];

/// Data-set ranges of sepal length, sepal width, petal length, petal width, cm.
pub const IRIS_FEATURE_RANGES: [(f64, f64); 4] = [(4.3, 7.9), (2.0, 4.4), (1.0, 6.9), (0.1, 2.5)];

const BUNDLED_IRIS: &str = include_str!("../data/iris.csv");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrisRecord {
    pub features: [f64; 4],
    pub species: usize,
}

#[derive(Debug, Deserialize)]
struct IrisRow {
    sepal_length_cm: f64,
    sepal_width_cm: f64,
    petal_length_cm: f64,
    petal_width_cm: f64,
    species: String,
}

fn species_index(name: &str) -> Option<usize> {
    let name = name.trim().to_ascii_lowercase();
    let name = name.strip_prefix("iris-").unwrap_or(&name);
    IRIS_SPECIES.iter().position(|s| *s == name)
}

fn parse_iris<R: std::io::Read>(reader: R) -> Result<Vec<IrisRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<IrisRow>().enumerate() {
        let row = row.map_err(|e| Error::Data(format!("iris row {}: {e}", i + 1)))?;
        let species = species_index(&row.species)
            .ok_or_else(|| Error::Data(format!("iris row {}: unknown species {:?}", i + 1, row.species)))?;
        out.push(IrisRecord {
            features: [row.sepal_length_cm, row.sepal_width_cm, row.petal_length_cm, row.petal_width_cm],
            species,
        });
    }
    if out.is_empty() {
        return Err(Error::Data("iris file has no records".into()));
    }
    Ok(out)
}

/// The 150-record data set shipped with the crate.
pub fn bundled_iris() -> Vec<IrisRecord> {
    parse_iris(BUNDLED_IRIS.as_bytes()).expect("bundled iris data parses")
}

/// Reads a CSV with header
/// `sepal_length_cm,sepal_width_cm,petal_length_cm,petal_width_cm,species`.
pub fn load_iris(path: impl AsRef<Path>) -> Result<Vec<IrisRecord>> {
    let file = std::fs::File::open(path)?;
    parse_iris(file)
}

/// Four sinusoidal channels for one record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrisEncoding {
    pub frequencies: [f64; 4],
    pub amplitude: f64,
    pub active: f64,
    pub gap: f64,
}

pub const IRIS_F_MIN: f64 = 2.0;
pub const IRIS_F_MAX: f64 = 10.0;

impl IrisEncoding {
    /// Channel `c` at time `t` from the start of the active segment.
    pub fn channel(&self, c: usize, t: f64) -> f64 {
        if (0.0..self.active).contains(&t) {
            self.amplitude * (2.0 * std::f64::consts::PI * self.frequencies[c] * t).sin()
        } else {
            0.0
        }
    }

    pub fn period(&self) -> f64 {
        self.active + self.gap
    }
}

/// Linear map of each feature from its data-set range onto 2–10 Hz, 1 V,
/// 3 s on and 3 s off. Out-of-range values are clipped.
pub fn encode_iris(features: [f64; 4]) -> IrisEncoding {
    let mut frequencies = [0.0; 4];
    for (c, (&x, &(lo, hi))) in features.iter().zip(&IRIS_FEATURE_RANGES).enumerate() {
        let clipped = x.clamp(lo, hi);
        if clipped != x || !x.is_finite() {
            log::warn!("iris feature {c} = {x} outside [{lo}, {hi}], clipped");
        }
        let clipped = if clipped.is_finite() { clipped } else { lo };
        frequencies[c] = IRIS_F_MIN + (IRIS_F_MAX - IRIS_F_MIN) * (clipped - lo) / (hi - lo);
    }
    IrisEncoding { frequencies, amplitude: 1.0, active: 3.0, gap: 3.0 }
}

#[derive(Debug, Clone)]
pub struct IrisConfig {
    pub tau_nl: f64,
    pub tau: f64,
    pub gain: f64,
    pub nonlinearity: Nonlinearity,
    pub n_virtual_nodes: usize,
    /// Integrator steps per virtual node.
    pub steps_per_node: usize,
    /// Volts of drive per volt of channel signal.
    pub input_scale: f64,
    pub mask_seed: u64,
    /// Delay periods skipped before sampling.
    pub skip_periods: usize,
    /// Delay periods sampled into the state vector.
    pub sample_periods: usize,
    pub ridge: f64,
    pub n_train: usize,
}

impl Default for IrisConfig {
    /// 50 virtual nodes over a 20 ms delay, OECT transfer biased at
    /// V_DS = −0.1·V_P, five delay periods sampled after one settling period.
    fn default() -> Self {
        let device = OectParams::pedot_pss();
        let v_ds = -0.1 * device.pinch_off_voltage();
        IrisConfig {
            tau_nl: 2e-4,
            tau: 0.02,
            gain: 0.9,
            nonlinearity: Nonlinearity::Oect(OectTransfer::spanning(device, v_ds)),
            n_virtual_nodes: 50,
            steps_per_node: 2,
            input_scale: 0.1,
            mask_seed: 7,
            skip_periods: 1,
            sample_periods: 5,
            ridge: 1e-2,
            n_train: 120,
        }
    }
}

/// Confusion matrix with rows = predicted class, columns = true class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 3]; 3],
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.correct() as f64 / self.total().max(1) as f64
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>12} {:>10} {:>10} {:>10}", "pred\\true", IRIS_SPECIES[0], IRIS_SPECIES[1], IRIS_SPECIES[2])?;
        for (i, row) in self.counts.iter().enumerate() {
            writeln!(f, "{:>12} {:>10} {:>10} {:>10}", IRIS_SPECIES[i], row[0], row[1], row[2])?;
        }
        write!(f, "accuracy {}/{} = {:.1}%", self.correct(), self.total(), 100.0 * self.accuracy())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrisOutcome {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub train_accuracy: f64,
    pub test_indices: Vec<usize>,
}

/// Channel masks: one per feature, drawn from `seed`.
fn channel_masks(cfg: &IrisConfig) -> Result<Vec<MaskSpec>> {
    (0..4)
        .map(|c| MaskSpec::random_binary(cfg.n_virtual_nodes, cfg.tau, cfg.mask_seed.wrapping_add(c as u64)))
        .collect()
}

impl IrisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_virtual_nodes == 0 || self.steps_per_node == 0 || self.sample_periods == 0 {
            return Err(Error::Config("node count, steps per node and sample periods must be >= 1".into()));
        }
        if self.n_train == 0 {
            return Err(Error::Config("training set must be non-empty".into()));
        }
        if !(self.input_scale.is_finite() && self.ridge >= 0.0) {
            return Err(Error::Config("input scale must be finite and ridge >= 0".into()));
        }
        let needed = (self.skip_periods + self.sample_periods) as f64 * self.tau;
        if needed > 3.0 + 1e-12 {
            return Err(Error::Config(format!("sampling window {needed} s exceeds the 3 s active segment")));
        }
        self.delay_config().validate()
    }

    pub fn delay_config(&self) -> DelayFeedbackConfig {
        let theta = self.tau / self.n_virtual_nodes.max(1) as f64;
        DelayFeedbackConfig {
            step: theta / self.steps_per_node.max(1) as f64,
            ..DelayFeedbackConfig::new(self.tau_nl, self.tau, self.gain, self.nonlinearity.clone())
        }
    }
}

/// Virtual-node state vector for one record: the node values at each node's
/// center over the sampled delay periods. Sepal channels drive the node,
/// petal channels perturb its gate.
pub fn reservoir_state(cfg: &IrisConfig, masks: &[MaskSpec], record: &IrisRecord) -> Result<Vec<f64>> {
    let enc = encode_iris(record.features);
    let dcfg = cfg.delay_config();
    let scale = cfg.input_scale;
    let input = |t: f64| {
        let node = masks[0].node_at(t);
        let ch = |c: usize| masks[c].mask[node] * enc.channel(c, t);
        Stimulus { drive: scale * (ch(0) + ch(1)), gate: scale * (ch(2) + ch(3)) }
    };
    let horizon = (cfg.skip_periods + cfg.sample_periods) as f64 * cfg.tau;
    let traj = integrate_delay_system(&dcfg, input, horizon)?;
    let theta = masks[0].theta;
    let mut state = Vec::with_capacity(cfg.sample_periods * cfg.n_virtual_nodes);
    for k in cfg.skip_periods..cfg.skip_periods + cfg.sample_periods {
        for i in 0..cfg.n_virtual_nodes {
            // end of node i's hold interval
            let t = k as f64 * cfg.tau + (i + 1) as f64 * theta;
            state.push(traj.value_at(t));
        }
    }
    Ok(state)
}

/// Seeded 120/30 split (sizes from `cfg.n_train`).
pub fn iris_split(n: usize, n_train: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = n_train.min(n);
    let test = idx.split_off(n_train);
    (idx, test)
}

/// Simulates every record independently, trains the readout on the training
/// split and scores the test split.
pub fn run_iris_experiment(
    cfg: &IrisConfig,
    records: &[IrisRecord],
    split_seed: u64,
    exec: Execution,
) -> Result<IrisOutcome> {
    let states = iris_states(cfg, records, exec)?;
    evaluate_split(cfg, records, &states, split_seed)
}

/// Reservoir states for all records, in order.
pub fn iris_states(cfg: &IrisConfig, records: &[IrisRecord], exec: Execution) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let masks = channel_masks(cfg)?;
    exec.map(records, |r| reservoir_state(cfg, &masks, r)).into_iter().collect()
}

/// Train/test evaluation on precomputed states.
pub fn evaluate_split(
    cfg: &IrisConfig,
    records: &[IrisRecord],
    states: &[Vec<f64>],
    split_seed: u64,
) -> Result<IrisOutcome> {
    if records.len() != states.len() || cfg.n_train >= records.len() {
        return Err(Error::Config(format!(
            "{} records for {} training samples",
            records.len(),
            cfg.n_train
        )));
    }
    let (train, test) = iris_split(records.len(), cfg.n_train, split_seed);
    let one_hot = |s: usize| (0..3).map(|k| if k == s { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
    let xs: Vec<Vec<f64>> = train.iter().map(|&i| states[i].clone()).collect();
    let ys: Vec<Vec<f64>> = train.iter().map(|&i| one_hot(records[i].species)).collect();
    let model = train_readout(&xs, &ys, cfg.ridge)?;

    let train_correct = train
        .iter()
        .filter(|&&i| model.classify(&states[i]) == records[i].species)
        .count();
    let mut confusion = ConfusionMatrix { counts: [[0; 3]; 3] };
    for &i in &test {
        confusion.counts[model.classify(&states[i])][records[i].species] += 1;
    }
    Ok(IrisOutcome {
        accuracy: confusion.accuracy(),
        confusion,
        train_accuracy: train_correct as f64 / train.len() as f64,
        test_indices: test,
    })
}
