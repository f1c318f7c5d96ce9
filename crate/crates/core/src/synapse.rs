//! Phenomenological synaptic network: threshold-gated synaptogenesis with
//! logistic reinforcement, reinforcement-dependent long-term decay, STDP and
//! paired-pulse depression windows, and two scripted demos (Pavlovian
//! conditioning and 15-pixel digit recognition).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const HOURS_48: f64 = 48.0 * 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynapseState {
    /// S.
    pub conductance: f64,
    /// Degree of reinforcement in [0, 1]; sets the decay rate.
    pub reinforcement: f64,
    pub exists: bool,
    /// Logistic rate of this synapse, 1/s.
    pub growth_rate: f64,
}

impl SynapseState {
    pub const ABSENT: SynapseState = SynapseState { conductance: 0.0, reinforcement: 0.0, exists: false, growth_rate: 0.0 };

    pub fn decay_rate(&self, model: &DecayModel) -> f64 {
        model.rate(self.reinforcement)
    }
}

/// Decay rate linear in reinforcement, k(r) = k₀ + (k₁ − k₀)·r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecayModel {
    /// 1/s at r = 0.
    pub rate_unreinforced: f64,
    /// 1/s at r = 1.
    pub rate_reinforced: f64,
}

impl DecayModel {
    /// r = 1 keeps 99% and r = 0.05 keeps 50% after 48 h.
    pub fn calibrated() -> Self {
        Self::from_retention(1.0, 0.99, 0.05, 0.5, HOURS_48)
    }

    /// Solves for the two rates from retention fractions at two
    /// reinforcement levels after `elapsed` seconds.
    pub fn from_retention(r_a: f64, keep_a: f64, r_b: f64, keep_b: f64, elapsed: f64) -> Self {
        let k_a = -keep_a.ln() / elapsed;
        let k_b = -keep_b.ln() / elapsed;
        let slope = (k_a - k_b) / (r_a - r_b);
        DecayModel { rate_unreinforced: k_b - slope * r_b, rate_reinforced: k_b + slope * (1.0 - r_b) }
    }

    pub fn rate(&self, reinforcement: f64) -> f64 {
        let r = reinforcement.clamp(0.0, 1.0);
        (self.rate_unreinforced + (self.rate_reinforced - self.rate_unreinforced) * r).max(0.0)
    }
}

impl Default for DecayModel {
    fn default() -> Self {
        Self::calibrated()
    }
}

/// Exponential loss of conductance over `elapsed` seconds.
pub fn long_term_decay(s: &SynapseState, elapsed: f64, model: &DecayModel) -> Result<SynapseState> {
    if !(elapsed >= 0.0) {
        return Err(Error::domain(format!("elapsed time must be >= 0, got {elapsed}")));
    }
    let mut out = *s;
    out.conductance = s.conductance * (-s.decay_rate(model) * elapsed).exp();
    Ok(out)
}

/// Relative jitter on the logistic rate, drawn per synapse at creation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateJitter {
    pub relative_sd: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrowthRule {
    /// V.
    pub growth_threshold: f64,
    /// Pulses closer than this superpose, s.
    pub synchrony_window: f64,
    /// 1/s.
    pub s_curve_rate: f64,
    /// S.
    pub g_max: f64,
    /// Conductance on creation, S.
    pub g0: f64,
    pub jitter: Option<RateJitter>,
}

impl Default for GrowthRule {
    fn default() -> Self {
        GrowthRule {
            growth_threshold: 4.0,
            synchrony_window: 1e-3,
            s_curve_rate: 2.0,
            g_max: 1e-3,
            g0: 1e-6,
            jitter: None,
        }
    }
}

impl GrowthRule {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("growth_threshold", self.growth_threshold),
            ("synchrony_window", self.synchrony_window),
            ("s_curve_rate", self.s_curve_rate),
            ("g_max", self.g_max),
            ("g0", self.g0),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.g0 >= self.g_max {
            return Err(Error::Config("g0 must be below g_max".into()));
        }
        if let Some(j) = self.jitter {
            if !(j.relative_sd >= 0.0 && j.relative_sd.is_finite()) {
                return Err(Error::Config("jitter sd must be finite and >= 0".into()));
            }
        }
        Ok(())
    }
}

/// Closed-form logistic G(t) = g_max / (1 + (g_max/G₀ − 1)·e^(−r·t)).
pub fn conductance_curve(t: f64, rule: &GrowthRule) -> f64 {
    logistic_from(rule.g0, t, rule.s_curve_rate, rule.g_max)
}

fn logistic_from(g: f64, t: f64, rate: f64, g_max: f64) -> f64 {
    if g <= 0.0 {
        return 0.0;
    }
    if g >= g_max {
        return g_max;
    }
    g_max / (1.0 + (g_max / g - 1.0) * (-rate * t).exp())
}

/// Action potential emitted by a node at `time` (relative to step start).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub node: usize,
    pub time: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GrowthReport {
    pub created: Vec<(usize, usize)>,
    pub gated: Vec<(usize, usize)>,
}

/// Nodes and candidate synapses, keyed by (i, j) with i < j.
#[derive(Debug, Clone)]
pub struct SynapticNetwork {
    pub n_nodes: usize,
    pub synapses: BTreeMap<(usize, usize), SynapseState>,
    pub time: f64,
    rng: Option<ChaCha8Rng>,
}

fn key(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

impl SynapticNetwork {
    pub fn new(n_nodes: usize) -> Self {
        SynapticNetwork { n_nodes, synapses: BTreeMap::new(), time: 0.0, rng: None }
    }

    fn check(&self, i: usize, j: usize) -> Result<()> {
        if i == j || i >= self.n_nodes || j >= self.n_nodes {
            return Err(Error::domain(format!("invalid node pair ({i}, {j}) for {} nodes", self.n_nodes)));
        }
        Ok(())
    }

    /// Registers a place where a synapse may grow.
    pub fn add_candidate(&mut self, i: usize, j: usize) -> Result<()> {
        self.check(i, j)?;
        self.synapses.entry(key(i, j)).or_insert(SynapseState::ABSENT);
        Ok(())
    }

    /// Inserts an existing synapse.
    pub fn connect(&mut self, i: usize, j: usize, conductance: f64, reinforcement: f64, rule: &GrowthRule) -> Result<()> {
        self.check(i, j)?;
        if !(conductance > 0.0) {
            return Err(Error::domain("existing synapse needs positive conductance"));
        }
        self.synapses.insert(
            key(i, j),
            SynapseState {
                conductance,
                reinforcement: reinforcement.clamp(0.0, 1.0),
                exists: true,
                growth_rate: rule.s_curve_rate,
            },
        );
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> SynapseState {
        self.synapses.get(&key(i, j)).copied().unwrap_or(SynapseState::ABSENT)
    }

    pub fn exists(&self, i: usize, j: usize) -> bool {
        self.get(i, j).exists
    }

    fn neighbours(&self, node: usize, skip: (usize, usize)) -> Vec<usize> {
        self.synapses
            .iter()
            .filter(|(&k, s)| s.exists && k != skip && (k.0 == node || k.1 == node))
            .map(|(&(a, b), _)| if a == node { b } else { a })
            .collect()
    }

    /// Current into `node` when the given nodes are held at the given
    /// voltages and `node` is grounded, A.
    pub fn output_current(&self, node: usize, drives: &[(usize, f64)]) -> f64 {
        drives.iter().map(|&(k, v)| if k == node { 0.0 } else { self.get(k, node).conductance * v }).sum()
    }

    fn draw_rate(&mut self, rule: &GrowthRule) -> f64 {
        match rule.jitter {
            Some(j) if j.relative_sd > 0.0 => {
                let rng = self.rng.get_or_insert_with(|| ChaCha8Rng::seed_from_u64(j.seed));
                let z: f64 = StandardNormal.sample(rng);
                (rule.s_curve_rate * (1.0 + j.relative_sd * z)).max(1e-3 * rule.s_curve_rate)
            }
            _ => rule.s_curve_rate,
        }
    }
}

/// Growth drive for candidate (i, j) at pulse `p` of endpoint `i`: its own
/// amplitude plus every pulse within the synchrony window from `j` or from
/// nodes already wired to `j`.
fn superposed(net: &SynapticNetwork, cand: (usize, usize), p: &Pulse, pulses: &[Pulse], window: f64) -> f64 {
    let other = if p.node == cand.0 { cand.1 } else { cand.0 };
    let mut side = net.neighbours(other, cand);
    side.push(other);
    side.retain(|&k| k != p.node);
    p.amplitude
        + pulses
            .iter()
            .filter(|q| side.contains(&q.node) && (q.time - p.time).abs() <= window)
            .map(|q| q.amplitude)
            .sum::<f64>()
}

/// Advances the network by `dt`. A candidate synapse is gated when any pulse
/// at one of its endpoints superposes to more than the growth threshold; a
/// gated synapse is created at G₀ if absent and then follows the logistic
/// S-curve for `dt`. Gating uses the topology at the start of the step.
pub fn growth_step(net: &mut SynapticNetwork, pulses: &[Pulse], dt: f64, rule: &GrowthRule) -> Result<GrowthReport> {
    rule.validate()?;
    if !(dt > 0.0) {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    let gated: Vec<(usize, usize)> = net
        .synapses
        .keys()
        .copied()
        .filter(|&c| {
            pulses
                .iter()
                .filter(|p| p.node == c.0 || p.node == c.1)
                .any(|p| superposed(net, c, p, pulses, rule.synchrony_window) > rule.growth_threshold)
        })
        .collect();

    let mut report = GrowthReport { created: Vec::new(), gated: gated.clone() };
    for c in gated {
        let mut s = net.synapses[&c];
        if !s.exists {
            s = SynapseState { conductance: rule.g0, reinforcement: 0.0, exists: true, growth_rate: net.draw_rate(rule) };
            report.created.push(c);
        }
        s.conductance = logistic_from(s.conductance, dt, s.growth_rate, rule.g_max);
        s.reinforcement = (s.conductance / rule.g_max).clamp(0.0, 1.0);
        net.synapses.insert(c, s);
    }
    net.time += dt;
    Ok(report)
}

/// Periodic pulse train starting at `offset`, for `n` periods.
pub fn pulse_train(node: usize, amplitude: f64, period: f64, offset: f64, n: usize) -> Vec<Pulse> {
    (0..n).map(|k| Pulse { node, time: offset + k as f64 * period, amplitude }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdpWindow {
    pub a_plus: f64,
    /// s.
    pub tau_plus: f64,
    pub a_minus: f64,
    /// s.
    pub tau_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdWindow {
    /// Intervals at or below this show no depression, s.
    pub min_interval: f64,
    pub amplitude: f64,
    /// s.
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlasticityWindows {
    pub stdp: StdpWindow,
    pub std: StdWindow,
}

impl Default for PlasticityWindows {
    fn default() -> Self {
        PlasticityWindows {
            stdp: StdpWindow { a_plus: 1.0, tau_plus: 20e-3, a_minus: 0.5, tau_minus: 20e-3 },
            std: StdWindow { min_interval: 1e-3, amplitude: 0.6, tau: 1.0 },
        }
    }
}

impl PlasticityWindows {
    pub fn validate(&self) -> Result<()> {
        let taus = [self.stdp.tau_plus, self.stdp.tau_minus, self.std.tau, self.std.min_interval];
        if taus.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Config("window time constants must be positive".into()));
        }
        let amps = [self.stdp.a_plus, self.stdp.a_minus, self.std.amplitude];
        if amps.iter().any(|a| !a.is_finite()) {
            return Err(Error::Config("window amplitudes must be finite".into()));
        }
        Ok(())
    }
}

/// Relative weight change for post − pre spike delay `delta_t`:
/// A₊·e^(−Δt/τ₊) for Δt ≥ 0, −A₋·e^(Δt/τ₋) otherwise.
pub fn stdp_update(delta_t: f64, w: &PlasticityWindows) -> f64 {
    if delta_t.is_nan() {
        return 0.0;
    }
    if delta_t >= 0.0 {
        w.stdp.a_plus * (-delta_t / w.stdp.tau_plus).exp()
    } else {
        -w.stdp.a_minus * (delta_t / w.stdp.tau_minus).exp()
    }
}

/// Second-to-first response for two pulses `delta_t` apart.
pub fn paired_pulse_ratio(delta_t: f64, w: &PlasticityWindows) -> Result<f64> {
    if !(delta_t > 0.0) {
        return Err(Error::domain(format!("pulse interval must be positive, got {delta_t}")));
    }
    let s = &w.std;
    if delta_t <= s.min_interval {
        return Ok(1.0);
    }
    Ok(1.0 - s.amplitude * (1.0 - (-(delta_t - s.min_interval) / s.tau).exp()))
}

// ---------------------------------------------------------------------------
// Pavlovian conditioning

pub const BELL: usize = 0;
pub const FOOD: usize = 1;
pub const SALIVATION: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PavlovConfig {
    /// V.
    pub amplitude: f64,
    /// Hz.
    pub frequency: f64,
    /// Duration of each training phase, s.
    pub phase_duration: f64,
    /// Salivation counts as triggered above this fraction of the food-driven
    /// current.
    pub activation_fraction: f64,
}

impl Default for PavlovConfig {
    fn default() -> Self {
        PavlovConfig { amplitude: 3.0, frequency: 50.0, phase_duration: 10.0, activation_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PavlovPhase {
    pub label: &'static str,
    pub bell_salivation_link: bool,
    pub bell_alone_salivates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PavlovOutcome {
    pub phases: [PavlovPhase; 4],
    pub final_conductance: f64,
}

impl PavlovOutcome {
    pub fn expected() -> [PavlovPhase; 4] {
        [
            PavlovPhase { label: "initial", bell_salivation_link: false, bell_alone_salivates: false },
            PavlovPhase { label: "asynchronous", bell_salivation_link: false, bell_alone_salivates: false },
            PavlovPhase { label: "synchronous", bell_salivation_link: true, bell_alone_salivates: true },
            PavlovPhase { label: "conditioned", bell_salivation_link: true, bell_alone_salivates: true },
        ]
    }

    pub fn matches_expected(&self) -> bool {
        self.phases == Self::expected()
    }
}

/// Runs the four phases: initial state, asynchronous bell and food trains
/// (food offset by half a period), synchronous trains, then the bell alone.
pub fn run_pavlov_protocol(rule: &GrowthRule, cfg: &PavlovConfig) -> Result<PavlovOutcome> {
    rule.validate()?;
    if !(cfg.frequency > 0.0 && cfg.phase_duration > 0.0 && cfg.amplitude > 0.0) {
        return Err(Error::Config("pavlov amplitude, frequency and duration must be positive".into()));
    }
    let period = 1.0 / cfg.frequency;
    if rule.synchrony_window >= 0.5 * period {
        return Err(Error::Config("synchrony window must be shorter than half the pulse period".into()));
    }
    let mut net = SynapticNetwork::new(3);
    net.connect(FOOD, SALIVATION, rule.g_max, 1.0, rule)?;
    net.add_candidate(BELL, SALIVATION)?;

    let a = cfg.amplitude;
    let food_current = net.output_current(SALIVATION, &[(FOOD, a)]);
    let observe = |net: &SynapticNetwork, label: &'static str| PavlovPhase {
        label,
        bell_salivation_link: net.exists(BELL, SALIVATION),
        bell_alone_salivates: net.output_current(SALIVATION, &[(BELL, a)]) > cfg.activation_fraction * food_current,
    };
    let n = (cfg.phase_duration * cfg.frequency).round().max(1.0) as usize;
    let run = |net: &mut SynapticNetwork, food_offset: Option<f64>| -> Result<()> {
        for _ in 0..n {
            let mut pulses = vec![Pulse { node: BELL, time: 0.0, amplitude: a }];
            if let Some(off) = food_offset {
                pulses.push(Pulse { node: FOOD, time: off, amplitude: a });
            }
            growth_step(net, &pulses, period, rule)?;
        }
        Ok(())
    };

    let initial = observe(&net, "initial");
    run(&mut net, Some(0.5 * period))?;
    let asynchronous = observe(&net, "asynchronous");
    run(&mut net, Some(0.0))?;
    let synchronous = observe(&net, "synchronous");
    run(&mut net, None)?;
    let conditioned = observe(&net, "conditioned");
    Ok(PavlovOutcome {
        phases: [initial, asynchronous, synchronous, conditioned],
        final_conductance: net.get(BELL, SALIVATION).conductance,
    })
}

// ---------------------------------------------------------------------------
// Digit recognition

/// 3 × 5 pixel bitmap, row-major from the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bitmap(pub [bool; 15]);

pub const DIGIT_FONT: [&str; 10] = [
    "111101101101111",
    "010110010010111",
    "111001111100111",
    "111001111001111",
    "101101111001001",
    "111100111001111",
    "111100111101111",
    "111001001001001",
    "111101111101111",
    "111101111001111",
];

impl Bitmap {
    pub fn digit(d: usize) -> Bitmap {
        DIGIT_FONT[d % 10].parse().expect("font bitmaps are valid")
    }

    pub fn from_bits(bits: &[bool]) -> Result<Bitmap> {
        let arr: [bool; 15] = bits
            .try_into()
            .map_err(|_| Error::domain(format!("bitmap needs 15 pixels, got {}", bits.len())))?;
        Ok(Bitmap(arr))
    }

    pub fn inverted(&self) -> Bitmap {
        Bitmap(self.0.map(|b| !b))
    }

    pub fn flipped(&self, pixel: usize) -> Bitmap {
        let mut b = *self;
        b.0[pixel] = !b.0[pixel];
        b
    }

    pub fn hamming(&self, other: &Bitmap) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    pub fn black(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn grid(&self) -> String {
        self.0
            .chunks(3)
            .map(|r| r.iter().map(|&b| if b { '#' } else { '.' }).collect::<String>())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl FromStr for Bitmap {
    type Err = Error;

    /// Accepts a 15-character `01` string or a 3×5 grid (any whitespace
    /// between rows; `1`/`#`/`X` black, `0`/`.`/`_` void).
    fn from_str(s: &str) -> Result<Bitmap> {
        let bits: Vec<bool> = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '1' | '#' | 'X' | 'x' => Ok(true),
                '0' | '.' | '_' => Ok(false),
                other => Err(Error::domain(format!("unexpected bitmap character {other:?}"))),
            })
            .collect::<Result<_>>()?;
        Bitmap::from_bits(&bits)
    }
}

impl fmt::Display for Bitmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DigitConfig {
    pub rule: GrowthRule,
    pub windows: PlasticityWindows,
    /// Training amplitude of black pixels, V.
    pub black_voltage: f64,
    /// Training amplitude of void pixels, V.
    pub void_voltage: f64,
    /// Pulses per pixel during training.
    pub training_pulses: usize,
    /// Spacing of training pulses, s.
    pub training_period: f64,
    /// Readout amplitude, V.
    pub read_voltage: f64,
    /// Spacing between training end and readout pulse; sets the depression
    /// per false pixel through the paired-pulse window, s.
    pub read_interval: f64,
}

impl Default for DigitConfig {
    fn default() -> Self {
        DigitConfig {
            rule: GrowthRule::default(),
            windows: PlasticityWindows::default(),
            black_voltage: 5.0,
            void_voltage: 2.0,
            training_pulses: 200,
            training_period: 0.02,
            read_voltage: 1.0,
            read_interval: 0.5,
        }
    }
}

pub const DIGIT_OUTPUT: usize = 15;

/// Trains on `trained` by scanning pixels one at a time (black at 5 V, void
/// at 2 V, each pixel node a candidate synapse to a shared output).
pub fn train_digit_network(trained: &Bitmap, cfg: &DigitConfig) -> Result<SynapticNetwork> {
    let mut net = SynapticNetwork::new(16);
    for k in 0..15 {
        net.add_candidate(k, DIGIT_OUTPUT)?;
    }
    for k in 0..15 {
        let amplitude = if trained.0[k] { cfg.black_voltage } else { cfg.void_voltage };
        for _ in 0..cfg.training_pulses {
            growth_step(&mut net, &[Pulse { node: k, time: 0.0, amplitude }], cfg.training_period, &cfg.rule)?;
        }
    }
    Ok(net)
}

/// Integrated output for `query` on a trained network, relative to the
/// trained pattern's own readout.
///
/// Current flows through synapses whose query pixel is black; every pixel
/// that differs from the trained pattern gates the fibers and scales all
/// synaptic strengths by the paired-pulse ratio at `read_interval`.
pub fn read_digit(net: &SynapticNetwork, trained: &Bitmap, query: &Bitmap, cfg: &DigitConfig) -> Result<f64> {
    cfg.windows.validate()?;
    let current = |b: &Bitmap| -> f64 {
        let drives: Vec<(usize, f64)> = (0..15).filter(|&k| b.0[k]).map(|k| (k, cfg.read_voltage)).collect();
        net.output_current(DIGIT_OUTPUT, &drives)
    };
    let reference = current(trained);
    if reference <= 0.0 {
        return Err(Error::Degenerate("trained pattern grew no synapses".into()));
    }
    let rho = paired_pulse_ratio(cfg.read_interval, &cfg.windows)?.clamp(0.0, 1.0);
    let mismatches = trained.hamming(query) as i32;
    Ok(current(query) * rho.powi(mismatches) / reference)
}

/// Trains on `trained` and scores `query`; both as bit slices of length 15.
pub fn train_and_read_digits(trained: &[bool], query: &[bool], cfg: &DigitConfig) -> Result<f64> {
    let trained = Bitmap::from_bits(trained)?;
    let query = Bitmap::from_bits(query)?;
    let net = train_digit_network(&trained, cfg)?;
    read_digit(&net, &trained, &query, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rule() -> GrowthRule {
        GrowthRule::default()
    }

    fn pair_network() -> SynapticNetwork {
        let mut net = SynapticNetwork::new(2);
        net.add_candidate(0, 1).unwrap();
        net
    }

    #[test]
    fn single_subthreshold_node_does_not_grow() {
        let mut net = pair_network();
        for _ in 0..100 {
            growth_step(&mut net, &[Pulse { node: 0, time: 0.0, amplitude: 3.0 }], 0.02, &rule()).unwrap();
        }
        assert!(!net.exists(0, 1));
        assert_eq!(net.get(0, 1).conductance, 0.0);
    }

    #[test]
    fn synchronous_pair_grows() {
        let mut net = pair_network();
        let pulses = [Pulse { node: 0, time: 0.0, amplitude: 3.0 }, Pulse { node: 1, time: 0.0, amplitude: 3.0 }];
        let r = growth_step(&mut net, &pulses, 0.02, &rule()).unwrap();
        assert_eq!(r.created, vec![(0, 1)]);
        let g1 = net.get(0, 1).conductance;
        growth_step(&mut net, &pulses, 0.02, &rule()).unwrap();
        assert!(net.get(0, 1).conductance > g1);
    }

    #[test]
    fn asynchronous_pair_does_not_grow() {
        let mut net = pair_network();
        let pulses = [Pulse { node: 0, time: 0.0, amplitude: 3.0 }, Pulse { node: 1, time: 0.01, amplitude: 3.0 }];
        for _ in 0..100 {
            growth_step(&mut net, &pulses, 0.02, &rule()).unwrap();
        }
        assert!(!net.exists(0, 1));
    }

    #[test]
    fn logistic_curve() {
        let r = rule();
        assert_eq!(conductance_curve(0.0, &r), r.g0);
        assert_abs_diff_eq!(conductance_curve(1e3, &r), r.g_max, epsilon = 1e-15);
        // inflection at G = g_max/2, t* = ln(g_max/G0 − 1)/r
        let t_star = (r.g_max / r.g0 - 1.0).ln() / r.s_curve_rate;
        assert_abs_diff_eq!(conductance_curve(t_star, &r), 0.5 * r.g_max, epsilon = 1e-15);
        let h = 1e-5;
        let slope = (conductance_curve(t_star + h, &r) - conductance_curve(t_star - h, &r)) / (2.0 * h);
        assert_abs_diff_eq!(slope, r.s_curve_rate * r.g_max / 4.0, epsilon = 1e-9 * r.g_max);
    }

    #[test]
    fn stepped_growth_matches_closed_form() {
        let mut net = pair_network();
        let pulses = [Pulse { node: 0, time: 0.0, amplitude: 5.0 }];
        for _ in 0..150 {
            growth_step(&mut net, &pulses, 0.02, &rule()).unwrap();
        }
        assert_abs_diff_eq!(net.get(0, 1).conductance, conductance_curve(3.0, &rule()), epsilon = 1e-15);
    }

    #[test]
    fn decay_calibration() {
        let m = DecayModel::calibrated();
        let s = |r| SynapseState { conductance: 1e-3, reinforcement: r, exists: true, growth_rate: 1.0 };
        let strong = long_term_decay(&s(1.0), HOURS_48, &m).unwrap();
        assert!(strong.conductance / 1e-3 >= 0.98);
        assert_abs_diff_eq!(strong.conductance / 1e-3, 0.99, epsilon = 1e-12);
        let weak = long_term_decay(&s(0.05), HOURS_48, &m).unwrap();
        assert_abs_diff_eq!(weak.conductance / 1e-3, 0.5, epsilon = 1e-12);
        assert_eq!(long_term_decay(&s(0.3), 0.0, &m).unwrap(), s(0.3));
        assert!(m.rate_unreinforced > m.rate_reinforced);
    }

    #[test]
    fn stdp_shape() {
        let w = PlasticityWindows::default();
        assert!(stdp_update(1e3, &w).abs() < 1e-12);
        assert!(stdp_update(-1e3, &w).abs() < 1e-12);
        assert_abs_diff_eq!(stdp_update(0.0, &w), w.stdp.a_plus);
        assert!(stdp_update(1e-6, &w) > stdp_update(5e-3, &w));
        assert!(stdp_update(-1e-6, &w) < 0.0);
    }

    #[test]
    fn paired_pulse() {
        let w = PlasticityWindows::default();
        assert_eq!(paired_pulse_ratio(0.5e-3, &w).unwrap(), 1.0);
        assert_eq!(paired_pulse_ratio(1e-3, &w).unwrap(), 1.0);
        assert!(paired_pulse_ratio(0.1, &w).unwrap() > paired_pulse_ratio(10.0, &w).unwrap());
        let off = PlasticityWindows { std: StdWindow { amplitude: 0.0, ..w.std }, ..w };
        for dt in [1e-4, 1e-2, 1.0, 100.0] {
            assert_eq!(paired_pulse_ratio(dt, &off).unwrap(), 1.0);
        }
        assert!(paired_pulse_ratio(0.0, &w).is_err());
    }

    #[test]
    fn pavlov_truth_table() {
        let out = run_pavlov_protocol(&rule(), &PavlovConfig::default()).unwrap();
        assert_eq!(out.phases, PavlovOutcome::expected());
        assert!(out.matches_expected());
    }

    #[test]
    fn bitmap_parsing() {
        let five = Bitmap::digit(5);
        assert_eq!(five.to_string(), DIGIT_FONT[5]);
        assert_eq!("111\n100\n111\n001\n111".parse::<Bitmap>().unwrap(), five);
        assert_eq!(five.grid().parse::<Bitmap>().unwrap(), five);
        assert_eq!(five.hamming(&Bitmap::digit(6)), 1);
        assert!("0101".parse::<Bitmap>().is_err());
        assert!(matches!(train_and_read_digits(&[true; 14], &[true; 15], &DigitConfig::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn digit_readout() {
        let cfg = DigitConfig::default();
        let five = Bitmap::digit(5);
        let net = train_digit_network(&five, &cfg).unwrap();
        for k in 0..15 {
            assert_eq!(net.exists(k, DIGIT_OUTPUT), five.0[k], "pixel {k}");
        }
        assert_abs_diff_eq!(read_digit(&net, &five, &five, &cfg).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(read_digit(&net, &five, &five.inverted(), &cfg).unwrap(), 0.0);
        for k in 0..15 {
            assert!(read_digit(&net, &five, &five.flipped(k), &cfg).unwrap() < 1.0);
        }
        let six = read_digit(&net, &five, &Bitmap::digit(6), &cfg).unwrap();
        let eight = read_digit(&net, &five, &Bitmap::digit(8), &cfg).unwrap();
        assert!(six > eight, "{six} {eight}");
    }

    #[test]
    fn jitter_is_seeded() {
        let jittered = GrowthRule { jitter: Some(RateJitter { relative_sd: 0.3, seed: 11 }), ..rule() };
        let run = || {
            let mut net = SynapticNetwork::new(3);
            net.add_candidate(0, 1).unwrap();
            net.add_candidate(0, 2).unwrap();
            for _ in 0..50 {
                growth_step(&mut net, &[Pulse { node: 0, time: 0.0, amplitude: 5.0 }], 0.02, &jittered).unwrap();
            }
            (net.get(0, 1).conductance, net.get(0, 2).conductance)
        };
        let a = run();
        assert_eq!(a, run());
        assert_ne!(a.0, a.1);
    }
}
