//! Two-electrode impedance sensor: Warburg diffusion element, equivalent
//! circuit, complex least-squares fitting, and ion classification from
//! (turn-off voltage, equivalent diffusion resistance) pairs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::constants::{molar_to_number_density, BOLTZMANN, ELEMENTARY_CHARGE};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Blocking electrodes: coth form, capacitive at low frequency.
    #[default]
    Reflecting,
    /// Transmissive electrodes: tanh form, resistive at low frequency.
    Absorbing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarburgParams {
    /// Diffusion resistance, Ω.
    pub r_w: f64,
    /// Characteristic frequency D/b², rad/s.
    pub omega_d: f64,
    /// Diffusion exponent; 0.5 for ideal diffusion.
    #[serde(default = "default_exponent")]
    pub exponent: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

fn default_exponent() -> f64 {
    0.5
}

impl WarburgParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_w > 0.0 && self.omega_d > 0.0) {
            return Err(Error::domain("Warburg r_w and omega_d must be positive"));
        }
        if !(self.exponent > 0.0 && self.exponent <= 0.5) {
            return Err(Error::domain(format!(
                "Warburg exponent must lie in (0, 0.5], got {}",
                self.exponent
            )));
        }
        Ok(())
    }

    /// Low-frequency capacitance 1/(r_w·ω_D) of the reflecting element.
    pub fn limiting_capacitance(&self) -> f64 {
        1.0 / (self.r_w * self.omega_d)
    }

    fn eval(&self, omega: f64) -> Complex64 {
        let s = (Complex64::i() * (omega / self.omega_d)).powf(self.exponent);
        let shape = match self.boundary {
            Boundary::Reflecting => coth_over(s),
            Boundary::Absorbing => tanh_over(s),
        };
        shape * self.r_w
    }
}

/// Impedance of the generalized Warburg element,
/// `r_w · s⁻¹ · coth(s)` (reflecting) or `r_w · s⁻¹ · tanh(s)` (absorbing)
/// with `s = (iω/ω_D)^exponent`.
pub fn warburg_impedance(w: &WarburgParams, omega: f64) -> Result<Complex64> {
    if !(omega > 0.0) {
        return Err(Error::domain(format!("angular frequency must be positive, got {omega}")));
    }
    Ok(w.eval(omega))
}

const SERIES_SWITCH: f64 = 0.1;
const ASYMPTOTE_SWITCH: f64 = 20.0;

// coth(s)/s, for Re(s) > 0
fn coth_over(s: Complex64) -> Complex64 {
    let r = s.norm();
    if r < SERIES_SWITCH {
        // coth z / z = z⁻² + 1/3 − z²/45 + 2z⁴/945 − z⁶/4725
        let z2 = s * s;
        return z2.inv() + 1.0 / 3.0 + z2 * (-1.0 / 45.0 + z2 * (2.0 / 945.0 - z2 / 4725.0));
    }
    if r > ASYMPTOTE_SWITCH {
        return s.inv();
    }
    let e = (-2.0 * s).exp();
    (1.0 + e) / ((1.0 - e) * s)
}

// tanh(s)/s, for Re(s) > 0
fn tanh_over(s: Complex64) -> Complex64 {
    let r = s.norm();
    if r < SERIES_SWITCH {
        // tanh z / z = 1 − z²/3 + 2z⁴/15 − 17z⁶/315
        let z2 = s * s;
        return Complex64::new(1.0, 0.0) + z2 * (-1.0 / 3.0 + z2 * (2.0 / 15.0 - z2 * 17.0 / 315.0));
    }
    if r > ASYMPTOTE_SWITCH {
        return s.inv();
    }
    let e = (-2.0 * s).exp();
    (1.0 - e) / ((1.0 + e) * s)
}

/// Parallel resistor-capacitor pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcElement {
    pub r: f64,
    pub c: f64,
}

impl RcElement {
    pub fn impedance(&self, omega: f64) -> Complex64 {
        Complex64::new(self.r, 0.0) / Complex64::new(1.0, omega * self.r * self.c)
    }
}

/// Series resistance, two RC elements for the electrode coatings, and the
/// Warburg element for diffusion through the electrolyte.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitModel {
    pub r_s: f64,
    pub rc1: RcElement,
    pub rc2: RcElement,
    pub warburg: WarburgParams,
}

impl CircuitModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_s >= 0.0 && self.rc1.r >= 0.0 && self.rc2.r >= 0.0) {
            return Err(Error::domain("circuit resistances must be >= 0"));
        }
        if !(self.rc1.c > 0.0 && self.rc2.c > 0.0) {
            return Err(Error::domain("circuit capacitances must be positive"));
        }
        self.warburg.validate()
    }

    fn eval(&self, omega: f64) -> Complex64 {
        Complex64::new(self.r_s, 0.0)
            + self.rc1.impedance(omega)
            + self.rc2.impedance(omega)
            + self.warburg.eval(omega)
    }
}

pub fn circuit_impedance(m: &CircuitModel, omega: f64) -> Result<Complex64> {
    if !(omega > 0.0) {
        return Err(Error::domain(format!("angular frequency must be positive, got {omega}")));
    }
    Ok(m.eval(omega))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedanceSample {
    pub omega: f64,
    pub z: Complex64,
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ImpedanceSpectrum {
    pub samples: Vec<ImpedanceSample>,
}

impl ImpedanceSpectrum {
    pub fn validate(&self) -> Result<()> {
        let mut prev = 0.0;
        for (i, s) in self.samples.iter().enumerate() {
            if !(s.omega > prev) {
                return Err(Error::domain(format!(
                    "sample {i}: angular frequencies must be positive and strictly increasing"
                )));
            }
            if !(s.z.re.is_finite() && s.z.im.is_finite()) {
                return Err(Error::domain(format!("sample {i}: impedance is not finite")));
            }
            if let Some(w) = s.weight {
                if !(w >= 0.0 && w.is_finite()) {
                    return Err(Error::domain(format!("sample {i}: weight must be finite and >= 0")));
                }
            }
            prev = s.omega;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Logarithmically spaced angular frequencies, both ends included.
pub fn log_frequencies(omega_min: f64, omega_max: f64, points_per_decade: usize) -> Vec<f64> {
    let decades = (omega_max / omega_min).log10();
    let n = (decades * points_per_decade as f64).round().max(1.0) as usize;
    (0..=n)
        .map(|k| omega_min * 10f64.powf(decades * k as f64 / n as f64))
        .collect()
}

/// Noise-free spectrum of a model.
pub fn synthesize(m: &CircuitModel, omegas: &[f64]) -> ImpedanceSpectrum {
    ImpedanceSpectrum {
        samples: omegas
            .iter()
            .map(|&omega| ImpedanceSample { omega, z: m.eval(omega), weight: None })
            .collect(),
    }
}

/// Multiplies each sample by `1 + σ·(n₁ + i·n₂)` with independent standard
/// normal `n₁, n₂` drawn from a seeded generator.
pub fn add_multiplicative_noise(spec: &ImpedanceSpectrum, sigma: f64, seed: u64) -> ImpedanceSpectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = spec
        .samples
        .iter()
        .map(|s| {
            let n1: f64 = StandardNormal.sample(&mut rng);
            let n2: f64 = StandardNormal.sample(&mut rng);
            ImpedanceSample { z: s.z * Complex64::new(1.0 + sigma * n1, sigma * n2), ..*s }
        })
        .collect();
    ImpedanceSpectrum { samples }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Plain residuals.
    Unit,
    /// Residuals divided by |Z_data|, balancing decades.
    #[default]
    Modulus,
}

/// Circuit parameters that can be held fixed during a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitParam {
    RS,
    R1,
    C1,
    R2,
    C2,
    RW,
    OmegaD,
    Exponent,
}

impl FitParam {
    pub const ALL: [FitParam; 8] = [
        FitParam::RS,
        FitParam::R1,
        FitParam::C1,
        FitParam::R2,
        FitParam::C2,
        FitParam::RW,
        FitParam::OmegaD,
        FitParam::Exponent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FitParam::RS => "r_s",
            FitParam::R1 => "r1",
            FitParam::C1 => "c1",
            FitParam::R2 => "r2",
            FitParam::C2 => "c2",
            FitParam::RW => "r_w",
            FitParam::OmegaD => "omega_d",
            FitParam::Exponent => "exponent",
        }
    }

    // unconstrained coordinate; positivity through log, exponent in (0, 0.5) through a logistic map
    fn to_free(self, m: &CircuitModel) -> f64 {
        match self {
            FitParam::RS => m.r_s.ln(),
            FitParam::R1 => m.rc1.r.ln(),
            FitParam::C1 => m.rc1.c.ln(),
            FitParam::R2 => m.rc2.r.ln(),
            FitParam::C2 => m.rc2.c.ln(),
            FitParam::RW => m.warburg.r_w.ln(),
            FitParam::OmegaD => m.warburg.omega_d.ln(),
            FitParam::Exponent => {
                let q = (2.0 * m.warburg.exponent).clamp(1e-9, 1.0 - 1e-9);
                (q / (1.0 - q)).ln()
            }
        }
    }

    fn set_free(self, m: &mut CircuitModel, u: f64) {
        match self {
            FitParam::RS => m.r_s = u.exp(),
            FitParam::R1 => m.rc1.r = u.exp(),
            FitParam::C1 => m.rc1.c = u.exp(),
            FitParam::R2 => m.rc2.r = u.exp(),
            FitParam::C2 => m.rc2.c = u.exp(),
            FitParam::RW => m.warburg.r_w = u.exp(),
            FitParam::OmegaD => m.warburg.omega_d = u.exp(),
            FitParam::Exponent => m.warburg.exponent = 0.5 / (1.0 + (-u).exp()),
        }
    }

    fn value(self, m: &CircuitModel) -> f64 {
        match self {
            FitParam::RS => m.r_s,
            FitParam::R1 => m.rc1.r,
            FitParam::C1 => m.rc1.c,
            FitParam::R2 => m.rc2.r,
            FitParam::C2 => m.rc2.c,
            FitParam::RW => m.warburg.r_w,
            FitParam::OmegaD => m.warburg.omega_d,
            FitParam::Exponent => m.warburg.exponent,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub weighting: Weighting,
    /// Parameters held at their guess values.
    pub fixed: Vec<FitParam>,
    /// Tie the second RC element to the first (electrodes coated alike).
    pub symmetric_rc: bool,
    /// Relative cost decrease below which the fit is converged.
    pub cost_tolerance: f64,
    /// Relative step size below which the fit is converged.
    pub step_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 500,
            weighting: Weighting::Modulus,
            fixed: Vec::new(),
            symmetric_rc: false,
            cost_tolerance: 1e-14,
            step_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub model: CircuitModel,
    /// Norm of the weighted residual vector.
    pub residual_norm: f64,
    /// Half the squared residual norm.
    pub cost: f64,
    pub iterations: usize,
    pub free_params: Vec<FitParam>,
    /// Relative standard errors of the free parameters (log-space covariance).
    pub relative_std_errors: Vec<f64>,
    /// Covariance of the free coordinates, row-major.
    pub covariance: Vec<f64>,
    /// Set when the Jacobian is numerically rank deficient at the optimum.
    pub rank_deficient: bool,
    pub converged: bool,
}

struct Problem<'a> {
    spec: &'a ImpedanceSpectrum,
    base: CircuitModel,
    free: Vec<FitParam>,
    symmetric_rc: bool,
    weights: Vec<f64>,
}

impl Problem<'_> {
    fn model(&self, x: &DVector<f64>) -> CircuitModel {
        let mut m = self.base;
        for (p, &u) in self.free.iter().zip(x.iter()) {
            p.set_free(&mut m, u);
        }
        if self.symmetric_rc {
            m.rc2 = m.rc1;
        }
        m
    }

    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let m = self.model(x);
        let n = self.spec.samples.len();
        let mut r = DVector::zeros(2 * n);
        for (i, s) in self.spec.samples.iter().enumerate() {
            let d = (m.eval(s.omega) - s.z) * self.weights[i];
            r[2 * i] = d.re;
            r[2 * i + 1] = d.im;
        }
        r
    }

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let m = 2 * self.spec.samples.len();
        let mut j = DMatrix::zeros(m, x.len());
        for k in 0..x.len() {
            let h = 1e-6 * (1.0 + x[k].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let col = (self.residuals(&xp) - self.residuals(&xm)) / (2.0 * h);
            j.set_column(k, &col);
        }
        j
    }
}

/// Damped Gauss-Newton (Levenberg-Marquardt) fit of a circuit model to a
/// spectrum. Residuals stack real and imaginary parts.
///
/// Deterministic for fixed inputs. Non-positive guess values are held fixed
/// because they have no log-space coordinate.
pub fn fit_spectrum(spec: &ImpedanceSpectrum, guess: &CircuitModel, options: &FitOptions) -> Result<FitReport> {
    spec.validate()?;
    guess.validate()?;
    let free: Vec<FitParam> = FitParam::ALL
        .iter()
        .copied()
        .filter(|p| !options.fixed.contains(p))
        .filter(|p| !(options.symmetric_rc && matches!(p, FitParam::R2 | FitParam::C2)))
        .filter(|p| p.value(guess) > 0.0)
        .collect();
    if free.is_empty() {
        return Err(Error::Config("no free parameters to fit".into()));
    }
    if 2 * spec.len() < free.len() {
        return Err(Error::Degenerate(format!(
            "{} samples cannot determine {} parameters",
            spec.len(),
            free.len()
        )));
    }
    let weights = spec
        .samples
        .iter()
        .map(|s| {
            let w = s.weight.unwrap_or(1.0);
            match options.weighting {
                Weighting::Unit => w,
                Weighting::Modulus => w / s.z.norm().max(f64::MIN_POSITIVE),
            }
        })
        .collect();
    let mut base = *guess;
    if options.symmetric_rc {
        base.rc2 = base.rc1;
    }
    let problem = Problem { spec, base, free: free.clone(), symmetric_rc: options.symmetric_rc, weights };

    let mut x = DVector::from_iterator(free.len(), free.iter().map(|p| p.to_free(&base)));
    let mut r = problem.residuals(&x);
    let mut cost = 0.5 * r.norm_squared();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = cost == 0.0;

    while !converged && iterations < options.max_iterations {
        iterations += 1;
        let j = problem.jacobian(&x);
        let jt = j.transpose();
        let a = &jt * &j;
        let g = &jt * &r;
        if g.amax() <= 1e-15 * (1.0 + cost) {
            converged = true;
            break;
        }
        let diag_floor = 1e-12 * a.diagonal().amax().max(f64::MIN_POSITIVE);
        let mut improved = false;
        while lambda < 1e16 {
            let mut damped = a.clone();
            for k in 0..damped.nrows() {
                damped[(k, k)] += lambda * a[(k, k)].max(diag_floor);
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= 4.0;
                    continue;
                }
            };
            let x_new = &x + &step;
            let r_new = problem.residuals(&x_new);
            let cost_new = 0.5 * r_new.norm_squared();
            if cost_new.is_finite() && cost_new < cost {
                let decrease = cost - cost_new;
                let small_step = step.norm() <= options.step_tolerance * (x.norm() + options.step_tolerance);
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                if decrease <= options.cost_tolerance * cost || small_step || cost == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            // no descent direction left at working precision
            converged = true;
        }
    }

    let j = problem.jacobian(&x);
    let svd = j.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let rank_deficient = !(smin > 1e-10 * smax);
    if rank_deficient {
        log::warn!("impedance fit: Jacobian is rank deficient (condition {:.2e})", smax / smin);
    }
    let dof = (r.len() as f64 - x.len() as f64).max(1.0);
    let s2 = 2.0 * cost / dof;
    let jtj = j.transpose() * &j;
    let cov = jtj
        .pseudo_inverse(1e-14 * smax * smax)
        .map(|c| c * s2)
        .unwrap_or_else(|_| DMatrix::from_element(x.len(), x.len(), f64::NAN));
    // log-space standard errors are relative errors of the physical values
    let relative_std_errors = free
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let sd = cov[(k, k)].max(0.0).sqrt();
            match p {
                FitParam::Exponent => {
                    let e = problem.model(&x).warburg.exponent;
                    sd * (1.0 - 2.0 * e)
                }
                _ => sd,
            }
        })
        .collect();
    let report = FitReport {
        model: problem.model(&x),
        residual_norm: r.norm(),
        cost,
        iterations,
        free_params: free,
        relative_std_errors,
        covariance: cov.transpose().iter().copied().collect(),
        rank_deficient,
        converged,
    };
    if converged {
        Ok(report)
    } else {
        Err(Error::FitNotConverged { best: Box::new(report) })
    }
}

/// Equivalent diffusion resistance R_W*.
///
/// At low frequency the reflecting element traces a straight line in the
/// Nyquist plane whose extension meets the real axis at R_W*; for ideal
/// diffusion this is r_w/3. The line is taken through two points six to eight
/// decades below ω_D, where higher-order terms are negligible.
pub fn extract_rw_star(fitted: &CircuitModel) -> f64 {
    // unit element, so the result scales exactly with r_w
    let w = WarburgParams { r_w: 1.0, boundary: Boundary::Reflecting, ..fitted.warburg };
    let z1 = w.eval(w.omega_d * 1e-8);
    let z2 = w.eval(w.omega_d * 1e-6);
    fitted.warburg.r_w * (z1.re - z1.im * (z2.re - z1.re) / (z2.im - z1.im))
}

/// D = ω_D·b², m²/s.
pub fn diffusion_constant(omega_d: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::domain(format!("electrode distance must be positive, got {b}")));
    }
    if !(omega_d >= 0.0) {
        return Err(Error::domain("characteristic frequency must be >= 0"));
    }
    Ok(omega_d * b * b)
}

/// ω_D = D/b², rad/s.
pub fn characteristic_frequency(d: f64, b: f64) -> Result<f64> {
    if !(b > 0.0 && d >= 0.0) {
        return Err(Error::domain("need b > 0 and D >= 0"));
    }
    Ok(d / (b * b))
}

/// R_W = k_B·T·b/(e²·A·D·n) with n the ion number density for molarity `c`.
pub fn diffusion_resistance(temperature: f64, b: f64, area: f64, d: f64, c: f64) -> Result<f64> {
    for (name, v) in [("temperature", temperature), ("b", b), ("area", area), ("D", d), ("c", c)] {
        if !(v > 0.0) {
            return Err(Error::domain(format!("{name} must be positive, got {v}")));
        }
    }
    let n = molar_to_number_density(c);
    Ok(BOLTZMANN * temperature * b / (ELEMENTARY_CHARGE * ELEMENTARY_CHARGE * area * d * n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    /// mol/l
    pub concentration: f64,
    pub v_to: f64,
    pub r_w_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesCurve {
    pub species: String,
    pub points: Vec<CalibrationPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SensorCalibration {
    pub curves: Vec<SpeciesCurve>,
    /// Weight of one volt of turn-off voltage against one decade of R_W*.
    #[serde(default = "default_volt_scale")]
    pub volts_per_decade: f64,
}

fn default_volt_scale() -> f64 {
    0.1
}

impl SensorCalibration {
    pub fn new(curves: Vec<SpeciesCurve>) -> Self {
        SensorCalibration { curves, volts_per_decade: default_volt_scale() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.curves.len() < 2 {
            return Err(Error::Config(format!(
                "calibration needs at least two species, got {}",
                self.curves.len()
            )));
        }
        if !(self.volts_per_decade > 0.0) {
            return Err(Error::Config("volts_per_decade must be positive".into()));
        }
        for c in &self.curves {
            if c.points.len() < 2 {
                return Err(Error::Config(format!("species {} needs at least two points", c.species)));
            }
            for w in c.points.windows(2) {
                if !(w[1].concentration > w[0].concentration) {
                    return Err(Error::Config(format!(
                        "species {}: concentrations must be strictly increasing",
                        c.species
                    )));
                }
            }
            for p in &c.points {
                if !(p.concentration > 0.0 && p.r_w_star > 0.0) {
                    return Err(Error::Config(format!(
                        "species {}: concentration and R_W* must be positive",
                        c.species
                    )));
                }
            }
        }
        Ok(())
    }

    fn feature(&self, v_to: f64, r_w_star: f64) -> (f64, f64) {
        (v_to / self.volts_per_decade, r_w_star.log10())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub species: String,
    /// Log-interpolated along the winning curve, mol/l.
    pub concentration: f64,
    /// (d₂ − d₁)/(d₂ + d₁) from the distances to the two closest curves; 1 on a curve.
    pub confidence: f64,
    pub distance: f64,
}

/// Nearest calibration curve in (V_TO, log₁₀ R_W*) space.
pub fn classify_ion(v_to: f64, r_w_star: f64, calib: &SensorCalibration) -> Result<Classification> {
    calib.validate()?;
    if !(r_w_star > 0.0) {
        return Err(Error::domain("R_W* must be positive"));
    }
    let q = calib.feature(v_to, r_w_star);
    let mut scored: Vec<(f64, usize, f64)> = calib
        .curves
        .iter()
        .enumerate()
        .map(|(k, curve)| {
            let (d, c) = nearest_on_curve(calib, curve, q);
            (d, k, c)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (d1, k, conc) = scored[0];
    let d2 = scored[1].0;
    let confidence = if d1 + d2 > 0.0 { (d2 - d1) / (d2 + d1) } else { 0.0 };
    Ok(Classification {
        species: calib.curves[k].species.clone(),
        concentration: conc,
        confidence,
        distance: d1,
    })
}

fn nearest_on_curve(calib: &SensorCalibration, curve: &SpeciesCurve, q: (f64, f64)) -> (f64, f64) {
    let mut best = (f64::INFINITY, f64::NAN);
    for w in curve.points.windows(2) {
        let a = calib.feature(w[0].v_to, w[0].r_w_star);
        let b = calib.feature(w[1].v_to, w[1].r_w_star);
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 {
            (((q.0 - a.0) * dx + (q.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (px, py) = (a.0 + t * dx, a.1 + t * dy);
        let d = ((q.0 - px).powi(2) + (q.1 - py).powi(2)).sqrt();
        if d < best.0 {
            let c = w[0].concentration.powf(1.0 - t) * w[1].concentration.powf(t);
            best = (d, c);
        }
    }
    best
}
