//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::time::Instant;

use otkit::electrothermal::*;
use otkit::exec::Execution;
use otkit::impedance::*;
use otkit::oect::*;
use otkit::reservoir::*;
use otkit::synapse::*;
use otkit::tft::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Check {
    Check { ok, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn criterion(name: &str, budget_s: Option<f64>, body: impl FnOnce() -> Vec<Check>) -> bool {
    let start = Instant::now();
    let mut checks = body();
    let secs = start.elapsed().as_secs_f64();
    checks.push(match budget_s {
        Some(b) => check(secs < b, format!("runtime {secs:.2} s < {b} s")),
        None => check(true, format!("runtime {secs:.2} s")),
    });
    let ok = checks.iter().all(|c| c.ok);
    let detail: Vec<String> = checks
        .iter()
        .map(|c| if c.ok { c.detail.clone() } else { format!("[failed] {}", c.detail) })
        .collect();
    println!("{} {name}: {}", if ok { "PASS" } else { "FAIL" }, detail.join("; "));
    ok
}

fn tft_suite() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let device = |rng: &mut ChaCha8Rng| {
        Tft::new(TftParams {
            mobility: log_uniform(rng, 1e-6, 1e-3),
            c_ins: log_uniform(rng, 1e-4, 1e-2),
            width: 100e-6,
            length: log_uniform(rng, 1e-6, 1e-4),
            v_th: rng.random_range(-2.0..2.0),
            overlap: 2e-6,
            subthreshold_slope: rng.random_range(0.07..0.5),
            polarity: Polarity::N,
            temperature: 298.15,
            stitch_overdrive: 1e-3,
        })
        .unwrap()
    };

    let mut worst_gm = 0.0f64;
    for k in 0..1000 {
        let t = device(&mut rng);
        let vth = t.params().v_th;
        let (vgs, vds, h) = if k % 4 == 3 {
            // subthreshold
            let vgs = vth - rng.random_range(0.01..2.0);
            (vgs, rng.random_range(0.05..10.0), 1e-6)
        } else {
            let vov = rng.random_range(0.05..10.0);
            let ratio = if rng.random_bool(0.5) { rng.random_range(0.05..0.9) } else { rng.random_range(1.1..5.0) };
            (vth + vov, ratio * vov, 1e-6 * vov)
        };
        let fd = (t.drain_current(vgs + h, vds) - t.drain_current(vgs - h, vds)) / (2.0 * h);
        worst_gm = worst_gm.max(rel(fd, t.transconductance(vgs, vds)));
    }

    let mut worst_tlm = 0.0f64;
    for _ in 0..200 {
        let r_c = log_uniform(&mut rng, 1e-4, 1e2);
        let slope = log_uniform(&mut rng, 1e2, 1e7);
        let pts: Vec<TlmPoint> = (1..=5)
            .map(|i| {
                let length = 5e-6 * i as f64;
                TlmPoint { length, r_tot_w: r_c + slope * length }
            })
            .collect();
        let fit = tlm_extract(&pts).unwrap();
        worst_tlm = worst_tlm.max(rel(fit.r_c_w, r_c)).max(rel(fit.channel_slope, slope));
    }

    let mut worst_join = 0.0f64;
    for _ in 0..1000 {
        let t = device(&mut rng);
        let vov = rng.random_range(0.01..20.0);
        let vgs = t.params().v_th + vov;
        let lin = t.drain_current(vgs, vov);
        let sat = t.drain_current(vgs, vov.next_up());
        worst_join = worst_join.max(rel(lin, sat));
    }

    vec![
        check(worst_gm < 1e-6, format!("g_m vs finite difference max rel {worst_gm:.2e} < 1e-6 (1000 biases)")),
        check(worst_tlm < 1e-9, format!("TLM round trip max rel {worst_tlm:.2e}")),
        check(worst_join < 1e-12, format!("pinch-off continuity max rel {worst_join:.2e} < 1e-12")),
    ]
}

fn opbt_base() -> OpbtThermalParams {
    OpbtThermalParams {
        i_ref: 1e-3,
        v_ref: 1.0,
        alpha: 2.0,
        i_off: 1e-7,
        e_act_on: 0.3,
        e_act_off: 0.3,
        theta_th: 1e4,
        t_ambient: 293.15,
        t_max: 600.0,
    }
}

fn electrothermal_suite() -> Vec<Check> {
    const AREA_CM2: f64 = 1e-4;
    let p = opbt_base();
    let currents: Vec<f64> = (0..=120).map(|k| 1e-4 * 10f64.powf(k as f64 * 2.7 / 120.0)).collect();
    let trace = trace_current_controlled(&p, &currents, Execution::default()).unwrap();
    let turns = ndr_turning_points(&trace);
    let density = trace.iter().map(|o| o.power() / AREA_CM2).fold(0.0, f64::max);

    let grid_oracle = |p: &OpbtThermalParams, v: f64| {
        let n = 10_000;
        let g: Vec<f64> = (0..n)
            .map(|i| p.balance_residual(v, p.t_ambient + (p.t_max - p.t_ambient) * i as f64 / (n - 1) as f64))
            .collect();
        g.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut agree = 0;
    for _ in 0..100 {
        let ta = rng.random_range(250.0..350.0);
        let q = OpbtThermalParams {
            e_act_on: rng.random_range(0.1..0.5),
            e_act_off: rng.random_range(0.0..0.5),
            alpha: rng.random_range(1.0..3.0),
            theta_th: log_uniform(&mut rng, 1e2, 3e4),
            t_ambient: ta,
            t_max: ta + 400.0,
            ..opbt_base()
        };
        let v = rng.random_range(0.05..1.5);
        let count = match solve_steady_state(&q, v) {
            Ok(roots) => roots.len(),
            Err(otkit::Error::ThermalRunaway { .. }) => 0,
            Err(e) => panic!("{e}"),
        };
        agree += usize::from(count == grid_oracle(&q, v));
    }

    let mut worst_duty = 0.0f64;
    for v in [0.3, 0.5, 0.8, 0.9] {
        let pulse = PulseSpec { pulse_width: 5e-3, duty_cycle: 1.0, thermal_capacitance: 1e-6 };
        let pulsed = pulsed_steady_temperature(&p, &pulse, v).unwrap();
        let dc = solve_steady_state(&p, v).unwrap()[0].temperature;
        worst_duty = worst_duty.max((pulsed - dc).abs());
    }

    vec![
        check(p.e_act_on == 0.3, "E_act 0.3 eV"),
        check(density > 10.0, format!("peak power density {density:.1} W/cm² > 10 (area 1e-4 cm²)")),
        check(!turns.is_empty(), format!("dV/dI sign changes {}", turns.len())),
        check(agree == 100, format!("root count agrees with 1e4-point grid on {agree}/100 draws")),
        check(worst_duty < 1e-3, format!("duty 1 vs DC max |dT| {worst_duty:.2e} K < 1e-3 K")),
    ]
}

fn oect_suite() -> Vec<Check> {
    let mut exact = true;
    for (f, tau_i) in [(0.5, 1e-3), (0.25, 3e-4), (1.0, 7e-6), (0.125, 2.5e-2)] {
        let tau_e = tau_i / f;
        exact &= f * tau_e / tau_i == 1.0;
        exact &= classify_transient(f, tau_e, tau_i) == TransientShape::Flat;
        for t in [0.0, 0.5 * tau_i, 3.0 * tau_i] {
            exact &= transient_current(f, t, 2e-4, -1.5e-4, tau_e, tau_i).unwrap() == 2e-4;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut agree = 0;
    for _ in 0..1000 {
        let f = rng.random_range(0.01..1.0);
        let tau_e = log_uniform(&mut rng, 1e-7, 1e-1);
        let tau_i = log_uniform(&mut rng, 1e-7, 1e-1);
        // spike exactly when the ionic time is shorter than f·τ_e
        let want = if tau_i > f * tau_e {
            TransientShape::Monotone
        } else if tau_i < f * tau_e {
            TransientShape::Spike
        } else {
            TransientShape::Flat
        };
        let delta = -1e-4;
        let start = transient_current(f, 0.0, 1e-4, delta, tau_e, tau_i).unwrap() - 1e-4;
        let shape_ok = match want {
            TransientShape::Monotone => start * delta > 0.0,
            TransientShape::Spike => start * delta < 0.0,
            TransientShape::Flat => start == 0.0,
        };
        agree += usize::from(classify_transient(f, tau_e, tau_i) == want && shape_ok);
    }

    let (slope, v_ref, c_ref) = (0.1, 0.4, 1e-6);
    let v: Vec<f64> = (0..=6).map(|k| turn_off_voltage(c_ref * 10f64.powi(k), slope, v_ref, c_ref).unwrap()).collect();
    let worst = v.windows(2).map(|w| ((w[0] - w[1]) - slope).abs()).fold(0.0, f64::max);

    vec![
        check(exact, "prefactor cancels exactly at f·τ_e/τ_i = 1"),
        check(agree == 1000, format!("spike/monotone classification agrees on {agree}/1000 draws")),
        check(worst < 1e-12, format!("turn-off shift 100 mV/dec over 6 decades, max deviation {worst:.1e} V")),
    ]
}

fn impedance_suite() -> Vec<Check> {
    let ideal = WarburgParams { r_w: 1e5, omega_d: 0.1, exponent: 0.5, boundary: Boundary::Reflecting };
    let low = warburg_impedance(&ideal, 1e-6 * ideal.omega_d).unwrap();
    let low_err = rel(low.re, ideal.r_w / 3.0);
    let high = warburg_impedance(&ideal, 1e6 * ideal.omega_d).unwrap();
    let phase = high.arg().to_degrees();

    let truth = CircuitModel {
        r_s: 200.0,
        rc1: RcElement { r: 2e3, c: 5e-9 },
        rc2: RcElement { r: 1e3, c: 1e-6 },
        warburg: WarburgParams { r_w: 1e5, omega_d: 1.0, exponent: 0.4, boundary: Boundary::Reflecting },
    };
    let omegas = log_frequencies(1e-3, 1e7, 10);
    let mut guess = truth;
    guess.r_s *= 1.15;
    guess.rc1.r *= 0.9;
    guess.rc1.c *= 1.2;
    guess.rc2.r *= 1.125;
    guess.rc2.c *= 0.85;
    guess.warburg.r_w *= 1.1;
    guess.warburg.omega_d *= 0.85;
    guess.warburg.exponent *= 0.95;

    let clean = synthesize(&truth, &omegas);
    let fit = fit_spectrum(&clean, &guess, &FitOptions::default()).unwrap().model;
    let clean_err = rel(fit.warburg.r_w, truth.warburg.r_w).max(rel(fit.warburg.omega_d, truth.warburg.omega_d));

    let errs = Execution::default().map_range(100, |seed| {
        let spec = add_multiplicative_noise(&clean, 0.01, seed as u64);
        match fit_spectrum(&spec, &guess, &FitOptions::default()) {
            Ok(r) => rel(r.model.warburg.r_w, truth.warburg.r_w).max(rel(r.model.warburg.omega_d, truth.warburg.omega_d)),
            Err(_) => f64::INFINITY,
        }
    });
    let noisy_err = errs.iter().copied().fold(0.0, f64::max);

    let d = diffusion_constant(0.1, 100e-6).unwrap();

    vec![
        check(low_err < 1e-3, format!("low-frequency Re Z = R_W/3 within {:.3}%", 100.0 * low_err)),
        check((phase + 45.0).abs() < 0.1, format!("high-frequency phase {phase:.4}°")),
        check(clean_err < 0.01, format!("noiseless fit max rel error {:.2e}", clean_err)),
        check(noisy_err < 0.05, format!("1% noise, 100 seeds, max rel error {:.2}%", 100.0 * noisy_err)),
        check(rel(d, 1e-9) < 1e-12, format!("D = {d:.3e} m²/s for b = 100 µm, ω_D = 0.1 rad/s")),
    ]
}

fn reservoir_suite() -> Vec<Check> {
    let map = DelayFeedbackConfig {
        history: History::Constant(0.3),
        ..DelayFeedbackConfig::new(0.0, 1.0, 2.9, Nonlinearity::Logistic)
    };
    let gains: Vec<f64> = (0..=200).map(|k| 2.9 + k as f64 * 1e-3).collect();
    let cols = map_bifurcation(&map, &gains, 5000, 64, Execution::default()).unwrap();
    let found = first_period_doubling(&cols, 1e-4).unwrap_or(f64::NAN);
    // stability oracle: |f'(y*)| = |2 - λ| reaches 1, located by bisection
    let (mut lo, mut hi) = (2.5f64, 3.5f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let y = 1.0 - 1.0 / mid;
        if (mid * (1.0 - 2.0 * y)).abs() < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);

    let n = 20_000;
    let segment: Vec<(f64, f64)> = (0..n).map(|i| {
        let s = i as f64 / (n - 1) as f64;
        (0.3 + 0.6 * s, 0.1 + 0.4 * s)
    }).collect();
    let d1 = box_counting_dimension(&segment, 1.0 / 256.0, 1.0 / 8.0, 6).unwrap().dimension;
    let side = 400;
    let square: Vec<(f64, f64)> = (0..side * side)
        .map(|k| ((k % side) as f64 / side as f64, (k / side) as f64 / side as f64))
        .collect();
    let d2 = box_counting_dimension(&square, 1.0 / 128.0, 1.0 / 8.0, 5).unwrap().dimension;

    let data = bundled_iris();
    let mean_accuracy = |cfg: &IrisConfig| {
        let states = iris_states(cfg, &data, Execution::default()).unwrap();
        (0..10).map(|s| evaluate_split(cfg, &data, &states, s).unwrap().accuracy).sum::<f64>() / 10.0
    };
    let cfg = IrisConfig::default();
    let acc = mean_accuracy(&cfg);
    let control = mean_accuracy(&IrisConfig { gain: 0.0, ..cfg.clone() });

    vec![
        check((found - 3.0).abs() <= 0.01 && (oracle - 3.0).abs() <= 0.01, format!("first period doubling at {found:.4} (oracle {oracle:.4})")),
        check((d1 - 1.0).abs() <= 0.05, format!("segment dimension {d1:.3}")),
        check((d2 - 2.0).abs() <= 0.05, format!("square dimension {d2:.3}")),
        check(acc >= 0.9, format!("Iris mean test accuracy {:.1}% over 10 seeds, 120/30 split (hardware reference 29/30 = 96.7%)", 100.0 * acc)),
        check((control - 1.0 / 3.0).abs() <= 0.1, format!("gain-0 control {:.1}%", 100.0 * control)),
    ]
}

fn synapse_suite() -> Vec<Check> {
    let pavlov = run_pavlov_protocol(&GrowthRule::default(), &PavlovConfig::default()).unwrap();
    let matched = pavlov.phases.iter().zip(PavlovOutcome::expected()).filter(|(a, b)| **a == *b).count();

    let cfg = DigitConfig::default();
    let five = Bitmap::digit(5);
    let net = train_digit_network(&five, &cfg).unwrap();
    let top = read_digit(&net, &five, &five, &cfg).unwrap();
    let below = (0..15).filter(|&k| read_digit(&net, &five, &five.flipped(k), &cfg).unwrap() < top).count();
    let inverse = read_digit(&net, &five, &five.inverted(), &cfg).unwrap();

    let model = DecayModel::calibrated();
    let keep = |r: f64| {
        let s = SynapseState { conductance: 1.0, reinforcement: r, exists: true, growth_rate: 1.0 };
        long_term_decay(&s, HOURS_48, &model).unwrap().conductance
    };
    let (strong, weak) = (keep(1.0), keep(0.05));

    vec![
        check(matched == 4, format!("Pavlov phases {matched}/4")),
        check(below == 15, format!("single flips below trained score {below}/15")),
        check(inverse == 0.0, format!("inverted pattern score {inverse}")),
        check(strong >= 0.98 && (weak - 0.5).abs() <= 0.05, format!("48 h retention {:.1}% vs {:.1}%", 100.0 * strong, 100.0 * weak)),
    ]
}

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != otkit_cli::output::MANIFEST_FILE)
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn harness_suite() -> Vec<Check> {
    let tmp = tempfile::TempDir::new().unwrap();
    let cfg = tmp.path().join("noisy.toml");
    fs::write(&cfg, "[impedance]\nnoise = 0.01\n").unwrap();
    let cfg = cfg.display().to_string();
    let runs: [Vec<&str>; 3] = [
        vec!["--config", &cfg, "--seed", "11", "impedance", "simulate"],
        vec!["--seed", "11", "reservoir", "iris", "--splits", "3"],
        vec!["--seed", "11", "synapse", "digits"],
    ];
    let mut same = 0;
    let mut files = 0;
    for (k, args) in runs.iter().enumerate() {
        let dirs = [tmp.path().join(format!("{k}a")), tmp.path().join(format!("{k}b"))];
        for d in &dirs {
            let mut full = vec!["otkit".to_string(), "--out".to_string(), d.display().to_string()];
            full.extend(args.iter().map(|s| s.to_string()));
            assert_eq!(otkit_cli::run(full), 0, "{args:?}");
        }
        let (a, b) = (outputs(&dirs[0]), outputs(&dirs[1]));
        files += a.len();
        same += usize::from(a == b && !a.is_empty());
    }
    vec![check(same == runs.len(), format!("{same}/{} seeded commands byte-identical ({files} data files)", runs.len()))]
}

fn main() {
    let results = [
        criterion("TFT suite", Some(5.0), tft_suite),
        criterion("Electrothermal suite", Some(30.0), electrothermal_suite),
        criterion("OECT suite", Some(5.0), oect_suite),
        criterion("Impedance suite", Some(60.0), impedance_suite),
        criterion("Reservoir suite", Some(300.0), reservoir_suite),
        criterion("Synapse suite", Some(10.0), synapse_suite),
        criterion("Harness", None, harness_suite),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
