use num_complex::Complex64;
use otkit::exec::Execution;
use otkit::impedance::*;
use proptest::prelude::*;

fn truth() -> CircuitModel {
    CircuitModel {
        r_s: 200.0,
        rc1: RcElement { r: 2e3, c: 5e-9 },
        rc2: RcElement { r: 1e3, c: 1e-6 },
        warburg: WarburgParams { r_w: 1e5, omega_d: 1.0, exponent: 0.4, boundary: Boundary::Reflecting },
    }
}

fn omegas() -> Vec<f64> {
    log_frequencies(1e-3, 1e7, 10)
}

fn perturbed(m: &CircuitModel, k: f64) -> CircuitModel {
    let mut g = *m;
    g.r_s *= 1.0 + 0.3 * k;
    g.rc1.r *= 1.0 - 0.2 * k;
    g.rc1.c *= 1.0 + 0.4 * k;
    g.rc2.r *= 1.0 + 0.25 * k;
    g.rc2.c *= 1.0 - 0.3 * k;
    g.warburg.r_w *= 1.0 + 0.2 * k;
    g.warburg.omega_d *= 1.0 - 0.3 * k;
    g.warburg.exponent = (g.warburg.exponent * (1.0 - 0.1 * k)).min(0.5);
    g
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn noiseless_fit_recovers_every_parameter() {
    let m = truth();
    let spec = synthesize(&m, &omegas());
    let rep = fit_spectrum(&spec, &perturbed(&m, 1.0), &FitOptions::default()).unwrap();
    let f = rep.model;
    for (got, want) in [
        (f.r_s, m.r_s),
        (f.rc1.r, m.rc1.r),
        (f.rc1.c, m.rc1.c),
        (f.rc2.r, m.rc2.r),
        (f.rc2.c, m.rc2.c),
        (f.warburg.r_w, m.warburg.r_w),
        (f.warburg.omega_d, m.warburg.omega_d),
        (f.warburg.exponent, m.warburg.exponent),
    ] {
        assert!(rel(got, want) < 0.01, "{got} vs {want}");
    }
    assert!(!rep.rank_deficient);
}

#[test]
fn noisy_fits_recover_diffusion_parameters() {
    let m = truth();
    let clean = synthesize(&m, &omegas());
    let guess = perturbed(&m, 0.5);
    let errs = Execution::Parallel.map_range(100, |seed| {
        let spec = add_multiplicative_noise(&clean, 0.01, seed as u64);
        let f = fit_spectrum(&spec, &guess, &FitOptions::default()).unwrap().model;
        (rel(f.warburg.r_w, m.warburg.r_w), rel(f.warburg.omega_d, m.warburg.omega_d))
    });
    let worst = errs.iter().fold((0.0f64, 0.0f64), |a, e| (a.0.max(e.0), a.1.max(e.1)));
    assert!(worst.0 < 0.05 && worst.1 < 0.05, "{worst:?}");
}

#[test]
fn refitting_a_fit_is_idempotent() {
    let m = truth();
    let noisy = add_multiplicative_noise(&synthesize(&m, &omegas()), 0.01, 11);
    let first = fit_spectrum(&noisy, &perturbed(&m, 0.5), &FitOptions::default()).unwrap().model;
    let again = fit_spectrum(&synthesize(&first, &omegas()), &first, &FitOptions::default()).unwrap();
    assert!(again.iterations <= 2);
    assert_eq!(again.model, first);
}

#[test]
fn fitting_is_deterministic() {
    let m = truth();
    let noisy = add_multiplicative_noise(&synthesize(&m, &omegas()), 0.01, 5);
    let a = fit_spectrum(&noisy, &perturbed(&m, 0.5), &FitOptions::default()).unwrap();
    let b = fit_spectrum(&noisy, &perturbed(&m, 0.5), &FitOptions::default()).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.iterations, b.iterations);
}

// coth(s)/s written out from exponentials, independent of the library's branch switches
fn reflecting_reference(w: &WarburgParams, omega: f64) -> Complex64 {
    let s = (Complex64::i() * (omega / w.omega_d)).powf(w.exponent);
    let e = (-2.0 * s).exp();
    (1.0 + e) / ((1.0 - e) * s) * w.r_w
}

#[test]
fn rw_star_for_anomalous_exponent_matches_line_fit() {
    let w = WarburgParams { r_w: 3e4, omega_d: 2.0, exponent: 0.35, boundary: Boundary::Reflecting };
    // least-squares line Re = a + b·Im through 25 points between 10⁻⁸ and 10⁻⁵ ω_D
    let pts: Vec<Complex64> = (0..25)
        .map(|k| reflecting_reference(&w, w.omega_d * 10f64.powf(-8.0 + 3.0 * k as f64 / 24.0)))
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, z| (a.0 + z.im, a.1 + z.re));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, z| (a.0 + (z.im - mx) * (z.re - my), a.1 + (z.im - mx).powi(2)));
    let intercept = my - sxy / sxx * mx;
    let m = CircuitModel { warburg: w, ..truth() };
    let got = extract_rw_star(&m);
    assert!(rel(got, intercept) < 1e-3, "{got} vs {intercept}");
    assert!(rel(got, w.r_w / 3.0) < 1e-3);
    // the real part alone keeps growing at low frequency when the exponent is below 1/2
    let re = reflecting_reference(&w, w.omega_d * 1e-6).re;
    assert!(re > 2.0 * w.r_w / 3.0);
}

fn warburg_params() -> impl Strategy<Value = WarburgParams> {
    (1e1..1e7f64, 1e-3..1e3f64, 0.2..=0.5f64).prop_map(|(r_w, omega_d, exponent)| WarburgParams {
        r_w,
        omega_d,
        exponent,
        boundary: Boundary::Reflecting,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reflecting_real_part_falls_with_frequency(w in warburg_params()) {
        let zs: Vec<Complex64> = log_frequencies(w.omega_d * 1e-6, w.omega_d * 1e6, 20)
            .into_iter()
            .map(|o| warburg_impedance(&w, o).unwrap())
            .collect();
        for p in zs.windows(2) {
            prop_assert!(p[1].re <= p[0].re * (1.0 + 1e-12), "{} -> {}", p[0].re, p[1].re);
        }
        let im = |o: f64| warburg_impedance(&w, o).unwrap().im.abs();
        // leading term grows as ω^(-2·exponent)
        let grown = im(w.omega_d * 1e-9) / im(w.omega_d * 1e-3);
        prop_assert!(grown > 0.5 * 1e6f64.powf(2.0 * w.exponent), "{grown}");
    }

    #[test]
    fn high_frequency_asymptote(w in warburg_params()) {
        let omega = w.omega_d * 1e12;
        let s = (Complex64::i() * (omega / w.omega_d)).powf(w.exponent);
        let z = warburg_impedance(&w, omega).unwrap();
        prop_assert!(((z * s - w.r_w).norm() / w.r_w) < 1e-9);
    }

    #[test]
    fn circuit_is_the_sum_of_its_parts(w in warburg_params(), rs in 0.0..1e4f64, r1 in 0.0..1e5f64, c1 in 1e-10..1e-4f64, logw in -4.0..8.0f64) {
        let m = CircuitModel { r_s: rs, rc1: RcElement { r: r1, c: c1 }, rc2: RcElement { r: 0.5 * r1, c: 10.0 * c1 }, warburg: w };
        let omega = 10f64.powf(logw);
        let parts = Complex64::new(rs, 0.0) + m.rc1.impedance(omega) + m.rc2.impedance(omega) + warburg_impedance(&w, omega).unwrap();
        let z = circuit_impedance(&m, omega).unwrap();
        prop_assert!((z - parts).norm() <= 1e-12 * parts.norm());
    }

    #[test]
    fn rw_star_is_homogeneous(w in warburg_params(), k in 0.1..10.0f64) {
        let m = CircuitModel { warburg: w, ..truth() };
        let scaled = CircuitModel { warburg: WarburgParams { r_w: k * w.r_w, ..w }, ..truth() };
        prop_assert!(rel(extract_rw_star(&scaled), k * extract_rw_star(&m)) < 1e-9);
    }

    #[test]
    fn extra_distant_species_does_not_change_the_answer(v in 0.0..1.0f64, lr in 4.0..7.5f64) {
        let mk = |name: &str, v0: f64, r0: f64| SpeciesCurve {
            species: name.into(),
            points: [1e-4, 1e-3, 1e-2, 1e-1]
                .iter()
                .map(|&c: &f64| CalibrationPoint { concentration: c, v_to: v0 - 0.1 * (c / 1e-4).log10(), r_w_star: r0 * 1e-4 / c })
                .collect(),
        };
        let mut cal = SensorCalibration::new(vec![mk("NaCl", 0.6, 1e7), mk("KCl", 0.4, 3e6)]);
        let before = classify_ion(v, 10f64.powf(lr), &cal).unwrap();
        cal.curves.push(mk("far", 50.0, 1e30));
        let after = classify_ion(v, 10f64.powf(lr), &cal).unwrap();
        prop_assert_eq!(before.species, after.species);
        prop_assert_eq!(before.concentration, after.concentration);
    }
}

#[test]
fn on_curve_queries_return_their_species() {
    let curves: Vec<SpeciesCurve> = (0..4)
        .map(|s| SpeciesCurve {
            species: format!("ion{s}"),
            points: (0..6)
                .map(|k| {
                    let c = 1e-5 * 10f64.powi(k);
                    CalibrationPoint { concentration: c, v_to: 0.2 * s as f64 - 0.1 * k as f64, r_w_star: 1e6 * 2f64.powi(s) / 10f64.powi(k) }
                })
                .collect(),
        })
        .collect();
    let cal = SensorCalibration::new(curves);
    for curve in &cal.curves {
        for w in curve.points.windows(2) {
            for t in [0.0, 0.25, 0.5, 0.75] {
                let v = w[0].v_to + t * (w[1].v_to - w[0].v_to);
                let r = w[0].r_w_star.powf(1.0 - t) * w[1].r_w_star.powf(t);
                let got = classify_ion(v, r, &cal).unwrap();
                assert_eq!(got.species, curve.species);
                let c = w[0].concentration.powf(1.0 - t) * w[1].concentration.powf(t);
                assert!(rel(got.concentration, c) < 1e-9);
            }
        }
    }
}
