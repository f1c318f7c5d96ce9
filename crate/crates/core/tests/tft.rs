use otkit::tft::*;
use proptest::prelude::*;

fn device(mobility: f64, c_ins: f64, l: f64, v_th: f64, s: f64, polarity: Polarity) -> Tft {
    Tft::new(TftParams {
        mobility,
        c_ins,
        width: 100e-6,
        length: l,
        v_th,
        overlap: 2e-6,
        subthreshold_slope: s,
        polarity,
        temperature: 298.15,
        stitch_overdrive: 1e-3,
    })
    .unwrap()
}

fn params() -> impl Strategy<Value = Tft> {
    (1e-6..1e-3f64, 1e-4..1e-2f64, 1e-6..1e-4f64, -2.0..2.0f64, 0.07..0.5f64)
        .prop_map(|(mu, c, l, vth, s)| device(mu, c, l, vth, s, Polarity::N))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn branches_meet_at_pinch_off(t in params(), vov in 0.01..20.0f64) {
        let vth = t.params().v_th;
        let lin = t.beta() * (vov * vov - 0.5 * vov * vov);
        let sat = 0.5 * t.beta() * vov * vov;
        prop_assert!(((lin - sat) / sat).abs() < 1e-12);
        let below = t.drain_current(vth + vov, vov * (1.0 - 1e-12));
        let above = t.drain_current(vth + vov, vov * (1.0 + 1e-12));
        prop_assert!(((below - above) / above).abs() < 1e-10);
    }

    #[test]
    fn saturation_current_rises_with_overdrive(t in params(), vov in 0.01..10.0f64, dv in 1e-3..1.0f64) {
        let vth = t.params().v_th;
        let vds = 30.0;
        prop_assert!(t.drain_current(vth + vov + dv, vds) > t.drain_current(vth + vov, vds));
    }

    #[test]
    fn transconductance_matches_finite_difference(t in params(), vov in 0.05..10.0f64, ratio in prop_oneof![0.05..0.9f64, 1.1..5.0f64]) {
        let vth = t.params().v_th;
        let vgs = vth + vov;
        let vds = ratio * vov;
        let h = 1e-6 * vov;
        let fd = (t.drain_current(vgs + h, vds) - t.drain_current(vgs - h, vds)) / (2.0 * h);
        let gm = t.transconductance(vgs, vds);
        prop_assert!(((fd - gm) / gm).abs() < 1e-6, "fd {fd} gm {gm}");
    }

    #[test]
    fn subthreshold_decade_per_slope(t in params(), depth in 0.0..2.0f64, decades in 0.1..4.0f64) {
        let p = t.params();
        let vds = 1.0;
        let v1 = p.v_th - depth;
        let v2 = v1 - decades * p.subthreshold_slope;
        let change = t.drain_current(v1, vds).log10() - t.drain_current(v2, vds).log10();
        prop_assert!((change - decades).abs() < 1e-9, "{change}");
    }

    #[test]
    fn current_is_continuous_at_the_join(t in params(), vds in 0.01..10.0f64) {
        let join = t.params().v_th + t.params().stitch_overdrive;
        let a = t.drain_current(join - 1e-12, vds);
        let b = t.drain_current(join + 1e-12, vds);
        prop_assert!(((a - b) / b).abs() < 1e-6);
    }

    #[test]
    fn p_type_is_a_mirror(mu in 1e-6..1e-3f64, vth in -2.0..2.0f64, vgs in -10.0..10.0f64, vds in -10.0..10.0f64) {
        let n = device(mu, 1e-3, 20e-6, vth, 0.1, Polarity::N);
        let p = device(mu, 1e-3, 20e-6, -vth, 0.1, Polarity::P);
        prop_assert_eq!(p.drain_current(-vgs, -vds), -n.drain_current(vgs, vds));
    }

    #[test]
    fn tlm_round_trip(r_c in 1e-4..1e2f64, slope in 1e2..1e7f64, n in 2usize..8) {
        let pts: Vec<TlmPoint> = (0..n)
            .map(|i| {
                let length = 5e-6 * (i + 1) as f64;
                TlmPoint { length, r_tot_w: r_c + slope * length }
            })
            .collect();
        let fit = tlm_extract(&pts).unwrap();
        prop_assert!(((fit.r_c_w - r_c) / r_c).abs() < 1e-8, "{} vs {}", fit.r_c_w, r_c);
        prop_assert!(((fit.channel_slope - slope) / slope).abs() < 1e-10);
        prop_assert!((fit.transfer_length - r_c / slope).abs() <= 1e-8 * r_c / slope);
        prop_assert!(fit.physical);
    }
}

#[test]
fn tlm_with_noise_recovers_intercept() {
    // least-squares oracle solved independently through the normal equations
    let pts = [
        TlmPoint { length: 10e-6, r_tot_w: 0.151 },
        TlmPoint { length: 20e-6, r_tot_w: 0.249 },
        TlmPoint { length: 40e-6, r_tot_w: 0.452 },
        TlmPoint { length: 80e-6, r_tot_w: 0.848 },
    ];
    let fit = tlm_extract(&pts).unwrap();
    let (n, sx, sy, sxx, sxy) = pts.iter().fold((0.0, 0.0, 0.0, 0.0, 0.0), |a, p| {
        (a.0 + 1.0, a.1 + p.length, a.2 + p.r_tot_w, a.3 + p.length * p.length, a.4 + p.length * p.r_tot_w)
    });
    let det = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    assert!((fit.channel_slope - slope).abs() < 1e-9 * slope);
    assert!((fit.r_c_w - intercept).abs() < 1e-9);
}
