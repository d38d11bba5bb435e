use condrisk_demo::{conjugate, conjugate_curve, oce_sweep, sweep, two_state, two_state_report};

#[test]
fn conjugate_curve_agrees_with_closed_form() {
    for gen in ["kl", "chi2", "power:2", "power:3"] {
        let c = conjugate_curve(gen, -4.0, 3.0, 301).unwrap();
        assert_eq!(c.m.len(), 301);
        assert_eq!(c.m[0], -4.0);
        assert_eq!(c.m[300], 3.0);
        assert!(c.max_error <= 1e-8, "{gen}: {}", c.max_error);
        // phi vanishes at t = 1, which lies on the t grid [0, 4] with 301 points
        let i = c.t.iter().position(|&t| (t - 1.0).abs() < 1e-12).unwrap();
        assert!(c.phi[i].abs() < 1e-15);
    }
}

#[test]
fn kl_conjugate_is_exp_minus_one() {
    let c = conjugate_curve("kl", -2.0, 2.0, 5).unwrap();
    for (m, v) in c.m.iter().zip(&c.analytic) {
        assert!((v - (m.exp() - 1.0)).abs() < 1e-15);
    }
}

#[test]
fn two_state_kl_matches_hand_value() {
    // uniform two-state atom, x = (0, ln 4): -ln((1 + 1/4) / 2) = ln(8/5)
    let r = two_state_report("kl", 0.5, 0.0, 4f64.ln()).unwrap();
    let expected = (8.0f64 / 5.0).ln();
    assert!((r.oce - expected).abs() < 1e-9);
    assert!((r.dual - expected).abs() < 1e-9);
    assert!((r.entropic - expected).abs() < 1e-12);
    assert!(r.gap < 1e-9);
    // density e^{-x} / E[e^{-x}] = (1.6, 0.4)
    assert!((r.density[0] - 1.6).abs() < 1e-8 && (r.density[1] - 0.4).abs() < 1e-8);
    // value = E_nu[x] + D(nu || mu)
    let e_nu = 0.5 * r.density[0] * r.x[0] + 0.5 * r.density[1] * r.x[1];
    assert!((e_nu + r.divergence - r.oce).abs() < 1e-9);
}

#[test]
fn two_state_objective_peaks_at_optimal_a() {
    let r = two_state_report("chi2", 0.3, -1.0, 2.0).unwrap();
    let best = r.objective.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(best <= r.oce + 1e-12);
    let step = r.a[1] - r.a[0];
    assert!(r.oce - best <= step * step);
    assert!(r.oce <= r.expectation + 1e-12);
}

#[test]
fn sweep_is_bracketed_by_minimum_and_expectation() {
    let s = oce_sweep(&["kl", "chi2", "power:3"], 0.4, -3.0, 3.0, 61).unwrap();
    assert_eq!(s.series.len(), 3);
    for series in &s.series {
        for (i, v) in series.values.iter().enumerate() {
            assert!(*v <= s.expectation[i] + 1e-9, "{}", series.generator);
            assert!(*v >= s.minimum[i] - 1e-9, "{}", series.generator);
        }
        // the OCE is nondecreasing in t
        assert!(series.values.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(conjugate_curve("kl", 1.0, 0.0, 10).is_err());
    assert!(conjugate_curve("kl", 0.0, 1.0, 1).is_err());
    assert!(conjugate_curve("tsallis", 0.0, 1.0, 10).is_err());
    assert!(two_state_report("kl", 1.0, 0.0, 1.0).is_err());
    assert!(two_state_report("kl", 0.5, f64::NAN, 1.0).is_err());
    assert!(oce_sweep(&["kl"], 0.5, 0.0, 1.0, 100_000).is_err());
}

#[test]
fn exported_functions_return_json() {
    let v: serde_json::Value = serde_json::from_str(&conjugate("chi2", -3.0, 3.0, 7).unwrap()).unwrap();
    assert_eq!(v["generator"], "chi2");
    assert_eq!(v["numeric"].as_array().unwrap().len(), 7);

    let v: serde_json::Value = serde_json::from_str(&two_state("power:2", 0.5, 1.0, 3.0).unwrap()).unwrap();
    assert!(v["oce"].as_f64().unwrap() <= 2.0);

    let v: serde_json::Value = serde_json::from_str(&sweep("kl, chi2", 0.5, -1.0, 1.0, 5).unwrap()).unwrap();
    assert_eq!(v["series"].as_array().unwrap().len(), 2);
}
