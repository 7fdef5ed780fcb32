use bbm_web::{bbm_vs_kdv_impl, convergence_impl, simulate_impl};

#[test]
fn simulate_layout() {
    let out = simulate_impl("strang", 0.5, 0.01, 1.0, 32, 4).unwrap();
    assert_eq!(out.len(), 32 * (1 + 5));
    assert!((out[0] + std::f64::consts::PI).abs() < 1e-15);
    assert!(out.iter().all(|v| v.is_finite()));
    // first frame is the initial datum
    let x1 = out[1];
    let u1 = out[32 + 1];
    assert!((u1 - 3.0 * (2.0 * x1).sin() / (2.0 - x1.cos())).abs() < 1e-12);
}

#[test]
fn simulate_rejects_bad_input() {
    assert!(simulate_impl("rk4", 0.5, 0.01, 1.0, 32, 4).is_err());
    assert!(simulate_impl("lie", 0.5, 0.3, 1.0, 32, 4).is_err());
    assert!(simulate_impl("lie", 0.5, 0.01, 1.0, 32, 7).is_err());
}

#[test]
fn convergence_curve_decreases_at_second_order() {
    let out = convergence_impl("strang", 1.0, 1.0, 64).unwrap();
    assert_eq!(out.len(), 12);
    let pts: Vec<(f64, f64)> = out.chunks(2).map(|c| (c[0].ln(), c[1].ln())).collect();
    let slope = bbm_core::fit::least_squares_slope(&pts);
    assert!((slope - 2.0).abs() < 0.2, "{slope}");
}

#[test]
fn bbm_and_kdv_agree_as_epsilon_vanishes() {
    let diff = |eps: f64| {
        let out = bbm_vs_kdv_impl(eps, 1.0, 64, 1e-3).unwrap();
        let (bbm, kdv) = (&out[64..128], &out[128..]);
        bbm.iter().zip(kdv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    assert!(diff(0.0) < 1e-12);
    assert!(diff(0.01) < diff(0.1));
}
