use bbm_core::{
    DispersionPolynomial, Field, NonlinearFlow, OperatorSymbol, Scheme, SobolevWeight, SpectralGrid,
    SplitProblem, Stepper,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_field(n: usize, k_max: usize, seed: u64) -> Field {
    let grid = SpectralGrid::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Field::random_band_limited(&grid, k_max, 1.0, &mut rng)
}

fn samples() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=64).prop_flat_map(|half| prop::collection::vec(-10.0..10.0f64, 2 * half))
}

/// `ζ(s)` from above: partial sum plus the integral bound on the tail.
fn zeta_upper(s: f64) -> f64 {
    let n = 10_000;
    let partial: f64 = (1..=n).map(|m| (m as f64).powf(-s)).sum();
    partial + (n as f64).powf(1.0 - s) / (s - 1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_reproduces_samples(v in samples()) {
        let grid = SpectralGrid::new(v.len()).unwrap();
        let back = grid.transform(&v).unwrap().inverse_transform();
        let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for (a, b) in v.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn transform_of_real_samples_is_hermitian(v in samples()) {
        let f = SpectralGrid::new(v.len()).unwrap().transform(&v).unwrap();
        let scale = f.l2_norm().max(1.0);
        prop_assert!(f.hermitian_defect() <= 1e-12 * scale);
    }

    #[test]
    fn squares_and_multipliers_stay_hermitian(seed in any::<u64>(), eps in 0.0..=1.0f64) {
        let f = random_field(64, 20, seed);
        let g = f.grid().clone();
        let sq = f.pointwise_square();
        prop_assert!(sq.hermitian_defect() <= 1e-12 * sq.l2_norm().max(1.0));
        let p = DispersionPolynomial::new(vec![1.0, -0.3]).unwrap();
        for op in [
            OperatorSymbol::l_eps(&g, eps).unwrap(),
            OperatorSymbol::l_eps_lambda(&g, eps, &p).unwrap().propagator(0.7),
        ] {
            let out = op.apply(&f).unwrap();
            prop_assert!(out.hermitian_defect() <= 1e-12 * out.l2_norm().max(1.0));
        }
    }

    #[test]
    fn sobolev_norm_is_monotone_in_r(seed in any::<u64>(), r1 in 0.0..3.0f64, dr in 0.0..3.0f64) {
        let f = random_field(64, 25, seed);
        for w in [SobolevWeight::Shifted, SobolevWeight::Bessel] {
            let lo = f.sobolev_norm_with(r1, w).unwrap();
            let hi = f.sobolev_norm_with(r1 + dr, w).unwrap();
            prop_assert!(lo <= hi * (1.0 + 1e-14));
        }
    }

    #[test]
    fn linear_propagator_is_an_isometry(
        seed in any::<u64>(),
        eps in 0.0..=1.0f64,
        t in -10.0..10.0f64,
        r in 0.0..3.0f64,
    ) {
        let f = random_field(128, 60, seed);
        let p = DispersionPolynomial::new(vec![1.0, 0.5, -0.2]).unwrap();
        let prop = OperatorSymbol::l_eps_lambda(f.grid(), eps, &p).unwrap().propagator(t);
        let out = prop.apply(&f).unwrap();
        let (a, b) = (out.sobolev_norm(r).unwrap(), f.sobolev_norm(r).unwrap());
        prop_assert!((a - b).abs() <= 1e-13 * b);
    }

    #[test]
    fn every_scheme_conserves_the_mean(
        seed in any::<u64>(),
        mean in -2.0..2.0f64,
        eps in 0.05..=1.0f64,
        tau in 0.001..0.1f64,
        idx in 0usize..4,
    ) {
        let mut f = random_field(64, 12, seed);
        f.set_mode_pair(0, Complex64::new(mean, 0.0));
        let problem = SplitProblem::bbm(f.grid(), eps, &DispersionPolynomial::classical()).unwrap();
        let stepper = Stepper::new(&Scheme::ALL[idx].spec(), &problem, tau).unwrap();
        let mut u = f.clone();
        for _ in 0..20 {
            u = stepper.step(&u).unwrap();
        }
        prop_assert!((u.coeff(0) - f.coeff(0)).norm() <= 1e-12);
    }

    #[test]
    fn taylor_flow_leaves_constants_fixed(c in -5.0..5.0f64, tau in -1.0..1.0f64, order in 1usize..=4) {
        let grid = SpectralGrid::new(32).unwrap();
        let w = grid.sample(|_| c);
        let b = OperatorSymbol::l_eps(&grid, 0.5).unwrap().scaled(0.5);
        let out = NonlinearFlow::new(b, order).unwrap().step(&w, tau).unwrap();
        prop_assert!(out.l2_distance(&w).unwrap() <= 1e-14 * c.abs().max(1.0));
    }
}

#[test]
fn bilinear_estimate_witness() {
    // With the (1+|k|)^{2r} weight, ‖fg‖_r ≤ 2^{r+1}(2ζ(2r)-1)^{1/2}‖f‖_r‖g‖_r for r > 1/2.
    let n = 256;
    let grid = SpectralGrid::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for r in [0.6, 1.0, 2.0] {
        let bound = 2f64.powf(r + 1.0) * (2.0 * zeta_upper(2.0 * r) - 1.0).sqrt();
        let mut worst = 0.0f64;
        for _ in 0..100 {
            // band limit n/4 keeps the grid product alias-free
            let f = Field::random_band_limited(&grid, n / 4 - 1, 0.5, &mut rng);
            let g = Field::random_band_limited(&grid, n / 4 - 1, 0.5, &mut rng);
            let lhs = f.product(&g).unwrap().sobolev_norm(r).unwrap();
            let rhs = f.sobolev_norm(r).unwrap() * g.sobolev_norm(r).unwrap();
            worst = worst.max(lhs / rhs);
        }
        assert!(worst <= bound, "r={r}: measured {worst} above analytic {bound}");
        assert!(worst > 0.0);
    }
}
