use proptest::prelude::*;
use qchain::chain_checks::{classical_chain_rule, ClassicalJoint};
use qchain::channels::{pull_through, Channel};
use qchain::divergences::{
    bs_rel_entropy, dmax, hypothesis_testing_div, purified_distance, rel_entropy, smooth_dmax_classical,
    von_neumann_entropy,
};
use qchain::linalg::HermitianMatrix;
use qchain::random::{random_density, random_density_rank, random_probability, random_psd, seeded_rng};
use qchain::LogBase;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn relative_entropy_nonnegative_and_zero_on_diagonal(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = seeded_rng(seed, 0);
        let (rho, sigma) = (random_density(&mut rng, d), random_density(&mut rng, d));
        prop_assert!(rel_entropy(&rho, &sigma).unwrap().to_f64() >= -1e-10);
        prop_assert!(rel_entropy(&rho, &rho).unwrap().to_f64().abs() < 1e-9);
    }

    #[test]
    fn data_processing(seed in any::<u64>(), din in 2usize..=4, dout in 2usize..=3) {
        let mut rng = seeded_rng(seed, 1);
        let ch = Channel::random(&mut rng, din, dout, din.div_ceil(dout) + 1);
        let (rho, sigma) = (random_density(&mut rng, din), random_density(&mut rng, din));
        let (a, b) = (ch.apply_full(&rho).unwrap(), ch.apply_full(&sigma).unwrap());
        prop_assert!(rel_entropy(&a, &b).unwrap().to_f64() <= rel_entropy(&rho, &sigma).unwrap().to_f64() + 1e-9);
        prop_assert!(dmax(&a, &b).unwrap().to_f64() <= dmax(&rho, &sigma).unwrap().to_f64() + 1e-9);
        prop_assert!(purified_distance(&a, &b).unwrap() <= purified_distance(&rho, &sigma).unwrap() + 1e-9);
    }

    #[test]
    fn divergence_ordering(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = seeded_rng(seed, 2);
        let (rho, sigma) = (random_density(&mut rng, d), random_density(&mut rng, d));
        let u = rel_entropy(&rho, &sigma).unwrap().to_f64();
        let bs = bs_rel_entropy(&rho, &sigma).unwrap().to_f64();
        let m = dmax(&rho, &sigma).unwrap().to_f64();
        prop_assert!(u <= bs + 1e-9 && bs <= m + 1e-9, "{u} {bs} {m}");
    }

    #[test]
    fn dmax_triangle(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = seeded_rng(seed, 3);
        let (a, b, c) = (random_density(&mut rng, d), random_psd(&mut rng, d), random_psd(&mut rng, d));
        let lhs = dmax(&a, &c).unwrap().to_f64();
        let rhs = dmax(&a, &b).unwrap().to_f64() + dmax(&b, &c).unwrap().to_f64();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn entropy_bounds(seed in any::<u64>(), d in 2usize..=5) {
        let mut rng = seeded_rng(seed, 4);
        let rho = random_density(&mut rng, d);
        let h = von_neumann_entropy(&rho);
        prop_assert!(h >= -1e-12 && h <= (d as f64).log2() + 1e-12);
    }

    #[test]
    fn support_violation_is_infinite(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed, 5);
        let rho = random_density(&mut rng, 3);
        let sigma = random_density_rank(&mut rng, 3, 2);
        prop_assert!(!rel_entropy(&rho, &sigma).unwrap().is_finite());
        prop_assert!(!dmax(&rho, &sigma).unwrap().is_finite());
    }

    #[test]
    fn smooth_dmax_is_monotone_in_radius(seed in any::<u64>(), d in 2usize..=5) {
        let mut rng = seeded_rng(seed, 6);
        let p = random_probability(&mut rng, d);
        let q = random_probability(&mut rng, d);
        let exact = dmax(&HermitianMatrix::diag(&p), &HermitianMatrix::diag(&q)).unwrap().to_f64();
        let mut last = exact + 1e-9;
        for eps in [0.01, 0.05, 0.1, 0.3] {
            let v = smooth_dmax_classical(&p, &q, eps).unwrap().to_f64();
            prop_assert!(v <= last + 1e-9);
            last = v;
        }
    }

    #[test]
    fn hypothesis_testing_is_monotone_in_eps(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = seeded_rng(seed, 7);
        let (rho, sigma) = (random_density(&mut rng, d), random_density(&mut rng, d));
        let mut last = f64::NEG_INFINITY;
        for eps in [0.01, 0.1, 0.3, 0.6] {
            let v = hypothesis_testing_div(&rho, &sigma, eps).unwrap().to_f64();
            prop_assert!(v >= last - 1e-9);
            last = v;
        }
    }

    #[test]
    fn classical_chain_rule_equality(seed in any::<u64>(), nx in 1usize..=8, ny in 1usize..=8) {
        let mut rng = seeded_rng(seed, 8);
        let p = random_probability(&mut rng, nx * ny);
        let q = random_probability(&mut rng, nx * ny);
        let rows = |v: &[f64]| v.chunks(ny).map(<[f64]>::to_vec).collect::<Vec<_>>();
        let res = classical_chain_rule(
            &ClassicalJoint::normalized(rows(&p)).unwrap(),
            &ClassicalJoint::unnormalized(rows(&q)).unwrap(),
            "",
        ).unwrap();
        prop_assert!(res.iter().all(|r| r.pass), "{res:?}");
    }

    #[test]
    fn channels_preserve_trace_and_positivity(seed in any::<u64>(), din in 1usize..=3, dout in 1usize..=3) {
        let mut rng = seeded_rng(seed, 9);
        let ch = Channel::random(&mut rng, din, dout, din.div_ceil(dout) + 1);
        let out = ch.apply_full(&random_density(&mut rng, din)).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-10);
        prop_assert!(out.is_psd(1e-10));
        let choi = ch.choi();
        prop_assert!(choi.op.is_psd(1e-10));
        prop_assert!(choi.reference_marginal().max_abs_diff(&HermitianMatrix::identity(din)) < 1e-10);
    }

    #[test]
    fn pull_through_is_a_state(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed, 10);
        let ch = Channel::random(&mut rng, 2, 2, 2);
        let rho_r = random_density(&mut rng, 2);
        let out = pull_through(&rho_r, &ch.choi()).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-10);
        prop_assert!(out.partial_trace(&[2, 2], &[0]).unwrap().max_abs_diff(&rho_r) < 1e-10);
    }

    #[test]
    fn log_base_conversion(bits in -50.0f64..50.0) {
        prop_assert_eq!(LogBase::Two.from_bits(bits), bits);
        prop_assert!((LogBase::E.from_bits(bits) - bits * std::f64::consts::LN_2).abs() < 1e-12);
    }
}
