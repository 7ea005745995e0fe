use fle_core::loweval::{forcing, polling_set};
use fle_core::problems::evaluate;
use fle_core::{catalog, DVector, Problem, SolverConfig, Transform};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn problem(index: usize) -> Problem {
    catalog::catalog().swap_remove(index % catalog::NAMES.len())
}

fn point(values: &[f64], n: usize) -> DVector<f64> {
    DVector::from_column_slice(&values[..n])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projection_is_feasible_idempotent_and_nonexpansive(
        index in 0usize..64,
        a in prop::collection::vec(-20.0f64..20.0, 20),
        b in prop::collection::vec(-20.0f64..20.0, 20),
    ) {
        let p = problem(index);
        let region = p.region();
        let (za, zb) = (point(&a, p.dim()), point(&b, p.dim()));
        let pa = region.project(&za).unwrap();
        let pb = region.project(&zb).unwrap();
        prop_assert!(region.violation(&pa) <= 1e-9);
        prop_assert!((region.project(&pa).unwrap() - &pa).norm() <= 1e-9 * (1.0 + pa.norm()));
        prop_assert!((&pa - &pb).norm() <= (&za - &zb).norm() + 1e-9);
    }

    #[test]
    fn reduced_coordinates_round_trip(index in 0usize..64, t in prop::collection::vec(-5.0f64..5.0, 20)) {
        let p = problem(index);
        let region = p.region();
        let reduced = DVector::from_column_slice(&t[..region.reduced_dim()]);
        let x = region.from_reduced(&reduced);
        prop_assert!((region.to_reduced(&x) - &reduced).norm() <= 1e-10);
        let eq_residual = region.eq_matrix() * &x - region.eq_rhs();
        prop_assert!(eq_residual.norm() <= 1e-9 * (1.0 + x.norm()));
    }

    #[test]
    fn polling_directions_are_unit_and_feasible(
        index in 0usize..64,
        z in prop::collection::vec(-10.0f64..10.0, 20),
        log_xi in -6.0f64..0.0,
        seed in any::<u64>(),
    ) {
        let p = problem(index);
        let region = p.region();
        let x = region.project(&point(&z, p.dim())).unwrap();
        let xi = 10f64.powf(log_xi);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for d in polling_set(region, &x, xi, 1.0, &mut rng).unwrap() {
            prop_assert!((d.norm() - 1.0).abs() <= 1e-12);
            prop_assert!(region.violation(&(&x + region.lift(&d) * xi)) <= 1e-10);
        }
    }

    #[test]
    fn noise_is_bounded_and_keyed(
        index in 0usize..64,
        z in prop::collection::vec(-3.0f64..3.0, 20),
        eps in 1e-4f64..1e-1,
        seed in any::<u64>(),
    ) {
        let p = problem(index);
        let x = point(&z, p.dim());
        let noise = Transform::noisy(eps, seed);
        let base = p.value(&x);
        let noisy = evaluate(&p, Some(&noise), &x);
        prop_assert!((noisy - base).abs() <= eps * base.abs() * (1.0 + 1e-12));
        prop_assert_eq!(noisy.to_bits(), evaluate(&p, Some(&noise), &x).to_bits());
    }

    #[test]
    fn forcing_function_is_monotone_and_small(a in 1e-12f64..10.0, b in 1e-12f64..10.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(forcing(lo, 1e-5, 1e-5) <= forcing(hi, 1e-5, 1e-5));
        prop_assert!(forcing(lo, 1e-5, 1e-5) > 0.0);
        prop_assert!(forcing(lo, 1e-5, 1e-5) <= 1e-5 * lo * lo + 1e-300);
    }

    #[test]
    fn config_text_round_trips(
        budget in 1usize..100_000,
        alpha0 in 1e-3f64..10.0,
        c in 1e-6f64..0.5,
        lambda in 1.0f64..4.0,
        theta in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let mut config = SolverConfig::with_budget(budget).with_seed(seed);
        config.alpha0 = alpha0;
        config.line_search.c = c;
        config.direct_search.lambda = lambda;
        config.direct_search.theta = theta;
        let back = SolverConfig::parse(&config.to_text()).unwrap();
        prop_assert_eq!(back, config);
    }
}
