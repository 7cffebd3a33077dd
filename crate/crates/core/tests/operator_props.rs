mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qso_core::models::rh_measures;
use qso_core::operators::{
    apply_canonical, apply_reduced, fold, lift, mendelian_coefficients, nonmendelian_coefficients,
    reduce, validate_pq, Distribution, ReducedDistribution, SexRatio,
};
use qso_core::{Gender, Genotype};

use common::{l1, random_family, random_pq_tensor, random_space, sparse_simplex};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduction_commutes_with_lift_and_fold(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let space = random_space(&mut rng);
        let t = nonmendelian_coefficients(&space, &random_family(&space, &mut rng)).unwrap();
        let q = reduce(&t).unwrap();
        let y = ReducedDistribution::new(sparse_simplex(space.trait_count(), &mut rng)).unwrap();
        let via_full = fold(&space, &apply_canonical(&t, &lift(&space, &y).unwrap()).unwrap()).unwrap();
        let direct = apply_reduced(&q, &y).unwrap();
        prop_assert!(l1(via_full.values(), direct.values()) < 1e-12);
    }

    #[test]
    fn hyper_simplex_is_invariant(seed in any::<u64>(), p in 0.05f64..0.95) {
        let mut rng = StdRng::seed_from_u64(seed);
        let space = random_space(&mut rng);
        let ratio = SexRatio::new(p).unwrap();
        let t = random_pq_tensor(&space, ratio, &mut rng);
        prop_assert!(validate_pq(&t, 1e-12).is_empty());
        let lam = Distribution::sample(space.trait_count(), ratio, &mut rng);
        let out = apply_canonical(&t, &lam).unwrap();
        prop_assert!(out.values().iter().all(|&v| v >= 0.0));
        prop_assert!((out.female_mass() - p).abs() < 1e-9);
        prop_assert!((out.female_mass() + out.male_mass() - 1.0).abs() < 1e-9);
        // re-validating checks the hyper-simplex membership independently
        prop_assert!(Distribution::new(out.values().to_vec(), ratio).is_ok());
    }

    #[test]
    fn children_of_both_genders_match(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let space = random_space(&mut rng);
        let m = space.trait_count();
        let t = nonmendelian_coefficients(&space, &random_family(&space, &mut rng)).unwrap();
        let lam = Distribution::sample(m, SexRatio::FISHER, &mut rng);
        let out = apply_canonical(&t, &lam).unwrap();
        for k in 0..m {
            prop_assert!((out.values()[k] - out.values()[space.mirror(k)]).abs() < 1e-12);
        }
    }

    #[test]
    fn mendelian_support(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let space = random_space(&mut rng);
        let m = space.trait_count();
        let w = ReducedDistribution::sample_uniform(m, &mut rng).into_values();
        let mu0: Vec<f64> = w.iter().chain(w.iter()).map(|v| v / 2.0).collect();
        let t = mendelian_coefficients(&space, &Distribution::new(mu0, SexRatio::FISHER).unwrap()).unwrap();
        prop_assert!(validate_pq(&t, 1e-9).is_empty());
        for mother in 0..m {
            for father in 0..m {
                let set = space
                    .mendelian_offspring_set(
                        &Genotype::new(Gender::Female, space.traits_of(mother)),
                        &Genotype::new(Gender::Male, space.traits_of(father)),
                    )
                    .unwrap();
                for child in 0..space.len() {
                    if !set.contains(&child) {
                        prop_assert_eq!(t.coefficient(mother, father, child), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn reduced_step_stays_on_simplex(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let space = random_space(&mut rng);
        let n = space.trait_count();
        let q = reduce(&nonmendelian_coefficients(&space, &random_family(&space, &mut rng)).unwrap()).unwrap();
        let y = ReducedDistribution::sample_uniform(n, &mut rng);
        let out = apply_reduced(&q, &y).unwrap();
        let s: f64 = out.values().iter().sum();
        prop_assert!((s - 1.0).abs() <= 4.0 * n as f64 * f64::EPSILON);
    }

    #[test]
    fn lift_then_fold_is_identity(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(1..=6);
        let space = common::single_space(n);
        let y = ReducedDistribution::sample_uniform(n, &mut rng);
        let back = fold(&space, &lift(&space, &y).unwrap()).unwrap();
        prop_assert_eq!(back.values(), y.values());
    }
}

#[test]
fn symmetric_mean_measure_is_the_identity() {
    // with μ0 uniform on Φ2 the trait operator is y ↦ y on symmetric states
    let space = common::single_space(2);
    let t = mendelian_coefficients(&space, &Distribution::uniform(2, SexRatio::FISHER)).unwrap();
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..50 {
        let y = ReducedDistribution::sample_uniform(2, &mut rng);
        let lam = lift(&space, &y).unwrap();
        let out = apply_canonical(&t, &lam).unwrap();
        assert!(l1(out.values(), lam.values()) < 1e-15);
    }
}

#[test]
fn rh_canonical_step_from_uniform() {
    // x'_1 of the four-decimal Rh operator at x_i = 1/4: (1.9699 + 1.3094 + 1.2919 + 0.2)/16
    let family = rh_measures();
    let t = nonmendelian_coefficients(family.space(), &family).unwrap();
    let out = apply_canonical(&t, &Distribution::uniform(2, SexRatio::FISHER)).unwrap();
    let reference = (1.9699 + 1.3094 + 1.2919 + 0.2) / 16.0;
    assert!((out.values()[0] - reference).abs() < 1e-4);
    assert!((out.values()[0] - out.values()[2]).abs() < 1e-15);
}
