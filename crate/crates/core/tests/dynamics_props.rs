mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qso_core::dynamics::{
    analyze_quadratic_1d, f_alpha, find_fixed_point, iterate, regularity_check, FixedPointOptions,
    IterateOptions, Stability,
};
use qso_core::models::{mendelian_trait, multi_allele, rh_model};
use qso_core::operators::{apply_reduced, nonmendelian_coefficients, reduce, ReducedDistribution};

use common::{l1, random_family, random_regular_qso};

#[test]
fn long_orbits_stay_on_the_simplex() {
    let mut rng = StdRng::seed_from_u64(17);
    let space = common::single_space(4);
    let generic =
        reduce(&nonmendelian_coefficients(&space, &random_family(&space, &mut rng)).unwrap())
            .unwrap();
    let operators = [
        generic,
        rh_model().qso,
        multi_allele(&[0.13, 0.12, 0.125, 0.125]).unwrap().qso,
    ];
    // a vanishing tolerance keeps the orbit running until the budget is spent
    // unless it lands exactly on a fixed point
    let opts = IterateOptions {
        max_iters: 1_000_000,
        tol: f64::MIN_POSITIVE,
        stride: 997,
    };
    let mut longest = 0;
    for q in &operators {
        let y0 = ReducedDistribution::sample_uniform(q.n(), &mut rng);
        let traj = iterate(q, &y0, &opts).unwrap();
        longest = longest.max(traj.iterations);
        for p in &traj.points {
            let s: f64 = p.values().iter().sum();
            assert!((s - 1.0).abs() < 1e-9, "sum drifted to {s}");
            assert!(p.values().iter().all(|&v| v >= 0.0));
        }
    }
    assert_eq!(longest, opts.max_iters);
}

#[test]
fn fixed_point_residual_checks_out_independently() {
    let mut rng = StdRng::seed_from_u64(23);
    for _ in 0..40 {
        let n = rng.gen_range(2..=5);
        let q = random_regular_qso(n, 0.0, &mut rng);
        let y0 = ReducedDistribution::sample_uniform(n, &mut rng);
        let opts = FixedPointOptions::default();
        let rep = find_fixed_point(&q, &y0, &opts).unwrap();
        let image = apply_reduced(&q, &rep.point).unwrap();
        assert!(l1(rep.point.values(), image.values()) < opts.tol);
    }
}

#[test]
fn regular_operators_have_a_single_attractor() {
    let mut rng = StdRng::seed_from_u64(31);
    let opts = IterateOptions {
        tol: 1e-14,
        ..IterateOptions::default()
    };
    for case in 0..50 {
        let n = 2 + case % 3;
        let q = random_regular_qso(n, 0.01, &mut rng);
        assert!(regularity_check(&q).holds);
        let a = iterate(&q, &ReducedDistribution::sample_uniform(n, &mut rng), &opts).unwrap();
        let b = iterate(&q, &ReducedDistribution::sample_uniform(n, &mut rng), &opts).unwrap();
        assert!(a.converged && b.converged);
        assert!(l1(a.last().values(), b.last().values()) < 1e-8);
    }
}

#[test]
fn volterra_orbits_reach_the_dominant_vertex() {
    let mut rng = StdRng::seed_from_u64(43);
    for _ in 0..30 {
        let w = ReducedDistribution::sample_uniform(4, &mut rng).into_values();
        let alphas: Vec<f64> = w.iter().map(|v| 0.5 * v).collect();
        let best = (0..4)
            .max_by(|&i, &j| alphas[i].total_cmp(&alphas[j]))
            .unwrap();
        let q = multi_allele(&alphas).unwrap().qso;
        let opts = IterateOptions {
            max_iters: 100_000,
            ..IterateOptions::default()
        };
        let traj = iterate(&q, &ReducedDistribution::sample_uniform(4, &mut rng), &opts).unwrap();
        let target = ReducedDistribution::vertex(4, best);
        assert!(traj.last().l1_distance(&target) < 1e-6, "alphas {alphas:?}");
    }
}

#[test]
fn trait_regimes_by_alpha() {
    let mut rng = StdRng::seed_from_u64(3);
    for (alpha, winner) in [(0.05, 1), (0.2, 1), (0.3, 0), (0.45, 0)] {
        let q = mendelian_trait(alpha).unwrap().qso;
        let y0 = ReducedDistribution::sample_uniform(2, &mut rng);
        let traj = iterate(&q, &y0, &IterateOptions::default()).unwrap();
        assert!(
            traj.last()
                .l1_distance(&ReducedDistribution::vertex(2, winner))
                < 1e-6
        );
        let rep = find_fixed_point(&q, &y0, &FixedPointOptions::default()).unwrap();
        assert_eq!(rep.classification, Stability::Attracting);
    }
}

#[test]
fn rh_matches_the_quadratic_analysis() {
    let q = rh_model().qso;
    let rep = find_fixed_point(&q, &ReducedDistribution::uniform(2), &Default::default()).unwrap();
    let (a, b, c) = (
        q.coefficient(0, 0, 0),
        q.coefficient(0, 1, 0),
        q.coefficient(1, 1, 0),
    );
    // positive root of (a − 2b + c)y² + (2b − 2c − 1)y + c = 0 by plain formula
    let (qa, qb) = (a - 2.0 * b + c, 2.0 * b - 2.0 * c - 1.0);
    let root = (-qb - (qb * qb - 4.0 * qa * c).sqrt()) / (2.0 * qa);
    assert!((rep.point.values()[0] - root).abs() < 1e-12);
    let an = analyze_quadratic_1d(a, b, c).unwrap();
    assert!((an.delta - (qb * qb - 4.0 * qa * c)).abs() < 1e-15);
    assert!(an.delta > 0.0 && an.delta < 4.0);
}

proptest! {
    #[test]
    fn folded_trait_step_is_f_alpha(alpha in 0.01f64..0.49, y1 in 0.0f64..=1.0) {
        let q = mendelian_trait(alpha).unwrap().qso;
        let y = ReducedDistribution::new(vec![y1, 1.0 - y1]).unwrap();
        let out = apply_reduced(&q, &y).unwrap();
        prop_assert!((out.values()[0] / 2.0 - f_alpha(alpha, y1 / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn two_starts_agree_under_regularity(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let q = random_regular_qso(n, 0.01, &mut rng);
        let opts = FixedPointOptions::default();
        let a = find_fixed_point(&q, &ReducedDistribution::sample_uniform(n, &mut rng), &opts).unwrap();
        let b = find_fixed_point(&q, &ReducedDistribution::sample_uniform(n, &mut rng), &opts).unwrap();
        prop_assert!(a.point.l1_distance(&b.point) < 1e-8);
        prop_assert_eq!(a.classification, Stability::Attracting);
    }
}
