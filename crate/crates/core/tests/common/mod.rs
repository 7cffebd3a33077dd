#![allow(dead_code)]

use rand::Rng;

use qso_core::operators::{
    HeredityTensor, MeasureFamily, ReducedDistribution, ReducedQso, SexRatio, Support,
};
use qso_core::GenotypeSpace;

/// Single-locus space with `m` alleles labelled `0..m`.
pub fn single_space(m: usize) -> GenotypeSpace {
    let labels: Vec<String> = (0..m).map(|i| format!("t{i}")).collect();
    GenotypeSpace::single(&labels).unwrap()
}

/// A space with at most five trait types, occasionally two-component.
pub fn random_space<R: Rng>(rng: &mut R) -> GenotypeSpace {
    if rng.gen_bool(0.2) {
        GenotypeSpace::new(&[vec!["A", "a"], vec!["B", "b"]]).unwrap()
    } else {
        single_space(rng.gen_range(1..=5))
    }
}

/// A point of the simplex with a few coordinates zeroed at random.
pub fn sparse_simplex<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut w = ReducedDistribution::sample_uniform(n, rng).into_values();
    if n > 1 && rng.gen_bool(0.3) {
        let keep = rng.gen_range(0..n);
        for (i, v) in w.iter_mut().enumerate() {
            if i != keep && rng.gen_bool(0.4) {
                *v = 0.0;
            }
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
    }
    w
}

/// Gender-symmetric child measures for every parent pair.
pub fn random_family<R: Rng>(space: &GenotypeSpace, rng: &mut R) -> MeasureFamily {
    let m = space.trait_count();
    let measures = (0..m * m)
        .map(|_| {
            let w = sparse_simplex(m, rng);
            w.iter().chain(w.iter()).map(|v| v / 2.0).collect()
        })
        .collect();
    MeasureFamily::new(space.clone(), measures, 1e-12).unwrap()
}

/// Full-support tensor with the p:q property: child trait weights `w` split
/// as `w/(2q)` to daughters and `w/(2p)` to sons.
pub fn random_pq_tensor<R: Rng>(
    space: &GenotypeSpace,
    ratio: SexRatio,
    rng: &mut R,
) -> HeredityTensor {
    let m = space.trait_count();
    let weights: Vec<Vec<f64>> = (0..m * m).map(|_| sparse_simplex(m, rng)).collect();
    HeredityTensor::from_fn(
        space.clone(),
        ratio,
        Support::Full,
        |mother, father, child| {
            let w = weights[mother * m + father][space.trait_of(child)];
            if child < m {
                w / (2.0 * ratio.q())
            } else {
                w / (2.0 * ratio.p())
            }
        },
    )
}

/// Reduced operator whose coefficients all exceed `1/(2n) + margin`.
pub fn random_regular_qso<R: Rng>(n: usize, margin: f64, rng: &mut R) -> ReducedQso {
    let floor = 1.0 / (2.0 * n as f64) + margin;
    let spare = 1.0 - n as f64 * floor;
    let mut rows = vec![vec![0.0; n]; n * n];
    for i in 0..n {
        for j in i..n {
            let w = ReducedDistribution::sample_uniform(n, rng).into_values();
            let row: Vec<f64> = w.iter().map(|v| floor + spare * v).collect();
            rows[i * n + j] = row.clone();
            rows[j * n + i] = row;
        }
    }
    ReducedQso::from_fn(n, |i, j, k| rows[i * n + j][k]).unwrap()
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}
