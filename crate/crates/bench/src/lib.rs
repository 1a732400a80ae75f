//! Seeded inputs shared by the benchmarks.

use poslab_core::positivity::{rational_quadruple, sample_positive_tuple};
use poslab_core::{Flag, GroupSpec, Quadruple, Rational};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn spec(name: &str) -> GroupSpec {
    name.parse().expect("group spec")
}

pub fn positive_quadruple(spec: &GroupSpec, seed: u64) -> Quadruple<f64> {
    let f = sample_positive_tuple(spec, 4, &mut rng(seed)).expect("positive tuple");
    Quadruple::new(f[0].clone(), f[1].clone(), f[2].clone(), f[3].clone()).expect("quadruple")
}

pub fn exact_quadruple(spec: &GroupSpec, seed: u64) -> [Flag<Rational>; 4] {
    rational_quadruple(spec, &mut rng(seed)).expect("rational quadruple")
}
