#![allow(dead_code)]

use condrisk::{
    ConditionalDensity, ConditionalValue, DivergenceGenerator, EquivalentConditionalMeasure, FiniteProbabilitySpace,
    Partition, RandomVariable,
};
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct Instance {
    pub space: FiniteProbabilitySpace,
    pub g: Partition,
    pub x: RandomVariable,
}

pub fn builtin_generators() -> Vec<DivergenceGenerator> {
    vec![
        DivergenceGenerator::kl(),
        DivergenceGenerator::chi2(),
        DivergenceGenerator::power(2.0).unwrap(),
        DivergenceGenerator::power(3.0).unwrap(),
    ]
}

pub fn random_space(rng: &mut impl Rng, n: usize) -> FiniteProbabilitySpace {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    FiniteProbabilitySpace::from_probs(raw.into_iter().map(|p| p / total).collect()).unwrap()
}

/// Random partition of `n` states into `k` nonempty atoms.
pub fn random_partition(rng: &mut impl Rng, n: usize, k: usize) -> Partition {
    let mut states: Vec<usize> = (0..n).collect();
    states.shuffle(rng);
    let mut atoms: Vec<Vec<usize>> = states[..k].iter().map(|&s| vec![s]).collect();
    for &s in &states[k..] {
        let a = rng.random_range(0..k);
        atoms[a].push(s);
    }
    Partition::new(atoms, n).unwrap()
}

pub fn random_rv(rng: &mut impl Rng, n: usize, scale: f64) -> RandomVariable {
    RandomVariable::new((0..n).map(|_| rng.random_range(-scale..=scale)).collect()).unwrap()
}

pub fn random_cv(rng: &mut impl Rng, k: usize, lo: f64, hi: f64) -> ConditionalValue {
    ConditionalValue::new((0..k).map(|_| rng.random_range(lo..=hi)).collect()).unwrap()
}

/// `n` in `1..=max_states`, `k` in `1..=min(max_atoms, n)`, payoff in
/// `[-scale, scale]`.
pub fn random_instance(rng: &mut impl Rng, max_states: usize, max_atoms: usize, scale: f64) -> Instance {
    let n = rng.random_range(1..=max_states);
    let k = rng.random_range(1..=max_atoms.min(n));
    let space = random_space(rng, n);
    let g = random_partition(rng, n, k);
    let x = random_rv(rng, n, scale);
    Instance { space, g, x }
}

pub fn random_density(rng: &mut impl Rng, space: &FiniteProbabilitySpace, g: &Partition) -> ConditionalDensity {
    let raw = (0..space.len()).map(|_| rng.random_range(0.05..3.0)).collect();
    ConditionalDensity::normalized(space, g, raw).unwrap()
}

pub fn random_measure(
    rng: &mut impl Rng,
    space: &FiniteProbabilitySpace,
    g: &Partition,
) -> EquivalentConditionalMeasure {
    let y = random_density(rng, space, g);
    condrisk::density_to_measure(space, g, &y).unwrap()
}
