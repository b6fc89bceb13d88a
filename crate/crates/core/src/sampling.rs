//! Seeded generators for the sampled checks.
//!
//! Every trial gets its own generator derived from `(seed, salt, trial)`, so a
//! trial's inputs do not depend on which other trials ran or in what order.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::space::{ConeOrder, RandomEconomy, RandomVariable};

/// Scale applied to standard normal draws in all sampled checks.
pub const SAMPLE_SCALE: f64 = 10.0;

pub type TrialRng = Xoshiro256PlusPlus;

/// Generator for one trial of one check.
pub fn trial_rng(seed: u64, salt: u64, trial: u64) -> TrialRng {
    let mixed = seed
        ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ trial.wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03);
    Xoshiro256PlusPlus::seed_from_u64(mixed)
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn normal_vec<R: Rng + ?Sized>(rng: &mut R, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| scale * normal(rng)).collect()
}

pub fn random_variable<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RandomVariable {
    RandomVariable::from_vec(normal_vec(rng, n, SAMPLE_SCALE))
}

pub fn random_economy<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> RandomEconomy {
    RandomEconomy::from_flat(n, d, normal_vec(rng, n * d, SAMPLE_SCALE))
}

/// Nonnegative vector with roughly a third of its entries exactly zero.
pub fn nonneg_vec<R: Rng + ?Sized>(rng: &mut R, len: usize, scale: f64) -> Vec<f64> {
    (0..len)
        .map(|_| {
            if rng.random_bool(1.0 / 3.0) {
                0.0
            } else {
                (scale * normal(rng)).abs()
            }
        })
        .collect()
}

/// A random element of the cone `K`, zero with small probability.
pub fn cone_element<R: Rng + ?Sized>(rng: &mut R, order: &ConeOrder) -> Vec<f64> {
    if rng.random_bool(0.05) {
        return alloc::vec![0.0; order.dim()];
    }
    let raw = normal_vec(rng, order.dim(), SAMPLE_SCALE);
    order.lift_into_cone(&raw)
}

/// Economy whose every row is a cone element.
pub fn cone_economy<R: Rng + ?Sized>(rng: &mut R, n: usize, order: &ConeOrder) -> RandomEconomy {
    let mut flat = Vec::with_capacity(n * order.dim());
    for _ in 0..n {
        flat.extend(cone_element(rng, order));
    }
    RandomEconomy::from_flat(n, order.dim(), flat)
}

pub fn unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}
