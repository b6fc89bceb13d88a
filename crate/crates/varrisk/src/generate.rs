//! Deterministic random instances.
//!
//! All draws come from one SplitMix64 stream (64-bit state) seeded with the
//! user seed, in this order: `n` probabilities as uniform `[0.1, 1)` draws
//! normalized to sum 1; the indices of the infinite-exponent atoms; `n`
//! finite exponents uniform in `[1, 4]`; then each economy row by row as
//! standard normals times `scale`.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;
use varrisk_core::{ConeOrder, Exponent, FiniteSpace, RandomEconomy};

use crate::error::{IoError, IoResult};
use crate::instance::{Instance, MeasureSpec, NamedEconomy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    /// Standard deviation of the economy entries.
    pub scale: f64,
    /// Fraction of atoms with exponent `+inf`, rounded to the nearest count.
    pub inf_fraction: f64,
    pub economies: usize,
    /// Order of the range space of the simple measures.
    pub range_order: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            scale: 1.0,
            inf_fraction: 0.0,
            economies: 3,
            range_order: 2.0,
        }
    }
}

pub fn generate_instance(
    seed: u64,
    n: usize,
    d: usize,
    cfg: &GeneratorConfig,
) -> IoResult<Instance> {
    if n == 0 || d == 0 {
        return Err(IoError::InvalidConfig(format!(
            "n and d must be at least 1, got n = {n}, d = {d}"
        )));
    }
    if !(cfg.scale > 0.0 && cfg.scale.is_finite()) {
        return Err(IoError::InvalidConfig(format!(
            "scale must be positive and finite, got {}",
            cfg.scale
        )));
    }
    if !(0.0..=1.0).contains(&cfg.inf_fraction) {
        return Err(IoError::InvalidConfig(format!(
            "inf fraction must lie in [0, 1], got {}",
            cfg.inf_fraction
        )));
    }
    if !(cfg.range_order >= 1.0) {
        return Err(IoError::InvalidConfig(format!(
            "range order must be >= 1, got {}",
            cfg.range_order
        )));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);

    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut probs: Vec<f64> = raw.iter().map(|v| v / total).collect();
    // push the rounding residue onto the largest atom so the sum is 1 to the last bit or two
    let residue = 1.0 - probs.iter().sum::<f64>();
    let largest = (0..n).fold(0, |b, i| if probs[i] > probs[b] { i } else { b });
    probs[largest] += residue;

    let inf_count = ((cfg.inf_fraction * n as f64).round() as usize).min(n);
    let inf_atoms = index::sample(&mut rng, n, inf_count).into_vec();
    let mut exps: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..=4.0)).collect();
    for i in inf_atoms {
        exps[i] = f64::INFINITY;
    }

    let economies = (0..cfg.economies)
        .map(|k| {
            let values = (0..n * d)
                .map(|_| cfg.scale * rng.sample::<f64, _>(StandardNormal))
                .collect();
            NamedEconomy {
                name: format!("e{k}"),
                economy: RandomEconomy::from_flat(n, d, values),
            }
        })
        .collect();

    let space = FiniteSpace::new(probs).map_err(|e| IoError::validation("space.probs", e))?;
    let exponent =
        Exponent::new(exps, cfg.range_order).map_err(|e| IoError::validation("exponent", e))?;
    let order = ConeOrder::orthant(d).map_err(|e| IoError::validation("cone", e))?;
    let inst = Instance {
        space,
        order,
        exponent,
        economies,
        measures: MeasureSpec::catalog(d),
    };
    inst.validate()?;
    Ok(inst)
}
