//! Finite probability spaces, cone orders on `E = R^d`, and the norms of the
//! classical and variable-exponent Lebesgue spaces over them.
//!
//! Every atom carries positive mass, so essential suprema are plain maxima and
//! every "for all scenarios" quantifier is a check over all atoms.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Absolute tolerance of the cone order test.
pub const CONE_TOL: f64 = 1e-12;
/// Admissible deviation of the total probability mass from one.
pub const MASS_TOL: f64 = 1e-12;

const MAX_HALVINGS: usize = 2200;
const MAX_BISECTIONS: usize = 400;

/// Discrete probability space with full support.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace {
    probs: Vec<f64>,
}

impl FiniteSpace {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptySpace);
        }
        for (index, &value) in probs.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveProbability { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::ProbabilitiesDoNotSumToOne { sum });
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Expectation of scenario values.
    ///
    /// Computed as `x_0 + E[x - x_0]` normalized by the stored mass, which
    /// returns a constant input bit-for-bit even though the stored
    /// probabilities only sum to one up to rounding.
    pub fn expect(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let anchor = values[0];
        let mass: f64 = self.probs.iter().sum();
        let centered: f64 = self
            .probs
            .iter()
            .zip(values)
            .map(|(p, v)| p * (v - anchor))
            .sum();
        anchor + centered / mass
    }

    pub(crate) fn check_len(&self, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }
}

/// Polyhedral cone `K = {x : Hx >= 0}` together with an interior direction `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeOrder {
    dim: usize,
    halfspaces: Vec<Vec<f64>>,
    z: Vec<f64>,
    hz: Vec<f64>,
}

impl ConeOrder {
    pub fn new(halfspaces: Vec<Vec<f64>>, z: Vec<f64>) -> Result<Self> {
        let dim = z.len();
        if dim == 0 {
            return Err(Error::InvalidCone("dimension must be at least 1".into()));
        }
        if halfspaces.is_empty() {
            return Err(Error::InvalidCone(
                "at least one halfspace row is required".into(),
            ));
        }
        if let Some(i) = z.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        for (r, row) in halfspaces.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidCone(format!(
                    "halfspace row {r} has a non-finite entry"
                )));
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::InvalidCone(format!("halfspace row {r} is zero")));
            }
        }
        let hz: Vec<f64> = halfspaces.iter().map(|row| math::dot(row, &z)).collect();
        if let Some(r) = hz.iter().position(|&v| v <= 0.0) {
            return Err(Error::InvalidCone(format!(
                "reference vector is not interior: row {r} gives {}",
                hz[r]
            )));
        }
        Ok(Self {
            dim,
            halfspaces,
            z,
            hz,
        })
    }

    /// Positive orthant with `z` the all-ones vector.
    pub fn orthant(dim: usize) -> Result<Self> {
        Self::orthant_with_z(vec![1.0; dim])
    }

    pub fn orthant_with_z(z: Vec<f64>) -> Result<Self> {
        let dim = z.len();
        let rows = (0..dim)
            .map(|i| {
                let mut row = vec![0.0; dim];
                row[i] = 1.0;
                row
            })
            .collect();
        Self::new(rows, z)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn halfspaces(&self) -> &[Vec<f64>] {
        &self.halfspaces
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    fn h_times<'a>(&'a self, v: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        self.halfspaces.iter().map(move |row| math::dot(row, v))
    }

    /// `x <=_K y`, i.e. `H(y - x) >= -1e-12` componentwise.
    pub fn leq(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        self.check_dim(x.len())?;
        self.check_dim(y.len())?;
        let diff: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let inside = self.h_times(&diff).all(|v| v >= -CONE_TOL);
        Ok(inside)
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        v.len() == self.dim && self.h_times(v).all(|h| h >= -CONE_TOL)
    }

    /// Smallest shift of `v` along `z` that lands in the cone.
    pub fn lift_into_cone(&self, v: &[f64]) -> Vec<f64> {
        let t = self
            .h_times(v)
            .zip(&self.hz)
            .fold(0.0_f64, |t, (hv, hz)| t.max(-hv / hz));
        v.iter().zip(&self.z).map(|(x, z)| x + t * z).collect()
    }

    /// `min{a : x <=_K a z}`.
    pub fn min_dominating_scalar(&self, x: &[f64]) -> f64 {
        self.h_times(x)
            .zip(&self.hz)
            .fold(f64::NEG_INFINITY, |m, (hx, hz)| m.max(hx / hz))
    }

    /// `max{a : a z <=_K x}`.
    pub fn max_dominated_scalar(&self, x: &[f64]) -> f64 {
        self.h_times(x)
            .zip(&self.hz)
            .fold(f64::INFINITY, |m, (hx, hz)| m.min(hx / hz))
    }

    /// The point `a z`.
    pub fn ray(&self, a: f64) -> Vec<f64> {
        self.z.iter().map(|z| a * z).collect()
    }
}

/// Per-atom integrability exponent `p(w)` and the fixed order `p` of the
/// range space.
#[derive(Debug, Clone, PartialEq)]
pub struct Exponent {
    values: Vec<f64>,
    range_order: f64,
}

impl Exponent {
    pub fn new(values: Vec<f64>, range_order: f64) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            if !(value >= 1.0) {
                return Err(Error::InvalidExponent { index, value });
            }
        }
        if !(range_order >= 1.0) {
            return Err(Error::InvalidOrder(range_order));
        }
        Ok(Self {
            values,
            range_order,
        })
    }

    pub fn constant(n: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; n], p)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn range_order(&self) -> f64 {
        self.range_order
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Scenario-by-institution position matrix; row `i` is the state in atom `i`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RandomEconomy {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl RandomEconomy {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut values = Vec::with_capacity(n * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            values.extend(row);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { n, d, values })
    }

    /// Row-major construction; panics if `values.len() != n * d`.
    pub fn from_flat(n: usize, d: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n * d, "economy buffer has wrong size");
        Self { n, d, values }
    }

    /// Deterministic embedding of `x` as the economy constant across atoms.
    pub fn constant(n: usize, x: &[f64]) -> Self {
        let mut values = Vec::with_capacity(n * x.len());
        for _ in 0..n {
            values.extend_from_slice(x);
        }
        Self {
            n,
            d: x.len(),
            values,
        }
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            n,
            d,
            values: vec![0.0; n * d],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.to_vec()).collect()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            d: self.d,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, lambda: f64, other: &Self) -> Self {
        debug_assert_eq!(self.values.len(), other.values.len());
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        Self {
            n: self.n,
            d: self.d,
            values,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.mix_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.mix_with(other, |a, b| a - b)
    }

    fn mix_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.values.len(), other.values.len());
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| op(a, b))
            .collect();
        Self {
            n: self.n,
            d: self.d,
            values,
        }
    }

    /// Euclidean norm of each row.
    pub fn row_norms(&self) -> Vec<f64> {
        self.rows().map(math::euclid).collect()
    }
}

/// Scenario-indexed scalars.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct RandomVariable {
    values: Vec<f64>,
}

impl RandomVariable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(n: usize, a: f64) -> Self {
        Self { values: vec![a; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mix(&self, lambda: f64, other: &Self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                .collect(),
        }
    }
}

/// Classical `L^p` norm; `p = inf` gives the maximum absolute value.
pub fn lp_norm(x: &RandomVariable, p: f64, sp: &FiniteSpace) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidOrder(p));
    }
    sp.check_len(x.len())?;
    Ok(weighted_lp(x.values(), p, sp.probs()))
}

fn weighted_lp(values: &[f64], p: f64, probs: &[f64]) -> f64 {
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let sum: f64 = probs
        .iter()
        .zip(values)
        .map(|(w, v)| w * math::powf(v.abs() / scale, p))
        .sum();
    scale * math::powf(sum, 1.0 / p)
}

fn modular_from_norms(norms: &[f64], exponents: &[f64], lambda: f64, probs: &[f64]) -> f64 {
    let mut total = 0.0;
    for ((&r, &p), &w) in norms.iter().zip(exponents).zip(probs) {
        let ratio = r / lambda;
        if p.is_infinite() {
            if ratio > 1.0 {
                return f64::INFINITY;
            }
        } else {
            total += w * math::powf(ratio, p);
        }
    }
    total
}

/// Variable-exponent modular `sum_i P_i (|f_i| / lambda)^{p_i}` with the
/// indicator convention (0 or `+inf`) on atoms where `p_i = inf`.
pub fn modular(f: &RandomEconomy, exp: &Exponent, lambda: f64, sp: &FiniteSpace) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    sp.check_len(f.n())?;
    sp.check_len(exp.len())?;
    Ok(modular_from_norms(
        &f.row_norms(),
        exp.values(),
        lambda,
        sp.probs(),
    ))
}

/// Luxemburg norm `inf{lambda > 0 : modular(f, lambda) <= 1}`.
pub fn luxemburg_norm(f: &RandomEconomy, exp: &Exponent, sp: &FiniteSpace) -> Result<f64> {
    sp.check_len(f.n())?;
    sp.check_len(exp.len())?;
    let norms = f.row_norms();
    let max_norm = norms.iter().fold(0.0_f64, |m, &v| m.max(v));
    if max_norm == 0.0 {
        return Ok(0.0);
    }
    let rho = |lambda: f64| modular_from_norms(&norms, exp.values(), lambda, sp.probs());

    let mut hi = max_norm.max(1.0) * sp.len() as f64;
    let mut doublings = 0;
    while rho(hi) > 1.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > crate::root::MAX_DOUBLINGS {
            return Err(Error::BracketingFailure { value: 1.0 });
        }
    }
    let mut lo = hi;
    let mut halvings = 0;
    while rho(lo) <= 1.0 {
        lo *= 0.5;
        halvings += 1;
        if halvings > MAX_HALVINGS || lo == 0.0 {
            return Err(Error::BracketingFailure { value: 1.0 });
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if rho(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Probability-weighted pairing `E[<fhat(w), f(w)>]`.
pub fn dual_pairing(fhat: &RandomEconomy, f: &RandomEconomy, sp: &FiniteSpace) -> Result<f64> {
    sp.check_len(f.n())?;
    sp.check_len(fhat.n())?;
    if fhat.d() != f.d() {
        return Err(Error::DimensionMismatch {
            expected: f.d(),
            found: fhat.d(),
        });
    }
    Ok(sp
        .probs()
        .iter()
        .zip(fhat.rows().zip(f.rows()))
        .map(|(p, (a, b))| p * math::dot(a, b))
        .sum())
}

/// Hölder conjugate `q` with `1/p + 1/q = 1`.
pub fn conjugate_exponent(p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidOrder(p));
    }
    Ok(if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn scalar_economy(v: &[f64]) -> RandomEconomy {
        RandomEconomy::from_flat(v.len(), 1, v.to_vec())
    }

    #[test]
    fn make_space_examples() {
        assert_eq!(FiniteSpace::new(vec![0.5, 0.5]).unwrap().len(), 2);
        assert!(FiniteSpace::new(vec![0.3, 0.7]).is_ok());
        assert!(matches!(
            FiniteSpace::new(vec![0.5, 0.6]),
            Err(Error::ProbabilitiesDoNotSumToOne { .. })
        ));
        assert!(matches!(
            FiniteSpace::new(vec![1.0, 0.0]),
            Err(Error::NonPositiveProbability { index: 1, .. })
        ));
        assert_eq!(FiniteSpace::new(vec![]), Err(Error::EmptySpace));
    }

    #[test]
    fn expectation_of_constant_is_exact() {
        let sp = FiniteSpace::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        for a in [-1e6, -3.7, 0.1, 12345.678] {
            assert_eq!(sp.expect(&[a; 4]), a);
        }
    }

    #[test]
    fn cone_leq_examples() {
        let k = ConeOrder::orthant(2).unwrap();
        assert!(k.leq(&[0.0, 0.0], &[1.0, 2.0]).unwrap());
        assert!(k.leq(&[1.0, 2.0], &[1.0, 2.0]).unwrap());
        assert!(!k.leq(&[0.0, 3.0], &[1.0, 2.0]).unwrap());
        assert!(matches!(
            k.leq(&[0.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cone_rejects_exterior_reference() {
        let err = ConeOrder::new(vec![vec![1.0, 0.0], vec![-1.0, 1.0]], vec![1.0, 1.0]);
        assert!(matches!(err, Err(Error::InvalidCone(_))));
        assert!(ConeOrder::new(vec![vec![1.0, 0.0], vec![-1.0, 1.0]], vec![1.0, 2.0]).is_ok());
        assert!(ConeOrder::new(vec![vec![0.0, 0.0]], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn envelope_scalars_on_orthant() {
        let k = ConeOrder::orthant(3).unwrap();
        assert_eq!(k.min_dominating_scalar(&[1.0, 3.0, -2.0]), 3.0);
        assert_eq!(k.max_dominated_scalar(&[1.0, 3.0, -2.0]), -2.0);
        let lifted = k.lift_into_cone(&[1.0, -4.0, 2.0]);
        assert_eq!(lifted, vec![5.0, 0.0, 6.0]);
    }

    #[test]
    fn lp_norm_examples() {
        let sp = FiniteSpace::uniform(2).unwrap();
        let x = RandomVariable::from_vec(vec![3.0, -4.0]);
        assert_abs_diff_eq!(
            lp_norm(&x, 2.0, &sp).unwrap(),
            12.5_f64.sqrt(),
            epsilon = 1e-14
        );
        assert_eq!(lp_norm(&x, f64::INFINITY, &sp).unwrap(), 4.0);
        assert_eq!(
            lp_norm(&RandomVariable::constant(2, 0.0), 2.0, &sp).unwrap(),
            0.0
        );
        assert_eq!(lp_norm(&x, 0.5, &sp), Err(Error::InvalidOrder(0.5)));
    }

    #[test]
    fn modular_examples() {
        let sp = FiniteSpace::uniform(2).unwrap();
        let exp = Exponent::new(vec![1.0, 2.0], 2.0).unwrap();
        assert_eq!(
            modular(&RandomEconomy::zeros(2, 3), &exp, 0.7, &sp).unwrap(),
            0.0
        );
        assert_abs_diff_eq!(
            modular(&scalar_economy(&[2.0, 2.0]), &exp, 2.0, &sp).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let one = FiniteSpace::uniform(1).unwrap();
        let inf = Exponent::new(vec![f64::INFINITY], 2.0).unwrap();
        assert_eq!(
            modular(&scalar_economy(&[3.0]), &inf, 2.0, &one).unwrap(),
            f64::INFINITY
        );
        assert_eq!(
            modular(&scalar_economy(&[3.0]), &inf, 3.0, &one).unwrap(),
            0.0
        );
        assert_eq!(
            modular(&scalar_economy(&[3.0]), &inf, 0.0, &one),
            Err(Error::NonPositiveLambda(0.0))
        );
    }

    #[test]
    fn luxemburg_examples() {
        let sp = FiniteSpace::uniform(2).unwrap();
        let exp = Exponent::new(vec![1.0, 2.0], 2.0).unwrap();
        // oracle: 0.5 t + 0.5 t^2 = 1 with t = 2 / lambda, positive root of
        // t^2 + t - 2 = 0 is t = (-1 + sqrt(9)) / 2 = 1, so lambda = 2
        let t = (-1.0 + (1.0_f64 + 8.0).sqrt()) / 2.0;
        let expected = 2.0 / t;
        let got = luxemburg_norm(&scalar_economy(&[2.0, 2.0]), &exp, &sp).unwrap();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-10 * expected);
        assert_eq!(
            luxemburg_norm(&RandomEconomy::zeros(2, 2), &exp, &sp).unwrap(),
            0.0
        );
    }

    #[test]
    fn luxemburg_with_infinite_exponent_is_max_norm() {
        let sp = FiniteSpace::uniform(3).unwrap();
        let exp = Exponent::constant(3, f64::INFINITY).unwrap();
        let f = RandomEconomy::new(vec![vec![3.0, 4.0], vec![1.0, 0.0], vec![0.0, -2.0]]).unwrap();
        let got = luxemburg_norm(&f, &exp, &sp).unwrap();
        assert_abs_diff_eq!(got, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn luxemburg_constant_exponent_matches_lp() {
        let sp = FiniteSpace::new(vec![0.2, 0.5, 0.3]).unwrap();
        let f = RandomEconomy::new(vec![vec![1.0, -2.0], vec![0.5, 3.0], vec![-4.0, 0.0]]).unwrap();
        let norms = RandomVariable::from_vec(f.row_norms());
        for p in [1.0, 1.5, 2.0, 3.7] {
            let exp = Exponent::constant(3, p).unwrap();
            let lux = luxemburg_norm(&f, &exp, &sp).unwrap();
            let lp = lp_norm(&norms, p, &sp).unwrap();
            assert_abs_diff_eq!(lux, lp, epsilon = 1e-10);
        }
    }

    #[test]
    fn pairing_and_conjugate_exponent() {
        let sp = FiniteSpace::uniform(2).unwrap();
        let fhat = scalar_economy(&[1.0, 2.0]);
        let f = scalar_economy(&[3.0, 4.0]);
        assert_abs_diff_eq!(dual_pairing(&fhat, &f, &sp).unwrap(), 5.5, epsilon = 1e-15);
        assert_eq!(
            dual_pairing(&RandomEconomy::zeros(2, 1), &f, &sp).unwrap(),
            0.0
        );
        assert_eq!(conjugate_exponent(2.0).unwrap(), 2.0);
        assert_eq!(conjugate_exponent(1.0).unwrap(), f64::INFINITY);
        assert_eq!(conjugate_exponent(f64::INFINITY).unwrap(), 1.0);
        assert_abs_diff_eq!(conjugate_exponent(4.0).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        assert!(conjugate_exponent(0.9).is_err());
    }

    #[test]
    fn exponent_validation() {
        assert!(matches!(
            Exponent::new(vec![2.0, 0.5], 2.0),
            Err(Error::InvalidExponent { index: 1, .. })
        ));
        assert!(Exponent::new(vec![2.0, f64::INFINITY], 1.0).is_ok());
        assert!(Exponent::new(vec![2.0], 0.0).is_err());
        assert!(Exponent::new(vec![f64::NAN], 2.0).is_err());
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-50.0..50.0_f64, 3)
    }

    fn slanted() -> ConeOrder {
        ConeOrder::new(
            vec![
                vec![1.0, 0.0, 0.0],
                vec![-1.0, 1.0, 0.0],
                vec![0.0, 0.5, 1.0],
            ],
            vec![1.0, 2.0, 1.0],
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn cone_order_is_a_preorder(x in vec3(), y in vec3(), v in vec3(), w in vec3()) {
            for k in [ConeOrder::orthant(3).unwrap(), slanted()] {
                prop_assert!(k.leq(&x, &x).unwrap());
                let lifted = k.lift_into_cone(&y);
                prop_assert!(k.contains(&lifted));
                let y2: Vec<f64> = x.iter().zip(&lifted).map(|(a, b)| a + b).collect();
                let lifted2 = k.lift_into_cone(&w);
                let y3: Vec<f64> = y2.iter().zip(&lifted2).map(|(a, b)| a + b).collect();
                prop_assert!(k.leq(&x, &y2).unwrap());
                prop_assert!(k.leq(&y2, &y3).unwrap());
                prop_assert!(k.leq(&x, &y3).unwrap());
                let xv: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
                let yv: Vec<f64> = y2.iter().zip(&v).map(|(a, b)| a + b).collect();
                prop_assert!(k.leq(&xv, &yv).unwrap());
            }
        }

        #[test]
        fn luxemburg_is_homogeneous(
            rows in prop::collection::vec(prop::collection::vec(-20.0..20.0_f64, 2), 4),
            exps in prop::collection::vec(1.0..4.0_f64, 4),
            c in -5.0..5.0_f64,
        ) {
            let sp = FiniteSpace::uniform(4).unwrap();
            let f = RandomEconomy::new(rows).unwrap();
            let exp = Exponent::new(exps, 2.0).unwrap();
            let base = luxemburg_norm(&f, &exp, &sp).unwrap();
            let scaled = luxemburg_norm(&f.scale(c), &exp, &sp).unwrap();
            prop_assert!((scaled - c.abs() * base).abs() <= 1e-8 * (1.0 + base * c.abs()));
        }
    }
}
