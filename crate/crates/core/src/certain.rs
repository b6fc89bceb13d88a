//! Convex certain functions: monotone, convex, surjective aggregators
//! `E -> R` that collapse a multi-institution state into one number.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math;
use crate::report::{AxiomReport, CheckConfig, Recorder, Witness};
use crate::root::invert_increasing;
use crate::sampling::{self, trial_rng, SAMPLE_SCALE};
use crate::space::{lp_norm, ConeOrder, Exponent, FiniteSpace, RandomEconomy, RandomVariable};

/// Value a transfer map must exceed in absolute value along `+-z` for the
/// surjectivity probe to accept it.
pub const SURJECTIVITY_TARGET: f64 = 1e6;
const SURJECTIVITY_PROBES: u32 = 63;
/// Slack on the Lemma bound `||phi(f)||_p <= ||T(Z)||_p`.
pub const LEMMA_TOL: f64 = 1e-9;

const SALT_A1: u64 = 1;
const SALT_A2: u64 = 2;

pub type CertainEvaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum CertainKind {
    /// `<w, x>`.
    WeightedSum { weights: Vec<f64> },
    /// `max_i x_i`.
    MaxComponent,
    /// `<w, x> + beta * sum_i max(x_i - threshold, 0)`.
    Shortfall {
        weights: Vec<f64>,
        beta: f64,
        threshold: f64,
    },
    Custom {
        name: String,
        eval: CertainEvaluator,
    },
}

#[derive(Clone)]
pub struct CertainFunction {
    kind: CertainKind,
}

impl fmt::Debug for CertainFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidParameter {
            name: "weights",
            reason: "empty".into(),
        });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidParameter {
            name: "weights",
            reason: "entries must be finite and nonnegative".into(),
        });
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::InvalidParameter {
            name: "weights",
            reason: "must not be all zero".into(),
        });
    }
    Ok(())
}

fn fmt_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
    parts.join(",")
}

impl CertainFunction {
    pub fn weighted_sum(weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        Ok(Self {
            kind: CertainKind::WeightedSum { weights },
        })
    }

    pub fn max_component() -> Self {
        Self {
            kind: CertainKind::MaxComponent,
        }
    }

    pub fn shortfall(weights: Vec<f64>, beta: f64, threshold: f64) -> Result<Self> {
        check_weights(&weights)?;
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: "must be finite and >= 0".into(),
            });
        }
        if !threshold.is_finite() {
            return Err(Error::InvalidParameter {
                name: "threshold",
                reason: "must be finite".into(),
            });
        }
        Ok(Self {
            kind: CertainKind::Shortfall {
                weights,
                beta,
                threshold,
            },
        })
    }

    /// Wrap an arbitrary evaluator. Axiom reports on custom functions are
    /// flagged unverified.
    pub fn custom<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: CertainKind::Custom {
                name: name.into(),
                eval: Arc::new(eval),
            },
        }
    }

    /// The three catalog members on `R^d` with unit weights, `beta = 1` and
    /// threshold 0.
    pub fn catalog(d: usize) -> Vec<Self> {
        vec![
            Self::weighted_sum(vec![1.0; d]).expect("unit weights are valid"),
            Self::max_component(),
            Self::shortfall(vec![1.0; d], 1.0, 0.0).expect("unit weights are valid"),
        ]
    }

    pub fn kind(&self) -> &CertainKind {
        &self.kind
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.kind, CertainKind::Custom { .. })
    }

    /// Weights of a linear member.
    pub fn linear_weights(&self) -> Option<&[f64]> {
        match &self.kind {
            CertainKind::WeightedSum { weights } => Some(weights),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            CertainKind::WeightedSum { weights } => format!("weighted_sum({})", fmt_list(weights)),
            CertainKind::MaxComponent => "max_component".into(),
            CertainKind::Shortfall {
                weights,
                beta,
                threshold,
            } => {
                format!(
                    "shortfall(w={};beta={beta};k={threshold})",
                    fmt_list(weights)
                )
            }
            CertainKind::Custom { name, .. } => format!("custom({name})"),
        }
    }

    /// Dimension the function is tied to, if any.
    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            CertainKind::WeightedSum { weights } | CertainKind::Shortfall { weights, .. } => {
                Some(weights.len())
            }
            _ => None,
        }
    }

    fn check_input(&self, len: usize) -> Result<()> {
        match self.dim() {
            Some(d) if d != len => Err(Error::DimensionMismatch {
                expected: d,
                found: len,
            }),
            _ if len == 0 => Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            }),
            _ => Ok(()),
        }
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            CertainKind::WeightedSum { weights } => math::dot(weights, x),
            CertainKind::MaxComponent => x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            CertainKind::Shortfall {
                weights,
                beta,
                threshold,
            } => {
                let excess: f64 = x.iter().map(|v| (v - threshold).max(0.0)).sum();
                math::dot(weights, x) + beta * excess
            }
            CertainKind::Custom { eval, .. } => eval(x),
        }
    }

    /// `phi(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x.len())?;
        Ok(self.eval_unchecked(x))
    }

    /// The scenario-wise lift `phi(f)(w) = phi(f(w))`.
    pub fn apply_pointwise(&self, f: &RandomEconomy) -> Result<RandomVariable> {
        self.check_input(f.d())?;
        Ok(RandomVariable::from_vec(
            f.rows().map(|r| self.eval_unchecked(r)).collect(),
        ))
    }

    /// `T(a) = phi(a z)`.
    pub fn transfer(&self, a: f64, order: &ConeOrder) -> Result<f64> {
        self.check_input(order.dim())?;
        Ok(self.eval_unchecked(&order.ray(a)))
    }

    /// The unique `a` with `T(a) = v`.
    pub fn invert_transfer(&self, v: f64, order: &ConeOrder) -> Result<f64> {
        self.check_input(order.dim())?;
        let mut ray = vec![0.0; order.dim()];
        invert_increasing(
            |a| {
                for (r, z) in ray.iter_mut().zip(order.z()) {
                    *r = a * z;
                }
                self.eval_unchecked(&ray)
            },
            v,
        )
    }

    /// A subgradient of `phi` at `x`; custom members use central differences.
    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x.len())?;
        Ok(match &self.kind {
            CertainKind::WeightedSum { weights } => weights.clone(),
            CertainKind::MaxComponent => {
                let mut g = vec![0.0; x.len()];
                let arg = x
                    .iter()
                    .enumerate()
                    .fold(0, |best, (i, &v)| if v > x[best] { i } else { best });
                g[arg] = 1.0;
                g
            }
            CertainKind::Shortfall {
                weights,
                beta,
                threshold,
            } => weights
                .iter()
                .zip(x)
                .map(|(w, v)| if v > threshold { w + beta } else { *w })
                .collect(),
            CertainKind::Custom { eval, .. } => {
                let mut probe = x.to_vec();
                (0..x.len())
                    .map(|i| {
                        let h = 1e-6 * x[i].abs().max(1.0);
                        probe[i] = x[i] + h;
                        let up = eval(&probe);
                        probe[i] = x[i] - h;
                        let down = eval(&probe);
                        probe[i] = x[i];
                        (up - down) / (2.0 * h)
                    })
                    .collect()
            }
        })
    }

    /// Dominating scalar envelope `Z` of `f` along `z`.
    ///
    /// On atoms with `phi(f(w)) >= 0` this is `min{a : f(w) <=_K a z}`, elsewhere
    /// `max{a : a z <=_K f(w)}`; by monotonicity `|phi(f(w))| <= |T(Z(w))|`.
    pub fn scalar_envelope(&self, f: &RandomEconomy, order: &ConeOrder) -> Result<RandomVariable> {
        self.check_input(f.d())?;
        order.check_dim(f.d())?;
        let mut out = Vec::with_capacity(f.n());
        for (atom, row) in f.rows().enumerate() {
            let z = if self.eval_unchecked(row) >= 0.0 {
                order.min_dominating_scalar(row)
            } else {
                order.max_dominated_scalar(row)
            };
            if !z.is_finite() {
                return Err(Error::UnboundedEnvelope { atom });
            }
            out.push(z);
        }
        Ok(RandomVariable::from_vec(out))
    }

    /// Both sides of `||phi(f)||_p <= ||T(Z)||_p` in the range order of `exp`.
    pub fn lemma_bound_sides(
        &self,
        f: &RandomEconomy,
        exp: &Exponent,
        sp: &FiniteSpace,
        order: &ConeOrder,
    ) -> Result<(f64, f64)> {
        sp.check_len(f.n())?;
        sp.check_len(exp.len())?;
        let lifted = self.apply_pointwise(f)?;
        let envelope = self.scalar_envelope(f, order)?;
        let transferred: Vec<f64> = envelope
            .values()
            .iter()
            .map(|&a| self.eval_unchecked(&order.ray(a)))
            .collect();
        let p = exp.range_order();
        Ok((
            lp_norm(&lifted, p, sp)?,
            lp_norm(&RandomVariable::from_vec(transferred), p, sp)?,
        ))
    }

    pub fn check_lemma_bound(
        &self,
        f: &RandomEconomy,
        exp: &Exponent,
        sp: &FiniteSpace,
        order: &ConeOrder,
    ) -> Result<bool> {
        let (lhs, rhs) = self.lemma_bound_sides(f, exp, sp, order)?;
        Ok(lhs <= rhs + LEMMA_TOL)
    }

    /// Sampled check of monotonicity (A1), convexity (A2) and surjectivity
    /// along `z` (A3).
    pub fn check_axioms(&self, order: &ConeOrder, cfg: &CheckConfig) -> Result<AxiomReport> {
        cfg.validate()?;
        self.check_input(order.dim())?;
        let d = order.dim();
        let phi = |x: &[f64]| self.eval_unchecked(x);

        let mut a1 = Recorder::new(
            "A1",
            "monotonicity: x <=_K y implies phi(x) <= phi(y)",
            cfg.tol,
        );
        for t in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, SALT_A1, t as u64);
            let x = sampling::normal_vec(&mut rng, d, SAMPLE_SCALE);
            let k = sampling::cone_element(&mut rng, order);
            let y: Vec<f64> = x.iter().zip(&k).map(|(a, b)| a + b).collect();
            let (px, py) = (phi(&x), phi(&y));
            a1.record(
                t,
                px,
                py,
                || format!("phi(x) = {px} exceeds phi(y) = {py} although x <=_K y"),
                || vec![Witness::vector("x", &x), Witness::vector("y", &y)],
            );
        }

        let mut a2 = Recorder::new("A2", "convexity along sampled segments", cfg.tol);
        for t in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, SALT_A2, t as u64);
            let x = sampling::normal_vec(&mut rng, d, SAMPLE_SCALE);
            let y = sampling::normal_vec(&mut rng, d, SAMPLE_SCALE);
            let lambda = sampling::unit(&mut rng);
            let mix: Vec<f64> = x
                .iter()
                .zip(&y)
                .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                .collect();
            let lhs = phi(&mix);
            let rhs = lambda * phi(&x) + (1.0 - lambda) * phi(&y);
            a2.record(
                t,
                lhs,
                rhs,
                || format!("phi(mix) = {lhs} exceeds chord value {rhs}"),
                || {
                    vec![
                        Witness::vector("x", &x),
                        Witness::vector("y", &y),
                        Witness::scalar("lambda", lambda),
                    ]
                },
            );
        }

        let a3 = surjectivity_probe(
            "A3",
            "surjectivity: T(a) = phi(a z) is unbounded both ways",
            |a| phi(&order.ray(a)),
        );

        Ok(AxiomReport {
            subject: self.name(),
            suite: "certain".into(),
            unverified_custom: self.is_custom(),
            checks: vec![a1.finish(), a2.finish(), a3],
        })
    }
}

/// Escalating probe of `g(+-2^k)` against `+-SURJECTIVITY_TARGET`; together
/// with continuity and monotonicity of `g` this gives `g(R) = R`.
pub(crate) fn surjectivity_probe(
    axiom: &'static str,
    property: &'static str,
    g: impl Fn(f64) -> f64,
) -> crate::report::AxiomCheck {
    let mut rec = Recorder::new(axiom, property, 0.0);
    let (mut up, mut down) = (false, false);
    let mut last = (0.0, f64::NAN, f64::NAN);
    for k in 0..SURJECTIVITY_PROBES {
        let a = (1u64 << k) as f64;
        let (gp, gm) = (g(a), g(-a));
        last = (a, gp, gm);
        up |= gp >= SURJECTIVITY_TARGET;
        down |= gm <= -SURJECTIVITY_TARGET;
        if up && down {
            break;
        }
    }
    let (a, gp, gm) = last;
    if up && down {
        rec.record(0, 0.0, 0.0, String::new, Vec::new);
    } else {
        rec.fail(
            0,
            format!(
                "range probe did not reach +-{SURJECTIVITY_TARGET}: T({a}) = {gp}, T(-{a}) = {gm}"
            ),
            vec![
                Witness::vector("a", &[a, -a]),
                Witness::vector("T(a)", &[gp, gm]),
            ],
        );
    }
    rec.finish()
}
