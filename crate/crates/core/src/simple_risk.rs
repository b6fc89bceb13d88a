//! Simple-systemic risk measures on scenario-indexed scalars.
//!
//! Positions are losses: larger values are riskier, and every catalog member
//! is monotone, convex and returns constants unchanged.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math;
use crate::report::{AxiomReport, CheckConfig, Recorder, Witness};
use crate::sampling::{self, trial_rng, SAMPLE_SCALE};
use crate::space::{FiniteSpace, RandomVariable};

/// Tolerance used when testing membership in a conjugate's effective domain.
pub const DENSITY_TOL: f64 = 1e-9;

const SALT_B1: u64 = 11;
const SALT_B2: u64 = 12;

pub type SimpleEvaluator = Arc<dyn Fn(&[f64], &FiniteSpace) -> Result<f64> + Send + Sync>;

#[derive(Clone)]
pub enum SimpleKind {
    Expectation,
    /// `(1/beta) log E[exp(beta X)]`.
    Entropic {
        beta: f64,
    },
    /// `min_t { t + E[(X - t)_+] / (1 - level) }`.
    ExpectedShortfall {
        level: f64,
    },
    /// `E[X] + c E[(X - E[X])_+]`.
    MeanSemideviation {
        c: f64,
    },
    Custom {
        name: String,
        eval: SimpleEvaluator,
    },
}

#[derive(Clone)]
pub struct SimpleRiskMeasure {
    kind: SimpleKind,
}

impl fmt::Debug for SimpleRiskMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl SimpleRiskMeasure {
    pub fn expectation() -> Self {
        Self {
            kind: SimpleKind::Expectation,
        }
    }

    pub fn entropic(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: "must be positive and finite".into(),
            });
        }
        Ok(Self {
            kind: SimpleKind::Entropic { beta },
        })
    }

    pub fn expected_shortfall(level: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&level) {
            return Err(Error::InvalidParameter {
                name: "level",
                reason: "must lie in [0, 1)".into(),
            });
        }
        Ok(Self {
            kind: SimpleKind::ExpectedShortfall { level },
        })
    }

    pub fn mean_semideviation(c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidParameter {
                name: "c",
                reason: "must lie in [0, 1]".into(),
            });
        }
        Ok(Self {
            kind: SimpleKind::MeanSemideviation { c },
        })
    }

    pub fn custom<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[f64], &FiniteSpace) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            kind: SimpleKind::Custom {
                name: name.into(),
                eval: Arc::new(eval),
            },
        }
    }

    /// Expectation, entropic(1), expected shortfall(0.5), mean-semideviation(0.5).
    pub fn catalog() -> Vec<Self> {
        vec![
            Self::expectation(),
            Self::entropic(1.0).expect("valid"),
            Self::expected_shortfall(0.5).expect("valid"),
            Self::mean_semideviation(0.5).expect("valid"),
        ]
    }

    pub fn kind(&self) -> &SimpleKind {
        &self.kind
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.kind, SimpleKind::Custom { .. })
    }

    pub fn name(&self) -> String {
        match &self.kind {
            SimpleKind::Expectation => "expectation".into(),
            SimpleKind::Entropic { beta } => format!("entropic({beta})"),
            SimpleKind::ExpectedShortfall { level } => format!("expected_shortfall({level})"),
            SimpleKind::MeanSemideviation { c } => format!("mean_semideviation({c})"),
            SimpleKind::Custom { name, .. } => format!("custom({name})"),
        }
    }

    /// `rho(X)`; only custom members can return `+inf` or fail.
    pub fn eval(&self, x: &RandomVariable, sp: &FiniteSpace) -> Result<f64> {
        self.eval_slice(x.values(), sp)
    }

    pub(crate) fn eval_slice(&self, x: &[f64], sp: &FiniteSpace) -> Result<f64> {
        sp.check_len(x.len())?;
        if let SimpleKind::Custom { eval, .. } = &self.kind {
            return eval(x, sp);
        }
        // every catalog member maps a constant to itself
        if x.iter().all(|&v| v == x[0]) {
            return Ok(x[0]);
        }
        Ok(match &self.kind {
            SimpleKind::Expectation => sp.expect(x),
            SimpleKind::Entropic { beta } => entropic(x, *beta, sp),
            SimpleKind::ExpectedShortfall { level } => {
                expected_shortfall_with_threshold(x, *level, sp).0
            }
            SimpleKind::MeanSemideviation { c } => {
                let m = sp.expect(x);
                let upper: f64 = sp
                    .probs()
                    .iter()
                    .zip(x)
                    .map(|(p, v)| p * (v - m).max(0.0))
                    .sum();
                m + c * upper
            }
            SimpleKind::Custom { .. } => unreachable!(),
        })
    }

    /// Closed-form conjugate `rho*(Yhat) = sup_X { E[Yhat X] - rho(X) }`.
    pub fn analytic_conjugate(&self) -> Result<ConjugateDescriptor> {
        Ok(match &self.kind {
            SimpleKind::Expectation => ConjugateDescriptor::Expectation,
            SimpleKind::Entropic { beta } => ConjugateDescriptor::Entropic { beta: *beta },
            SimpleKind::ExpectedShortfall { level } => {
                ConjugateDescriptor::ExpectedShortfall { level: *level }
            }
            SimpleKind::MeanSemideviation { c } => ConjugateDescriptor::MeanSemideviation { c: *c },
            SimpleKind::Custom { .. } => return Err(Error::UnsupportedKind),
        })
    }

    /// A density `Yhat` in the subdifferential of `rho` at `X`, so that
    /// `E[Yhat X] - rho*(Yhat) = rho(X)`.
    pub fn subgradient(&self, x: &RandomVariable, sp: &FiniteSpace) -> Result<RandomVariable> {
        sp.check_len(x.len())?;
        let x = x.values();
        let probs = sp.probs();
        let n = x.len();
        let density = match &self.kind {
            SimpleKind::Expectation => vec![1.0; n],
            SimpleKind::Entropic { beta } => {
                let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = x.iter().map(|v| math::exp(beta * (v - m))).collect();
                let norm: f64 = probs.iter().zip(&w).map(|(p, w)| p * w).sum();
                w.into_iter().map(|w| w / norm).collect()
            }
            SimpleKind::ExpectedShortfall { level } => {
                let tail = 1.0 - level;
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| x[b].total_cmp(&x[a]));
                let mut remaining = tail;
                let mut out = vec![0.0; n];
                for i in order {
                    if remaining <= 0.0 {
                        break;
                    }
                    let take = probs[i].min(remaining);
                    out[i] = take / (probs[i] * tail);
                    remaining -= take;
                }
                out
            }
            SimpleKind::MeanSemideviation { c } => {
                let m = sp.expect(x);
                let h: Vec<f64> = x.iter().map(|&v| if v > m { *c } else { 0.0 }).collect();
                let mean_h: f64 = probs.iter().zip(&h).map(|(p, h)| p * h).sum();
                h.into_iter().map(|h| 1.0 + h - mean_h).collect()
            }
            SimpleKind::Custom { .. } => return Err(Error::UnsupportedKind),
        };
        Ok(RandomVariable::from_vec(density))
    }

    /// Sampled check of monotonicity (B1), convexity (B2) and constancy (B3).
    pub fn check_axioms(&self, sp: &FiniteSpace, cfg: &CheckConfig) -> Result<AxiomReport> {
        cfg.validate()?;
        let n = sp.len();
        let rho = |x: &[f64]| self.eval_slice(x, sp).unwrap_or(f64::NAN);

        let mut b1 = Recorder::new(
            "B1",
            "monotonicity: Y <= X implies rho(Y) <= rho(X)",
            cfg.tol,
        );
        for t in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, SALT_B1, t as u64);
            let x = sampling::normal_vec(&mut rng, n, SAMPLE_SCALE);
            let drop = sampling::nonneg_vec(&mut rng, n, SAMPLE_SCALE);
            let y: Vec<f64> = x.iter().zip(&drop).map(|(a, b)| a - b).collect();
            let (ry, rx) = (rho(&y), rho(&x));
            b1.record(
                t,
                ry,
                rx,
                || format!("rho(Y) = {ry} exceeds rho(X) = {rx} although Y <= X"),
                || vec![Witness::vector("X", &x), Witness::vector("Y", &y)],
            );
        }

        let mut b2 = Recorder::new("B2", "convexity along sampled segments", cfg.tol);
        for t in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, SALT_B2, t as u64);
            let x = sampling::normal_vec(&mut rng, n, SAMPLE_SCALE);
            let y = sampling::normal_vec(&mut rng, n, SAMPLE_SCALE);
            let lambda = sampling::unit(&mut rng);
            let mix: Vec<f64> = x
                .iter()
                .zip(&y)
                .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                .collect();
            let lhs = rho(&mix);
            let rhs = lambda * rho(&x) + (1.0 - lambda) * rho(&y);
            b2.record(
                t,
                lhs,
                rhs,
                || format!("rho(mix) = {lhs} exceeds chord value {rhs}"),
                || {
                    vec![
                        Witness::vector("X", &x),
                        Witness::vector("Y", &y),
                        Witness::scalar("lambda", lambda),
                    ]
                },
            );
        }

        let mut b3 = Recorder::new("B3", "constancy: rho(a) = a for a in -10..=10", cfg.tol);
        for (t, a) in (-10..=10).enumerate() {
            let a = a as f64;
            let value = rho(&vec![a; n]);
            let dev = (value - a).abs();
            b3.record(
                t,
                if dev.is_nan() { f64::INFINITY } else { dev },
                0.0,
                || format!("rho({a}) = {value}"),
                || vec![Witness::scalar("a", a), Witness::scalar("rho(a)", value)],
            );
        }

        Ok(AxiomReport {
            subject: self.name(),
            suite: "simple".into(),
            unverified_custom: self.is_custom(),
            checks: vec![b1.finish(), b2.finish(), b3.finish()],
        })
    }
}

fn entropic(x: &[f64], beta: f64, sp: &FiniteSpace) -> f64 {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = sp
        .probs()
        .iter()
        .zip(x)
        .map(|(p, v)| p * math::exp(beta * (v - m)))
        .sum();
    let mass: f64 = sp.probs().iter().sum();
    m + (math::ln(sum) - math::ln(mass)) / beta
}

/// Expected shortfall and the smallest minimizing threshold `t`.
///
/// The objective `t + E[(X - t)_+] / (1 - level)` is piecewise linear in `t`
/// with kinks at the atoms, so its minimum is attained at one of them.
pub fn expected_shortfall_with_threshold(x: &[f64], level: f64, sp: &FiniteSpace) -> (f64, f64) {
    let scale = 1.0 / (1.0 - level);
    let objective = |t: f64| {
        let excess: f64 = sp
            .probs()
            .iter()
            .zip(x)
            .map(|(p, v)| p * (v - t).max(0.0))
            .sum();
        t + scale * excess
    };
    let mut candidates = x.to_vec();
    candidates.sort_by(f64::total_cmp);
    let mut best = (f64::INFINITY, f64::NAN);
    for t in candidates {
        let value = objective(t);
        if value < best.0 - 1e-13 * (1.0 + best.0.abs()) || best.1.is_nan() {
            best = (value, t);
        }
    }
    best
}

/// Closed-form conjugates of the catalog members, evaluated on densities
/// with respect to the space's probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConjugateDescriptor {
    /// 0 on `Yhat = 1`, `+inf` elsewhere.
    Expectation,
    /// 0 on densities bounded by `1 / (1 - level)`, `+inf` elsewhere.
    ExpectedShortfall { level: f64 },
    /// Relative entropy of the density divided by `beta`.
    Entropic { beta: f64 },
    /// 0 on densities `1 + h - E[h]` with `0 <= h <= c`, `+inf` elsewhere.
    MeanSemideviation { c: f64 },
}

impl ConjugateDescriptor {
    pub fn value(&self, yhat: &RandomVariable, sp: &FiniteSpace) -> Result<f64> {
        sp.check_len(yhat.len())?;
        let y = yhat.values();
        let probs = sp.probs();
        let mean: f64 = probs.iter().zip(y).map(|(p, v)| p * v).sum();
        let is_density = (mean - 1.0).abs() <= DENSITY_TOL && y.iter().all(|&v| v >= -DENSITY_TOL);
        let infeasible = f64::INFINITY;
        Ok(match *self {
            Self::Expectation => {
                if y.iter().all(|v| (v - 1.0).abs() <= DENSITY_TOL) {
                    0.0
                } else {
                    infeasible
                }
            }
            Self::ExpectedShortfall { level } => {
                let cap = 1.0 / (1.0 - level);
                if is_density && y.iter().all(|&v| v <= cap + DENSITY_TOL) {
                    0.0
                } else {
                    infeasible
                }
            }
            Self::Entropic { beta } => {
                if !is_density {
                    return Ok(infeasible);
                }
                let entropy: f64 = probs
                    .iter()
                    .zip(y)
                    .map(|(p, &v)| if v > 0.0 { p * v * math::ln(v) } else { 0.0 })
                    .sum();
                entropy / beta
            }
            Self::MeanSemideviation { c } => {
                let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
                if (mean - 1.0).abs() <= DENSITY_TOL && hi - lo <= c + DENSITY_TOL {
                    0.0
                } else {
                    infeasible
                }
            }
        })
    }
}
