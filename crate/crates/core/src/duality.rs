//! Acceptance sets of `rho_s` and `phi`, the primal representation of the
//! composed measure, and its dual representation with penalty `alpha`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::certain::CertainFunction;
use crate::error::{Error, Result};
use crate::report::{AxiomReport, CheckConfig, Recorder, Witness};
use crate::sampling::{self, trial_rng, SAMPLE_SCALE};
use crate::simple_risk::{SimpleRiskMeasure, DENSITY_TOL};
use crate::space::{dual_pairing, ConeOrder, FiniteSpace, RandomEconomy, RandomVariable};

/// Slack allowed by the membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-12;
/// Largest tolerated `dual - primal`.
pub const WEAK_DUALITY_TOL: f64 = 1e-8;
/// Gap below which an exact instance counts as tight.
pub const STRONG_DUALITY_TOL: f64 = 1e-6;
/// Sampled penalties above this are reported as unbounded.
pub const UNBOUNDED_THRESHOLD: f64 = 1e6;

const SALT_ACCEPT: u64 = 31;
const SALT_PRIMAL: u64 = 37;
const SALT_PENALTY: u64 = 38;
const SALT_CLOUD: u64 = 39;

/// `(c, X)`, a member of the acceptance set of `rho_s` when `rho_s(X) <= c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleAcceptancePoint {
    pub c: f64,
    pub x: RandomVariable,
}

/// `(Y, f)`, a member of the acceptance set of `phi` when `phi(f) <= Y`
/// atom by atom.
#[derive(Debug, Clone, PartialEq)]
pub struct CertainAcceptancePoint {
    pub y: RandomVariable,
    pub f: RandomEconomy,
}

pub fn acceptance_contains_simple(
    pt: &SimpleAcceptancePoint,
    rho: &SimpleRiskMeasure,
    sp: &FiniteSpace,
) -> Result<bool> {
    Ok(rho.eval(&pt.x, sp)? <= pt.c + MEMBERSHIP_TOL)
}

pub fn acceptance_contains_certain(
    pt: &CertainAcceptancePoint,
    phi: &CertainFunction,
    sp: &FiniteSpace,
) -> Result<bool> {
    sp.check_len(pt.y.len())?;
    sp.check_len(pt.f.n())?;
    let lifted = phi.apply_pointwise(&pt.f)?;
    Ok(lifted
        .values()
        .iter()
        .zip(pt.y.values())
        .all(|(v, y)| *v <= y + MEMBERSHIP_TOL))
}

fn max_excess(lifted: &[f64], y: &[f64]) -> f64 {
    lifted
        .iter()
        .zip(y)
        .map(|(v, y)| v - y)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Sampled convexity, f-monotonicity and b-monotonicity of both acceptance
/// sets. Members are drawn on or above the boundary; each check records how
/// far the transformed point leaves its set.
pub fn check_acceptance_properties(
    phi: &CertainFunction,
    rho: &SimpleRiskMeasure,
    sp: &FiniteSpace,
    order: &ConeOrder,
    cfg: &CheckConfig,
) -> Result<AxiomReport> {
    cfg.validate()?;
    if let Some(d) = phi.dim() {
        order.check_dim(d)?;
    }
    let (n, d) = (sp.len(), order.dim());
    let rho_of = |x: &[f64]| rho.eval_slice(x, sp).unwrap_or(f64::NAN);
    let phi_of = |f: &RandomEconomy| {
        phi.apply_pointwise(f)
            .map(RandomVariable::into_vec)
            .unwrap_or_else(|_| vec![f64::NAN; n])
    };
    let slack = |rng: &mut sampling::TrialRng| {
        let s = sampling::nonneg_vec(rng, 1, SAMPLE_SCALE);
        s[0]
    };
    let mut checks = Vec::with_capacity(6);

    let mut convex = Recorder::new(
        "simple-convex",
        "mixtures of members of A_rho stay in A_rho",
        cfg.tol,
    );
    let mut f_mono = Recorder::new(
        "simple-f-monotone",
        "(c, X) in A_rho and X' <= X imply (c, X') in A_rho",
        cfg.tol,
    );
    let mut b_mono = Recorder::new(
        "simple-b-monotone",
        "(c, X) in A_rho and c' >= c imply (c', X) in A_rho",
        cfg.tol,
    );
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, SALT_ACCEPT, t as u64);
        let x1 = sampling::normal_vec(&mut rng, n, SAMPLE_SCALE);
        let x2 = sampling::normal_vec(&mut rng, n, SAMPLE_SCALE);
        let c1 = rho_of(&x1) + slack(&mut rng);
        let c2 = rho_of(&x2) + slack(&mut rng);
        let lambda = sampling::unit(&mut rng);
        let xm: Vec<f64> = x1
            .iter()
            .zip(&x2)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        let cm = lambda * c1 + (1.0 - lambda) * c2;
        let rm = rho_of(&xm);
        convex.record(
            t,
            rm,
            cm,
            || format!("rho of the mixture is {rm} but the mixed capital is {cm}"),
            || {
                vec![
                    Witness::vector("X1", &x1),
                    Witness::vector("X2", &x2),
                    Witness::scalar("lambda", lambda),
                ]
            },
        );

        let drop = sampling::nonneg_vec(&mut rng, n, SAMPLE_SCALE);
        let lower: Vec<f64> = x1.iter().zip(&drop).map(|(a, b)| a - b).collect();
        let rl = rho_of(&lower);
        f_mono.record(
            t,
            rl,
            c1,
            || format!("lowering X raised rho to {rl} above c = {c1}"),
            || {
                vec![
                    Witness::vector("X", &x1),
                    Witness::vector("X'", &lower),
                    Witness::scalar("c", c1),
                ]
            },
        );

        let raised = c1 + slack(&mut rng);
        let r1 = rho_of(&x1);
        b_mono.record(
            t,
            r1,
            raised,
            || format!("rho(X) = {r1} exceeds raised capital {raised}"),
            || vec![Witness::vector("X", &x1), Witness::scalar("c'", raised)],
        );
    }
    checks.extend([convex.finish(), f_mono.finish(), b_mono.finish()]);

    let mut convex = Recorder::new(
        "certain-convex",
        "mixtures of members of A_phi stay in A_phi",
        cfg.tol,
    );
    let mut f_mono = Recorder::new(
        "certain-f-monotone",
        "(Y, f) in A_phi and f' <=_K f imply (Y, f') in A_phi",
        cfg.tol,
    );
    let mut b_mono = Recorder::new(
        "certain-b-monotone",
        "(Y, f) in A_phi and Y' >= Y imply (Y', f) in A_phi",
        cfg.tol,
    );
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, SALT_ACCEPT + 1, t as u64);
        let f1 = sampling::random_economy(&mut rng, n, d);
        let f2 = sampling::random_economy(&mut rng, n, d);
        let y1: Vec<f64> = phi_of(&f1)
            .iter()
            .zip(sampling::nonneg_vec(&mut rng, n, SAMPLE_SCALE))
            .map(|(a, s)| a + s)
            .collect();
        let y2: Vec<f64> = phi_of(&f2)
            .iter()
            .zip(sampling::nonneg_vec(&mut rng, n, SAMPLE_SCALE))
            .map(|(a, s)| a + s)
            .collect();
        let lambda = sampling::unit(&mut rng);
        let fm = f1.mix(lambda, &f2);
        let ym: Vec<f64> = y1
            .iter()
            .zip(&y2)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        let excess = max_excess(&phi_of(&fm), &ym);
        convex.record(
            t,
            excess,
            0.0,
            || format!("phi of the mixture exceeds the mixed Y by {excess}"),
            || {
                vec![
                    Witness::matrix("f1", f1.to_rows()),
                    Witness::matrix("f2", f2.to_rows()),
                    Witness::scalar("lambda", lambda),
                ]
            },
        );

        let lowered = f1.sub(&sampling::cone_economy(&mut rng, n, order));
        let excess = max_excess(&phi_of(&lowered), &y1);
        f_mono.record(
            t,
            excess,
            0.0,
            || format!("lowering f in the cone order raised phi above Y by {excess}"),
            || {
                vec![
                    Witness::matrix("f", f1.to_rows()),
                    Witness::matrix("f'", lowered.to_rows()),
                ]
            },
        );

        let raised: Vec<f64> = y1
            .iter()
            .zip(sampling::nonneg_vec(&mut rng, n, SAMPLE_SCALE))
            .map(|(a, s)| a + s)
            .collect();
        let excess = max_excess(&phi_of(&f1), &raised);
        b_mono.record(
            t,
            excess,
            0.0,
            || format!("phi(f) exceeds the raised Y by {excess}"),
            || {
                vec![
                    Witness::matrix("f", f1.to_rows()),
                    Witness::vector("Y'", &raised),
                ]
            },
        );
    }
    checks.extend([convex.finish(), f_mono.finish(), b_mono.finish()]);

    Ok(AxiomReport {
        subject: format!("{} o {}", rho.name(), phi.name()),
        suite: "acceptance".into(),
        unverified_custom: phi.is_custom() || rho.is_custom(),
        checks,
    })
}

/// Primal value `inf { c : (c, X) in A_rho, (X, f) in A_phi }` with the
/// evidence gathered for it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrimalReport {
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext::ext_f64"))]
    pub value: f64,
    /// `X* = phi(f)`, the minimizing position.
    pub position: RandomVariable,
    /// Both `(c*, X*)` and `(X*, f)` passed the membership tests.
    pub feasible: bool,
    pub samples: usize,
    /// Largest `c* - c` over sampled feasible `(c, X)`; never above `tol`
    /// when the infimum is attained at `c*`.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext::ext_f64"))]
    pub worst_undercut: f64,
}

/// `rho_s(phi(f))` attained at `X* = phi(f)`, checked against `cfg.trials`
/// random feasible points `X >= X*`, `c >= rho_s(X)`.
pub fn primal_value(
    f: &RandomEconomy,
    phi: &CertainFunction,
    rho: &SimpleRiskMeasure,
    sp: &FiniteSpace,
    cfg: &CheckConfig,
) -> Result<PrimalReport> {
    cfg.validate()?;
    sp.check_len(f.n())?;
    let position = phi.apply_pointwise(f)?;
    let value = rho.eval(&position, sp)?;
    let feasible = acceptance_contains_simple(
        &SimpleAcceptancePoint {
            c: value,
            x: position.clone(),
        },
        rho,
        sp,
    )? && acceptance_contains_certain(
        &CertainAcceptancePoint {
            y: position.clone(),
            f: f.clone(),
        },
        phi,
        sp,
    )?;
    let mut worst_undercut = f64::NEG_INFINITY;
    for t in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, SALT_PRIMAL, t as u64);
        let raise = sampling::nonneg_vec(&mut rng, sp.len(), SAMPLE_SCALE);
        let x: Vec<f64> = position
            .values()
            .iter()
            .zip(&raise)
            .map(|(a, b)| a + b)
            .collect();
        let c = rho.eval_slice(&x, sp)? + sampling::nonneg_vec(&mut rng, 1, SAMPLE_SCALE)[0];
        worst_undercut = worst_undercut.max(value - c);
    }
    Ok(PrimalReport {
        value,
        position,
        feasible,
        samples: cfg.trials,
        worst_undercut,
    })
}

/// A dual element `(Yhat, fhat)` whose penalty has not been computed yet.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DualCandidate {
    pub yhat: RandomVariable,
    pub fhat: RandomEconomy,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DualPair {
    pub yhat: RandomVariable,
    pub fhat: RandomEconomy,
    /// `+inf` outside the effective domain of the penalty.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext::ext_f64"))]
    pub alpha: f64,
}

/// Lower bound on `alpha` from sampling, flagged when it looks unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledAlpha {
    pub value: f64,
    pub unbounded: bool,
}

/// Shared sample of boundary members of both acceptance sets.
///
/// The penalty objective separates into `E[Yhat X] - c` over `A_rho` and
/// `<fhat, g> - E[Yhat Y]` over `A_phi`, so the maximum over all pairs of
/// samples is the sum of two independent maxima.
#[derive(Debug, Clone)]
pub struct PenaltySampler {
    n: usize,
    d: usize,
    // (X, rho_s(X)) for the simple part
    positions: Vec<(Vec<f64>, f64)>,
    // (g, phi(g)) for the certain part
    economies: Vec<(RandomEconomy, Vec<f64>)>,
}

impl PenaltySampler {
    /// Draws `budget` members of each set, at scales spread over
    /// `10^-1 .. 10^7`, and adds the canonical points of every anchor:
    /// `(rho_s(phi(f)), phi(f))` and `(phi(f), f)`.
    pub fn new(
        phi: &CertainFunction,
        rho: &SimpleRiskMeasure,
        sp: &FiniteSpace,
        d: usize,
        anchors: &[RandomEconomy],
        budget: usize,
        seed: u64,
    ) -> Result<Self> {
        if budget == 0 {
            return Err(Error::InvalidParameter {
                name: "budget",
                reason: "must be at least 1".into(),
            });
        }
        let n = sp.len();
        let mut positions = Vec::with_capacity(budget + anchors.len());
        let mut economies = Vec::with_capacity(budget + anchors.len());
        for f in anchors {
            sp.check_len(f.n())?;
            let x = phi.apply_pointwise(f)?.into_vec();
            let c = rho.eval_slice(&x, sp)?;
            positions.push((x.clone(), c));
            economies.push((f.clone(), x));
        }
        for k in 0..budget {
            let mut rng = trial_rng(seed, SALT_PENALTY, k as u64);
            let scale = libm::pow(10.0, -1.0 + 8.0 * sampling::unit(&mut rng));
            let x = sampling::normal_vec(&mut rng, n, scale);
            let c = rho.eval_slice(&x, sp)?;
            positions.push((x, c));
            let g = sampling::random_economy(&mut rng, n, d).scale(scale / SAMPLE_SCALE);
            let y = phi.apply_pointwise(&g)?.into_vec();
            economies.push((g, y));
        }
        Ok(Self {
            n,
            d,
            positions,
            economies,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Maximum of the penalty objective over the stored members.
    pub fn alpha(
        &self,
        yhat: &RandomVariable,
        fhat: &RandomEconomy,
        sp: &FiniteSpace,
    ) -> Result<SampledAlpha> {
        sp.check_len(yhat.len())?;
        if fhat.n() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: fhat.n(),
            });
        }
        if fhat.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: fhat.d(),
            });
        }
        let weighted: Vec<f64> = sp
            .probs()
            .iter()
            .zip(yhat.values())
            .map(|(p, y)| p * y)
            .collect();
        let pair = |x: &[f64]| weighted.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        let simple = self
            .positions
            .iter()
            .map(|(x, c)| pair(x) - c)
            .fold(f64::NEG_INFINITY, f64::max);
        let certain = self
            .economies
            .iter()
            .map(|(g, y)| dual_pairing(fhat, g, sp).map(|v| v - pair(y)))
            .try_fold(f64::NEG_INFINITY, |acc, v| v.map(|v| acc.max(v)))?;
        let value = simple + certain;
        Ok(SampledAlpha {
            value,
            unbounded: value > UNBOUNDED_THRESHOLD,
        })
    }
}

/// Sampled lower bound on `alpha(Yhat, fhat)`; see [`PenaltySampler`].
#[allow(clippy::too_many_arguments)]
pub fn penalty_alpha_sampled(
    yhat: &RandomVariable,
    fhat: &RandomEconomy,
    phi: &CertainFunction,
    rho: &SimpleRiskMeasure,
    anchors: &[RandomEconomy],
    budget: usize,
    seed: u64,
    sp: &FiniteSpace,
) -> Result<SampledAlpha> {
    PenaltySampler::new(phi, rho, sp, fhat.d(), anchors, budget, seed)?.alpha(yhat, fhat, sp)
}

/// Closed-form `alpha` for a linear `phi = <w, .>` and a catalog `rho_s`:
/// `rho_s*(Yhat)` when `fhat(w) = Yhat(w) w` on every atom, `+inf` otherwise.
pub fn penalty_alpha_exact(
    yhat: &RandomVariable,
    fhat: &RandomEconomy,
    phi: &CertainFunction,
    rho: &SimpleRiskMeasure,
    sp: &FiniteSpace,
) -> Result<f64> {
    let w = phi.linear_weights().ok_or_else(|| {
        Error::UnsupportedInstance("exact method requires linear certain function".into())
    })?;
    let conjugate = rho.analytic_conjugate().map_err(|_| {
        Error::UnsupportedInstance("exact method requires a catalog simple risk measure".into())
    })?;
    sp.check_len(yhat.len())?;
    sp.check_len(fhat.n())?;
    if fhat.d() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: fhat.d(),
        });
    }
    // a negative density lets Y grow without bound at that atom
    if yhat.values().iter().any(|&y| y < -DENSITY_TOL) {
        return Ok(f64::INFINITY);
    }
    for (row, &y) in fhat.rows().zip(yhat.values()) {
        for (fh, wj) in row.iter().zip(w) {
            if (fh - y * wj).abs() > DENSITY_TOL * (1.0 + (y * wj).abs()) {
                return Ok(f64::INFINITY);
            }
        }
    }
    conjugate.value(yhat, sp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DualityMethod {
    /// Closed-form penalties; the constructed maximizer joins the candidates.
    Exact,
    /// Anchored sampled penalties with `budget` members per set.
    Sampled { budget: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DualityReport {
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext::ext_f64"))]
    pub primal: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext::ext_f64"))]
    pub dual: f64,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext::ext_f64"))]
    pub gap: f64,
    pub maximizer: DualPair,
    pub method: DualityMethod,
    pub candidates: usize,
    /// Candidates whose sampled penalty crossed the unboundedness threshold.
    pub unbounded: usize,
    /// `Some(gap <= STRONG_DUALITY_TOL)` for the exact method.
    pub tight: Option<bool>,
}

/// The pair attaining the dual supremum for a linear `phi = <w, .>`:
/// `Yhat* = subgradient of rho_s at phi(f)`, `fhat* = Yhat* w`.
pub fn constructed_maximizer(
    f: &RandomEconomy,
    phi: &CertainFunction,
    rho: &SimpleRiskMeasure,
    sp: &FiniteSpace,
) -> Result<DualCandidate> {
    let position = phi.apply_pointwise(f)?;
    let yhat = rho.subgradient(&position, sp)?;
    let mut fhat = RandomEconomy::zeros(f.n(), f.d());
    for (i, row) in f.rows().enumerate() {
        let grad = phi.subgradient(row)?;
        for (out, g) in fhat.row_mut(i).iter_mut().zip(grad) {
            *out = yhat.values()[i] * g;
        }
    }
    Ok(DualCandidate { yhat, fhat })
}

/// `sup <fhat, f> - alpha(Yhat, fhat)` over the candidates, compared with the
/// primal value. Fails with `WeakDualityViolation` if the dual exceeds the
/// primal by more than `WEAK_DUALITY_TOL`.
pub fn dual_value(
    f: &RandomEconomy,
    candidates: &[DualCandidate],
    phi: &CertainFunction,
    rho: &SimpleRiskMeasure,
    sp: &FiniteSpace,
    method: DualityMethod,
) -> Result<DualityReport> {
    sp.check_len(f.n())?;
    let position = phi.apply_pointwise(f)?;
    let primal = rho.eval(&position, sp)?;
    let mut pool: Vec<DualCandidate> = candidates.to_vec();
    let mut unbounded = 0;
    let alphas: Vec<f64> = match method {
        DualityMethod::Exact => {
            if phi.linear_weights().is_none() {
                return Err(Error::UnsupportedInstance(
                    "exact method requires linear certain function".into(),
                ));
            }
            pool.push(constructed_maximizer(f, phi, rho, sp)?);
            pool.iter()
                .map(|c| penalty_alpha_exact(&c.yhat, &c.fhat, phi, rho, sp))
                .collect::<Result<_>>()?
        }
        DualityMethod::Sampled { budget, seed } => {
            if pool.is_empty() {
                return Err(Error::EmptyCandidates);
            }
            let sampler =
                PenaltySampler::new(phi, rho, sp, f.d(), core::slice::from_ref(f), budget, seed)?;
            let mut out = Vec::with_capacity(pool.len());
            for c in &pool {
                let a = sampler.alpha(&c.yhat, &c.fhat, sp)?;
                unbounded += a.unbounded as usize;
                out.push(a.value);
            }
            out
        }
    };
    let mut best: Option<(usize, f64)> = None;
    for (i, (c, alpha)) in pool.iter().zip(&alphas).enumerate() {
        let value = dual_pairing(&c.fhat, f, sp)? - alpha;
        if best.is_none_or(|(_, b)| value > b) {
            best = Some((i, value));
        }
    }
    let (idx, dual) = best.ok_or(Error::EmptyCandidates)?;
    if dual > primal + WEAK_DUALITY_TOL {
        return Err(Error::WeakDualityViolation { primal, dual });
    }
    let gap = primal - dual;
    let chosen = &pool[idx];
    Ok(DualityReport {
        primal,
        dual,
        gap,
        maximizer: DualPair {
            yhat: chosen.yhat.clone(),
            fhat: chosen.fhat.clone(),
            alpha: alphas[idx],
        },
        method,
        candidates: pool.len(),
        unbounded,
        tight: matches!(method, DualityMethod::Exact).then_some(gap <= STRONG_DUALITY_TOL),
    })
}

/// `count` candidate pairs for `f`: the subgradient pair (when `rho_s` has
/// one), then random densities `Yhat >= 0, E[Yhat] = 1` with
/// `fhat(w) = Yhat(w) * subgradient of phi at f(w)`.
pub fn candidate_cloud(
    phi: &CertainFunction,
    rho: &SimpleRiskMeasure,
    f: &RandomEconomy,
    sp: &FiniteSpace,
    count: usize,
    seed: u64,
) -> Result<Vec<DualCandidate>> {
    sp.check_len(f.n())?;
    let grads: Vec<Vec<f64>> = f
        .rows()
        .map(|r| phi.subgradient(r))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(count);
    if count > 0 {
        if let Ok(c) = constructed_maximizer(f, phi, rho, sp) {
            out.push(c);
        }
    }
    let mut k = 0u64;
    while out.len() < count {
        let mut rng = trial_rng(seed, SALT_CLOUD, k);
        k += 1;
        let spread = 3.0 * sampling::unit(&mut rng);
        let raw: Vec<f64> = (0..sp.len())
            .map(|_| libm::exp(spread * sampling::normal(&mut rng)))
            .collect();
        let mass = sp.expect(&raw);
        let yhat = RandomVariable::from_vec(raw.into_iter().map(|v| v / mass).collect());
        let mut fhat = RandomEconomy::zeros(f.n(), f.d());
        for (i, g) in grads.iter().enumerate() {
            for (out, gj) in fhat.row_mut(i).iter_mut().zip(g) {
                *out = yhat.values()[i] * gj;
            }
        }
        out.push(DualCandidate { yhat, fhat });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::CheckStatus;
    use crate::systemic::SystemicRiskMeasure;
    use approx::assert_abs_diff_eq;

    fn rv(v: &[f64]) -> RandomVariable {
        RandomVariable::from_vec(v.to_vec())
    }

    fn sum(d: usize) -> CertainFunction {
        CertainFunction::weighted_sum(vec![1.0; d]).unwrap()
    }

    fn scaled(y: &[f64], w: &[f64]) -> RandomEconomy {
        RandomEconomy::new(
            y.iter()
                .map(|y| w.iter().map(|w| y * w).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn membership_examples() {
        let sp = FiniteSpace::uniform(2).unwrap();
        let e = SimpleRiskMeasure::expectation();
        let pt = |c| SimpleAcceptancePoint {
            c,
            x: rv(&[1.0, 3.0]),
        };
        assert!(acceptance_contains_simple(&pt(2.0), &e, &sp).unwrap());
        assert!(!acceptance_contains_simple(&pt(1.9), &e, &sp).unwrap());
        for rho in SimpleRiskMeasure::catalog() {
            let pt = SimpleAcceptancePoint {
                c: -4.5,
                x: RandomVariable::constant(2, -4.5),
            };
            assert!(acceptance_contains_simple(&pt, &rho, &sp).unwrap());
        }
        let bad = SimpleAcceptancePoint {
            c: 0.0,
            x: rv(&[1.0]),
        };
        assert!(matches!(
            acceptance_contains_simple(&bad, &e, &sp),
            Err(Error::LengthMismatch { .. })
        ));

        let f = RandomEconomy::new(vec![vec![1.0, 2.0], vec![0.0, 0.0]]).unwrap();
        let at = |y: &[f64]| CertainAcceptancePoint {
            y: rv(y),
            f: f.clone(),
        };
        assert!(acceptance_contains_certain(&at(&[3.0, 0.0]), &sum(2), &sp).unwrap());
        assert!(!acceptance_contains_certain(&at(&[3.0, -1.0]), &sum(2), &sp).unwrap());
        assert!(acceptance_contains_certain(&at(&[3.5, 0.25]), &sum(2), &sp).unwrap());
    }

    #[test]
    fn catalog_acceptance_sets_are_convex_and_monotone() {
        let sp = FiniteSpace::new(vec![0.2, 0.3, 0.5]).unwrap();
        let order = ConeOrder::orthant(2).unwrap();
        let cfg = CheckConfig {
            trials: 200,
            seed: 5,
            tol: 1e-9,
        };
        for phi in CertainFunction::catalog(2) {
            for rho in SimpleRiskMeasure::catalog() {
                let report = check_acceptance_properties(&phi, &rho, &sp, &order, &cfg).unwrap();
                assert!(report.passed(), "{report:#?}");
                assert_eq!(report.checks.len(), 6);
            }
        }
    }

    #[test]
    fn non_convex_simple_measure_breaks_convexity() {
        let sp = FiniteSpace::uniform(3).unwrap();
        let order = ConeOrder::orthant(2).unwrap();
        let cube = SimpleRiskMeasure::custom("E[X]^3", |x: &[f64], sp: &FiniteSpace| {
            Ok(sp.expect(x).powi(3))
        });
        let report =
            check_acceptance_properties(&sum(2), &cube, &sp, &order, &CheckConfig::default())
                .unwrap();
        let c = report.check("simple-convex").unwrap();
        assert_eq!(c.status, CheckStatus::Fail);
        assert!(c
            .counterexample
            .as_ref()
            .unwrap()
            .witnesses
            .iter()
            .any(|w| w.name == "lambda"));
        assert!(report.check("simple-b-monotone").unwrap().passed());
    }

    #[test]
    fn primal_matches_composition() {
        let sp = FiniteSpace::uniform(2).unwrap();
        let f = RandomEconomy::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let report = primal_value(
            &f,
            &sum(2),
            &SimpleRiskMeasure::expectation(),
            &sp,
            &CheckConfig::default(),
        )
        .unwrap();
        assert_eq!(report.value, 5.0);
        assert!(report.feasible);
        assert!(report.worst_undercut <= 1e-9);

        let sp = FiniteSpace::new(vec![0.1, 0.4, 0.5]).unwrap();
        let mut rng = trial_rng(1, 1, 1);
        for phi in CertainFunction::catalog(3) {
            for rho in SimpleRiskMeasure::catalog() {
                let f = sampling::random_economy(&mut rng, 3, 3);
                let p = primal_value(
                    &f,
                    &phi,
                    &rho,
                    &sp,
                    &CheckConfig {
                        trials: 100,
                        seed: 2,
                        tol: 1e-9,
                    },
                )
                .unwrap();
                let direct = SystemicRiskMeasure::compose(rho.clone(), phi.clone())
                    .eval(&f, &sp)
                    .unwrap();
                assert_eq!(p.value, direct);
                assert!(p.feasible && p.worst_undercut <= 1e-9);
            }
        }
    }

    #[test]
    fn exact_penalty_examples() {
        let w = [1.0, 2.0];
        let phi = CertainFunction::weighted_sum(w.to_vec()).unwrap();
        let sp = FiniteSpace::uniform(4).unwrap();
        let ones = RandomVariable::constant(4, 1.0);
        let e = SimpleRiskMeasure::expectation();
        assert_eq!(
            penalty_alpha_exact(&ones, &scaled(ones.values(), &w), &phi, &e, &sp).unwrap(),
            0.0
        );
        let twice = scaled(ones.values(), &[2.0, 4.0]);
        assert_eq!(
            penalty_alpha_exact(&ones, &twice, &phi, &e, &sp).unwrap(),
            f64::INFINITY
        );

        let es = SimpleRiskMeasure::expected_shortfall(0.5).unwrap();
        let y = rv(&[0.0, 0.0, 2.0, 2.0]);
        assert_eq!(
            penalty_alpha_exact(&y, &scaled(y.values(), &w), &phi, &es, &sp).unwrap(),
            0.0
        );
        let y = rv(&[-1.0, 1.0, 2.0, 2.0]);
        assert_eq!(
            penalty_alpha_exact(&y, &scaled(y.values(), &w), &phi, &es, &sp).unwrap(),
            f64::INFINITY
        );

        let max = CertainFunction::max_component();
        assert!(matches!(
            penalty_alpha_exact(&ones, &scaled(ones.values(), &w), &max, &e, &sp),
            Err(Error::UnsupportedInstance(_))
        ));
    }

    #[test]
    fn sampled_penalty_is_a_lower_bound_reaching_zero() {
        let w = [1.0, 2.0];
        let phi = CertainFunction::weighted_sum(w.to_vec()).unwrap();
        let sp = FiniteSpace::uniform(3).unwrap();
        let e = SimpleRiskMeasure::expectation();
        let ones = RandomVariable::constant(3, 1.0);
        let mut rng = trial_rng(2, 2, 2);
        let anchors: Vec<RandomEconomy> = (0..3)
            .map(|_| sampling::random_economy(&mut rng, 3, 2))
            .collect();
        let a = penalty_alpha_sampled(
            &ones,
            &scaled(ones.values(), &w),
            &phi,
            &e,
            &anchors,
            2000,
            0,
            &sp,
        )
        .unwrap();
        assert_abs_diff_eq!(a.value, 0.0, epsilon = 1e-6);
        assert!(!a.unbounded);

        let zero = RandomVariable::constant(3, 0.0);
        let small = penalty_alpha_sampled(
            &zero,
            &RandomEconomy::zeros(3, 2),
            &phi,
            &e,
            &anchors,
            10,
            0,
            &sp,
        )
        .unwrap();
        let large = penalty_alpha_sampled(
            &zero,
            &RandomEconomy::zeros(3, 2),
            &phi,
            &e,
            &anchors,
            5000,
            0,
            &sp,
        )
        .unwrap();
        assert!(large.value >= small.value);
        assert!(large.unbounded);
    }

    #[test]
    fn anchors_bound_every_pair() {
        let sp = FiniteSpace::new(vec![0.2, 0.2, 0.6]).unwrap();
        let mut rng = trial_rng(3, 3, 3);
        for phi in CertainFunction::catalog(2) {
            for rho in SimpleRiskMeasure::catalog() {
                let f = sampling::random_economy(&mut rng, 3, 2);
                let yhat = sampling::random_variable(&mut rng, 3);
                let fhat = sampling::random_economy(&mut rng, 3, 2);
                let sampler =
                    PenaltySampler::new(&phi, &rho, &sp, 2, std::slice::from_ref(&f), 1, 9)
                        .unwrap();
                let a = sampler.alpha(&yhat, &fhat, &sp).unwrap();
                let rho_f = SystemicRiskMeasure::compose(rho.clone(), phi.clone())
                    .eval(&f, &sp)
                    .unwrap();
                assert!(dual_pairing(&fhat, &f, &sp).unwrap() - a.value <= rho_f + 1e-9);
            }
        }
    }

    #[test]
    fn exact_penalty_is_midpoint_convex() {
        let w = [0.5, 1.5];
        let phi = CertainFunction::weighted_sum(w.to_vec()).unwrap();
        let sp = FiniteSpace::new(vec![0.25, 0.25, 0.5]).unwrap();
        let mut rng = trial_rng(6, 6, 6);
        let density = |rng: &mut sampling::TrialRng| {
            let raw: Vec<f64> = (0..3).map(|_| sampling::unit(rng) + 0.1).collect();
            let m = sp.expect(&raw);
            raw.into_iter().map(|v| v / m).collect::<Vec<_>>()
        };
        for rho in [
            SimpleRiskMeasure::entropic(1.0).unwrap(),
            SimpleRiskMeasure::expected_shortfall(0.2).unwrap(),
        ] {
            for _ in 0..200 {
                let (a, b) = (density(&mut rng), density(&mut rng));
                let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
                let alpha = |y: &[f64]| {
                    penalty_alpha_exact(&rv(y), &scaled(y, &w), &phi, &rho, &sp).unwrap()
                };
                let (fa, fb, fm) = (alpha(&a), alpha(&b), alpha(&mid));
                if fa.is_finite() && fb.is_finite() {
                    assert!(fm <= 0.5 * (fa + fb) + 1e-8);
                }
            }
        }
    }

    #[test]
    fn exact_duality_is_tight() {
        let sp = FiniteSpace::uniform(4).unwrap();
        let w = [1.0, 1.0];
        let phi = CertainFunction::weighted_sum(w.to_vec()).unwrap();
        // phi(f) = (1, 2, 3, 4)
        let f = RandomEconomy::new(vec![
            vec![1.0, 0.0],
            vec![0.0, 2.0],
            vec![3.0, 0.0],
            vec![0.0, 4.0],
        ])
        .unwrap();
        let es = SimpleRiskMeasure::expected_shortfall(0.5).unwrap();
        let report = dual_value(&f, &[], &phi, &es, &sp, DualityMethod::Exact).unwrap();
        assert!(report.gap.abs() <= 1e-12, "{report:?}");
        assert_eq!(report.maximizer.yhat.values(), &[0.0, 0.0, 2.0, 2.0]);
        assert_eq!(report.tight, Some(true));
        assert_abs_diff_eq!(report.primal, 3.5, epsilon = 1e-12);

        let e = SimpleRiskMeasure::expectation();
        let report = dual_value(&f, &[], &phi, &e, &sp, DualityMethod::Exact).unwrap();
        assert_eq!(report.gap, 0.0);
        assert_eq!(report.maximizer.alpha, 0.0);
    }

    #[test]
    fn exact_method_rejects_nonlinear_phi() {
        let sp = FiniteSpace::uniform(2).unwrap();
        let f = RandomEconomy::zeros(2, 2);
        let err = dual_value(
            &f,
            &[],
            &CertainFunction::max_component(),
            &SimpleRiskMeasure::expectation(),
            &sp,
            DualityMethod::Exact,
        )
        .unwrap_err();
        assert_eq!(
            format!("{err}"),
            "unsupported instance: exact method requires linear certain function"
        );
    }

    #[test]
    fn sampled_duality_respects_weak_duality() {
        let sp = FiniteSpace::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let mut rng = trial_rng(7, 7, 7);
        for phi in CertainFunction::catalog(3) {
            for rho in SimpleRiskMeasure::catalog() {
                let f = sampling::random_economy(&mut rng, 4, 3);
                let cloud = candidate_cloud(&phi, &rho, &f, &sp, 20, 1).unwrap();
                assert_eq!(cloud.len(), 20);
                for c in &cloud {
                    assert_abs_diff_eq!(sp.expect(c.yhat.values()), 1.0, epsilon = 1e-12);
                }
                let method = DualityMethod::Sampled {
                    budget: 500,
                    seed: 3,
                };
                let report = dual_value(&f, &cloud, &phi, &rho, &sp, method).unwrap();
                assert!(report.gap >= -WEAK_DUALITY_TOL);
                assert_eq!(report.tight, None);
            }
        }
    }
}
