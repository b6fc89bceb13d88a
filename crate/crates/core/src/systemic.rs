//! Systemic risk measures on random economies: the composition
//! `rho = rho_s . phi`, the sampled C1-C5 suite, and the reverse
//! construction that recovers `phi` and `rho_s` from a black-box `rho`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use core::fmt;

use crate::certain::{surjectivity_probe, CertainFunction};
use crate::error::{Error, Result};
use crate::report::{AxiomReport, CheckConfig, Recorder, Witness};
use crate::root::invert_increasing;
use crate::sampling::{self, trial_rng, SAMPLE_SCALE};
use crate::simple_risk::SimpleRiskMeasure;
use crate::space::{ConeOrder, FiniteSpace, RandomEconomy, RandomVariable};

/// Residual above which a decomposition is flagged as not reproducing `rho`.
pub const DECOMPOSITION_TOL: f64 = 1e-8;

const SALT_C1: u64 = 21;
const SALT_C2: u64 = 22;
const SALT_C3: u64 = 23;
const SALT_C4: u64 = 24;
const SALT_DECOMPOSE: u64 = 25;

pub type EconomyEvaluator = Arc<dyn Fn(&RandomEconomy, &FiniteSpace) -> f64 + Send + Sync>;
pub type PointEvaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A user-supplied measure together with its restriction to deterministic
/// states.
#[derive(Clone)]
pub struct Blackbox {
    pub name: String,
    pub eval: EconomyEvaluator,
    pub point: PointEvaluator,
    /// Evaluators that are not safe to call concurrently set this; drivers
    /// that parallelize must then run the measure on one thread.
    pub serial: bool,
}

#[derive(Clone)]
pub enum SystemicRiskMeasure {
    Composed {
        phi: CertainFunction,
        rho: SimpleRiskMeasure,
    },
    Blackbox(Blackbox),
}

impl fmt::Debug for SystemicRiskMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Output of [`SystemicRiskMeasure::decompose`].
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub certain: CertainFunction,
    pub simple: SimpleRiskMeasure,
    /// `max |rho(f) - rho_s'(phi'(f))|` over the sampled economies.
    pub residual: f64,
    pub samples: usize,
    /// Set when `residual > DECOMPOSITION_TOL`.
    pub flagged: bool,
}

fn abs_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}

impl SystemicRiskMeasure {
    pub fn compose(rho: SimpleRiskMeasure, phi: CertainFunction) -> Self {
        Self::Composed { phi, rho }
    }

    pub fn blackbox<F, P>(name: impl Into<String>, eval: F, point: P) -> Self
    where
        F: Fn(&RandomEconomy, &FiniteSpace) -> f64 + Send + Sync + 'static,
        P: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::Blackbox(Blackbox {
            name: name.into(),
            eval: Arc::new(eval),
            point: Arc::new(point),
            serial: false,
        })
    }

    /// Mark a black-box measure as unsafe for concurrent evaluation.
    pub fn serial(mut self) -> Self {
        if let Self::Blackbox(b) = &mut self {
            b.serial = true;
        }
        self
    }

    pub fn is_serial(&self) -> bool {
        matches!(self, Self::Blackbox(Blackbox { serial: true, .. }))
    }

    pub fn name(&self) -> String {
        match self {
            Self::Composed { phi, rho } => format!("{} o {}", rho.name(), phi.name()),
            Self::Blackbox(b) => format!("blackbox({})", b.name),
        }
    }

    fn is_custom(&self) -> bool {
        match self {
            Self::Composed { phi, rho } => phi.is_custom() || rho.is_custom(),
            Self::Blackbox(_) => true,
        }
    }

    /// `rho(f)`.
    pub fn eval(&self, f: &RandomEconomy, sp: &FiniteSpace) -> Result<f64> {
        match self {
            Self::Composed { phi, rho } => {
                sp.check_len(f.n())?;
                rho.eval(&phi.apply_pointwise(f)?, sp)
            }
            Self::Blackbox(b) => {
                sp.check_len(f.n())?;
                Ok((b.eval)(f, sp))
            }
        }
    }

    /// Restriction `rho_E(x)`: the value on the economy equal to `x` in every
    /// scenario.
    pub fn eval_point(&self, x: &[f64], sp: &FiniteSpace) -> Result<f64> {
        match self {
            Self::Composed { phi, rho } => {
                let v = phi.eval(x)?;
                rho.eval_slice(&vec![v; sp.len()], sp)
            }
            Self::Blackbox(b) => Ok((b.point)(x)),
        }
    }

    fn point_or_nan(&self, x: &[f64], sp: &FiniteSpace) -> f64 {
        self.eval_point(x, sp).unwrap_or(f64::NAN)
    }

    fn eval_or_nan(&self, f: &RandomEconomy, sp: &FiniteSpace) -> f64 {
        self.eval(f, sp).unwrap_or(f64::NAN)
    }

    fn invert_along_ray(&self, target: f64, sp: &FiniteSpace, order: &ConeOrder) -> Result<f64> {
        invert_increasing(|a| self.point_or_nan(&order.ray(a), sp), target)
    }

    /// Sampled check of C1 (monotonicity), C2 (preference consistency),
    /// C3 (convexity), C4 (risk convexity) and C5 (surjectivity on `E`).
    ///
    /// The conditional axioms C2 and C4 get premise-satisfying instances by
    /// construction: one side is placed on the `z`-ray at the scalar that
    /// reproduces the required pointwise risk, or shifted down along `z` with
    /// the premise re-checked atom by atom.
    pub fn check_axioms(
        &self,
        sp: &FiniteSpace,
        order: &ConeOrder,
        cfg: &CheckConfig,
    ) -> Result<AxiomReport> {
        cfg.validate()?;
        let (n, d) = (sp.len(), order.dim());
        let rho = |f: &RandomEconomy| self.eval_or_nan(f, sp);
        let rho_e = |x: &[f64]| self.point_or_nan(x, sp);
        let economy_witness = |name: &str, f: &RandomEconomy| Witness::matrix(name, f.to_rows());

        let mut c1 = Recorder::new(
            "C1",
            "monotonicity: g <=_K f implies rho(g) <= rho(f)",
            cfg.tol,
        );
        for t in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, SALT_C1, t as u64);
            let g = sampling::random_economy(&mut rng, n, d);
            let f = g.add(&sampling::cone_economy(&mut rng, n, order));
            let (rg, rf) = (rho(&g), rho(&f));
            c1.record(
                t,
                rg,
                rf,
                || format!("rho(g) = {rg} exceeds rho(f) = {rf} although g <=_K f"),
                || vec![economy_witness("f", &f), economy_witness("g", &g)],
            );
        }

        let mut c2 = Recorder::new(
            "C2",
            "preference consistency: rho(f(w)) <= rho(g(w)) for all w implies rho(f) <= rho(g)",
            cfg.tol,
        );
        for t in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, SALT_C2, t as u64);
            let base = sampling::random_economy(&mut rng, n, d);
            let gaps = sampling::nonneg_vec(&mut rng, n, SAMPLE_SCALE);
            let mode = t % 3;
            // build the companion row by row; `lower` is the side with smaller pointwise risk
            let mut companion = base.clone();
            for (i, &gap) in gaps.iter().enumerate() {
                let row = base.row(i);
                let r = rho_e(row);
                let candidate = match mode {
                    0 => self
                        .invert_along_ray(r - gap, sp, order)
                        .ok()
                        .map(|a| order.ray(a)),
                    1 => self
                        .invert_along_ray(r + gap, sp, order)
                        .ok()
                        .map(|a| order.ray(a)),
                    _ => Some(
                        row.iter()
                            .zip(order.z())
                            .map(|(x, z)| x - gap / 4.0 * z)
                            .collect(),
                    ),
                };
                if let Some(c) = candidate {
                    let rc = rho_e(&c);
                    let premise = if mode == 1 { r <= rc } else { rc <= r };
                    if premise {
                        companion.row_mut(i).copy_from_slice(&c);
                    }
                }
            }
            let (lower, upper) = if mode == 1 {
                (base, companion)
            } else {
                (companion, base)
            };
            let (rl, ru) = (rho(&lower), rho(&upper));
            c2.record(
                t,
                rl,
                ru,
                || format!("rho(f) = {rl} exceeds rho(g) = {ru} although rho(f(w)) <= rho(g(w)) everywhere"),
                || vec![economy_witness("f", &lower), economy_witness("g", &upper)],
            );
        }

        let mut c3 = Recorder::new("C3", "convexity along sampled segments", cfg.tol);
        for t in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, SALT_C3, t as u64);
            let f = sampling::random_economy(&mut rng, n, d);
            let g = sampling::random_economy(&mut rng, n, d);
            let lambda = sampling::unit(&mut rng);
            let lhs = rho(&f.mix(lambda, &g));
            let rhs = lambda * rho(&f) + (1.0 - lambda) * rho(&g);
            c3.record(
                t,
                lhs,
                rhs,
                || format!("rho(mix) = {lhs} exceeds chord value {rhs}"),
                || {
                    vec![
                        economy_witness("f", &f),
                        economy_witness("g", &g),
                        Witness::scalar("lambda", lambda),
                    ]
                },
            );
        }

        let mut c4 = Recorder::new(
            "C4",
            "risk convexity: pointwise convex combination of risks bounds rho(h)",
            cfg.tol,
        );
        for t in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, SALT_C4, t as u64);
            let f = sampling::random_economy(&mut rng, n, d);
            let g = sampling::random_economy(&mut rng, n, d);
            let lambda = sampling::unit(&mut rng);
            let mut h = RandomEconomy::zeros(n, d);
            let mut built = true;
            for i in 0..n {
                let target = lambda * rho_e(f.row(i)) + (1.0 - lambda) * rho_e(g.row(i));
                match self.invert_along_ray(target, sp, order) {
                    Ok(a) => h.row_mut(i).copy_from_slice(&order.ray(a)),
                    Err(e) => {
                        c4.inconclusive(t, format!("cannot place h on the z-ray at atom {i}: {e}"));
                        built = false;
                        break;
                    }
                }
            }
            if !built {
                continue;
            }
            let lhs = rho(&h);
            let rhs = lambda * rho(&f) + (1.0 - lambda) * rho(&g);
            c4.record(
                t,
                lhs,
                rhs,
                || format!("rho(h) = {lhs} exceeds {rhs}"),
                || {
                    vec![
                        economy_witness("f", &f),
                        economy_witness("g", &g),
                        economy_witness("h", &h),
                        Witness::scalar("lambda", lambda),
                    ]
                },
            );
        }

        let c5 = surjectivity_probe("C5", "surjectivity: rho(E) = R, probed along z", |a| {
            rho_e(&order.ray(a))
        });

        Ok(AxiomReport {
            subject: self.name(),
            suite: "systemic".into(),
            unverified_custom: self.is_custom(),
            checks: vec![c1.finish(), c2.finish(), c3.finish(), c4.finish(), c5],
        })
    }

    /// `phi'(x) = rho(x)` on deterministic states.
    pub fn extract_certain(&self, sp: &FiniteSpace) -> CertainFunction {
        let me = self.clone();
        let sp = sp.clone();
        CertainFunction::custom(format!("extracted[{}]", self.name()), move |x: &[f64]| {
            me.point_or_nan(x, &sp)
        })
    }

    /// `rho_s'(X) = rho(f_X)` with the canonical preimage
    /// `f_X(w) = T^{-1}(X(w)) z` of `X` under `phi`.
    pub fn extract_simple(
        &self,
        phi: &CertainFunction,
        order: &ConeOrder,
    ) -> Result<SimpleRiskMeasure> {
        for probe in [-1.0, 0.0, 1.0] {
            phi.invert_transfer(probe, order)?;
        }
        let me = self.clone();
        let phi = phi.clone();
        let order = order.clone();
        Ok(SimpleRiskMeasure::custom(
            format!("extracted[{}]", self.name()),
            move |x: &[f64], sp: &FiniteSpace| {
                let preimage = canonical_preimage(&phi, x, &order)?;
                me.eval(&preimage, sp)
            },
        ))
    }

    /// Recover `(phi', rho_s')` and measure how well `rho_s' . phi'` reproduces
    /// `rho` on `samples` seeded random economies.
    pub fn decompose(
        &self,
        sp: &FiniteSpace,
        order: &ConeOrder,
        samples: usize,
        seed: u64,
    ) -> Result<Decomposition> {
        if samples == 0 {
            return Err(Error::InvalidTrials);
        }
        let certain = self.extract_certain(sp);
        let simple = self.extract_simple(&certain, order)?;
        let mut residual: f64 = 0.0;
        for s in 0..samples {
            let mut rng = trial_rng(seed, SALT_DECOMPOSE, s as u64);
            let f = sampling::random_economy(&mut rng, sp.len(), order.dim());
            let direct = self.eval(&f, sp)?;
            let lifted = certain.apply_pointwise(&f)?;
            let recomposed = simple.eval(&lifted, sp)?;
            let gap = abs_gap(direct, recomposed);
            residual = if gap.is_nan() {
                f64::INFINITY
            } else {
                residual.max(gap)
            };
        }
        Ok(Decomposition {
            certain,
            simple,
            residual,
            samples,
            flagged: residual > DECOMPOSITION_TOL,
        })
    }
}

/// The economy `w -> T^{-1}(X(w)) z`, which `phi` maps back to `X`.
pub fn canonical_preimage(
    phi: &CertainFunction,
    x: &[f64],
    order: &ConeOrder,
) -> Result<RandomEconomy> {
    let mut f = RandomEconomy::zeros(x.len(), order.dim());
    for (i, &v) in x.iter().enumerate() {
        let a = phi.invert_transfer(v, order)?;
        f.row_mut(i).copy_from_slice(&order.ray(a));
    }
    Ok(f)
}

/// Convenience: `phi(f)` as a random variable for a composed measure.
pub fn certain_part(
    rho: &SystemicRiskMeasure,
    f: &RandomEconomy,
) -> Option<Result<RandomVariable>> {
    match rho {
        SystemicRiskMeasure::Composed { phi, .. } => Some(phi.apply_pointwise(f)),
        SystemicRiskMeasure::Blackbox(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::CheckStatus;
    use crate::simple_risk::SimpleRiskMeasure as Srm;
    use approx::assert_abs_diff_eq;

    fn demo() -> (FiniteSpace, RandomEconomy) {
        (
            FiniteSpace::uniform(2).unwrap(),
            RandomEconomy::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap(),
        )
    }

    fn sum(d: usize) -> CertainFunction {
        CertainFunction::weighted_sum(vec![1.0; d]).unwrap()
    }

    #[test]
    fn compose_examples() {
        let (sp, f) = demo();
        let rho = SystemicRiskMeasure::compose(Srm::expectation(), sum(2));
        assert_abs_diff_eq!(rho.eval(&f, &sp).unwrap(), 5.0, epsilon = 1e-14);
        let det = RandomEconomy::constant(2, &[0.5, -3.0]);
        assert_eq!(rho.eval(&det, &sp).unwrap(), -2.5);

        let sp4 = FiniteSpace::uniform(4).unwrap();
        let g = RandomEconomy::new(vec![
            vec![1.0, 0.0],
            vec![0.0, 2.0],
            vec![3.0, 0.0],
            vec![0.0, 4.0],
        ])
        .unwrap();
        let es_max = SystemicRiskMeasure::compose(
            Srm::expected_shortfall(0.5).unwrap(),
            CertainFunction::max_component(),
        );
        assert_abs_diff_eq!(es_max.eval(&g, &sp4).unwrap(), 3.5, epsilon = 1e-12);
    }

    #[test]
    fn blackbox_wrapper_and_restriction_agree() {
        let (sp, f) = demo();
        let inner = SystemicRiskMeasure::compose(Srm::entropic(0.5).unwrap(), sum(2));
        let (a, b) = (inner.clone(), inner.clone());
        let sp2 = sp.clone();
        let wrapped = SystemicRiskMeasure::blackbox(
            "wrap",
            move |f, sp| a.eval(f, sp).unwrap(),
            move |x| b.eval_point(x, &sp2).unwrap(),
        );
        assert_eq!(wrapped.eval(&f, &sp).unwrap(), inner.eval(&f, &sp).unwrap());
        for x in [[1.0, 2.0], [-3.0, 0.5]] {
            let embedded = RandomEconomy::constant(2, &x);
            assert_eq!(
                inner.eval(&embedded, &sp).unwrap(),
                inner.eval_point(&x, &sp).unwrap()
            );
            assert_eq!(
                wrapped.eval_point(&x, &sp).unwrap(),
                inner.eval_point(&x, &sp).unwrap()
            );
        }
        assert!(matches!(
            inner.eval(&RandomEconomy::zeros(3, 2), &sp),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            inner.eval(&RandomEconomy::zeros(2, 3), &sp),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn composed_pairs_pass_systemic_axioms() {
        let sp = FiniteSpace::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let order = ConeOrder::orthant(3).unwrap();
        let cfg = CheckConfig {
            trials: 150,
            seed: 1,
            tol: 1e-9,
        };
        for phi in CertainFunction::catalog(3) {
            for rho in Srm::catalog() {
                let m = SystemicRiskMeasure::compose(rho, phi.clone());
                let report = m.check_axioms(&sp, &order, &cfg).unwrap();
                assert!(report.passed(), "{report:#?}");
            }
        }
    }

    fn squared_expectation(phi: CertainFunction) -> SystemicRiskMeasure {
        let (p1, p2) = (phi.clone(), phi);
        SystemicRiskMeasure::blackbox(
            "E[phi]^2",
            move |f, sp| sp.expect(p1.apply_pointwise(f).unwrap().values()).powi(2),
            move |x| p2.eval(x).unwrap().powi(2),
        )
    }

    #[test]
    fn squared_expectation_of_max_is_not_convex() {
        let sp = FiniteSpace::uniform(3).unwrap();
        let order = ConeOrder::orthant(2).unwrap();
        let m = squared_expectation(CertainFunction::max_component());
        let report = m
            .check_axioms(&sp, &order, &CheckConfig::default())
            .unwrap();
        let c3 = report.check("C3").unwrap();
        assert_eq!(c3.status, CheckStatus::Fail);
        assert!(c3.counterexample.is_some());
        assert!(!report.check("C1").unwrap().passed());
        assert!(!report.check("C5").unwrap().passed());
        assert!(report.unverified_custom);
    }

    #[test]
    fn squared_expectation_of_linear_is_convex_but_not_monotone() {
        let sp = FiniteSpace::uniform(3).unwrap();
        let order = ConeOrder::orthant(2).unwrap();
        let report = squared_expectation(sum(2))
            .check_axioms(&sp, &order, &CheckConfig::default())
            .unwrap();
        assert!(report.check("C3").unwrap().passed());
        assert_eq!(report.check("C1").unwrap().status, CheckStatus::Fail);
        assert!(!report.passed());
    }

    #[test]
    fn constant_measure_is_not_surjective() {
        let sp = FiniteSpace::uniform(2).unwrap();
        let order = ConeOrder::orthant(2).unwrap();
        let zero = SystemicRiskMeasure::blackbox("zero", |_, _| 0.0, |_| 0.0);
        let report = zero
            .check_axioms(
                &sp,
                &order,
                &CheckConfig {
                    trials: 20,
                    seed: 0,
                    tol: 1e-9,
                },
            )
            .unwrap();
        assert_eq!(report.check("C5").unwrap().status, CheckStatus::Fail);
    }

    #[test]
    fn extraction_round_trips() {
        let sp = FiniteSpace::new(vec![0.25, 0.25, 0.5]).unwrap();
        let order = ConeOrder::orthant(2).unwrap();
        let m = SystemicRiskMeasure::compose(Srm::expectation(), sum(2));
        let phi = m.extract_certain(&sp);
        let rho = m.extract_simple(&phi, &order).unwrap();
        let mut rng = trial_rng(4, 4, 0);
        for _ in 0..1000 {
            let x = sampling::normal_vec(&mut rng, 2, 10.0);
            assert_abs_diff_eq!(phi.eval(&x).unwrap(), x[0] + x[1], epsilon = 1e-12);
            let y = RandomVariable::from_vec(sampling::normal_vec(&mut rng, 3, 10.0));
            assert_abs_diff_eq!(
                rho.eval(&y, &sp).unwrap(),
                sp.expect(y.values()),
                epsilon = 1e-9
            );
        }
        for a in [-4.0, 0.0, 2.5] {
            assert_abs_diff_eq!(
                rho.eval(&RandomVariable::constant(3, a), &sp).unwrap(),
                a,
                epsilon = 1e-12
            );
        }

        let em = SystemicRiskMeasure::compose(
            Srm::entropic(2.0).unwrap(),
            CertainFunction::max_component(),
        );
        let phi_max = em.extract_certain(&sp);
        for x in [[1.0, 3.0], [-2.0, -5.0], [0.0, 0.0]] {
            assert_eq!(phi_max.eval(&x).unwrap(), x[0].max(x[1]));
            assert_eq!(
                phi_max.eval(&x).unwrap(),
                em.eval(&RandomEconomy::constant(3, &x), &sp).unwrap()
            );
        }
    }

    #[test]
    fn preimage_independence_for_es_of_max() {
        let sp = FiniteSpace::uniform(4).unwrap();
        let order = ConeOrder::orthant(3).unwrap();
        let m = SystemicRiskMeasure::compose(
            Srm::expected_shortfall(0.5).unwrap(),
            CertainFunction::max_component(),
        );
        let phi = CertainFunction::max_component();
        let x = [1.5, -2.0, 4.0, 0.25];
        let canonical = canonical_preimage(&phi, &x, &order).unwrap();
        let base = m.eval(&canonical, &sp).unwrap();
        let mut rng = trial_rng(8, 8, 0);
        for k in 0..10 {
            let mut alt = canonical.clone();
            for i in 0..4 {
                let keep = (i + k) % 3;
                for j in 0..3 {
                    if j != keep {
                        alt.row_mut(i)[j] -= sampling::normal(&mut rng).abs() * 5.0;
                    }
                }
            }
            assert_eq!(
                phi.apply_pointwise(&alt).unwrap(),
                phi.apply_pointwise(&canonical).unwrap()
            );
            assert_abs_diff_eq!(m.eval(&alt, &sp).unwrap(), base, epsilon = 1e-9);
        }
    }

    #[test]
    fn decompose_recovers_entropic_blackbox() {
        let sp = FiniteSpace::new(vec![0.3, 0.3, 0.4]).unwrap();
        let order = ConeOrder::orthant(2).unwrap();
        let w = [0.5, 2.0];
        let beta = 0.3;
        let m = SystemicRiskMeasure::blackbox(
            "entropic-linear",
            move |f, sp| {
                let s: f64 = sp
                    .probs()
                    .iter()
                    .zip(f.rows())
                    .map(|(p, r)| p * (beta * (w[0] * r[0] + w[1] * r[1])).exp())
                    .sum();
                s.ln() / beta
            },
            move |x| w[0] * x[0] + w[1] * x[1],
        );
        let dec = m.decompose(&sp, &order, 100, 3).unwrap();
        assert!(dec.residual <= 1e-8, "residual {}", dec.residual);
        assert!(!dec.flagged);
        let x = [1.0, -2.0];
        assert_abs_diff_eq!(dec.certain.eval(&x).unwrap(), -3.5, epsilon = 1e-12);
    }

    #[test]
    fn decompose_flags_non_pointwise_measure() {
        let sp = FiniteSpace::uniform(4).unwrap();
        let order = ConeOrder::orthant(2).unwrap();
        // E[x1 + x2] + |E[x1] - E[x2]| depends on f beyond its pointwise risks
        let m = SystemicRiskMeasure::blackbox(
            "spread-of-means",
            |f, sp| {
                let m1 = sp.expect(&f.rows().map(|r| r[0]).collect::<Vec<_>>());
                let m2 = sp.expect(&f.rows().map(|r| r[1]).collect::<Vec<_>>());
                m1 + m2 + (m1 - m2).abs()
            },
            |x| x[0] + x[1] + (x[0] - x[1]).abs(),
        );
        let dec = m.decompose(&sp, &order, 100, 0).unwrap();
        assert!(dec.residual > 0.1, "residual {}", dec.residual);
        assert!(dec.flagged);
        let report = m
            .check_axioms(
                &sp,
                &order,
                &CheckConfig {
                    trials: 300,
                    seed: 0,
                    tol: 1e-9,
                },
            )
            .unwrap();
        assert_eq!(report.check("C2").unwrap().status, CheckStatus::Fail);
    }
}
