//! Outcome records of the sampled axiom suites.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Trial count, base seed and absolute tolerance shared by the sampled checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 0,
            tol: 1e-9,
        }
    }
}

impl CheckConfig {
    pub fn new(trials: usize, seed: u64, tol: f64) -> Result<Self> {
        let cfg = Self { trials, seed, tol };
        cfg.validate()?;
        Ok(cfg)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidTrials);
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: "must be nonnegative".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The premise of a conditional axiom could not be constructed.
    Inconclusive,
}

/// A named input of a failing trial; vectors are stored as a single row.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    pub name: String,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext::ext_rows"))]
    pub rows: Vec<Vec<f64>>,
}

impl Witness {
    pub fn vector(name: &str, values: &[f64]) -> Self {
        Self {
            name: name.into(),
            rows: alloc::vec![values.to_vec()],
        }
    }

    pub fn scalar(name: &str, value: f64) -> Self {
        Self::vector(name, &[value])
    }

    pub fn matrix(name: &str, rows: Vec<Vec<f64>>) -> Self {
        Self {
            name: name.into(),
            rows,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Counterexample {
    pub trial: usize,
    pub detail: String,
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxiomCheck {
    /// Short label such as `A1` or `C4`.
    pub axiom: String,
    pub property: String,
    pub trials: usize,
    pub status: CheckStatus,
    /// Largest observed `lhs - rhs` of the checked inequality `lhs <= rhs`.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_ext::ext_f64"))]
    pub worst_violation: f64,
    pub counterexample: Option<Counterexample>,
}

impl AxiomCheck {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxiomReport {
    pub subject: String,
    pub suite: String,
    /// Set when the subject wraps a user-supplied evaluator; sampled checks
    /// can refute such a subject but never certify it.
    pub unverified_custom: bool,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(AxiomCheck::passed)
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

/// Accumulates trial outcomes of one inequality check.
pub(crate) struct Recorder {
    axiom: &'static str,
    property: &'static str,
    tol: f64,
    trials: usize,
    worst: f64,
    failed: bool,
    inconclusive: bool,
    counterexample: Option<Counterexample>,
}

impl Recorder {
    pub fn new(axiom: &'static str, property: &'static str, tol: f64) -> Self {
        Self {
            axiom,
            property,
            tol,
            trials: 0,
            worst: f64::NEG_INFINITY,
            failed: false,
            inconclusive: false,
            counterexample: None,
        }
    }

    /// Record `lhs <= rhs + tol`; the witness closure runs only for the
    /// first violation.
    pub fn record(
        &mut self,
        trial: usize,
        lhs: f64,
        rhs: f64,
        detail: impl FnOnce() -> String,
        witnesses: impl FnOnce() -> Vec<Witness>,
    ) {
        self.trials += 1;
        let violation = if lhs == rhs { 0.0 } else { lhs - rhs };
        if violation > self.worst || violation.is_nan() {
            self.worst = violation;
        }
        if !(violation <= self.tol) && !self.failed {
            self.failed = true;
            self.counterexample = Some(Counterexample {
                trial,
                detail: detail(),
                witnesses: witnesses(),
            });
        }
    }

    /// Record a trial that failed outright (not an inequality).
    pub fn fail(&mut self, trial: usize, detail: String, witnesses: Vec<Witness>) {
        self.trials += 1;
        self.worst = f64::INFINITY;
        if !self.failed {
            self.failed = true;
            self.counterexample = Some(Counterexample {
                trial,
                detail,
                witnesses,
            });
        }
    }

    pub fn inconclusive(&mut self, trial: usize, detail: String) {
        self.inconclusive = true;
        if self.counterexample.is_none() {
            self.counterexample = Some(Counterexample {
                trial,
                detail,
                witnesses: Vec::new(),
            });
        }
    }

    pub fn finish(self) -> AxiomCheck {
        let status = if self.failed {
            CheckStatus::Fail
        } else if self.inconclusive {
            CheckStatus::Inconclusive
        } else {
            CheckStatus::Pass
        };
        AxiomCheck {
            axiom: self.axiom.into(),
            property: self.property.into(),
            trials: self.trials,
            status,
            worst_violation: self.worst,
            counterexample: self.counterexample,
        }
    }
}
