//! Systemic risk measures for random vectors ordered by a polyhedral cone,
//! on finite probability spaces with variable-exponent norms.

#![cfg_attr(not(test), no_std)]
// `!(x >= lo)` is the NaN-rejecting form used throughout validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod certain;
pub mod duality;
pub mod error;
mod math;
pub mod report;
pub mod root;
pub mod sampling;
#[cfg(feature = "serde")]
pub mod serde_ext;
pub mod simple_risk;
pub mod space;
pub mod systemic;

pub use certain::{CertainFunction, CertainKind};
pub use duality::{DualPair, DualityMethod, DualityReport, PenaltySampler};
pub use error::{Error, Result};
pub use report::{AxiomCheck, AxiomReport, CheckConfig, CheckStatus, Counterexample, Witness};
pub use simple_risk::{ConjugateDescriptor, SimpleKind, SimpleRiskMeasure};
pub use space::{
    conjugate_exponent, dual_pairing, lp_norm, luxemburg_norm, modular, ConeOrder, Exponent,
    FiniteSpace, RandomEconomy, RandomVariable,
};
pub use systemic::{Decomposition, SystemicRiskMeasure};
