//! File formats, report rendering and the batch command-line front end for
//! `varrisk-core`.

// `!(x >= lo)` is the NaN-rejecting form used throughout validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod generate;
pub mod instance;
pub mod json;
pub mod report;

pub use error::{IoError, IoResult};
pub use generate::{generate_instance, GeneratorConfig};
pub use instance::{
    load_instance, save_instance, CertainSpec, Instance, InstanceFormat, MeasureSpec, NamedEconomy,
    SimpleSpec,
};
pub use report::{load_report, render_report, save_report, ReportDoc, ReportFormat};
