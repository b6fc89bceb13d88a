//! Report documents written by the command-line tool, as JSON or as
//! aligned text tables.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use varrisk_core::serde_ext::ext_f64;
use varrisk_core::{AxiomReport, CheckStatus, DualityMethod, DualityReport};

use crate::error::{IoError, IoResult};
use crate::instance::{read, write};
use crate::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub measure: String,
    pub economy: String,
    #[serde(with = "ext_f64")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeRow {
    pub measure: String,
    #[serde(with = "ext_f64")]
    pub residual: f64,
    pub samples: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityRow {
    pub measure: String,
    pub economy: String,
    pub report: DualityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub economy: String,
    #[serde(with = "ext_f64")]
    pub luxemburg: f64,
    #[serde(with = "ext_f64")]
    pub l1: f64,
    #[serde(with = "ext_f64")]
    pub l2: f64,
    #[serde(with = "ext_f64")]
    pub linf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case")]
pub enum ReportDoc {
    Eval {
        rows: Vec<EvalRow>,
    },
    Axioms {
        passed: bool,
        suites: Vec<AxiomReport>,
    },
    Decompose {
        rows: Vec<DecomposeRow>,
    },
    Duality {
        rows: Vec<DualityRow>,
    },
    Norm {
        rows: Vec<NormRow>,
    },
}

pub fn render_report(doc: &ReportDoc, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => json::to_string(doc),
        ReportFormat::Text => render_text(doc),
    }
}

/// Write to `path`, or to standard output when `path` is `None`.
pub fn save_report(doc: &ReportDoc, path: Option<&Path>, format: ReportFormat) -> IoResult<()> {
    let text = render_report(doc, format);
    match path {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn load_report(path: &Path) -> IoResult<ReportDoc> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| IoError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: &mut dyn Iterator<Item = &str>, out: &mut String| {
        let parts: Vec<String> = cells
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut header.iter().copied(), &mut out);
    for row in rows {
        line(&mut row.iter().map(String::as_str), &mut out);
    }
    out
}

/// Shortest round-trip digits, in scientific notation for very small or
/// very large magnitudes.
fn num(v: f64) -> String {
    if v != 0.0 && v.is_finite() && !(1e-4..1e15).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn status(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "FAIL",
        CheckStatus::Inconclusive => "inconclusive",
    }
}

fn method(m: DualityMethod) -> String {
    match m {
        DualityMethod::Exact => "exact".into(),
        DualityMethod::Sampled { budget, .. } => format!("sampled({budget})"),
    }
}

fn render_text(doc: &ReportDoc) -> String {
    match doc {
        ReportDoc::Eval { rows } => table(
            &["measure", "economy", "value"],
            &rows
                .iter()
                .map(|r| vec![r.measure.clone(), r.economy.clone(), num(r.value)])
                .collect::<Vec<_>>(),
        ),
        ReportDoc::Decompose { rows } => table(
            &["measure", "residual", "samples", "flagged"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.measure.clone(),
                        num(r.residual),
                        r.samples.to_string(),
                        r.flagged.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        ReportDoc::Duality { rows } => table(
            &[
                "measure",
                "economy",
                "method",
                "primal",
                "dual",
                "gap",
                "alpha",
                "candidates",
                "tight",
            ],
            &rows
                .iter()
                .map(|r| {
                    let d = &r.report;
                    vec![
                        r.measure.clone(),
                        r.economy.clone(),
                        method(d.method),
                        num(d.primal),
                        num(d.dual),
                        num(d.gap),
                        num(d.maximizer.alpha),
                        d.candidates.to_string(),
                        d.tight.map_or("-".into(), |t| t.to_string()),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        ReportDoc::Norm { rows } => table(
            &["economy", "luxemburg", "l1", "l2", "linf"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.economy.clone(),
                        num(r.luxemburg),
                        num(r.l1),
                        num(r.l2),
                        num(r.linf),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        ReportDoc::Axioms { passed, suites } => {
            let rows: Vec<Vec<String>> = suites
                .iter()
                .flat_map(|s| {
                    s.checks.iter().map(move |c| {
                        vec![
                            s.subject.clone(),
                            s.suite.clone(),
                            c.axiom.clone(),
                            status(c.status).into(),
                            num(c.worst_violation),
                            c.trials.to_string(),
                        ]
                    })
                })
                .collect();
            let mut out = table(
                &["subject", "suite", "check", "status", "worst", "trials"],
                &rows,
            );
            for s in suites {
                for c in s.failures() {
                    if let Some(cx) = &c.counterexample {
                        let _ = writeln!(
                            out,
                            "\n{} / {} {}: trial {}: {}",
                            s.subject, s.suite, c.axiom, cx.trial, cx.detail
                        );
                        for w in &cx.witnesses {
                            let rows: Vec<String> = w
                                .rows
                                .iter()
                                .map(|r| {
                                    format!(
                                        "[{}]",
                                        r.iter().map(|v| num(*v)).collect::<Vec<_>>().join(", ")
                                    )
                                })
                                .collect();
                            let _ = writeln!(out, "  {} = {}", w.name, rows.join(" "));
                        }
                    }
                }
            }
            let _ = writeln!(out, "\noverall: {}", if *passed { "pass" } else { "FAIL" });
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use varrisk_core::{
        AxiomCheck, CheckStatus, Counterexample, DualPair, RandomEconomy, RandomVariable, Witness,
    };

    fn duality_doc() -> ReportDoc {
        ReportDoc::Duality {
            rows: vec![DualityRow {
                measure: "sum-es".into(),
                economy: "demo".into(),
                report: DualityReport {
                    primal: 3.5,
                    dual: 3.4999999999999996,
                    gap: 4.440892098500626e-16,
                    maximizer: DualPair {
                        yhat: RandomVariable::from_vec(vec![0.0, 2.0]),
                        fhat: RandomEconomy::new(vec![vec![0.0, 0.0], vec![2.0, 2.0]]).unwrap(),
                        alpha: f64::INFINITY,
                    },
                    method: DualityMethod::Sampled {
                        budget: 10,
                        seed: 3,
                    },
                    candidates: 50,
                    unbounded: 0,
                    tight: None,
                },
            }],
        }
    }

    fn axioms_doc() -> ReportDoc {
        ReportDoc::Axioms {
            passed: false,
            suites: vec![AxiomReport {
                subject: "custom(x)".into(),
                suite: "simple".into(),
                unverified_custom: true,
                checks: vec![AxiomCheck {
                    axiom: "B3".into(),
                    property: "constancy".into(),
                    trials: 21,
                    status: CheckStatus::Fail,
                    worst_violation: 90.0,
                    counterexample: Some(Counterexample {
                        trial: 0,
                        detail: "rho(a) != a".into(),
                        witnesses: vec![Witness::vector("X", &[-10.0, -10.0, 0.1])],
                    }),
                }],
            }],
        }
    }

    #[test]
    fn json_reports_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for doc in [duality_doc(), axioms_doc()] {
            let path = dir.path().join("r.json");
            save_report(&doc, Some(&path), ReportFormat::Json).unwrap();
            assert_eq!(load_report(&path).unwrap(), doc);
        }
    }

    #[test]
    fn text_tables_show_gap_and_counterexamples() {
        let text = render_report(&duality_doc(), ReportFormat::Text);
        assert!(text.lines().next().unwrap().contains("gap"));
        assert!(text.contains("4.440892098500626e-16"));
        let text = render_report(&axioms_doc(), ReportFormat::Text);
        assert!(text.contains("X = [-10, -10, 0.1]"));
        assert!(text.contains("overall: FAIL"));
    }
}
