//! Problem instances and their two on-disk formats: a single JSON document,
//! or a directory of CSV files for spreadsheet users.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use varrisk_core::serde_ext::{ext_f64, ext_vec};
use varrisk_core::{
    CertainFunction, ConeOrder, Exponent, FiniteSpace, RandomEconomy, SimpleRiskMeasure,
};

use crate::error::{IoError, IoResult};
use crate::json;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedEconomy {
    pub name: String,
    pub economy: RandomEconomy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CertainSpec {
    WeightedSum {
        weights: Vec<f64>,
    },
    MaxComponent,
    Shortfall {
        weights: Vec<f64>,
        beta: f64,
        threshold: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SimpleSpec {
    Expectation,
    Entropic { beta: f64 },
    ExpectedShortfall { level: f64 },
    MeanSemideviation { c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub name: String,
    pub certain: CertainSpec,
    pub simple: SimpleSpec,
}

impl CertainSpec {
    pub fn build(&self) -> varrisk_core::Result<CertainFunction> {
        match self {
            Self::WeightedSum { weights } => CertainFunction::weighted_sum(weights.clone()),
            Self::MaxComponent => Ok(CertainFunction::max_component()),
            Self::Shortfall {
                weights,
                beta,
                threshold,
            } => CertainFunction::shortfall(weights.clone(), *beta, *threshold),
        }
    }

    fn weights(&self) -> Option<&[f64]> {
        match self {
            Self::WeightedSum { weights } | Self::Shortfall { weights, .. } => Some(weights),
            Self::MaxComponent => None,
        }
    }
}

impl SimpleSpec {
    pub fn build(&self) -> varrisk_core::Result<SimpleRiskMeasure> {
        match *self {
            Self::Expectation => Ok(SimpleRiskMeasure::expectation()),
            Self::Entropic { beta } => SimpleRiskMeasure::entropic(beta),
            Self::ExpectedShortfall { level } => SimpleRiskMeasure::expected_shortfall(level),
            Self::MeanSemideviation { c } => SimpleRiskMeasure::mean_semideviation(c),
        }
    }
}

impl MeasureSpec {
    pub fn build(&self) -> varrisk_core::Result<(CertainFunction, SimpleRiskMeasure)> {
        Ok((self.certain.build()?, self.simple.build()?))
    }

    /// The twelve pairs of catalog certain functions and simple measures,
    /// with unit weights in dimension `d`.
    pub fn catalog(d: usize) -> Vec<Self> {
        let ones = vec![1.0; d];
        let certains = [
            (
                "sum",
                CertainSpec::WeightedSum {
                    weights: ones.clone(),
                },
            ),
            ("max", CertainSpec::MaxComponent),
            (
                "shortfall",
                CertainSpec::Shortfall {
                    weights: ones,
                    beta: 1.0,
                    threshold: 0.0,
                },
            ),
        ];
        let simples = [
            ("expectation", SimpleSpec::Expectation),
            ("entropic", SimpleSpec::Entropic { beta: 1.0 }),
            ("es", SimpleSpec::ExpectedShortfall { level: 0.5 }),
            ("semidev", SimpleSpec::MeanSemideviation { c: 0.5 }),
        ];
        let mut out = Vec::with_capacity(12);
        for (cn, c) in &certains {
            for (sn, s) in &simples {
                out.push(Self {
                    name: format!("{cn}-{sn}"),
                    certain: c.clone(),
                    simple: *s,
                });
            }
        }
        out
    }
}

/// A validated problem: space, cone order, exponent, named economies and
/// named measure configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub space: FiniteSpace,
    pub order: ConeOrder,
    pub exponent: Exponent,
    pub economies: Vec<NamedEconomy>,
    pub measures: Vec<MeasureSpec>,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.space.len()
    }

    pub fn d(&self) -> usize {
        self.order.dim()
    }

    pub fn economy(&self, name: &str) -> Option<&NamedEconomy> {
        self.economies.iter().find(|e| e.name == name)
    }

    pub fn measure(&self, name: &str) -> Option<&MeasureSpec> {
        self.measures.iter().find(|m| m.name == name)
    }

    /// Cross-checks every dimension and name; loaders call this before
    /// returning.
    pub fn validate(&self) -> IoResult<()> {
        let (n, d) = (self.n(), self.d());
        if self.exponent.len() != n {
            return Err(IoError::validation(
                "exponent.values",
                format!("has {} entries for {n} atoms", self.exponent.len()),
            ));
        }
        let mut names = HashSet::new();
        for e in &self.economies {
            let field = format!("economies[{}]", e.name);
            if !names.insert(e.name.as_str()) {
                return Err(IoError::validation(field, "duplicate name"));
            }
            if e.economy.n() != n {
                return Err(IoError::validation(
                    field,
                    format!("has {} rows for {n} atoms", e.economy.n()),
                ));
            }
            if e.economy.d() != d {
                return Err(IoError::validation(
                    field,
                    format!("has {} columns, cone dimension is {d}", e.economy.d()),
                ));
            }
        }
        let mut names = HashSet::new();
        for m in &self.measures {
            let field = format!("measures[{}]", m.name);
            if !names.insert(m.name.as_str()) {
                return Err(IoError::validation(field, "duplicate name"));
            }
            if let Some(w) = m.certain.weights() {
                if w.len() != d {
                    return Err(IoError::validation(
                        field,
                        format!("has {} weights, cone dimension is {d}", w.len()),
                    ));
                }
            }
            m.build().map_err(|e| IoError::validation(field, e))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceFormat {
    Json,
    /// A directory of CSV files.
    CsvBundle,
}

impl InstanceFormat {
    /// Directories are bundles, everything else is JSON.
    pub fn detect(path: &Path) -> Self {
        if path.is_dir() {
            Self::CsvBundle
        } else {
            Self::Json
        }
    }
}

pub fn load_instance(path: &Path, format: InstanceFormat) -> IoResult<Instance> {
    match format {
        InstanceFormat::Json => {
            let text = read(path)?;
            instance_from_json(&text).map_err(|e| match e {
                IoError::Parse {
                    line,
                    column,
                    message,
                    ..
                } => IoError::Parse {
                    path: path.to_path_buf(),
                    line,
                    column,
                    message,
                },
                other => other,
            })
        }
        InstanceFormat::CsvBundle => csv_bundle::load(path),
    }
}

pub fn save_instance(inst: &Instance, path: &Path, format: InstanceFormat) -> IoResult<()> {
    match format {
        InstanceFormat::Json => write(path, &instance_to_json(inst)),
        InstanceFormat::CsvBundle => csv_bundle::save(inst, path),
    }
}

pub(crate) fn read(path: &Path) -> IoResult<String> {
    fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write(path: &Path, contents: &str) -> IoResult<()> {
    fs::write(path, contents).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceDoc {
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeDoc {
    halfspaces: Vec<Vec<f64>>,
    z: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExponentDoc {
    #[serde(with = "ext_vec")]
    values: Vec<f64>,
    #[serde(with = "ext_f64")]
    range_order: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EconomyDoc {
    name: String,
    values: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    space: SpaceDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cone: Option<ConeDoc>,
    exponent: ExponentDoc,
    #[serde(default)]
    economies: Vec<EconomyDoc>,
    #[serde(default)]
    measures: Vec<MeasureSpec>,
}

fn infer_dim(
    cone: Option<&ConeDoc>,
    economies: &[EconomyDoc],
    measures: &[MeasureSpec],
) -> IoResult<usize> {
    if let Some(c) = cone {
        return Ok(c.z.len());
    }
    if let Some(row) = economies.first().and_then(|e| e.values.first()) {
        return Ok(row.len());
    }
    measures
        .iter()
        .find_map(|m| m.certain.weights().map(<[f64]>::len))
        .ok_or_else(|| {
            IoError::validation(
                "cone",
                "absent and no economy or weighted measure fixes the dimension",
            )
        })
}

fn build_instance(
    probs: Vec<f64>,
    cone: Option<ConeDoc>,
    exponent: ExponentDoc,
    economies: Vec<EconomyDoc>,
    measures: Vec<MeasureSpec>,
) -> IoResult<Instance> {
    let space = FiniteSpace::new(probs).map_err(|e| IoError::validation("space.probs", e))?;
    let d = infer_dim(cone.as_ref(), &economies, &measures)?;
    let order = match cone {
        Some(c) => ConeOrder::new(c.halfspaces, c.z).map_err(|e| IoError::validation("cone", e))?,
        None => ConeOrder::orthant(d).map_err(|e| IoError::validation("cone", e))?,
    };
    let exponent = Exponent::new(exponent.values, exponent.range_order)
        .map_err(|e| IoError::validation("exponent", e))?;
    let economies = economies
        .into_iter()
        .map(|e| {
            let economy = RandomEconomy::new(e.values)
                .map_err(|err| IoError::validation(format!("economies[{}]", e.name), err))?;
            Ok(NamedEconomy {
                name: e.name,
                economy,
            })
        })
        .collect::<IoResult<Vec<_>>>()?;
    let inst = Instance {
        space,
        order,
        exponent,
        economies,
        measures,
    };
    inst.validate()?;
    Ok(inst)
}

/// Parse and validate a JSON instance document.
pub fn instance_from_json(text: &str) -> IoResult<Instance> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| IoError::Parse {
        path: PathBuf::from("<json>"),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    build_instance(
        doc.space.probs,
        doc.cone,
        doc.exponent,
        doc.economies,
        doc.measures,
    )
}

/// Canonical JSON text; the cone is always written out explicitly.
pub fn instance_to_json(inst: &Instance) -> String {
    let doc = InstanceDoc {
        space: SpaceDoc {
            probs: inst.space.probs().to_vec(),
        },
        cone: Some(ConeDoc {
            halfspaces: inst.order.halfspaces().to_vec(),
            z: inst.order.z().to_vec(),
        }),
        exponent: ExponentDoc {
            values: inst.exponent.values().to_vec(),
            range_order: inst.exponent.range_order(),
        },
        economies: inst
            .economies
            .iter()
            .map(|e| EconomyDoc {
                name: e.name.clone(),
                values: e.economy.to_rows(),
            })
            .collect(),
        measures: inst.measures.clone(),
    };
    json::to_string(&doc)
}

mod csv_bundle {
    //! Layout:
    //! `space.csv` (`prob,exponent` per atom), `settings.csv` (`key,value`),
    //! optional `cone.csv` (one halfspace per row) with `z.csv` (one row),
    //! `economies.csv` (`name,file`) indexing `economies/<file>` matrices, and
    //! `measures.csv` (`name,certain,weights,beta,threshold,simple,param`).

    use super::*;
    use crate::json::format_g17;

    fn parse_err(path: &Path, line: usize, message: impl ToString) -> IoError {
        IoError::Parse {
            path: path.to_path_buf(),
            line,
            column: 0,
            message: message.to_string(),
        }
    }

    fn csv_err(path: &Path, e: csv::Error) -> IoError {
        let line = e.position().map_or(0, |p| p.line() as usize);
        parse_err(path, line, e)
    }

    /// Header-skipping record reader yielding `(line, fields)`.
    fn records(path: &Path) -> IoResult<Vec<(usize, Vec<String>)>> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_err(path, e))?;
        let mut out = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            out.push((line, rec.iter().map(str::to_string).collect()));
        }
        Ok(out)
    }

    fn number(path: &Path, line: usize, s: &str) -> IoResult<f64> {
        match s {
            "inf" | "+inf" | "Infinity" => Ok(f64::INFINITY),
            _ => s
                .parse()
                .map_err(|_| parse_err(path, line, format!("`{s}` is not a number"))),
        }
    }

    fn numbers(path: &Path, line: usize, fields: &[String]) -> IoResult<Vec<f64>> {
        fields.iter().map(|s| number(path, line, s)).collect()
    }

    fn matrix(path: &Path) -> IoResult<Vec<Vec<f64>>> {
        records(path)?
            .into_iter()
            .map(|(line, f)| numbers(path, line, &f))
            .collect()
    }

    fn field<'a>(
        path: &Path,
        line: usize,
        fields: &'a [String],
        i: usize,
        name: &str,
    ) -> IoResult<&'a str> {
        fields
            .get(i)
            .map(String::as_str)
            .ok_or_else(|| parse_err(path, line, format!("missing column `{name}`")))
    }

    fn opt_number(path: &Path, line: usize, fields: &[String], i: usize) -> IoResult<Option<f64>> {
        match fields.get(i).map(String::as_str) {
            None | Some("") => Ok(None),
            Some(s) => number(path, line, s).map(Some),
        }
    }

    fn require(v: Option<f64>, path: &Path, line: usize, name: &str) -> IoResult<f64> {
        v.ok_or_else(|| parse_err(path, line, format!("column `{name}` is required here")))
    }

    pub fn load(dir: &Path) -> IoResult<Instance> {
        let space_path = dir.join("space.csv");
        let mut probs = Vec::new();
        let mut exps = Vec::new();
        for (line, f) in records(&space_path)? {
            probs.push(number(
                &space_path,
                line,
                field(&space_path, line, &f, 0, "prob")?,
            )?);
            exps.push(number(
                &space_path,
                line,
                field(&space_path, line, &f, 1, "exponent")?,
            )?);
        }

        let settings_path = dir.join("settings.csv");
        let mut range_order = None;
        for (line, f) in records(&settings_path)? {
            match field(&settings_path, line, &f, 0, "key")? {
                "range_order" => {
                    range_order = Some(number(
                        &settings_path,
                        line,
                        field(&settings_path, line, &f, 1, "value")?,
                    )?)
                }
                other => {
                    return Err(parse_err(
                        &settings_path,
                        line,
                        format!("unknown setting `{other}`"),
                    ))
                }
            }
        }
        let range_order =
            range_order.ok_or_else(|| IoError::validation("settings.range_order", "missing"))?;

        let cone_path = dir.join("cone.csv");
        let cone = if cone_path.exists() {
            let z_path = dir.join("z.csv");
            let z = matrix(&z_path)?
                .into_iter()
                .next()
                .ok_or_else(|| parse_err(&z_path, 2, "expected one row"))?;
            Some(ConeDoc {
                halfspaces: matrix(&cone_path)?,
                z,
            })
        } else {
            None
        };

        let index_path = dir.join("economies.csv");
        let mut economies = Vec::new();
        if index_path.exists() {
            for (line, f) in records(&index_path)? {
                let name = field(&index_path, line, &f, 0, "name")?.to_string();
                let file = field(&index_path, line, &f, 1, "file")?;
                economies.push(EconomyDoc {
                    name,
                    values: matrix(&dir.join("economies").join(file))?,
                });
            }
        }

        let measures_path = dir.join("measures.csv");
        let mut measures = Vec::new();
        if measures_path.exists() {
            let p = &measures_path;
            for (line, f) in records(p)? {
                let name = field(p, line, &f, 0, "name")?.to_string();
                let weights = || -> IoResult<Vec<f64>> {
                    field(p, line, &f, 2, "weights")?
                        .split_whitespace()
                        .map(|s| number(p, line, s))
                        .collect()
                };
                let beta = opt_number(p, line, &f, 3)?;
                let threshold = opt_number(p, line, &f, 4)?;
                let certain = match field(p, line, &f, 1, "certain")? {
                    "weighted_sum" => CertainSpec::WeightedSum {
                        weights: weights()?,
                    },
                    "max_component" => CertainSpec::MaxComponent,
                    "shortfall" => CertainSpec::Shortfall {
                        weights: weights()?,
                        beta: require(beta, p, line, "beta")?,
                        threshold: require(threshold, p, line, "threshold")?,
                    },
                    other => {
                        return Err(parse_err(
                            p,
                            line,
                            format!("unknown certain kind `{other}`"),
                        ))
                    }
                };
                let param = opt_number(p, line, &f, 6)?;
                let simple = match field(p, line, &f, 5, "simple")? {
                    "expectation" => SimpleSpec::Expectation,
                    "entropic" => SimpleSpec::Entropic {
                        beta: require(param, p, line, "param")?,
                    },
                    "expected_shortfall" => SimpleSpec::ExpectedShortfall {
                        level: require(param, p, line, "param")?,
                    },
                    "mean_semideviation" => SimpleSpec::MeanSemideviation {
                        c: require(param, p, line, "param")?,
                    },
                    other => {
                        return Err(parse_err(p, line, format!("unknown simple kind `{other}`")))
                    }
                };
                measures.push(MeasureSpec {
                    name,
                    certain,
                    simple,
                });
            }
        }

        build_instance(
            probs,
            cone,
            ExponentDoc {
                values: exps,
                range_order,
            },
            economies,
            measures,
        )
    }

    fn num(v: f64) -> String {
        if v.is_infinite() {
            if v > 0.0 {
                "inf".into()
            } else {
                "-inf".into()
            }
        } else {
            format_g17(v)
        }
    }

    fn write_csv(
        path: &Path,
        header: &[String],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> IoResult<()> {
        let werr = |e: csv::Error| IoError::Write {
            path: path.to_path_buf(),
            source: e.into(),
        };
        let mut w = csv::Writer::from_path(path).map_err(werr)?;
        w.write_record(header).map_err(werr)?;
        for row in rows {
            w.write_record(&row).map_err(werr)?;
        }
        w.flush().map_err(|source| IoError::Write {
            path: path.to_path_buf(),
            source,
        })
    }

    fn write_matrix<'a>(
        path: &Path,
        d: usize,
        rows: impl IntoIterator<Item = &'a [f64]>,
    ) -> IoResult<()> {
        let header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
        write_csv(
            path,
            &header,
            rows.into_iter()
                .map(|r| r.iter().map(|v| num(*v)).collect()),
        )
    }

    fn headers(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    pub fn save(inst: &Instance, dir: &Path) -> IoResult<()> {
        let econ_dir = dir.join("economies");
        fs::create_dir_all(&econ_dir).map_err(|source| IoError::Write {
            path: econ_dir.clone(),
            source,
        })?;
        write_csv(
            &dir.join("space.csv"),
            &headers(&["prob", "exponent"]),
            inst.space
                .probs()
                .iter()
                .zip(inst.exponent.values())
                .map(|(p, e)| vec![num(*p), num(*e)]),
        )?;
        write_csv(
            &dir.join("settings.csv"),
            &headers(&["key", "value"]),
            [vec!["range_order".into(), num(inst.exponent.range_order())]],
        )?;
        let d = inst.d();
        write_matrix(
            &dir.join("cone.csv"),
            d,
            inst.order.halfspaces().iter().map(Vec::as_slice),
        )?;
        write_matrix(&dir.join("z.csv"), d, [inst.order.z()])?;
        let files: Vec<String> = (0..inst.economies.len())
            .map(|i| format!("e{i}.csv"))
            .collect();
        write_csv(
            &dir.join("economies.csv"),
            &headers(&["name", "file"]),
            inst.economies
                .iter()
                .zip(&files)
                .map(|(e, f)| vec![e.name.clone(), f.clone()]),
        )?;
        for (e, f) in inst.economies.iter().zip(&files) {
            write_matrix(&econ_dir.join(f), d, e.economy.rows())?;
        }
        let rows = inst.measures.iter().map(|m| {
            let join = |w: &[f64]| w.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" ");
            let (certain, weights, beta, threshold) = match &m.certain {
                CertainSpec::WeightedSum { weights } => {
                    ("weighted_sum", join(weights), String::new(), String::new())
                }
                CertainSpec::MaxComponent => {
                    ("max_component", String::new(), String::new(), String::new())
                }
                CertainSpec::Shortfall {
                    weights,
                    beta,
                    threshold,
                } => ("shortfall", join(weights), num(*beta), num(*threshold)),
            };
            let (simple, param) = match m.simple {
                SimpleSpec::Expectation => ("expectation", String::new()),
                SimpleSpec::Entropic { beta } => ("entropic", num(beta)),
                SimpleSpec::ExpectedShortfall { level } => ("expected_shortfall", num(level)),
                SimpleSpec::MeanSemideviation { c } => ("mean_semideviation", num(c)),
            };
            vec![
                m.name.clone(),
                certain.into(),
                weights,
                beta,
                threshold,
                simple.into(),
                param,
            ]
        });
        write_csv(
            &dir.join("measures.csv"),
            &headers(&[
                "name",
                "certain",
                "weights",
                "beta",
                "threshold",
                "simple",
                "param",
            ]),
            rows,
        )
    }
}
