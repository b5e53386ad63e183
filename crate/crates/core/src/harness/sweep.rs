//! Parallel (function, N) sweeps and their CSV / JSON encodings.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{check_theorem1, theorem1_bound};
use crate::entropy::entropy_profile;
use crate::error::{Error, Result};
use crate::funcgrid::{discretize, FunctionSpec};
use crate::harness::config::SweepConfig;
use crate::mps::{from_state_vector, mps_inner, truncate, TruncationPolicy};

/// First line of every sweep CSV; bump when the columns change.
pub const CSV_VERSION_LINE: &str = "#fmps-v1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiFidelity {
    pub chi: usize,
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowMetrics {
    pub chi_max_exact: usize,
    pub s_max: f64,
    pub argmax_cut: usize,
    pub fidelities: Vec<ChiFidelity>,
    pub theorem1_bound: f64,
    pub theorem1_pass: bool,
}

impl RowMetrics {
    pub fn fidelity(&self, chi: usize) -> Option<f64> {
        self.fidelities
            .iter()
            .find(|f| f.chi == chi)
            .map(|f| f.fidelity)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Canonical spec string, or the raw input when it failed to parse.
    pub function_id: String,
    pub n: usize,
    pub metrics: Option<RowMetrics>,
    pub runtime_ms: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    /// `false` for the step family and for ids that do not parse.
    pub fn is_sdr(&self) -> bool {
        self.function_id
            .parse::<FunctionSpec>()
            .map(|s| s.family.is_sdr())
            .unwrap_or(false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub chi_list: Vec<usize>,
    pub rows: Vec<SweepRow>,
}

impl SweepOutput {
    /// Rows for one function, in N order.
    pub fn series<'a>(&'a self, function_id: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.function_id == function_id)
    }

    pub fn function_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.rows.iter().map(|r| r.function_id.as_str()).collect();
        ids.dedup();
        ids
    }
}

fn evaluate(spec: &FunctionSpec, n: usize, config: &SweepConfig) -> Result<RowMetrics> {
    let domain = spec.default_domain();
    let state = discretize(spec, &domain, n)?;
    let exact = from_state_vector(&state)?;
    let profile = if n <= config.dense_cap {
        entropy_profile(&state)?
    } else {
        entropy_profile(&exact)?
    };
    let fidelities = config
        .chi_list
        .iter()
        .map(|&chi| {
            let approx = truncate(&exact, &TruncationPolicy::rank(chi))?;
            Ok(ChiFidelity {
                chi,
                fidelity: mps_inner(&exact, &approx.state)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let bound = theorem1_bound(spec, &domain, n, config.delta)?;
    Ok(RowMetrics {
        chi_max_exact: exact.max_bond(),
        s_max: profile.s_max,
        argmax_cut: profile.argmax_cut,
        fidelities,
        theorem1_bound: bound,
        theorem1_pass: check_theorem1(&profile, bound).satisfied,
    })
}

/// Runs every (function, N) job on a pool of `config.workers` threads. Rows
/// come back sorted by `(function_id, N)`; per-row failures land in `error`.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput> {
    config.validate()?;
    let mut functions: Vec<(String, Result<FunctionSpec>)> = config
        .parsed_functions()
        .into_iter()
        .map(|(raw, parsed)| match parsed {
            Ok(spec) => (spec.to_string(), Ok(spec)),
            Err(e) => (raw, Err(e)),
        })
        .collect();
    functions.sort_by(|a, b| a.0.cmp(&b.0));
    functions.dedup_by(|a, b| a.0 == b.0);

    let jobs: Vec<(usize, usize)> = (0..functions.len())
        .flat_map(|f| config.n_range.values().into_iter().map(move |n| (f, n)))
        .collect();
    let run = |&(f, n): &(usize, usize)| {
        let (id, spec) = &functions[f];
        let start = Instant::now();
        let result = match spec {
            Ok(spec) => evaluate(spec, n, config),
            Err(e) => Err(Error::InvalidConfig(e.to_string())),
        };
        let runtime_ms = config
            .record_timing
            .then(|| start.elapsed().as_secs_f64() * 1e3);
        match result {
            Ok(metrics) => SweepRow {
                function_id: id.clone(),
                n,
                metrics: Some(metrics),
                runtime_ms,
                error: None,
            },
            Err(e) => SweepRow {
                function_id: id.clone(),
                n,
                metrics: None,
                runtime_ms,
                error: Some(e.to_string()),
            },
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let mut rows: Vec<SweepRow> = pool.install(|| jobs.par_iter().map(run).collect());
    rows.sort_by(|a, b| (&a.function_id, a.n).cmp(&(&b.function_id, b.n)));
    Ok(SweepOutput {
        chi_list: config.chi_list.clone(),
        rows,
    })
}

fn header(chi_list: &[usize]) -> Vec<String> {
    let mut h: Vec<String> = ["function_id", "N", "chi_max_exact", "s_max", "argmax_cut"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend(chi_list.iter().map(|c| format!("fidelity_chi{c}")));
    h.extend(
        ["theorem1_bound", "theorem1_pass", "runtime_ms", "error"]
            .iter()
            .map(|s| s.to_string()),
    );
    h
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<csv stream>", io),
        other => Error::MalformedFile(format!("{other:?}")),
    }
}

pub fn write_csv<W: Write>(output: &SweepOutput, mut out: W) -> Result<()> {
    writeln!(out, "{CSV_VERSION_LINE}").map_err(|e| Error::io("<csv stream>", e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(&output.chi_list)).map_err(csv_err)?;
    for row in &output.rows {
        let mut rec = vec![row.function_id.clone(), row.n.to_string()];
        match &row.metrics {
            Some(m) => {
                rec.extend([
                    m.chi_max_exact.to_string(),
                    m.s_max.to_string(),
                    m.argmax_cut.to_string(),
                ]);
                rec.extend(
                    output
                        .chi_list
                        .iter()
                        .map(|&c| m.fidelity(c).map(|f| f.to_string()).unwrap_or_default()),
                );
                rec.extend([m.theorem1_bound.to_string(), m.theorem1_pass.to_string()]);
            }
            None => rec.extend(std::iter::repeat_n(
                String::new(),
                5 + output.chi_list.len(),
            )),
        }
        rec.push(
            row.runtime_ms
                .map(|t| format!("{t:.3}"))
                .unwrap_or_default(),
        );
        rec.push(row.error.clone().unwrap_or_default());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv stream>", e))
}

pub fn to_csv_string(output: &SweepOutput) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(output, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::MalformedFile(e.to_string()))
}

pub fn read_csv<R: Read>(input: R) -> Result<SweepOutput> {
    let mut input = BufReader::new(input);
    let mut first = String::new();
    input
        .read_line(&mut first)
        .map_err(|e| Error::io("<csv stream>", e))?;
    let first = first.trim_end();
    if first != CSV_VERSION_LINE {
        return if first.starts_with("#fmps-v") {
            Err(Error::SchemaVersionMismatch {
                found: first.trim_start_matches("#fmps-v").to_string(),
                expected: 1,
            })
        } else {
            Err(Error::MalformedFile(format!(
                "missing `{CSV_VERSION_LINE}` line"
            )))
        };
    }
    let mut r = csv::Reader::from_reader(input);
    let head: Vec<String> = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(String::from)
        .collect();
    let chi_list = head
        .iter()
        .filter_map(|h| h.strip_prefix("fidelity_chi"))
        .map(|c| {
            c.parse::<usize>()
                .map_err(|_| Error::MalformedFile(format!("bad column `fidelity_chi{c}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if head != header(&chi_list) {
        return Err(Error::MalformedFile(format!("unexpected columns {head:?}")));
    }
    let k = chi_list.len();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
            s.parse()
                .map_err(|_| Error::MalformedFile(format!("bad number `{s}`")))
        }
        let error = Some(field(k + 8).to_string()).filter(|s| !s.is_empty());
        let metrics = if field(2).is_empty() {
            None
        } else {
            Some(RowMetrics {
                chi_max_exact: num(field(2))?,
                s_max: num(field(3))?,
                argmax_cut: num(field(4))?,
                fidelities: chi_list
                    .iter()
                    .enumerate()
                    .map(|(j, &chi)| {
                        Ok(ChiFidelity {
                            chi,
                            fidelity: num(field(5 + j))?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
                theorem1_bound: num(field(k + 5))?,
                theorem1_pass: num(field(k + 6))?,
            })
        };
        rows.push(SweepRow {
            function_id: field(0).to_string(),
            n: num(field(1))?,
            metrics,
            runtime_ms: Some(field(k + 7))
                .filter(|s| !s.is_empty())
                .map(num)
                .transpose()?,
            error,
        });
    }
    Ok(SweepOutput { chi_list, rows })
}

pub fn load_csv(path: &Path) -> Result<SweepOutput> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

/// Writes `path` as CSV and, when `json` is set, a `.json` mirror beside it.
pub fn save_outputs(output: &SweepOutput, path: &Path, json: bool) -> Result<()> {
    std::fs::write(path, to_csv_string(output)?).map_err(|e| Error::io(path, e))?;
    if json {
        let mirror = path.with_extension("json");
        let text = serde_json::to_string_pretty(output)
            .map_err(|e| Error::MalformedFile(e.to_string()))?;
        std::fs::write(&mirror, text).map_err(|e| Error::io(&mirror, e))?;
    }
    Ok(())
}
