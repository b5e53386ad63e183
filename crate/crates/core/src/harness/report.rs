//! Text and CSV rendering of every bound check over a sweep.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    check_lemma2, corollary2_eval, degree_growth, rank2_fidelity_trend, verify_lemma3, BoundReport,
    Corollary2Constants,
};
use crate::error::{Error, Result};
use crate::funcgrid::{discretize, one_norm, DiscretizedState, Domain, FunctionSpec};
use crate::harness::sweep::SweepOutput;

#[derive(Clone, Debug, PartialEq)]
pub struct ReportOptions {
    pub seed: u64,
    pub trials: usize,
    pub perturbations: Vec<f64>,
    /// Reference function for the degree-growth fit.
    pub growth_function: FunctionSpec,
    pub growth_tolerances: Vec<f64>,
    pub growth_n: usize,
    pub constants: Corollary2Constants,
    /// Allowed dip between consecutive rank-2 fidelities.
    pub trend_tol: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            seed: 0,
            trials: 1000,
            perturbations: vec![1e-4, 1e-3, 1e-2],
            growth_function: FunctionSpec::exponential(1.0).with_domain(Domain::unit()),
            growth_tolerances: vec![1e-2, 1e-4, 1e-6, 1e-8],
            growth_n: 10,
            constants: Corollary2Constants::default(),
            trend_tol: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub label: String,
    pub report: BoundReport,
    /// Shown but excluded from the verdict; used for non-smooth functions.
    pub control: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSection {
    pub key: String,
    pub title: String,
    pub entries: Vec<ReportEntry>,
    pub notes: Vec<String>,
}

impl ReportSection {
    fn new(key: &str, title: &str) -> Self {
        ReportSection {
            key: key.into(),
            title: title.into(),
            entries: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn push(&mut self, label: impl Into<String>, report: BoundReport, control: bool) {
        self.entries.push(ReportEntry {
            label: label.into(),
            report,
            control,
        });
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.control || e.report.satisfied)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub sections: Vec<ReportSection>,
    pub footer: Vec<String>,
}

impl BoundsReport {
    pub fn passed(&self) -> bool {
        self.sections.iter().all(ReportSection::passed)
    }

    pub fn section(&self, key: &str) -> Option<&ReportSection> {
        self.sections.iter().find(|s| s.key == key)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sections {
            let verdict = if s.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "== {} [{verdict}] ==", s.title);
            for e in &s.entries {
                let tag = match (e.control, e.report.satisfied) {
                    (true, true) => "control/pass",
                    (true, false) => "control/fail",
                    (false, true) => "pass",
                    (false, false) => "FAIL",
                };
                let _ = writeln!(
                    out,
                    "  [{tag}] {:<40} measured={:<12.6e} bound={:<12.6e} slack={:.3e}",
                    e.label, e.report.measured, e.report.theoretical, e.report.slack
                );
            }
            for n in &s.notes {
                let _ = writeln!(out, "  note: {n}");
            }
            out.push('\n');
        }
        for f in &self.footer {
            let _ = writeln!(out, "{f}");
        }
        let _ = writeln!(
            out,
            "overall: {}",
            if self.passed() { "PASS" } else { "FAIL" }
        );
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::MalformedFile(e.to_string());
        w.write_record([
            "section",
            "label",
            "check",
            "control",
            "theoretical",
            "measured",
            "slack",
            "satisfied",
        ])
        .map_err(err)?;
        for s in &self.sections {
            for e in &s.entries {
                w.write_record([
                    s.key.clone(),
                    e.label.clone(),
                    e.report.name.clone(),
                    e.control.to_string(),
                    e.report.theoretical.to_string(),
                    e.report.measured.to_string(),
                    e.report.slack.to_string(),
                    e.report.satisfied.to_string(),
                ])
                .map_err(err)?;
            }
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::MalformedFile(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::MalformedFile(e.to_string()))
    }
}

/// Parsed functions of the sweep whose rows carry metrics.
fn valid_functions(sweep: &SweepOutput) -> Vec<(String, FunctionSpec, Vec<usize>)> {
    sweep
        .function_ids()
        .into_iter()
        .filter_map(|id| {
            let spec = id.parse::<FunctionSpec>().ok()?;
            let ns: Vec<usize> = sweep
                .series(id)
                .filter(|r| r.metrics.is_some())
                .map(|r| r.n)
                .collect();
            (!ns.is_empty()).then(|| (id.to_string(), spec, ns))
        })
        .collect()
}

fn degree_section(opts: &ReportOptions) -> Result<ReportSection> {
    let mut s = ReportSection::new("degree-growth", "Polynomial degree versus accuracy");
    let spec = &opts.growth_function;
    let g = degree_growth(
        spec,
        &spec.default_domain(),
        &opts.growth_tolerances,
        opts.growth_n,
    )?;
    s.push(format!("{spec} N={}", opts.growth_n), g.report(), false);
    s.notes.push(format!(
        "degrees {:?} at eps {:?}; fitted slope {:.4}, predicted {:.4}, max residual {:.3}",
        g.degrees,
        g.tolerances,
        g.slope,
        g.predicted_slope,
        g.max_abs_residual()
    ));
    Ok(s)
}

fn one_norm_section(
    sweep: &SweepOutput,
    functions: &[(String, FunctionSpec, Vec<usize>)],
) -> Result<ReportSection> {
    let mut s = ReportSection::new("one-norm", "One-norm against the uniform-state maximum");
    let ns: BTreeSet<usize> = sweep.rows.iter().map(|r| r.n).collect();
    for &n in &ns {
        let u = DiscretizedState::uniform(n)?;
        let gap = (one_norm(&u) - (n as f64 / 2.0).exp2()).abs();
        s.push(
            format!("uniform N={n}"),
            BoundReport::upper("one_norm_saturation_gap", gap, 1e-12).with("n", n as f64),
            false,
        );
    }
    for (id, spec, fn_ns) in functions {
        for &n in fn_ns {
            let state = discretize(spec, &spec.default_domain(), n)?;
            s.push(format!("{id} N={n}"), check_lemma2(&state), false);
        }
    }
    Ok(s)
}

fn perturbation_section(
    functions: &[(String, FunctionSpec, Vec<usize>)],
    opts: &ReportOptions,
) -> Result<ReportSection> {
    let mut s = ReportSection::new("perturbation", "Overlap under pointwise perturbation");
    for (id, spec, ns) in functions {
        let n = ns
            .iter()
            .copied()
            .filter(|&n| n <= 12)
            .max()
            .unwrap_or(ns[0]);
        let state = discretize(spec, &spec.default_domain(), n)?;
        for &eps in &opts.perturbations {
            let r = verify_lemma3(&state, opts.trials, eps, opts.seed)?;
            s.push(format!("{id} N={n} eps={eps:e}"), r, false);
        }
    }
    s.notes.push(format!(
        "{} seeded trials per entry, seed {}",
        opts.trials, opts.seed
    ));
    Ok(s)
}

fn entropy_section(sweep: &SweepOutput) -> ReportSection {
    let mut s = ReportSection::new(
        "entropy-bound",
        "Maximal cut entropy against the smoothness bound",
    );
    let mut controls = BTreeSet::new();
    for row in &sweep.rows {
        let label = format!("{} N={}", row.function_id, row.n);
        match &row.metrics {
            Some(m) => {
                let control = !row.is_sdr();
                if control {
                    controls.insert(row.function_id.clone());
                }
                let r = BoundReport::upper("theorem1_entropy", m.s_max, m.theorem1_bound)
                    .with("n", row.n as f64)
                    .with("chi_max_exact", m.chi_max_exact as f64);
                s.push(label, r, control);
            }
            None => s.notes.push(format!(
                "{label} skipped: {}",
                row.error.as_deref().unwrap_or("no metrics")
            )),
        }
    }
    for id in controls {
        s.notes.push(format!(
            "{id} is not smooth; shown as a control and excluded from the verdict"
        ));
    }
    s
}

fn trend_section(
    sweep: &SweepOutput,
    functions: &[(String, FunctionSpec, Vec<usize>)],
    opts: &ReportOptions,
) -> Result<ReportSection> {
    let mut s = ReportSection::new("rank2-trend", "Rank-2 truncation fidelity versus N");
    for (id, spec, ns) in functions {
        if ns.len() < 2 {
            continue;
        }
        let fids: Vec<f64> = if sweep.chi_list.contains(&2) {
            sweep
                .series(id)
                .filter_map(|r| r.metrics.as_ref()?.fidelity(2))
                .collect()
        } else {
            rank2_fidelity_trend(spec, &spec.default_domain(), ns)?
                .iter()
                .map(|t| t.fidelity)
                .collect()
        };
        let worst_step = fids
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let r = BoundReport::lower("rank2_fidelity_step", worst_step, -opts.trend_tol)
            .with("first", fids[0])
            .with("last", fids[fids.len() - 1]);
        s.push(
            format!("{id} N={}..{}", ns[0], ns[ns.len() - 1]),
            r,
            !spec.family.is_sdr(),
        );
    }
    let k = opts.constants;
    let curve: Vec<String> = sweep
        .rows
        .iter()
        .map(|r| r.n)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter_map(|n| {
            let c = corollary2_eval(n, k.delta, k.c0, k.c1, k.c2).ok()?;
            Some(format!(
                "N={n}: T≥{:.4}, F≤{:.4}",
                c.trace_lower, c.fidelity_upper
            ))
        })
        .collect();
    s.notes.push(format!(
        "asymptotic curve with C0={}, C1={}, C2={}, delta={} (illustrative constants): {}",
        k.c0,
        k.c1,
        k.c2,
        k.delta,
        curve.join("; ")
    ));
    Ok(s)
}

/// Runs every bound check against the functions and sizes in `sweep`.
pub fn report_bounds(sweep: &SweepOutput, opts: &ReportOptions) -> Result<BoundsReport> {
    if sweep.rows.is_empty() {
        return Err(Error::MissingData("sweep has no rows".into()));
    }
    let functions = valid_functions(sweep);
    if functions.is_empty() {
        return Err(Error::MissingData("every sweep row failed".into()));
    }
    Ok(BoundsReport {
        sections: vec![
            degree_section(opts)?,
            one_norm_section(sweep, &functions)?,
            perturbation_section(&functions, opts)?,
            entropy_section(sweep),
            trend_section(sweep, &functions, opts)?,
        ],
        footer: vec![
            "Entropy continuity checks compare each cut against the trace distance of the reduced states.".into(),
        ],
    })
}
