//! Simulation report files.

use std::fmt::Write as _;

use cqreg::Algorithm;
use cqreg_sim::{SimReport, SimRow};
use serde::{Deserialize, Serialize};

use crate::document::SCHEMA_VERSION;
use crate::CliError;

pub const CSV_HEADER: &str = "n,p,algorithm,mean_error,mean_N_T,mean_N_F,mean_seconds,reps,failures";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub preset: String,
    pub report: SimReport,
}

/// Writes `# key=value` metadata lines and one row per algorithm. Floats use
/// the shortest representation that parses back to the same value.
pub fn report_to_csv(preset: &str, report: &SimReport) -> String {
    let mut out = String::new();
    let levels: Vec<String> = report.levels.iter().map(f64::to_string).collect();
    let meta = [
        ("schema_version", SCHEMA_VERSION.to_string()),
        ("preset", preset.to_string()),
        ("levels", levels.join(";")),
        ("lambda", report.lambda.map_or_else(|| "none".into(), |l| l.to_string())),
        ("base_seed", report.base_seed.to_string()),
        ("intercept", report.intercept.to_string()),
        ("true_support_size", report.true_support_size.to_string()),
        ("selection_threshold", report.selection_threshold.to_string()),
    ];
    for (k, v) in meta {
        writeln!(out, "# {k}={v}").unwrap();
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n, r.p, r.algorithm, r.mean_error, r.mean_n_t, r.mean_n_f, r.mean_seconds, r.reps, r.failures
        )
        .unwrap();
    }
    out
}

/// Parses a report written by [`report_to_csv`], returning the preset name
/// and the report.
pub fn report_from_csv(text: &str) -> Result<(String, SimReport), CliError> {
    let bad = |msg: String| CliError::Input(format!("report: {msg}"));
    let mut meta = std::collections::HashMap::new();
    let mut body = String::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest.trim().split_once('=').ok_or_else(|| bad(format!("bad metadata line `{line}`")))?;
            meta.insert(k.trim().to_string(), v.trim().to_string());
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let get = |k: &str| meta.get(k).cloned().ok_or_else(|| bad(format!("missing metadata `{k}`")));
    let num = |k: &str| -> Result<f64, CliError> {
        get(k)?.parse::<f64>().map_err(|_| bad(format!("metadata `{k}` is not a number")))
    };
    let levels = get("levels")?
        .split(';')
        .map(|s| s.parse::<f64>().map_err(|_| bad(format!("bad level `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let lambda = match get("lambda")?.as_str() {
        "none" => None,
        s => Some(s.parse::<f64>().map_err(|_| bad(format!("bad lambda `{s}`")))?),
    };
    let base_seed = get("base_seed")?.parse::<u64>().map_err(|_| bad("bad base_seed".into()))?;
    let true_support_size = get("true_support_size")?.parse::<usize>().map_err(|_| bad("bad support size".into()))?;

    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(bad(format!("unexpected header `{header}`")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or_default();
        let f = |i: usize| field(i).parse::<f64>().map_err(|_| bad(format!("bad number `{}`", field(i))));
        let u = |i: usize| field(i).parse::<usize>().map_err(|_| bad(format!("bad count `{}`", field(i))));
        rows.push(SimRow {
            n: u(0)?,
            p: u(1)?,
            algorithm: field(2).parse::<Algorithm>().map_err(|e| bad(e.to_string()))?,
            mean_error: f(3)?,
            mean_n_t: f(4)?,
            mean_n_f: f(5)?,
            mean_seconds: f(6)?,
            reps: u(7)?,
            failures: u(8)?,
        });
    }
    let report = SimReport {
        levels,
        lambda,
        base_seed,
        intercept: num("intercept")?,
        true_support_size,
        selection_threshold: num("selection_threshold")?,
        rows,
    };
    Ok((get("preset")?, report))
}
