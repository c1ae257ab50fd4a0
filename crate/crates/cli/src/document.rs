//! Machine-readable fit results.

use std::fmt::Write as _;

use cqreg::{Algorithm, FitResult, SolverOptions};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestEcho {
    pub algorithm: Algorithm,
    pub pilot_algorithm: Algorithm,
    pub levels: Vec<f64>,
    pub lambda: Option<f64>,
    pub options: SolverOptions,
    pub response: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: String,
    pub request: RequestEcho,
    pub covariates: Vec<String>,
    pub intercepts: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilot: Option<Vec<f64>>,
}

impl ResultDocument {
    pub fn new(request: RequestEcho, covariates: Vec<String>, fit: FitResult) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            request,
            covariates,
            intercepts: fit.intercepts,
            coefficients: fit.coefficients,
            iterations: fit.iterations,
            converged: fit.converged,
            objective: fit.objective,
            pilot: fit.diagnostics.pilot,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes") + "\n"
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// `# key=value` metadata lines, then a `term,estimate,pilot` table with
    /// one row per intercept followed by one row per covariate.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let req = &self.request;
        let levels: Vec<String> = req.levels.iter().map(f64::to_string).collect();
        let meta = [
            ("schema_version", self.schema_version.clone()),
            ("algorithm", req.algorithm.to_string()),
            ("pilot_algorithm", req.pilot_algorithm.to_string()),
            ("levels", levels.join(";")),
            ("lambda", req.lambda.map_or_else(|| "none".into(), |l| l.to_string())),
            ("response", req.response.clone()),
            ("iterations", self.iterations.to_string()),
            ("converged", self.converged.to_string()),
            ("objective", self.objective.to_string()),
        ];
        for (k, v) in meta {
            writeln!(out, "# {k}={v}").unwrap();
        }
        out.push_str("term,estimate,pilot\n");
        for (tau, b) in req.levels.iter().zip(&self.intercepts) {
            writeln!(out, "intercept@{tau},{b},").unwrap();
        }
        for (j, (name, b)) in self.covariates.iter().zip(&self.coefficients).enumerate() {
            let pilot = self.pilot.as_ref().map_or_else(String::new, |p| p[j].to_string());
            writeln!(out, "{},{b},{pilot}", csv_field(name)).unwrap();
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
