//! Result serialization: JSON documents with a stable field layout, CSV
//! exports of plot data, and the run manifest.

use crate::effects::SensitivityReport;
use crate::error::{Error, Result};
use crate::estimate::FitResult;
use crate::eval::{ComparisonReport, PrCurve, SelectionReport};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// JSON has no NaN: undefined diagnostics serialize as null and read back
/// as NaN, keeping the schema stable across degenerate fits.
mod nan_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// A fitted model flattened for serialization: coefficient table first,
/// then the fit diagnostics. Field order is part of the output contract.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSummary {
    /// Copula code, or null for the single-equation baseline.
    pub copula: Option<String>,
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    /// Null where the covariance diagonal is unusable.
    pub std_errors: Vec<Option<f64>>,
    pub z: Vec<Option<f64>>,
    pub gamma: Option<f64>,
    pub gamma_z: Option<f64>,
    /// Dependence parameter on its natural scale.
    pub theta: Option<f64>,
    pub loglik: f64,
    #[serde(with = "nan_null")]
    pub aic: f64,
    #[serde(with = "nan_null")]
    pub edf: f64,
    pub iterations: usize,
    #[serde(with = "nan_null")]
    pub max_abs_gradient: f64,
    pub converged: bool,
    pub info_positive_definite: bool,
    pub lambdas: Vec<f64>,
    pub n_rows: usize,
    pub n_dropped: usize,
}

impl FitSummary {
    pub fn from_fit(fit: &FitResult) -> Self {
        Self {
            copula: fit.copula.as_ref().map(|c| c.code()),
            names: fit.names.clone(),
            estimates: fit.params.clone(),
            std_errors: fit.std_errors().iter().map(|&s| s.is_finite().then_some(s)).collect(),
            z: fit.z_statistics(),
            gamma: fit.gamma(),
            gamma_z: fit.gamma_z(),
            theta: fit.theta(),
            loglik: fit.loglik,
            aic: fit.aic,
            edf: fit.edf,
            iterations: fit.iterations,
            max_abs_gradient: fit.max_abs_gradient,
            converged: fit.converged,
            info_positive_definite: fit.info_positive_definite,
            lambdas: fit.lambdas.clone(),
            n_rows: fit.n_rows,
            n_dropped: fit.n_dropped,
        }
    }
}

/// Record of one command run: what ran, on what, with which settings, and
/// what it produced. Everything except `timestamp` is deterministic, and
/// the embedded config is enough to reproduce the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub crate_name: String,
    pub crate_version: String,
    pub data_path: Option<String>,
    pub n_rows_input: Option<usize>,
    pub outputs: Vec<String>,
    /// Full TOML text of the configuration that drove the run.
    pub config: String,
    /// Seconds since the Unix epoch; excluded from determinism comparisons.
    pub timestamp: u64,
}

impl Manifest {
    pub fn new(command: &str, config_toml: String) -> Self {
        Self {
            command: command.to_string(),
            crate_name: env!("CARGO_PKG_NAME").to_string(),
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            data_path: None,
            n_rows_input: None,
            outputs: Vec::new(),
            config: config_toml,
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// Serialize as pretty JSON with a trailing newline (struct field order is
/// preserved, so layouts are stable across runs).
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json_string(value)?)
        .map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text)
        .map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else {
        "NA".to_string()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_else(|| "NA".to_string())
}

fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per copula spec: dependence, endogeneity z, treatment effect.
pub fn sensitivity_to_csv(report: &SensitivityReport) -> String {
    let mut out = String::from(
        "copula,converged,info_positive_definite,gamma,gamma_se,gamma_z,theta,loglik,aic,\
         ate,ate_lower,ate_upper,error\n",
    );
    for row in &report.rows {
        let (ate, lo, hi) = match &row.ate {
            Some(a) => (Some(a.point), Some(a.ci_lower), Some(a.ci_upper)),
            None => (None, None, None),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.code,
            row.converged,
            row.info_positive_definite,
            fmt_opt(row.gamma),
            fmt_opt(row.gamma_se),
            fmt_opt(row.gamma_z),
            fmt_opt(row.theta),
            fmt_opt(row.loglik),
            fmt_opt(row.aic),
            fmt_opt(ate),
            fmt_opt(lo),
            fmt_opt(hi),
            csv_quote(row.error.as_deref().unwrap_or("")),
        ));
    }
    out
}

/// Ranked table from the out-of-sample selection harness, best first.
pub fn selection_to_csv(report: &SelectionReport) -> String {
    let mut out = String::from(
        "rank,copula,converged,info_positive_definite,pr_auc,theta,loglik,error\n",
    );
    for (i, row) in report.rows.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            i + 1,
            row.code,
            row.converged,
            row.info_positive_definite,
            fmt_opt(row.pr_auc),
            fmt_opt(row.theta),
            fmt_opt(row.loglik),
            csv_quote(row.error.as_deref().unwrap_or("")),
        ));
    }
    out
}

/// Stack labeled precision–recall curves into one long table.
pub fn pr_curves_to_csv(curves: &[(&str, &PrCurve)]) -> String {
    let mut out = String::from("model,threshold,recall,precision\n");
    for (label, curve) in curves {
        for i in 0..curve.thresholds.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                csv_quote(label),
                fmt_f64(curve.thresholds[i]),
                fmt_f64(curve.recall[i]),
                fmt_f64(curve.precision[i]),
            ));
        }
    }
    out
}

pub fn comparison_curves_csv(report: &ComparisonReport) -> String {
    pr_curves_to_csv(&[
        ("joint_in_sample", &report.joint_in_sample),
        ("joint_out_sample", &report.joint_out_sample),
        ("baseline_in_sample", &report.baseline_in_sample),
        ("baseline_out_sample", &report.baseline_out_sample),
    ])
}
