//! Run configuration: one TOML file drives every subcommand.

use crate::copula::{Copula, ALL_CODES};
use crate::datasim::DgpSpec;
use crate::design::{parse_term, ModelSpec, Term};
use crate::effects::AteOptions;
use crate::error::{Error, Result};
use crate::estimate::FitOptions;
use crate::eval::{make_group_split, make_split, SplitPlan, DEFAULT_TRAIN_FRACTION};
use crate::model::PredictionMode;
use crate::table::PanelTable;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    pub model: ModelSection,
    pub fit: FitSection,
    pub split: SplitSection,
    pub effects: EffectsSection,
    pub simulate: SimulateSection,
    /// Pre-processing steps applied by the `prep` subcommand, in order.
    pub prep: Vec<PrepStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// Input CSV (ignored by `simulate`, which writes its own panel).
    pub path: String,
    /// Directory all artifacts land in.
    pub output_dir: String,
}

impl Default for DataSection {
    fn default() -> Self {
        Self { path: "data.csv".into(), output_dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub treatment: String,
    pub outcome: String,
    /// Treatment-equation terms: plain column names or "spline(col, dim)".
    pub eq1: Vec<String>,
    /// Outcome-equation terms (the treatment itself is added automatically).
    pub eq2: Vec<String>,
    /// Instrument columns; must appear in eq1 and never in eq2.
    pub instruments: Vec<String>,
    /// Copula code for single-copula commands (fit, ate, compare).
    pub copula: String,
    /// Candidate list for select-copula and sensitivity; empty = full catalog.
    pub copulas: Vec<String>,
    /// Degrees of freedom for the "T" spec.
    pub t_df: u32,
    /// Outcome score used when ranking models: "conditional" or "marginal".
    pub prediction: PredictionMode,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            treatment: "treat".into(),
            outcome: "event".into(),
            eq1: Vec::new(),
            eq2: Vec::new(),
            instruments: Vec::new(),
            copula: "N".into(),
            copulas: Vec::new(),
            t_df: 3,
            prediction: PredictionMode::Conditional,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Fixed roughness weights, one per smooth term; omit to select by AIC.
    pub lambdas: Option<Vec<f64>>,
}

impl Default for FitSection {
    fn default() -> Self {
        let o = FitOptions::default();
        Self {
            max_iterations: o.max_iterations,
            gradient_tolerance: o.gradient_tolerance,
            lambdas: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub seed: u64,
    pub train_fraction: f64,
    /// When set, whole groups are assigned to one side of the split.
    pub group_column: Option<String>,
}

impl Default for SplitSection {
    fn default() -> Self {
        Self { seed: 1, train_fraction: DEFAULT_TRAIN_FRACTION, group_column: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EffectsSection {
    pub n_sims: usize,
    pub alpha: f64,
    pub seed: u64,
    pub treated_only: bool,
}

impl Default for EffectsSection {
    fn default() -> Self {
        let o = AteOptions::default();
        Self { n_sims: o.n_sims, alpha: o.alpha, seed: o.seed, treated_only: o.treated_only }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub n_rows: usize,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub gamma: f64,
    /// Copula code of the true dependence structure.
    pub copula: String,
    /// Natural-scale dependence parameter (e.g. a correlation for "N").
    pub theta: f64,
    pub t_df: u32,
    pub instrument_strength: f64,
    pub confounder_strength: f64,
    pub nonlinear_amplitude: f64,
    pub seed: u64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        let d = DgpSpec::default_scenario();
        Self {
            n_rows: d.n_rows,
            beta1: d.beta1_true.clone(),
            beta2: d.beta2_true.clone(),
            gamma: d.gamma_true,
            copula: d.copula_true.code(),
            theta: d.copula_true.theta(),
            t_df: 3,
            instrument_strength: d.instrument_strength,
            confounder_strength: d.confounder_strength,
            nonlinear_amplitude: d.nonlinear_amplitude,
            seed: d.seed,
        }
    }
}

/// One pre-processing operation for the `prep` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "op")]
pub enum PrepStep {
    /// value_t − value_{t−1} within each group; first observation missing.
    FirstDifference { group: String, time: String, value: String, output: String },
    /// Periods since the last event within each group (clock restarts after
    /// an event; counts from the group's first observation before one).
    TimeSinceEvent { group: String, time: String, event: String, output: String },
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    fn validate(&self) -> Result<()> {
        Copula::from_code(&self.model.copula, 0.0)?;
        for code in &self.model.copulas {
            Copula::from_code(code, 0.0)?;
        }
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "split.train_fraction must lie strictly between 0 and 1, got {}",
                self.split.train_fraction
            )));
        }
        if !(self.effects.alpha > 0.0 && self.effects.alpha < 1.0) {
            return Err(Error::Config(format!(
                "effects.alpha must lie strictly between 0 and 1, got {}",
                self.effects.alpha
            )));
        }
        if self.effects.n_sims < 2 {
            return Err(Error::Config("effects.n_sims must be at least 2".into()));
        }
        Ok(())
    }

    fn parse_terms(list: &[String]) -> Result<Vec<Term>> {
        list.iter().map(|t| parse_term(t)).collect()
    }

    /// The single copula named by `model.copula`, with the configured t df.
    pub fn copula(&self) -> Result<Copula> {
        Copula::from_code(&self.model.copula, 0.0)?.with_t_df(self.model.t_df)
    }

    /// Candidate codes for sweeps: the configured list, or the full catalog.
    pub fn copula_codes(&self) -> Vec<String> {
        if self.model.copulas.is_empty() {
            ALL_CODES.iter().map(|s| s.to_string()).collect()
        } else {
            self.model.copulas.clone()
        }
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        if self.model.eq1.is_empty() && self.model.instruments.is_empty() {
            return Err(Error::Config(
                "model.eq1 is empty and no instruments are declared; the \
                 treatment equation needs at least the instruments"
                    .into(),
            ));
        }
        ModelSpec::from_terms(
            &self.model.treatment,
            &self.model.outcome,
            &Self::parse_terms(&self.model.eq1)?,
            &Self::parse_terms(&self.model.eq2)?,
            &self.model.instruments,
            self.copula()?,
        )
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            max_iterations: self.fit.max_iterations,
            gradient_tolerance: self.fit.gradient_tolerance,
            lambdas: self.fit.lambdas.clone(),
        }
    }

    pub fn ate_options(&self) -> AteOptions {
        AteOptions {
            n_sims: self.effects.n_sims,
            alpha: self.effects.alpha,
            seed: self.effects.seed,
            treated_only: self.effects.treated_only,
        }
    }

    /// Build the train/test plan for `table`, by rows or by groups.
    pub fn split_plan(&self, table: &PanelTable) -> Result<SplitPlan> {
        match &self.split.group_column {
            Some(col) => {
                let groups = table.column(col)?;
                make_group_split(groups, self.split.seed, self.split.train_fraction)
            }
            None => make_split(table.n_rows(), self.split.seed, self.split.train_fraction),
        }
    }

    pub fn dgp_spec(&self) -> Result<DgpSpec> {
        let s = &self.simulate;
        let shell = Copula::from_code(&s.copula, 0.0)?;
        let copula_true =
            Copula::from_natural(shell.family, shell.rotation, s.theta)?.with_t_df(s.t_df)?;
        let dgp = DgpSpec {
            n_rows: s.n_rows,
            beta1_true: s.beta1.clone(),
            beta2_true: s.beta2.clone(),
            gamma_true: s.gamma,
            copula_true,
            instrument_strength: s.instrument_strength,
            confounder_strength: s.confounder_strength,
            nonlinear_amplitude: s.nonlinear_amplitude,
            seed: s.seed,
        };
        dgp.validate()?;
        Ok(dgp)
    }
}
