//! Command orchestration: each subcommand reads the run configuration,
//! executes one pipeline stage, and writes its artifacts plus a manifest
//! into the output directory.

use crate::config::{PrepStep, RunConfig};
use crate::datasim::generate;
use crate::effects::ate;
use crate::error::{Error, Result};
use crate::estimate::{
    fit_baseline_design, fit_design, instrument_strength_test,
};
use crate::eval::{compare_models, select_copula};
use crate::design::build_design;
use crate::plot::{pr_curves_svg, selection_bars_svg, sensitivity_ate_svg, sensitivity_z_svg};
use crate::report::{
    comparison_curves_csv, selection_to_csv, sensitivity_to_csv, to_json_string, write_text,
    FitSummary, Manifest,
};
use crate::table::{first_difference, time_since_event, PanelTable};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fit,
    Baseline,
    SelectCopula,
    Ate,
    Sensitivity,
    Compare,
    Simulate,
    IvTest,
    Prep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fit => "fit",
            Command::Baseline => "baseline",
            Command::SelectCopula => "select-copula",
            Command::Ate => "ate",
            Command::Sensitivity => "sensitivity",
            Command::Compare => "compare",
            Command::Simulate => "simulate",
            Command::IvTest => "iv-test",
            Command::Prep => "prep",
        }
    }
}

/// Collects artifacts under the output directory and records them in the
/// manifest as they are written.
struct Emitter {
    dir: PathBuf,
    manifest: Manifest,
}

impl Emitter {
    fn new(command: Command, config: &RunConfig) -> Result<Self> {
        let dir = PathBuf::from(&config.data.output_dir);
        std::fs::create_dir_all(&dir)
            .map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
        Ok(Self { dir, manifest: Manifest::new(command.name(), config.to_toml_string()) })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn emit_text(&mut self, name: &str, text: &str) -> Result<()> {
        write_text(self.path(name), text)?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    fn emit_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = to_json_string(value)?;
        self.emit_text(name, &text)
    }

    fn emit_table(&mut self, name: &str, table: &PanelTable) -> Result<()> {
        table.write_csv(&self.path(name))?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    /// Write the manifest itself (always the last artifact) and finish.
    fn finish(mut self) -> Result<Manifest> {
        let path = self.path("manifest.json");
        self.manifest.outputs.push("manifest.json".to_string());
        let text = to_json_string(&self.manifest)?;
        write_text(path, &text)?;
        Ok(self.manifest)
    }
}

fn load_table(config: &RunConfig, emitter: &mut Emitter) -> Result<PanelTable> {
    let table = PanelTable::read_csv(Path::new(&config.data.path))?;
    emitter.manifest.data_path = Some(config.data.path.clone());
    emitter.manifest.n_rows_input = Some(table.n_rows());
    Ok(table)
}

/// Execute one subcommand under the given configuration. Artifacts land in
/// `config.data.output_dir`; re-running writes identical bytes except the
/// manifest timestamp.
pub fn run(command: Command, config: &RunConfig) -> Result<Manifest> {
    let mut emitter = Emitter::new(command, config)?;
    match command {
        Command::Fit => {
            let table = load_table(config, &mut emitter)?;
            let spec = config.model_spec()?;
            let design = build_design(&table, &spec)?;
            let fit = fit_design(&design, &spec.copula, &config.fit_options())?;
            emitter.emit_json("fit.json", &FitSummary::from_fit(&fit))?;
        }
        Command::Baseline => {
            let table = load_table(config, &mut emitter)?;
            let spec = config.model_spec()?;
            let design = build_design(&table, &spec)?;
            let fit = fit_baseline_design(&design, &config.fit_options())?;
            emitter.emit_json("baseline.json", &FitSummary::from_fit(&fit))?;
        }
        Command::SelectCopula => {
            let table = load_table(config, &mut emitter)?;
            let spec = config.model_spec()?;
            let split = config.split_plan(&table)?;
            let report = select_copula(
                &table,
                &spec,
                &config.copula_codes(),
                &split,
                &config.fit_options(),
                config.model.prediction,
            )?;
            emitter.emit_json("selection.json", &report)?;
            emitter.emit_text("selection.csv", &selection_to_csv(&report))?;
            emitter.emit_text("selection.svg", &selection_bars_svg(&report))?;
        }
        Command::Ate => {
            let table = load_table(config, &mut emitter)?;
            let spec = config.model_spec()?;
            let design = build_design(&table, &spec)?;
            let fit = fit_design(&design, &spec.copula, &config.fit_options())?;
            let result = ate(&fit, &design, &config.ate_options())?;
            emitter.emit_json("ate.json", &result)?;
        }
        Command::Sensitivity => {
            let table = load_table(config, &mut emitter)?;
            let spec = config.model_spec()?;
            let report = copula_sensitivity_cmd(config, &table, &spec)?;
            emitter.emit_json("sensitivity.json", &report)?;
            emitter.emit_text("sensitivity.csv", &sensitivity_to_csv(&report))?;
            emitter.emit_text("sensitivity_z.svg", &sensitivity_z_svg(&report))?;
            emitter.emit_text("sensitivity_ate.svg", &sensitivity_ate_svg(&report))?;
        }
        Command::Compare => {
            let table = load_table(config, &mut emitter)?;
            let spec = config.model_spec()?;
            let split = config.split_plan(&table)?;
            let report = compare_models(
                &table,
                &spec,
                &split,
                &config.fit_options(),
                config.model.prediction,
            )?;
            emitter.emit_json("compare.json", &report)?;
            emitter.emit_text("pr_curves.csv", &comparison_curves_csv(&report))?;
            let svg = pr_curves_svg(
                &[
                    ("joint (out-of-sample)", &report.joint_out_sample),
                    ("baseline (out-of-sample)", &report.baseline_out_sample),
                ],
                "Out-of-sample precision\u{2013}recall",
            );
            emitter.emit_text("compare.svg", &svg)?;
        }
        Command::Simulate => {
            let dgp = config.dgp_spec()?;
            let (table, truth) = generate(&dgp)?;
            emitter.emit_table("data.csv", &table)?;
            emitter.emit_json("truth.json", &truth)?;
        }
        Command::IvTest => {
            let table = load_table(config, &mut emitter)?;
            let spec = config.model_spec()?;
            let test = instrument_strength_test(&table, &spec)?;
            emitter.emit_json("iv_test.json", &test)?;
        }
        Command::Prep => {
            let table = load_table(config, &mut emitter)?;
            let prepared = run_prep(&table, &config.prep)?;
            emitter.emit_table("prepared.csv", &prepared)?;
        }
    }
    emitter.finish()
}

fn copula_sensitivity_cmd(
    config: &RunConfig,
    table: &PanelTable,
    spec: &crate::design::ModelSpec,
) -> Result<crate::effects::SensitivityReport> {
    crate::effects::copula_sensitivity(
        table,
        spec,
        &config.copula_codes(),
        &config.fit_options(),
        &config.ate_options(),
    )
}

/// Apply the configured pre-processing steps in order, each appending one
/// derived column to the panel.
pub fn run_prep(table: &PanelTable, steps: &[PrepStep]) -> Result<PanelTable> {
    if steps.is_empty() {
        return Err(Error::Config("prep: no [[prep]] steps configured".into()));
    }
    let mut out = table.clone();
    for step in steps {
        match step {
            PrepStep::FirstDifference { group, time, value, output } => {
                let col = first_difference(&out, group, time, value)?;
                out.push_column(output, col)?;
            }
            PrepStep::TimeSinceEvent { group, time, event, output } => {
                let col = time_since_event(&out, group, time, event)?;
                out.push_column(output, col)?;
            }
        }
    }
    Ok(out)
}
