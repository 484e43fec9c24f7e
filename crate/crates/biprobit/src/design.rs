//! Model specification and numeric design assembly.
//!
//! A `ModelSpec` names the two binary responses, the predictors of each
//! equation (linear terms and spline smooths), and the instrument columns.
//! `build_design` validates the exclusion restrictions, applies listwise
//! deletion, and produces the dense matrices the likelihood consumes.

use crate::copula::Copula;
use crate::error::{Error, Result};
use crate::spline::SplineBasis;
use crate::table::PanelTable;
use nalgebra::DMatrix;

pub const DEFAULT_BASIS_DIM: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothDecl {
    pub column: String,
    pub basis_dim: usize,
}

/// One entry of a predictor list: a plain column or `spline(column, dim)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Linear(String),
    Smooth(SmoothDecl),
}

/// Parse a predictor term. `spline(x)` uses the default basis dimension;
/// `spline(x, 12)` overrides it.
pub fn parse_term(raw: &str) -> Result<Term> {
    let s = raw.trim();
    if let Some(rest) = s.strip_prefix("spline(") {
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::Config(format!("unterminated smooth term `{s}`")))?;
        let mut parts = inner.splitn(2, ',');
        let column = parts.next().unwrap_or("").trim().to_string();
        if column.is_empty() {
            return Err(Error::Config(format!("smooth term `{s}` names no column")));
        }
        let basis_dim = match parts.next() {
            Some(d) => d
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad basis dimension in `{s}`")))?,
            None => DEFAULT_BASIS_DIM,
        };
        Ok(Term::Smooth(SmoothDecl { column, basis_dim }))
    } else if s.is_empty() {
        Err(Error::Config("empty predictor term".into()))
    } else {
        Ok(Term::Linear(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    /// Binary treatment column (response of equation 1, endogenous
    /// regressor of equation 2).
    pub treatment: String,
    /// Binary outcome column (response of equation 2).
    pub outcome: String,
    pub eq1_linear: Vec<String>,
    pub eq2_linear: Vec<String>,
    pub eq1_smooths: Vec<SmoothDecl>,
    pub eq2_smooths: Vec<SmoothDecl>,
    /// Instrument columns: must appear among eq1 predictors and nowhere in
    /// equation 2.
    pub instruments: Vec<String>,
    pub copula: Copula,
}

impl ModelSpec {
    pub fn from_terms(
        treatment: &str,
        outcome: &str,
        eq1: &[Term],
        eq2: &[Term],
        instruments: &[String],
        copula: Copula,
    ) -> Result<Self> {
        let mut spec = ModelSpec {
            treatment: treatment.to_string(),
            outcome: outcome.to_string(),
            eq1_linear: Vec::new(),
            eq2_linear: Vec::new(),
            eq1_smooths: Vec::new(),
            eq2_smooths: Vec::new(),
            instruments: instruments.to_vec(),
            copula,
        };
        for t in eq1 {
            match t {
                Term::Linear(c) => spec.eq1_linear.push(c.clone()),
                Term::Smooth(s) => spec.eq1_smooths.push(s.clone()),
            }
        }
        for t in eq2 {
            match t {
                Term::Linear(c) => spec.eq2_linear.push(c.clone()),
                Term::Smooth(s) => spec.eq2_smooths.push(s.clone()),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.treatment == self.outcome {
            return Err(Error::Config("treatment and outcome must differ".into()));
        }
        let eq1_cols: Vec<&String> = self
            .eq1_linear
            .iter()
            .chain(self.eq1_smooths.iter().map(|s| &s.column))
            .collect();
        let eq2_cols: Vec<&String> = self
            .eq2_linear
            .iter()
            .chain(self.eq2_smooths.iter().map(|s| &s.column))
            .collect();
        for (label, cols) in [("equation 1", &eq1_cols), ("equation 2", &eq2_cols)] {
            let mut seen = std::collections::HashSet::new();
            for c in cols {
                if !seen.insert(c.as_str()) {
                    return Err(Error::Config(format!("duplicate predictor `{c}` in {label}")));
                }
            }
        }
        // The treatment is a response in eq1 and enters eq2 only through its
        // own coefficient; the outcome is never a predictor.
        for c in eq1_cols.iter().chain(eq2_cols.iter()) {
            if **c == self.treatment {
                return Err(Error::Config(format!(
                    "treatment `{}` must not be listed as a predictor",
                    self.treatment
                )));
            }
            if **c == self.outcome {
                return Err(Error::Config(format!(
                    "outcome `{}` must not be listed as a predictor",
                    self.outcome
                )));
            }
        }
        // Exclusion restriction: instruments sit in eq1 and only eq1.
        for z in &self.instruments {
            if !eq1_cols.iter().any(|c| *c == z) {
                return Err(Error::Config(format!(
                    "instrument `{z}` is not an equation-1 predictor"
                )));
            }
            if eq2_cols.iter().any(|c| *c == z) {
                return Err(Error::Config(format!(
                    "instrument `{z}` violates the exclusion restriction (appears in equation 2)"
                )));
            }
        }
        Ok(())
    }

    /// All data columns the spec touches, responses first.
    pub fn required_columns(&self) -> Vec<String> {
        let mut cols = vec![self.treatment.clone(), self.outcome.clone()];
        for c in self
            .eq1_linear
            .iter()
            .chain(self.eq1_smooths.iter().map(|s| &s.column))
            .chain(self.eq2_linear.iter())
            .chain(self.eq2_smooths.iter().map(|s| &s.column))
        {
            if !cols.contains(c) {
                cols.push(c.clone());
            }
        }
        cols
    }
}

/// A fitted smooth's place inside one equation's design matrix.
#[derive(Debug, Clone)]
pub struct SmoothBlock {
    pub column: String,
    pub basis: SplineBasis,
    /// First design column of the block.
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone)]
pub struct EquationDesign {
    /// Coefficient names: "(intercept)", linear columns, then "s(col).k".
    pub names: Vec<String>,
    pub linear_cols: Vec<String>,
    pub x: DMatrix<f64>,
    pub smooths: Vec<SmoothBlock>,
}

impl EquationDesign {
    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }
}

/// Numeric design for the two-equation model on a fixed set of rows.
#[derive(Debug, Clone)]
pub struct JointDesign {
    pub treatment: String,
    pub outcome: String,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub eq1: EquationDesign,
    pub eq2: EquationDesign,
    /// Original table row indices retained after listwise deletion.
    pub rows_used: Vec<usize>,
    pub n_dropped: usize,
}

fn build_equation(
    table: &PanelTable,
    rows: &[usize],
    linear: &[String],
    smooths: &[SmoothDecl],
) -> Result<EquationDesign> {
    let n = rows.len();
    let mut names = vec!["(intercept)".to_string()];
    names.extend(linear.iter().cloned());
    let mut blocks = Vec::with_capacity(smooths.len());
    let mut p = 1 + linear.len();
    let mut bases = Vec::with_capacity(smooths.len());
    for decl in smooths {
        let col = table.column(&decl.column)?;
        let values: Vec<f64> = rows.iter().map(|&i| col[i]).collect();
        let basis = SplineBasis::build(&values, decl.basis_dim)?;
        let len = basis.n_cols();
        for k in 1..=len {
            names.push(format!("s({}).{k}", decl.column));
        }
        blocks.push(SmoothBlock { column: decl.column.clone(), basis, start: p, len });
        p += len;
        bases.push(());
    }
    let _ = bases;
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        x[(i, 0)] = 1.0;
    }
    for (j, name) in linear.iter().enumerate() {
        let col = table.column(name)?;
        for (i, &r) in rows.iter().enumerate() {
            x[(i, j + 1)] = col[r];
        }
    }
    for block in &blocks {
        let col = table.column(&block.column)?;
        for (i, &r) in rows.iter().enumerate() {
            let row = block.basis.row(col[r]);
            for k in 0..block.len {
                x[(i, block.start + k)] = row[k];
            }
        }
    }
    Ok(EquationDesign { names, linear_cols: linear.to_vec(), x, smooths: blocks })
}

/// Assemble the joint design: listwise deletion over every referenced
/// column, binary validation of both responses, spline bases trained on the
/// retained rows.
pub fn build_design(table: &PanelTable, spec: &ModelSpec) -> Result<JointDesign> {
    spec.validate()?;
    let required = spec.required_columns();
    let refs: Vec<&str> = required.iter().map(|s| s.as_str()).collect();
    let rows = table.complete_rows(&refs)?;
    if rows.is_empty() {
        return Err(Error::Degenerate("no complete rows after listwise deletion".into()));
    }
    table.require_binary(&spec.treatment, &rows)?;
    table.require_binary(&spec.outcome, &rows)?;
    let y1: Vec<f64> = {
        let c = table.column(&spec.treatment)?;
        rows.iter().map(|&i| c[i]).collect()
    };
    let y2: Vec<f64> = {
        let c = table.column(&spec.outcome)?;
        rows.iter().map(|&i| c[i]).collect()
    };
    let eq1 = build_equation(table, &rows, &spec.eq1_linear, &spec.eq1_smooths)?;
    let eq2 = build_equation(table, &rows, &spec.eq2_linear, &spec.eq2_smooths)?;
    let n_dropped = table.n_rows() - rows.len();
    Ok(JointDesign {
        treatment: spec.treatment.clone(),
        outcome: spec.outcome.clone(),
        y1,
        y2,
        eq1,
        eq2,
        rows_used: rows,
        n_dropped,
    })
}

fn project_equation(
    template: &EquationDesign,
    table: &PanelTable,
    rows: &[usize],
) -> Result<EquationDesign> {
    let n = rows.len();
    let p = template.n_cols();
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        x[(i, 0)] = 1.0;
    }
    for (j, name) in template.linear_cols.iter().enumerate() {
        let col = table.column(name)?;
        for (i, &r) in rows.iter().enumerate() {
            x[(i, j + 1)] = col[r];
        }
    }
    for block in &template.smooths {
        let col = table.column(&block.column)?;
        for (i, &r) in rows.iter().enumerate() {
            let row = block.basis.row(col[r]);
            for k in 0..block.len {
                x[(i, block.start + k)] = row[k];
            }
        }
    }
    Ok(EquationDesign {
        names: template.names.clone(),
        linear_cols: template.linear_cols.clone(),
        x,
        smooths: template.smooths.clone(),
    })
}

impl JointDesign {
    pub fn n_rows(&self) -> usize {
        self.y1.len()
    }

    /// Total free-parameter count: both coefficient blocks plus the
    /// treatment coefficient and the dependence parameter.
    pub fn n_params(&self) -> usize {
        self.eq1.n_cols() + self.eq2.n_cols() + 2
    }

    pub fn gamma_index(&self) -> usize {
        self.eq1.n_cols() + self.eq2.n_cols()
    }

    pub fn theta_index(&self) -> usize {
        self.gamma_index() + 1
    }

    /// Flat coefficient names matching the parameter layout
    /// [beta1 | beta2 | gamma | theta].
    pub fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> =
            self.eq1.names.iter().map(|n| format!("eq1:{n}")).collect();
        names.extend(self.eq2.names.iter().map(|n| format!("eq2:{n}")));
        names.push(format!("gamma:{}", self.treatment));
        names.push("theta".to_string());
        names
    }

    /// Rebuild the design on a different row set of the same table, reusing
    /// the trained spline bases (test rows beyond the training range
    /// extrapolate linearly). Rows with missing values are dropped and
    /// counted.
    pub fn project(&self, table: &PanelTable, rows: &[usize]) -> Result<JointDesign> {
        let mut required: Vec<String> = vec![self.treatment.clone(), self.outcome.clone()];
        for eq in [&self.eq1, &self.eq2] {
            for c in eq.linear_cols.iter().chain(eq.smooths.iter().map(|b| &b.column)) {
                if !required.contains(c) {
                    required.push(c.clone());
                }
            }
        }
        let cols: Vec<&[f64]> = required
            .iter()
            .map(|c| table.column(c))
            .collect::<Result<_>>()?;
        let mut kept = Vec::with_capacity(rows.len());
        for &r in rows {
            if r >= table.n_rows() {
                return Err(Error::InvalidArgument(format!("row index {r} out of range")));
            }
            if cols.iter().all(|c| c[r].is_finite()) {
                kept.push(r);
            }
        }
        if kept.is_empty() {
            return Err(Error::Degenerate("no complete rows in projection".into()));
        }
        table.require_binary(&self.treatment, &kept)?;
        table.require_binary(&self.outcome, &kept)?;
        let y1 = {
            let c = table.column(&self.treatment)?;
            kept.iter().map(|&i| c[i]).collect()
        };
        let y2 = {
            let c = table.column(&self.outcome)?;
            kept.iter().map(|&i| c[i]).collect()
        };
        Ok(JointDesign {
            treatment: self.treatment.clone(),
            outcome: self.outcome.clone(),
            y1,
            y2,
            eq1: project_equation(&self.eq1, table, &kept)?,
            eq2: project_equation(&self.eq2, table, &kept)?,
            n_dropped: rows.len() - kept.len(),
            rows_used: kept,
        })
    }
}
