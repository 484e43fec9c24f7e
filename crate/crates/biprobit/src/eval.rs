//! Precision–recall evaluation, train/test splits, and the out-of-sample
//! copula selection harness.

use crate::copula::Copula;
use crate::design::{build_design, ModelSpec};
use crate::error::{Error, Result};
use crate::estimate::{fit_baseline_design, fit_design, FitOptions, FitResult};
use crate::model::{predict_outcome, PredictionMode};
use crate::table::PanelTable;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A precision–recall curve over the distinct score thresholds, descending.
/// Tied scores collapse into a single threshold so the curve does not depend
/// on input order. The area uses step-wise integration (precision held over
/// each recall increment) — trapezoids would overstate PR area.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrCurve {
    pub thresholds: Vec<f64>,
    pub recall: Vec<f64>,
    pub precision: Vec<f64>,
    pub auc: f64,
    pub n_positives: usize,
    pub n_total: usize,
}

pub fn pr_curve(scores: &[f64], labels: &[f64]) -> Result<PrCurve> {
    if scores.len() != labels.len() || scores.is_empty() {
        return Err(Error::InvalidArgument(
            "scores and labels must be nonempty and equally long".into(),
        ));
    }
    if let Some(bad) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument(format!("score at index {bad} is not finite")));
    }
    if let Some(bad) = labels.iter().position(|&l| l != 0.0 && l != 1.0) {
        return Err(Error::NotBinary {
            column: "labels".into(),
            row: bad,
            value: labels[bad],
        });
    }
    let n_positives = labels.iter().filter(|&&l| l == 1.0).count();
    if n_positives == 0 {
        return Err(Error::Degenerate("no positive labels: precision is undefined".into()));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));

    let mut thresholds = Vec::new();
    let mut recall = Vec::new();
    let mut precision = Vec::new();
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut auc = 0.0;
    let mut prev_recall = 0.0;
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        // Consume the whole tie group at this threshold.
        while i < order.len() && scores[order[i]] == t {
            if labels[order[i]] == 1.0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let r = tp as f64 / n_positives as f64;
        let p = tp as f64 / (tp + fp) as f64;
        thresholds.push(t);
        recall.push(r);
        precision.push(p);
        auc += (r - prev_recall) * p;
        prev_recall = r;
    }
    Ok(PrCurve { thresholds, recall, precision, auc, n_positives, n_total: scores.len() })
}

impl PrCurve {
    /// Re-integrate the stored points; equals `auc` to float accuracy.
    pub fn integrate(&self) -> f64 {
        let mut total = 0.0;
        let mut prev = 0.0;
        for (r, p) in self.recall.iter().zip(&self.precision) {
            total += (r - prev) * p;
            prev = *r;
        }
        total
    }
}

/// A single train/test partition of row indices (the harness deliberately
/// uses one split, not folds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub train_fraction: f64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.70;

/// Uniform random split: permute rows under the seed, first ⌈fraction·n⌉
/// indices train. Both sides are returned sorted.
pub fn make_split(n_rows: usize, seed: u64, fraction: f64) -> Result<SplitPlan> {
    if n_rows < 2 {
        return Err(Error::InvalidArgument("need at least 2 rows to split".into()));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie strictly between 0 and 1, got {fraction}"
        )));
    }
    let n_train = (fraction * n_rows as f64).ceil() as usize;
    if n_train == 0 || n_train >= n_rows {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} leaves an empty side of the split at n = {n_rows}"
        )));
    }
    let mut perm: Vec<usize> = (0..n_rows).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perm.shuffle(&mut rng);
    let mut train: Vec<usize> = perm[..n_train].to_vec();
    let mut test: Vec<usize> = perm[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan { seed, train_fraction: fraction, train, test })
}

/// Split by groups: every row of a group lands on the same side. Groups are
/// permuted under the seed and assigned to train until it holds at least
/// ⌈fraction·n⌉ rows.
pub fn make_group_split(groups: &[f64], seed: u64, fraction: f64) -> Result<SplitPlan> {
    let n_rows = groups.len();
    if n_rows < 2 {
        return Err(Error::InvalidArgument("need at least 2 rows to split".into()));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie strictly between 0 and 1, got {fraction}"
        )));
    }
    if groups.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidArgument("group labels must not be missing".into()));
    }
    let mut by_group: std::collections::BTreeMap<u64, Vec<usize>> =
        std::collections::BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        by_group.entry(g.to_bits()).or_default().push(i);
    }
    if by_group.len() < 2 {
        return Err(Error::Degenerate("need at least 2 groups for a group split".into()));
    }
    let mut keys: Vec<u64> = by_group.keys().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    keys.shuffle(&mut rng);
    let target = (fraction * n_rows as f64).ceil() as usize;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for key in keys {
        let rows = &by_group[&key];
        if train.len() < target {
            train.extend_from_slice(rows);
        } else {
            test.extend_from_slice(rows);
        }
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::Degenerate(
            "group sizes leave one side of the split empty".into(),
        ));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan { seed, train_fraction: fraction, train, test })
}

/// One copula's record in the selection harness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionRow {
    pub code: String,
    pub converged: bool,
    pub info_positive_definite: bool,
    /// Out-of-sample PR-AUC of the conditional outcome predictions.
    pub pr_auc: Option<f64>,
    pub theta: Option<f64>,
    pub loglik: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionReport {
    /// Ranked best-first: converged fits by PR-AUC descending, then
    /// non-converged fits by PR-AUC, then outright failures.
    pub rows: Vec<SelectionRow>,
    pub winner: String,
    pub n_train: usize,
    pub n_test: usize,
    pub split_seed: u64,
    pub train_fraction: f64,
}

fn rank_selection_rows(rows: &mut [SelectionRow]) {
    rows.sort_by(|a, b| {
        let rank = |r: &SelectionRow| match (r.converged, r.pr_auc.is_some()) {
            (true, true) => 0,
            (false, true) => 1,
            _ => 2,
        };
        rank(a)
            .cmp(&rank(b))
            .then_with(|| match (a.pr_auc, b.pr_auc) {
                (Some(x), Some(y)) => y.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Equal),
                _ => std::cmp::Ordering::Equal,
            })
            .then_with(|| a.code.cmp(&b.code))
    });
}

/// Fit every candidate copula on the training rows, score outcome
/// predictions on the held-out rows, and rank by out-of-sample PR-AUC.
/// The same split serves every candidate; per-copula failures are recorded
/// and ranked last rather than aborting the sweep.
pub fn select_copula(
    table: &PanelTable,
    spec_template: &ModelSpec,
    codes: &[String],
    split: &SplitPlan,
    options: &FitOptions,
    mode: PredictionMode,
) -> Result<SelectionReport> {
    if codes.is_empty() {
        return Err(Error::InvalidArgument("copula list must not be empty".into()));
    }
    let train_table = table.subset(&split.train)?;
    let design_train = build_design(&train_table, spec_template)?;
    let design_test = design_train.project(table, &split.test)?;
    let y2_test = design_test.y2.clone();

    let mut rows = Vec::with_capacity(codes.len());
    for code in codes {
        let mut row = SelectionRow {
            code: code.clone(),
            converged: false,
            info_positive_definite: false,
            pr_auc: None,
            theta: None,
            loglik: None,
            error: None,
        };
        let attempt = || -> Result<(FitResult, f64)> {
            let copula = Copula::from_code(code, 0.0)?;
            let fit = fit_design(&design_train, &copula, options)?;
            let scores = predict_outcome(&design_test, &copula, &fit.params, mode)?;
            let curve = pr_curve(&scores, &y2_test)?;
            Ok((fit, curve.auc))
        };
        match attempt() {
            Ok((fit, auc)) => {
                row.converged = fit.converged;
                row.info_positive_definite = fit.info_positive_definite;
                row.pr_auc = Some(auc);
                row.theta = fit.theta();
                row.loglik = Some(fit.loglik);
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        rows.push(row);
    }
    rank_selection_rows(&mut rows);
    Ok(SelectionReport {
        winner: rows[0].code.clone(),
        rows,
        n_train: design_train.n_rows(),
        n_test: design_test.n_rows(),
        split_seed: split.seed,
        train_fraction: split.train_fraction,
    })
}

/// Joint model vs. exogenous baseline on one split: PR curves and areas
/// in-sample and out-of-sample for both, plus percentage improvements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub joint_in_sample: PrCurve,
    pub joint_out_sample: PrCurve,
    pub baseline_in_sample: PrCurve,
    pub baseline_out_sample: PrCurve,
    /// 100·(joint − baseline)/baseline.
    pub improvement_in_sample_pct: f64,
    pub improvement_out_sample_pct: f64,
    pub split_seed: u64,
    pub train_fraction: f64,
}

pub fn improvement_pct(joint_auc: f64, baseline_auc: f64) -> f64 {
    100.0 * (joint_auc - baseline_auc) / baseline_auc
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Baseline outcome scores: logit inverse of the single-equation linear
/// predictor at the observed treatment.
fn baseline_scores(design: &crate::design::JointDesign, fit: &FitResult) -> Vec<f64> {
    let p2 = design.eq2.n_cols();
    (0..design.n_rows())
        .map(|i| {
            let mut e = 0.0;
            for j in 0..p2 {
                e += design.eq2.x[(i, j)] * fit.params[j];
            }
            logistic(e + fit.params[p2] * design.y1[i])
        })
        .collect()
}

/// Fit both models on the split's training rows and score both sides.
/// The two fits share one split by construction; a baseline fitted
/// elsewhere is rejected if its row count disagrees with the design.
pub fn compare_models(
    table: &PanelTable,
    spec: &ModelSpec,
    split: &SplitPlan,
    options: &FitOptions,
    mode: PredictionMode,
) -> Result<ComparisonReport> {
    let train_table = table.subset(&split.train)?;
    let design_train = build_design(&train_table, spec)?;
    let design_test = design_train.project(table, &split.test)?;
    let joint = fit_design(&design_train, &spec.copula, options)?;
    let baseline = fit_baseline_design(&design_train, options)?;
    compare_fitted(&joint, &baseline, &design_train, &design_test, split, mode)
}

pub fn compare_fitted(
    joint: &FitResult,
    baseline: &FitResult,
    design_train: &crate::design::JointDesign,
    design_test: &crate::design::JointDesign,
    split: &SplitPlan,
    mode: PredictionMode,
) -> Result<ComparisonReport> {
    if joint.n_rows != design_train.n_rows() || baseline.n_rows != design_train.n_rows() {
        return Err(Error::InvalidArgument(
            "fits do not come from this split's training rows".into(),
        ));
    }
    let copula = joint
        .copula
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("joint fit carries no copula".into()))?;
    if baseline.copula.is_some() {
        return Err(Error::InvalidArgument(
            "baseline fit must be the single-equation model".into(),
        ));
    }
    let joint_train = predict_outcome(design_train, copula, &joint.params, mode)?;
    let joint_test = predict_outcome(design_test, copula, &joint.params, mode)?;
    let base_train = baseline_scores(design_train, baseline);
    let base_test = baseline_scores(design_test, baseline);

    let joint_in = pr_curve(&joint_train, &design_train.y2)?;
    let joint_out = pr_curve(&joint_test, &design_test.y2)?;
    let base_in = pr_curve(&base_train, &design_train.y2)?;
    let base_out = pr_curve(&base_test, &design_test.y2)?;
    let imp_in = improvement_pct(joint_in.auc, base_in.auc);
    let imp_out = improvement_pct(joint_out.auc, base_out.auc);
    Ok(ComparisonReport {
        joint_in_sample: joint_in,
        joint_out_sample: joint_out,
        baseline_in_sample: base_in,
        baseline_out_sample: base_out,
        improvement_in_sample_pct: imp_in,
        improvement_out_sample_pct: imp_out,
        split_seed: split.seed,
        train_fraction: split.train_fraction,
    })
}
