//! The two-equation likelihood: cell probabilities, penalized
//! log-likelihood, analytic gradient, and outcome predictions.
//!
//! Parameter layout is fixed as [beta1 | beta2 | gamma | theta_unc]; see
//! `JointDesign::param_names` for the matching coefficient names.

use crate::copula::Copula;
use crate::design::JointDesign;
use crate::dist;
use crate::error::{Error, Result};
use crate::margins::probit_inv;
use nalgebra::{DMatrix, DVector};

/// Cells are floored here before logs so extreme line-search iterates
/// degrade gracefully instead of producing −∞.
pub const CELL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct CellProbs {
    pub p11: f64,
    pub p10: f64,
    pub p01: f64,
    pub p00: f64,
}

impl CellProbs {
    pub fn sum(&self) -> f64 {
        self.p11 + self.p10 + self.p01 + self.p00
    }
}

/// Recursive bivariate probit cell algebra from the three marginal
/// probabilities: treatment margin `p1`, outcome margin with the treatment
/// term on (`p2_1`) and off (`p2_0`).
pub fn cells_from_margins(cop: &Copula, p1: f64, p2_1: f64, p2_0: f64) -> CellProbs {
    let c1 = cop.cdf(p1, p2_1);
    let c0 = cop.cdf(p1, p2_0);
    CellProbs {
        p11: c1.max(CELL_FLOOR),
        p10: (p1 - c1).max(CELL_FLOOR),
        p01: (p2_0 - c0).max(CELL_FLOOR),
        p00: (1.0 - p1 - p2_0 + c0).max(CELL_FLOOR),
    }
}

/// Split a flat parameter vector into the blocks of the fixed layout.
pub fn split_params<'a>(
    design: &JointDesign,
    params: &'a [f64],
) -> Result<(&'a [f64], &'a [f64], f64, f64)> {
    let p1 = design.eq1.n_cols();
    let p2 = design.eq2.n_cols();
    if params.len() != p1 + p2 + 2 {
        return Err(Error::InvalidArgument(format!(
            "parameter vector has length {}, design requires {}",
            params.len(),
            p1 + p2 + 2
        )));
    }
    Ok((&params[..p1], &params[p1..p1 + p2], params[p1 + p2], params[p1 + p2 + 1]))
}

fn eta(x: &DMatrix<f64>, beta: &[f64], row: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..x.ncols() {
        s += x[(row, j)] * beta[j];
    }
    s
}

/// Cell probabilities for one design row at the given parameters. The
/// copula's family/rotation comes from `base`; its dependence parameter is
/// taken from the parameter vector.
pub fn cell_probabilities(
    design: &JointDesign,
    base: &Copula,
    params: &[f64],
    row: usize,
) -> Result<CellProbs> {
    let (b1, b2, gamma, theta_unc) = split_params(design, params)?;
    let cop = base.reparameterized(theta_unc);
    let p1 = probit_inv(eta(&design.eq1.x, b1, row));
    let e20 = eta(&design.eq2.x, b2, row);
    Ok(cells_from_margins(&cop, p1, probit_inv(e20 + gamma), probit_inv(e20)))
}

/// Smoothing weights, one per smooth block in [eq1 blocks..., eq2 blocks...]
/// order. An empty slice means zero penalty everywhere.
pub fn check_lambdas(design: &JointDesign, lambdas: &[f64]) -> Result<()> {
    let k = design.eq1.smooths.len() + design.eq2.smooths.len();
    if lambdas.len() != k {
        return Err(Error::InvalidArgument(format!(
            "{} smoothing weights supplied, design has {} smooth terms",
            lambdas.len(),
            k
        )));
    }
    if lambdas.iter().any(|&l| !l.is_finite() || l < 0.0) {
        return Err(Error::InvalidArgument("smoothing weights must be finite and ≥ 0".into()));
    }
    Ok(())
}

/// Full-size block-diagonal penalty matrix S_λ on the parameter layout.
pub fn penalty_matrix(design: &JointDesign, lambdas: &[f64]) -> Result<DMatrix<f64>> {
    check_lambdas(design, lambdas)?;
    let p = design.n_params();
    let mut s = DMatrix::zeros(p, p);
    let mut li = 0;
    for (offset, eq) in [(0, &design.eq1), (design.eq1.n_cols(), &design.eq2)] {
        for block in &eq.smooths {
            let lam = lambdas[li];
            li += 1;
            let pen = &block.basis.penalty;
            for a in 0..block.len {
                for b in 0..block.len {
                    s[(offset + block.start + a, offset + block.start + b)] +=
                        lam * pen[(a, b)];
                }
            }
        }
    }
    Ok(s)
}

fn penalty_value(design: &JointDesign, lambdas: &[f64], params: &[f64]) -> f64 {
    let mut li = 0;
    let mut total = 0.0;
    for (offset, eq) in [(0, &design.eq1), (design.eq1.n_cols(), &design.eq2)] {
        for block in &eq.smooths {
            let lam = lambdas[li];
            li += 1;
            if lam == 0.0 {
                continue;
            }
            let pen = &block.basis.penalty;
            let g = &params[offset + block.start..offset + block.start + block.len];
            let mut q = 0.0;
            for a in 0..block.len {
                for b in 0..block.len {
                    q += g[a] * pen[(a, b)] * g[b];
                }
            }
            total += lam * q;
        }
    }
    0.5 * total
}

/// Penalized log-likelihood. A non-finite row contribution is reported with
/// the offending design row index.
pub fn log_likelihood(
    design: &JointDesign,
    base: &Copula,
    params: &[f64],
    lambdas: &[f64],
) -> Result<f64> {
    check_lambdas(design, lambdas)?;
    let (b1, b2, gamma, theta_unc) = split_params(design, params)?;
    let cop = base.reparameterized(theta_unc);
    let mut ll = 0.0;
    for i in 0..design.n_rows() {
        let p1 = probit_inv(eta(&design.eq1.x, b1, i));
        let e20 = eta(&design.eq2.x, b2, i);
        let cells = cells_from_margins(&cop, p1, probit_inv(e20 + gamma), probit_inv(e20));
        let p = match (design.y1[i] > 0.5, design.y2[i] > 0.5) {
            (true, true) => cells.p11,
            (true, false) => cells.p10,
            (false, true) => cells.p01,
            (false, false) => cells.p00,
        };
        let term = p.ln();
        if !term.is_finite() {
            return Err(Error::NonFiniteLikelihood { row: i });
        }
        ll += term;
    }
    Ok(ll - penalty_value(design, lambdas, params))
}

/// Analytic gradient of the penalized log-likelihood in the flat layout.
pub fn gradient(
    design: &JointDesign,
    base: &Copula,
    params: &[f64],
    lambdas: &[f64],
) -> Result<DVector<f64>> {
    check_lambdas(design, lambdas)?;
    let (b1, b2, gamma, theta_unc) = split_params(design, params)?;
    let cop = base.reparameterized(theta_unc);
    let p1n = design.eq1.n_cols();
    let p2n = design.eq2.n_cols();
    let mut grad: DVector<f64> = DVector::zeros(design.n_params());

    for i in 0..design.n_rows() {
        let e1 = eta(&design.eq1.x, b1, i);
        let e20 = eta(&design.eq2.x, b2, i);
        let p1 = probit_inv(e1);
        let p21 = probit_inv(e20 + gamma);
        let p20 = probit_inv(e20);
        let q1 = dist::norm_pdf(e1);
        let q21 = dist::norm_pdf(e20 + gamma);
        let q20 = dist::norm_pdf(e20);
        // (d cell / d eta1, d cell / d eta2_base, d cell / d gamma, d cell / d theta_unc) / cell
        let (p, de1, de2, dg, dt) = match (design.y1[i] > 0.5, design.y2[i] > 0.5) {
            (true, true) => {
                let c = cop.cdf(p1, p21);
                let cu = cop.partial_u(p1, p21);
                let cv = cop.partial_v(p1, p21);
                let ct = cop.dtheta(p1, p21);
                (c, cu * q1, cv * q21, cv * q21, ct)
            }
            (true, false) => {
                let c = cop.cdf(p1, p21);
                let cu = cop.partial_u(p1, p21);
                let cv = cop.partial_v(p1, p21);
                let ct = cop.dtheta(p1, p21);
                (p1 - c, (1.0 - cu) * q1, -cv * q21, -cv * q21, -ct)
            }
            (false, true) => {
                let c = cop.cdf(p1, p20);
                let cu = cop.partial_u(p1, p20);
                let cv = cop.partial_v(p1, p20);
                let ct = cop.dtheta(p1, p20);
                (p20 - c, -cu * q1, (1.0 - cv) * q20, 0.0, -ct)
            }
            (false, false) => {
                let c = cop.cdf(p1, p20);
                let cu = cop.partial_u(p1, p20);
                let cv = cop.partial_v(p1, p20);
                let ct = cop.dtheta(p1, p20);
                (1.0 - p1 - p20 + c, -(1.0 - cu) * q1, -(1.0 - cv) * q20, 0.0, ct)
            }
        };
        let p = p.max(CELL_FLOOR);
        let w1 = de1 / p;
        let w2 = de2 / p;
        for j in 0..p1n {
            grad[j] += w1 * design.eq1.x[(i, j)];
        }
        for j in 0..p2n {
            grad[p1n + j] += w2 * design.eq2.x[(i, j)];
        }
        grad[p1n + p2n] += dg / p;
        grad[p1n + p2n + 1] += dt / p;
        if !grad[p1n + p2n + 1].is_finite() || !w1.is_finite() || !w2.is_finite() {
            return Err(Error::NonFiniteLikelihood { row: i });
        }
    }

    // Penalty gradient: −λ S γ per smooth block.
    let mut li = 0;
    for (offset, eq) in [(0, &design.eq1), (p1n, &design.eq2)] {
        for block in &eq.smooths {
            let lam = lambdas[li];
            li += 1;
            if lam == 0.0 {
                continue;
            }
            let pen = &block.basis.penalty;
            let start = offset + block.start;
            let g: Vec<f64> = (0..block.len).map(|a| params[start + a]).collect();
            for a in 0..block.len {
                let mut s = 0.0;
                for b in 0..block.len {
                    s += pen[(a, b)] * g[b];
                }
                grad[start + a] -= lam * s;
            }
        }
    }
    Ok(grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictionMode {
    /// P(y2 = 1 | observed y1) through the copula conditional — the default
    /// score for precision–recall evaluation.
    Conditional,
    /// Φ(η2 at the observed y1), ignoring the error dependence.
    Marginal,
}

/// Outcome probabilities for every design row at the given parameters.
pub fn predict_outcome(
    design: &JointDesign,
    base: &Copula,
    params: &[f64],
    mode: PredictionMode,
) -> Result<Vec<f64>> {
    let (b1, b2, gamma, theta_unc) = split_params(design, params)?;
    let cop = base.reparameterized(theta_unc);
    let mut out = Vec::with_capacity(design.n_rows());
    for i in 0..design.n_rows() {
        let e20 = eta(&design.eq2.x, b2, i);
        let treated = design.y1[i] > 0.5;
        let p = match mode {
            PredictionMode::Marginal => {
                probit_inv(e20 + if treated { gamma } else { 0.0 })
            }
            PredictionMode::Conditional => {
                let p1 = probit_inv(eta(&design.eq1.x, b1, i));
                if treated {
                    let p21 = probit_inv(e20 + gamma);
                    cop.cdf(p1, p21) / p1.max(CELL_FLOOR)
                } else {
                    let p20 = probit_inv(e20);
                    (p20 - cop.cdf(p1, p20)) / (1.0 - p1).max(CELL_FLOOR)
                }
            }
        };
        out.push(p.clamp(0.0, 1.0));
    }
    Ok(out)
}
