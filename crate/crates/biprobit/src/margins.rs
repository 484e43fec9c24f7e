//! Marginal link functions and single-equation binary GLMs.
//!
//! The probit link is shared by both equations of the joint model; the
//! single-equation fits here provide warm starts for the joint optimizer,
//! the exogenous logit baseline, and the likelihood-ratio instrument check.

use crate::dist;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Probabilities are clamped into this band before quantiles and logs.
pub const EPS_PROB: f64 = 1e-10;

/// Probit link: quantile of a clamped probability.
pub fn probit(p: f64) -> f64 {
    dist::norm_quantile(p.clamp(EPS_PROB, 1.0 - EPS_PROB))
}

/// Inverse probit link: normal CDF clamped away from 0 and 1.
pub fn probit_inv(x: f64) -> f64 {
    dist::norm_cdf(x).clamp(EPS_PROB, 1.0 - EPS_PROB)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlmLink {
    Probit,
    Logit,
}

/// A fitted single-equation binary GLM.
#[derive(Debug, Clone)]
pub struct GlmFit {
    pub coefs: DVector<f64>,
    pub vcov: DMatrix<f64>,
    /// Unpenalized log-likelihood at the fitted coefficients.
    pub loglik: f64,
    /// Effective degrees of freedom; equals the column count without a penalty.
    pub edf: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl GlmFit {
    pub fn std_errors(&self) -> DVector<f64> {
        self.vcov.diagonal().map(|v| v.max(0.0).sqrt())
    }
}

fn link_inv(link: GlmLink, eta: f64) -> f64 {
    match link {
        GlmLink::Probit => probit_inv(eta),
        GlmLink::Logit => (1.0 / (1.0 + (-eta).exp())).clamp(EPS_PROB, 1.0 - EPS_PROB),
    }
}

fn bernoulli_loglik(link: GlmLink, x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    let mut ll = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let p = link_inv(link, eta[i]);
        ll += if yi > 0.5 { p.ln() } else { (1.0 - p).ln() };
    }
    ll
}

/// Fit a binary GLM by Fisher scoring with optional quadratic penalty
/// (the penalty matrix must already carry its smoothing weight).
///
/// Non-convergence — including quasi-separation pushing coefficients off to
/// infinity — is reported through the `converged` flag, never as an error.
pub fn fit_glm(
    x: &DMatrix<f64>,
    y: &[f64],
    link: GlmLink,
    penalty: Option<&DMatrix<f64>>,
) -> Result<GlmFit> {
    let n = x.nrows();
    let p = x.ncols();
    if n != y.len() {
        return Err(Error::InvalidArgument(format!(
            "design has {n} rows but the response has {}",
            y.len()
        )));
    }
    if n == 0 || p == 0 {
        return Err(Error::Degenerate("empty design matrix".into()));
    }
    if let Some(s) = penalty {
        if s.nrows() != p || s.ncols() != p {
            return Err(Error::InvalidArgument(
                "penalty dimension does not match the design".into(),
            ));
        }
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::Degenerate("response is not binary 0/1".into()));
    }

    let mut beta = DVector::zeros(p);
    let mut converged = false;
    let mut iterations = 0;
    let pen_ll = |b: &DVector<f64>| -> f64 {
        let base = bernoulli_loglik(link, x, y, b);
        match penalty {
            Some(s) => base - 0.5 * (s * b).dot(b),
            None => base,
        }
    };
    let mut current = pen_ll(&beta);

    for iter in 0..100 {
        iterations = iter + 1;
        let eta = x * &beta;
        let mut score = DVector::zeros(n);
        let mut weight = DVector::zeros(n);
        for i in 0..n {
            let pfit = link_inv(link, eta[i]);
            let resid = y[i] - pfit;
            match link {
                GlmLink::Probit => {
                    let d = dist::norm_pdf(eta[i]);
                    let var = pfit * (1.0 - pfit);
                    score[i] = resid * d / var;
                    weight[i] = d * d / var;
                }
                GlmLink::Logit => {
                    score[i] = resid;
                    weight[i] = pfit * (1.0 - pfit);
                }
            }
        }
        let mut grad = x.transpose() * &score;
        let wx = DMatrix::from_fn(n, p, |i, j| weight[i] * x[(i, j)]);
        let mut info = x.transpose() * wx;
        if let Some(s) = penalty {
            grad -= s * &beta;
            info += s;
        }
        if grad.amax() < 1e-8 {
            converged = true;
            break;
        }
        let chol = match info.clone().cholesky() {
            Some(c) => c,
            None => break, // flat or separable: leave converged = false
        };
        let step = chol.solve(&grad);
        // Step halving keeps the penalized likelihood non-decreasing.
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &beta + t * &step;
            let ll = pen_ll(&trial);
            if ll.is_finite() && ll >= current - 1e-12 {
                beta = trial;
                current = ll;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        if beta.amax() > 30.0 {
            break; // drifting to infinity: quasi-separation
        }
    }

    // Information and covariance at the final coefficients.
    let eta = x * &beta;
    let mut weight = DVector::zeros(n);
    for i in 0..n {
        let pfit = link_inv(link, eta[i]);
        weight[i] = match link {
            GlmLink::Probit => {
                let d = dist::norm_pdf(eta[i]);
                d * d / (pfit * (1.0 - pfit))
            }
            GlmLink::Logit => pfit * (1.0 - pfit),
        };
    }
    let wx = DMatrix::from_fn(n, p, |i, j| weight[i] * x[(i, j)]);
    let fisher = x.transpose() * wx;
    let mut info = fisher.clone();
    if let Some(s) = penalty {
        info += s;
    }
    let (vcov, edf) = match info.clone().cholesky() {
        Some(chol) => {
            let inv = chol.inverse();
            let edf = (&inv * &fisher).trace();
            (inv, edf)
        }
        None => (DMatrix::from_element(p, p, f64::NAN), f64::NAN),
    };

    Ok(GlmFit {
        loglik: bernoulli_loglik(link, x, y, &beta),
        coefs: beta,
        vcov,
        edf,
        converged,
        iterations,
    })
}
