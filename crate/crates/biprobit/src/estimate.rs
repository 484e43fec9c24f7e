//! Penalized maximum likelihood for the joint model: damped Newton ascent
//! with backtracking, a Levenberg-style ridge when the Hessian fails to
//! factorize, warm starts from single-equation probits, smoothing-weight
//! selection by AIC grid search, plus the exogenous logit baseline and the
//! likelihood-ratio instrument check.

use crate::copula::Copula;
use crate::design::{build_design, JointDesign, ModelSpec};
use crate::dist;
use crate::error::{Error, Result};
use crate::margins::{fit_glm, GlmLink};
use crate::model;
use crate::table::PanelTable;
use nalgebra::{DMatrix, DVector};

/// Smoothing-weight grid searched when a model has smooth terms and no
/// fixed weights were supplied.
pub const LAMBDA_GRID: [f64; 9] =
    [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4];

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Convergence requires max |gradient| below this.
    pub gradient_tolerance: f64,
    /// Fixed smoothing weights (one per smooth term); `None` selects them by
    /// AIC over `LAMBDA_GRID`.
    pub lambdas: Option<Vec<f64>>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iterations: 60, gradient_tolerance: 1e-6, lambdas: None }
    }
}

/// A completed fit. Failure to converge is reported through the flags —
/// sweeps over many copulas must keep going — while structural problems
/// (bad spec, unusable data) surface as errors.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    pub vcov: DMatrix<f64>,
    /// Unpenalized log-likelihood at the fitted parameters.
    pub loglik: f64,
    pub aic: f64,
    pub edf: f64,
    pub iterations: usize,
    pub max_abs_gradient: f64,
    pub converged: bool,
    pub info_positive_definite: bool,
    /// `None` for the single-equation baseline.
    pub copula: Option<Copula>,
    pub lambdas: Vec<f64>,
    pub n_rows: usize,
    pub n_dropped: usize,
    pub gamma_index: Option<usize>,
    pub theta_index: Option<usize>,
}

impl FitResult {
    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.params.len())
            .map(|j| {
                let v = self.vcov[(j, j)];
                if v.is_finite() && v >= 0.0 {
                    v.sqrt()
                } else {
                    f64::NAN
                }
            })
            .collect()
    }

    /// Coefficient / standard error; absent when the information matrix was
    /// not positive definite or a variance degenerates.
    pub fn z_statistics(&self) -> Vec<Option<f64>> {
        let se = self.std_errors();
        (0..self.params.len())
            .map(|j| {
                if !self.info_positive_definite || !se[j].is_finite() || se[j] <= 0.0 {
                    None
                } else {
                    Some(self.params[j] / se[j])
                }
            })
            .collect()
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma_index.map(|i| self.params[i])
    }

    pub fn gamma_z(&self) -> Option<f64> {
        self.gamma_index.and_then(|i| self.z_statistics()[i])
    }

    /// Dependence parameter mapped back to its natural domain.
    pub fn theta(&self) -> Option<f64> {
        match (&self.copula, self.theta_index) {
            (Some(cop), Some(i)) => Some(cop.reparameterized(self.params[i]).theta()),
            _ => None,
        }
    }
}

/// Central finite differences of the analytic gradient, symmetrized.
fn fd_hessian<F>(grad: &F, params: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<DVector<f64>>,
{
    let p = params.len();
    let mut h = DMatrix::zeros(p, p);
    let mut work = params.to_vec();
    for j in 0..p {
        let step = 1e-6 * (1.0 + params[j].abs());
        work[j] = params[j] + step;
        let up = grad(&work)?;
        work[j] = params[j] - step;
        let dn = grad(&work)?;
        work[j] = params[j];
        for i in 0..p {
            h[(i, j)] = (up[i] - dn[i]) / (2.0 * step);
        }
    }
    Ok(0.5 * (&h + h.transpose()))
}

struct NewtonOutcome {
    params: Vec<f64>,
    iterations: usize,
    max_abs_gradient: f64,
    converged: bool,
}

/// Maximize the penalized log-likelihood from the given start.
fn newton_ascent(
    design: &JointDesign,
    copula: &Copula,
    lambdas: &[f64],
    start: Vec<f64>,
    options: &FitOptions,
) -> Result<NewtonOutcome> {
    let pen_ll = |p: &[f64]| model::log_likelihood(design, copula, p, lambdas);
    let grad = |p: &[f64]| model::gradient(design, copula, p, lambdas);
    let mut params = start;
    let mut current = pen_ll(&params)?;
    let mut iterations = 0;
    let mut converged = false;
    let mut gmax = f64::INFINITY;
    let dim = params.len();

    for iter in 0..options.max_iterations {
        iterations = iter + 1;
        let g = grad(&params)?;
        gmax = g.amax();
        if gmax < options.gradient_tolerance {
            converged = true;
            break;
        }
        let h = fd_hessian(&grad, &params)?;
        let a0 = -h;
        let base = 1e-8 * (1.0 + a0.trace().abs() / dim as f64);
        let mut ridge = 0.0;
        let mut step: Option<DVector<f64>> = None;
        loop {
            let mut a = a0.clone();
            for d in 0..dim {
                a[(d, d)] += ridge;
            }
            if let Some(chol) = a.cholesky() {
                step = Some(chol.solve(&g));
                break;
            }
            ridge = if ridge == 0.0 { base } else { ridge * 10.0 };
            if ridge > 1e8 * base {
                break;
            }
        }
        let step = match step {
            Some(s) => s,
            None => break, // information unusable even with heavy damping
        };
        let slope = g.dot(&step); // > 0 for an ascent direction
        let mut accepted = false;
        // Near the optimum the predicted gain sinks below the rounding
        // noise of the log-likelihood sum, so a sufficient-increase test
        // can only thrash. In that regime arbitrate by the gradient, which
        // is computed analytically and keeps full resolution: take the
        // damped Newton step whenever it shrinks the gradient without a
        // measurable loss of objective.
        let noise = 1e-10 * (1.0 + current.abs());
        if 1e-4 * slope.max(0.0) < noise {
            let trial: Vec<f64> = (0..dim).map(|d| params[d] + step[d]).collect();
            if let Ok(ll) = pen_ll(&trial) {
                if ll.is_finite() && ll >= current - noise {
                    let gt = grad(&trial)?;
                    if gt.amax() < gmax {
                        params = trial;
                        current = current.max(ll);
                        accepted = true;
                    }
                }
            }
        }
        if !accepted {
            let mut t = 1.0;
            for _ in 0..45 {
                let trial: Vec<f64> =
                    (0..dim).map(|d| params[d] + t * step[d]).collect();
                let ll = match pen_ll(&trial) {
                    Ok(v) => v,
                    Err(_) => f64::NEG_INFINITY,
                };
                if ll.is_finite() && ll >= current + 1e-4 * t * slope.max(0.0) && ll >= current {
                    params = trial;
                    current = ll;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
        }
        if !accepted {
            break; // step underflow; converged only if the gradient already passed
        }
    }
    if !converged {
        // The loop may have exited right after a final accepted step.
        let g = grad(&params)?;
        gmax = g.amax();
        converged = gmax < options.gradient_tolerance;
    }
    Ok(NewtonOutcome { params, iterations, max_abs_gradient: gmax, converged })
}

/// Warm starts: single-equation probits (equation 2 includes the observed
/// treatment column), dependence parameter at zero.
fn warm_start(design: &JointDesign, lambdas: &[f64]) -> Result<Vec<f64>> {
    let p1 = design.eq1.n_cols();
    let p2 = design.eq2.n_cols();
    let mut start = vec![0.0; design.n_params()];

    let pen1 = equation_penalty(&design.eq1, lambdas_for(design, lambdas, 0), p1, 0);
    let g1 = fit_glm(&design.eq1.x, &design.y1, GlmLink::Probit, pen1.as_ref())?;
    for j in 0..p1 {
        start[j] = g1.coefs[j];
    }

    let n = design.n_rows();
    let mut x2t = DMatrix::zeros(n, p2 + 1);
    x2t.view_mut((0, 0), (n, p2)).copy_from(&design.eq2.x);
    for i in 0..n {
        x2t[(i, p2)] = design.y1[i];
    }
    let pen2 = equation_penalty_padded(
        &design.eq2,
        lambdas_for(design, lambdas, design.eq1.smooths.len()),
        p2 + 1,
    );
    let g2 = fit_glm(&x2t, &design.y2, GlmLink::Probit, pen2.as_ref())?;
    for j in 0..p2 {
        start[p1 + j] = g2.coefs[j];
    }
    start[design.gamma_index()] = g2.coefs[p2];
    start[design.theta_index()] = 0.0;
    Ok(start)
}

fn lambdas_for<'a>(design: &JointDesign, lambdas: &'a [f64], offset: usize) -> &'a [f64] {
    let count = if offset == 0 {
        design.eq1.smooths.len()
    } else {
        design.eq2.smooths.len()
    };
    &lambdas[offset..offset + count]
}

fn equation_penalty(
    eq: &crate::design::EquationDesign,
    lambdas: &[f64],
    p: usize,
    _offset: usize,
) -> Option<DMatrix<f64>> {
    if eq.smooths.is_empty() || lambdas.iter().all(|&l| l == 0.0) {
        return None;
    }
    let mut s = DMatrix::zeros(p, p);
    for (k, block) in eq.smooths.iter().enumerate() {
        let lam = lambdas[k];
        for a in 0..block.len {
            for b in 0..block.len {
                s[(block.start + a, block.start + b)] += lam * block.basis.penalty[(a, b)];
            }
        }
    }
    Some(s)
}

fn equation_penalty_padded(
    eq: &crate::design::EquationDesign,
    lambdas: &[f64],
    p: usize,
) -> Option<DMatrix<f64>> {
    equation_penalty(eq, lambdas, p, 0)
}

/// One Newton fit at fixed smoothing weights, with covariance, AIC and
/// effective degrees of freedom.
fn fit_at(
    design: &JointDesign,
    copula: &Copula,
    lambdas: &[f64],
    start: Option<Vec<f64>>,
    options: &FitOptions,
) -> Result<FitResult> {
    model::check_lambdas(design, lambdas)?;
    let start = match start {
        Some(s) => s,
        None => warm_start(design, lambdas)?,
    };
    let outcome = newton_ascent(design, copula, lambdas, start, options)?;
    let grad = |p: &[f64]| model::gradient(design, copula, p, lambdas);
    let h = fd_hessian(&grad, &outcome.params)?;
    let a = -h;
    let dim = outcome.params.len();
    let (vcov, info_pd) = match a.clone().cholesky() {
        Some(chol) => (chol.inverse(), true),
        None => {
            // Reported, never repaired: fall back to a generic inverse so
            // the numbers exist, with the flag telling the reader not to
            // trust them.
            let inv = a.clone().try_inverse();
            (inv.unwrap_or_else(|| DMatrix::from_element(dim, dim, f64::NAN)), false)
        }
    };
    let s_full = model::penalty_matrix(design, lambdas)?;
    let edf = if s_full.iter().all(|&v| v == 0.0) {
        dim as f64
    } else {
        dim as f64 - (&vcov * &s_full).trace()
    };
    let zero_lambdas = vec![0.0; lambdas.len()];
    let loglik = model::log_likelihood(design, copula, &outcome.params, &zero_lambdas)?;
    Ok(FitResult {
        names: design.param_names(),
        params: outcome.params,
        vcov,
        loglik,
        aic: 2.0 * edf - 2.0 * loglik,
        edf,
        iterations: outcome.iterations,
        max_abs_gradient: outcome.max_abs_gradient,
        converged: outcome.converged,
        info_positive_definite: info_pd,
        copula: Some(*copula),
        lambdas: lambdas.to_vec(),
        n_rows: design.n_rows(),
        n_dropped: design.n_dropped,
        gamma_index: Some(design.gamma_index()),
        theta_index: Some(design.theta_index()),
    })
}

/// Fit the joint model on a prebuilt design. Smoothing weights come from
/// the options when fixed; otherwise each smooth term's weight is chosen by
/// coordinate-wise AIC search over `LAMBDA_GRID` (two passes when several
/// smooths interact).
pub fn fit_design(
    design: &JointDesign,
    copula: &Copula,
    options: &FitOptions,
) -> Result<FitResult> {
    let n_smooth = design.eq1.smooths.len() + design.eq2.smooths.len();
    if let Some(fixed) = &options.lambdas {
        return fit_at(design, copula, fixed, None, options);
    }
    if n_smooth == 0 {
        return fit_at(design, copula, &[], None, options);
    }
    let mut lambdas = vec![1.0; n_smooth];
    let mut best = fit_at(design, copula, &lambdas, None, options)?;
    let passes = if n_smooth > 1 { 2 } else { 1 };
    for _ in 0..passes {
        for k in 0..n_smooth {
            for &lam in &LAMBDA_GRID {
                if lam == lambdas[k] {
                    continue;
                }
                let mut trial = lambdas.clone();
                trial[k] = lam;
                let fit =
                    fit_at(design, copula, &trial, Some(best.params.clone()), options)?;
                if fit.converged && (!best.converged || fit.aic < best.aic) {
                    lambdas = trial;
                    best = fit;
                }
            }
        }
    }
    Ok(best)
}

/// Build the design from a table and fit the spec's copula.
pub fn fit(table: &PanelTable, spec: &ModelSpec, options: &FitOptions) -> Result<FitResult> {
    let design = build_design(table, spec)?;
    fit_design(&design, &spec.copula, options)
}

/// Exogenous-treatment baseline: a single-equation logit of the outcome on
/// the equation-2 predictors plus the treatment as an ordinary column.
/// Same result shape as the joint fit so reports and plots can compare.
pub fn fit_baseline_design(design: &JointDesign, options: &FitOptions) -> Result<FitResult> {
    let n = design.n_rows();
    let p2 = design.eq2.n_cols();
    let mut x = DMatrix::zeros(n, p2 + 1);
    x.view_mut((0, 0), (n, p2)).copy_from(&design.eq2.x);
    for i in 0..n {
        x[(i, p2)] = design.y1[i];
    }
    let n_smooth = design.eq2.smooths.len();
    let lambdas = match &options.lambdas {
        Some(fixed) => {
            if fixed.len() != n_smooth {
                return Err(Error::InvalidArgument(format!(
                    "{} smoothing weights supplied, baseline has {} smooth terms",
                    fixed.len(),
                    n_smooth
                )));
            }
            fixed.clone()
        }
        None if n_smooth == 0 => Vec::new(),
        None => {
            // AIC grid per smooth, coordinate-wise.
            let mut lambdas = vec![1.0; n_smooth];
            let mut best = f64::INFINITY;
            for _ in 0..(if n_smooth > 1 { 2 } else { 1 }) {
                for k in 0..n_smooth {
                    for &lam in &LAMBDA_GRID {
                        let mut trial = lambdas.clone();
                        trial[k] = lam;
                        let pen = equation_penalty_padded(&design.eq2, &trial, p2 + 1);
                        let g = fit_glm(&x, &design.y2, GlmLink::Logit, pen.as_ref())?;
                        let aic = 2.0 * g.edf - 2.0 * g.loglik;
                        if g.converged && aic < best {
                            best = aic;
                            lambdas = trial;
                        }
                    }
                }
            }
            lambdas
        }
    };
    let pen = equation_penalty_padded(&design.eq2, &lambdas, p2 + 1);
    let g = fit_glm(&x, &design.y2, GlmLink::Logit, pen.as_ref())?;
    let mut names: Vec<String> =
        design.eq2.names.iter().map(|n| format!("eq2:{n}")).collect();
    names.push(format!("gamma:{}", design.treatment));
    let loglik = g.loglik;
    let edf = g.edf;
    let info_pd = g.vcov.iter().all(|v| v.is_finite());
    // Penalized score at the solution, X'(y−μ) − Sβ, as the convergence
    // diagnostic on the same footing as the joint fits.
    let mut score = DVector::<f64>::zeros(p2 + 1);
    for i in 0..n {
        let mut eta = 0.0;
        for j in 0..=p2 {
            eta += x[(i, j)] * g.coefs[j];
        }
        let resid = design.y2[i] - 1.0 / (1.0 + (-eta).exp());
        for j in 0..=p2 {
            score[j] += x[(i, j)] * resid;
        }
    }
    if let Some(s_mat) = pen.as_ref() {
        score -= s_mat * &g.coefs;
    }
    Ok(FitResult {
        names,
        params: g.coefs.iter().copied().collect(),
        vcov: g.vcov,
        loglik,
        aic: 2.0 * edf - 2.0 * loglik,
        edf,
        iterations: g.iterations,
        max_abs_gradient: score.amax(),
        converged: g.converged,
        info_positive_definite: info_pd,
        copula: None,
        lambdas,
        n_rows: n,
        n_dropped: design.n_dropped,
        gamma_index: Some(p2),
        theta_index: None,
    })
}

pub fn fit_baseline(
    table: &PanelTable,
    spec: &ModelSpec,
    options: &FitOptions,
) -> Result<FitResult> {
    let design = build_design(table, spec)?;
    fit_baseline_design(&design, options)
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct LrTestResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Likelihood-ratio check of instrument strength: the treatment equation as
/// a single probit with and without the instrument columns.
pub fn instrument_strength_test(table: &PanelTable, spec: &ModelSpec) -> Result<LrTestResult> {
    if spec.instruments.is_empty() {
        return Err(Error::InvalidArgument(
            "instrument test requires at least one declared instrument".into(),
        ));
    }
    spec.validate()?;
    let design = build_design(table, spec)?;
    let full = fit_glm(&design.eq1.x, &design.y1, GlmLink::Probit, None)?;
    if !full.converged {
        return Err(Error::Numerical(
            "treatment equation with instruments did not converge".into(),
        ));
    }
    // Restricted design: drop the instrument columns.
    let keep: Vec<usize> = (0..design.eq1.n_cols())
        .filter(|&j| j == 0 || !spec.instruments.contains(&design.eq1.names[j]))
        .collect();
    let df = design.eq1.n_cols() - keep.len();
    if df != spec.instruments.len() {
        return Err(Error::Config(
            "instrument columns must enter equation 1 as plain linear terms".into(),
        ));
    }
    let n = design.n_rows();
    let mut xr = DMatrix::zeros(n, keep.len());
    for (jj, &j) in keep.iter().enumerate() {
        for i in 0..n {
            xr[(i, jj)] = design.eq1.x[(i, j)];
        }
    }
    let restricted = fit_glm(&xr, &design.y1, GlmLink::Probit, None)?;
    if !restricted.converged {
        return Err(Error::Numerical(
            "treatment equation without instruments did not converge".into(),
        ));
    }
    let statistic = (2.0 * (full.loglik - restricted.loglik)).max(0.0);
    Ok(LrTestResult {
        statistic,
        df,
        p_value: dist::chi_squared_sf(statistic, df as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::{Family, Rotation};
    use crate::datasim::{generate, DgpSpec};
    use crate::design::{ModelSpec, SmoothDecl, Term};
    use crate::margins::probit;
    use approx::assert_abs_diff_eq;

    fn independence() -> Copula {
        Copula::new(Family::Fgm, Rotation::R0, 0.0).unwrap()
    }

    fn sim_spec(seed: u64, n: usize) -> DgpSpec {
        DgpSpec {
            n_rows: n,
            beta1_true: vec![-0.2, 0.5, -0.4],
            beta2_true: vec![-0.8, 0.4, 0.3],
            gamma_true: 0.0,
            copula_true: Copula::from_natural(Family::Gaussian, Rotation::R0, 0.5).unwrap(),
            instrument_strength: 0.8,
            confounder_strength: 1.0,
            nonlinear_amplitude: 0.0,
            seed,
        }
    }

    fn sim_model_spec(copula: Copula) -> ModelSpec {
        ModelSpec::from_terms(
            "treat",
            "event",
            &[
                Term::Linear("c1".into()),
                Term::Linear("c2".into()),
                Term::Linear("z1".into()),
                Term::Linear("z2".into()),
            ],
            &[Term::Linear("c1".into()), Term::Linear("c2".into())],
            &["z1".into(), "z2".into()],
            copula,
        )
        .unwrap()
    }

    #[test]
    fn intercept_only_fit_recovers_sample_mean_links() {
        let n = 400usize;
        let y1: Vec<f64> = (0..n).map(|i| ((i * 7) % 10 < 5) as i32 as f64).collect();
        let y2: Vec<f64> = (0..n).map(|i| ((i * 3) % 10 < 4) as i32 as f64).collect();
        let table = PanelTable::from_columns(
            vec!["treat".into(), "event".into()],
            vec![y1.clone(), y2.clone()],
        )
        .unwrap();
        let spec =
            ModelSpec::from_terms("treat", "event", &[], &[], &[], independence()).unwrap();
        let fit = fit(&table, &spec, &FitOptions::default()).unwrap();
        assert!(fit.converged, "gradient {}", fit.max_abs_gradient);
        assert!(fit.max_abs_gradient < 1e-6);
        // Note: without instruments the treatment/dependence pair is held up
        // by functional form alone, so positive-definite information is not
        // guaranteed here and deliberately not asserted.
        let m1 = y1.iter().sum::<f64>() / n as f64;
        let m2 = y2.iter().sum::<f64>() / n as f64;
        assert_abs_diff_eq!(fit.params[0], probit(m1), epsilon = 1e-3);
        // With γ free, the eq2 margin splits by treatment; the observable
        // overall mean still pins the mixture down at the fit.
        let p1 = crate::dist::norm_cdf(fit.params[0]);
        let p2_mix = p1 * crate::dist::norm_cdf(fit.params[1] + fit.params[2])
            + (1.0 - p1) * crate::dist::norm_cdf(fit.params[1]);
        assert_abs_diff_eq!(p2_mix, m2, epsilon = 1e-3);
        // No smooths: every parameter counts fully.
        assert_abs_diff_eq!(fit.edf, fit.params.len() as f64, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.aic, 2.0 * fit.edf - 2.0 * fit.loglik, epsilon = 1e-10);
    }

    #[test]
    fn independence_truth_keeps_gamma_near_zero() {
        let (table, _) = generate(&sim_spec(31, 3000)).unwrap();
        let mut dgp = sim_spec(31, 3000);
        dgp.copula_true = Copula::from_natural(Family::Fgm, Rotation::R0, 0.0).unwrap();
        let (table_ind, _) = generate(&dgp).unwrap();
        let _ = table; // endogenous variant exercised in the recovery test below
        let spec = sim_model_spec(independence());
        let fit = fit(&table_ind, &spec, &FitOptions::default()).unwrap();
        assert!(fit.converged);
        let g = fit.gamma().unwrap();
        let se = fit.std_errors()[fit.gamma_index.unwrap()];
        assert!(g.abs() < 2.0 * se, "gamma {g} se {se}");
    }

    #[test]
    fn frank_spec_escapes_its_independence_start() {
        // The optimizer seeds every dependence parameter at zero, which for
        // Frank sits on the epsilon-guarded boundary of the expansion branch.
        // A strongly dependent sample must still pull the fit away from it.
        let mut dgp = sim_spec(12, 1500);
        dgp.gamma_true = 0.4;
        dgp.copula_true = Copula::from_natural(Family::Clayton, Rotation::R180, 2.0).unwrap();
        let (table, _) = generate(&dgp).unwrap();
        let cop = Copula::new(Family::Frank, Rotation::R0, 0.0).unwrap();
        let spec = sim_model_spec(cop);
        let res = fit(&table, &spec, &FitOptions::default()).unwrap();
        assert!(res.converged, "iters {} grad {:.3e}", res.iterations, res.max_abs_gradient);
        let theta = res.theta().unwrap();
        assert!(theta > 1.0, "theta {theta} should reflect the positive dependence");
    }

    #[test]
    fn gaussian_truth_is_recovered_within_sampling_error() {
        let mut dgp = sim_spec(77, 4000);
        dgp.gamma_true = 0.6;
        let (table, truth) = generate(&dgp).unwrap();
        let cop = Copula::new(Family::Gaussian, Rotation::R0, 0.0).unwrap();
        let spec = sim_model_spec(cop);
        let fit = fit(&table, &spec, &FitOptions::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.info_positive_definite);
        let se = fit.std_errors();
        // eq1: intercept, c1, c2, z1, z2 against effective truth.
        let expect1 =
            [truth.beta1[0], truth.beta1[1], truth.beta1[2], truth.instrument_coefs[0], truth.instrument_coefs[1]];
        for j in 0..5 {
            assert!(
                (fit.params[j] - expect1[j]).abs() < 3.5 * se[j],
                "eq1[{j}]: {} vs {}",
                fit.params[j],
                expect1[j]
            );
        }
        let off = 5;
        for j in 0..3 {
            assert!(
                (fit.params[off + j] - truth.beta2[j]).abs() < 3.5 * se[off + j],
                "eq2[{j}]: {} vs {}",
                fit.params[off + j],
                truth.beta2[j]
            );
        }
        let gi = fit.gamma_index.unwrap();
        assert!((fit.params[gi] - truth.gamma_true).abs() < 3.5 * se[gi]);
        // Dependence recovered on the natural scale.
        let rho = fit.theta().unwrap();
        assert!((rho - 0.5).abs() < 0.2, "rho {rho}");
    }

    #[test]
    fn covariance_matches_a_likelihood_hessian_inverse() {
        let (table, _) = generate(&sim_spec(5, 300)).unwrap();
        let spec = sim_model_spec(independence());
        let design = build_design(&table, &spec).unwrap();
        let fit = fit_design(&design, &independence(), &FitOptions::default()).unwrap();
        assert!(fit.converged && fit.info_positive_definite);
        // Independent oracle: central second differences of the log-likelihood itself.
        let ll = |p: &[f64]| model::log_likelihood(&design, &independence(), p, &[]).unwrap();
        let dim = fit.params.len();
        let mut h = DMatrix::zeros(dim, dim);
        let f0 = ll(&fit.params);
        let steps: Vec<f64> = fit.params.iter().map(|p| 5e-4 * (1.0 + p.abs())).collect();
        for a in 0..dim {
            for b in 0..dim {
                let mut pp = fit.params.clone();
                if a == b {
                    pp[a] += steps[a];
                    let fu = ll(&pp);
                    pp[a] = fit.params[a] - steps[a];
                    let fd = ll(&pp);
                    h[(a, a)] = (fu - 2.0 * f0 + fd) / (steps[a] * steps[a]);
                } else {
                    let (sa, sb) = (steps[a], steps[b]);
                    pp[a] += sa;
                    pp[b] += sb;
                    let fpp = ll(&pp);
                    pp[b] = fit.params[b] - sb;
                    let fpm = ll(&pp);
                    pp[a] = fit.params[a] - sa;
                    let fmm = ll(&pp);
                    pp[b] = fit.params[b] + sb;
                    let fmp = ll(&pp);
                    h[(a, b)] = (fpp - fpm - fmp + fmm) / (4.0 * sa * sb);
                }
            }
        }
        let oracle = (-h).try_inverse().unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for a in 0..dim {
            for b in 0..dim {
                num += (fit.vcov[(a, b)] - oracle[(a, b)]).powi(2);
                den += oracle[(a, b)].powi(2);
            }
        }
        assert!((num / den).sqrt() < 0.01, "relative Frobenius {}", (num / den).sqrt());
    }

    #[test]
    fn joint_fit_removes_the_endogeneity_bias_a_naive_probit_shows() {
        let mut dgp = sim_spec(13, 6000);
        dgp.copula_true = Copula::from_natural(Family::Clayton, Rotation::R180, 2.0).unwrap();
        let (table, _) = generate(&dgp).unwrap();
        let cop = Copula::new(Family::Clayton, Rotation::R180, 0.0).unwrap();
        let spec = sim_model_spec(cop);
        let design = build_design(&table, &spec).unwrap();

        // Naive single-equation probit treats the treatment as exogenous and
        // soaks the error dependence into gamma.
        let n = design.n_rows();
        let p2 = design.eq2.n_cols();
        let mut x = DMatrix::zeros(n, p2 + 1);
        x.view_mut((0, 0), (n, p2)).copy_from(&design.eq2.x);
        for i in 0..n {
            x[(i, p2)] = design.y1[i];
        }
        let naive = fit_glm(&x, &design.y2, GlmLink::Probit, None).unwrap();
        let naive_z = naive.coefs[p2] / naive.std_errors()[p2];
        assert!(naive_z > 3.0, "naive z {naive_z}");

        let joint = fit_design(&design, &cop, &FitOptions::default()).unwrap();
        assert!(joint.converged);
        let gi = joint.gamma_index.unwrap();
        let z = joint.params[gi] / joint.std_errors()[gi];
        assert!(z.abs() < 2.0, "joint z {z}");
    }

    #[test]
    fn strong_instruments_reject_decisively() {
        let (table, _) = generate(&sim_spec(21, 4000)).unwrap();
        let spec = sim_model_spec(independence());
        let lr = instrument_strength_test(&table, &spec).unwrap();
        assert_eq!(lr.df, 2);
        assert!(lr.statistic > 0.0);
        assert!(lr.p_value < 1e-6, "p {}", lr.p_value);

        let mut no_iv = spec.clone();
        no_iv.instruments.clear();
        assert!(instrument_strength_test(&table, &no_iv).is_err());
    }

    #[test]
    fn baseline_logit_matches_symmetric_intercept_and_flags_separation() {
        let n = 200usize;
        let y2: Vec<f64> = (0..n).map(|i| (i % 2 == 0) as i32 as f64).collect();
        let y1 = vec![0.0; n];
        let table = PanelTable::from_columns(
            vec!["treat".into(), "event".into()],
            vec![y1, y2],
        )
        .unwrap();
        let spec =
            ModelSpec::from_terms("treat", "event", &[], &[], &[], independence()).unwrap();
        let base = fit_baseline(&table, &spec, &FitOptions::default()).unwrap();
        assert!(base.converged);
        assert!(base.copula.is_none());
        assert_abs_diff_eq!(base.params[0], 0.0, epsilon = 1e-6);

        // Treatment perfectly predicts the outcome: separation flagged.
        let y1s: Vec<f64> = (0..n).map(|i| (i % 2 == 0) as i32 as f64).collect();
        let y2s = y1s.clone();
        let table2 = PanelTable::from_columns(
            vec!["treat".into(), "event".into()],
            vec![y1s, y2s],
        )
        .unwrap();
        let sep = fit_baseline(&table2, &spec, &FitOptions::default()).unwrap();
        assert!(!sep.converged);
    }

    #[test]
    fn smoothing_weight_is_selected_and_the_shape_recovered() {
        let mut dgp = sim_spec(55, 2500);
        dgp.nonlinear_amplitude = 1.5;
        dgp.beta2_true = vec![-1.6, 0.4, 0.3];
        let (table, _) = generate(&dgp).unwrap();
        let cop = Copula::new(Family::Gaussian, Rotation::R0, 0.0).unwrap();
        let spec = ModelSpec::from_terms(
            "treat",
            "event",
            &[
                Term::Linear("c1".into()),
                Term::Linear("c2".into()),
                Term::Linear("z1".into()),
                Term::Linear("z2".into()),
            ],
            &[
                Term::Linear("c1".into()),
                Term::Linear("c2".into()),
                Term::Smooth(SmoothDecl { column: "spell".into(), basis_dim: 8 }),
            ],
            &["z1".into(), "z2".into()],
            cop,
        )
        .unwrap();
        let design = build_design(&table, &spec).unwrap();
        let fit = fit_design(&design, &cop, &FitOptions::default()).unwrap();
        assert!(fit.converged);
        assert_eq!(fit.lambdas.len(), 1);
        assert!(LAMBDA_GRID.contains(&fit.lambdas[0]) || fit.lambdas[0] == 1.0);
        // Fractional parameter count: the smooth is shrunk below its nominal size.
        assert!(fit.edf < fit.params.len() as f64 + 1e-9);

        // The fitted smooth tracks the true exponential decay up to an
        // additive constant (the basis is centered): compare centered shapes.
        let block = &design.eq2.smooths[0];
        let p1 = design.eq1.n_cols();
        let grid: Vec<f64> = (0..40).map(|i| 1.0 + 23.0 * i as f64 / 39.0).collect();
        let mut fitted: Vec<f64> = Vec::new();
        let mut truth: Vec<f64> = Vec::new();
        for &t in &grid {
            let row = block.basis.row(t);
            let mut v = 0.0;
            for k in 0..block.len {
                v += row[k] * fit.params[p1 + block.start + k];
            }
            fitted.push(v);
            truth.push(dgp.nonlinear_amplitude * (-t / crate::datasim::SPELL_DECAY).exp());
        }
        let mf = fitted.iter().sum::<f64>() / fitted.len() as f64;
        let mt = truth.iter().sum::<f64>() / truth.len() as f64;
        let mut num = 0.0;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for i in 0..grid.len() {
            num += (fitted[i] - mf) * (truth[i] - mt);
            d1 += (fitted[i] - mf).powi(2);
            d2 += (truth[i] - mt).powi(2);
        }
        let r = num / (d1 * d2).sqrt();
        assert!(r > 0.9, "shape correlation {r}");
    }

    #[test]
    fn fixed_lambdas_are_respected_and_validated() {
        let (table, _) = generate(&sim_spec(3, 600)).unwrap();
        let cop = independence();
        let spec = ModelSpec::from_terms(
            "treat",
            "event",
            &[Term::Linear("z1".into())],
            &[Term::Smooth(SmoothDecl { column: "c1".into(), basis_dim: 5 })],
            &["z1".into()],
            cop,
        )
        .unwrap();
        let design = build_design(&table, &spec).unwrap();
        let mut opts = FitOptions::default();
        opts.lambdas = Some(vec![10.0]);
        let fit = fit_design(&design, &cop, &opts).unwrap();
        assert_eq!(fit.lambdas, vec![10.0]);
        opts.lambdas = Some(vec![1.0, 2.0]);
        assert!(fit_design(&design, &cop, &opts).is_err());
    }

    #[test]
    fn iteration_cap_reports_honest_flags() {
        let mut dgp = sim_spec(8, 1500);
        dgp.gamma_true = 0.4;
        let (table, _) = generate(&dgp).unwrap();
        let cop = Copula::new(Family::Gaussian, Rotation::R0, 0.0).unwrap();
        let spec = sim_model_spec(cop);
        let mut opts = FitOptions::default();
        opts.max_iterations = 1;
        let fit = fit(&table, &spec, &opts).unwrap();
        assert!(!fit.converged);
        assert!(fit.max_abs_gradient >= opts.gradient_tolerance);
    }

    #[test]
    fn z_statistics_follow_the_definition_and_respect_flags() {
        let (table, _) = generate(&sim_spec(41, 800)).unwrap();
        let spec = sim_model_spec(independence());
        let mut fit = fit(&table, &spec, &FitOptions::default()).unwrap();
        let z = fit.z_statistics();
        let se = fit.std_errors();
        for j in 0..fit.params.len() {
            let zj = z[j].unwrap();
            assert_abs_diff_eq!(zj, fit.params[j] / se[j], epsilon = 1e-12);
        }
        // Hand value: coefficient 0.5, variance 0.0625 -> z = 2.
        fit.params[0] = 0.5;
        fit.vcov[(0, 0)] = 0.0625;
        assert_abs_diff_eq!(fit.z_statistics()[0].unwrap(), 2.0, epsilon = 1e-12);
        // Non-PD information suppresses all z values.
        fit.info_positive_definite = false;
        assert!(fit.z_statistics().iter().all(|v| v.is_none()));
    }
}
