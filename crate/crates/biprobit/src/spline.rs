//! Natural cubic regression splines with quantile knots, a curvature penalty
//! and a sum-to-zero identifiability constraint.
//!
//! A smooth of dimension k places k knots at empirical quantiles of the
//! covariate. The basis interpolates coefficient values at the knots with a
//! natural cubic spline (linear beyond the boundary knots), and the penalty
//! is the integrated squared second derivative, which is `D' B^-1 D` for the
//! usual banded difference matrices. Because an intercept lives elsewhere in
//! the model, the basis is reparameterized by an orthonormal null-space
//! transform Z of the training-sample column sums: k nominal dimensions
//! become k-1 identifiable columns whose sample sum is zero, and the penalty
//! keeps rank k-2 with the linear trend unpenalized.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct SplineBasis {
    /// Strictly increasing knot locations at empirical quantiles.
    pub knots: Vec<f64>,
    /// k x k map from knot values to second derivatives at the knots
    /// (zero first and last rows: natural boundary conditions).
    f_full: DMatrix<f64>,
    /// k x (k-1) orthonormal sum-to-zero reparameterization.
    z: DMatrix<f64>,
    /// Curvature penalty on the reparameterized scale, (k-1) x (k-1).
    pub penalty: DMatrix<f64>,
}

impl SplineBasis {
    /// Build a basis of nominal dimension `basis_dim` from training values.
    pub fn build(values: &[f64], basis_dim: usize) -> Result<Self> {
        if basis_dim < 4 {
            return Err(Error::InvalidArgument(format!(
                "spline basis dimension must be at least 4, got {basis_dim}"
            )));
        }
        let mut finite: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        if finite.len() < basis_dim {
            return Err(Error::Degenerate(format!(
                "need at least {basis_dim} observations for a spline of dimension {basis_dim}"
            )));
        }
        finite.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let knots = quantile_knots(&finite, basis_dim)?;
        let k = basis_dim;

        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let mut d = DMatrix::zeros(k - 2, k);
        let mut b = DMatrix::zeros(k - 2, k - 2);
        for i in 0..k - 2 {
            d[(i, i)] = 1.0 / h[i];
            d[(i, i + 1)] = -1.0 / h[i] - 1.0 / h[i + 1];
            d[(i, i + 2)] = 1.0 / h[i + 1];
            b[(i, i)] = (h[i] + h[i + 1]) / 3.0;
            if i + 1 < k - 2 {
                b[(i, i + 1)] = h[i + 1] / 6.0;
                b[(i + 1, i)] = h[i + 1] / 6.0;
            }
        }
        let chol = b
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite {
                context: "spline bending matrix".into(),
            })?;
        let f = chol.solve(&d); // (k-2) x k
        let mut f_full = DMatrix::zeros(k, k);
        f_full.rows_mut(1, k - 2).copy_from(&f);
        let mut s = d.transpose() * &f;
        // Exact symmetry keeps downstream eigenvalue checks clean.
        s = 0.5 * (&s + s.transpose());

        let mut basis = SplineBasis {
            knots,
            f_full,
            z: DMatrix::identity(k, k - 1),
            penalty: DMatrix::zeros(k - 1, k - 1),
        };
        // Column sums of the raw training basis define the constraint.
        let mut col_sums = DVector::zeros(k);
        for &x in values {
            col_sums += basis.raw_row(x);
        }
        basis.z = null_space_transform(&col_sums);
        basis.penalty = basis.z.transpose() * &s * &basis.z;
        basis.penalty = 0.5 * (&basis.penalty + basis.penalty.transpose());
        Ok(basis)
    }

    /// Number of identifiable columns the smooth contributes to a design.
    pub fn n_cols(&self) -> usize {
        self.knots.len() - 1
    }

    /// Basis row in the identifiable parameterization.
    pub fn row(&self, x: f64) -> DVector<f64> {
        self.z.transpose() * self.raw_row(x)
    }

    /// Raw k-dimensional basis row: cardinal natural-spline interpolation
    /// weights at `x`, linear beyond the boundary knots.
    fn raw_row(&self, x: f64) -> DVector<f64> {
        let k = self.knots.len();
        let lo = self.knots[0];
        let hi = self.knots[k - 1];
        if x < lo {
            return self.piece_row(0, lo) + (x - lo) * self.piece_slope(0, lo);
        }
        if x > hi {
            return self.piece_row(k - 2, hi) + (x - hi) * self.piece_slope(k - 2, hi);
        }
        let j = match self
            .knots
            .binary_search_by(|p| p.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(k - 2),
            Err(i) => i.saturating_sub(1).min(k - 2),
        };
        self.piece_row(j, x)
    }

    /// Basis row for a point inside piece j (between knots j and j+1).
    fn piece_row(&self, j: usize, x: f64) -> DVector<f64> {
        let k = self.knots.len();
        let (x0, x1) = (self.knots[j], self.knots[j + 1]);
        let d = x1 - x0;
        let am = (x1 - x) / d;
        let ap = (x - x0) / d;
        let cm = ((x1 - x).powi(3) / d - d * (x1 - x)) / 6.0;
        let cp = ((x - x0).powi(3) / d - d * (x - x0)) / 6.0;
        let mut row = DVector::zeros(k);
        row[j] += am;
        row[j + 1] += ap;
        row += cm * self.f_full.row(j).transpose();
        row += cp * self.f_full.row(j + 1).transpose();
        row
    }

    /// d/dx of the basis row within piece j.
    fn piece_slope(&self, j: usize, x: f64) -> DVector<f64> {
        let k = self.knots.len();
        let (x0, x1) = (self.knots[j], self.knots[j + 1]);
        let d = x1 - x0;
        let dcm = (-3.0 * (x1 - x) * (x1 - x) / d + d) / 6.0;
        let dcp = (3.0 * (x - x0) * (x - x0) / d - d) / 6.0;
        let mut row = DVector::zeros(k);
        row[j] -= 1.0 / d;
        row[j + 1] += 1.0 / d;
        row += dcm * self.f_full.row(j).transpose();
        row += dcp * self.f_full.row(j + 1).transpose();
        row
    }
}

/// k knots at evenly spaced empirical quantiles (type-7 interpolation).
fn quantile_knots(sorted: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = sorted.len();
    let mut knots = Vec::with_capacity(k);
    for j in 0..k {
        let pos = j as f64 / (k - 1) as f64 * (n - 1) as f64;
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        let q = if i + 1 < n {
            sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
        } else {
            sorted[n - 1]
        };
        knots.push(q);
    }
    if knots.windows(2).any(|w| w[1] - w[0] <= 0.0) {
        return Err(Error::Degenerate(
            "spline knots are not strictly increasing; too few distinct covariate values".into(),
        ));
    }
    Ok(knots)
}

/// Orthonormal basis of the null space of `m'` (k x (k-1)), via the
/// Householder reflection sending m to a multiple of e1.
fn null_space_transform(m: &DVector<f64>) -> DMatrix<f64> {
    let k = m.len();
    let norm = m.norm();
    let mut v = m.clone();
    v[0] += if m[0] >= 0.0 { norm } else { -norm };
    let vtv = v.dot(&v);
    let mut h = DMatrix::identity(k, k);
    if vtv > 0.0 {
        h -= (2.0 / vtv) * (&v * v.transpose());
    }
    h.columns(1, k - 1).into_owned()
}
