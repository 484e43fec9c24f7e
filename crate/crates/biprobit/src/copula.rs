//! Parametric copula catalog.
//!
//! Ten bivariate families: Gaussian (N), Student t (T), Clayton (C), Gumbel
//! (G), Joe (J), Frank (F), Plackett (PL), Ali-Mikhail-Haq (AMH),
//! Farlie-Gumbel-Morgenstern (FGM) and Hougaard (HO). Clayton, Gumbel and Joe
//! come in four rotations (0/90/180/270 degrees), giving 19 usable
//! specifications; 90 and 270 flip the dependence sign, 180 is the survival
//! copula. Every family exposes the CDF, both conditional partials, and the
//! derivative in the dependence parameter — all in closed form, so the joint
//! likelihood and its gradient never need numerical integration.
//!
//! The dependence parameter is carried on an unconstrained optimizer scale
//! and mapped into the family's natural domain by a smooth link (`tanh` for
//! correlations, `exp` / `1+exp` for half-open and `(1,inf)` domains, a
//! scaled logistic for Hougaard, identity with an epsilon guard for Frank).
//! Archimedean CDFs are evaluated in log space so extreme parameters degrade
//! to the correct Frechet limits instead of overflowing.

use crate::dist;
use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Inputs to every copula evaluation are clamped into [EPS_UNIT, 1-EPS_UNIT].
pub const EPS_UNIT: f64 = 1e-10;

/// Epsilon guard keeping the Frank parameter away from its removable
/// singularity at zero.
pub const FRANK_GUARD: f64 = 1e-8;

/// Below this |theta| the Frank kernel switches to a Taylor expansion.
///
/// The closed forms divide by theta (CDF) and theta^2 (theta-derivative), so
/// rounding error in `ln(1 - theta*u*v*...)` is amplified by up to 1/theta^2:
/// at theta = 1e-8 the derivative comes out as pure noise of order 1e8 ulps.
/// At the cutoff both branches agree to ~1e-12 absolute; the series keeps the
/// CDF, partials, and theta-derivative mutually consistent down to theta = 0.
const FRANK_SERIES_CUTOFF: f64 = 1e-2;

fn clamp_unit(u: f64) -> f64 {
    u.clamp(EPS_UNIT, 1.0 - EPS_UNIT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Gaussian,
    StudentT,
    Clayton,
    Gumbel,
    Joe,
    Frank,
    Plackett,
    Amh,
    Fgm,
    Hougaard,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Gaussian => "Gaussian",
            Family::StudentT => "Student t",
            Family::Clayton => "Clayton",
            Family::Gumbel => "Gumbel",
            Family::Joe => "Joe",
            Family::Frank => "Frank",
            Family::Plackett => "Plackett",
            Family::Amh => "AMH",
            Family::Fgm => "FGM",
            Family::Hougaard => "Hougaard",
        }
    }

    /// True for the three families that support rotated variants.
    pub fn rotatable(self) -> bool {
        matches!(self, Family::Clayton | Family::Gumbel | Family::Joe)
    }

    /// Map the unconstrained optimizer-scale parameter into the family's
    /// natural domain.
    pub fn link(self, t: f64) -> f64 {
        match self {
            Family::Gaussian | Family::StudentT | Family::Amh | Family::Fgm => t.tanh(),
            Family::Clayton | Family::Plackett => t.exp(),
            Family::Gumbel | Family::Joe => 1.0 + t.exp(),
            Family::Frank => {
                if t.abs() < FRANK_GUARD {
                    if t < 0.0 {
                        -FRANK_GUARD
                    } else {
                        FRANK_GUARD
                    }
                } else {
                    t
                }
            }
            Family::Hougaard => 1.0 / (1.0 + (-t).exp()),
        }
    }

    /// d(natural)/d(unconstrained) at optimizer-scale `t`.
    ///
    /// Frank reports slope one everywhere: the guard band is 2e-8 wide, and a
    /// zero slope there would strand the optimizer at its usual start point.
    pub fn link_deriv(self, t: f64) -> f64 {
        match self {
            Family::Gaussian | Family::StudentT | Family::Amh | Family::Fgm => {
                let th = t.tanh();
                1.0 - th * th
            }
            Family::Clayton | Family::Plackett => t.exp(),
            Family::Gumbel | Family::Joe => t.exp(),
            Family::Frank => 1.0,
            Family::Hougaard => {
                let a = 1.0 / (1.0 + (-t).exp());
                a * (1.0 - a)
            }
        }
    }

    /// Inverse of [`Family::link`]. Rejects values outside the open natural
    /// domain.
    pub fn unlink(self, theta: f64) -> Result<f64> {
        let bad = || Error::InvalidParameter {
            family: self.label().to_string(),
            value: theta,
        };
        if !theta.is_finite() {
            return Err(bad());
        }
        match self {
            Family::Gaussian | Family::StudentT | Family::Amh | Family::Fgm => {
                if theta <= -1.0 || theta >= 1.0 {
                    return Err(bad());
                }
                Ok(theta.atanh())
            }
            Family::Clayton | Family::Plackett => {
                if theta <= 0.0 {
                    return Err(bad());
                }
                Ok(theta.ln())
            }
            Family::Gumbel | Family::Joe => {
                if theta <= 1.0 {
                    return Err(bad());
                }
                Ok((theta - 1.0).ln())
            }
            Family::Frank => {
                if theta == 0.0 {
                    return Err(bad());
                }
                Ok(theta)
            }
            Family::Hougaard => {
                if theta <= 0.0 || theta >= 1.0 {
                    return Err(bad());
                }
                Ok((theta / (1.0 - theta)).ln())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rotation {
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub fn degrees(self) -> u32 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }
}

/// Apply a rotation to a base copula CDF.
pub fn rotate_cdf<F: Fn(f64, f64) -> f64>(base: F, rotation: Rotation, u: f64, v: f64) -> f64 {
    match rotation {
        Rotation::R0 => base(u, v),
        Rotation::R90 => v - base(1.0 - u, v),
        Rotation::R180 => u + v - 1.0 + base(1.0 - u, 1.0 - v),
        Rotation::R270 => u - base(u, 1.0 - v),
    }
}

/// One concrete copula specification: family, rotation and the dependence
/// parameter on the unconstrained optimizer scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Copula {
    pub family: Family,
    pub rotation: Rotation,
    /// Dependence parameter on the optimizer scale; `family.link` maps it to
    /// the natural domain.
    pub theta_unc: f64,
    /// Fixed degrees of freedom for the Student t family; ignored elsewhere.
    pub t_df: u32,
}

/// Codes for the full 19-specification catalog, in sweep order.
pub const ALL_CODES: [&str; 19] = [
    "N", "T", "C0", "C90", "C180", "C270", "G0", "G90", "G180", "G270", "J0", "J90", "J180",
    "J270", "F", "PL", "AMH", "FGM", "HO",
];

impl Copula {
    pub fn new(family: Family, rotation: Rotation, theta_unc: f64) -> Result<Self> {
        if rotation != Rotation::R0 && !family.rotatable() {
            return Err(Error::InvalidArgument(format!(
                "{} does not support rotations",
                family.label()
            )));
        }
        if !theta_unc.is_finite() {
            return Err(Error::InvalidParameter {
                family: family.label().to_string(),
                value: theta_unc,
            });
        }
        Ok(Copula {
            family,
            rotation,
            theta_unc,
            t_df: 3,
        })
    }

    /// Construct from a natural-domain parameter value.
    pub fn from_natural(family: Family, rotation: Rotation, theta: f64) -> Result<Self> {
        Copula::new(family, rotation, family.unlink(theta)?)
    }

    pub fn with_t_df(mut self, df: u32) -> Result<Self> {
        if df < 1 {
            return Err(Error::InvalidArgument(
                "Student t degrees of freedom must be at least 1".into(),
            ));
        }
        self.t_df = df;
        Ok(self)
    }

    /// Same family, rotation and degrees of freedom at a different
    /// unconstrained parameter value — the likelihood's per-iteration view.
    pub fn reparameterized(&self, theta_unc: f64) -> Self {
        Copula { theta_unc, ..*self }
    }

    /// Parse a catalog code like `N`, `C180` or `J90`.
    pub fn from_code(code: &str, theta_unc: f64) -> Result<Self> {
        let (family, rotation) = parse_code(code)?;
        Copula::new(family, rotation, theta_unc)
    }

    /// Catalog code of this specification.
    pub fn code(&self) -> String {
        let base = match self.family {
            Family::Gaussian => return "N".into(),
            Family::StudentT => return "T".into(),
            Family::Frank => return "F".into(),
            Family::Plackett => return "PL".into(),
            Family::Amh => return "AMH".into(),
            Family::Fgm => return "FGM".into(),
            Family::Hougaard => return "HO".into(),
            Family::Clayton => "C",
            Family::Gumbel => "G",
            Family::Joe => "J",
        };
        format!("{}{}", base, self.rotation.degrees())
    }

    /// Dependence parameter on the natural scale.
    pub fn theta(&self) -> f64 {
        self.family.link(self.theta_unc)
    }

    /// With the parameter at `theta_unc`, evaluate C(u, v).
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        let th = self.theta();
        let val = match self.rotation {
            Rotation::R0 => base_cdf(self.family, u, v, th, self.t_df),
            Rotation::R90 => v - base_cdf(self.family, 1.0 - u, v, th, self.t_df),
            Rotation::R180 => u + v - 1.0 + base_cdf(self.family, 1.0 - u, 1.0 - v, th, self.t_df),
            Rotation::R270 => u - base_cdf(self.family, u, 1.0 - v, th, self.t_df),
        };
        val.clamp(0.0, 1.0)
    }

    /// Conditional CDF dC/du = P(V <= v | U = u).
    pub fn partial_u(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        let th = self.theta();
        let val = match self.rotation {
            Rotation::R0 => base_du(self.family, u, v, th, self.t_df),
            Rotation::R90 => base_du(self.family, 1.0 - u, v, th, self.t_df),
            Rotation::R180 => 1.0 - base_du(self.family, 1.0 - u, 1.0 - v, th, self.t_df),
            Rotation::R270 => 1.0 - base_du(self.family, u, 1.0 - v, th, self.t_df),
        };
        val.clamp(0.0, 1.0)
    }

    /// Conditional CDF dC/dv = P(U <= u | V = v).
    pub fn partial_v(&self, u: f64, v: f64) -> f64 {
        // Every family in the catalog is exchangeable, so dC/dv at (u, v) is
        // dC/du at (v, u); the rotations are what break the symmetry.
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        let th = self.theta();
        let val = match self.rotation {
            Rotation::R0 => base_du(self.family, v, u, th, self.t_df),
            Rotation::R90 => 1.0 - base_du(self.family, v, 1.0 - u, th, self.t_df),
            Rotation::R180 => 1.0 - base_du(self.family, 1.0 - v, 1.0 - u, th, self.t_df),
            Rotation::R270 => base_du(self.family, 1.0 - v, u, th, self.t_df),
        };
        val.clamp(0.0, 1.0)
    }

    /// dC/d(theta_unc): derivative of the CDF in the optimizer-scale
    /// parameter, including the link chain rule.
    pub fn dtheta(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        let th = self.theta();
        let d_nat = match self.rotation {
            Rotation::R0 => base_dtheta(self.family, u, v, th, self.t_df),
            Rotation::R90 => -base_dtheta(self.family, 1.0 - u, v, th, self.t_df),
            Rotation::R180 => base_dtheta(self.family, 1.0 - u, 1.0 - v, th, self.t_df),
            Rotation::R270 => -base_dtheta(self.family, u, 1.0 - v, th, self.t_df),
        };
        d_nat * self.family.link_deriv(self.theta_unc)
    }

    /// Draw one (u, v) pair by conditional inversion: u and a uniform w are
    /// drawn, then dC/du(u, v) = w is solved for v by bisection. The same
    /// numeric path serves every family.
    pub fn sample_pair<R: Rng>(&self, rng: &mut R) -> Result<(f64, f64)> {
        let u = clamp_unit(rng.gen::<f64>());
        let w = clamp_unit(rng.gen::<f64>());
        let v = self.invert_partial_u(u, w)?;
        Ok((u, v))
    }

    /// Solve dC/du(u, v) = w for v.
    fn invert_partial_u(&self, u: f64, w: f64) -> Result<f64> {
        let mut lo = EPS_UNIT;
        let mut hi = 1.0 - EPS_UNIT;
        let flo = self.partial_u(u, lo) - w;
        let fhi = self.partial_u(u, hi) - w;
        if flo >= 0.0 {
            return Ok(lo);
        }
        if fhi <= 0.0 {
            return Ok(hi);
        }
        if !(flo.is_finite() && fhi.is_finite()) {
            return Err(Error::RootFind {
                context: format!("conditional inversion for {}", self.code()),
                u,
                target: w,
            });
        }
        for _ in 0..90 {
            let mid = 0.5 * (lo + hi);
            if self.partial_u(u, mid) - w <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

impl std::fmt::Display for Copula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Parse a catalog code into its family and rotation.
pub fn parse_code(code: &str) -> Result<(Family, Rotation)> {
    let norm = code.trim().to_ascii_uppercase();
    let fixed = match norm.as_str() {
        "N" => Some(Family::Gaussian),
        "T" => Some(Family::StudentT),
        "F" => Some(Family::Frank),
        "PL" => Some(Family::Plackett),
        "AMH" => Some(Family::Amh),
        "FGM" => Some(Family::Fgm),
        "HO" => Some(Family::Hougaard),
        _ => None,
    };
    if let Some(f) = fixed {
        return Ok((f, Rotation::R0));
    }
    let (head, tail) = norm.split_at(1);
    let family = match head {
        "C" => Family::Clayton,
        "G" => Family::Gumbel,
        "J" => Family::Joe,
        _ => return Err(Error::UnknownCopulaCode(code.to_string())),
    };
    let rotation = match tail {
        "0" => Rotation::R0,
        "90" => Rotation::R90,
        "180" => Rotation::R180,
        "270" => Rotation::R270,
        _ => return Err(Error::UnknownCopulaCode(code.to_string())),
    };
    Ok((family, rotation))
}

/// The full 19-specification catalog at a common optimizer-scale parameter.
pub fn catalog(theta_unc: f64) -> Vec<Copula> {
    ALL_CODES
        .iter()
        .map(|c| Copula::from_code(c, theta_unc).expect("catalog codes are valid"))
        .collect()
}

// ---------------------------------------------------------------------------
// Base-family kernels on the natural parameter scale, unrotated.
// ---------------------------------------------------------------------------

fn logsumexp2(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// ln(1 - e^x) for x <= 0, stable near both ends.
fn ln1mexp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

fn base_cdf(family: Family, u: f64, v: f64, th: f64, df: u32) -> f64 {
    match family {
        Family::Gaussian => {
            dist::bvn_cdf(dist::norm_quantile(u), dist::norm_quantile(v), th)
        }
        Family::StudentT => {
            dist::bvt_cdf(dist::t_quantile(u, df), dist::t_quantile(v, df), th, df)
        }
        Family::Clayton => {
            let a = -th * u.ln();
            let b = -th * v.ln();
            let m = a.max(b);
            let ln_s = m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln();
            (-ln_s / th).exp()
        }
        Family::Gumbel => gumbel_cdf(u, v, th),
        Family::Joe => {
            let (la, lb) = (th * (-u).ln_1p(), th * (-v).ln_1p());
            let ln_s = logsumexp2(la + ln1mexp(lb), lb);
            -(ln_s / th).exp_m1()
        }
        Family::Frank => {
            if th.abs() < FRANK_SERIES_CUTOFF {
                return frank_cdf_series(u, v, th);
            }
            let a = (-th * u).exp_m1();
            let b = (-th * v).exp_m1();
            let c = (-th).exp_m1();
            -(a * b / c).ln_1p() / th
        }
        Family::Plackett => {
            let l = 1.0 + (th - 1.0) * (u + v);
            let s = l * l - 4.0 * th * (th - 1.0) * u * v;
            2.0 * th * u * v / (l + s.sqrt())
        }
        Family::Amh => u * v / (1.0 - th * (1.0 - u) * (1.0 - v)),
        Family::Fgm => u * v * (1.0 + th * (1.0 - u) * (1.0 - v)),
        Family::Hougaard => gumbel_cdf(u, v, 1.0 / th),
    }
}

fn gumbel_cdf(u: f64, v: f64, m: f64) -> f64 {
    let (x, y) = (-u.ln(), -v.ln());
    let ln_a = logsumexp2(m * x.ln(), m * y.ln());
    (-(ln_a / m).exp()).exp()
}

fn base_du(family: Family, u: f64, v: f64, th: f64, df: u32) -> f64 {
    match family {
        Family::Gaussian => {
            let a = dist::norm_quantile(u);
            let b = dist::norm_quantile(v);
            dist::norm_cdf((b - th * a) / (1.0 - th * th).sqrt())
        }
        Family::StudentT => {
            let nu = df as f64;
            let x = dist::t_quantile(u, df);
            let y = dist::t_quantile(v, df);
            let scale = ((nu + 1.0) / (nu + x * x)).sqrt() / (1.0 - th * th).sqrt();
            dist::t_cdf((y - th * x) * scale, df + 1)
        }
        Family::Clayton => {
            let a = -th * u.ln();
            let b = -th * v.ln();
            let m = a.max(b);
            let ln_s = m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln();
            (-(th + 1.0) * u.ln() - (1.0 / th + 1.0) * ln_s).exp()
        }
        Family::Gumbel => gumbel_du(u, v, th),
        Family::Joe => {
            let (lu, lv) = ((-u).ln_1p(), (-v).ln_1p());
            let (la, lb) = (th * lu, th * lv);
            let ln_s = logsumexp2(la + ln1mexp(lb), lb);
            ((1.0 / th - 1.0) * ln_s + (th - 1.0) * lu + ln1mexp(lb)).exp()
        }
        Family::Frank => {
            if th.abs() < FRANK_SERIES_CUTOFF {
                return frank_du_series(u, v, th);
            }
            let a = (-th * u).exp_m1();
            let b = (-th * v).exp_m1();
            let c = (-th).exp_m1();
            (a + 1.0) * b / (c + a * b)
        }
        Family::Plackett => {
            let l = 1.0 + (th - 1.0) * (u + v);
            let s = l * l - 4.0 * th * (th - 1.0) * u * v;
            0.5 * (1.0 - (l - 2.0 * th * v) / s.sqrt())
        }
        Family::Amh => {
            let d = 1.0 - th * (1.0 - u) * (1.0 - v);
            v * (1.0 - th * (1.0 - v)) / (d * d)
        }
        Family::Fgm => v + th * v * (1.0 - v) * (1.0 - 2.0 * u),
        Family::Hougaard => gumbel_du(u, v, 1.0 / th),
    }
}

fn gumbel_du(u: f64, v: f64, m: f64) -> f64 {
    let (x, y) = (-u.ln(), -v.ln());
    let ln_a = logsumexp2(m * x.ln(), m * y.ln());
    let c = (-(ln_a / m).exp()).exp();
    c * ((1.0 / m - 1.0) * ln_a + (m - 1.0) * x.ln()).exp() / u
}

fn base_dtheta(family: Family, u: f64, v: f64, th: f64, df: u32) -> f64 {
    match family {
        Family::Gaussian => {
            dist::bvn_pdf(dist::norm_quantile(u), dist::norm_quantile(v), th)
        }
        Family::StudentT => {
            dist::bvt_cdf_drho(dist::t_quantile(u, df), dist::t_quantile(v, df), th, df)
        }
        Family::Clayton => {
            let a = -th * u.ln();
            let b = -th * v.ln();
            let m = a.max(b);
            let ln_s = m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln();
            let c = (-ln_s / th).exp();
            let frac = (a - ln_s).exp() * u.ln() + (b - ln_s).exp() * v.ln();
            c * (ln_s / (th * th) + frac / th)
        }
        Family::Gumbel => gumbel_dtheta(u, v, th),
        Family::Joe => {
            let (lu, lv) = ((-u).ln_1p(), (-v).ln_1p());
            let (la, lb) = (th * lu, th * lv);
            let (l1ma, l1mb) = (ln1mexp(la), ln1mexp(lb));
            let ln_s = logsumexp2(la + l1mb, lb);
            let sp_over_s = (la + l1mb - ln_s).exp() * lu + (lb + l1ma - ln_s).exp() * lv;
            -(ln_s / th).exp() * (sp_over_s / th - ln_s / (th * th))
        }
        Family::Frank => {
            if th.abs() < FRANK_SERIES_CUTOFF {
                return frank_dtheta_series(u, v, th);
            }
            let a = (-th * u).exp_m1();
            let b = (-th * v).exp_m1();
            let c = (-th).exp_m1();
            let d = 1.0 + a * b / c;
            let da = -u * (a + 1.0);
            let db = -v * (b + 1.0);
            let dc = -(c + 1.0);
            let dd = (da * b + a * db) / c - a * b * dc / (c * c);
            d.ln() / (th * th) - dd / (th * d)
        }
        Family::Plackett => {
            let s_uv = u + v;
            let l = 1.0 + (th - 1.0) * s_uv;
            let s = l * l - 4.0 * th * (th - 1.0) * u * v;
            let sq = s.sqrt();
            let w = l + sq;
            let wp = s_uv + (l * s_uv - 2.0 * (2.0 * th - 1.0) * u * v) / sq;
            2.0 * u * v / w - 2.0 * th * u * v * wp / (w * w)
        }
        Family::Amh => {
            let d = 1.0 - th * (1.0 - u) * (1.0 - v);
            u * v * (1.0 - u) * (1.0 - v) / (d * d)
        }
        Family::Fgm => u * v * (1.0 - u) * (1.0 - v),
        // d/d(alpha) with m = 1/alpha: chain through the Gumbel kernel.
        Family::Hougaard => -gumbel_dtheta(u, v, 1.0 / th) / (th * th),
    }
}

fn gumbel_dtheta(u: f64, v: f64, m: f64) -> f64 {
    let (x, y) = (-u.ln(), -v.ln());
    let (la, lb) = (m * x.ln(), m * y.ln());
    let ln_a = logsumexp2(la, lb);
    let p = (ln_a / m).exp();
    let c = (-p).exp();
    let q = (la - ln_a).exp() * x.ln() + (lb - ln_a).exp() * y.ln();
    -c * p * (q / m - ln_a / (m * m))
}

/// Shared building blocks of the small-theta Frank expansion.
///
/// With x = u^2 - u and y = v^2 - v the Taylor coefficients of the Frank CDF
/// around theta = 0 factor as xy/2, xy*q/12, xy*r/24, xy*q*s/720 where
/// q = (2u-1)(2v-1), r = 6xy + x + y, s = 36xy + 3x + 3y - 1.
fn frank_series_parts(u: f64, v: f64) -> (f64, f64, f64, f64, f64) {
    let x = u * u - u;
    let y = v * v - v;
    let q = (2.0 * u - 1.0) * (2.0 * v - 1.0);
    let r = 6.0 * x * y + x + y;
    let s = 36.0 * x * y + 3.0 * x + 3.0 * y - 1.0;
    (x, y, q, r, s)
}

fn frank_cdf_series(u: f64, v: f64, th: f64) -> f64 {
    let (x, y, q, r, s) = frank_series_parts(u, v);
    let xy = x * y;
    u * v
        + th * (xy / 2.0 + th * (xy * q / 12.0 + th * (xy * r / 24.0 + th * xy * q * s / 720.0)))
}

fn frank_du_series(u: f64, v: f64, th: f64) -> f64 {
    let (x, y, q, r, s) = frank_series_parts(u, v);
    let dx = 2.0 * u - 1.0;
    let dq = 2.0 * (2.0 * v - 1.0);
    // Derivatives in u of the CDF coefficients, by the product rule:
    // r and s depend on u through x alone (dr = dx*(6y+1), ds = 3*dx*(12y+1)).
    let t1 = dx * y / 2.0;
    let t2 = (dx * y * q + x * y * dq) / 12.0;
    let t3 = dx * y * (r + x * (6.0 * y + 1.0)) / 24.0;
    let t4 = (dx * y * q * s + x * y * dq * s + x * y * q * 3.0 * dx * (12.0 * y + 1.0)) / 720.0;
    v + th * (t1 + th * (t2 + th * (t3 + th * t4)))
}

fn frank_dtheta_series(u: f64, v: f64, th: f64) -> f64 {
    let (x, y, q, r, s) = frank_series_parts(u, v);
    let xy = x * y;
    xy / 2.0 + th * (xy * q / 6.0 + th * (xy * r / 8.0 + th * xy * q * s / 180.0))
}
