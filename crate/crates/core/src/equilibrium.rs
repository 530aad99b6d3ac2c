//! Closed-form equilibria and the local diagnostics that certify them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{self, CovSpec, INV_SQRT_2PI};
use crate::payoff::{self, GameConfig, Offer};

/// How the arbiter rules on a two-issue dispute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Issue by issue: each component goes to the closer offer independently.
    Ibi,
    /// Whole package: the entire offer nearer in Euclidean distance is selected.
    Wp,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Ibi => "ibi",
            Mode::Wp => "wp",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub a_star: Offer,
    pub b_star: Offer,
    pub mode: Mode,
    /// Correlation above which the pair is a local equilibrium. Issue-by-issue
    /// play decomposes into two single-issue games and holds for every valid
    /// correlation, reported as `-1`.
    pub rho_threshold: f64,
    pub local_condition_holds: bool,
    /// Largest absolute first-order condition at the pair.
    pub gradient_residual: f64,
    pub z_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalCondition {
    pub threshold: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianDiagnostics {
    pub k_x1x1: f64,
    pub k_y1y1: f64,
    pub k_x1y1: f64,
    pub positive_definite: bool,
}

/// Award variances at equilibrium under the two rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    /// `(pi / 2)(sigma_x^2 + sigma_y^2)`, which treats the two issue awards as
    /// uncorrelated.
    pub ibi_variance: f64,
    /// `(pi / 2)(sigma_x^2 + 2 rho sigma_x sigma_y + sigma_y^2)`.
    pub wp_variance: f64,
    /// Issue-by-issue award variance including the covariance of the two
    /// component awards: `ibi_variance + 2 sigma_x sigma_y asin(rho)`. The award
    /// on each issue is `+-c sign(settlement)`, and the signs of correlated
    /// normals agree with probability `1/2 + asin(rho) / pi`.
    pub ibi_variance_correlated: f64,
}

/// Single-issue equilibrium offer `sigma sqrt(2 pi) / 2` for Player II.
pub fn single_issue_offer(sigma: f64) -> f64 {
    sigma * (2.0 * PI).sqrt() / 2.0
}

/// Single-issue kernel: offers `a` (Player I) and `b` (Player II) against a
/// `N(0, sigma^2)` settlement.
pub fn single_issue_payoff(sigma: f64, a: f64, b: f64) -> f64 {
    if a == b {
        return a;
    }
    let z = (b * b - a * a) / (2.0 * sigma * (b - a).abs());
    b + (a - b) * gauss::cdf(z)
}

/// `(dK/da, dK/db)` of [`single_issue_payoff`]; undefined for `a == b`.
pub fn single_issue_gradient(sigma: f64, a: f64, b: f64) -> Result<[f64; 2]> {
    if a == b {
        return Err(Error::Degenerate("offers coincide"));
    }
    let s_omega = sigma * (b - a).abs();
    let z = (b * b - a * a) / (2.0 * s_omega);
    let u = (b - a) * sigma * sigma;
    let v = a - b;
    let (cdf, pdf) = (gauss::cdf(z), gauss::pdf(z));
    let rate = u * z / (s_omega * s_omega);
    Ok([
        cdf + v * pdf * (-a / s_omega + rate),
        1.0 - cdf + v * pdf * (b / s_omega - rate),
    ])
}

/// Issue-by-issue equilibrium: each issue played as its own single-issue game.
pub fn ibi_equilibrium(cov: &CovSpec) -> EquilibriumReport {
    let b_star = Offer::new(
        single_issue_offer(cov.sigma_x()),
        single_issue_offer(cov.sigma_y()),
    );
    let a_star = -b_star;
    let gx = single_issue_gradient(cov.sigma_x(), a_star.x, b_star.x)
        .expect("equilibrium offers are distinct");
    let gy = single_issue_gradient(cov.sigma_y(), a_star.y, b_star.y)
        .expect("equilibrium offers are distinct");
    let residual = gx.iter().chain(gy.iter()).fold(0.0f64, |m, g| m.max(g.abs()));
    EquilibriumReport {
        a_star,
        b_star,
        mode: Mode::Ibi,
        rho_threshold: -1.0,
        local_condition_holds: true,
        gradient_residual: residual,
        z_star: 0.0,
    }
}

/// Common coordinate `x2* = sqrt(2 pi (sigma_x^2 + 2 rho sigma_x sigma_y + sigma_y^2)) / 4`
/// of the whole-package equilibrium offer.
pub fn wp_offer(cov: &CovSpec) -> f64 {
    (2.0 * PI * cov.sum_variance()).sqrt() / 4.0
}

/// Whole-package stationary pair `a* = (-x2*, -x2*)`, `b* = (x2*, x2*)`.
///
/// Always returned; `local_condition_holds` is false when the correlation is at
/// or below the local-optimality threshold.
pub fn wp_equilibrium(cov: &CovSpec) -> EquilibriumReport {
    let b_star = Offer::diagonal(wp_offer(cov));
    let a_star = -b_star;
    let lc = local_condition(cov);
    let grad = raw_gradient(cov, a_star, b_star);
    EquilibriumReport {
        a_star,
        b_star,
        mode: Mode::Wp,
        rho_threshold: lc.threshold,
        local_condition_holds: lc.holds,
        gradient_residual: max_abs(&grad),
        z_star: payoff::raw_z(cov, a_star, b_star),
    }
}

pub fn equilibrium(cov: &CovSpec, mode: Mode) -> EquilibriumReport {
    match mode {
        Mode::Ibi => ibi_equilibrium(cov),
        Mode::Wp => wp_equilibrium(cov),
    }
}

/// `max{-(sigma_x^2 + 3 sigma_y^2), -(3 sigma_x^2 + sigma_y^2)} / (4 sigma_x sigma_y)`
/// and whether `rho` exceeds it.
pub fn local_condition(cov: &CovSpec) -> LocalCondition {
    let denom = 4.0 * cov.sigma_x() * cov.sigma_y();
    let t1 = -(cov.var_x() + 3.0 * cov.var_y()) / denom;
    let t2 = -(3.0 * cov.var_x() + cov.var_y()) / denom;
    let threshold = t1.max(t2);
    LocalCondition {
        threshold,
        holds: cov.rho() > threshold,
    }
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, g| m.max(g.abs()))
}

/// Analytic gradient without bound or degeneracy checks.
pub(crate) fn raw_gradient(cov: &CovSpec, a: Offer, b: Offer) -> [f64; 4] {
    let var_omega = gauss::omega_variance(cov, a, b);
    let s_omega = var_omega.sqrt();
    let z = 0.5 * (b.norm_sq() - a.norm_sq()) / s_omega;
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let u = dx * cov.var_x() + dy * cov.covariance();
    let t = dx * cov.covariance() + dy * cov.var_y();
    let v = a.net() - b.net();
    let cdf = gauss::cdf(z);
    let scale = v * gauss::pdf(z);
    let (ru, rt) = (u * z / var_omega, t * z / var_omega);
    [
        cdf + scale * (-a.x / s_omega + ru),
        cdf + scale * (-a.y / s_omega + rt),
        1.0 - cdf + scale * (b.x / s_omega - ru),
        1.0 - cdf + scale * (b.y / s_omega - rt),
    ]
}

/// `(dK/dx1, dK/dy1, dK/dx2, dK/dy2)` at `(a, b)`.
///
/// The kernel is not differentiable where the offers coincide, so `a == b` is a
/// [`Error::Degenerate`] rather than a zero vector.
pub fn payoff_gradient(game: &GameConfig, a: Offer, b: Offer) -> Result<[f64; 4]> {
    game.check_offer(a)?;
    game.check_offer(b)?;
    if a == b {
        return Err(Error::Degenerate("kernel gradient undefined at a = b"));
    }
    Ok(raw_gradient(game.cov(), a, b))
}

/// Player I's second partials at the whole-package closed form.
pub fn hessian_diagnostics(game: &GameConfig) -> HessianDiagnostics {
    let cov = game.cov();
    let (alpha, beta) = (cov.alpha(), cov.beta());
    let sum = alpha + beta;
    let k = INV_SQRT_2PI / sum.sqrt();
    let k_x1x1 = k * (3.0 - 2.0 * alpha / sum);
    let k_y1y1 = k * (3.0 - 2.0 * beta / sum);

    // Mixed partial at (a*, b*): x1* phi(0) (-2 sigma_Omega^2 - v (u + t)) / sigma_Omega^3
    let x2 = wp_offer(cov);
    let x1 = -x2;
    let d = x2 - x1;
    let var_omega = d * d * sum;
    let s_omega = var_omega.sqrt();
    let v = 2.0 * x1 - 2.0 * x2;
    let u = d * alpha;
    let t = d * beta;
    let k_x1y1 = x1 * INV_SQRT_2PI * (-2.0 * var_omega - v * (u + t)) / (var_omega * s_omega);

    HessianDiagnostics {
        k_x1x1,
        k_y1y1,
        k_x1y1,
        positive_definite: k_x1x1 > 0.0 && k_y1y1 > 0.0,
    }
}

pub fn variance_report(cov: &CovSpec) -> VarianceReport {
    let half_pi = PI / 2.0;
    let ibi = half_pi * (cov.var_x() + cov.var_y());
    VarianceReport {
        ibi_variance: ibi,
        wp_variance: half_pi * cov.sum_variance(),
        ibi_variance_correlated: ibi + 2.0 * cov.sigma_x() * cov.sigma_y() * cov.rho().asin(),
    }
}
