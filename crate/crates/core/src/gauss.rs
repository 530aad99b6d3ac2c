//! Normal-distribution mathematics for the arbiter's bivariate prior.
//!
//! The prior on the fair settlement `(xi, eta)` is a zero-mean bivariate normal
//! with covariance described by [`CovSpec`]. Every payoff in the game reduces to
//! the distribution of a linear projection of that prior, so this module supplies
//! the scalar density and CDF, the projected variances, and the direction of
//! minimum variance.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::payoff::Offer;

/// `1 / sqrt(2 pi)`, the standard normal density at zero.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Covariance of the arbiter's bivariate normal prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCovSpec")]
pub struct CovSpec {
    sigma_x: f64,
    sigma_y: f64,
    rho: f64,
}

#[derive(Deserialize)]
struct RawCovSpec {
    sigma_x: f64,
    sigma_y: f64,
    rho: f64,
}

impl TryFrom<RawCovSpec> for CovSpec {
    type Error = Error;

    fn try_from(raw: RawCovSpec) -> Result<Self> {
        CovSpec::new(raw.sigma_x, raw.sigma_y, raw.rho)
    }
}

impl CovSpec {
    /// Validates `sigma_x, sigma_y > 0` and `-1 < rho < 1`.
    pub fn new(sigma_x: f64, sigma_y: f64, rho: f64) -> Result<Self> {
        if !(sigma_x.is_finite() && sigma_y.is_finite() && rho.is_finite()) {
            return Err(Error::NonFinite("covariance parameters"));
        }
        if sigma_x <= 0.0 || sigma_y <= 0.0 {
            return Err(Error::InvalidCovariance(format!(
                "standard deviations must be positive (sigma_x = {sigma_x}, sigma_y = {sigma_y})"
            )));
        }
        if rho <= -1.0 || rho >= 1.0 {
            return Err(Error::InvalidCovariance(format!(
                "correlation must lie in (-1, 1), got {rho}"
            )));
        }
        Ok(Self {
            sigma_x,
            sigma_y,
            rho,
        })
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }

    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Off-diagonal entry `rho * sigma_x * sigma_y`.
    pub fn covariance(&self) -> f64 {
        self.rho * self.sigma_x * self.sigma_y
    }

    pub fn var_x(&self) -> f64 {
        self.sigma_x * self.sigma_x
    }

    pub fn var_y(&self) -> f64 {
        self.sigma_y * self.sigma_y
    }

    /// `sigma_x^2 + rho sigma_x sigma_y`
    pub fn alpha(&self) -> f64 {
        self.var_x() + self.covariance()
    }

    /// `rho sigma_x sigma_y + sigma_y^2`
    pub fn beta(&self) -> f64 {
        self.covariance() + self.var_y()
    }

    /// `sigma_x^2 - rho sigma_x sigma_y`
    pub fn alpha_prime(&self) -> f64 {
        self.var_x() - self.covariance()
    }

    /// `sigma_y^2 - rho sigma_x sigma_y`
    pub fn beta_prime(&self) -> f64 {
        self.var_y() - self.covariance()
    }

    /// Variance of `xi + eta`, i.e. `alpha + beta`.
    pub fn sum_variance(&self) -> f64 {
        self.var_x() + 2.0 * self.covariance() + self.var_y()
    }

    /// Lower-triangular square root `L` of the covariance, as `(l11, l21, l22)`.
    pub fn cholesky(&self) -> (f64, f64, f64) {
        let l11 = self.sigma_x;
        let l21 = self.rho * self.sigma_y;
        let l22 = self.sigma_y * (1.0 - self.rho * self.rho).sqrt();
        (l11, l21, l22)
    }

    /// Same covariance with the two issues swapped.
    pub fn swapped(&self) -> Self {
        Self {
            sigma_x: self.sigma_y,
            sigma_y: self.sigma_x,
            rho: self.rho,
        }
    }
}

/// Standard normal density `exp(-z^2/2) / sqrt(2 pi)`.
pub fn std_normal_pdf(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::NonFinite("z"));
    }
    Ok(pdf(z))
}

/// Standard normal distribution function.
///
/// Evaluated as `erfc(-z / sqrt 2) / 2` with the fdlibm complementary error
/// function, which is accurate to within one ulp; the absolute error of the
/// result is below `1e-16` across the real line.
pub fn std_normal_cdf(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::NonFinite("z"));
    }
    Ok(cdf(z))
}

#[inline]
pub(crate) fn pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

#[inline]
pub(crate) fn cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Inverse of the standard normal distribution function for `p` in `(0, 1)`.
///
/// Acklam's rational approximation (relative error about `1.2e-9`) polished by
/// one Halley step against [`std_normal_cdf`], which brings it to full double
/// precision. Used for Monte Carlo normal generation so replays only depend on
/// this crate's arithmetic.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::NonFinite("p"));
    }
    if p <= 0.0 || p >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "quantile probability must lie in (0, 1), got {p}"
        )));
    }
    Ok(quantile(p))
}

pub(crate) fn quantile(p: f64) -> f64 {
    if p > 0.5 {
        return -quantile(1.0 - p);
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };

    // Halley step on cdf(x) - p.
    let e = cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Variance of `Omega = (x2 - x1) xi + (y2 - y1) eta` for offers `a = (x1, y1)`
/// and `b = (x2, y2)`.
pub fn omega_variance(cov: &CovSpec, a: Offer, b: Offer) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    dx * dx * cov.var_x() + 2.0 * dx * dy * cov.covariance() + dy * dy * cov.var_y()
}

/// Variance of the projection `xi cos(theta) + eta sin(theta)`.
pub fn directional_variance(cov: &CovSpec, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    cov.var_x() * c * c + 2.0 * cov.covariance() * c * s + cov.var_y() * s * s
}

/// Maps an angle into `[0, 2 pi)`.
pub fn canonical_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

fn axis_ratio(cov: &CovSpec) -> Result<f64> {
    if cov.rho() <= 0.0 {
        return Err(Error::UnsupportedRegime(format!(
            "minor-axis angle requires rho > 0, got {}",
            cov.rho()
        )));
    }
    if cov.sigma_x() >= cov.sigma_y() {
        return Err(Error::UnsupportedRegime(format!(
            "minor-axis angle requires sigma_x < sigma_y, got {} >= {}",
            cov.sigma_x(),
            cov.sigma_y()
        )));
    }
    Ok((cov.var_y() - cov.var_x()) / (2.0 * cov.covariance()))
}

/// Direction `theta_M` of minimum projected variance, on the branch
/// `pi + arctan(q - sqrt(q^2 + 1))` with `q = (sigma_y^2 - sigma_x^2) / (2 rho sigma_x sigma_y)`.
///
/// The result lies in `(3 pi / 4, pi)`. Defined only for `rho > 0` and
/// `sigma_x < sigma_y`; anything else (including `sigma_x == sigma_y`) is an
/// [`Error::UnsupportedRegime`].
pub fn minor_axis_angle(cov: &CovSpec) -> Result<f64> {
    let q = axis_ratio(cov)?;
    // q - sqrt(q^2 + 1) rewritten to avoid cancellation for large q
    let slope = -1.0 / (q + q.hypot(1.0));
    Ok(PI + slope.atan())
}

/// Direction `theta^M` of maximum projected variance on the branch
/// `pi + arctan(q + sqrt(q^2 + 1))`, in `(5 pi / 4, 3 pi / 2)`.
pub fn major_axis_angle(cov: &CovSpec) -> Result<f64> {
    let q = axis_ratio(cov)?;
    Ok(PI + (q + q.hypot(1.0)).atan())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn cov(sx: f64, sy: f64, rho: f64) -> CovSpec {
        CovSpec::new(sx, sy, rho).unwrap()
    }

    #[test]
    fn rejects_invalid_covariances() {
        assert!(CovSpec::new(0.0, 1.0, 0.0).is_err());
        assert!(CovSpec::new(1.0, -1.0, 0.0).is_err());
        assert!(CovSpec::new(1.0, 1.0, 1.0).is_err());
        assert!(CovSpec::new(1.0, 1.0, -1.0).is_err());
        assert!(matches!(
            CovSpec::new(f64::NAN, 1.0, 0.0),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn deserialization_validates() {
        let ok: CovSpec =
            serde_json::from_str(r#"{"sigma_x":1.0,"sigma_y":2.0,"rho":0.5}"#).unwrap();
        assert_eq!(ok, cov(1.0, 2.0, 0.5));
        assert!(serde_json::from_str::<CovSpec>(r#"{"sigma_x":1.0,"sigma_y":2.0,"rho":1.5}"#).is_err());
    }

    #[test]
    fn pdf_known_values() {
        assert_eq!(std_normal_pdf(0.0).unwrap(), 0.398_942_280_401_432_7);
        assert_eq!(std_normal_pdf(1.0).unwrap(), std_normal_pdf(-1.0).unwrap());
        assert!(std_normal_pdf(f64::INFINITY).is_err());
    }

    #[test]
    fn pdf_matches_series_oracle() {
        // exp(-3.125) = 1 / sum_k 3.125^k / k!, all terms positive
        let x: f64 = 3.125;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..80 {
            term *= x / k as f64;
            sum += term;
        }
        let oracle = INV_SQRT_2PI / sum;
        assert!((std_normal_pdf(2.5).unwrap() - oracle).abs() < 1e-14);
    }

    #[test]
    fn cdf_known_values() {
        assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
        // Simpson oracle: 0.5 + integral of the density over [0, 1]
        let n = 20_000;
        let h = 1.0 / n as f64;
        let mut s = pdf(0.0) + pdf(1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * pdf(i as f64 * h);
        }
        let oracle = 0.5 + s * h / 3.0;
        assert!((oracle - 0.841_344_746_068_542_9).abs() < 1e-14);
        assert!((std_normal_cdf(1.0).unwrap() - oracle).abs() < 1e-12);
        assert!(std_normal_cdf(f64::NAN).is_err());
    }

    #[test]
    fn cdf_symmetric_and_monotone() {
        let mut prev = 0.0;
        for i in 0..=16_000 {
            let z = -8.0 + i as f64 * 1e-3;
            let p = cdf(z);
            assert!((p + cdf(-z) - 1.0).abs() < 1e-14, "z = {z}");
            // strict below the median; the upper tail saturates near 1 in doubles
            if z <= 0.0 {
                assert!(p > prev, "not increasing at z = {z}");
            } else {
                assert!(p >= prev, "decreasing at z = {z}");
            }
            prev = p;
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-300, 1e-12, 1e-3, 0.02425, 0.1, 0.5, 0.7, 0.975, 1.0 - 1e-9] {
            let x = std_normal_quantile(p).unwrap();
            let back = cdf(x);
            assert!(((back - p) / p.min(1.0 - p)).abs() < 1e-13, "p = {p}");
        }
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        assert!((std_normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-14);
        assert!(std_normal_quantile(0.0).is_err());
        assert!(std_normal_quantile(1.0).is_err());
    }

    #[test]
    fn omega_variance_examples() {
        let a = Offer::new(-1.0, -1.0);
        let b = Offer::new(1.0, 1.0);
        assert_eq!(omega_variance(&cov(1.0, 1.0, 0.0), a, b), 8.0);
        let v = omega_variance(&cov(1.0, 2.0, 0.5), Offer::new(0.0, 0.0), b);
        assert!((v - 7.0).abs() < 1e-15);
        assert_eq!(omega_variance(&cov(1.3, 0.2, -0.4), b, b), 0.0);
    }

    #[test]
    fn directional_variance_examples() {
        let c = cov(1.0, 2.0, 0.5);
        assert!((directional_variance(&c, 0.0) - 1.0).abs() < 1e-15);
        assert!((directional_variance(&c, PI / 2.0) - 4.0).abs() < 1e-14);
        assert!((directional_variance(&c, FRAC_PI_4) - 3.5).abs() < 1e-14);
    }

    #[test]
    fn minor_axis_angle_matches_grid_oracle() {
        let c = cov(1.0, 2.0, 0.5);
        let theta = minor_axis_angle(&c).unwrap();
        // grid oracle over (3pi/4, 5pi/4), step 1e-6
        let lo = 3.0 * FRAC_PI_4;
        let steps = ((PI / 2.0) / 1e-6) as usize;
        let (mut best, mut best_v) = (lo, f64::INFINITY);
        for i in 1..steps {
            let t = lo + i as f64 * 1e-6;
            let v = directional_variance(&c, t);
            if v < best_v {
                best_v = v;
                best = t;
            }
        }
        assert!((theta - best).abs() < 2e-6, "{theta} vs {best}");
        assert!((theta - 2.8475).abs() < 1e-4);
        assert!(directional_variance(&c, theta) <= best_v);
    }

    #[test]
    fn minor_axis_angle_near_equal_sigmas() {
        let c = cov(1.0, 1.0 + 1e-9, 0.01);
        let theta = minor_axis_angle(&c).unwrap();
        assert!(theta > 3.0 * FRAC_PI_4);
        assert!(theta - 3.0 * FRAC_PI_4 < 1e-6);
    }

    #[test]
    fn minor_axis_angle_regime_errors() {
        for c in [cov(1.0, 1.0, 0.5), cov(2.0, 1.0, 0.5), cov(1.0, 2.0, 0.0), cov(1.0, 2.0, -0.3)] {
            assert!(matches!(minor_axis_angle(&c), Err(Error::UnsupportedRegime(_))));
        }
    }

    #[test]
    fn axis_tangents_are_perpendicular() {
        let c = cov(0.7, 3.1, 0.35);
        let tm = minor_axis_angle(&c).unwrap().tan();
        let t_major = major_axis_angle(&c).unwrap().tan();
        assert!((tm * t_major + 1.0).abs() < 1e-10);
    }

    #[test]
    fn canonical_angle_range() {
        assert_eq!(canonical_angle(0.0), 0.0);
        assert!((canonical_angle(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert!((canonical_angle(5.0 * PI) - PI).abs() < 1e-14);
        assert!(canonical_angle(-1e-300) < TAU);
    }
}
