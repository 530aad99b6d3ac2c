//! Expected-payoff kernel `K(a, b)` of the whole-package game.
//!
//! Player I (the minimizer) offers `a = (x1, y1)`, Player II (the maximizer)
//! offers `b = (x2, y2)`. The arbiter draws a fair settlement from the prior and
//! awards the offer nearer to it in Euclidean distance; the transfer is the net
//! `x + y` of the winning offer. Player I wins exactly when
//! `(x2 - x1) xi + (y2 - y1) eta < (|b|^2 - |a|^2) / 2`, so the win probability
//! is `Phi(z)` with `z = w / sigma_Omega`.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::{self, CovSpec};

/// A final offer on the two issues, in monetary units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Offer {
    pub x: f64,
    pub y: f64,
}

impl Offer {
    pub const ORIGIN: Offer = Offer { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Offer on the diagonal `(v, v)`.
    pub const fn diagonal(v: f64) -> Self {
        Self { x: v, y: v }
    }

    /// Net award `x + y` transferred if this offer is selected.
    pub fn net(&self) -> f64 {
        self.x + self.y
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: Offer) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Largest coordinate difference.
    pub fn max_abs_diff(&self, other: Offer) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

impl fmt::Display for Offer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Neg for Offer {
    type Output = Offer;
    fn neg(self) -> Offer {
        Offer::new(-self.x, -self.y)
    }
}

impl Add for Offer {
    type Output = Offer;
    fn add(self, rhs: Offer) -> Offer {
        Offer::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Offer {
    type Output = Offer;
    fn sub(self, rhs: Offer) -> Offer {
        Offer::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Offer {
    type Output = Offer;
    fn mul(self, k: f64) -> Offer {
        Offer::new(self.x * k, self.y * k)
    }
}

/// Prior covariance plus the half-width `L` of the strategy square `[-L, L]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGameConfig")]
pub struct GameConfig {
    cov: CovSpec,
    bound: f64,
}

#[derive(Deserialize)]
struct RawGameConfig {
    cov: CovSpec,
    bound: f64,
}

impl TryFrom<RawGameConfig> for GameConfig {
    type Error = Error;

    fn try_from(raw: RawGameConfig) -> Result<Self> {
        GameConfig::new(raw.cov, raw.bound)
    }
}

impl GameConfig {
    /// Multiple of `sqrt(sigma_x^2 + sigma_y^2)` below which the square is too
    /// small to contain the equilibria strictly inside.
    pub const MIN_BOUND_FACTOR: f64 = 4.0;
    /// Multiple of `sqrt(sigma_x^2 + sigma_y^2)` used when no bound is given.
    pub const DEFAULT_BOUND_FACTOR: f64 = 10.0;

    pub fn new(cov: CovSpec, bound: f64) -> Result<Self> {
        if !bound.is_finite() {
            return Err(Error::NonFinite("strategy bound"));
        }
        let min = Self::MIN_BOUND_FACTOR * Self::scale(&cov);
        if bound < min {
            return Err(Error::InvalidConfig(format!(
                "strategy bound {bound} is below 4 sqrt(sigma_x^2 + sigma_y^2) = {min}"
            )));
        }
        Ok(Self { cov, bound })
    }

    /// Strategy square of half-width `10 sqrt(sigma_x^2 + sigma_y^2)`.
    pub fn with_default_bound(cov: CovSpec) -> Self {
        Self {
            cov,
            bound: Self::DEFAULT_BOUND_FACTOR * Self::scale(&cov),
        }
    }

    fn scale(cov: &CovSpec) -> f64 {
        cov.sigma_x().hypot(cov.sigma_y())
    }

    pub fn cov(&self) -> &CovSpec {
        &self.cov
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn contains(&self, offer: Offer) -> bool {
        offer.x.abs() <= self.bound && offer.y.abs() <= self.bound
    }

    /// Rejects non-finite offers and offers outside the square.
    pub fn check_offer(&self, offer: Offer) -> Result<()> {
        if !offer.is_finite() {
            return Err(Error::NonFinite("offer"));
        }
        if !self.contains(offer) {
            return Err(Error::OutOfBounds {
                x: offer.x,
                y: offer.y,
                bound: self.bound,
            });
        }
        Ok(())
    }
}

/// Win probabilities and expected payoff for one offer pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffBreakdown {
    /// `None` when the offers coincide.
    pub z: Option<f64>,
    pub p_win_1: Option<f64>,
    pub p_win_2: Option<f64>,
    pub expected_payoff: f64,
    pub degenerate_equal_offers: bool,
}

/// Unchecked `z = w / sigma_Omega`; callers guarantee `a != b`.
#[inline]
pub(crate) fn raw_z(cov: &CovSpec, a: Offer, b: Offer) -> f64 {
    let w = 0.5 * (b.norm_sq() - a.norm_sq());
    w / gauss::omega_variance(cov, a, b).sqrt()
}

/// Unchecked kernel, both branches.
#[inline]
pub(crate) fn raw_payoff(cov: &CovSpec, a: Offer, b: Offer) -> f64 {
    if a == b {
        return a.net();
    }
    b.net() + (a.net() - b.net()) * gauss::cdf(raw_z(cov, a, b))
}

fn check_distinct(a: Offer, b: Offer) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite("offer"));
    }
    if a == b {
        return Err(Error::Degenerate("offers coincide, sigma_Omega = 0"));
    }
    Ok(())
}

/// Standardized margin `z = (|b|^2 - |a|^2) / (2 sigma_Omega)`.
pub fn z_score(game: &GameConfig, a: Offer, b: Offer) -> Result<f64> {
    check_distinct(a, b)?;
    Ok(raw_z(game.cov(), a, b))
}

/// Probability that the arbiter selects Player I's offer, `Phi(z)`.
pub fn win_probability_player1(game: &GameConfig, a: Offer, b: Offer) -> Result<f64> {
    Ok(gauss::cdf(z_score(game, a, b)?))
}

/// Expected net award `K(a, b)` paid to Player II by Player I.
///
/// Equal offers take the `x1 + y1` branch. Offers outside the strategy square
/// are rejected.
pub fn expected_payoff(game: &GameConfig, a: Offer, b: Offer) -> Result<f64> {
    game.check_offer(a)?;
    game.check_offer(b)?;
    Ok(raw_payoff(game.cov(), a, b))
}

pub fn payoff_breakdown(game: &GameConfig, a: Offer, b: Offer) -> Result<PayoffBreakdown> {
    game.check_offer(a)?;
    game.check_offer(b)?;
    if a == b {
        return Ok(PayoffBreakdown {
            z: None,
            p_win_1: None,
            p_win_2: None,
            expected_payoff: a.net(),
            degenerate_equal_offers: true,
        });
    }
    let z = raw_z(game.cov(), a, b);
    let p1 = gauss::cdf(z);
    Ok(PayoffBreakdown {
        z: Some(z),
        p_win_1: Some(p1),
        p_win_2: Some(gauss::cdf(-z)),
        expected_payoff: b.net() + (a.net() - b.net()) * p1,
        degenerate_equal_offers: false,
    })
}

/// `t(theta) = -(cos theta + sin theta)`.
pub fn polar_t(theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    -(c + s)
}

/// Player I's offer at polar coordinates `(r, theta)` around `b* = (x2*, x2*)`.
pub fn polar_offer(x2_star: f64, r: f64, theta: f64) -> Offer {
    let (s, c) = theta.sin_cos();
    Offer::new(x2_star + r * c, x2_star + r * s)
}

fn check_polar(x2_star: f64, r: f64, theta: f64) -> Result<()> {
    if !(x2_star.is_finite() && r.is_finite() && theta.is_finite()) {
        return Err(Error::NonFinite("polar coordinates"));
    }
    if r == 0.0 {
        return Err(Error::Degenerate("r = 0 puts Player I on b*"));
    }
    if r < 0.0 {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

/// `z(r, theta) = (2 x2* t(theta) - r) / (2 sigma_theta)` against `b* = (x2*, x2*)`.
pub fn polar_z(game: &GameConfig, x2_star: f64, r: f64, theta: f64) -> Result<f64> {
    check_polar(x2_star, r, theta)?;
    let sigma_theta = gauss::directional_variance(game.cov(), theta).sqrt();
    Ok((2.0 * x2_star * polar_t(theta) - r) / (2.0 * sigma_theta))
}

/// `K = 2 x2* - r t(theta) Phi(z(r, theta))` against `b* = (x2*, x2*)`.
pub fn polar_payoff(game: &GameConfig, x2_star: f64, r: f64, theta: f64) -> Result<f64> {
    let z = polar_z(game, x2_star, r, theta)?;
    Ok(2.0 * x2_star - r * polar_t(theta) * gauss::cdf(z))
}

/// Radius of the zero-margin circle `|a|^2 = 2 x2*^2` against `b* = (x2*, x2*)`.
pub fn zero_margin_radius(x2_star: f64) -> f64 {
    SQRT_2 * x2_star.abs()
}
