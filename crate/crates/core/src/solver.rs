//! Numerical equilibrium recovery and grid verification of global optimality.
//!
//! Nothing here uses the closed forms from [`crate::equilibrium`] to produce an
//! answer: best responses come from a grid scan plus Newton refinement on the
//! analytic gradient, and the verifier only evaluates the payoff kernel.

use std::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{self, EquilibriumReport, Mode};
use crate::error::{Error, Result};
use crate::gauss::{self, CovSpec};
use crate::payoff::{self, GameConfig, Offer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Player I, who pays the award.
    Minimizer,
    /// Player II, who receives it.
    Maximizer,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Minimizer => 1.0,
            Side::Maximizer => -1.0,
        }
    }
}

/// Square lattice over `[-bound, bound]^2`.
///
/// The resolution is odd so the lattice contains the origin and both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    resolution: usize,
    bound: f64,
}

impl GridSpec {
    pub const DEFAULT_RESOLUTION: usize = 201;

    pub fn new(resolution: usize, bound: f64) -> Result<Self> {
        if resolution < 3 || resolution.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "grid resolution must be odd and at least 3, got {resolution}"
            )));
        }
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid bound must be positive and finite, got {bound}"
            )));
        }
        Ok(Self { resolution, bound })
    }

    /// Default resolution over the game's strategy square.
    pub fn for_game(game: &GameConfig) -> Self {
        Self {
            resolution: Self::DEFAULT_RESOLUTION,
            bound: game.bound(),
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Spacing between neighbouring lattice coordinates.
    pub fn cell(&self) -> f64 {
        2.0 * self.bound / (self.resolution - 1) as f64
    }

    /// `i`-th coordinate; index `(resolution - 1) / 2` is exactly zero.
    pub fn coordinate(&self, i: usize) -> f64 {
        let n = (self.resolution - 1) as f64;
        self.bound * (2.0 * i as f64 - n) / n
    }

    pub fn point(&self, i: usize, j: usize) -> Offer {
        Offer::new(self.coordinate(i), self.coordinate(j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponseOptions {
    pub coarse_resolution: usize,
    pub max_iterations: usize,
    pub step_tolerance: f64,
}

impl Default for BestResponseOptions {
    fn default() -> Self {
        Self {
            coarse_resolution: 101,
            max_iterations: 200,
            step_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub offer: Offer,
    pub payoff: f64,
    /// Largest projected gradient component on the responding side.
    pub gradient_residual: f64,
    pub iterations: usize,
}

/// Objective seen by one side: `sign * K` so that both sides minimize.
struct Response<'a> {
    cov: &'a CovSpec,
    opponent: Offer,
    side: Side,
    bound: f64,
}

impl Response<'_> {
    fn value(&self, p: Offer) -> f64 {
        let k = match self.side {
            Side::Minimizer => payoff::raw_payoff(self.cov, p, self.opponent),
            Side::Maximizer => payoff::raw_payoff(self.cov, self.opponent, p),
        };
        self.side.sign() * k
    }

    fn gradient(&self, p: Offer) -> [f64; 2] {
        let s = self.side.sign();
        match self.side {
            Side::Minimizer => {
                let g = equilibrium::raw_gradient(self.cov, p, self.opponent);
                [s * g[0], s * g[1]]
            }
            Side::Maximizer => {
                let g = equilibrium::raw_gradient(self.cov, self.opponent, p);
                [s * g[2], s * g[3]]
            }
        }
    }

    /// Zeroes components that point out of the square at an active bound.
    fn projected_gradient(&self, p: Offer) -> [f64; 2] {
        let mut g = self.gradient(p);
        for (gi, xi) in g.iter_mut().zip([p.x, p.y]) {
            if (xi >= self.bound && *gi < 0.0) || (xi <= -self.bound && *gi > 0.0) {
                *gi = 0.0;
            }
        }
        g
    }

    fn hessian(&self, p: Offer, h: f64) -> [[f64; 2]; 2] {
        let gxp = self.gradient(p + Offer::new(h, 0.0));
        let gxm = self.gradient(p - Offer::new(h, 0.0));
        let gyp = self.gradient(p + Offer::new(0.0, h));
        let gym = self.gradient(p - Offer::new(0.0, h));
        let hxx = (gxp[0] - gxm[0]) / (2.0 * h);
        let hyy = (gyp[1] - gym[1]) / (2.0 * h);
        let hxy = 0.5 * ((gxp[1] - gxm[1]) + (gyp[0] - gym[0])) / (2.0 * h);
        [[hxx, hxy], [hxy, hyy]]
    }

    fn clamp(&self, p: Offer) -> Offer {
        Offer::new(
            p.x.clamp(-self.bound, self.bound),
            p.y.clamp(-self.bound, self.bound),
        )
    }
}

pub fn best_response(game: &GameConfig, opponent: Offer, side: Side) -> Result<BestResponse> {
    best_response_with(game, opponent, side, &BestResponseOptions::default())
}

/// Offer minimizing (Player I) or maximizing (Player II) the expected payoff
/// against a fixed opponent.
///
/// A coarse lattice scan picks the starting point, then damped Newton steps on
/// the analytic gradient (with a finite-difference Hessian of that gradient)
/// refine it until a step shorter than `step_tolerance`.
pub fn best_response_with(
    game: &GameConfig,
    opponent: Offer,
    side: Side,
    opts: &BestResponseOptions,
) -> Result<BestResponse> {
    game.check_offer(opponent)?;
    let coarse = GridSpec::new(opts.coarse_resolution, game.bound())?;
    let obj = Response {
        cov: game.cov(),
        opponent,
        side,
        bound: game.bound(),
    };
    let scale = game.cov().sigma_x().hypot(game.cov().sigma_y());

    let mut p = coarse_minimum(&obj, &coarse);
    let mut value = obj.value(p);
    let h = 1e-5 * scale;
    let max_step = 0.5 * scale;

    for it in 0..opts.max_iterations {
        let g = obj.projected_gradient(p);
        let hs = obj.hessian(p, h);
        let det = hs[0][0] * hs[1][1] - hs[0][1] * hs[0][1];
        let newton = hs[0][0] > 0.0 && det > 0.0;
        let mut d = if newton {
            [
                -(hs[1][1] * g[0] - hs[0][1] * g[1]) / det,
                -(hs[0][0] * g[1] - hs[0][1] * g[0]) / det,
            ]
        } else {
            [-g[0] * scale, -g[1] * scale]
        };
        let len = d[0].hypot(d[1]);
        if len > max_step {
            d = [d[0] * max_step / len, d[1] * max_step / len];
        }
        let slope = g[0] * d[0] + g[1] * d[1];

        let mut t = 1.0;
        let mut next = obj.clamp(p + Offer::new(d[0], d[1]));
        // Newton steps this short are below the resolution of the payoff itself.
        let tiny = newton && len < 1e-7 * scale;
        if !tiny {
            loop {
                if next != opponent {
                    let v = obj.value(next);
                    if v <= value + 1e-4 * t * slope {
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-12 {
                    next = p;
                    break;
                }
                next = obj.clamp(p + Offer::new(t * d[0], t * d[1]));
            }
        }
        if next == opponent {
            next = p;
        }
        let step = next.distance(p);
        p = next;
        value = obj.value(p);
        if step < opts.step_tolerance {
            let residual = equilibrium::max_abs(&obj.projected_gradient(p));
            return Ok(BestResponse {
                offer: p,
                payoff: side.sign() * value,
                gradient_residual: residual,
                iterations: it + 1,
            });
        }
    }
    Err(Error::BestResponseDiverged {
        iterations: opts.max_iterations,
        best: p,
        residual: equilibrium::max_abs(&obj.projected_gradient(p)),
    })
}

fn coarse_minimum(obj: &Response<'_>, grid: &GridSpec) -> Offer {
    let n = grid.resolution();
    let rows: Vec<(f64, Offer)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::INFINITY, Offer::ORIGIN);
            for j in 0..n {
                let p = grid.point(i, j);
                if p == obj.opponent {
                    continue;
                }
                let v = obj.value(p);
                if v < best.0 {
                    best = (v, p);
                }
            }
            best
        })
        .collect();
    rows.into_iter()
        .fold((f64::INFINITY, Offer::ORIGIN), |acc, r| if r.0 < acc.0 { r } else { acc })
        .1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub damping: f64,
    pub tolerance: f64,
    pub max_rounds: usize,
    pub best_response: BestResponseOptions,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tolerance: 1e-8,
            max_rounds: 500,
            best_response: BestResponseOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub equilibrium: EquilibriumReport,
    /// Rounds in which either offer moved by at least the tolerance.
    pub rounds: usize,
}

pub fn fixed_point_search(game: &GameConfig, init_a: Offer, init_b: Offer) -> Result<FixedPoint> {
    fixed_point_search_with(game, init_a, init_b, &FixedPointOptions::default())
}

/// Damped alternating best responses: Player I updates against the current
/// `b`, then Player II against the new `a`, each moving halfway (by default)
/// towards its best response.
pub fn fixed_point_search_with(
    game: &GameConfig,
    init_a: Offer,
    init_b: Offer,
    opts: &FixedPointOptions,
) -> Result<FixedPoint> {
    game.check_offer(init_a)?;
    game.check_offer(init_b)?;
    if init_a == init_b {
        return Err(Error::Degenerate("initial offers coincide"));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must lie in (0, 1], got {}",
            opts.damping
        )));
    }
    const TAIL: usize = 8;
    let mut tail = Vec::with_capacity(TAIL);
    let (mut a, mut b) = (init_a, init_b);
    for moving_rounds in 0..opts.max_rounds {
        let ra = best_response_with(game, b, Side::Minimizer, &opts.best_response)?.offer;
        let next_a = a * (1.0 - opts.damping) + ra * opts.damping;
        let rb = best_response_with(game, next_a, Side::Maximizer, &opts.best_response)?.offer;
        let next_b = b * (1.0 - opts.damping) + rb * opts.damping;
        let moved = next_a.max_abs_diff(a).max(next_b.max_abs_diff(b));
        a = next_a;
        b = next_b;
        if tail.len() == TAIL {
            tail.remove(0);
        }
        tail.push((a, b));
        if moved < opts.tolerance {
            let lc = equilibrium::local_condition(game.cov());
            let grad = equilibrium::raw_gradient(game.cov(), a, b);
            return Ok(FixedPoint {
                equilibrium: EquilibriumReport {
                    a_star: a,
                    b_star: b,
                    mode: Mode::Wp,
                    rho_threshold: lc.threshold,
                    local_condition_holds: lc.holds,
                    gradient_residual: equilibrium::max_abs(&grad),
                    z_star: payoff::raw_z(game.cov(), a, b),
                },
                rounds: moving_rounds,
            });
        }
    }
    Err(Error::FixedPointDiverged {
        rounds: opts.max_rounds,
        tail,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Grid points with `K(a, b*) < -tolerance` count as violations.
    pub tolerance: f64,
    /// Run even when `rho <= 0`, reporting findings without a verdict on the theorem.
    pub allow_nonpositive_rho: bool,
    /// Points sampled on the zero-margin circle.
    pub circle_samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            allow_nonpositive_rho: false,
            circle_samples: 3600,
        }
    }
}

/// Pass flags for the region-by-region arguments behind global optimality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaChecks {
    /// `K(a, b*) > 0` for every grid point outside the zero-margin circle.
    pub outside_circle: bool,
    /// `K(a, b*) > 0` for every grid point inside the circle.
    pub inside_circle: bool,
    /// On the circle `K = x2* + (x1 + y1) / 2`, positive except at `a*` where it vanishes.
    pub on_circle: bool,
    /// Points on or outside the circle with `-2 x2* < x1 + y1 <= 2 x2*` have
    /// `K >= (x1 + y1 + 2 x2*) / 2`, and any `K <= 0` point has negative net and
    /// lies inside the circle or has net at most `-2 x2*`.
    pub necessary_region: bool,
}

impl LemmaChecks {
    pub fn all(&self) -> bool {
        self.outside_circle && self.inside_circle && self.on_circle && self.necessary_region
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub points_evaluated: usize,
    pub min_payoff: f64,
    pub argmin: Offer,
    pub argmin_distance: f64,
    pub argmin_within_cell: bool,
    pub violations: usize,
    pub player2_max_payoff: f64,
    pub player2_argmax: Offer,
    pub player2_violations: usize,
    pub lemma_checks: LemmaChecks,
    pub hypothesis_satisfied: bool,
    pub passed: bool,
}

pub fn verify_global_equilibrium(
    game: &GameConfig,
    pair: &EquilibriumReport,
    grid: &GridSpec,
) -> Result<VerificationReport> {
    verify_global_equilibrium_with(game, pair, grid, &VerifyOptions::default())
}

#[derive(Debug, Clone, Copy)]
struct RowScan {
    min: (f64, Offer),
    max2: (f64, Offer),
    violations: usize,
    violations2: usize,
    outside_bad: usize,
    inside_bad: usize,
    necessary_bad: usize,
}

impl RowScan {
    fn empty() -> Self {
        Self {
            min: (f64::INFINITY, Offer::ORIGIN),
            max2: (f64::NEG_INFINITY, Offer::ORIGIN),
            violations: 0,
            violations2: 0,
            outside_bad: 0,
            inside_bad: 0,
            necessary_bad: 0,
        }
    }

    /// Index-ordered merge: ties keep the earlier row.
    fn merge(mut self, other: &RowScan) -> Self {
        if other.min.0 < self.min.0 {
            self.min = other.min;
        }
        if other.max2.0 > self.max2.0 {
            self.max2 = other.max2;
        }
        self.violations += other.violations;
        self.violations2 += other.violations2;
        self.outside_bad += other.outside_bad;
        self.inside_bad += other.inside_bad;
        self.necessary_bad += other.necessary_bad;
        self
    }
}

/// Scans `K(a, b*)` over the grid for Player I deviations and `K(a*, b)` for
/// Player II deviations, then checks each region of the plane separately.
///
/// Rows are evaluated in parallel and merged in row order, so the report does
/// not depend on the number of worker threads.
pub fn verify_global_equilibrium_with(
    game: &GameConfig,
    pair: &EquilibriumReport,
    grid: &GridSpec,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let cov = game.cov();
    let hypothesis = cov.rho() > 0.0;
    if !hypothesis && !opts.allow_nonpositive_rho {
        return Err(Error::UnsupportedRegime(format!(
            "global verification requires rho > 0, got {} (override to scan anyway)",
            cov.rho()
        )));
    }
    if pair.mode != Mode::Wp || pair.b_star.x != pair.b_star.y {
        return Err(Error::InvalidArgument(
            "global verification expects a whole-package pair on the diagonal".into(),
        ));
    }
    if opts.circle_samples < 8 || !opts.circle_samples.is_multiple_of(8) {
        return Err(Error::InvalidArgument(format!(
            "circle sample count must be a positive multiple of 8, got {}",
            opts.circle_samples
        )));
    }
    let x2 = pair.b_star.x;
    let b_star = pair.b_star;
    let a_star = pair.a_star;
    let tol = opts.tolerance;
    let circle_sq = 2.0 * x2 * x2;
    let exclusion = 1e-9 * (1.0 + x2.abs());
    let n = grid.resolution();

    let rows: Vec<RowScan> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = RowScan::empty();
            for j in 0..n {
                let p = grid.point(i, j);

                let k = payoff::raw_payoff(cov, p, b_star);
                if k < s.min.0 {
                    s.min = (k, p);
                }
                if k < -tol {
                    s.violations += 1;
                }
                let at_a_star = p.distance(a_star) <= exclusion;
                let r2 = p.norm_sq();
                let net = p.net();
                if !at_a_star && k <= 0.0 {
                    if r2 > circle_sq {
                        s.outside_bad += 1;
                    } else if r2 < circle_sq {
                        s.inside_bad += 1;
                    }
                    if !(net < 0.0 && (r2 < circle_sq || net <= -2.0 * x2)) {
                        s.necessary_bad += 1;
                    }
                }
                let bounded = r2 >= circle_sq && net > -2.0 * x2 && net <= 2.0 * x2;
                if !at_a_star && bounded && k < 0.5 * (net + 2.0 * x2) - tol {
                    s.necessary_bad += 1;
                }

                let k2 = payoff::raw_payoff(cov, a_star, p);
                if k2 > s.max2.0 {
                    s.max2 = (k2, p);
                }
                if k2 > tol {
                    s.violations2 += 1;
                }
            }
            s
        })
        .collect();
    let scan = rows.iter().fold(RowScan::empty(), |acc, r| acc.merge(r));

    let on_circle = check_circle(cov, x2, a_star, opts.circle_samples);
    let lemma_checks = LemmaChecks {
        outside_circle: scan.outside_bad == 0,
        inside_circle: scan.inside_bad == 0,
        on_circle,
        necessary_region: scan.necessary_bad == 0,
    };
    let argmin_distance = scan.min.1.distance(a_star);
    let argmin_within_cell = argmin_distance <= grid.cell() * std::f64::consts::SQRT_2;
    let passed = scan.violations == 0
        && scan.violations2 == 0
        && argmin_within_cell
        && lemma_checks.all();

    Ok(VerificationReport {
        points_evaluated: n * n,
        min_payoff: scan.min.0,
        argmin: scan.min.1,
        argmin_distance,
        argmin_within_cell,
        violations: scan.violations,
        player2_max_payoff: scan.max2.0,
        player2_argmax: scan.max2.1,
        player2_violations: scan.violations2,
        lemma_checks,
        hypothesis_satisfied: hypothesis,
        passed,
    })
}

/// Samples the zero-margin circle. Sample `5 n / 8` sits exactly at angle
/// `5 pi / 4`, which is `a*`.
fn check_circle(cov: &CovSpec, x2: f64, a_star: Offer, samples: usize) -> bool {
    let radius = payoff::zero_margin_radius(x2);
    let b_star = Offer::diagonal(x2);
    let target = 5 * samples / 8;
    let formula_tol = 1e-12 * (1.0 + x2.abs());
    let mut ok = true;
    let mut argmin = (f64::INFINITY, usize::MAX);
    for j in 0..samples {
        let p = if j == target {
            a_star
        } else {
            let phi = 2.0 * PI * j as f64 / samples as f64;
            Offer::new(radius * phi.cos(), radius * phi.sin())
        };
        let k = payoff::raw_payoff(cov, p, b_star);
        if (k - (x2 + 0.5 * p.net())).abs() > formula_tol {
            ok = false;
        }
        if j == target {
            ok &= k.abs() <= formula_tol;
        } else {
            ok &= k > 0.0;
        }
        if k < argmin.0 {
            argmin = (k, j);
        }
    }
    ok && argmin.1 == target
}

/// Where the minor-axis angle sits relative to the angle of slope
/// `alpha' / beta'` through `b*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleInterval {
    pub theta_min: f64,
    pub arctan_ratio_angle: f64,
    pub containment_holds: bool,
    /// `(1 - rho^2) sigma_x^2 sigma_y^2`, positive for every valid covariance.
    pub determinant_margin: f64,
}

/// Checks `theta_M < pi + arctan(alpha' / beta') < 5 pi / 4`, so that
/// `[pi + arctan(alpha' / beta'), 5 pi / 4]` lies inside `[theta_M, 5 pi / 4]`.
///
/// Both angles are taken on the branch through the third quadrant. Requires
/// `rho > 0` and `sigma_x < sigma_y`.
pub fn angle_interval_check(cov: &CovSpec) -> Result<AngleInterval> {
    let theta_min = gauss::minor_axis_angle(cov)?;
    let ratio = cov.alpha_prime() / cov.beta_prime();
    let arctan_ratio_angle = PI + ratio.atan();
    let upper = 1.25 * PI;
    Ok(AngleInterval {
        theta_min,
        arctan_ratio_angle,
        containment_holds: theta_min < arctan_ratio_angle && arctan_ratio_angle < upper,
        determinant_margin: (1.0 - cov.rho() * cov.rho()) * cov.var_x() * cov.var_y(),
    })
}

/// One randomized property check of the kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub trials: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    lo + (hi - lo) * u
}

/// Randomized checks of anonymity `K(a, b) = K(b, a)`, negation
/// `K(-a, -b) = -K(a, b)`, opposite offers `K(-b, b) = 0`, the sign of `z`
/// against `b* = (x2*, x2*)` inside and outside the circle `|a|^2 = 2 x2*^2`,
/// and the award `x2* + (x1 + y1) / 2` on that circle.
pub fn lemma_suite(game: &GameConfig, trials: usize, seed: u64) -> Result<Vec<PropertyCheck>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trial count must be positive".into()));
    }
    let cov = game.cov();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = game.bound();
    let tol = 1e-12;
    let draw = |rng: &mut ChaCha8Rng| Offer::new(uniform(rng, -l, l), uniform(rng, -l, l));

    let (mut anon, mut neg, mut opp) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..trials {
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        let k = payoff::raw_payoff(cov, a, b);
        anon = anon.max((k - payoff::raw_payoff(cov, b, a)).abs());
        neg = neg.max((payoff::raw_payoff(cov, -a, -b) + k).abs());
        opp = opp.max(payoff::raw_payoff(cov, -b, b).abs());
    }

    // Circle sign: radius below, on, and above sqrt(2) x2*
    let x2 = equilibrium::wp_offer(cov);
    let b_star = Offer::diagonal(x2);
    let radius = payoff::zero_margin_radius(x2);
    let mut sign_failures = 0usize;
    let mut on_circle_dev = 0.0f64;
    let circle_tol = 1e-12 * (1.0 + x2);
    for _ in 0..trials {
        let phi = uniform(&mut rng, 0.0, 2.0 * PI);
        let scale = uniform(&mut rng, 0.0, 3.0);
        let dir = Offer::new(phi.cos(), phi.sin());
        let a = dir * (radius * scale);
        if a == b_star {
            continue;
        }
        let z = payoff::raw_z(cov, a, b_star);
        let r2 = a.norm_sq();
        let circle_sq = 2.0 * x2 * x2;
        if (r2 < circle_sq && z <= 0.0) || (r2 > circle_sq && z >= 0.0) {
            sign_failures += 1;
        }
        // on the circle the award is linear in the net offer
        let on = dir * radius;
        if on != b_star {
            let k = payoff::raw_payoff(cov, on, b_star);
            on_circle_dev = on_circle_dev.max((k - (x2 + 0.5 * on.net())).abs());
        }
    }

    let check = |name: &str, dev: f64, tol: f64| PropertyCheck {
        name: name.to_string(),
        trials,
        max_deviation: dev,
        tolerance: tol,
        passed: dev <= tol,
    };
    Ok(vec![
        check("anonymity", anon, tol),
        check("negation_antisymmetry", neg, tol),
        check("opposite_offers_zero", opp, tol),
        check("circle_sign", sign_failures as f64, 0.0),
        check("circle_payoff", on_circle_dev, circle_tol),
    ])
}
