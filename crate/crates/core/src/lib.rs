//! Two-issue final-offer arbitration as a zero-sum game.
//!
//! Player I (who pays) submits `a = (x1, y1)`, Player II (who receives)
//! submits `b = (x2, y2)`, and an arbiter with a bivariate normal notion of the
//! fair settlement picks one of them. The crate computes the exact expected
//! award, closed-form and numerically recovered equilibria under whole-package
//! and issue-by-issue rules, grid checks of global optimality, and seeded Monte
//! Carlo replays of the arbiter.

pub mod equilibrium;
pub mod error;
pub mod gauss;
pub mod mc;
pub mod payoff;
pub mod solver;

pub use equilibrium::{
    equilibrium, hessian_diagnostics, ibi_equilibrium, local_condition, payoff_gradient,
    variance_report, wp_equilibrium, EquilibriumReport, HessianDiagnostics, LocalCondition, Mode,
    VarianceReport,
};
pub use error::{Error, Result};
pub use gauss::CovSpec;
pub use mc::{simulate_awards, simulate_awards_with_workers, SimulationReport};
pub use payoff::{expected_payoff, payoff_breakdown, GameConfig, Offer, PayoffBreakdown};
pub use solver::{
    angle_interval_check, best_response, fixed_point_search, lemma_suite,
    verify_global_equilibrium, verify_global_equilibrium_with, AngleInterval, BestResponse,
    FixedPoint, GridSpec, PropertyCheck, Side, VerificationReport, VerifyOptions,
};
