use thiserror::Error;

use crate::payoff::Offer;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("offer ({x}, {y}) lies outside the strategy square [-{bound}, {bound}]^2")]
    OutOfBounds { x: f64, y: f64, bound: f64 },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("best response did not converge after {iterations} iterations (best iterate {best}, residual {residual:e})")]
    BestResponseDiverged {
        iterations: usize,
        best: Offer,
        residual: f64,
    },

    #[error("fixed-point search did not converge after {rounds} rounds")]
    FixedPointDiverged {
        rounds: usize,
        /// Last few `(a, b)` iterates, oldest first.
        tail: Vec<(Offer, Offer)>,
    },
}

impl Error {
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            Error::BestResponseDiverged { .. } | Error::FixedPointDiverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
