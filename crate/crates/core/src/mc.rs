//! Seeded Monte Carlo simulation of arbitrated awards.
//!
//! Draws are split into fixed chunks of [`CHUNK_SIZE`] settlements. Chunk `k`
//! reads ChaCha8 stream `k` under the master seed, so each chunk's output is
//! fixed no matter which worker runs it, and chunk summaries are merged in
//! chunk order. Results are therefore identical for any worker count.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::Mode;
use crate::error::{Error, Result};
use crate::gauss::{self, CovSpec};
use crate::payoff::{GameConfig, Offer};

/// Settlements per substream.
pub const CHUNK_SIZE: u64 = 65_536;

/// One substream of settlement draws.
#[derive(Debug, Clone)]
pub struct SettlementStream {
    rng: ChaCha8Rng,
}

impl SettlementStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform on the open interval `(0, 1)` with 53 random bits.
    pub fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by inversion.
    pub fn next_normal(&mut self) -> f64 {
        gauss::quantile(self.next_uniform())
    }
}

/// Draws a fair settlement `(xi, eta) ~ N(0, Sigma)` from two independent
/// standard normals and the lower Cholesky factor of `Sigma`.
pub fn sample_settlement(cov: &CovSpec, stream: &mut SettlementStream) -> (f64, f64) {
    let (l11, l21, l22) = cov.cholesky();
    let z1 = stream.next_normal();
    let z2 = stream.next_normal();
    (l11 * z1, l21 * z1 + l22 * z2)
}

/// Running central moments up to order four.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term = delta * dn * n1;
        self.mean += dn;
        self.m4 += term * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += term * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += term;
    }

    /// Combines two disjoint samples (pairwise update).
    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let d = other.mean - self.mean;
        let d2 = d * d;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + d * d2 * na * nb * (na - nb) / (n * n)
            + 3.0 * d * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * other.m3 - nb * self.m3) / n;
        Moments {
            n: self.n + other.n,
            mean: self.mean + d * nb / n,
            m2,
            m3,
            m4,
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.m2 / (self.n - 1) as f64
    }

    pub fn std_error_mean(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    /// Large-sample standard error of the sample variance,
    /// `sqrt((mu4 - s^4 (n - 3) / (n - 1)) / n)`.
    pub fn std_error_variance(&self) -> f64 {
        if self.n < 4 {
            return 0.0;
        }
        let n = self.n as f64;
        let s2 = self.variance();
        let mu4 = self.m4 / n;
        ((mu4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub n: u64,
    pub mode: Mode,
    pub mean_award: f64,
    pub variance_award: f64,
    /// Share of draws awarded to Player I; whole-package mode only.
    pub win_freq_player1: Option<f64>,
    pub std_error_mean: f64,
    pub std_error_variance: f64,
    /// Binomial standard error of the win frequency.
    pub std_error_win_freq: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct ChunkSummary {
    moments: Moments,
    wins: u64,
}

/// Net award to Player II for one settlement, and whether Player I won the
/// whole package. Exact ties go to Player II.
#[inline]
fn award(mode: Mode, a: Offer, b: Offer, xi: f64, eta: f64) -> (f64, bool) {
    match mode {
        Mode::Wp => {
            let da = (xi - a.x) * (xi - a.x) + (eta - a.y) * (eta - a.y);
            let db = (xi - b.x) * (xi - b.x) + (eta - b.y) * (eta - b.y);
            if da < db {
                (a.net(), true)
            } else {
                (b.net(), false)
            }
        }
        Mode::Ibi => {
            let x = if (xi - a.x).abs() < (xi - b.x).abs() { a.x } else { b.x };
            let y = if (eta - a.y).abs() < (eta - b.y).abs() { a.y } else { b.y };
            (x + y, false)
        }
    }
}

fn run_chunk(cov: &CovSpec, a: Offer, b: Offer, mode: Mode, seed: u64, chunk: u64, len: u64) -> ChunkSummary {
    let mut stream = SettlementStream::new(seed, chunk);
    let mut s = ChunkSummary::default();
    for _ in 0..len {
        let (xi, eta) = sample_settlement(cov, &mut stream);
        let (k, won) = award(mode, a, b, xi, eta);
        s.moments.push(k);
        s.wins += won as u64;
    }
    s
}

/// Simulates `n` arbitrated awards on the current rayon pool.
pub fn simulate_awards(
    game: &GameConfig,
    a: Offer,
    b: Offer,
    mode: Mode,
    n: u64,
    seed: u64,
) -> Result<SimulationReport> {
    game.check_offer(a)?;
    game.check_offer(b)?;
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let cov = game.cov();
    let chunks = n.div_ceil(CHUNK_SIZE);
    let summaries: Vec<ChunkSummary> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let len = CHUNK_SIZE.min(n - k * CHUNK_SIZE);
            run_chunk(cov, a, b, mode, seed, k, len)
        })
        .collect();
    let (moments, wins) = summaries
        .iter()
        .fold((Moments::default(), 0u64), |(m, w), s| (m.merge(&s.moments), w + s.wins));

    let (win_freq, win_se) = match mode {
        Mode::Wp => {
            let p = wins as f64 / n as f64;
            (Some(p), Some((p * (1.0 - p) / n as f64).sqrt()))
        }
        Mode::Ibi => (None, None),
    };
    Ok(SimulationReport {
        n,
        mode,
        mean_award: moments.mean(),
        variance_award: moments.variance(),
        win_freq_player1: win_freq,
        std_error_mean: moments.std_error_mean(),
        std_error_variance: moments.std_error_variance(),
        std_error_win_freq: win_se,
        seed,
    })
}

/// [`simulate_awards`] on a dedicated pool of `workers` threads. The report is
/// the same for every worker count.
pub fn simulate_awards_with_workers(
    game: &GameConfig,
    a: Offer,
    b: Offer,
    mode: Mode,
    n: u64,
    seed: u64,
    workers: usize,
) -> Result<SimulationReport> {
    if workers == 0 {
        return Err(Error::InvalidArgument("worker count must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(|| simulate_awards(game, a, b, mode, n, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{ibi_equilibrium, wp_equilibrium};
    use crate::payoff;

    fn game(sx: f64, sy: f64, rho: f64) -> GameConfig {
        GameConfig::with_default_bound(CovSpec::new(sx, sy, rho).unwrap())
    }

    #[test]
    fn stream_replays_and_streams_differ() {
        let mut s1 = SettlementStream::new(42, 3);
        let mut s2 = SettlementStream::new(42, 3);
        let mut s3 = SettlementStream::new(42, 4);
        let a: Vec<f64> = (0..100).map(|_| s1.next_normal()).collect();
        let b: Vec<f64> = (0..100).map(|_| s2.next_normal()).collect();
        let c: Vec<f64> = (0..100).map(|_| s3.next_normal()).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uniforms_stay_inside_unit_interval() {
        let mut s = SettlementStream::new(1, 0);
        for _ in 0..10_000 {
            let u = s.next_uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn settlement_covariance_matches() {
        let cov = CovSpec::new(1.0, 2.0, 0.5).unwrap();
        let n = 1_000_000u64;
        let (mut xx, mut yy, mut xy) = (Moments::default(), Moments::default(), Moments::default());
        let mut chunk = 0;
        let mut left = n;
        while left > 0 {
            let len = left.min(CHUNK_SIZE);
            let mut s = SettlementStream::new(9, chunk);
            for _ in 0..len {
                let (x, y) = sample_settlement(&cov, &mut s);
                xx.push(x * x);
                yy.push(y * y);
                xy.push(x * y);
            }
            left -= len;
            chunk += 1;
        }
        // The mean of a squared zero-mean variable estimates its variance.
        for (m, target) in [(xx, 1.0), (yy, 4.0), (xy, 1.0)] {
            assert!(
                (m.mean() - target).abs() < 4.0 * m.std_error_mean(),
                "{} vs {target} (se {})",
                m.mean(),
                m.std_error_mean()
            );
        }
    }

    #[test]
    fn moment_merge_matches_single_pass() {
        let data: Vec<f64> = (0..1000).map(|i| ((i * 37 % 101) as f64).sqrt() - 3.0).collect();
        let mut whole = Moments::default();
        data.iter().for_each(|&x| whole.push(x));
        let mut left = Moments::default();
        let mut right = Moments::default();
        data[..313].iter().for_each(|&x| left.push(x));
        data[313..].iter().for_each(|&x| right.push(x));
        let merged = left.merge(&right);
        assert_eq!(merged.count(), whole.count());
        for (p, q) in [
            (merged.mean, whole.mean),
            (merged.m2, whole.m2),
            (merged.m3, whole.m3),
            (merged.m4, whole.m4),
        ] {
            assert!((p - q).abs() <= 1e-9 * (1.0 + q.abs()), "{p} vs {q}");
        }
    }

    #[test]
    fn zero_samples_rejected() {
        let g = game(1.0, 1.0, 0.0);
        assert!(simulate_awards(&g, Offer::ORIGIN, Offer::diagonal(1.0), Mode::Wp, 0, 1).is_err());
        assert!(simulate_awards_with_workers(&g, Offer::ORIGIN, Offer::diagonal(1.0), Mode::Wp, 10, 1, 0).is_err());
    }

    #[test]
    fn worker_count_does_not_change_report() {
        let g = game(1.0, 2.0, 0.5);
        let eq = wp_equilibrium(g.cov());
        let n = 3 * CHUNK_SIZE + 17;
        let one = simulate_awards_with_workers(&g, eq.a_star, eq.b_star, Mode::Wp, n, 5, 1).unwrap();
        let three = simulate_awards_with_workers(&g, eq.a_star, eq.b_star, Mode::Wp, n, 5, 3).unwrap();
        assert_eq!(one, three);
        assert_eq!(one.n, n);
    }

    #[test]
    fn mean_award_tracks_expected_payoff() {
        let g = game(1.0, 1.0, 0.0);
        let (a, b) = (Offer::ORIGIN, Offer::diagonal(1.0));
        let report = simulate_awards(&g, a, b, Mode::Wp, 1_000_000, 11).unwrap();
        let exact = payoff::expected_payoff(&g, a, b).unwrap();
        assert!((report.mean_award - exact).abs() < 3.0 * report.std_error_mean);
        let p = payoff::win_probability_player1(&g, a, b).unwrap();
        let freq = report.win_freq_player1.unwrap();
        assert!((freq - p).abs() < 3.0 * report.std_error_win_freq.unwrap());
    }

    #[test]
    fn ibi_reports_no_win_frequency() {
        let g = game(1.0, 1.0, 0.5);
        let eq = ibi_equilibrium(g.cov());
        let report = simulate_awards(&g, eq.a_star, eq.b_star, Mode::Ibi, 200_000, 3).unwrap();
        assert!(report.win_freq_player1.is_none());
        assert!(report.mean_award.abs() < 3.0 * report.std_error_mean);
    }

    #[test]
    fn ties_go_to_player_two() {
        let (k, won) = award(Mode::Wp, Offer::new(-1.0, 0.0), Offer::new(1.0, 0.0), 0.0, 0.3);
        assert_eq!((k, won), (1.0, false));
        let (k, _) = award(Mode::Ibi, Offer::new(-1.0, -1.0), Offer::new(1.0, 1.0), 0.0, -0.5);
        assert_eq!(k, 0.0);
    }
}
