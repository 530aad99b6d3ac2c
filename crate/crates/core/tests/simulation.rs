use foa_core::equilibrium::{ibi_equilibrium, wp_equilibrium, Mode};
use foa_core::gauss::CovSpec;
use foa_core::mc::{simulate_awards, simulate_awards_with_workers, CHUNK_SIZE};
use foa_core::payoff::{expected_payoff, GameConfig, Offer};

#[test]
fn empirical_mean_tracks_kernel() {
    let cov = CovSpec::new(1.0, 2.0, 0.3).unwrap();
    let g = GameConfig::with_default_bound(cov);
    let pairs = [
        (Offer::new(-1.0, 0.5), Offer::new(2.0, 1.0)),
        (Offer::new(0.0, 0.0), Offer::new(1.0, -1.0)),
        (Offer::new(-3.0, -2.0), Offer::new(0.5, 3.0)),
    ];
    for (i, (a, b)) in pairs.into_iter().enumerate() {
        let r = simulate_awards(&g, a, b, Mode::Wp, 400_000, i as u64).unwrap();
        let k = expected_payoff(&g, a, b).unwrap();
        assert!((r.mean_award - k).abs() <= 3.0 * r.std_error_mean + 1e-12, "{r:?} vs {k}");
    }
}

#[test]
fn both_rules_have_zero_mean_at_equilibrium() {
    let cov = CovSpec::new(1.0, 1.5, 0.5).unwrap();
    let g = GameConfig::with_default_bound(cov);
    for (mode, eq) in [(Mode::Wp, wp_equilibrium(&cov)), (Mode::Ibi, ibi_equilibrium(&cov))] {
        let r = simulate_awards(&g, eq.a_star, eq.b_star, mode, 500_000, 99).unwrap();
        assert!(r.mean_award.abs() < 3.0 * r.std_error_mean, "{r:?}");
    }
}

#[test]
fn parallel_and_serial_runs_agree_exactly() {
    let cov = CovSpec::new(1.0, 1.0, 0.5).unwrap();
    let g = GameConfig::with_default_bound(cov);
    let eq = ibi_equilibrium(&cov);
    let n = 5 * CHUNK_SIZE - 3;
    let serial = simulate_awards_with_workers(&g, eq.a_star, eq.b_star, Mode::Ibi, n, 1234, 1).unwrap();
    for workers in [2, 3, 8] {
        let par = simulate_awards_with_workers(&g, eq.a_star, eq.b_star, Mode::Ibi, n, 1234, workers).unwrap();
        assert_eq!(serial, par);
    }
}
