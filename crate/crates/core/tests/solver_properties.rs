use foa_core::equilibrium::{hessian_diagnostics, local_condition, wp_equilibrium};
use foa_core::gauss::CovSpec;
use foa_core::payoff::{GameConfig, Offer};
use foa_core::solver::{
    best_response, fixed_point_search, verify_global_equilibrium, GridSpec, Side,
};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

#[test]
fn best_response_residual_is_small_for_random_opponents() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..100 {
        let cov = CovSpec::new(0.5 + 2.0 * unit(&mut rng), 0.5 + 2.0 * unit(&mut rng), 0.9 * unit(&mut rng)).unwrap();
        let g = GameConfig::with_default_bound(cov);
        let x2 = foa_core::equilibrium::wp_offer(&cov);
        // opponents near the equilibrium scale, where the response is interior
        let opp = Offer::new(x2 * (0.5 + unit(&mut rng)), x2 * (0.5 + unit(&mut rng)));
        let (side, opponent) = if i % 2 == 0 {
            (Side::Minimizer, opp)
        } else {
            (Side::Maximizer, -opp)
        };
        let br = best_response(&g, opponent, side).unwrap();
        assert!(br.gradient_residual < 1e-8, "case {i}: {br:?}");
    }
}

#[test]
fn fixed_point_matches_closed_form_for_random_covariances() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for i in 0..50 {
        let cov = CovSpec::new(0.5 + 2.0 * unit(&mut rng), 0.5 + 2.0 * unit(&mut rng), 0.01 + 0.94 * unit(&mut rng)).unwrap();
        let g = GameConfig::with_default_bound(cov);
        let eq = wp_equilibrium(&cov);
        let start_b = Offer::new(eq.b_star.x * 1.6, eq.b_star.y * 0.7);
        let fp = fixed_point_search(&g, -start_b * 0.9, start_b).unwrap();
        assert!(fp.equilibrium.a_star.max_abs_diff(eq.a_star) < 1e-4, "case {i}: {fp:?}");
        assert!(fp.equilibrium.b_star.max_abs_diff(eq.b_star) < 1e-4, "case {i}: {fp:?}");
    }
}

#[test]
fn verification_passes_for_positive_rho() {
    for (sx, sy, rho) in [(1.0, 1.0, 0.2), (1.0, 3.0, 0.6), (2.0, 1.0, 0.9)] {
        let cov = CovSpec::new(sx, sy, rho).unwrap();
        let g = GameConfig::with_default_bound(cov);
        let eq = wp_equilibrium(&cov);
        let report = verify_global_equilibrium(&g, &eq, &GridSpec::new(101, g.bound()).unwrap()).unwrap();
        assert!(report.passed, "{report:?}");
    }
}

#[test]
fn hessian_goes_indefinite_below_threshold() {
    let cov = CovSpec::new(1.0, 2.0, 0.0).unwrap();
    let threshold = local_condition(&cov).threshold;
    for rho in [threshold - 0.05, threshold - 0.01] {
        let g = GameConfig::with_default_bound(CovSpec::new(1.0, 2.0, rho).unwrap());
        assert!(!hessian_diagnostics(&g).positive_definite);
    }
}

#[test]
fn grid_verification_is_deterministic_across_pools() {
    let cov = CovSpec::new(1.0, 2.0, 0.4).unwrap();
    let g = GameConfig::with_default_bound(cov);
    let eq = wp_equilibrium(&cov);
    let grid = GridSpec::new(101, g.bound()).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| verify_global_equilibrium(&g, &eq, &grid).unwrap())
    };
    assert_eq!(run(1), run(4));
}
