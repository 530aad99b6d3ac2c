use foa_core::equilibrium::{hessian_diagnostics, local_condition, payoff_gradient, wp_equilibrium};
use foa_core::gauss::{self, CovSpec};
use foa_core::payoff::{self, expected_payoff, z_score, GameConfig, Offer};
use proptest::prelude::*;

fn cov_strategy() -> impl Strategy<Value = CovSpec> {
    (0.2f64..5.0, 0.2f64..5.0, -0.95f64..0.95).prop_map(|(sx, sy, rho)| CovSpec::new(sx, sy, rho).unwrap())
}

/// A game plus two offers inside its square, as fractions of the bound.
fn game_and_pair() -> impl Strategy<Value = (GameConfig, Offer, Offer)> {
    (cov_strategy(), -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(
        |(cov, ax, ay, bx, by)| {
            let g = GameConfig::with_default_bound(cov);
            let l = g.bound();
            (g, Offer::new(ax * l, ay * l), Offer::new(bx * l, by * l))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn anonymity((g, a, b) in game_and_pair()) {
        let k1 = expected_payoff(&g, a, b).unwrap();
        let k2 = expected_payoff(&g, b, a).unwrap();
        prop_assert!((k1 - k2).abs() <= 1e-12, "{k1} vs {k2}");
    }

    #[test]
    fn negation_flips_sign((g, a, b) in game_and_pair()) {
        let k = expected_payoff(&g, a, b).unwrap();
        let k_neg = expected_payoff(&g, -a, -b).unwrap();
        prop_assert!((k + k_neg).abs() <= 1e-12);
    }

    #[test]
    fn opposite_offers_have_zero_value((g, _a, b) in game_and_pair()) {
        prop_assert!(expected_payoff(&g, -b, b).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn payoff_lies_between_the_two_nets((g, a, b) in game_and_pair()) {
        let k = expected_payoff(&g, a, b).unwrap();
        let (lo, hi) = (a.net().min(b.net()), a.net().max(b.net()));
        prop_assert!(k >= lo - 1e-12 && k <= hi + 1e-12);
    }

    #[test]
    fn z_sign_follows_norm_difference((g, a, b) in game_and_pair()) {
        prop_assume!(a != b);
        let z = z_score(&g, a, b).unwrap();
        let diff = b.norm_sq() - a.norm_sq();
        prop_assert!(z.signum() == diff.signum() || diff == 0.0);
    }

    #[test]
    fn circle_sign_against_diagonal_offer(cov in cov_strategy(), phi in 0.0f64..std::f64::consts::TAU, scale in 0.01f64..3.0) {
        let g = GameConfig::with_default_bound(cov);
        let x2 = foa_core::equilibrium::wp_offer(&cov);
        let b_star = Offer::diagonal(x2);
        let radius = payoff::zero_margin_radius(x2);
        let a = Offer::new(phi.cos(), phi.sin()) * (radius * scale);
        prop_assume!(a.distance(b_star) > 1e-9);
        let z = z_score(&g, a, b_star).unwrap();
        if scale < 1.0 - 1e-12 {
            prop_assert!(z > 0.0);
        } else if scale > 1.0 + 1e-12 {
            prop_assert!(z < 0.0);
        }
    }

    #[test]
    fn on_circle_payoff_is_linear_in_net(cov in cov_strategy(), phi in 0.0f64..std::f64::consts::TAU) {
        let g = GameConfig::with_default_bound(cov);
        let x2 = foa_core::equilibrium::wp_offer(&cov);
        let b_star = Offer::diagonal(x2);
        let a = Offer::new(phi.cos(), phi.sin()) * payoff::zero_margin_radius(x2);
        prop_assume!(a.distance(b_star) > 1e-6 * x2);
        let k = expected_payoff(&g, a, b_star).unwrap();
        prop_assert!((k - (x2 + 0.5 * a.net())).abs() <= 1e-12 * (1.0 + x2));
        prop_assert!(z_score(&g, a, b_star).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn polar_matches_cartesian(cov in cov_strategy(), r_frac in 0.01f64..2.0, theta in 0.0f64..std::f64::consts::TAU) {
        let g = GameConfig::with_default_bound(cov);
        let x2 = foa_core::equilibrium::wp_offer(&cov);
        let r = r_frac * 2.0 * payoff::zero_margin_radius(x2);
        let a = payoff::polar_offer(x2, r, theta);
        let b_star = Offer::diagonal(x2);
        let z = z_score(&g, a, b_star).unwrap();
        prop_assert!((payoff::polar_z(&g, x2, r, theta).unwrap() - z).abs() <= 1e-10);
        let k = expected_payoff(&g, a, b_star).unwrap();
        prop_assert!((payoff::polar_payoff(&g, x2, r, theta).unwrap() - k).abs() <= 1e-10);
    }

    #[test]
    fn gradient_matches_central_differences((g, a, b) in game_and_pair()) {
        let scale = g.cov().sigma_x().hypot(g.cov().sigma_y());
        prop_assume!(a.distance(b) > 0.05 * scale);
        let grad = payoff_gradient(&g, a, b).unwrap();
        let h = 1e-5;
        let k = |a: Offer, b: Offer| payoff::expected_payoff(&g, a, b).unwrap();
        let e = [Offer::new(h, 0.0), Offer::new(0.0, h)];
        let fd = [
            (k(a + e[0], b) - k(a - e[0], b)) / (2.0 * h),
            (k(a + e[1], b) - k(a - e[1], b)) / (2.0 * h),
            (k(a, b + e[0]) - k(a, b - e[0])) / (2.0 * h),
            (k(a, b + e[1]) - k(a, b - e[1])) / (2.0 * h),
        ];
        for (an, num) in grad.iter().zip(fd) {
            prop_assert!((an - num).abs() <= 1e-5 * an.abs().max(1.0), "{an} vs {num}");
        }
    }

    #[test]
    fn closed_form_is_stationary_above_threshold(sx in 0.2f64..5.0, sy in 0.2f64..5.0, u in 0.01f64..0.99) {
        let probe = CovSpec::new(sx, sy, 0.0).unwrap();
        let threshold = local_condition(&probe).threshold.max(-0.98);
        let rho = threshold + u * (0.99 - threshold);
        let cov = CovSpec::new(sx, sy, rho).unwrap();
        let eq = wp_equilibrium(&cov);
        prop_assert!(eq.gradient_residual < 1e-10);
        prop_assert!(eq.local_condition_holds);
        prop_assert_eq!(eq.z_star, 0.0);
        let g = GameConfig::with_default_bound(cov);
        prop_assert!(expected_payoff(&g, eq.a_star, eq.b_star).unwrap().abs() <= 1e-12);
        prop_assert!(hessian_diagnostics(&g).positive_definite);
    }

    #[test]
    fn hessian_flag_agrees_with_local_condition(cov in cov_strategy()) {
        let g = GameConfig::with_default_bound(cov);
        let lc = local_condition(&cov);
        prop_assume!((cov.rho() - lc.threshold).abs() > 1e-9);
        prop_assert_eq!(hessian_diagnostics(&g).positive_definite, lc.holds);
    }

    #[test]
    fn cdf_is_symmetric(z in -30.0f64..30.0) {
        let p = gauss::std_normal_cdf(z).unwrap();
        prop_assert!((p + gauss::std_normal_cdf(-z).unwrap() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn quantile_inverts_cdf(z in -8.0f64..8.0) {
        let p = gauss::std_normal_cdf(z).unwrap();
        prop_assume!(p > 0.0 && p < 1.0 && z < 5.0);
        let back = gauss::std_normal_quantile(p).unwrap();
        prop_assert!((back - z).abs() <= 1e-9 * (1.0 + z.abs()), "{back} vs {z}");
    }
}

#[test]
fn minor_axis_minimizes_directional_variance() {
    for (sx, sy, rho) in [(1.0, 2.0, 0.5), (0.5, 3.0, 0.2), (1.0, 1.5, 0.9)] {
        let cov = CovSpec::new(sx, sy, rho).unwrap();
        let theta_m = gauss::minor_axis_angle(&cov).unwrap();
        let at_min = gauss::directional_variance(&cov, theta_m);
        let n = 10_000;
        for i in 0..n {
            let theta = std::f64::consts::PI * i as f64 / n as f64;
            assert!(gauss::directional_variance(&cov, theta) >= at_min - 1e-12);
        }
    }
}
