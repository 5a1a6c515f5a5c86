use libm::erf;
use mg_core::game::{GameConfig, GameState, UpdateMode};
use mg_core::theory::{
    bimodal_map_m1, gaussian_map_m1, linear_slope, quadratic_basin, quadratic_fate, solve_delta_a1,
    stability_coefficient, QuadraticFate, TheoryState, RHO_C,
};
use proptest::prelude::*;

/// Finite-difference derivative of the map at the origin, in units of `√N A`.
fn origin_derivative(rho: f64, n: usize, mu: usize) -> (f64, f64) {
    let h = 1e-6;
    let sqrt_n = (n as f64).sqrt();
    let mut s = TheoryState::new(rho, n, 2);
    s.mu_star = mu;
    s.a_vec[mu] = h / sqrt_n;
    let next = gaussian_map_m1(&s).unwrap();
    (next.a_vec[mu] * sqrt_n / h, next.a_vec[1 - mu] * sqrt_n / h)
}

/// Plain fixed-point iteration `x ← erf(x/√(8ρ))` from 1.
fn fixed_point_oracle(rho: f64) -> f64 {
    let mut x = 1.0;
    for _ in 0..200_000 {
        x = erf(x / (8.0 * rho).sqrt());
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn origin_jacobian_is_linear_slope(rho in 0.02f64..5.0, mu in 0usize..2, n in 101usize..5001) {
        let (diag, off) = origin_derivative(rho, n | 1, mu);
        prop_assert!((diag - linear_slope(rho)).abs() < 1e-4, "{diag} vs {}", linear_slope(rho));
        prop_assert!(off.abs() < 1e-4);
    }

    #[test]
    fn step_size_solves_self_consistency(rho in 0.005f64..0.155) {
        let x = solve_delta_a1(rho);
        prop_assert!(x > 0.0 && x <= 1.0);
        prop_assert!((x - erf(x / (8.0 * rho).sqrt())).abs() < 1e-9);
    }

    #[test]
    fn step_size_is_non_increasing(a in 0.001f64..0.3, b in 0.001f64..0.3) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(solve_delta_a1(lo) >= solve_delta_a1(hi) - 1e-12);
    }

    #[test]
    fn small_basin_probability_grows_with_diversity(a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (p, q) = (quadratic_basin(lo).p_small, quadratic_basin(hi).p_small);
        prop_assert!((0.0..=1.0).contains(&p) && p <= q);
    }

    #[test]
    fn quadratic_fate_follows_boundary(rho in 0.005f64..5.0, frac in 0.0f64..0.95) {
        let b = quadratic_basin(rho).boundary;
        prop_assert_eq!(quadratic_fate(frac * b, rho, 100_000).unwrap(), QuadraticFate::Converged);
        prop_assert_eq!(quadratic_fate(-frac * b, rho, 100_000).unwrap(), QuadraticFate::Converged);
        prop_assert_eq!(quadratic_fate(b * (2.0 - frac), rho, 100_000).unwrap(), QuadraticFate::Diverged);
    }

    #[test]
    fn bimodal_maps_stay_bounded(rho in 0.0f64..0.5, a0 in -0.05f64..0.05, a1 in -0.05f64..0.05, batch in any::<bool>()) {
        let mode = if batch { UpdateMode::Batch } else { UpdateMode::Online };
        let mut s = TheoryState::new(rho, 1001, 2);
        s.a_vec = vec![a0, a1];
        for _ in 0..500 {
            s = bimodal_map_m1(&s, mode).unwrap();
            prop_assert!(s.a_vec.iter().all(|a| a.abs() <= 1.1), "{:?}", s.a_vec);
        }
    }
}

#[test]
fn fixed_point_oracle_agrees_with_bisection() {
    for rho in [0.01, 0.03, 0.0459, 0.08, 0.12] {
        let x = solve_delta_a1(rho);
        assert!((x - fixed_point_oracle(rho)).abs() < 1e-6, "rho {rho}");
    }
    assert_eq!(solve_delta_a1(RHO_C + 1e-9), 0.0);
}

#[test]
fn stability_boundary_is_marginal() {
    let rc = mg_core::theory::critical_rho_second();
    assert!((stability_coefficient(rc, solve_delta_a1(rc)) - 1.0).abs() < 1e-6);
    assert!(stability_coefficient(rc * 0.9, solve_delta_a1(rc * 0.9)) > 1.0);
    assert!(stability_coefficient(rc * 1.1, solve_delta_a1(rc * 1.1)) < 1.0);
}

#[test]
fn zero_diversity_map_matches_one_simulated_step() {
    // From k = 0 with no biases, the map predicts ΔA^{μ*} = −½·sgn A^{μ*} and
    // no change on the other signal.
    let mut s = TheoryState::new(0.0, 10_001, 2);
    s.a_vec = vec![0.01, -0.02];
    let next = bimodal_map_m1(&s, UpdateMode::Online).unwrap();
    assert!((next.a_vec[0] - s.a_vec[0] + 0.5).abs() < 1e-12);
    assert!((next.a_vec[1] - s.a_vec[1]).abs() < 1e-12);

    let trials = 20;
    let (mut own, mut other) = (0.0, 0.0);
    for seed in 0..trials {
        let cfg = GameConfig::new(10_001, 1).with_rho(0.0).with_seed(seed);
        let mut game = GameState::new(&cfg).unwrap();
        let rec = game.advance_online();
        let sign = rec.attendance.signum();
        own += rec.delta_a[rec.mu_star] * sign;
        other += rec.delta_a[1 - rec.mu_star].abs();
    }
    let (own, other) = (own / trials as f64, other / trials as f64);
    assert!((own + 0.5).abs() < 0.02, "mean signed step {own}");
    assert!(other < 0.03, "mean off-signal step {other}");
}
