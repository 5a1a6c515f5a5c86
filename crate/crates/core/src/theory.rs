//! Deterministic maps and solvers for the phase-space dynamics.
//!
//! Positions `A^μ` and payoff components `k_μ` are real-valued here. The
//! population enters only through `N` and the bias variance `R = ρN`.

use std::f64::consts::PI;

use libm::erf;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::game::{payoff_value, winning_bit, PayoffKind, UpdateMode};

/// Diversity below which vanishing steps lose stability under linear payoff.
pub const RHO_C: f64 = 1.0 / (2.0 * PI);

/// Bracket for the self-consistent step size.
pub const DELTA_A1_BRACKET: (f64, f64) = (1e-6, 1.0);

/// Bracket for the secondary instability.
pub const RHO_SECOND_BRACKET: (f64, f64) = (0.01, 0.1);

/// `|√N A|` beyond which the quadratic map is declared divergent.
pub const QUADRATIC_DIVERGENCE: f64 = 1e6;

const BISECT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("diversity must be positive, got {0}")]
    NonPositiveRho(f64),
    #[error("map needs D = {expected}, state has D = {got}")]
    Dimension { expected: usize, got: usize },
    #[error("signal {mu} out of range for D = {d}")]
    SignalOutOfRange { mu: usize, d: usize },
    #[error("a_vec has length {a} but k_vec has length {k}")]
    Inconsistent { a: usize, k: usize },
}

fn check_rho(rho: f64) -> Result<(), TheoryError> {
    if rho > 0.0 {
        Ok(())
    } else {
        Err(TheoryError::NonPositiveRho(rho))
    }
}

/// Analytical counterpart of a game state.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryState {
    pub a_vec: Vec<f64>,
    /// Raw cumulative payoffs, updated as `k_μ ← k_μ − √N A^μ`.
    pub k_vec: Vec<f64>,
    pub rho: f64,
    pub n_agents: usize,
    pub t: u64,
    pub mu_star: usize,
}

impl TheoryState {
    /// Origin of a `d`-dimensional phase space with signal 0.
    pub fn new(rho: f64, n_agents: usize, d: usize) -> Self {
        TheoryState {
            a_vec: vec![0.0; d],
            k_vec: vec![0.0; d],
            rho,
            n_agents,
            t: 0,
            mu_star: 0,
        }
    }

    /// Start with `A^μ ~ N(0, 1/N)`, `k = 0` and a uniform signal.
    pub fn random_start<R: Rng + ?Sized>(rho: f64, n_agents: usize, d: usize, rng: &mut R) -> Self {
        let sd = 1.0 / (n_agents as f64).sqrt();
        let a_vec = (0..d)
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        TheoryState {
            a_vec,
            k_vec: vec![0.0; d],
            rho,
            n_agents,
            t: 0,
            mu_star: rng.random_range(0..d),
        }
    }

    pub fn dim(&self) -> usize {
        self.a_vec.len()
    }

    fn sqrt_n(&self) -> f64 {
        (self.n_agents as f64).sqrt()
    }

    fn check_m1(&self) -> Result<(), TheoryError> {
        if self.k_vec.len() != self.a_vec.len() {
            return Err(TheoryError::Inconsistent {
                a: self.a_vec.len(),
                k: self.k_vec.len(),
            });
        }
        if self.dim() != 2 {
            return Err(TheoryError::Dimension {
                expected: 2,
                got: self.dim(),
            });
        }
        if self.mu_star >= 2 {
            return Err(TheoryError::SignalOutOfRange {
                mu: self.mu_star,
                d: 2,
            });
        }
        Ok(())
    }
}

/// Onset of a nonzero ranked step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifurcationPoint {
    pub rho_c: f64,
    /// `ΔA¹` on the branch at onset.
    pub branch_value: f64,
    /// Rank of the step size that bifurcates.
    pub order: usize,
}

/// Onset of the leading step size: `ρ = 1/2π`, from zero.
pub fn primary_bifurcation() -> BifurcationPoint {
    BifurcationPoint {
        rho_c: RHO_C,
        branch_value: 0.0,
        order: 1,
    }
}

/// Onset of the second step size, where the secondary direction destabilizes.
pub fn secondary_bifurcation() -> BifurcationPoint {
    let rho_c = critical_rho_second();
    BifurcationPoint {
        rho_c,
        branch_value: solve_delta_a1(rho_c),
        order: 2,
    }
}

/// One step of the reduced map on the `μ*` component:
/// `A ← A − √(2/(πR))·φ(√N A)`.
pub fn reduced_map_step(
    a_vec: &[f64],
    rho: f64,
    n_agents: usize,
    payoff: PayoffKind,
    mu_star: usize,
) -> Result<Vec<f64>, TheoryError> {
    check_rho(rho)?;
    if mu_star >= a_vec.len() {
        return Err(TheoryError::SignalOutOfRange {
            mu: mu_star,
            d: a_vec.len(),
        });
    }
    let n = n_agents as f64;
    let gain = (2.0 / (PI * rho * n)).sqrt();
    let mut out = a_vec.to_vec();
    out[mu_star] -= gain * payoff_value(payoff, n.sqrt() * a_vec[mu_star]);
    Ok(out)
}

/// Slope of the linear reduced map, `1 − √(2/(πρ))`.
pub fn linear_slope(rho: f64) -> f64 {
    1.0 - (2.0 / (PI * rho)).sqrt()
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let f_lo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (f_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest non-negative root of `x = erf(x/√(8ρ))`.
///
/// Zero for `ρ ≥ 1/2π`. Non-positive `ρ` gives the zero-diversity limit 1.
pub fn solve_delta_a1(rho: f64) -> f64 {
    if rho >= RHO_C {
        return 0.0;
    }
    if rho <= 0.0 {
        return 1.0;
    }
    let scale = (8.0 * rho).sqrt();
    let g = |x: f64| x - erf(x / scale);
    let (lo, hi) = DELTA_A1_BRACKET;
    if g(lo) >= 0.0 {
        return lo;
    }
    bisect(g, lo, hi, BISECT_TOL)
}

/// Volatility on the primary branch, `N·(ΔA¹)²/32`.
pub fn theory_sigma2(delta_a1: f64, n_agents: usize) -> f64 {
    n_agents as f64 * delta_a1 * delta_a1 / 32.0
}

/// Growth factor of a perturbation in the secondary direction over one
/// period of the attractor:
/// `λ = [1 − (1/√(2πρ))(1 + e^{−(ΔA¹)²/8ρ})]²`.
pub fn stability_coefficient(rho: f64, delta_a1: f64) -> f64 {
    let c = (1.0 + (-delta_a1 * delta_a1 / (8.0 * rho)).exp()) / (2.0 * PI * rho).sqrt();
    (1.0 - c).powi(2)
}

/// Diversity at which `λ(ρ, ΔA¹(ρ)) = 1` on the primary branch.
pub fn critical_rho_second() -> f64 {
    let (lo, hi) = RHO_SECOND_BRACKET;
    bisect(
        |rho| stability_coefficient(rho, solve_delta_a1(rho)) - 1.0,
        lo,
        hi,
        BISECT_TOL,
    )
}

/// Mean positions `A^μ(k)` of a `D = 2` population with Gaussian biases,
/// up to a constant offset.
pub fn gaussian_positions_m1(k: [f64; 2], rho: f64, n_agents: usize) -> [f64; 2] {
    let scale = (2.0 * rho * n_agents as f64).sqrt();
    let e = |x: f64| erf(x / scale);
    let f = |km: f64, kn: f64| {
        (e(2.0 * km + 2.0 * kn) + e(2.0 * km - 2.0 * kn) + 2.0 * e(2.0 * km)) / 8.0
    };
    [f(k[0], k[1]), f(k[1], k[0])]
}

/// One online step of the `m = 1` map with Gaussian biases and linear payoff.
///
/// `k_{μ*}` moves by `−√N A^{μ*}` and both positions shift by the change in
/// the mean positions. The next signal is the winning bit of the old
/// `A^{μ*}`.
pub fn gaussian_map_m1(state: &TheoryState) -> Result<TheoryState, TheoryError> {
    state.check_m1()?;
    check_rho(state.rho)?;
    let mu = state.mu_star;
    let k0 = [state.k_vec[0], state.k_vec[1]];
    let mut k1 = k0;
    k1[mu] -= state.sqrt_n() * state.a_vec[mu];
    let before = gaussian_positions_m1(k0, state.rho, state.n_agents);
    let after = gaussian_positions_m1(k1, state.rho, state.n_agents);
    Ok(TheoryState {
        a_vec: vec![
            state.a_vec[0] + after[0] - before[0],
            state.a_vec[1] + after[1] - before[1],
        ],
        k_vec: k1.to_vec(),
        t: state.t + 1,
        mu_star: winning_bit(state.a_vec[mu]) as usize,
        ..state.clone()
    })
}

/// `Θ(x)` with `Θ(0) = ½`.
fn step_fn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// Mean positions `A^μ(k)` of a `D = 2` population with biases `±√(ρN)`,
/// up to a constant offset.
pub fn bimodal_positions_m1(k: [f64; 2], rho: f64, n_agents: usize) -> [f64; 2] {
    let b = (rho * n_agents as f64).sqrt();
    let pair = |x: f64| step_fn(x + b) + step_fn(x - b) - step_fn(-x + b) - step_fn(-x - b);
    let f = |km: f64, kn: f64| {
        (pair(2.0 * km + 2.0 * kn) + 2.0 * pair(2.0 * km) + pair(2.0 * km - 2.0 * kn)) / 16.0
    };
    [f(k[0], k[1]), f(k[1], k[0])]
}

/// One step of the `m = 1` map with bimodal biases and linear payoff.
///
/// Online: only `k_{μ*}` moves and the signal follows the winning bit.
/// Batch: both components move and the signal is left unchanged.
/// `ρ = 0` is allowed and gives the bias-free population.
pub fn bimodal_map_m1(state: &TheoryState, mode: UpdateMode) -> Result<TheoryState, TheoryError> {
    state.check_m1()?;
    if state.rho < 0.0 {
        return Err(TheoryError::NonPositiveRho(state.rho));
    }
    let sqrt_n = state.sqrt_n();
    let k0 = [state.k_vec[0], state.k_vec[1]];
    let mut k1 = k0;
    let mu_next = match mode {
        UpdateMode::Online => {
            let mu = state.mu_star;
            k1[mu] -= sqrt_n * state.a_vec[mu];
            winning_bit(state.a_vec[mu]) as usize
        }
        UpdateMode::Batch => {
            k1[0] -= sqrt_n * state.a_vec[0];
            k1[1] -= sqrt_n * state.a_vec[1];
            state.mu_star
        }
    };
    let before = bimodal_positions_m1(k0, state.rho, state.n_agents);
    let after = bimodal_positions_m1(k1, state.rho, state.n_agents);
    Ok(TheoryState {
        a_vec: vec![
            state.a_vec[0] + after[0] - before[0],
            state.a_vec[1] + after[1] - before[1],
        ],
        k_vec: k1.to_vec(),
        t: state.t + 1,
        mu_star: mu_next,
        ..state.clone()
    })
}

/// One step of the quadratic reduced map on the `μ*` component.
pub fn quadratic_map_step(
    a_vec: &[f64],
    rho: f64,
    n_agents: usize,
    mu_star: usize,
) -> Result<Vec<f64>, TheoryError> {
    reduced_map_step(a_vec, rho, n_agents, PayoffKind::Quadratic, mu_star)
}

/// Basin of the small-variance attractor under quadratic payoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticBasin {
    /// Half-width `√(2πρ)` in units of `√N A`.
    pub boundary: f64,
    /// Probability that both components of a `D = 2` start lie inside.
    pub p_small: f64,
}

pub fn quadratic_basin(rho: f64) -> QuadraticBasin {
    let rho = rho.max(0.0);
    QuadraticBasin {
        boundary: (2.0 * PI * rho).sqrt(),
        p_small: erf((PI * rho).sqrt()).powi(2),
    }
}

/// Long-time outcome of the quadratic map from one starting point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadraticFate {
    /// Entered the region of monotone decay to 0.
    Converged,
    /// Exceeded the divergence cutoff.
    Diverged,
    /// Neither within the iteration budget.
    Undecided,
}

/// Iterates `x ← x − √(2/(πρ))·x²·sgn x` in units `x = √N A`.
///
/// Once `√(2/(πρ))·|x| ≤ 1` every later iterate shrinks towards 0 without
/// changing sign, so that counts as convergence.
pub fn quadratic_fate(x0: f64, rho: f64, max_iter: usize) -> Result<QuadraticFate, TheoryError> {
    check_rho(rho)?;
    let c = (2.0 / (PI * rho)).sqrt();
    let mut x = x0;
    for _ in 0..=max_iter {
        if c * x.abs() <= 1.0 {
            return Ok(QuadraticFate::Converged);
        }
        if !x.is_finite() || x.abs() > QUADRATIC_DIVERGENCE {
            return Ok(QuadraticFate::Diverged);
        }
        x -= c * x * x.abs();
    }
    Ok(QuadraticFate::Undecided)
}

/// States visited by iterating `map` from `start`, including `start`.
pub fn trajectory<F>(
    start: TheoryState,
    steps: usize,
    map: F,
) -> Result<Vec<TheoryState>, TheoryError>
where
    F: Fn(&TheoryState) -> Result<TheoryState, TheoryError>,
{
    let mut out = Vec::with_capacity(steps + 1);
    out.push(start);
    for i in 0..steps {
        let next = map(&out[i])?;
        out.push(next);
    }
    Ok(out)
}

/// `σ²/N = (N/4)·Var(A^{μ*})` of a map iterated for `t_equil` discarded and
/// `t_measure` recorded steps.
pub fn map_sigma2<F>(
    start: TheoryState,
    t_equil: u64,
    t_measure: u64,
    map: F,
) -> Result<f64, TheoryError>
where
    F: Fn(&TheoryState) -> Result<TheoryState, TheoryError>,
{
    let n = start.n_agents as f64;
    let mut state = start;
    for _ in 0..t_equil {
        state = map(&state)?;
    }
    let mut xs = Vec::with_capacity(t_measure as usize);
    for _ in 0..t_measure {
        xs.push(state.a_vec[state.mu_star]);
        state = map(&state)?;
    }
    if xs.is_empty() {
        return Ok(0.0);
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
    Ok(n / 4.0 * var)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_reduced_map_slopes() {
        let a = [0.3, -0.2];
        let out = reduced_map_step(&a, 2.0 / PI, 1001, PayoffKind::Linear, 0).unwrap();
        assert!(out[0].abs() < 1e-15);
        assert_eq!(out[1], -0.2);
        let out = reduced_map_step(&a, RHO_C, 1001, PayoffKind::Linear, 0).unwrap();
        assert!((out[0] + 0.3).abs() < 1e-12);
    }

    #[test]
    fn linear_reduced_map_grows_below_rho_c() {
        let mut a: Vec<f64> = vec![0.01];
        let mut last = a[0].abs();
        for _ in 0..20 {
            a = reduced_map_step(&a, 0.05, 1001, PayoffKind::Linear, 0).unwrap();
            assert!(a[0].abs() > last);
            last = a[0].abs();
        }
    }

    #[test]
    fn reduced_map_rejects_bad_input() {
        assert_eq!(
            reduced_map_step(&[0.1], 0.0, 11, PayoffKind::Linear, 0),
            Err(TheoryError::NonPositiveRho(0.0))
        );
        assert!(reduced_map_step(&[0.1], 0.1, 11, PayoffKind::Linear, 1).is_err());
    }

    fn delta_a1_oracle(rho: f64) -> f64 {
        // independent fixed-point iteration from 1, which converges to the
        // largest root from above
        let mut x: f64 = 1.0;
        for _ in 0..200_000 {
            x = erf(x / (8.0 * rho).sqrt());
        }
        x
    }

    #[test]
    fn delta_a1_values() {
        assert_eq!(solve_delta_a1(0.2), 0.0);
        assert!((solve_delta_a1(0.0459) - 0.9775).abs() < 5e-4);
        let x = solve_delta_a1(0.1);
        assert!((x - delta_a1_oracle(0.1)).abs() < 1e-8, "{x}");
        assert!((x - 0.79).abs() < 0.01);
    }

    #[test]
    fn sigma2_values() {
        assert_eq!(theory_sigma2(0.0, 1001), 0.0);
        assert_eq!(theory_sigma2(1.0, 1001), 31.28125);
        let s = theory_sigma2(solve_delta_a1(0.0459), 1001);
        assert!((s - 29.9).abs() < 0.05, "{s}");
    }

    #[test]
    fn stability_values() {
        assert!((stability_coefficient(0.0459, 0.9775) - 1.0).abs() < 0.01);
        assert!(stability_coefficient(0.15, solve_delta_a1(0.15)) < 1.0);
        assert!((stability_coefficient(RHO_C, 0.0) - 1.0).abs() < 1e-12);
        assert!((critical_rho_second() - 0.0459).abs() < 1e-3);
    }

    #[test]
    fn gaussian_map_origin_is_fixed() {
        let s = TheoryState::new(0.1, 1001, 2);
        let next = gaussian_map_m1(&s).unwrap();
        assert_eq!(next.a_vec, vec![0.0, 0.0]);
    }

    #[test]
    fn gaussian_map_needs_d2() {
        let s = TheoryState::new(0.1, 1001, 4);
        assert_eq!(
            gaussian_map_m1(&s),
            Err(TheoryError::Dimension {
                expected: 2,
                got: 4
            })
        );
    }

    #[test]
    fn gaussian_map_signal_rule() {
        let mut s = TheoryState::new(0.1, 1001, 2);
        s.a_vec = vec![0.01, 0.0];
        assert_eq!(gaussian_map_m1(&s).unwrap().mu_star, 0);
        s.a_vec = vec![-0.01, 0.0];
        assert_eq!(gaussian_map_m1(&s).unwrap().mu_star, 1);
    }

    #[test]
    fn bimodal_map_origin_is_fixed() {
        for mode in [UpdateMode::Online, UpdateMode::Batch] {
            let s = TheoryState::new(0.01, 1001, 2);
            let next = bimodal_map_m1(&s, mode).unwrap();
            assert_eq!(next.a_vec, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn bimodal_zero_diversity_single_step() {
        let mut s = TheoryState::new(0.0, 1001, 2);
        s.a_vec = vec![0.05, 0.0];
        let next = bimodal_map_m1(&s, UpdateMode::Online).unwrap();
        assert!((next.a_vec[0] - (0.05 - 0.5)).abs() < 1e-15);
        assert_eq!(next.a_vec[1], 0.0);
    }

    #[test]
    fn quadratic_boundary_orbit() {
        let n = 255;
        let rho = 0.1;
        let b = quadratic_basin(rho).boundary;
        let a = [b / (n as f64).sqrt(), 0.0];
        let out = quadratic_map_step(&a, rho, n, 0).unwrap();
        assert!((out[0] + a[0]).abs() < 1e-12);
        assert_eq!(quadratic_map_step(&[0.0], rho, n, 0).unwrap(), vec![0.0]);
    }

    #[test]
    fn quadratic_inside_decreases() {
        let n = 255;
        let rho = 0.3;
        let x0 = 0.5 * quadratic_basin(rho).boundary;
        let mut a = vec![x0 / (n as f64).sqrt()];
        let mut last = a[0].abs();
        for _ in 0..200 {
            a = quadratic_map_step(&a, rho, n, 0).unwrap();
            assert!(a[0].abs() < last);
            last = a[0].abs();
        }
        assert!(last * (n as f64).sqrt() < 0.05);
    }

    #[test]
    fn basin_values() {
        assert_eq!(
            quadratic_basin(0.0),
            QuadraticBasin {
                boundary: 0.0,
                p_small: 0.0
            }
        );
        assert!((quadratic_basin(1.0).p_small - 0.976).abs() < 1e-3);
        assert!((quadratic_basin(0.251).p_small - 0.626).abs() < 1e-3);
    }

    #[test]
    fn fates_around_boundary() {
        for rho in [0.01, 0.1, 1.0] {
            let b = quadratic_basin(rho).boundary;
            assert_eq!(
                quadratic_fate(0.9 * b, rho, 100),
                Ok(QuadraticFate::Converged)
            );
            assert_eq!(
                quadratic_fate(-0.9 * b, rho, 100),
                Ok(QuadraticFate::Converged)
            );
            assert_eq!(
                quadratic_fate(1.1 * b, rho, 100),
                Ok(QuadraticFate::Diverged)
            );
            assert_eq!(
                quadratic_fate(b * (1.0 + 1e-3), rho, 100),
                Ok(QuadraticFate::Diverged)
            );
        }
    }

    #[test]
    fn bifurcation_points() {
        let p = primary_bifurcation();
        assert_eq!(p.order, 1);
        let s = secondary_bifurcation();
        assert!(s.rho_c < p.rho_c);
        assert!((s.branch_value - 0.9775).abs() < 2e-3);
    }

    #[test]
    fn sigma2_of_fixed_point_is_zero() {
        let s = TheoryState::new(0.1, 1001, 2);
        assert_eq!(map_sigma2(s, 10, 100, gaussian_map_m1), Ok(0.0));
    }
}
