//! Observables over recorded trajectories.
//!
//! All functions are pure and work on an [`ObservableSeries`], a borrowed view
//! of consecutive [`StepRecord`]s. Variances follow the buyer-population
//! convention: `(N/4)` times the variance of the excess demand.

use thiserror::Error;

use crate::game::StepRecord;

/// Threshold on `|ΔA^μ|` separating small steps from bifurcated ones.
pub const THETA_LARGE: f64 = 0.1;

/// Threshold on `|A^μ|` above which the phase-space point counts as away from
/// the origin.
pub const ACTIVITY_EPS: f64 = 0.1;

/// Period-4 signal sequence of the `m = 1` attractor.
pub const M1_ATTRACTOR: [usize; 4] = [0, 1, 1, 0];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("series is empty")]
    Empty,
    #[error("observable needs D = {expected}, series has D = {got}")]
    Dimension { expected: usize, got: usize },
    #[error("window of {got} steps is shorter than the required {needed}")]
    ShortWindow { needed: usize, got: usize },
}

/// A borrowed window of consecutive step records.
#[derive(Debug, Clone, Copy)]
pub struct ObservableSeries<'a> {
    pub records: &'a [StepRecord],
    pub d: usize,
    pub n_agents: usize,
}

impl<'a> ObservableSeries<'a> {
    pub fn new(records: &'a [StepRecord], d: usize, n_agents: usize) -> Self {
        ObservableSeries {
            records,
            d,
            n_agents,
        }
    }

    /// The last `len` records (or all of them if fewer).
    pub fn tail(&self, len: usize) -> Self {
        let start = self.records.len().saturating_sub(len);
        ObservableSeries {
            records: &self.records[start..],
            ..*self
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn non_empty(&self) -> Result<(), MeasureError> {
        if self.records.is_empty() {
            Err(MeasureError::Empty)
        } else {
            Ok(())
        }
    }

    fn require_dim(&self, d: usize) -> Result<(), MeasureError> {
        if self.d != d {
            Err(MeasureError::Dimension {
                expected: d,
                got: self.d,
            })
        } else {
            Ok(())
        }
    }
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len();
    xs.sum::<f64>() / n as f64
}

/// Population variance of a slice, shifted by its first element so constant
/// input gives exactly 0.
fn variance(xs: &[f64]) -> f64 {
    let x0 = xs[0];
    let m = mean(xs.iter().map(|x| x - x0));
    xs.iter().map(|x| (x - x0 - m).powi(2)).sum::<f64>() / xs.len() as f64
}

/// `σ²/N = (N/4)·[⟨(A^{μ*})²⟩ − ⟨A^{μ*}⟩²]` over the window.
pub fn attendance_variance(series: &ObservableSeries) -> Result<f64, MeasureError> {
    series.non_empty()?;
    let a: Vec<f64> = series.records.iter().map(|r| r.attendance).collect();
    Ok(series.n_agents as f64 / 4.0 * variance(&a))
}

/// Per-signal variance of `A^μ` conditioned on `μ = μ*`, indexed by signal.
/// Signals that never occur are `None`.
pub fn conditional_variances(series: &ObservableSeries) -> Vec<Option<f64>> {
    let mut per_signal: Vec<Vec<f64>> = vec![Vec::new(); series.d];
    for r in series.records {
        per_signal[r.mu_star].push(r.attendance);
    }
    let scale = series.n_agents as f64 / 4.0;
    per_signal
        .iter()
        .map(|xs| (!xs.is_empty()).then(|| scale * variance(xs)))
        .collect()
}

/// Conditional variances sorted in decreasing order, `S_1 ≥ S_2 ≥ …`, with
/// absent ranks (unvisited signals) last.
pub fn ranked_signal_variances(series: &ObservableSeries) -> Vec<Option<f64>> {
    let mut v = conditional_variances(series);
    v.sort_by(|a, b| match (a, b) {
        (Some(x), Some(y)) => y.total_cmp(x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    v
}

/// First time at which four consecutive signals form a cyclic shift of
/// `0, 1, 1, 0`. Returns `None` if the attractor is never reached.
pub fn state_convergence_time(series: &ObservableSeries) -> Result<Option<u64>, MeasureError> {
    series.require_dim(2)?;
    let rotations: Vec<[usize; 4]> = (0..4)
        .map(|k| std::array::from_fn(|j| M1_ATTRACTOR[(j + k) % 4]))
        .collect();
    Ok(series
        .records
        .windows(4)
        .find(|w| {
            let seq: [usize; 4] = std::array::from_fn(|j| w[j].mu_star);
            rotations.contains(&seq)
        })
        .map(|w| w[0].t))
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Inverse decay rate of a residual stream relaxing exponentially onto a
/// baseline.
///
/// The baseline is the median of the final quartile. The transient runs from
/// the start until the excess over the baseline first drops to the noise
/// floor (three median absolute deviations of the final quartile, and never
/// less than 10⁻³ of the initial excess). A least-squares line through the
/// logarithm of the excess over the transient gives the rate. Returns
/// `Some(0.0)` when there is no transient and `None` when the fitted rate is
/// not positive.
pub fn fit_decay_time(residual: &[f64]) -> Option<f64> {
    if residual.len() < 4 {
        return None;
    }
    let mut tail = residual[residual.len() * 3 / 4..].to_vec();
    let baseline = median(&mut tail);
    let mut dev: Vec<f64> = tail.iter().map(|x| (x - baseline).abs()).collect();
    let mad = median(&mut dev);
    let initial = residual[0] - baseline;
    let floor = (3.0 * mad).max(1e-3 * initial);
    if initial <= floor {
        return Some(0.0);
    }
    let end = residual
        .iter()
        .position(|&r| r - baseline <= floor)
        .unwrap_or(residual.len());
    let pts: Vec<(f64, f64)> = residual[..end]
        .iter()
        .enumerate()
        .filter(|(_, &r)| r - baseline > 0.0)
        .map(|(t, &r)| (t as f64, (r - baseline).ln()))
        .collect();
    if pts.len() < 2 {
        return Some(0.0);
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(t, _)| (t - mt) * (t - mt)).sum();
    let rate = -sxy / sxx;
    (rate > 0.0 && rate.is_finite()).then(|| 1.0 / rate)
}

/// Relaxation time of `A(t)` after subtracting its period-`2D` trend.
///
/// The trend `Ā_i` is the average of `A(t)` over `t ≡ i (mod 2D)` on the second
/// half of the series, which is assumed to sit on the attractor.
pub fn population_convergence_time(series: &ObservableSeries) -> Result<Option<f64>, MeasureError> {
    let period = 2 * series.d;
    let needed = 20 * period;
    if series.len() < needed {
        return Err(MeasureError::ShortWindow {
            needed,
            got: series.len(),
        });
    }
    let half = series.len() / 2;
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for r in &series.records[half..] {
        let i = (r.t % period as u64) as usize;
        sums[i] += r.attendance;
        counts[i] += 1;
    }
    let trend: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let residual: Vec<f64> = series
        .records
        .iter()
        .map(|r| (r.attendance - trend[(r.t % period as u64) as usize]).abs())
        .collect();
    Ok(fit_decay_time(&residual))
}

/// Axial and diagonal isotropy parameters `(U₁, V₁)` for `D = 2`:
/// time averages of `[(ΔA¹)² − (ΔA⁰)²]²` and `[2ΔA¹ΔA⁰]²`.
pub fn isotropy_params(series: &ObservableSeries) -> Result<(f64, f64), MeasureError> {
    series.require_dim(2)?;
    series.non_empty()?;
    let n = series.len() as f64;
    let (mut u, mut v) = (0.0, 0.0);
    for r in series.records {
        let (d0, d1) = (r.delta_a[0].abs(), r.delta_a[1].abs());
        u += (d1 * d1 - d0 * d0).powi(2);
        v += (2.0 * d1 * d0).powi(2);
    }
    Ok((u / n, v / n))
}

/// Isotropy class of a step vector, by the number of large components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepClass {
    /// No large component.
    Small = 1,
    /// Exactly one large component.
    OneLarge = 2,
    /// Exactly two large components.
    TwoLarge = 3,
    /// More than two large components.
    ManyLarge = 4,
}

impl StepClass {
    pub fn number(self) -> usize {
        self as usize
    }
}

pub fn classify_step_vector(step: &[f64], theta_large: f64) -> StepClass {
    match step.iter().filter(|x| x.abs() > theta_large).count() {
        0 => StepClass::Small,
        1 => StepClass::OneLarge,
        2 => StepClass::TwoLarge,
        _ => StepClass::ManyLarge,
    }
}

/// Fraction of steps in each of the four classes.
pub fn class_fractions(
    series: &ObservableSeries,
    theta_large: f64,
) -> Result<[f64; 4], MeasureError> {
    series.non_empty()?;
    let mut counts = [0usize; 4];
    for r in series.records {
        counts[classify_step_vector(&r.delta_a, theta_large).number() - 1] += 1;
    }
    let n = series.len() as f64;
    Ok(counts.map(|c| c as f64 / n))
}

/// Fraction of steps with `max_μ |A^μ(t)| > eps`.
pub fn activity(series: &ObservableSeries, eps: f64) -> Result<f64, MeasureError> {
    series.non_empty()?;
    let away = series
        .records
        .iter()
        .filter(|r| r.a_vec_before.iter().any(|a| a.abs() > eps))
        .count();
    Ok(away as f64 / series.len() as f64)
}

/// Per-signal traces of the cumulative payoff components `k_μ(t)`.
pub fn payoff_component_series(series: &ObservableSeries) -> Vec<Vec<f64>> {
    (0..series.d)
        .map(|mu| series.records.iter().map(|r| r.k_vec[mu]).collect())
        .collect()
}

/// Split of a set of sample variances into a small and a large group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSplit {
    /// Number of samples below the gap.
    pub n_small: usize,
    pub n_total: usize,
    /// Geometric midpoint of the gap.
    pub threshold: f64,
}

impl GapSplit {
    pub fn small_fraction(&self) -> f64 {
        self.n_small as f64 / self.n_total as f64
    }
}

/// Sorts the variances ascending and splits at the largest gap in
/// log-variance. Values are floored at `floor` before taking logarithms.
/// Returns `None` for fewer than two values.
pub fn variance_gap_split(variances: &[f64], floor: f64) -> Option<GapSplit> {
    if variances.len() < 2 {
        return None;
    }
    let mut logs: Vec<f64> = variances.iter().map(|v| v.max(floor).ln()).collect();
    logs.sort_by(f64::total_cmp);
    let (at, _) = logs
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i, w[1] - w[0]))
        .fold((0, f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        });
    Some(GapSplit {
        n_small: at + 1,
        n_total: logs.len(),
        threshold: (0.5 * (logs[at] + logs[at + 1])).exp(),
    })
}

/// Observables of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleObservables {
    pub sigma2_over_n: f64,
    pub s_ranked: Vec<Option<f64>>,
    /// `(U₁, V₁)`, only for `D = 2`.
    pub isotropy: Option<(f64, f64)>,
    pub activity: f64,
    pub class_fractions: [f64; 4],
    pub t_state: Option<f64>,
    pub t_pop: Option<f64>,
}

impl SampleObservables {
    /// Measures `window`; convergence times are measured on `full` when
    /// `with_convergence` is set and `D = 2`.
    pub fn measure(
        full: &ObservableSeries,
        window: &ObservableSeries,
        with_convergence: bool,
    ) -> Result<Self, MeasureError> {
        let (t_state, t_pop) = if with_convergence && full.d == 2 {
            let ts = state_convergence_time(full)?;
            let tp = match ts {
                Some(_) if full.len() >= 40 * full.d => population_convergence_time(full)?,
                _ => None,
            };
            (ts.map(|t| t as f64), tp)
        } else {
            (None, None)
        };
        Ok(SampleObservables {
            sigma2_over_n: attendance_variance(window)?,
            s_ranked: ranked_signal_variances(window),
            isotropy: if window.d == 2 {
                Some(isotropy_params(window)?)
            } else {
                None
            },
            activity: activity(window, ACTIVITY_EPS)?,
            class_fractions: class_fractions(window, THETA_LARGE)?,
            t_state,
            t_pop,
        })
    }
}

/// Mean and standard error of a per-sample quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    /// Mean and standard error (sample standard deviation over `√n`).
    /// `None` for an empty input.
    pub fn from_values(xs: &[f64]) -> Option<Self> {
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let m = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Estimate { mean: m, stderr, n })
    }
}

/// Ensemble averages of the per-sample observables.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub sigma2_over_n: Estimate,
    pub s_ranked: Vec<Option<Estimate>>,
    pub u1: Option<Estimate>,
    pub v1: Option<Estimate>,
    pub activity: Estimate,
    /// Averages over converged samples only.
    pub t_state: Option<Estimate>,
    pub t_pop: Option<Estimate>,
    pub class_fractions: [Estimate; 4],
    pub n_samples: usize,
}

impl EnsembleSummary {
    /// Aggregates samples in the order given. Returns `None` for no samples.
    pub fn aggregate(samples: &[SampleObservables]) -> Option<Self> {
        let first = samples.first()?;
        let collect = |f: &dyn Fn(&SampleObservables) -> Option<f64>| -> Option<Estimate> {
            let xs: Vec<f64> = samples.iter().filter_map(f).collect();
            Estimate::from_values(&xs)
        };
        let ranks = first.s_ranked.len();
        Some(EnsembleSummary {
            sigma2_over_n: collect(&|s| Some(s.sigma2_over_n))?,
            s_ranked: (0..ranks)
                .map(|r| collect(&|s| s.s_ranked.get(r).copied().flatten()))
                .collect(),
            u1: collect(&|s| s.isotropy.map(|p| p.0)),
            v1: collect(&|s| s.isotropy.map(|p| p.1)),
            activity: collect(&|s| Some(s.activity))?,
            t_state: collect(&|s| s.t_state),
            t_pop: collect(&|s| s.t_pop),
            class_fractions: std::array::from_fn(|c| {
                collect(&|s| Some(s.class_fractions[c])).expect("non-empty")
            }),
            n_samples: samples.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: u64, mu: usize, a: Vec<f64>, delta: Vec<f64>) -> StepRecord {
        StepRecord {
            t,
            mu_star: mu,
            attendance: a[mu],
            k_vec: vec![0.0; a.len()],
            a_vec_before: a,
            delta_a: delta,
        }
    }

    fn attendance_only(xs: &[f64]) -> Vec<StepRecord> {
        xs.iter()
            .enumerate()
            .map(|(t, &a)| rec(t as u64, 0, vec![a], vec![0.0]))
            .collect()
    }

    #[test]
    fn constant_attendance_has_zero_variance() {
        let recs = attendance_only(&[0.3; 50]);
        let s = ObservableSeries::new(&recs, 1, 101);
        assert_eq!(attendance_variance(&s).unwrap(), 0.0);
    }

    #[test]
    fn empty_series_is_an_error() {
        let s = ObservableSeries::new(&[], 1, 101);
        assert_eq!(attendance_variance(&s), Err(MeasureError::Empty));
        assert_eq!(activity(&s, 0.1), Err(MeasureError::Empty));
    }

    #[test]
    fn alternating_attendance() {
        let n = 1001;
        let da: f64 = 0.8;
        let xs: Vec<f64> = (0..400)
            .map(|t| if t % 2 == 0 { da / 2.0 } else { -da / 2.0 })
            .collect();
        let recs = attendance_only(&xs);
        let v = attendance_variance(&ObservableSeries::new(&recs, 1, n)).unwrap();
        assert!((v - n as f64 / 16.0 * da * da).abs() < 1e-9);
        // the m = 1 attractor pattern (0, −ΔA/2, +ΔA/2, 0)
        let xs: Vec<f64> = (0..400)
            .map(|t| [0.0, -da / 2.0, da / 2.0, 0.0][t % 4])
            .collect();
        let recs = attendance_only(&xs);
        let v = attendance_variance(&ObservableSeries::new(&recs, 1, n)).unwrap();
        assert!((v - n as f64 / 32.0 * da * da).abs() < 1e-9);
    }

    #[test]
    fn ranked_variances_d2() {
        let n = 1001;
        let recs: Vec<StepRecord> = (0..400)
            .map(|t| {
                if t % 2 == 0 {
                    rec(t, 0, vec![0.0, 0.0], vec![0.0, 0.0])
                } else {
                    let a1 = if t % 4 == 1 { 0.5 } else { -0.5 };
                    rec(t, 1, vec![0.0, a1], vec![0.0, 0.0])
                }
            })
            .collect();
        let s = ranked_signal_variances(&ObservableSeries::new(&recs, 2, n));
        assert!((s[0].unwrap() - n as f64 / 16.0).abs() < 1e-9);
        assert_eq!(s[1], Some(0.0));
    }

    #[test]
    fn unvisited_signal_is_absent() {
        let recs = vec![rec(0, 0, vec![0.1, 0.0, 0.0], vec![0.0; 3]); 3];
        let s = ranked_signal_variances(&ObservableSeries::new(&recs, 3, 11));
        assert_eq!(s, vec![Some(0.0), None, None]);
    }

    fn mu_stream(mus: &[usize]) -> Vec<StepRecord> {
        mus.iter()
            .enumerate()
            .map(|(t, &m)| rec(t as u64, m, vec![0.0, 0.0], vec![0.0, 0.0]))
            .collect()
    }

    #[test]
    fn state_convergence_immediate_and_shifted() {
        let recs = mu_stream(&[0, 1, 1, 0, 0, 1, 1, 0]);
        assert_eq!(
            state_convergence_time(&ObservableSeries::new(&recs, 2, 3)),
            Ok(Some(0))
        );
        let recs = mu_stream(&[1, 1, 0, 0, 1, 1, 0]);
        assert_eq!(
            state_convergence_time(&ObservableSeries::new(&recs, 2, 3)),
            Ok(Some(0))
        );
        let recs = mu_stream(&[0, 0, 0, 0, 0, 1, 1, 0, 0]);
        assert_eq!(
            state_convergence_time(&ObservableSeries::new(&recs, 2, 3)),
            Ok(Some(3))
        );
        let recs = mu_stream(&[0; 20]);
        assert_eq!(
            state_convergence_time(&ObservableSeries::new(&recs, 2, 3)),
            Ok(None)
        );
    }

    #[test]
    fn state_convergence_needs_d2() {
        let recs = attendance_only(&[0.1; 8]);
        assert!(matches!(
            state_convergence_time(&ObservableSeries::new(&recs, 1, 3)),
            Err(MeasureError::Dimension { .. })
        ));
    }

    #[test]
    fn decay_fit_recovers_tau_with_baseline() {
        let r: Vec<f64> = (0..2000)
            .map(|t| 0.3 * (-(t as f64) / 50.0).exp() + 0.01)
            .collect();
        let tau = fit_decay_time(&r).unwrap();
        assert!((tau - 50.0).abs() < 2.0, "{tau}");
    }

    #[test]
    fn flat_residual_has_no_transient() {
        assert_eq!(fit_decay_time(&[0.02; 500]), Some(0.0));
    }

    #[test]
    fn growing_residual_is_not_converged() {
        let r: Vec<f64> = (0..400)
            .map(|t| if t < 100 { t as f64 * 0.01 } else { 0.0 })
            .collect();
        assert_eq!(fit_decay_time(&r), Some(0.0));
        let mut r: Vec<f64> = (0..400).map(|t| 1.0 + 0.001 * t as f64).collect();
        r[0] = 2.0;
        // excess over the final-quartile median grows: no positive decay rate
        assert!(fit_decay_time(&r).is_none() || fit_decay_time(&r) == Some(0.0));
    }

    #[test]
    fn population_time_needs_long_window() {
        let recs = attendance_only(&[0.1; 30]);
        let s = ObservableSeries::new(&recs, 2, 11);
        assert!(matches!(
            population_convergence_time(&s),
            Err(MeasureError::ShortWindow {
                needed: 80,
                got: 30
            })
        ));
    }

    #[test]
    fn population_time_subtracts_periodic_trend() {
        // period-4 attractor plus exponentially relaxing offset
        let pattern = [0.0, -0.2, 0.2, 0.0];
        let recs: Vec<StepRecord> = (0..3000u64)
            .map(|t| {
                let a = pattern[(t % 4) as usize] + 0.1 * (-(t as f64) / 80.0).exp();
                let mut r = rec(t, (t % 2) as usize, vec![a, a], vec![0.0, 0.0]);
                r.attendance = a;
                r
            })
            .collect();
        let tau = population_convergence_time(&ObservableSeries::new(&recs, 2, 255))
            .unwrap()
            .unwrap();
        assert!((tau - 80.0).abs() < 4.0, "{tau}");
    }

    #[test]
    fn isotropy_axial_and_diagonal() {
        let recs: Vec<_> = (0..10)
            .map(|t| rec(t, 0, vec![0.0; 2], vec![0.0, 1.0]))
            .collect();
        assert_eq!(
            isotropy_params(&ObservableSeries::new(&recs, 2, 3)),
            Ok((1.0, 0.0))
        );
        let c: f64 = 0.3;
        let recs: Vec<_> = (0..10)
            .map(|t| rec(t, 0, vec![0.0; 2], vec![c, -c]))
            .collect();
        let (u, v) = isotropy_params(&ObservableSeries::new(&recs, 2, 3)).unwrap();
        assert_eq!(u, 0.0);
        assert!((v - 4.0 * c.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn isotropy_needs_d2() {
        let recs = attendance_only(&[0.1; 8]);
        assert!(isotropy_params(&ObservableSeries::new(&recs, 1, 3)).is_err());
    }

    #[test]
    fn step_classes() {
        assert_eq!(
            classify_step_vector(&[0.01, 0.02, 0.0, 0.01], 0.1),
            StepClass::Small
        );
        assert_eq!(
            classify_step_vector(&[0.9, 0.02, 0.01, 0.0], 0.1),
            StepClass::OneLarge
        );
        assert_eq!(
            classify_step_vector(&[0.9, -0.5, 0.01, 0.0], 0.1),
            StepClass::TwoLarge
        );
        assert_eq!(
            classify_step_vector(&[0.9, 0.5, 0.2, 0.0], 0.1),
            StepClass::ManyLarge
        );
    }

    #[test]
    fn activity_extremes() {
        let recs: Vec<_> = (0..10)
            .map(|t| rec(t, 0, vec![0.0; 2], vec![0.0; 2]))
            .collect();
        assert_eq!(activity(&ObservableSeries::new(&recs, 2, 3), 0.1), Ok(0.0));
        let recs: Vec<_> = (0..10)
            .map(|t| rec(t, 0, vec![1.0; 2], vec![0.0; 2]))
            .collect();
        assert_eq!(activity(&ObservableSeries::new(&recs, 2, 3), 0.1), Ok(1.0));
    }

    #[test]
    fn gap_split_finds_two_groups() {
        let v = [1e-6, 2e-6, 3e-6, 5.0, 6.0, 1.5e-6, 7.0];
        let g = variance_gap_split(&v, 1e-12).unwrap();
        assert_eq!(g.n_small, 4);
        assert!(g.threshold > 3e-6 && g.threshold < 5.0);
        assert!((g.small_fraction() - 4.0 / 7.0).abs() < 1e-15);
        assert!(variance_gap_split(&[1.0], 1e-12).is_none());
    }

    #[test]
    fn estimate_stderr() {
        let e = Estimate::from_values(&[1.0, 3.0]).unwrap();
        assert_eq!(e.mean, 2.0);
        assert!((e.stderr - 1.0).abs() < 1e-15);
        assert_eq!(Estimate::from_values(&[4.0]).unwrap().stderr, 0.0);
        assert!(Estimate::from_values(&[]).is_none());
    }
}
