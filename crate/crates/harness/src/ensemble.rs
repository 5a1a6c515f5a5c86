//! Seeded ensembles of independent games on a worker pool.

use std::panic::{self, AssertUnwindSafe};

use mg_core::game::{GameConfig, GameState, SignalMode, StepRecord, UpdateMode};
use mg_core::measure::{
    variance_gap_split, EnsembleSummary, GapSplit, ObservableSeries, SampleObservables,
};
use rayon::prelude::*;

use crate::error::HarnessError;
use crate::seeds::sample_seed;

/// Floor applied to sample variances before splitting them on a log scale.
pub const GAP_FLOOR: f64 = 1e-12;

/// Observables of one game plus its starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub index: usize,
    pub seed: u64,
    pub observables: SampleObservables,
    /// `√N·A^μ` before the first step.
    pub initial_positions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub summary: EnsembleSummary,
    /// Per-sample results in index order.
    pub samples: Vec<SampleResult>,
}

impl EnsembleResult {
    /// Largest-log-gap split of the per-sample `σ²/N`.
    pub fn variance_split(&self) -> Option<GapSplit> {
        let v: Vec<f64> = self
            .samples
            .iter()
            .map(|s| s.observables.sigma2_over_n)
            .collect();
        variance_gap_split(&v, GAP_FLOOR)
    }
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic".to_string()
    }
}

/// Evaluates `f(0..n)` on `workers` threads (0 picks the rayon default) and
/// returns the results in index order. The first failure in index order wins.
pub fn par_indexed<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>, HarnessError>
where
    T: Send,
    F: Fn(usize) -> Result<T, HarnessError> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Runtime(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<T, HarnessError>> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                panic::catch_unwind(AssertUnwindSafe(|| f(i))).unwrap_or_else(|p| {
                    Err(HarnessError::Sample {
                        index: i,
                        message: panic_message(p),
                    })
                })
            })
            .collect()
    });
    results.into_iter().collect()
}

/// Whether convergence times are defined for this configuration.
pub fn tracks_convergence(config: &GameConfig) -> bool {
    config.signal_mode == SignalMode::Endogenous
        && config.update_mode == UpdateMode::Online
        && config.signal_dim() == 2
}

/// Plays sample `index` of the ensemble seeded by `config.seed`.
pub fn run_sample(config: &GameConfig, index: usize) -> Result<SampleResult, HarnessError> {
    let seed = sample_seed(config.seed, index as u64);
    let cfg = config.clone().with_seed(seed);
    let mut game = GameState::new(&cfg)?;
    let sqrt_n = (cfg.n_agents as f64).sqrt();
    let initial_positions = game.demand_vector().iter().map(|a| a * sqrt_n).collect();
    let records = game.run(cfg.total_steps());
    let full = ObservableSeries::new(&records, cfg.signal_dim(), cfg.n_agents);
    let window = full.tail(cfg.t_measure as usize);
    let observables = SampleObservables::measure(&full, &window, tracks_convergence(&cfg))
        .map_err(|e| HarnessError::Sample {
            index,
            message: e.to_string(),
        })?;
    Ok(SampleResult {
        index,
        seed,
        observables,
        initial_positions,
    })
}

/// Full step history of sample `index`, equilibration included.
pub fn trace(config: &GameConfig, index: usize) -> Result<Vec<StepRecord>, HarnessError> {
    config.validate()?;
    let cfg = config
        .clone()
        .with_seed(sample_seed(config.seed, index as u64));
    let mut game = GameState::new(&cfg)?;
    Ok(game.run(cfg.total_steps()))
}

/// Runs `n_samples` games with seeds derived from `config.seed` and the sample
/// index. The result does not depend on `workers`.
pub fn run_ensemble(
    config: &GameConfig,
    n_samples: usize,
    workers: usize,
) -> Result<EnsembleResult, HarnessError> {
    config.validate()?;
    if n_samples == 0 {
        return Err(HarnessError::Usage("n_samples must be at least 1".into()));
    }
    let samples = par_indexed(n_samples, workers, |i| run_sample(config, i))?;
    let obs: Vec<SampleObservables> = samples.iter().map(|s| s.observables.clone()).collect();
    let summary = EnsembleSummary::aggregate(&obs).expect("at least one sample");
    Ok(EnsembleResult { summary, samples })
}
