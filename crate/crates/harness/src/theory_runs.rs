//! Ensembles of analytical map iterations, measured like simulations.

use mg_core::game::{StepRecord, UpdateMode};
use mg_core::measure::{EnsembleSummary, ObservableSeries, SampleObservables};
use mg_core::theory::{bimodal_map_m1, gaussian_map_m1, TheoryError, TheoryState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ensemble::par_indexed;
use crate::error::HarnessError;
use crate::seeds::sample_seed;

/// Which `m = 1` map to iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    GaussianOnline,
    BimodalOnline,
    BimodalBatch,
}

impl MapKind {
    pub fn step(self, state: &TheoryState) -> Result<TheoryState, TheoryError> {
        match self {
            MapKind::GaussianOnline => gaussian_map_m1(state),
            MapKind::BimodalOnline => bimodal_map_m1(state, UpdateMode::Online),
            MapKind::BimodalBatch => bimodal_map_m1(state, UpdateMode::Batch),
        }
    }

    fn is_batch(self) -> bool {
        self == MapKind::BimodalBatch
    }
}

/// Settings shared by every realization of a map ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapRun {
    pub kind: MapKind,
    pub rho: f64,
    pub n_agents: usize,
    pub t_equil: u64,
    pub t_measure: u64,
    pub seed: u64,
}

/// Iterates one realization from a random start and records every step.
///
/// Batch maps do not move the signal; a uniformly drawn reporting signal is
/// recorded instead, as in the simulation.
pub fn map_records(run: &MapRun, index: usize) -> Result<Vec<StepRecord>, TheoryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(run.seed, index as u64));
    let mut state = TheoryState::random_start(run.rho, run.n_agents, 2, &mut rng);
    let steps = run.t_equil + run.t_measure;
    let mut records = Vec::with_capacity(steps as usize);
    for t in 0..steps {
        if run.kind.is_batch() {
            state.mu_star = rng.random_range(0..2);
        }
        let next = run.kind.step(&state)?;
        records.push(StepRecord {
            t,
            mu_star: state.mu_star,
            attendance: state.a_vec[state.mu_star],
            a_vec_before: state.a_vec.clone(),
            delta_a: next
                .a_vec
                .iter()
                .zip(&state.a_vec)
                .map(|(b, a)| b - a)
                .collect(),
            k_vec: next.k_vec.clone(),
        });
        state = next;
    }
    Ok(records)
}

/// Per-realization observables over the measurement window.
pub fn map_sample(run: &MapRun, index: usize) -> Result<SampleObservables, HarnessError> {
    let fail = |e: String| HarnessError::Sample { index, message: e };
    let records = map_records(run, index).map_err(|e| fail(e.to_string()))?;
    let full = ObservableSeries::new(&records, 2, run.n_agents);
    let window = full.tail(run.t_measure as usize);
    SampleObservables::measure(&full, &window, false).map_err(|e| fail(e.to_string()))
}

pub fn run_map_ensemble(
    run: &MapRun,
    n_samples: usize,
    workers: usize,
) -> Result<EnsembleSummary, HarnessError> {
    if n_samples == 0 {
        return Err(HarnessError::Usage("n_samples must be at least 1".into()));
    }
    let samples = par_indexed(n_samples, workers, |i| map_sample(run, i))?;
    Ok(EnsembleSummary::aggregate(&samples).expect("at least one sample"))
}
