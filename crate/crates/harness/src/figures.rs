//! Dataset jobs that regenerate each figure's curves.
//!
//! Every job writes one or more tables plus a `<name>.meta.json` sidecar into
//! the output directory. `scale` divides sample counts and measurement windows;
//! populations are never changed.

use std::path::PathBuf;
use std::time::Instant;

use mg_core::game::{GameConfig, PayoffKind, PrefDist, StepRecord, UpdateMode};
use mg_core::measure::{Estimate, GapSplit};
use mg_core::theory::{quadratic_basin, solve_delta_a1, theory_sigma2};

use crate::ensemble::{run_ensemble, trace, EnsembleResult};
use crate::error::HarnessError;
use crate::output::{ensure_dir, Cell, Metadata, Table};
use crate::sweep::{scale_config, scaled};
use crate::theory_runs::{run_map_ensemble, MapKind, MapRun};

/// Job names accepted by [`figure_job`].
pub const FIGURES: &[&str] = &[
    "fig1", "fig2", "fig4", "fig5", "fig6a", "fig6b", "fig7", "fig8", "fig10", "fig11", "fig12",
    "fig13", "fig14", "fig15",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FigureOptions {
    pub scale: u32,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            scale: 1,
            workers: 0,
            out_dir: PathBuf::from("out"),
            seed: 1,
        }
    }
}

/// Logarithmic grid `10^(lo/per), …, 10^(hi/per)`.
pub fn log_grid(lo: i32, hi: i32, per: i32) -> Vec<f64> {
    (lo..=hi)
        .map(|k| 10f64.powf(k as f64 / per as f64))
        .collect()
}

const RHO_LINEAR: &[f64] = &[
    0.001, 0.002, 0.005, 0.01, 0.02, 0.03, 0.05, 0.07, 0.1, 0.13, 0.16, 0.2, 0.3, 0.5, 1.0, 2.0,
    5.0, 10.0,
];

const RHO_QUADRATIC: &[f64] = &[0.004, 0.008, 0.016, 0.032, 0.063, 0.126, 0.251, 0.501, 1.0];

struct Job<'a> {
    opts: &'a FigureOptions,
    meta: Metadata,
    tables: Vec<(String, Table)>,
    started: Instant,
}

impl<'a> Job<'a> {
    fn new(name: &str, description: &str, opts: &'a FigureOptions, base_samples: usize) -> Self {
        let mut meta = Metadata::new(name, description);
        meta.seed_base = opts.seed;
        meta.scale = opts.scale;
        meta.workers = opts.workers;
        meta.n_samples = scaled(base_samples, opts.scale);
        Job {
            opts,
            meta,
            tables: Vec::new(),
            started: Instant::now(),
        }
    }

    fn samples(&self) -> usize {
        self.meta.n_samples
    }

    fn config(&mut self, c: GameConfig) -> GameConfig {
        let c = scale_config(&c.with_seed(self.opts.seed), self.opts.scale);
        self.meta
            .configs
            .push(serde_json::to_value(&c).expect("config serializes"));
        c
    }

    fn ensemble(&mut self, c: GameConfig) -> Result<(GameConfig, EnsembleResult), HarnessError> {
        let c = self.config(c);
        let r = run_ensemble(&c, self.samples(), self.opts.workers)?;
        Ok((c, r))
    }

    fn map_ensemble(
        &self,
        kind: MapKind,
        c: &GameConfig,
    ) -> Result<mg_core::EnsembleSummary, HarnessError> {
        let run = MapRun {
            kind,
            rho: c.rho,
            n_agents: c.n_agents,
            t_equil: c.equilibration_steps(),
            t_measure: c.t_measure,
            seed: c.seed,
        };
        run_map_ensemble(&run, self.samples(), self.opts.workers)
    }

    fn trace(&mut self, c: GameConfig) -> Result<Vec<StepRecord>, HarnessError> {
        let c = self.config(c);
        trace(&c, 0)
    }

    fn table(&mut self, suffix: &str, table: Table) {
        let name = format!("{}{suffix}.csv", self.meta.job);
        self.tables.push((name, table));
    }

    fn finish(mut self) -> Result<Vec<PathBuf>, HarnessError> {
        let dir = ensure_dir(&self.opts.out_dir)?;
        let mut written = Vec::new();
        for (name, table) in &self.tables {
            let path = dir.join(name);
            table.write(&path)?;
            self.meta.tables.push(name.clone());
            written.push(path);
        }
        self.meta.wall_time_s = self.started.elapsed().as_secs_f64();
        let meta_path = dir.join(format!("{}.meta.json", self.meta.job));
        self.meta.write(&meta_path)?;
        written.push(meta_path);
        Ok(written)
    }
}

fn est(e: Estimate) -> [Cell; 2] {
    [e.mean.into(), e.stderr.into()]
}

fn opt_est(e: Option<Estimate>) -> [Cell; 2] {
    match e {
        Some(e) => est(e),
        None => [Cell::Empty, Cell::Empty],
    }
}

fn rank_cells(s: &[Option<Estimate>]) -> Vec<Cell> {
    s.iter()
        .map(|e| Cell::opt_real(e.map(|e| e.mean)))
        .collect()
}

fn split_of(r: &EnsembleResult) -> Option<GapSplit> {
    r.variance_split()
}

/// Runs the named job and returns the paths it wrote.
pub fn figure_job(name: &str, opts: &FigureOptions) -> Result<Vec<PathBuf>, HarnessError> {
    match name {
        "fig1" => fig1(opts),
        "fig2" => fig2(opts),
        "fig4" => fig4(opts),
        "fig5" => fig5(opts),
        "fig6a" => fig6(opts, "fig6a", 2),
        "fig6b" => fig6(opts, "fig6b", 3),
        "fig7" => fig7(opts),
        "fig8" => fig8(opts),
        "fig10" => fig10(opts),
        "fig11" => fig11(opts),
        "fig12" => fig12(opts),
        "fig13" => fig13(opts),
        "fig14" => fig14(opts),
        "fig15" => fig15(opts),
        other => Err(HarnessError::Usage(format!(
            "unknown figure `{other}`; available: {}",
            FIGURES.join(", ")
        ))),
    }
}

fn fig1(opts: &FigureOptions) -> Result<Vec<PathBuf>, HarnessError> {
    let mut job = Job::new(
        "fig1",
        "volatility against complexity, linear and step payoffs",
        opts,
        1000,
    );
    let mut t = Table::new(&[
        "payoff_kind",
        "rho",
        "m",
        "alpha",
        "sigma2_over_n",
        "stderr",
    ]);
    for payoff in [PayoffKind::Linear, PayoffKind::Step] {
        for rho in [0.0, 0.25, 1.0, 4.0] {
            for m in 1..=9 {
                let (c, r) =
                    job.ensemble(GameConfig::new(251, m).with_rho(rho).with_payoff(payoff))?;
                let [mean, se] = est(r.summary.sigma2_over_n);
                t.push(vec![
                    payoff.as_str().into(),
                    rho.into(),
                    (m as usize).into(),
                    c.alpha().into(),
                    mean,
                    se,
                ]);
            }
        }
    }
    job.table("", t);
    job.finish()
}

fn fig2(opts: &FigureOptions) -> Result<Vec<PathBuf>, HarnessError> {
    let mut job = Job::new(
        "fig2",
        "volatility against diversity, linear and step payoffs",
        opts,
        1000,
    );
    let mut t = Table::new(&[
        "payoff_kind",
        "m",
        "n_agents",
        "alpha",
        "rho",
        "sigma2_over_n",
        "stderr",
    ]);
    let linear = [(1, 1001), (2, 401), (3, 401), (1, 255), (1, 1023)];
    let step = [(1, 127), (1, 511), (1, 2047)];
    let series = linear
        .iter()
        .map(|p| (PayoffKind::Linear, *p, RHO_LINEAR.to_vec()))
        .chain(
            step.iter()
                .map(|p| (PayoffKind::Step, *p, log_grid(-4, 4, 2))),
        );
    for (payoff, (m, n), grid) in series {
        for rho in grid {
            let (c, r) = job.ensemble(GameConfig::new(n, m).with_rho(rho).with_payoff(payoff))?;
            let [mean, se] = est(r.summary.sigma2_over_n);
            t.push(vec![
                payoff.as_str().into(),
                (m as usize).into(),
                n.into(),
                c.alpha().into(),
                rho.into(),
                mean,
                se,
            ]);
        }
    }
    job.table("", t);
    job.finish()
}

fn fig4(opts: &FigureOptions) -> Result<Vec<PathBuf>, HarnessError> {
    let mut job = Job::new(
        "fig4",
        "state and population convergence times against diversity",
        opts,
        1000,
    );
    let mut t = Table::new(&[
        "rho",
        "t_state",
        "t_state_stderr",
        "t_state_n",
        "t_pop",
        "t_pop_stderr",
        "t_pop_n",
    ]);
    for rho in log_grid(-10, 5, 5) {
        let (_, r) = job.ensemble(GameConfig::new(255, 1).with_rho(rho))?;
        let s = &r.summary;
        let n = |e: Option<Estimate>| Cell::from(e.map_or(0, |e| e.n));
        let [ts, tse] = opt_est(s.t_state);
        let [tp, tpe] = opt_est(s.t_pop);
        t.push(vec![rho.into(), ts, tse, n(s.t_state), tp, tpe, n(s.t_pop)]);
    }
    job.table("", t);
    let rho = 10f64.powf(0.9);
    let recs = job.trace(GameConfig::new(255, 1).with_rho(rho))?;
    let mean = recs.iter().map(|r| r.attendance).sum::<f64>() / recs.len() as f64;
    let mut inset = Table::new(&["rho", "t", "a_minus_mean"]);
    for r in &recs {
        inset.push(vec![rho.into(), r.t.into(), (r.attendance - mean).into()]);
    }
    job.table("_inset", inset);
    job.finish()
}

fn fig5(opts: &FigureOptions) -> Result<Vec<PathBuf>, HarnessError> {
    let mut job = Job::new(
        "fig5",
        "ranked step sizes for m = 1 with map theory",
        opts,
        1000,
    );
    let mut t = Table::new(&[
        "rho",
        "S1",
        "S2",
        "sigma2_over_n",
        "sigma2_stderr",
        "theory_S1",
        "theory_S2",
        "theory_sigma2_over_n",
        "closed_form_sigma2_over_n",
    ]);
    for &rho in RHO_LINEAR {
        let (c, r) = job.ensemble(GameConfig::new(1001, 1).with_rho(rho))?;
        let th = job.map_ensemble(MapKind::GaussianOnline, &c)?;
        let mut row = rank_cells(&r.summary.s_ranked);
        row.insert(0, rho.into());
        row.extend(est(r.summary.sigma2_over_n));
        row.extend(rank_cells(&th.s_ranked));
        row.push(th.sigma2_over_n.mean.into());
        row.push(theory_sigma2(solve_delta_a1(rho), c.n_agents).into());
        t.push(row);
    }
    job.table("", t);
    job.finish()
}

fn fig6(opts: &FigureOptions, name: &str, m: u32) -> Result<Vec<PathBuf>, HarnessError> {
    let mut job = Job::new(name, "ranked step sizes against diversity", opts, 1000);
    let d = 1usize << m;
    let mut header = vec!["rho".to_string()];
    header.extend((1..=d).map(|r| format!("S{r}")));
    header.push("sigma2_over_n".into());
    let mut t = Table::new(&header);
    for &rho in RHO_LINEAR {
        let (_, r) = job.ensemble(GameConfig::new(1001, m).with_rho(rho))?;
        let mut row = vec![rho.into()];
        row.extend(rank_cells(&r.summary.s_ranked));
        row.push(r.summary.sigma2_over_n.mean.into());
        t.push(row);
    }
    job.table("", t);
    job.finish()
}

fn fig7(opts: &FigureOptions) -> Result<Vec<PathBuf>, HarnessError> {
    let mut job = Job::new("fig7", "batch against online volatility", opts, 1000);
    let mut t = Table::new(&[
        "m",
        "rho",
        "online",
        "online_stderr",
        "batch",
        "batch_stderr",
    ]);
    for m in [1, 4] {
        for &rho in RHO_LINEAR {
            let mut row = vec![(m as usize).into(), rho.into()];
            for mode in [UpdateMode::Online, UpdateMode::Batch] {
                let (_, r) =
                    job.ensemble(GameConfig::new(1001, m).with_rho(rho).with_update(mode))?;
                row.extend(est(r.summary.sigma2_over_n));
            }
            t.push(row);
        }
    }
    job.table("", t);
    job.finish()
}

fn bimodal_batch(n: usize, m: u32, rho: f64) -> GameConfig {
    GameConfig::new(n, m)
        .with_rho(rho)
        .with_update(UpdateMode::Batch)
        .with_preferences(PrefDist::Bimodal)
}

fn fig8(opts: &FigureOptions) -> Result<Vec<PathBuf>, HarnessError> {
    let mut job = Job::new(
        "fig8",
        "axial and diagonal isotropy, bimodal batch, with map theory",
        opts,
        1000,
    );
    let mut t = Table::new(&[
        "rho",
        "u1",
        "u1_stderr",
        "v1",
        "v1_stderr",
        "theory_u1",
        "theory_v1",
    ]);
    for rho in log_grid(-10, 0, 5) {
        let (c, r) = job.ensemble(bimodal_batch(1001, 1, rho))?;
        let th = job.map_ensemble(MapKind::BimodalBatch, &c)?;
        let mut row = vec![rho.into()];
        row.extend(opt_est(r.summary.u1));
        row.extend(opt_est(r.summary.v1));
        row.push(Cell::opt_real(th.u1.map(|e| e.mean)));
        row.push(Cell::opt_real(th.v1.map(|e| e.mean)));
        t.push(row);
    }
    job.table("", t);
    job.finish()
}

fn fig10(opts: &FigureOptions) -> Result<Vec<PathBuf>, HarnessError> {
    let mut job = Job::new(
        "fig10",
        "step-size classes for m = 3 and m = 1 attractors, batch",
        opts,
        200,
    );
    let mut t = Table::new(&["rho", "class1", "class2", "class3", "class4"]);
    for rho in log_grid(-8, 0, 4) {
        let (_, r) = job.ensemble(bimodal_batch(1001, 3, rho))?;
        let mut row = vec![rho.into()];
        row.extend(r.summary.class_fractions.iter().map(|e| Cell::from(e.mean)));
        t.push(row);
    }
    job.table("", t);

    let mut att = Table::new(&["source", "pref_dist", "rho", "t", "a0", "a1"]);
    let panels = [
        (PrefDist::Gaussian, 0.01),
        (PrefDist::Bimodal, 0.004),
        (PrefDist::Bimodal, 0.04),
    ];
    for (dist, rho) in panels {
        let c = bimodal_batch(1001, 1, rho).with_preferences(dist);
        let recs = job.trace(c.clone())?;
        let skip = recs.len().saturating_sub(c.t_measure as usize);
        for r in &recs[skip..] {
            att.push(vec![
                "sim".into(),
                dist.as_str().into(),
                rho.into(),
                r.t.into(),
                r.a_vec_before[0].into(),
                r.a_vec_before[1].into(),
            ]);
        }
        if dist == PrefDist::Bimodal {
            let run = MapRun {
                kind: MapKind::BimodalBatch,
                rho,
                n_agents: c.n_agents,
                t_equil: c.equilibration_steps(),
                t_measure: c.t_measure,
                seed: opts.seed,
            };
            let recs =
                crate::theory_runs::map_records(&run, 0).map_err(|e| HarnessError::Sample {
                    index: 0,
                    message: e.to_string(),
                })?;
            for r in &recs[skip.min(recs.len())..] {
                att.push(vec![
                    "theory".into(),
                    dist.as_str().into(),
                    rho.into(),
                    r.t.into(),
                    r.a_vec_before[0].into(),
                    r.a_vec_before[1].into(),
                ]);
            }
        }
    }
    job.table("_attractors", att);
    job.finish()
}

/// Configurations of the activity curves: complexity `α = D/N` at `N = 1001`.
pub const ACTIVITY_SERIES: &[(f64, u32)] = &[(0.016, 4), (0.032, 5)];

fn fig11(opts: &FigureOptions) -> Result<Vec<PathBuf>, HarnessError> {
    let mut job = Job::new(
        "fig11",
        "activity against diversity, bimodal batch",
        opts,
        200,
    );
    let mut t = Table::new(&["alpha", "m", "n_agents", "rho", "activity", "stderr"]);
    for &(alpha, m) in ACTIVITY_SERIES {
        for rho in log_grid(-8, 0, 4) {
            let (c, r) = job.ensemble(bimodal_batch(1001, m, rho))?;
            let [a, se] = est(r.summary.activity);
            t.push(vec![
                alpha.into(),
                (m as usize).into(),
                c.n_agents.into(),
                rho.into(),
                a,
                se,
            ]);
        }
    }
    job.table("", t);
    job.finish()
}

fn fig12(opts: &FigureOptions) -> Result<Vec<PathBuf>, HarnessError> {
    let mut job = Job::new(
        "fig12",
        "payoff components of one sample, bimodal batch",
        opts,
        1,
    );
    let mut t = Table::new(&["rho", "t", "k0", "k1"]);
    for rho in [0.01, 0.4] {
        for r in job.trace(bimodal_batch(1001, 1, rho))? {
            t.push(vec![
                rho.into(),
                r.t.into(),
                r.k_vec[0].into(),
                r.k_vec[1].into(),
            ]);
        }
    }
    job.table("", t);
    job.finish()
}

fn quadratic(n: usize, m: u32, rho: f64) -> GameConfig {
    GameConfig::new(n, m)
        .with_rho(rho)
        .with_payoff(PayoffKind::Quadratic)
}

fn fig13(opts: &FigureOptions) -> Result<Vec<PathBuf>, HarnessError> {
    let mut job = Job::new(
        "fig13",
        "sorted sample variances under quadratic payoff",
        opts,
        1000,
    );
    let mut sorted = Table::new(&["rho", "rank", "sigma2_over_n"]);
    for rho in [0.004, 0.008, 0.032, 1.0] {
        let (_, r) = job.ensemble(quadratic(255, 1, rho))?;
        let mut v: Vec<f64> = r
            .samples
            .iter()
            .map(|s| s.observables.sigma2_over_n)
            .collect();
        v.sort_by(f64::total_cmp);
        for (i, x) in v.into_iter().enumerate() {
            sorted.push(vec![rho.into(), (i + 1).into(), x.into()]);
        }
    }
    job.table("", sorted);
    let mut mean = Table::new(&["m", "rho", "sigma2_over_n", "stderr", "small_fraction"]);
    for m in [1, 2] {
        for &rho in RHO_QUADRATIC {
            let (_, r) = job.ensemble(quadratic(255, m, rho))?;
            let mut row = vec![(m as usize).into(), rho.into()];
            row.extend(est(r.summary.sigma2_over_n));
            row.push(Cell::opt_real(split_of(&r).map(|g| g.small_fraction())));
            mean.push(row);
        }
    }
    job.table("_mean", mean);
    job.finish()
}

fn fig14(opts: &FigureOptions) -> Result<Vec<PathBuf>, HarnessError> {
    let mut job = Job::new(
        "fig14",
        "initial positions against variance class, quadratic payoff",
        opts,
        1000,
    );
    let mut t = Table::new(&[
        "rho",
        "sample",
        "x0",
        "x1",
        "sigma2_over_n",
        "small",
        "boundary",
    ]);
    for rho in [0.004, 0.063, 0.251, 0.501] {
        let (_, r) = job.ensemble(quadratic(255, 1, rho))?;
        let threshold = split_of(&r).map_or(f64::INFINITY, |g| g.threshold);
        let boundary = quadratic_basin(rho).boundary;
        for s in &r.samples {
            let v = s.observables.sigma2_over_n;
            t.push(vec![
                rho.into(),
                s.index.into(),
                s.initial_positions[0].into(),
                s.initial_positions[1].into(),
                v.into(),
                Cell::Int((v < threshold) as i64),
                boundary.into(),
            ]);
        }
    }
    job.table("", t);
    job.finish()
}

/// Fraction of small-variance samples in an ensemble, split at the largest
/// log-gap.
pub fn small_fraction(r: &EnsembleResult) -> f64 {
    split_of(r).map_or(0.0, |g| g.small_fraction())
}

fn fig15(opts: &FigureOptions) -> Result<Vec<PathBuf>, HarnessError> {
    let mut job = Job::new(
        "fig15",
        "small-variance probability, theory against simulation",
        opts,
        1000,
    );
    let mut t = Table::new(&["rho", "p_small_theory", "p_small_sim", "n_samples"]);
    for &rho in RHO_QUADRATIC {
        let (_, r) = job.ensemble(quadratic(255, 1, rho))?;
        t.push(vec![
            rho.into(),
            quadratic_basin(rho).p_small.into(),
            small_fraction(&r).into(),
            r.samples.len().into(),
        ]);
    }
    job.table("", t);
    job.finish()
}
