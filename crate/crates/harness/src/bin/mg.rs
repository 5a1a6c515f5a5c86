use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use mg_core::theory::{
    critical_rho_second, quadratic_basin, solve_delta_a1, stability_coefficient, theory_sigma2,
};
use mg_harness::config::load_config;
use mg_harness::figures::{figure_job, FigureOptions};
use mg_harness::output::{ensure_dir, Cell, Metadata, Table};
use mg_harness::sweep::{
    result_rows, scale_config, scaled, sweep, SweepSpec, OBSERVABLES, RESULT_HEADER,
};
use mg_harness::{run_ensemble, HarnessError};

#[derive(Parser)]
#[command(
    name = "mg",
    version,
    about = "Minority Game simulator with diversified preferences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded ensemble from a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Divide sample count and measurement window by this factor.
        #[arg(long, default_value_t = 1)]
        scale: u32,
        /// Worker threads (0 uses every core).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a parameter sweep described by a sweep file.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        scale: u32,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Regenerate the dataset behind a figure.
    Fig {
        name: String,
        #[arg(long, default_value_t = 1)]
        scale: u32,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Evaluate the analytical solvers.
    Theory {
        op: TheoryOp,
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        /// Population used to convert step sizes into volatility.
        #[arg(long, default_value_t = 1001)]
        n_agents: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoryOp {
    /// Self-consistent step size and the resulting volatility.
    DeltaA1,
    /// Stability coefficient of the secondary direction.
    Stability,
    /// Basin boundary and small-variance probability under quadratic payoff.
    QuadraticBasin,
}

fn run(
    config: &Path,
    samples: usize,
    scale: u32,
    workers: usize,
    out: &Path,
) -> Result<(), HarnessError> {
    let started = Instant::now();
    let config = scale_config(&load_config(config)?, scale);
    let n_samples = scaled(samples, scale);
    let result = run_ensemble(&config, n_samples, workers)?;
    let dir = ensure_dir(out)?;

    let outputs: Vec<String> = OBSERVABLES.iter().map(|s| s.to_string()).collect();
    let mut summary = Table::new(RESULT_HEADER);
    for row in result_rows(&config, &result, &outputs) {
        summary.push(row.cells());
    }
    summary.write(&dir.join("run.csv"))?;

    let mut per_sample = Table::new(&[
        "sample",
        "seed",
        "sigma2_over_n",
        "activity",
        "t_state",
        "t_pop",
    ]);
    for s in &result.samples {
        let o = &s.observables;
        per_sample.push(vec![
            s.index.into(),
            Cell::Text(s.seed.to_string()),
            o.sigma2_over_n.into(),
            o.activity.into(),
            Cell::opt_real(o.t_state),
            Cell::opt_real(o.t_pop),
        ]);
    }
    per_sample.write(&dir.join("run_samples.csv"))?;

    let mut meta = Metadata::new("run", "single ensemble");
    meta.configs
        .push(serde_json::to_value(&config).expect("config serializes"));
    meta.seed_base = config.seed;
    meta.n_samples = n_samples;
    meta.scale = scale;
    meta.workers = workers;
    meta.tables = vec!["run.csv".into(), "run_samples.csv".into()];
    meta.wall_time_s = started.elapsed().as_secs_f64();
    meta.write(&dir.join("run.meta.json"))?;
    println!(
        "sigma2_over_n = {} ± {} ({} samples)",
        result.summary.sigma2_over_n.mean, result.summary.sigma2_over_n.stderr, n_samples
    );
    Ok(())
}

fn run_sweep(spec_path: &Path, scale: u32, workers: usize, out: &Path) -> Result<(), HarnessError> {
    let started = Instant::now();
    let spec = SweepSpec::load(spec_path)?;
    let table = sweep(&spec, workers, scale)?;
    let dir = ensure_dir(out)?;
    table.write(&dir.join("sweep.csv"))?;
    let mut meta = Metadata::new("sweep", &spec_path.display().to_string());
    meta.configs = spec
        .grid()?
        .iter()
        .map(|p| serde_json::to_value(scale_config(&p.config, scale)).expect("config serializes"))
        .collect();
    meta.seed_base = spec.base.seed;
    meta.n_samples = scaled(spec.n_samples, scale);
    meta.scale = scale;
    meta.workers = workers;
    meta.tables = vec!["sweep.csv".into()];
    meta.wall_time_s = started.elapsed().as_secs_f64();
    meta.write(&dir.join("sweep.meta.json"))?;
    println!(
        "{} rows written to {}",
        table.rows.len(),
        dir.join("sweep.csv").display()
    );
    Ok(())
}

fn theory(op: TheoryOp, rho: f64, n_agents: usize) -> Result<(), HarnessError> {
    if rho.is_nan() || rho < 0.0 {
        return Err(HarnessError::Usage(format!(
            "rho must be non-negative, got {rho}"
        )));
    }
    match op {
        TheoryOp::DeltaA1 => {
            let x = solve_delta_a1(rho);
            println!("delta_a1 = {x}");
            println!("sigma2_over_n = {}", theory_sigma2(x, n_agents));
        }
        TheoryOp::Stability => {
            if rho == 0.0 {
                return Err(HarnessError::Usage("stability needs rho > 0".into()));
            }
            let x = solve_delta_a1(rho);
            println!("delta_a1 = {x}");
            println!("lambda = {}", stability_coefficient(rho, x));
            println!("rho_second = {}", critical_rho_second());
        }
        TheoryOp::QuadraticBasin => {
            let b = quadratic_basin(rho);
            println!("boundary = {}", b.boundary);
            println!("p_small = {}", b.p_small);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            samples,
            scale,
            workers,
            out,
        } => run(&config, samples, scale, workers, &out),
        Command::Sweep {
            spec,
            scale,
            workers,
            out,
        } => run_sweep(&spec, scale, workers, &out),
        Command::Fig {
            name,
            scale,
            workers,
            out,
            seed,
        } => {
            let opts = FigureOptions {
                scale,
                workers,
                out_dir: out,
                seed,
            };
            figure_job(&name, &opts).map(|paths| {
                for p in paths {
                    println!("{}", p.display());
                }
            })
        }
        Command::Theory { op, rho, n_agents } => theory(op, rho, n_agents),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
