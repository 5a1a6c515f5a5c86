//! Cartesian parameter sweeps.
//!
//! A sweep file holds a base configuration, a list of axes and the observables
//! to report:
//!
//! ```toml
//! n_samples = 50
//! outputs = ["sigma2_over_n", "s_ranked"]
//!
//! [base]
//! n_agents = 255
//! m = 1
//!
//! [[axes]]
//! name = "rho"
//! values = [0.05, 0.1, 0.2]
//! ```
//!
//! An axis may name any configuration field, or `alpha`, which sets `n_agents`
//! to the odd integer nearest to `D/α`.

use std::path::Path;

use mg_core::GameConfig;
use serde::Deserialize;

use crate::config::{parse_toml, read_text};
use crate::ensemble::{run_ensemble, EnsembleResult};
use crate::error::HarnessError;
use crate::output::{Cell, Table};

/// Observable names accepted in `outputs`.
pub const OBSERVABLES: &[&str] = &[
    "sigma2_over_n",
    "s_ranked",
    "u1",
    "v1",
    "activity",
    "t_state",
    "t_pop",
    "class_fractions",
    "small_fraction",
];

/// Columns of a sweep table.
pub const RESULT_HEADER: &[&str] = &[
    "n_agents",
    "s",
    "m",
    "d",
    "signal_mode",
    "update_mode",
    "payoff_kind",
    "pref_dist",
    "rho",
    "alpha",
    "t_equil",
    "t_measure",
    "seed_base",
    "observable",
    "mean",
    "stderr",
    "n_samples",
];

fn default_outputs() -> Vec<String> {
    vec!["sigma2_over_n".to_string()]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub values: Vec<toml::Value>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: GameConfig,
    #[serde(default)]
    pub axes: Vec<Axis>,
    pub n_samples: usize,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<String>,
}

/// One configuration of the grid with the axis values that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub coords: Vec<(String, toml::Value)>,
    pub config: GameConfig,
}

impl GridPoint {
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .coords
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("({})", parts.join(", "))
    }
}

/// Odd population closest to `d / alpha`, never below 1. Ties round up.
pub fn population_for_alpha(d: usize, alpha: f64) -> usize {
    let target = d as f64 / alpha;
    let lower = ((target - 1.0) / 2.0).floor().max(0.0) as usize * 2 + 1;
    if (target - lower as f64).abs() < (lower as f64 + 2.0 - target).abs() {
        lower
    } else {
        lower + 2
    }
}

fn apply(config: &GameConfig, name: &str, value: &toml::Value) -> Result<GameConfig, HarnessError> {
    let bad = |message: String| HarnessError::Usage(message);
    if name == "alpha" {
        let alpha = value
            .as_float()
            .or_else(|| value.as_integer().map(|i| i as f64))
            .filter(|a| *a > 0.0)
            .ok_or_else(|| bad(format!("alpha must be a positive number, got {value}")))?;
        let mut c = config.clone();
        c.n_agents = population_for_alpha(config.signal_dim(), alpha);
        return Ok(c);
    }
    let mut table = toml::Table::try_from(config).expect("config serializes");
    table.insert(name.to_string(), value.clone());
    table
        .try_into::<GameConfig>()
        .map_err(|e| bad(e.to_string()))
}

impl SweepSpec {
    pub fn parse(path: &Path, text: &str) -> Result<Self, HarnessError> {
        let spec: SweepSpec = parse_toml(path, text)?;
        spec.check()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::parse(path, &read_text(path)?)
    }

    fn check(&self) -> Result<(), HarnessError> {
        if self.n_samples == 0 {
            return Err(HarnessError::Usage("n_samples must be at least 1".into()));
        }
        if let Some(o) = self
            .outputs
            .iter()
            .find(|o| !OBSERVABLES.contains(&o.as_str()))
        {
            return Err(HarnessError::Usage(format!(
                "unknown observable `{o}`; expected one of {}",
                OBSERVABLES.join(", ")
            )));
        }
        self.grid().map(|_| ())
    }

    /// All grid points, first axis slowest. Every point is validated; the
    /// first invalid one is reported with its coordinates. `alpha` axes are
    /// applied after all other axes.
    pub fn grid(&self) -> Result<Vec<GridPoint>, HarnessError> {
        let mut axes: Vec<&Axis> = self.axes.iter().collect();
        axes.sort_by_key(|a| a.name == "alpha");
        let mut points = vec![Vec::<(String, toml::Value)>::new()];
        for axis in &self.axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push((axis.name.clone(), v.clone()));
                        q
                    })
                })
                .collect();
        }
        points
            .into_iter()
            .map(|coords| {
                let mut point = GridPoint {
                    coords,
                    config: self.base.clone(),
                };
                let built = axes.iter().try_for_each(|axis| {
                    let (_, v) = point
                        .coords
                        .iter()
                        .find(|(k, _)| *k == axis.name)
                        .expect("axis present");
                    point.config = apply(&point.config, &axis.name, v)?;
                    Ok::<_, HarnessError>(())
                });
                built
                    .and_then(|_| point.config.validate().map_err(HarnessError::from))
                    .map_err(|e| HarnessError::GridPoint {
                        coords: point.describe(),
                        source: Box::new(e),
                    })?;
                Ok(point)
            })
            .collect()
    }
}

/// One reported observable at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub config: GameConfig,
    pub observable: String,
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

impl ResultRow {
    pub fn cells(&self) -> Vec<Cell> {
        let c = &self.config;
        vec![
            c.n_agents.into(),
            c.s.into(),
            c.m.map_or(Cell::Empty, |m| Cell::Int(m as i64)),
            c.signal_dim().into(),
            c.signal_mode.as_str().into(),
            c.update_mode.as_str().into(),
            c.payoff_kind.as_str().into(),
            c.pref_dist.as_str().into(),
            c.rho.into(),
            c.alpha().into(),
            c.equilibration_steps().into(),
            c.t_measure.into(),
            c.seed.into(),
            self.observable.as_str().into(),
            self.mean.into(),
            self.stderr.into(),
            self.n_samples.into(),
        ]
    }
}

/// Rows for the requested observables of one ensemble. Observables that are
/// undefined for the configuration (no converged sample, `D ≠ 2` isotropy)
/// produce no row.
pub fn result_rows(
    config: &GameConfig,
    result: &EnsembleResult,
    outputs: &[String],
) -> Vec<ResultRow> {
    let s = &result.summary;
    let mut rows = Vec::new();
    let mut push = |name: String, e: Option<mg_core::Estimate>| {
        if let Some(e) = e {
            rows.push(ResultRow {
                config: config.clone(),
                observable: name,
                mean: e.mean,
                stderr: e.stderr,
                n_samples: e.n,
            });
        }
    };
    for o in outputs {
        match o.as_str() {
            "sigma2_over_n" => push(o.clone(), Some(s.sigma2_over_n)),
            "s_ranked" => {
                for (r, e) in s.s_ranked.iter().enumerate() {
                    push(format!("S{}", r + 1), *e);
                }
            }
            "u1" => push(o.clone(), s.u1),
            "v1" => push(o.clone(), s.v1),
            "activity" => push(o.clone(), Some(s.activity)),
            "t_state" => push(o.clone(), s.t_state),
            "t_pop" => push(o.clone(), s.t_pop),
            "class_fractions" => {
                for (c, e) in s.class_fractions.iter().enumerate() {
                    push(format!("class{}", c + 1), Some(*e));
                }
            }
            "small_fraction" => {
                let split = result.variance_split();
                let n = result.samples.len();
                let p = split.map_or(0.0, |g| g.small_fraction());
                push(
                    o.clone(),
                    Some(mg_core::Estimate {
                        mean: p,
                        stderr: (p * (1.0 - p) / n as f64).sqrt(),
                        n,
                    }),
                );
            }
            other => unreachable!("unchecked observable {other}"),
        }
    }
    rows
}

/// Runs every grid point and collects the result table.
pub fn sweep(spec: &SweepSpec, workers: usize, scale: u32) -> Result<Table, HarnessError> {
    let points = spec.grid()?;
    let n_samples = scaled(spec.n_samples, scale);
    let mut table = Table::new(RESULT_HEADER);
    for point in points {
        let config = scale_config(&point.config, scale);
        let result = run_ensemble(&config, n_samples, workers)?;
        for row in result_rows(&config, &result, &spec.outputs) {
            table.push(row.cells());
        }
    }
    Ok(table)
}

/// `n / scale`, at least 1.
pub fn scaled(n: usize, scale: u32) -> usize {
    (n / scale.max(1) as usize).max(1)
}

/// Divides the measurement window by `scale`. The population is never changed.
pub fn scale_config(config: &GameConfig, scale: u32) -> GameConfig {
    let mut c = config.clone();
    c.t_measure = (c.t_measure / scale.max(1) as u64).max(1);
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = r#"
n_samples = 4
outputs = ["sigma2_over_n", "s_ranked"]

[base]
n_agents = 31
m = 1
t_equil = 20
t_measure = 100

[[axes]]
name = "rho"
values = [0.01, 0.5]

[[axes]]
name = "payoff_kind"
values = ["linear", "step"]
"#;

    #[test]
    fn grid_is_cartesian_first_axis_slowest() {
        let spec = SweepSpec::parse(Path::new("s.toml"), SPEC).unwrap();
        let g = spec.grid().unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g[0].config.rho, 0.01);
        assert_eq!(g[1].config.rho, 0.01);
        assert_eq!(g[1].config.payoff_kind, mg_core::PayoffKind::Step);
        assert_eq!(g[2].config.rho, 0.5);
    }

    #[test]
    fn invalid_point_reports_coordinates() {
        let text = SPEC.replace("values = [0.01, 0.5]", "values = [0.01, -0.5]");
        let e = SweepSpec::parse(Path::new("s.toml"), &text).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("rho=-0.5"), "{e}");
    }

    #[test]
    fn unknown_axis_or_output_rejected() {
        let text = SPEC.replace("name = \"rho\"", "name = \"temperature\"");
        assert_eq!(
            SweepSpec::parse(Path::new("s.toml"), &text)
                .unwrap_err()
                .exit_code(),
            2
        );
        let text = SPEC.replace("\"s_ranked\"", "\"entropy\"");
        assert_eq!(
            SweepSpec::parse(Path::new("s.toml"), &text)
                .unwrap_err()
                .exit_code(),
            2
        );
    }

    #[test]
    fn alpha_axis_sets_odd_population() {
        assert_eq!(population_for_alpha(2, 0.016), 125);
        assert_eq!(population_for_alpha(2, 0.032), 63);
        assert_eq!(population_for_alpha(2, 0.002), 1001);
        assert_eq!(population_for_alpha(16, 0.016), 1001);
        assert_eq!(population_for_alpha(4, 10.0), 1);
        let text = SPEC
            .replace("name = \"rho\"", "name = \"alpha\"")
            .replace("[0.01, 0.5]", "[0.016]");
        let spec = SweepSpec::parse(Path::new("s.toml"), &text).unwrap();
        assert_eq!(spec.grid().unwrap()[0].config.n_agents, 125);
    }

    #[test]
    fn rows_per_point_and_observable() {
        let spec = SweepSpec::parse(Path::new("s.toml"), SPEC).unwrap();
        let t = sweep(&spec, 2, 1).unwrap();
        // sigma2 + S1 + S2 at each of four points
        assert_eq!(t.rows.len(), 12);
        assert!(t.rows.iter().all(|r| match r[15] {
            Cell::Real(x) => x >= 0.0,
            _ => false,
        }));
    }

    #[test]
    fn scale_shrinks_samples_and_window_only() {
        let c = GameConfig::new(255, 1).with_windows(100, 2000);
        let s = scale_config(&c, 4);
        assert_eq!(s.t_measure, 500);
        assert_eq!(s.n_agents, 255);
        assert_eq!(scaled(10, 4), 2);
        assert_eq!(scaled(3, 4), 1);
    }
}
