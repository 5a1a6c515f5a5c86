//! Minority Game simulator with diversified strategy preferences.
//!
//! * [`game`]: agents, strategies, scores and the online/batch update rules.
//! * [`measure`]: volatility, step-size ranking, convergence times and
//!   phase-space diagnostics over recorded trajectories.
//! * [`theory`]: the deterministic maps and solvers that predict those
//!   observables.
//!
//! ```
//! use mg_core::game::{GameConfig, GameState};
//! use mg_core::measure::{attendance_variance, ObservableSeries};
//!
//! let config = GameConfig::new(101, 1).with_rho(0.05).with_seed(7);
//! let mut game = GameState::new(&config).unwrap();
//! let records = game.run(500);
//! let series = ObservableSeries::new(&records[200..], config.signal_dim(), 101);
//! assert!(attendance_variance(&series).unwrap() >= 0.0);
//! ```

pub mod game;
pub mod measure;
pub mod theory;

pub use game::{
    ConfigError, GameConfig, GameState, PayoffKind, PrefDist, SignalMode, StepRecord,
    StrategyTable, UpdateMode,
};
pub use measure::{EnsembleSummary, Estimate, MeasureError, ObservableSeries, SampleObservables};
pub use theory::{BifurcationPoint, TheoryError, TheoryState};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/engine.md")]
    mod engine {}
    #[doc = include_str!("../../../book/src/observables.md")]
    mod observables {}
    #[doc = include_str!("../../../book/src/theory.md")]
    mod theory {}
}
