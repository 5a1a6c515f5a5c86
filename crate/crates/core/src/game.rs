//! The game engine: strategy tables, preference biases, payoff evaluation and
//! the online and batch score dynamics.
//!
//! A [`GameState`] owns one sample of the game. Everything random about the
//! sample (strategy tables, biases, the initial history, tie-breaks and
//! exogenous signals) is drawn from a single ChaCha stream seeded from
//! [`GameConfig::seed`], so a `(config, seed)` pair fully determines the
//! stream of [`StepRecord`]s.
//!
//! The excess demand is kept as integer numerators `N·A^μ`, which makes the
//! odd-numerator property of an odd population exact rather than approximate.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest memory accepted for endogenous signals (`D = 2^m`).
pub const MAX_MEMORY: u32 = 16;

/// Default measurement window when a configuration does not set one.
pub const DEFAULT_MEASURE_STEPS: u64 = 2000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("population size must be odd, got {0}")]
    EvenPopulation(usize),
    #[error("each agent needs at least one strategy")]
    NoStrategies,
    #[error("diversity must be finite and non-negative, got {0}")]
    InvalidDiversity(f64),
    #[error("measurement window must contain at least one step")]
    EmptyMeasurement,
    #[error("endogenous signals need a memory `m`")]
    MissingMemory,
    #[error("exogenous signals need a dimension `d` or a memory `m`")]
    MissingDimension,
    #[error("memory m={m} implies D={implied}, but d={d} was given")]
    DimensionMismatch { m: u32, implied: usize, d: usize },
    #[error("signal dimension must be at least 1")]
    ZeroDimension,
    #[error("memory m={0} exceeds the supported maximum of {MAX_MEMORY}")]
    MemoryTooLarge(u32),
    #[error("table shape mismatch: expected {expected} entries, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("strategy entries must be +1 or -1")]
    InvalidDecision,
    #[error("first-strategy bias of agent {0} must be zero")]
    NonZeroFirstBias(usize),
    #[error("unknown {kind} `{value}`")]
    UnknownVariant { kind: &'static str, value: String },
}

macro_rules! lowercase_enum {
    ($(#[$meta:meta])* $name:ident, $kind:literal, { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "lowercase")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = ConfigError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(ConfigError::UnknownVariant {
                        kind: $kind,
                        value: other.to_string(),
                    }),
                }
            }
        }
    };
}

lowercase_enum!(
    /// Where the signal `μ*(t)` comes from.
    SignalMode, "signal mode", { Endogenous => "endogenous", Exogenous => "exogenous" }
);
lowercase_enum!(
    /// Whether scores are credited for the current signal only or for all signals.
    UpdateMode, "update mode", { Online => "online", Batch => "batch" }
);
lowercase_enum!(
    /// Payoff function applied to the scaled excess demand `√N·A`.
    PayoffKind, "payoff kind", { Step => "step", Linear => "linear", Quadratic => "quadratic" }
);
lowercase_enum!(
    /// Distribution of the initial strategy preferences.
    PrefDist, "preference distribution", { Gaussian => "gaussian", Bimodal => "bimodal" }
);

fn default_s() -> usize {
    2
}

fn default_t_measure() -> u64 {
    DEFAULT_MEASURE_STEPS
}

/// Complete, immutable description of one experiment.
///
/// Either `m` or `d` fixes the signal dimension. Endogenous signals require
/// `m` (and `D = 2^m`); exogenous signals accept either.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub n_agents: usize,
    #[serde(default = "default_s")]
    pub s: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default = "SignalMode::default_mode")]
    pub signal_mode: SignalMode,
    #[serde(default = "UpdateMode::default_mode")]
    pub update_mode: UpdateMode,
    #[serde(default = "PayoffKind::default_kind")]
    pub payoff_kind: PayoffKind,
    #[serde(default = "PrefDist::default_dist")]
    pub pref_dist: PrefDist,
    #[serde(default)]
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_equil: Option<u64>,
    #[serde(default = "default_t_measure")]
    pub t_measure: u64,
    #[serde(default)]
    pub seed: u64,
}

impl SignalMode {
    fn default_mode() -> Self {
        SignalMode::Endogenous
    }
}

impl UpdateMode {
    fn default_mode() -> Self {
        UpdateMode::Online
    }
}

impl PayoffKind {
    fn default_kind() -> Self {
        PayoffKind::Linear
    }
}

impl PrefDist {
    fn default_dist() -> Self {
        PrefDist::Gaussian
    }
}

impl GameConfig {
    /// Endogenous, online, linear-payoff, Gaussian-preference game with `s = 2`
    /// and zero diversity.
    pub fn new(n_agents: usize, m: u32) -> Self {
        GameConfig {
            n_agents,
            s: default_s(),
            m: Some(m),
            d: None,
            signal_mode: SignalMode::Endogenous,
            update_mode: UpdateMode::Online,
            payoff_kind: PayoffKind::Linear,
            pref_dist: PrefDist::Gaussian,
            rho: 0.0,
            t_equil: None,
            t_measure: DEFAULT_MEASURE_STEPS,
            seed: 0,
        }
    }

    /// Exogenous game with `d` uniformly drawn signals.
    pub fn exogenous(n_agents: usize, d: usize) -> Self {
        GameConfig {
            m: None,
            d: Some(d),
            signal_mode: SignalMode::Exogenous,
            ..GameConfig::new(n_agents, 0)
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_strategies(mut self, s: usize) -> Self {
        self.s = s;
        self
    }

    pub fn with_payoff(mut self, kind: PayoffKind) -> Self {
        self.payoff_kind = kind;
        self
    }

    pub fn with_preferences(mut self, dist: PrefDist) -> Self {
        self.pref_dist = dist;
        self
    }

    pub fn with_update(mut self, mode: UpdateMode) -> Self {
        self.update_mode = mode;
        self
    }

    pub fn with_signal(mut self, mode: SignalMode) -> Self {
        self.signal_mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_windows(mut self, t_equil: u64, t_measure: u64) -> Self {
        self.t_equil = Some(t_equil);
        self.t_measure = t_measure;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_agents.is_multiple_of(2) {
            return Err(ConfigError::EvenPopulation(self.n_agents));
        }
        if self.s == 0 {
            return Err(ConfigError::NoStrategies);
        }
        if !self.rho.is_finite() || self.rho < 0.0 {
            return Err(ConfigError::InvalidDiversity(self.rho));
        }
        if self.t_measure == 0 {
            return Err(ConfigError::EmptyMeasurement);
        }
        if let Some(m) = self.m {
            if m > MAX_MEMORY {
                return Err(ConfigError::MemoryTooLarge(m));
            }
        }
        match (self.signal_mode, self.m, self.d) {
            (SignalMode::Endogenous, None, _) => Err(ConfigError::MissingMemory),
            (_, Some(m), Some(d)) if d != 1usize << m => Err(ConfigError::DimensionMismatch {
                m,
                implied: 1usize << m,
                d,
            }),
            (SignalMode::Exogenous, None, None) => Err(ConfigError::MissingDimension),
            (_, None, Some(0)) => Err(ConfigError::ZeroDimension),
            _ => Ok(()),
        }
    }

    /// Signal dimension `D`.
    pub fn signal_dim(&self) -> usize {
        match (self.m, self.d) {
            (Some(m), _) => 1usize << m,
            (None, Some(d)) => d,
            (None, None) => 0,
        }
    }

    /// Complexity `α = D/N`.
    pub fn alpha(&self) -> f64 {
        self.signal_dim() as f64 / self.n_agents as f64
    }

    /// Variance `R = ρN` of the preference distribution.
    pub fn bias_variance(&self) -> f64 {
        self.rho * self.n_agents as f64
    }

    /// Transient steps discarded before measuring. Defaults to
    /// `20·√(ρN+1) + 200`, since convergence times grow with `√R`.
    pub fn equilibration_steps(&self) -> u64 {
        self.t_equil
            .unwrap_or_else(|| (20.0 * (self.bias_variance() + 1.0).sqrt()).ceil() as u64 + 200)
    }

    pub fn total_steps(&self) -> u64 {
        self.equilibration_steps() + self.t_measure
    }
}

/// Decisions `ξ[i][a][μ] ∈ {−1, +1}`, stored signal-major so that crediting a
/// single signal walks contiguous memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyTable {
    n: usize,
    s: usize,
    d: usize,
    entries: Vec<i8>,
}

impl StrategyTable {
    /// Each entry is an independent fair ±1, which is the same as every agent
    /// drawing `s` strategies uniformly (with replacement) from all `2^D`.
    pub fn random<R: Rng + ?Sized>(n: usize, s: usize, d: usize, rng: &mut R) -> Self {
        let len = n * s * d;
        let mut entries = Vec::with_capacity(len);
        while entries.len() < len {
            let mut bits: u64 = rng.random();
            for _ in 0..64.min(len - entries.len()) {
                entries.push(if bits & 1 == 1 { 1 } else { -1 });
                bits >>= 1;
            }
        }
        StrategyTable { n, s, d, entries }
    }

    /// Builds a table from `f(agent, strategy, signal)`; every value must be ±1.
    pub fn from_fn<F>(n: usize, s: usize, d: usize, mut f: F) -> Result<Self, ConfigError>
    where
        F: FnMut(usize, usize, usize) -> i8,
    {
        let mut entries = vec![0i8; n * s * d];
        for mu in 0..d {
            for i in 0..n {
                for a in 0..s {
                    let v = f(i, a, mu);
                    if v != 1 && v != -1 {
                        return Err(ConfigError::InvalidDecision);
                    }
                    entries[mu * n * s + i * s + a] = v;
                }
            }
        }
        Ok(StrategyTable { n, s, d, entries })
    }

    #[inline]
    pub fn get(&self, agent: usize, strategy: usize, mu: usize) -> i8 {
        self.entries[mu * self.n * self.s + agent * self.s + strategy]
    }

    /// All `(agent, strategy)` decisions for one signal, agent-major.
    #[inline]
    pub fn signal_row(&self, mu: usize) -> &[i8] {
        let w = self.n * self.s;
        &self.entries[mu * w..(mu + 1) * w]
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n, self.s, self.d)
    }

    /// Returns a copy with strategies `a` and `b` exchanged for every agent.
    pub fn swapped(&self, a: usize, b: usize) -> Self {
        let mut out = self.clone();
        for mu in 0..self.d {
            for i in 0..self.n {
                let base = mu * self.n * self.s + i * self.s;
                out.entries.swap(base + a, base + b);
            }
        }
        out
    }
}

/// Initial biases `ω_ia` and cumulative scores `Ω_ia(t)`, agent-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreBoard {
    s: usize,
    bias: Vec<f64>,
    score: Vec<f64>,
}

impl ScoreBoard {
    pub fn new(s: usize, bias: Vec<f64>) -> Self {
        let score = bias.clone();
        ScoreBoard { s, bias, score }
    }

    #[inline]
    pub fn bias(&self, agent: usize, strategy: usize) -> f64 {
        self.bias[agent * self.s + strategy]
    }

    #[inline]
    pub fn score(&self, agent: usize, strategy: usize) -> f64 {
        self.score[agent * self.s + strategy]
    }

    #[inline]
    pub fn agent_scores(&self, agent: usize) -> &[f64] {
        &self.score[agent * self.s..(agent + 1) * self.s]
    }

    pub fn biases(&self) -> &[f64] {
        &self.bias
    }

    pub fn scores(&self) -> &[f64] {
        &self.score
    }
}

/// One time step as seen from outside the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: u64,
    pub mu_star: usize,
    /// `A^{μ*}(t)`.
    pub attendance: f64,
    /// `A^μ(t)` for every signal.
    pub a_vec_before: Vec<f64>,
    /// Signed `A^μ(t+1) − A^μ(t)`; consumers take absolute values.
    pub delta_a: Vec<f64>,
    /// Payoff components `k_μ(t+1)` after this step's update.
    pub k_vec: Vec<f64>,
}

/// Draws the bias table `ω_ia`, agent-major with `s` entries per agent. The
/// first strategy of every agent keeps a zero bias.
pub fn sample_preferences<R: Rng + ?Sized>(
    dist: PrefDist,
    rho: f64,
    n: usize,
    s: usize,
    rng: &mut R,
) -> Result<Vec<f64>, ConfigError> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(ConfigError::InvalidDiversity(rho));
    }
    let sd = (rho * n as f64).sqrt();
    let mut bias = vec![0.0; n * s];
    for i in 0..n {
        for a in 1..s {
            let w = match dist {
                PrefDist::Gaussian => {
                    let z: f64 = rng.sample(StandardNormal);
                    sd * z
                }
                PrefDist::Bimodal => {
                    if rng.random::<bool>() {
                        sd
                    } else {
                        -sd
                    }
                }
            };
            // keeps ρ = 0 free of signed zeros
            bias[i * s + a] = if sd == 0.0 { 0.0 } else { w };
        }
    }
    Ok(bias)
}

#[inline]
fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Payoff function `φ(x)` of the scaled excess demand `x = √N·A`.
///
/// `sgn(0)` is taken as zero, so every kind is odd and `φ(0) = 0`.
#[inline]
pub fn payoff_value(kind: PayoffKind, x: f64) -> f64 {
    match kind {
        PayoffKind::Step => sgn(x),
        PayoffKind::Linear => x,
        PayoffKind::Quadratic => x * x * sgn(x),
    }
}

/// Index of the highest score; exact ties are broken uniformly at random.
#[inline]
pub fn select_strategy<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> usize {
    let mut best = 0;
    let mut ties = 1usize;
    for (a, &v) in scores.iter().enumerate().skip(1) {
        if v > scores[best] {
            best = a;
            ties = 1;
        } else if v == scores[best] {
            ties += 1;
        }
    }
    if ties == 1 {
        return best;
    }
    let top = scores[best];
    let pick = rng.random_range(0..ties);
    scores
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == top)
        .nth(pick)
        .map(|(a, _)| a)
        .unwrap_or(best)
}

/// Appends a winning bit to an `m`-bit history. The most recent bit is the
/// least significant one.
#[inline]
pub fn push_history(history: usize, bit: u8, m: u32) -> usize {
    let mask = (1usize << m) - 1;
    ((history << 1) | bit as usize) & mask
}

/// Encodes winning bits given oldest first into a signal index.
pub fn signal_from_bits(bits_oldest_first: &[u8]) -> usize {
    bits_oldest_first
        .iter()
        .fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize)
}

/// Winning bit for excess demand `a`: the minority side wins, so bit 1 wins
/// when fewer agents chose decision 1.
#[inline]
pub fn winning_bit(a: f64) -> u8 {
    u8::from(a < 0.0)
}

/// Mutable state of one game sample.
#[derive(Debug, Clone)]
pub struct GameState {
    config: GameConfig,
    n: usize,
    s: usize,
    d: usize,
    sqrt_n: f64,
    strategies: StrategyTable,
    board: ScoreBoard,
    t: u64,
    history: usize,
    mu_star: usize,
    active: Vec<usize>,
    /// `N·A^μ`, always an integer.
    demand: Vec<i64>,
    k_vec: Vec<f64>,
    rng: ChaCha8Rng,
}

impl GameState {
    /// Draws a fresh sample from `config.seed`.
    pub fn new(config: &GameConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (n, s, d) = (config.n_agents, config.s, config.signal_dim());
        let strategies = StrategyTable::random(n, s, d, &mut rng);
        let bias = sample_preferences(config.pref_dist, config.rho, n, s, &mut rng)?;
        Self::assemble(config, strategies, bias, rng)
    }

    /// Builds a sample from explicit tables. The remaining randomness (initial
    /// history or signal, tie-breaks) is drawn from `config.seed`.
    pub fn from_parts(
        config: &GameConfig,
        strategies: StrategyTable,
        bias: Vec<f64>,
    ) -> Result<Self, ConfigError> {
        config.validate()?;
        let (n, s, d) = (config.n_agents, config.s, config.signal_dim());
        if strategies.dims() != (n, s, d) {
            return Err(ConfigError::ShapeMismatch {
                expected: n * s * d,
                got: strategies.entries.len(),
            });
        }
        if bias.len() != n * s {
            return Err(ConfigError::ShapeMismatch {
                expected: n * s,
                got: bias.len(),
            });
        }
        if let Some(i) = (0..n).find(|&i| bias[i * s] != 0.0) {
            return Err(ConfigError::NonZeroFirstBias(i));
        }
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self::assemble(config, strategies, bias, rng)
    }

    fn assemble(
        config: &GameConfig,
        strategies: StrategyTable,
        bias: Vec<f64>,
        mut rng: ChaCha8Rng,
    ) -> Result<Self, ConfigError> {
        let (n, s, d) = (config.n_agents, config.s, config.signal_dim());
        let (history, mu_star) = match (config.update_mode, config.signal_mode, config.m) {
            (UpdateMode::Online, SignalMode::Endogenous, Some(m)) => {
                let h = (0..m).fold(0usize, |h, _| {
                    push_history(h, rng.random::<bool>() as u8, m)
                });
                (h, h)
            }
            _ => (0, rng.random_range(0..d)),
        };
        let board = ScoreBoard::new(s, bias);
        let active: Vec<usize> = (0..n)
            .map(|i| select_strategy(board.agent_scores(i), &mut rng))
            .collect();
        let demand = (0..d)
            .map(|mu| {
                active
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| strategies.get(i, a, mu) as i64)
                    .sum()
            })
            .collect();
        Ok(GameState {
            config: config.clone(),
            n,
            s,
            d,
            sqrt_n: (n as f64).sqrt(),
            strategies,
            board,
            t: 0,
            history,
            mu_star,
            active,
            demand,
            k_vec: vec![0.0; d],
            rng,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn mu_star(&self) -> usize {
        self.mu_star
    }

    pub fn history(&self) -> usize {
        self.history
    }

    pub fn strategies(&self) -> &StrategyTable {
        &self.strategies
    }

    pub fn board(&self) -> &ScoreBoard {
        &self.board
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn k_vec(&self) -> &[f64] {
        &self.k_vec
    }

    /// Integer numerators `N·A^μ`.
    pub fn demand_numerators(&self) -> &[i64] {
        &self.demand
    }

    /// `A^μ = (1/N) Σ_i ξ^μ_{a*(i)}`.
    #[inline]
    pub fn excess_demand(&self, mu: usize) -> f64 {
        assert!(mu < self.d, "signal {mu} out of range for D = {}", self.d);
        self.demand[mu] as f64 / self.n as f64
    }

    pub fn demand_vector(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.demand.iter().map(|&x| x as f64 / n).collect()
    }

    /// Overrides the current signal (and, for endogenous play, the history).
    pub fn set_signal(&mut self, mu: usize) {
        assert!(mu < self.d, "signal {mu} out of range for D = {}", self.d);
        self.mu_star = mu;
        self.history = mu;
    }

    /// Advances one step using the configured update mode.
    pub fn advance(&mut self) -> StepRecord {
        match self.config.update_mode {
            UpdateMode::Online => self.advance_online(),
            UpdateMode::Batch => self.advance_batch(),
        }
    }

    /// Online step: only the current signal's payoff is credited.
    pub fn advance_online(&mut self) -> StepRecord {
        let mu = self.mu_star;
        let before = self.demand_vector();
        let attendance = before[mu];
        let phi = payoff_value(self.config.payoff_kind, self.sqrt_n * attendance);
        self.credit_signal(mu, phi);
        self.reassign();
        let record = self.finish_step(mu, attendance, before);
        match (self.config.signal_mode, self.config.m) {
            (SignalMode::Endogenous, Some(m)) => {
                self.history = push_history(self.history, winning_bit(attendance), m);
                self.mu_star = self.history;
            }
            _ => self.mu_star = self.rng.random_range(0..self.d),
        }
        record
    }

    /// Batch step: every signal's payoff is credited at once. The signal
    /// carried by the record is a uniformly drawn reporting signal.
    pub fn advance_batch(&mut self) -> StepRecord {
        let mu = self.mu_star;
        let before = self.demand_vector();
        let attendance = before[mu];
        self.credit_all_signals();
        self.reassign();
        let record = self.finish_step(mu, attendance, before);
        self.mu_star = self.rng.random_range(0..self.d);
        record
    }

    fn finish_step(&mut self, mu: usize, attendance: f64, before: Vec<f64>) -> StepRecord {
        let n = self.n as f64;
        let delta_a = self
            .demand
            .iter()
            .zip(&before)
            .map(|(&x, &b)| x as f64 / n - b)
            .collect();
        let record = StepRecord {
            t: self.t,
            mu_star: mu,
            attendance,
            a_vec_before: before,
            delta_a,
            k_vec: self.k_vec.clone(),
        };
        self.t += 1;
        record
    }

    /// Subtracts `ξ_a^μ·φ` from every score and `φ` from `k_μ`, without
    /// re-selecting strategies.
    pub fn credit_signal(&mut self, mu: usize, phi: f64) {
        let row = self.strategies.signal_row(mu);
        for (score, &xi) in self.board.score.iter_mut().zip(row) {
            *score -= xi as f64 * phi;
        }
        self.k_vec[mu] -= phi;
    }

    /// Subtracts `Σ_μ ξ_a^μ·φ(√N A^μ)` from every score, with all `A^μ`
    /// taken from the current assignments, without re-selecting strategies.
    /// Signals are credited in increasing order, so the result is bit-identical
    /// to calling [`GameState::credit_signal`] for each signal in turn.
    pub fn credit_all_signals(&mut self) {
        let kind = self.config.payoff_kind;
        let phis: Vec<f64> = (0..self.d)
            .map(|mu| payoff_value(kind, self.sqrt_n * self.excess_demand(mu)))
            .collect();
        for (mu, &phi) in phis.iter().enumerate() {
            self.credit_signal(mu, phi);
        }
    }

    /// Lets every agent re-select its best strategy and updates the demand.
    pub fn reassign(&mut self) {
        for i in 0..self.n {
            let next = select_strategy(self.board.agent_scores(i), &mut self.rng);
            let prev = self.active[i];
            if next != prev {
                for (mu, x) in self.demand.iter_mut().enumerate() {
                    *x += (self.strategies.get(i, next, mu) - self.strategies.get(i, prev, mu))
                        as i64;
                }
                self.active[i] = next;
            }
        }
    }

    /// Largest deviation from `Ω_ia = ω_ia + Σ_μ k_μ ξ_ia^μ` over all scores.
    pub fn bookkeeping_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for a in 0..self.s {
                let expected = self.board.bias(i, a)
                    + (0..self.d)
                        .map(|mu| self.k_vec[mu] * self.strategies.get(i, a, mu) as f64)
                        .sum::<f64>();
                worst = worst.max((self.board.score(i, a) - expected).abs());
            }
        }
        worst
    }

    /// Runs `steps` steps and collects the records.
    pub fn run(&mut self, steps: u64) -> Vec<StepRecord> {
        (0..steps).map(|_| self.advance()).collect()
    }
}
