//! Run configuration. Every tunable has the published experimental default,
//! so `SimConfig::default()` plus a seed fully determines a run.

use serde::{Deserialize, Serialize};

use crate::Error;

/// Which decision pipeline the swarm runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Every robot participates for the whole run (the baseline).
    FullSwarm,
    /// Hop-count recruitment around a leader.
    LeaderBased,
    /// Per-robot probabilistic self-selection with relays.
    Distributed,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "full-swarm" | "full_swarm" | "full" => Ok(Strategy::FullSwarm),
            "leader-based" | "leader_based" | "leader" => Ok(Strategy::LeaderBased),
            "distributed" => Ok(Strategy::Distributed),
            other => Err(Error::config(
                "strategy",
                format!("unknown strategy `{other}` (full-swarm | leader-based | distributed)"),
            )),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Strategy::FullSwarm => "full-swarm",
            Strategy::LeaderBased => "leader-based",
            Strategy::Distributed => "distributed",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub strategy: Strategy,
    pub n_robots: u32,
    pub arena_side_m: f64,
    pub tile_size_m: f64,
    /// Fraction of black tiles; the task gets harder as it approaches 0.5.
    pub black_fraction: f64,
    pub tick_rate_hz: f64,
    pub max_duration_s: f64,

    /// Mean exploration duration (sigma).
    pub explore_mean_s: f64,
    /// Dissemination duration gain (g); the mean is quality * g.
    pub disseminate_gain_s: f64,

    /// Confidence update sensitivity (gamma), distributed strategy.
    pub confidence_gain: f64,
    /// Confidence loss per subset-parameter increment, distributed strategy.
    pub escalation_step: f64,

    /// Opinions required before the leader evaluates a ratio (n_op).
    pub eval_min_opinions: u32,
    /// Majority ratio threshold (r_op).
    pub eval_majority_ratio: f64,
    /// How long the majority must hold (tau_op), seconds.
    pub eval_hold_s: f64,
    /// Consecutive agreeing decisions to finalize (k).
    pub eval_consistent_k: u32,
    /// Per-subset-size give-up time, seconds.
    pub eval_stage_timeout_s: f64,

    /// Communication radius (d_comm), meters.
    pub comm_range_m: f64,
    /// Mean sticky-role duration (tau_role), seconds.
    pub mean_role_time_s: f64,

    /// Ground-sensor flip probability.
    pub noise_p: f64,
    /// Messages are exchanged every this many ticks.
    pub delivery_period: u32,
    /// Per-message per-receiver drop probability.
    pub drop_probability: f64,
    /// Malfunction probability per role-reassignment trial.
    pub fault_prob: f64,
    /// How long a malfunction lasts, seconds.
    pub fault_duration_s: f64,

    /// Elect the leader by min-id flooding instead of designating one at
    /// random at the start (leader-based strategy only).
    pub leader_election: bool,
    /// Pin the subset size parameter, disabling leader evaluation or
    /// confidence escalation; used to study subset construction in isolation.
    pub fixed_s: Option<u32>,

    /// End the run once convergence is detected (plus the hold window).
    /// Disable for fixed-horizon coverage studies.
    pub stop_at_convergence: bool,
    /// Opinion share that counts as converged.
    pub convergence_threshold: f64,
    /// How long the share must hold, seconds.
    pub convergence_hold_s: f64,
    /// Window for the steady-state subset size, seconds.
    pub steady_window_s: f64,
    /// Coverage heatmap cell edge, meters.
    pub heatmap_cell_m: f64,

    pub seed: u64,
    pub repetitions: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            strategy: Strategy::LeaderBased,
            n_robots: 100,
            arena_side_m: 8.0,
            tile_size_m: 0.2,
            black_fraction: 0.34,
            tick_rate_hz: 10.0,
            max_duration_s: 2000.0,
            explore_mean_s: 10.0,
            disseminate_gain_s: 10.0,
            confidence_gain: 0.01,
            escalation_step: 0.05,
            eval_min_opinions: 10,
            eval_majority_ratio: 0.8,
            eval_hold_s: 10.0,
            eval_consistent_k: 2,
            eval_stage_timeout_s: 150.0,
            comm_range_m: 1.0,
            mean_role_time_s: 20.0,
            noise_p: 0.0,
            delivery_period: 1,
            drop_probability: 0.0,
            fault_prob: 0.0,
            fault_duration_s: 10.0,
            leader_election: false,
            fixed_s: None,
            stop_at_convergence: true,
            convergence_threshold: 0.8,
            convergence_hold_s: 30.0,
            steady_window_s: 50.0,
            heatmap_cell_m: 0.4,
            seed: 1,
            repetitions: 1,
        }
    }
}

impl SimConfig {
    pub fn dt(&self) -> f64 {
        1.0 / self.tick_rate_hz
    }

    pub fn max_ticks(&self) -> u64 {
        (self.max_duration_s * self.tick_rate_hz).round() as u64
    }

    pub fn validate(&self) -> Result<(), Error> {
        fn positive(field: &str, v: f64) -> Result<(), Error> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("{v} must be positive")))
            }
        }
        fn probability(field: &str, v: f64) -> Result<(), Error> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::config(field, format!("{v} outside [0, 1]")))
            }
        }

        if self.n_robots == 0 {
            return Err(Error::config("n_robots", "need at least one robot"));
        }
        positive("arena_side_m", self.arena_side_m)?;
        positive("tile_size_m", self.tile_size_m)?;
        let tiles = self.arena_side_m / self.tile_size_m;
        if (tiles.round() * self.tile_size_m - self.arena_side_m).abs()
            > 1e-9 * self.arena_side_m.max(1.0)
        {
            return Err(Error::config(
                "arena_side_m",
                format!(
                    "{} is not an integer multiple of tile_size_m {}",
                    self.arena_side_m, self.tile_size_m
                ),
            ));
        }
        probability("black_fraction", self.black_fraction)?;
        positive("tick_rate_hz", self.tick_rate_hz)?;
        positive("max_duration_s", self.max_duration_s)?;
        positive("explore_mean_s", self.explore_mean_s)?;
        positive("disseminate_gain_s", self.disseminate_gain_s)?;
        probability("confidence_gain", self.confidence_gain)?;
        positive("escalation_step", self.escalation_step)?;
        if self.eval_min_opinions == 0 {
            return Err(Error::config("eval_min_opinions", "must be at least 1"));
        }
        probability("eval_majority_ratio", self.eval_majority_ratio)?;
        positive("eval_hold_s", self.eval_hold_s)?;
        if self.eval_consistent_k == 0 {
            return Err(Error::config("eval_consistent_k", "must be at least 1"));
        }
        positive("eval_stage_timeout_s", self.eval_stage_timeout_s)?;
        positive("comm_range_m", self.comm_range_m)?;
        positive("mean_role_time_s", self.mean_role_time_s)?;
        probability("noise_p", self.noise_p)?;
        if self.delivery_period == 0 {
            return Err(Error::config("delivery_period", "must be at least 1"));
        }
        probability("drop_probability", self.drop_probability)?;
        probability("fault_prob", self.fault_prob)?;
        if self.fault_duration_s < 0.0 {
            return Err(Error::config("fault_duration_s", "must be non-negative"));
        }
        if self.fixed_s == Some(0) {
            return Err(Error::config("fixed_s", "must be at least 1"));
        }
        probability("convergence_threshold", self.convergence_threshold)?;
        positive("convergence_hold_s", self.convergence_hold_s)?;
        positive("steady_window_s", self.steady_window_s)?;
        positive("heatmap_cell_m", self.heatmap_cell_m)?;
        let cells = self.arena_side_m / self.heatmap_cell_m;
        if (cells.round() * self.heatmap_cell_m - self.arena_side_m).abs()
            > 1e-9 * self.arena_side_m.max(1.0)
        {
            return Err(Error::config(
                "heatmap_cell_m",
                "must divide the arena side exactly",
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::config("repetitions", "must be at least 1"));
        }
        Ok(())
    }

    /// Parses a TOML document with unset fields falling back to defaults.
    pub fn from_toml_str(text: &str) -> Result<SimConfig, Error> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Applies one `key = value` override; keys are the TOML field names.
    /// This is the single override path shared by the CLI, sweeps, and
    /// foreign-language bindings.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), Error> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Error>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse::<T>()
                .map_err(|e| Error::config(key, format!("cannot parse `{value}`: {e}")))
        }

        match key {
            "strategy" => self.strategy = value.parse()?,
            "n_robots" => self.n_robots = parse(key, value)?,
            "arena_side_m" => self.arena_side_m = parse(key, value)?,
            "tile_size_m" => self.tile_size_m = parse(key, value)?,
            "black_fraction" => self.black_fraction = parse(key, value)?,
            "tick_rate_hz" => self.tick_rate_hz = parse(key, value)?,
            "max_duration_s" => self.max_duration_s = parse(key, value)?,
            "explore_mean_s" => self.explore_mean_s = parse(key, value)?,
            "disseminate_gain_s" => self.disseminate_gain_s = parse(key, value)?,
            "confidence_gain" => self.confidence_gain = parse(key, value)?,
            "escalation_step" => self.escalation_step = parse(key, value)?,
            "eval_min_opinions" => self.eval_min_opinions = parse(key, value)?,
            "eval_majority_ratio" => self.eval_majority_ratio = parse(key, value)?,
            "eval_hold_s" => self.eval_hold_s = parse(key, value)?,
            "eval_consistent_k" => self.eval_consistent_k = parse(key, value)?,
            "eval_stage_timeout_s" => self.eval_stage_timeout_s = parse(key, value)?,
            "comm_range_m" => self.comm_range_m = parse(key, value)?,
            "mean_role_time_s" => self.mean_role_time_s = parse(key, value)?,
            "noise_p" => self.noise_p = parse(key, value)?,
            "delivery_period" => self.delivery_period = parse(key, value)?,
            "drop_probability" => self.drop_probability = parse(key, value)?,
            "fault_prob" => self.fault_prob = parse(key, value)?,
            "fault_duration_s" => self.fault_duration_s = parse(key, value)?,
            "leader_election" => self.leader_election = parse(key, value)?,
            "fixed_s" => {
                self.fixed_s = if value.is_empty() || value == "none" {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "stop_at_convergence" => self.stop_at_convergence = parse(key, value)?,
            "convergence_threshold" => self.convergence_threshold = parse(key, value)?,
            "convergence_hold_s" => self.convergence_hold_s = parse(key, value)?,
            "steady_window_s" => self.steady_window_s = parse(key, value)?,
            "heatmap_cell_m" => self.heatmap_cell_m = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "repetitions" => self.repetitions = parse(key, value)?,
            other => {
                return Err(Error::config(
                    other,
                    "unknown configuration field".to_string(),
                ))
            }
        }
        Ok(())
    }
}
