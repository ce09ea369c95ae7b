//! Voter-model decision loop with direct modulation.
//!
//! Decision-making robots alternate between exploring (sampling the ground
//! and timing how long it agrees with their opinion) and disseminating
//! (broadcasting the opinion for a duration whose mean scales with the
//! measured quality). At the end of a dissemination the robot adopts one of
//! the opinions it heard, uniformly at random.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::environment::Color;
use crate::rng::sample_exp_mean;

/// Lower bound on the quality used for the dissemination mean, so the
/// exponential sampler never sees a zero mean.
pub const QUALITY_FLOOR: f64 = 0.01;

#[derive(Debug, Clone)]
pub enum DecisionPhase {
    Exploration {
        /// Sampled phase duration t_e.
        total: f64,
        elapsed: f64,
        /// Time the ground sensor agreed with the current opinion (t_o).
        matched: f64,
    },
    Dissemination {
        /// Sampled phase duration t_d.
        total: f64,
        elapsed: f64,
        /// Every opinion heard from disseminating robots, one entry per
        /// message. Duplicates are kept: presence time is the modulation.
        observed: Vec<Color>,
    },
}

#[derive(Debug, Clone)]
pub struct DecisionState {
    pub opinion: Color,
    pub phase: DecisionPhase,
}

impl DecisionState {
    /// Fresh decision-maker entering exploration with a retained opinion.
    pub fn enter(opinion: Color, explore_mean: f64, rng: &mut impl Rng) -> DecisionState {
        DecisionState {
            opinion,
            phase: begin_exploration(explore_mean, rng),
        }
    }

    pub fn is_disseminating(&self) -> bool {
        matches!(self.phase, DecisionPhase::Dissemination { .. })
    }
}

/// Starts an exploration phase with duration ~ Exp(mean `explore_mean`).
pub fn begin_exploration(explore_mean: f64, rng: &mut impl Rng) -> DecisionPhase {
    assert!(explore_mean > 0.0, "exploration mean must be positive");
    DecisionPhase::Exploration {
        total: sample_exp_mean(rng, explore_mean),
        elapsed: 0.0,
        matched: 0.0,
    }
}

/// Accrues one tick of exploration; `matched` grows only while the ground
/// sample agrees with the robot's opinion.
pub fn explore_tick(state: &mut DecisionState, ground_sample: Color, dt: f64) {
    match &mut state.phase {
        DecisionPhase::Exploration { elapsed, matched, .. } => {
            *elapsed += dt;
            if ground_sample == state.opinion {
                *matched += dt;
            }
        }
        DecisionPhase::Dissemination { .. } => {
            panic!("explore_tick called while disseminating")
        }
    }
}

/// Quality estimate: fraction of the exploration spent on the opinion's
/// color. A degenerate zero-length exploration yields the floor.
pub fn quality_estimate(matched: f64, total: f64) -> f64 {
    if total <= 0.0 {
        return QUALITY_FLOOR;
    }
    (matched / total).clamp(0.0, 1.0)
}

/// Starts a dissemination phase with duration ~ Exp(mean `quality * gain`),
/// quality floored at [`QUALITY_FLOOR`].
pub fn begin_dissemination(quality: f64, gain: f64, rng: &mut impl Rng) -> DecisionPhase {
    assert!(gain > 0.0, "dissemination gain must be positive");
    let mean = quality.max(QUALITY_FLOOR) * gain;
    DecisionPhase::Dissemination {
        total: sample_exp_mean(rng, mean),
        elapsed: 0.0,
        observed: Vec::new(),
    }
}

/// Records one received opinion while disseminating.
pub fn observe_opinion(state: &mut DecisionState, opinion: Color) {
    match &mut state.phase {
        DecisionPhase::Dissemination { observed, .. } => observed.push(opinion),
        DecisionPhase::Exploration { .. } => {
            panic!("observe_opinion called while exploring")
        }
    }
}

pub fn disseminate_tick(state: &mut DecisionState, dt: f64) {
    match &mut state.phase {
        DecisionPhase::Dissemination { elapsed, .. } => *elapsed += dt,
        DecisionPhase::Exploration { .. } => panic!("disseminate_tick called while exploring"),
    }
}

/// Voter rule at the end of dissemination: one uniform pick from everything
/// heard; an empty record keeps the robot's own opinion.
pub fn adopt_opinion(observed: &[Color], own: Color, rng: &mut impl Rng) -> Color {
    *observed.choose(rng).unwrap_or(&own)
}
