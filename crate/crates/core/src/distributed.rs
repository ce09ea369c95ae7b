//! Distributed subset construction: confidence-driven self-selection plus
//! relay forwarding.
//!
//! Every robot keeps a convergence confidence in [0, 1], nudged up by each
//! observed agreeing opinion and down by each disagreeing one. New lows of
//! the confidence ratchet the robot's personal subset parameter upward, which
//! raises its probability of selecting itself into the decision-making subset
//! at the next role renewal. Non-members forward decision-makers' opinions to
//! bridge the spatially scattered subset.

use rand::Rng;

use crate::environment::Color;
use crate::RobotId;

/// Subset-parameter increment per 0.1 of selection probability.
pub const PROB_PER_STEP: f64 = 0.1;
/// Relay forwarding capacity.
pub const RELAY_CAPACITY: usize = 3;
/// Re-hearing an origin after this long counts as a fresh observation.
pub const OBSERVATION_REFRESH_S: f64 = 2.0;

#[derive(Debug, Clone, Copy)]
pub struct ConfidenceParams {
    /// Update sensitivity (gamma).
    pub gain: f64,
    /// Confidence decrement that buys one subset-parameter increment.
    pub escalation_step: f64,
}

impl Default for ConfidenceParams {
    fn default() -> Self {
        ConfidenceParams {
            gain: 0.01,
            escalation_step: 0.05,
        }
    }
}

/// One confidence update: convex pull toward 1 on agreement, proportional
/// decay on disagreement. Both endpoints are exact fixed points.
pub fn update_confidence(alpha: f64, own: Color, observed: Color, gain: f64) -> f64 {
    if own == observed {
        alpha + gain * (1.0 - alpha)
    } else {
        alpha - gain * alpha
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConfidenceState {
    pub alpha: f64,
    /// Lowest confidence ever observed; the escalation ratchet.
    pub floor_seen: f64,
}

impl ConfidenceState {
    pub fn new() -> ConfidenceState {
        ConfidenceState {
            alpha: 1.0,
            floor_seen: 1.0,
        }
    }

    /// Applies one observed opinion and advances the ratchet.
    pub fn observe(&mut self, own: Color, observed: Color, params: &ConfidenceParams) {
        self.alpha = update_confidence(self.alpha, own, observed, params.gain);
        if self.alpha < self.floor_seen {
            self.floor_seen = self.alpha;
        }
    }

    /// Personal subset parameter: one, plus one per full escalation step of
    /// cumulative confidence loss below the starting value.
    pub fn subset_param(&self, params: &ConfidenceParams) -> u32 {
        let depth = (1.0 - self.floor_seen) / params.escalation_step;
        // Nudge past float-representation error at exact step boundaries.
        1 + (depth + 1e-9).floor() as u32
    }

    pub fn selection_probability(&self, params: &ConfidenceParams) -> f64 {
        probability_for(self.subset_param(params))
    }
}

impl Default for ConfidenceState {
    fn default() -> Self {
        Self::new()
    }
}

/// Selection probability for a subset parameter.
pub fn probability_for(subset_param: u32) -> f64 {
    (PROB_PER_STEP * subset_param as f64).min(1.0)
}

/// Membership draw at a role renewal: member iff U(0,1) <= p.
pub fn membership_draw(probability: f64, rng: &mut impl Rng) -> bool {
    rng.gen::<f64>() <= probability
}

/// Turns the raw broadcast stream into confidence observations.
///
/// Broadcasts repeat at the tick rate while a robot disseminates, and relays
/// re-send buffered entries; what the confidence monitors is each
/// decision-maker's *opinion*, so a repeat of an unchanged opinion inside the
/// refresh window is the same observation. A changed opinion, a new origin,
/// or a re-encounter after the window counts anew.
#[derive(Debug, Clone, Default)]
pub struct ObservationGate {
    heard: std::collections::BTreeMap<RobotId, (Color, u64)>,
}

impl ObservationGate {
    pub fn is_novel(&mut self, origin: RobotId, opinion: Color, tick: u64, refresh_ticks: u64) -> bool {
        let novel = match self.heard.get(&origin) {
            None => true,
            Some(&(prev, last_tick)) => prev != opinion || tick.saturating_sub(last_tick) > refresh_ticks,
        };
        self.heard.insert(origin, (opinion, tick));
        novel
    }
}

#[derive(Debug, Clone, Copy)]
struct RelayEntry {
    origin: RobotId,
    opinion: Color,
    updated_tick: u64,
}

/// Bounded store of decision-makers' opinions a relay keeps forwarding.
/// One slot per origin (newest wins); when full, the stalest entry is
/// evicted for a new origin.
#[derive(Debug, Clone, Default)]
pub struct RelayBuffer {
    entries: Vec<RelayEntry>,
}

impl RelayBuffer {
    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ingest(&mut self, origin: RobotId, opinion: Color, tick: u64) {
        if let Some(e) = self.entries.iter_mut().find(|e| e.origin == origin) {
            e.opinion = opinion;
            e.updated_tick = tick;
            return;
        }
        if self.entries.len() == RELAY_CAPACITY {
            let oldest = self
                .entries
                .iter()
                .enumerate()
                .min_by_key(|(_, e)| (e.updated_tick, e.origin))
                .map(|(i, _)| i)
                .expect("non-empty");
            self.entries.remove(oldest);
        }
        self.entries.push(RelayEntry {
            origin,
            opinion,
            updated_tick: tick,
        });
    }

    pub fn entries(&self) -> impl Iterator<Item = (RobotId, Color)> + '_ {
        self.entries.iter().map(|e| (e.origin, e.opinion))
    }
}
