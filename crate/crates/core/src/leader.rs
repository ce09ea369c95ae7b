//! Leader-based subset construction and evaluation.
//!
//! Recruitment spreads outward from the leader as hop counts: each robot
//! keeps the shortest beacon-derived distance to the leader and is a
//! decision-maker while that distance is at most the subset size parameter
//! `s`. The leader gathers disseminated opinions and raises `s` until it has
//! seen enough consistent local decisions.
//!
//! Leadership itself is either fixed at the start of a run or established by
//! min-id flooding: every leaderless robot beacons the smallest candidate id
//! it has heard and claims the role after a quiet period. Election epochs
//! disambiguate restarts after leader loss.

use std::collections::BTreeMap;

use crate::environment::Color;
use crate::RobotId;

/// A hop count is cleared after this long without a supporting beacon.
pub const DISCONNECT_EXPIRY_S: f64 = 5.0;
/// A candidate claims leadership after hearing no smaller id for this long.
pub const ELECTION_QUIET_S: f64 = 10.0;
/// A follower whose hop count stayed cleared this long restarts the election.
pub const REELECTION_SILENCE_S: f64 = 5.0;
/// A leaderless robot backing someone else's candidacy gives up on it after
/// this long and restarts with a fresh epoch, so a candidate that vanished
/// mid-election cannot deadlock the swarm. Longer than the quiet period, so
/// a live candidate always declares (and its beacon arrives) first.
pub const CANDIDATE_STALE_S: f64 = 15.0;

/// Timers accumulate tick-sized increments; absorb float error at the
/// threshold so "n ticks of dt" reaches exactly "n * dt".
fn reached(timer: f64, threshold: f64) -> bool {
    timer >= threshold - 1e-9
}

/// Per-robot view of the hop structure rooted at the current leader.
#[derive(Debug, Clone, Copy)]
pub struct HopState {
    /// Shortest known hop distance to the leader; `None` when disconnected.
    pub hop: Option<u32>,
    /// Seconds since the last beacon that supported the current hop count.
    pub last_contact: f64,
    /// Local view of the subset size parameter (grow-only within an epoch).
    pub subset_param: u32,
}

impl HopState {
    pub fn unset() -> HopState {
        HopState {
            hop: None,
            last_contact: 0.0,
            subset_param: 1,
        }
    }

    pub fn leader_root(subset_param: u32) -> HopState {
        HopState {
            hop: Some(0),
            last_contact: 0.0,
            subset_param,
        }
    }
}

/// Applies one tick's worth of hop beacons (already filtered to the current
/// leader and epoch). A beacon supports the resulting hop count when
/// `beacon.hop + 1 <= hop`; only supporting beacons refresh the contact
/// timer, so a robot whose only path vanished expires even while it still
/// hears farther beacons.
pub fn update_hop(state: &mut HopState, beacons: &[(u32, u32)], dt: f64) {
    let mut supported = false;
    for &(hop, s) in beacons {
        let candidate = hop.saturating_add(1);
        if state.hop.is_none_or(|h| candidate < h) {
            state.hop = Some(candidate);
        }
        state.subset_param = state.subset_param.max(s);
        if let Some(h) = state.hop {
            if candidate <= h {
                supported = true;
            }
        }
    }
    if supported {
        state.last_contact = 0.0;
    } else {
        state.last_contact += dt;
        if state.last_contact > DISCONNECT_EXPIRY_S {
            state.hop = None;
        }
    }
}

/// Membership rule: within `s` hops of the leader.
pub fn is_member(state: &HopState) -> bool {
    state.hop.is_some_and(|h| h <= state.subset_param)
}

/// Leader-side evaluation parameters.
#[derive(Debug, Clone, Copy)]
pub struct EvalParams {
    /// Minimum distinct opinions before a ratio is computed (n_op).
    pub min_opinions: usize,
    /// Majority ratio that signals local convergence (r_op).
    pub majority_ratio: f64,
    /// How long the majority must hold (tau_op).
    pub hold_s: f64,
    /// Consecutive agreeing decisions required for a final decision (k).
    pub consistent_decisions: usize,
    /// Give-up time per subset size before forcing an increase.
    pub stage_timeout_s: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            min_opinions: 10,
            majority_ratio: 0.8,
            hold_s: 10.0,
            consistent_decisions: 2,
            stage_timeout_s: 150.0,
        }
    }
}

/// State of the leader's evaluation of the current subset.
#[derive(Debug, Clone)]
pub struct EvalState {
    /// Latest opinion per robot id; de-duplicated by id, newest wins.
    pub collected: BTreeMap<RobotId, Color>,
    pub hold_timer: f64,
    pub hold_opinion: Option<Color>,
    /// Recorded `(s, opinion)` decisions.
    pub decisions: Vec<(u32, Color)>,
    /// Time spent at the current subset parameter without a decision.
    pub stage_elapsed: f64,
    /// Current subset size parameter owned by the leader.
    pub subset_param: u32,
    pub final_decision: Option<Color>,
}

impl EvalState {
    pub fn new() -> EvalState {
        EvalState {
            collected: BTreeMap::new(),
            hold_timer: 0.0,
            hold_opinion: None,
            decisions: Vec::new(),
            stage_elapsed: 0.0,
            subset_param: 1,
            final_decision: None,
        }
    }

    pub fn majority(&self) -> Option<(Color, f64)> {
        if self.collected.is_empty() {
            return None;
        }
        let black = self
            .collected
            .values()
            .filter(|c| **c == Color::Black)
            .count();
        let white = self.collected.len() - black;
        let (color, count) = if black >= white {
            (Color::Black, black)
        } else {
            (Color::White, white)
        };
        Some((color, count as f64 / self.collected.len() as f64))
    }

    fn advance_stage(&mut self) {
        self.collected.clear();
        self.hold_timer = 0.0;
        self.hold_opinion = None;
        self.stage_elapsed = 0.0;
        self.subset_param += 1;
    }

    /// One evaluation tick: merge freshly heard opinions, track how long the
    /// majority ratio holds, record a decision or time the stage out.
    pub fn tick<'a>(
        &mut self,
        opinions: impl Iterator<Item = (RobotId, Color)> + 'a,
        params: &EvalParams,
        dt: f64,
    ) {
        if self.final_decision.is_some() {
            return;
        }
        self.stage_elapsed += dt;
        for (id, opinion) in opinions {
            self.collected.insert(id, opinion);
        }

        if self.collected.len() >= params.min_opinions {
            let (majority, ratio) = self.majority().expect("non-empty");
            if ratio >= params.majority_ratio {
                if self.hold_opinion == Some(majority) {
                    self.hold_timer += dt;
                } else {
                    self.hold_opinion = Some(majority);
                    self.hold_timer = dt;
                }
            } else {
                self.hold_timer = 0.0;
                self.hold_opinion = None;
            }

            if reached(self.hold_timer, params.hold_s) {
                let s = self.subset_param;
                self.decisions.push((s, majority));
                let k = params.consistent_decisions;
                if self.decisions.len() >= k {
                    let tail = &self.decisions[self.decisions.len() - k..];
                    if tail.iter().all(|(_, c)| *c == tail[0].1) {
                        self.final_decision = Some(tail[0].1);
                    }
                }
                self.advance_stage();
                return;
            }
        }

        if reached(self.stage_elapsed, params.stage_timeout_s) {
            self.advance_stage();
        }
    }
}

impl Default for EvalState {
    fn default() -> Self {
        Self::new()
    }
}

/// View a robot holds of who leads and which election epoch is current.
#[derive(Debug, Clone, Copy)]
pub struct ElectionState {
    pub epoch: u32,
    pub leader: Option<RobotId>,
    /// Smallest candidate id heard this epoch (only while leaderless).
    pub min_candidate: RobotId,
    /// Seconds without hearing a smaller candidate.
    pub quiet: f64,
    /// Seconds spent with a cleared hop count while a leader is known.
    pub orphaned: f64,
}

/// Outcome of one election tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElectionEvent {
    None,
    BecameLeader,
    /// Lost contact with the structure; a new election epoch was started.
    StartedElection,
}

impl ElectionState {
    /// Fixed-leader mode: everyone knows the leader from the start.
    pub fn with_leader(leader: RobotId) -> ElectionState {
        ElectionState {
            epoch: 0,
            leader: Some(leader),
            min_candidate: leader,
            quiet: 0.0,
            orphaned: 0.0,
        }
    }

    /// Election mode: leaderless start, every robot backs itself.
    pub fn electing(own: RobotId) -> ElectionState {
        ElectionState {
            epoch: 0,
            leader: None,
            min_candidate: own,
            quiet: 0.0,
            orphaned: 0.0,
        }
    }

    pub fn is_electing(&self) -> bool {
        self.leader.is_none()
    }

    fn restart(&mut self, own: RobotId, epoch: u32) {
        self.epoch = epoch;
        self.leader = None;
        self.min_candidate = own;
        self.quiet = 0.0;
        self.orphaned = 0.0;
    }

    /// Handles an election beacon. Returns true if this invalidated the
    /// current leader (the caller must reset hop/eval state).
    pub fn observe_candidate(&mut self, own: RobotId, candidate: RobotId, epoch: u32) -> bool {
        if epoch > self.epoch {
            self.restart(own, epoch);
            if candidate < self.min_candidate {
                self.min_candidate = candidate;
            }
            return true;
        }
        if epoch == self.epoch && self.leader.is_none() && candidate < self.min_candidate {
            self.min_candidate = candidate;
            self.quiet = 0.0;
        }
        false
    }

    /// Handles the (leader, epoch) carried by a hop beacon. Returns true if
    /// the beacon belongs to the accepted leader and should update hop state;
    /// `switched` in the second slot reports a leader change. Within an epoch
    /// a smaller leader id displaces a larger one, and a leaderless robot
    /// only submits to a leader no larger than the candidate it backs.
    pub fn observe_leader_beacon(&mut self, leader: RobotId, epoch: u32) -> (bool, bool) {
        let wins = epoch > self.epoch
            || (epoch == self.epoch
                && match self.leader {
                    Some(current) => leader < current,
                    None => leader <= self.min_candidate,
                });
        if wins {
            self.epoch = epoch;
            self.leader = Some(leader);
            self.min_candidate = leader;
            self.quiet = 0.0;
            self.orphaned = 0.0;
            return (true, true);
        }
        // Beacons for a lower-priority leader are stale and ignored.
        (self.leader == Some(leader) && epoch == self.epoch, false)
    }

    /// Runs quiet/orphan timers. `connected` is whether the robot currently
    /// holds a hop count to its leader.
    pub fn tick(&mut self, own: RobotId, connected: bool, dt: f64) -> ElectionEvent {
        match self.leader {
            None => {
                self.quiet += dt;
                if self.min_candidate == own {
                    if reached(self.quiet, ELECTION_QUIET_S) {
                        self.leader = Some(own);
                        self.orphaned = 0.0;
                        return ElectionEvent::BecameLeader;
                    }
                } else if reached(self.quiet, CANDIDATE_STALE_S) {
                    let next = self.epoch + 1;
                    self.restart(own, next);
                    return ElectionEvent::StartedElection;
                }
                ElectionEvent::None
            }
            Some(leader) => {
                if leader == own || connected {
                    self.orphaned = 0.0;
                    return ElectionEvent::None;
                }
                self.orphaned += dt;
                if reached(self.orphaned, REELECTION_SILENCE_S) {
                    let next = self.epoch + 1;
                    self.restart(own, next);
                    return ElectionEvent::StartedElection;
                }
                ElectionEvent::None
            }
        }
    }
}
