//! The synchronous tick loop.
//!
//! Within a tick: (1) fault scheduling, (2) delivery of last tick's
//! outboxes, (3) per-robot protocol, decision, and role updates, (4) motion,
//! (5) metrics. All per-robot updates read the previous tick's world and
//! draw only from their owner's RNG substreams, so a run is bit-reproducible
//! for a given `(config, seed)` no matter how a batch is scheduled.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::comms::{
    deliver, is_delivery_tick, CommsConfig, FaultState, Message, MessageKind, NeighborIndex,
};
use crate::config::{SimConfig, Strategy};
use crate::distributed::{
    membership_draw, probability_for, ConfidenceParams, ConfidenceState, ObservationGate,
    RelayBuffer, OBSERVATION_REFRESH_S,
};
use crate::dmvd::{
    adopt_opinion, begin_dissemination, begin_exploration, quality_estimate, DecisionPhase,
    DecisionState,
};
use crate::environment::{Color, TileGrid};
use crate::leader::{self, ElectionEvent, ElectionState, EvalParams, EvalState, HopState};
use crate::metrics::{
    steady_subset_size, AccuracyOutcome, ConvergenceParams, ConvergenceTracker, CoverageHeatmap,
    RunSummary, WeightScheme,
};
use crate::motion::{
    enforce_separation, step_motion, MotionPhase, Pose, BODY_DIAMETER, BODY_RADIUS,
    PROXIMITY_RANGE,
};
use crate::roles::{maybe_reassign, Role, RoleState};
use crate::rng::{global_stream, robot_stream, StreamKind};
use crate::trace::{LeaderRow, RobotRow, TickView, TraceSink};
use crate::{Error, RobotId};

struct Robot {
    pose: Pose,
    motion: MotionPhase,
    role: RoleState,
    opinion: Color,
    decision: Option<DecisionState>,
    hop: HopState,
    election: ElectionState,
    eval: Option<EvalState>,
    confidence: ConfidenceState,
    observations: ObservationGate,
    relay: RelayBuffer,
    fault: FaultState,
}

struct RngBank {
    motion: Vec<ChaCha8Rng>,
    ground: Vec<ChaCha8Rng>,
    decision: Vec<ChaCha8Rng>,
    membership: Vec<ChaCha8Rng>,
    fault: Vec<ChaCha8Rng>,
    delivery: Vec<ChaCha8Rng>,
}

impl RngBank {
    fn new(seed: u64, n: usize) -> RngBank {
        let make = |kind| {
            (0..n as RobotId)
                .map(|i| robot_stream(seed, i, kind))
                .collect()
        };
        RngBank {
            motion: make(StreamKind::Motion),
            ground: make(StreamKind::GroundNoise),
            decision: make(StreamKind::Decision),
            membership: make(StreamKind::Membership),
            fault: make(StreamKind::FaultTrial),
            delivery: make(StreamKind::Delivery),
        }
    }
}

pub struct Simulation {
    cfg: SimConfig,
    seed: u64,
    dt: f64,
    grid: TileGrid,
    robots: Vec<Robot>,
    rngs: RngBank,
    outboxes: Vec<Vec<Message>>,
    inboxes: Vec<Vec<Message>>,
    tick: u64,
    tracker: ConvergenceTracker,
    member_counts: Vec<u32>,
    heatmap: CoverageHeatmap,
    messages_sent: u64,
    messages_delivered: u64,
    positions: Vec<(f64, f64)>,
    proposals: Vec<(f64, f64)>,
    scratch_neighbors: Vec<RobotId>,
    row_buffer: Vec<RobotRow>,
}

impl Simulation {
    pub fn new(cfg: &SimConfig, seed: u64) -> Result<Simulation, Error> {
        cfg.validate()?;
        let n = cfg.n_robots as usize;
        let dt = cfg.dt();

        let mut env_rng = global_stream(seed, StreamKind::EnvLayout);
        let grid = TileGrid::generate(
            cfg.arena_side_m,
            cfg.tile_size_m,
            cfg.black_fraction,
            &mut env_rng,
        )?;

        // Random non-overlapping placement.
        let mut placer = global_stream(seed, StreamKind::Placement);
        let lo = BODY_RADIUS;
        let hi = cfg.arena_side_m - BODY_RADIUS;
        if hi <= lo {
            return Err(Error::config("arena_side_m", "arena smaller than a robot"));
        }
        let mut positions: Vec<(f64, f64)> = Vec::with_capacity(n);
        let mut attempts = 0u64;
        while positions.len() < n {
            attempts += 1;
            if attempts > 1_000_000 {
                return Err(Error::config(
                    "n_robots",
                    "cannot place robots without overlap in this arena",
                ));
            }
            let cand = (placer.gen_range(lo..hi), placer.gen_range(lo..hi));
            let clear = positions.iter().all(|p| {
                ((p.0 - cand.0).powi(2) + (p.1 - cand.1).powi(2)).sqrt() >= BODY_DIAMETER
            });
            if clear {
                positions.push(cand);
            }
        }
        let headings: Vec<f64> = (0..n)
            .map(|_| placer.gen_range(0.0..2.0 * std::f64::consts::PI))
            .collect();

        // Exactly half the swarm starts on each opinion.
        let mut opinions = vec![Color::Black; n / 2];
        opinions.resize(n, Color::White);
        {
            use rand::seq::SliceRandom;
            let mut opinion_rng = global_stream(seed, StreamKind::InitialOpinion);
            opinions.shuffle(&mut opinion_rng);
        }

        let fixed_leader = if cfg.strategy == Strategy::LeaderBased && !cfg.leader_election {
            let mut pick = global_stream(seed, StreamKind::LeaderPick);
            Some(pick.gen_range(0..cfg.n_robots))
        } else {
            None
        };

        let mut rngs = RngBank::new(seed, n);
        let initial_s = cfg.fixed_s.unwrap_or(1);
        let robots: Vec<Robot> = (0..n)
            .map(|i| {
                let id = i as RobotId;
                let is_leader = fixed_leader == Some(id);
                Robot {
                    pose: Pose {
                        x: positions[i].0,
                        y: positions[i].1,
                        heading: headings[i],
                    },
                    motion: MotionPhase::sample_straight(&mut rngs.motion[i]),
                    role: RoleState::pending(),
                    opinion: opinions[i],
                    decision: None,
                    hop: if is_leader {
                        HopState::leader_root(initial_s)
                    } else {
                        let mut h = HopState::unset();
                        h.subset_param = initial_s;
                        h
                    },
                    election: match fixed_leader {
                        Some(l) => ElectionState::with_leader(l),
                        None => ElectionState::electing(id),
                    },
                    eval: if is_leader { Some(fresh_eval(cfg)) } else { None },
                    confidence: ConfidenceState::new(),
                    observations: ObservationGate::default(),
                    relay: RelayBuffer::default(),
                    fault: FaultState::default(),
                }
            })
            .collect();

        Ok(Simulation {
            dt,
            seed,
            grid,
            tracker: ConvergenceTracker::new(
                ConvergenceParams {
                    share_threshold: cfg.convergence_threshold,
                    hold_s: cfg.convergence_hold_s,
                },
                dt,
            ),
            member_counts: Vec::new(),
            heatmap: CoverageHeatmap::new(cfg.arena_side_m, cfg.heatmap_cell_m),
            messages_sent: 0,
            messages_delivered: 0,
            outboxes: vec![Vec::new(); n],
            inboxes: vec![Vec::new(); n],
            tick: 0,
            positions,
            proposals: vec![(0.0, 0.0); n],
            scratch_neighbors: Vec::new(),
            row_buffer: Vec::new(),
            robots,
            rngs,
            cfg: cfg.clone(),
        })
    }

    pub fn grid(&self) -> &TileGrid {
        &self.grid
    }

    fn comms_config(&self) -> CommsConfig {
        CommsConfig {
            range: self.cfg.comm_range_m,
            delivery_period: self.cfg.delivery_period,
            drop_probability: self.cfg.drop_probability,
        }
    }

    fn eval_params(&self) -> EvalParams {
        EvalParams {
            min_opinions: self.cfg.eval_min_opinions as usize,
            majority_ratio: self.cfg.eval_majority_ratio,
            hold_s: self.cfg.eval_hold_s,
            consistent_decisions: self.cfg.eval_consistent_k as usize,
            stage_timeout_s: self.cfg.eval_stage_timeout_s,
        }
    }

    fn confidence_params(&self) -> ConfidenceParams {
        ConfidenceParams {
            gain: self.cfg.confidence_gain,
            escalation_step: self.cfg.escalation_step,
        }
    }

    /// Runs to convergence or the configured horizon and produces the
    /// summary. A trace sink, when given, receives one view per tick.
    pub fn run(&mut self, mut sink: Option<&mut dyn TraceSink>) -> Result<RunSummary, Error> {
        if let Some(ref mut s) = sink {
            s.on_start(&self.grid, &self.cfg)?;
        }
        let max_ticks = self.cfg.max_ticks();
        let mut converged_at: Option<(Color, f64)> = None;
        while self.tick < max_ticks {
            let done = match sink {
                Some(ref mut s) => self.step(Some(&mut **s))?,
                None => self.step(None)?,
            };
            if converged_at.is_none() {
                if let Some(hit) = done {
                    converged_at = Some(hit);
                    if self.cfg.stop_at_convergence {
                        break;
                    }
                }
            }
        }

        let summary = self.summarize(converged_at);
        if let Some(ref mut s) = sink {
            s.on_finish(&summary, &self.heatmap)?;
        }
        Ok(summary)
    }

    fn summarize(&self, converged: Option<(Color, f64)>) -> RunSummary {
        let truth = self.grid.dominant_color();
        let cutoff_tick = converged
            .map(|(_, t)| (t / self.dt).round() as usize)
            .unwrap_or(self.member_counts.len().saturating_sub(1));
        let leader_eval = self
            .robots
            .iter()
            .filter_map(|r| r.eval.as_ref())
            .max_by_key(|e| e.subset_param);
        RunSummary {
            seed: self.seed,
            converged: converged.is_some(),
            decision: converged.map(|(c, _)| c),
            convergence_time_s: converged.map(|(_, t)| t),
            steady_subset_size: steady_subset_size(
                &self.member_counts,
                self.dt,
                self.cfg.steady_window_s,
                cutoff_tick,
            ),
            morans_i: self.heatmap.morans_index(WeightScheme::Queen),
            outcome: match (converged, truth) {
                (Some((c, _)), Some(t)) if c == t => AccuracyOutcome::Correct,
                (Some(_), _) => AccuracyOutcome::Incorrect,
                (None, _) => AccuracyOutcome::Undecided,
            },
            ticks: self.tick,
            messages_sent: self.messages_sent,
            messages_delivered: self.messages_delivered,
            final_subset_param: leader_eval.map(|e| e.subset_param).or(self.cfg.fixed_s),
            leader_final_decision: leader_eval.and_then(|e| e.final_decision),
        }
    }

    /// One tick. Returns the decision when the convergence hold completes.
    fn step(&mut self, sink: Option<&mut dyn TraceSink>) -> Result<Option<(Color, f64)>, Error> {
        let cfg_strategy = self.cfg.strategy;
        let dt = self.dt;
        let n = self.robots.len();

        // (1) Fault scheduling: trials align with role-reassignment instants.
        for i in 0..n {
            self.robots[i].fault.advance(dt);
            if self.cfg.fault_prob > 0.0 && self.robots[i].role.expires_now() {
                let robot = &mut self.robots[i];
                robot.fault.trial(
                    self.cfg.fault_prob,
                    self.cfg.fault_duration_s,
                    &mut self.rngs.fault[i],
                );
            }
        }
        let faulty: Vec<bool> = self.robots.iter().map(|r| r.fault.is_faulty()).collect();

        // (2) Deliver last tick's outboxes.
        let index = NeighborIndex::build(&self.positions, self.cfg.comm_range_m, self.cfg.arena_side_m);
        let comms = self.comms_config();
        self.messages_delivered += deliver(
            &self.outboxes,
            &self.positions,
            &index,
            &comms,
            &faulty,
            self.tick,
            &mut self.rngs.delivery,
            &mut self.inboxes,
        );
        for outbox in &mut self.outboxes {
            outbox.clear();
        }

        // (3) Per-robot updates in id order. Robots transmit on the tick
        // before a delivery tick, so exchanges land on period multiples.
        // A malfunctioning robot is frozen outright: its protocol, decision,
        // and role timers all pause and resume where they left off.
        let transmit = is_delivery_tick(self.tick + 1, self.cfg.delivery_period);
        for i in 0..n {
            if !faulty[i] {
                self.update_robot(i, transmit)?;
            }
        }

        // (4) Motion (synchronous: proposals from previous positions).
        for i in 0..n {
            let robot = &self.robots[i];
            if robot.fault.is_faulty() {
                self.proposals[i] = self.positions[i];
                continue;
            }
            index.neighbors_of(
                i as RobotId,
                &self.positions,
                PROXIMITY_RANGE,
                &mut self.scratch_neighbors,
            );
            let neighbor_points: Vec<(f64, f64)> = self
                .scratch_neighbors
                .iter()
                .map(|&j| self.positions[j as usize])
                .collect();
            let (new_pose, new_phase) = step_motion(
                &robot.pose,
                &robot.motion,
                dt,
                &neighbor_points,
                self.cfg.arena_side_m,
                &mut self.rngs.motion[i],
            );
            self.proposals[i] = (new_pose.x, new_pose.y);
            let robot = &mut self.robots[i];
            robot.pose.heading = new_pose.heading;
            robot.motion = new_phase;
        }
        enforce_separation(&self.positions, &mut self.proposals);
        for i in 0..n {
            self.positions[i] = self.proposals[i];
            self.robots[i].pose.x = self.proposals[i].0;
            self.robots[i].pose.y = self.proposals[i].1;
        }
        #[cfg(debug_assertions)]
        self.assert_separation();

        // (5) Metrics.
        let mut members = 0u32;
        let mut black = 0usize;
        let mut white = 0usize;
        for robot in &self.robots {
            if robot.role.is_member() && !robot.fault.is_faulty() {
                members += 1;
                match robot.opinion {
                    Color::Black => black += 1,
                    Color::White => white += 1,
                }
                self.heatmap.deposit(robot.pose.x, robot.pose.y, dt);
            }
        }
        self.member_counts.push(members);
        let hit = self.tracker.observe(black, white);

        if let Some(sink) = sink {
            self.emit_trace(sink, members, black, white, cfg_strategy)?;
        }

        self.tick += 1;
        Ok(hit)
    }

    fn update_robot(&mut self, i: usize, transmit: bool) -> Result<(), Error> {
        let id = i as RobotId;
        let strategy = self.cfg.strategy;
        let dt = self.dt;
        let explore_mean = self.cfg.explore_mean_s;
        let gain = self.cfg.disseminate_gain_s;
        let eval_params = self.eval_params();
        let conf_params = self.confidence_params();
        let fixed_s = self.cfg.fixed_s;
        let refresh_ticks = (OBSERVATION_REFRESH_S / dt).round() as u64;

        // --- Inbox processing -------------------------------------------------
        let inbox = std::mem::take(&mut self.inboxes[i]);
        let mut hop_beacons: Vec<(u32, u32)> = Vec::new();
        let mut eval_opinions: Vec<(RobotId, Color)> = Vec::new();
        {
            let robot = &mut self.robots[i];
            for msg in &inbox {
                match msg.kind {
                    MessageKind::Election { candidate, epoch } => {
                        if self.cfg.leader_election
                            && robot.election.observe_candidate(id, candidate, epoch)
                        {
                            // New epoch invalidates the old structure.
                            robot.hop = HopState::unset();
                            robot.hop.subset_param = fixed_s.unwrap_or(1);
                            robot.eval = None;
                            hop_beacons.clear();
                        }
                    }
                    MessageKind::HopBeacon {
                        leader,
                        hop,
                        subset_param,
                        epoch,
                    } => {
                        let (accept, switched) =
                            robot.election.observe_leader_beacon(leader, epoch);
                        if switched {
                            robot.hop = HopState::unset();
                            robot.hop.subset_param = fixed_s.unwrap_or(subset_param);
                            robot.eval = None;
                            hop_beacons.clear();
                        }
                        if accept && robot.election.leader != Some(id) {
                            hop_beacons.push((hop, subset_param));
                        }
                    }
                    MessageKind::Opinion { origin, opinion } => {
                        match strategy {
                            Strategy::Distributed => {
                                // One confidence observation per novel
                                // (origin, opinion) sighting, whether it came
                                // directly or through a relay.
                                if fixed_s.is_none()
                                    && robot.observations.is_novel(
                                        origin,
                                        opinion,
                                        self.tick,
                                        refresh_ticks,
                                    )
                                {
                                    robot.confidence.observe(robot.opinion, opinion, &conf_params);
                                }
                                // Relays store only what they hear from the
                                // decision-maker itself.
                                if robot.role.role == Role::Relay && msg.sender == origin {
                                    robot.relay.ingest(origin, opinion, msg.tick);
                                }
                            }
                            Strategy::LeaderBased => {
                                if robot.election.leader == Some(id) && origin != id {
                                    eval_opinions.push((origin, opinion));
                                }
                            }
                            Strategy::FullSwarm => {}
                        }
                        if let Some(decision) = robot.decision.as_mut() {
                            if decision.is_disseminating() {
                                crate::dmvd::observe_opinion(decision, opinion);
                            }
                        }
                    }
                }
            }
        }
        self.inboxes[i] = inbox;

        // --- Leader-structure upkeep -----------------------------------------
        if strategy == Strategy::LeaderBased {
            let robot = &mut self.robots[i];
            let leads = robot.election.leader == Some(id);
            if leads {
                robot.hop.hop = Some(0);
                robot.hop.last_contact = 0.0;
                if let Some(eval) = robot.eval.as_mut() {
                    if fixed_s.is_none() {
                        eval.tick(eval_opinions.into_iter(), &eval_params, dt);
                    }
                }
            } else if robot.election.leader.is_some() {
                leader::update_hop(&mut robot.hop, &hop_beacons, dt);
            }

            if self.cfg.leader_election {
                let connected = robot.hop.hop.is_some();
                match robot.election.tick(id, connected, dt) {
                    ElectionEvent::BecameLeader => {
                        robot.hop = HopState::leader_root(fixed_s.unwrap_or(1));
                        robot.eval = Some(fresh_eval(&self.cfg));
                        robot.role.role = Role::DecisionMaking;
                        if robot.decision.is_none() {
                            robot.decision = Some(DecisionState::enter(
                                robot.opinion,
                                explore_mean,
                                &mut self.rngs.decision[i],
                            ));
                        }
                    }
                    ElectionEvent::StartedElection => {
                        robot.hop = HopState::unset();
                        robot.hop.subset_param = fixed_s.unwrap_or(1);
                        robot.eval = None;
                    }
                    ElectionEvent::None => {}
                }
            }
        }

        // --- Role update (sticky; the leader re-qualifies unconditionally) ---
        {
            let leads = self.robots[i].election.leader == Some(id)
                && strategy == Strategy::LeaderBased;
            let member_hop = leader::is_member(&self.robots[i].hop);
            let selection_p = match strategy {
                Strategy::Distributed => match fixed_s {
                    Some(s) => probability_for(s),
                    None => self.robots[i].confidence.selection_probability(&conf_params),
                },
                _ => 0.0,
            };
            let nonmember_role = match strategy {
                Strategy::Distributed => Role::Relay,
                _ => Role::Idle,
            };
            let robot = &mut self.robots[i];
            let reassigned = maybe_reassign(
                &mut robot.role,
                |rng| match strategy {
                    Strategy::FullSwarm => true,
                    Strategy::LeaderBased => leads || member_hop,
                    Strategy::Distributed => {
                        let mut wrapped = RngCoreAdapter(rng);
                        membership_draw(selection_p, &mut wrapped)
                    }
                },
                nonmember_role,
                self.cfg.mean_role_time_s,
                dt,
                &mut self.rngs.membership[i],
            );
            if reassigned {
                if robot.role.is_member() {
                    if robot.decision.is_none() {
                        robot.decision = Some(DecisionState::enter(
                            robot.opinion,
                            explore_mean,
                            &mut self.rngs.decision[i],
                        ));
                    }
                } else {
                    robot.decision = None;
                    if robot.role.role == Role::Relay {
                        robot.relay.clear();
                    }
                }
            }
        }

        // --- Decision loop ----------------------------------------------------
        let noise_p = self.cfg.noise_p;
        {
            let robot = &mut self.robots[i];
            if let Some(mut decision) = robot.decision.take() {
                // Phase transitions happen at tick start, after last tick's
                // inbox has been folded into the finished phase.
                match &mut decision.phase {
                    DecisionPhase::Exploration { total, elapsed, matched } if *elapsed >= *total => {
                        let quality = quality_estimate(*matched, *total);
                        decision.phase =
                            begin_dissemination(quality, gain, &mut self.rngs.decision[i]);
                    }
                    DecisionPhase::Dissemination { total, elapsed, observed } if *elapsed >= *total => {
                        let observed = std::mem::take(observed);
                        let adopted =
                            adopt_opinion(&observed, decision.opinion, &mut self.rngs.decision[i]);
                        decision.opinion = adopted;
                        robot.opinion = adopted;
                        decision.phase =
                            begin_exploration(explore_mean, &mut self.rngs.decision[i]);
                    }
                    _ => {}
                }

                match &mut decision.phase {
                    DecisionPhase::Exploration { .. } => {
                        let sample = self.grid.sense(
                            robot.pose.x,
                            robot.pose.y,
                            noise_p,
                            &mut self.rngs.ground[i],
                        )?;
                        crate::dmvd::explore_tick(&mut decision, sample, dt);
                    }
                    DecisionPhase::Dissemination { elapsed, .. } => {
                        *elapsed += dt;
                    }
                }
                robot.decision = Some(decision);
            }
        }

        // --- Outbox -----------------------------------------------------------
        if transmit && !self.robots[i].fault.is_faulty() {
            let robot = &self.robots[i];
            let tick = self.tick;
            let mut queued: Vec<Message> = Vec::new();
            if let Some(decision) = robot.decision.as_ref() {
                if decision.is_disseminating() {
                    queued.push(Message {
                        sender: id,
                        tick,
                        kind: MessageKind::Opinion {
                            origin: id,
                            opinion: decision.opinion,
                        },
                    });
                }
            }
            match strategy {
                Strategy::LeaderBased => {
                    if self.cfg.leader_election && robot.election.is_electing() {
                        queued.push(Message {
                            sender: id,
                            tick,
                            kind: MessageKind::Election {
                                candidate: robot.election.min_candidate,
                                epoch: robot.election.epoch,
                            },
                        });
                    } else if let (Some(leader), Some(hop)) =
                        (robot.election.leader, robot.hop.hop)
                    {
                        let subset_param = robot
                            .eval
                            .as_ref()
                            .map(|e| e.subset_param)
                            .unwrap_or(robot.hop.subset_param);
                        queued.push(Message {
                            sender: id,
                            tick,
                            kind: MessageKind::HopBeacon {
                                leader,
                                hop,
                                subset_param,
                                epoch: robot.election.epoch,
                            },
                        });
                    }
                }
                Strategy::Distributed => {
                    if robot.role.role == Role::Relay {
                        for (origin, opinion) in robot.relay.entries() {
                            queued.push(Message {
                                sender: id,
                                tick,
                                kind: MessageKind::Opinion { origin, opinion },
                            });
                        }
                    }
                }
                Strategy::FullSwarm => {}
            }
            self.messages_sent += queued.len() as u64;
            self.outboxes[i] = queued;
        }

        Ok(())
    }

    #[cfg(debug_assertions)]
    fn assert_separation(&self) {
        let index = NeighborIndex::build(&self.positions, BODY_DIAMETER, self.cfg.arena_side_m);
        let mut near = Vec::new();
        for i in 0..self.positions.len() {
            index.neighbors_of(i as RobotId, &self.positions, BODY_DIAMETER, &mut near);
            for &j in &near {
                let (ax, ay) = self.positions[i];
                let (bx, by) = self.positions[j as usize];
                let d = ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt();
                debug_assert!(
                    d >= BODY_DIAMETER - 1e-9,
                    "tick {}: robots {} and {} at distance {}",
                    self.tick,
                    i,
                    j,
                    d
                );
            }
            let (x, y) = self.positions[i];
            debug_assert!(x >= 0.0 && x < self.cfg.arena_side_m);
            debug_assert!(y >= 0.0 && y < self.cfg.arena_side_m);
        }
    }

    fn emit_trace(
        &mut self,
        sink: &mut dyn TraceSink,
        members: u32,
        black: usize,
        white: usize,
        strategy: Strategy,
    ) -> Result<(), Error> {
        let conf_params = self.confidence_params();
        self.row_buffer.clear();
        for (i, robot) in self.robots.iter().enumerate() {
            self.row_buffer.push(RobotRow {
                id: i as RobotId,
                x: robot.pose.x,
                y: robot.pose.y,
                heading: robot.pose.heading,
                role: robot.role.role,
                opinion: robot.opinion,
                faulty: robot.fault.is_faulty(),
                disseminating: robot
                    .decision
                    .as_ref()
                    .is_some_and(|d| d.is_disseminating()),
                hop: robot.hop.hop,
                subset_param: match strategy {
                    Strategy::Distributed => self
                        .cfg
                        .fixed_s
                        .unwrap_or_else(|| robot.confidence.subset_param(&conf_params)),
                    _ => robot.hop.subset_param,
                },
                alpha: robot.confidence.alpha,
                selection_p: match strategy {
                    Strategy::Distributed => match self.cfg.fixed_s {
                        Some(s) => probability_for(s),
                        None => robot.confidence.selection_probability(&conf_params),
                    },
                    _ => 0.0,
                },
            });
        }
        let leader = self
            .robots
            .iter()
            .enumerate()
            .find(|(i, r)| r.election.leader == Some(*i as RobotId))
            .map(|(i, r)| {
                let eval = r.eval.as_ref();
                LeaderRow {
                    leader: i as RobotId,
                    subset_param: eval.map(|e| e.subset_param).unwrap_or(r.hop.subset_param),
                    collected: eval.map(|e| e.collected.len()).unwrap_or(0),
                    majority_ratio: eval.and_then(|e| e.majority()).map(|(_, r)| r),
                    hold_timer: eval.map(|e| e.hold_timer).unwrap_or(0.0),
                    decisions: eval.map(|e| e.decisions.len()).unwrap_or(0),
                }
            });
        sink.on_tick(&TickView {
            tick: self.tick,
            time_s: self.tick as f64 * self.dt,
            robots: &self.row_buffer,
            leader,
            members,
            opinion_black: black,
            opinion_white: white,
            messages_sent: self.messages_sent,
            messages_delivered: self.messages_delivered,
        })?;
        Ok(())
    }
}

fn fresh_eval(cfg: &SimConfig) -> EvalState {
    let mut eval = EvalState::new();
    eval.subset_param = cfg.fixed_s.unwrap_or(1);
    eval
}

/// Adapter so the membership closure can use `Rng` ergonomics on the
/// `&mut dyn RngCore` it receives.
struct RngCoreAdapter<'a>(&'a mut dyn rand::RngCore);

impl rand::RngCore for RngCoreAdapter<'_> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}

/// Convenience wrapper: one full run without tracing.
pub fn run_one(cfg: &SimConfig, seed: u64) -> Result<RunSummary, Error> {
    Simulation::new(cfg, seed)?.run(None)
}
