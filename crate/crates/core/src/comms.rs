//! Range-limited broadcast: neighborhoods, message delivery, and faults.
//!
//! Delivery is synchronous: everything queued during tick `T` is handed to
//! receivers at tick `T + 1`, and only on ticks that are multiples of the
//! delivery period (the reduced-communication disturbance). Faulty robots
//! neither send nor receive.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::environment::Color;
use crate::RobotId;

/// Broadcast payloads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MessageKind {
    /// A decision-making robot's opinion, possibly forwarded by relays;
    /// `origin` is always the decision-making robot that produced it.
    Opinion { origin: RobotId, opinion: Color },
    /// Leader-structure beacon: leader id, sender's hop count, the subset
    /// size parameter, and the election epoch.
    HopBeacon {
        leader: RobotId,
        hop: u32,
        subset_param: u32,
        epoch: u32,
    },
    /// Min-id leader election beacon.
    Election { candidate: RobotId, epoch: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Message {
    pub sender: RobotId,
    pub tick: u64,
    pub kind: MessageKind,
}

#[derive(Debug, Clone, Copy)]
pub struct CommsConfig {
    pub range: f64,
    pub delivery_period: u32,
    pub drop_probability: f64,
}

impl Default for CommsConfig {
    fn default() -> Self {
        CommsConfig {
            range: 1.0,
            delivery_period: 1,
            drop_probability: 0.0,
        }
    }
}

/// Whether messages are exchanged on this tick.
pub fn is_delivery_tick(tick: u64, period: u32) -> bool {
    tick.is_multiple_of(period.max(1) as u64)
}

/// Uniform-grid spatial index over robot positions.
///
/// Cell size equals the query radius, so a query only ever inspects the 3x3
/// block of cells around a robot.
pub struct NeighborIndex {
    cell: f64,
    cols: usize,
    cells: Vec<Vec<RobotId>>,
}

impl NeighborIndex {
    pub fn build(positions: &[(f64, f64)], radius: f64, arena_side: f64) -> NeighborIndex {
        let cell = radius.max(1e-6);
        let cols = (arena_side / cell).ceil().max(1.0) as usize;
        let mut cells = vec![Vec::new(); cols * cols];
        for (i, &(x, y)) in positions.iter().enumerate() {
            let cx = ((x / cell) as usize).min(cols - 1);
            let cy = ((y / cell) as usize).min(cols - 1);
            cells[cy * cols + cx].push(i as RobotId);
        }
        NeighborIndex { cell, cols, cells }
    }

    /// All robots `j != i` with `d(i, j) <= radius`, ascending by id.
    pub fn neighbors_of(
        &self,
        i: RobotId,
        positions: &[(f64, f64)],
        radius: f64,
        out: &mut Vec<RobotId>,
    ) {
        out.clear();
        let (x, y) = positions[i as usize];
        let cx = ((x / self.cell) as isize).min(self.cols as isize - 1);
        let cy = ((y / self.cell) as isize).min(self.cols as isize - 1);
        let r2 = radius * radius;
        for dy in -1..=1 {
            for dx in -1..=1 {
                let nx = cx + dx;
                let ny = cy + dy;
                if nx < 0 || ny < 0 || nx >= self.cols as isize || ny >= self.cols as isize {
                    continue;
                }
                for &j in &self.cells[ny as usize * self.cols + nx as usize] {
                    if j == i {
                        continue;
                    }
                    let (ox, oy) = positions[j as usize];
                    if (x - ox).powi(2) + (y - oy).powi(2) <= r2 {
                        out.push(j);
                    }
                }
            }
        }
        out.sort_unstable();
    }
}

/// Delivers last tick's outboxes into per-robot inboxes.
///
/// Every message from a non-faulty sender reaches each non-faulty neighbor
/// independently, dropped with `drop_probability` drawn from the receiver's
/// own stream. Off-period ticks deliver nothing. Returns the number of
/// delivered messages.
#[allow(clippy::too_many_arguments)]
pub fn deliver(
    outboxes: &[Vec<Message>],
    positions: &[(f64, f64)],
    index: &NeighborIndex,
    cfg: &CommsConfig,
    faulty: &[bool],
    tick: u64,
    drop_rngs: &mut [ChaCha8Rng],
    inboxes: &mut [Vec<Message>],
) -> u64 {
    for inbox in inboxes.iter_mut() {
        inbox.clear();
    }
    if !is_delivery_tick(tick, cfg.delivery_period) {
        return 0;
    }
    let mut delivered = 0;
    let mut neighbors = Vec::new();
    for (sender, outbox) in outboxes.iter().enumerate() {
        if outbox.is_empty() || faulty[sender] {
            continue;
        }
        index.neighbors_of(sender as RobotId, positions, cfg.range, &mut neighbors);
        for &receiver in &neighbors {
            let r = receiver as usize;
            if faulty[r] {
                continue;
            }
            for msg in outbox {
                if cfg.drop_probability > 0.0
                    && drop_rngs[r].gen::<f64>() < cfg.drop_probability
                {
                    continue;
                }
                inboxes[r].push(*msg);
                delivered += 1;
            }
        }
    }
    delivered
}

/// Per-robot intermittent-failure state. A faulty robot is frozen: it does
/// not move, send, or receive until the fault runs out.
#[derive(Debug, Clone, Copy, Default)]
pub struct FaultState {
    remaining: f64,
}

impl FaultState {
    pub fn is_faulty(&self) -> bool {
        self.remaining > 0.0
    }

    pub fn advance(&mut self, dt: f64) {
        if self.remaining > 0.0 {
            self.remaining -= dt;
        }
    }

    /// One malfunction trial, run at each role-reassignment instant while
    /// healthy.
    pub fn trial(&mut self, fault_prob: f64, fault_duration: f64, rng: &mut impl Rng) {
        if self.is_faulty() || fault_prob <= 0.0 {
            return;
        }
        if rng.gen::<f64>() < fault_prob {
            self.remaining = fault_duration;
        }
    }
}
