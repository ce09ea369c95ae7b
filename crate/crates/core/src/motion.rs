//! Random-walk kinematics with proximity-based collision and wall avoidance.
//!
//! Robots are point masses with a heading, alternating straight runs
//! (exponential durations) with in-place rotations (uniform durations).
//! Avoidance is two-layered: a heading override steers away from the nearest
//! obstacle, and a hard merge-time clamp guarantees that no two robot centers
//! ever come closer than one body diameter.

use std::f64::consts::PI;

use rand::Rng;

use crate::rng::sample_exp_mean;

pub const MAX_SPEED: f64 = 0.32; // m/s
pub const BODY_DIAMETER: f64 = 0.17; // m
pub const BODY_RADIUS: f64 = BODY_DIAMETER / 2.0;
pub const STRAIGHT_MEAN_S: f64 = 40.0;
pub const ROTATE_MAX_S: f64 = 4.5;
/// Fixed rotation rate; U(0, 4.5 s) then spans up to 2.25 full turns.
pub const ROTATE_SPEED: f64 = PI; // rad/s
/// Range at which walls and other robots trigger the heading override.
pub const PROXIMITY_RANGE: f64 = 0.3; // m
pub const AVOID_MARGIN: f64 = 0.05; // m

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Radians, kept in [0, 2π).
    pub heading: f64,
}

impl Pose {
    pub fn distance_to(&self, other: &Pose) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    a.rem_euclid(2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    Straight,
    Rotating,
}

#[derive(Debug, Clone, Copy)]
pub struct MotionPhase {
    pub mode: PhaseMode,
    pub remaining: f64,
    /// Turn direction while rotating; resampled with each rotation phase.
    pub counterclockwise: bool,
}

impl MotionPhase {
    pub fn sample_straight(rng: &mut impl Rng) -> MotionPhase {
        MotionPhase {
            mode: PhaseMode::Straight,
            remaining: sample_straight_duration(rng),
            counterclockwise: true,
        }
    }

    pub fn sample_rotating(rng: &mut impl Rng) -> MotionPhase {
        MotionPhase {
            mode: PhaseMode::Rotating,
            remaining: sample_rotation_duration(rng),
            counterclockwise: rng.gen::<bool>(),
        }
    }
}

pub fn sample_straight_duration(rng: &mut impl Rng) -> f64 {
    sample_exp_mean(rng, STRAIGHT_MEAN_S)
}

pub fn sample_rotation_duration(rng: &mut impl Rng) -> f64 {
    rng.gen_range(0.0..ROTATE_MAX_S)
}

/// Heading override away from the nearest obstacle, if any.
///
/// Triggers on a neighbor center within `BODY_DIAMETER + AVOID_MARGIN`, or a
/// wall within `PROXIMITY_RANGE` that the robot is heading toward. Returns
/// the flee heading (directly away from the obstacle).
pub fn avoidance_heading(pose: &Pose, neighbors: &[(f64, f64)], arena_side: f64) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None; // (distance, flee heading)

    for &(nx, ny) in neighbors {
        let d = ((pose.x - nx).powi(2) + (pose.y - ny).powi(2)).sqrt();
        if d < BODY_DIAMETER + AVOID_MARGIN && best.is_none_or(|(bd, _)| d < bd) {
            let flee = if d > 1e-12 {
                (pose.y - ny).atan2(pose.x - nx)
            } else {
                pose.heading + PI
            };
            best = Some((d, wrap_angle(flee)));
        }
    }

    // Walls: (distance, inward flee heading, outward direction cosine test).
    let walls = [
        (pose.x, 0.0),                      // x = 0, flee +x
        (arena_side - pose.x, PI),          // x = side, flee -x
        (pose.y, PI / 2.0),                 // y = 0, flee +y
        (arena_side - pose.y, 3.0 * PI / 2.0), // y = side, flee -y
    ];
    for (d, flee) in walls {
        if d < PROXIMITY_RANGE && best.is_none_or(|(bd, _)| d < bd) {
            // Only react when actually heading toward that wall.
            let toward = wrap_angle(flee + PI);
            let cos = (pose.heading - toward).cos();
            if cos > 0.0 {
                best = Some((d, flee));
            }
        }
    }

    best.map(|(_, h)| h)
}

/// Advances one robot for one tick against the previous tick's world.
///
/// `neighbors` are other robot centers within `PROXIMITY_RANGE`. The returned
/// pose is clamped inside the arena; inter-robot separation is enforced
/// afterwards by [`enforce_separation`] once all proposals are known.
pub fn step_motion(
    pose: &Pose,
    phase: &MotionPhase,
    dt: f64,
    neighbors: &[(f64, f64)],
    arena_side: f64,
    rng: &mut impl Rng,
) -> (Pose, MotionPhase) {
    let mut phase = *phase;
    // Phase switches exactly when its remaining time runs out, at tick start.
    if phase.remaining <= 0.0 {
        phase = match phase.mode {
            PhaseMode::Straight => MotionPhase::sample_rotating(rng),
            PhaseMode::Rotating => MotionPhase::sample_straight(rng),
        };
    }

    let mut next = *pose;
    if let Some(h) = avoidance_heading(pose, neighbors, arena_side) {
        next.heading = h;
    }

    match phase.mode {
        PhaseMode::Straight => {
            next.x += MAX_SPEED * dt * next.heading.cos();
            next.y += MAX_SPEED * dt * next.heading.sin();
        }
        PhaseMode::Rotating => {
            let sign = if phase.counterclockwise { 1.0 } else { -1.0 };
            next.heading = wrap_angle(next.heading + sign * ROTATE_SPEED * dt);
        }
    }

    next.x = next.x.clamp(BODY_RADIUS, arena_side - BODY_RADIUS);
    next.y = next.y.clamp(BODY_RADIUS, arena_side - BODY_RADIUS);
    phase.remaining -= dt;
    (next, phase)
}

/// Merge step: processes proposals in robot order and reverts any that would
/// bring two centers closer than one body diameter. Robot `i` is checked
/// against already-merged positions of `j < i` and previous positions of
/// `j > i`, so a feasible previous configuration stays feasible.
pub fn enforce_separation(previous: &[(f64, f64)], proposed: &mut [(f64, f64)]) {
    let n = previous.len();
    let min_sq = BODY_DIAMETER * BODY_DIAMETER;
    for i in 0..n {
        let (px, py) = proposed[i];
        let mut blocked = false;
        for j in 0..n {
            if j == i {
                continue;
            }
            let (ox, oy) = if j < i { proposed[j] } else { previous[j] };
            let d2 = (px - ox).powi(2) + (py - oy).powi(2);
            if d2 < min_sq - 1e-12 {
                blocked = true;
                break;
            }
        }
        if blocked {
            proposed[i] = previous[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{robot_stream, StreamKind};
    use rand::Rng;

    const DT: f64 = 0.1;

    fn straight(remaining: f64) -> MotionPhase {
        MotionPhase {
            mode: PhaseMode::Straight,
            remaining,
            counterclockwise: true,
        }
    }

    #[test]
    fn straight_step_advances_at_max_speed() {
        let pose = Pose { x: 4.0, y: 4.0, heading: 0.0 };
        let mut rng = robot_stream(0, 0, StreamKind::Motion);
        let (next, _) = step_motion(&pose, &straight(10.0), DT, &[], 8.0, &mut rng);
        assert!((next.x - 4.032).abs() < 1e-12);
        assert!((next.y - 4.0).abs() < 1e-12);
    }

    #[test]
    fn expired_rotation_resamples_straight() {
        let pose = Pose { x: 4.0, y: 4.0, heading: 0.0 };
        let phase = MotionPhase {
            mode: PhaseMode::Rotating,
            remaining: 0.0,
            counterclockwise: true,
        };
        let mut rng = robot_stream(0, 1, StreamKind::Motion);
        let (_, next_phase) = step_motion(&pose, &phase, DT, &[], 8.0, &mut rng);
        assert_eq!(next_phase.mode, PhaseMode::Straight);
        assert!(next_phase.remaining > -DT);
    }

    #[test]
    fn straight_duration_sampler_mean() {
        let mut rng = robot_stream(0, 2, StreamKind::Motion);
        let n = 10_000;
        let mean: f64 = (0..n).map(|_| sample_straight_duration(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 40.0).abs() < 2.0, "mean {mean}");
    }

    #[test]
    fn lone_robot_mid_arena_has_no_override() {
        let pose = Pose { x: 4.0, y: 4.0, heading: 1.0 };
        assert!(avoidance_heading(&pose, &[], 8.0).is_none());
    }

    #[test]
    fn wall_approach_turns_away_and_stays_inside() {
        let pose = Pose { x: 0.1, y: 4.0, heading: PI };
        let over = avoidance_heading(&pose, &[], 8.0).expect("near-wall override");
        assert!(over.cos() > 0.0, "flee heading should point inward");
        let mut rng = robot_stream(0, 3, StreamKind::Motion);
        let mut p = pose;
        let mut phase = straight(50.0);
        for _ in 0..200 {
            let (np, nph) = step_motion(&p, &phase, DT, &[], 8.0, &mut rng);
            p = np;
            phase = nph;
            assert!(p.x >= BODY_RADIUS - 1e-12 && p.x <= 8.0 - BODY_RADIUS + 1e-12);
        }
    }

    #[test]
    fn receding_from_wall_is_not_overridden() {
        let pose = Pose { x: 0.1, y: 4.0, heading: 0.0 };
        assert!(avoidance_heading(&pose, &[], 8.0).is_none());
    }

    #[test]
    fn head_on_pair_keeps_body_separation() {
        let mut rng_a = robot_stream(0, 4, StreamKind::Motion);
        let mut rng_b = robot_stream(0, 5, StreamKind::Motion);
        let mut prev = [(3.8, 4.0), (4.2, 4.0)];
        let mut poses = [
            Pose { x: prev[0].0, y: prev[0].1, heading: 0.0 },
            Pose { x: prev[1].0, y: prev[1].1, heading: PI },
        ];
        let mut phases = [straight(100.0), straight(100.0)];
        for _ in 0..100 {
            let (a, pa) = step_motion(&poses[0], &phases[0], DT, &[prev[1]], 8.0, &mut rng_a);
            let (b, pb) = step_motion(&poses[1], &phases[1], DT, &[prev[0]], 8.0, &mut rng_b);
            let mut proposed = [(a.x, a.y), (b.x, b.y)];
            enforce_separation(&prev, &mut proposed);
            poses = [
                Pose { x: proposed[0].0, y: proposed[0].1, heading: a.heading },
                Pose { x: proposed[1].0, y: proposed[1].1, heading: b.heading },
            ];
            phases = [pa, pb];
            prev = proposed;
            let d = poses[0].distance_to(&poses[1]);
            assert!(d >= BODY_DIAMETER - 1e-9, "separation violated: {d}");
        }
    }

    #[test]
    fn multi_robot_rollout_preserves_invariants() {
        let arena = 4.0;
        let n = 12;
        let mut rngs: Vec<_> = (0..n)
            .map(|i| robot_stream(99, i as u32, StreamKind::Motion))
            .collect();
        let mut placer = robot_stream(99, crate::rng::GLOBAL, StreamKind::Placement);
        let mut prev: Vec<(f64, f64)> = Vec::new();
        while prev.len() < n {
            let cand = (
                placer.gen_range(BODY_RADIUS..arena - BODY_RADIUS),
                placer.gen_range(BODY_RADIUS..arena - BODY_RADIUS),
            );
            if prev
                .iter()
                .all(|p| ((p.0 - cand.0).powi(2) + (p.1 - cand.1).powi(2)).sqrt() >= BODY_DIAMETER)
            {
                prev.push(cand);
            }
        }
        let mut poses: Vec<Pose> = prev
            .iter()
            .map(|&(x, y)| Pose { x, y, heading: placer.gen_range(0.0..2.0 * PI) })
            .collect();
        let mut phases: Vec<MotionPhase> = (0..n).map(|_| straight(0.0)).collect();

        for _ in 0..2_000 {
            let mut proposed = Vec::with_capacity(n);
            for i in 0..n {
                let neighbors: Vec<(f64, f64)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| prev[j])
                    .filter(|&(x, y)| {
                        ((x - poses[i].x).powi(2) + (y - poses[i].y).powi(2)).sqrt()
                            <= PROXIMITY_RANGE
                    })
                    .collect();
                let (np, nph) = step_motion(&poses[i], &phases[i], DT, &neighbors, arena, &mut rngs[i]);
                phases[i] = nph;
                poses[i].heading = np.heading;
                proposed.push((np.x, np.y));
            }
            enforce_separation(&prev, &mut proposed);
            for i in 0..n {
                poses[i].x = proposed[i].0;
                poses[i].y = proposed[i].1;
                assert!(poses[i].x >= 0.0 && poses[i].x < arena);
                assert!(poses[i].y >= 0.0 && poses[i].y < arena);
            }
            for i in 0..n {
                for j in i + 1..n {
                    let d = poses[i].distance_to(&poses[j]);
                    assert!(d >= BODY_DIAMETER - 1e-9, "pair ({i},{j}) at {d}");
                }
            }
            prev = proposed;
        }
    }
}
