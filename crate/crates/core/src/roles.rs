//! Sticky role assignment: decision-making vs. idle/relay.
//!
//! A robot keeps its role for an exponentially distributed duration and
//! re-evaluates membership only when that duration runs out; the membership
//! rule itself belongs to the active subset-construction strategy and is
//! passed in as a closure so draws happen only at expiry instants.

use rand::Rng;

use crate::rng::sample_exp_mean;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Role {
    DecisionMaking,
    Idle,
    Relay,
}

impl Role {
    pub fn is_member(self) -> bool {
        self == Role::DecisionMaking
    }

    pub fn code(self) -> u8 {
        match self {
            Role::DecisionMaking => 0,
            Role::Idle => 1,
            Role::Relay => 2,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RoleState {
    pub role: Role,
    pub remaining: f64,
}

impl RoleState {
    /// Initial state that re-evaluates on the very first tick.
    pub fn pending() -> RoleState {
        RoleState {
            role: Role::Idle,
            remaining: 0.0,
        }
    }

    /// Whether this tick is a reassignment instant.
    pub fn expires_now(&self) -> bool {
        self.remaining <= 0.0
    }

    pub fn is_member(&self) -> bool {
        self.role.is_member()
    }
}

/// One tick of the role state machine. At expiry the membership closure is
/// consulted and a fresh duration drawn; otherwise the timer just runs down.
/// Returns true when a reassignment happened.
pub fn maybe_reassign(
    state: &mut RoleState,
    membership: impl FnOnce(&mut dyn rand::RngCore) -> bool,
    nonmember_role: Role,
    mean_role_time: f64,
    dt: f64,
    rng: &mut impl Rng,
) -> bool {
    let reassigned = if state.expires_now() {
        let member = membership(rng);
        state.role = if member { Role::DecisionMaking } else { nonmember_role };
        state.remaining = sample_exp_mean(rng, mean_role_time);
        true
    } else {
        false
    };
    state.remaining -= dt;
    reassigned
}
