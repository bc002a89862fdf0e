//! Behavior of the two target-lane vehicles.
//!
//! The follower runs the Intelligent Driver Model behind either the ego
//! (cautious, yielding) or the leader (aggressive, closing the gap). The leader
//! holds a constant scripted acceleration between standstill and a speed cap.

use crate::kinematics::{Geometry, KinematicState, WorldState};
use crate::safety::FollowerMode;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdmParams {
    pub a_max: f64,
    pub a_dec: f64,
    pub v_des: f64,
    /// Jam spacing (bumper to bumper).
    pub h_s: f64,
    /// Desired time gap.
    pub t_g: f64,
}

/// Lowest desired speed handed to the model; keeps `v / v_des` finite behind a stopped predecessor.
const MIN_DESIRED_SPEED: f64 = 1.0;

/// IDM acceleration, clamped to `[-a_dec, a_max]`.
///
/// `gap` is the bumper-to-bumper distance to the predecessor and `dv` the
/// closing speed (own speed minus predecessor speed). A non-positive gap means
/// the vehicles overlap and yields full braking.
pub fn idm_accel(v: f64, gap: f64, dv: f64, p: &IdmParams) -> f64 {
    if !(gap > 0.0) {
        return -p.a_dec;
    }
    let dynamic = v * p.t_g + v * dv / (2.0 * libm::sqrt(p.a_max * p.a_dec));
    let s_star = p.h_s + dynamic.max(0.0);
    let ratio = v / p.v_des;
    let free = ratio * ratio * ratio * ratio;
    let inter = (s_star / gap) * (s_star / gap);
    (p.a_max * (1.0 - free - inter)).clamp(-p.a_dec, p.a_max)
}

/// Per-driver IDM traits; the desired speed is set relative to whoever is followed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FollowerDriver {
    pub a_max: f64,
    pub a_dec: f64,
    pub h_s: f64,
    pub t_g: f64,
    /// Desired speed surplus over the predecessor's current speed.
    pub speed_surplus: f64,
}

impl FollowerDriver {
    pub const H_S_RANGE: (f64, f64) = (5.0, 8.0);
    pub const T_G_RANGE: (f64, f64) = (1.0, 2.0);
    pub const SURPLUS_RANGE: (f64, f64) = (0.0, 5.0);

    pub fn new(h_s: f64, t_g: f64, speed_surplus: f64) -> Self {
        Self { a_max: 4.0, a_dec: 6.0, h_s, t_g, speed_surplus }
    }

    /// Draw uniformly from the jam-spacing, time-gap and surplus ranges.
    pub fn sample<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        let (h0, h1) = Self::H_S_RANGE;
        let (t0, t1) = Self::T_G_RANGE;
        let (s0, s1) = Self::SURPLUS_RANGE;
        Self::new(rng.gen_range(h0..=h1), rng.gen_range(t0..=t1), rng.gen_range(s0..=s1))
    }

    pub fn params_behind(&self, predecessor_speed: f64) -> IdmParams {
        IdmParams {
            a_max: self.a_max,
            a_dec: self.a_dec,
            v_des: (predecessor_speed + self.speed_surplus).max(MIN_DESIRED_SPEED),
            h_s: self.h_s,
            t_g: self.t_g,
        }
    }

    /// IDM acceleration of `me` following `predecessor`.
    pub fn accel_behind(&self, me: &KinematicState, predecessor: &KinematicState, g: &Geometry) -> f64 {
        let gap = predecessor.px - me.px - g.l_v;
        idm_accel(me.vx, gap, me.vx - predecessor.vx, &self.params_behind(predecessor.vx))
    }
}

/// Follower acceleration: cautious drivers follow the ego, aggressive ones the leader.
pub fn follower_accel(w: &WorldState, mode: FollowerMode, d: &FollowerDriver, g: &Geometry) -> f64 {
    let predecessor = match mode {
        FollowerMode::Cautious => &w.ego,
        FollowerMode::Aggressive => &w.leader,
    };
    d.accel_behind(&w.follower, predecessor, g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaderProfile {
    pub a_xl: f64,
    pub v_floor: f64,
    pub v_cap: f64,
}

impl LeaderProfile {
    pub const DEFAULT_V_CAP: f64 = 40.0;

    pub fn new(a_xl: f64) -> Self {
        Self { a_xl, v_floor: 0.0, v_cap: Self::DEFAULT_V_CAP }
    }
}

/// Scripted leader acceleration for the next step of length `dt`, trimmed so
/// the speed stays within `[v_floor, v_cap]`.
pub fn leader_accel(leader: &KinematicState, prof: &LeaderProfile, dt: f64) -> f64 {
    let v_next = leader.vx + prof.a_xl * dt;
    if prof.a_xl > 0.0 && v_next > prof.v_cap {
        ((prof.v_cap - leader.vx) / dt).max(0.0)
    } else if prof.a_xl < 0.0 && v_next < prof.v_floor {
        ((prof.v_floor - leader.vx) / dt).min(0.0)
    } else {
        prof.a_xl
    }
}
