//! Planar double-integrator vehicles and rectangle collision checks.
//!
//! Positions are vehicle centers. `x` runs along the road, `y` across it with
//! the original lane centered at `y = 0` and the target lane at `y = w_l`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KinematicState {
    pub px: f64,
    pub py: f64,
    pub vx: f64,
    pub vy: f64,
}

impl KinematicState {
    pub const fn new(px: f64, py: f64, vx: f64, vy: f64) -> Self {
        Self { px, py, vx, vy }
    }

    /// A vehicle driving straight along a lane center.
    pub const fn in_lane(px: f64, lane_y: f64, vx: f64) -> Self {
        Self { px, py: lane_y, vx, vy: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.px.is_finite() && self.py.is_finite() && self.vx.is_finite() && self.vy.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Action {
    pub ax: f64,
    pub ay: f64,
}

impl Action {
    pub const fn new(ax: f64, ay: f64) -> Self {
        Self { ax, ay }
    }

    /// Clamp into the actuator box `[-a_xd, a_xa] x [-a_ym, a_ym]`.
    pub fn clamped(self, lim: &Limits) -> Self {
        Self { ax: self.ax.clamp(-lim.a_xd, lim.a_xa), ay: self.ay.clamp(-lim.a_ym, lim.a_ym) }
    }

    pub fn within(&self, lim: &Limits) -> bool {
        self.ax >= -lim.a_xd && self.ax <= lim.a_xa && self.ay.abs() <= lim.a_ym
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Lane width; also the lateral coordinate of the target lane center.
    pub w_l: f64,
    /// Vehicle width.
    pub w_v: f64,
    /// Vehicle length.
    pub l_v: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self { w_l: 3.5, w_v: 2.0, l_v: 5.0 }
    }
}

impl Geometry {
    /// Largest `py` at which the ego is completely inside the original lane.
    pub fn original_lane_bound(&self) -> f64 {
        (self.w_l - self.w_v) / 2.0
    }

    /// Smallest `py` at which the ego is completely inside the target lane.
    pub fn target_lane_bound(&self) -> f64 {
        (self.w_l + self.w_v) / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_v > 0.0 && self.w_v < self.w_l && self.l_v > 0.0) {
            return Err(Error::InvalidArgument("geometry needs 0 < w_v < w_l and l_v > 0"));
        }
        Ok(())
    }
}

/// Actuation limits shared by all three vehicles, plus the control step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub a_xa: f64,
    pub a_xd: f64,
    pub a_ym: f64,
    /// Minimum center-to-center longitudinal gap the safety analysis keeps.
    pub p_m: f64,
    pub dt: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self { a_xa: 4.0, a_xd: 6.0, a_ym: 2.5, p_m: 6.0, dt: 0.1 }
    }
}

impl Limits {
    pub fn validate(&self) -> Result<()> {
        let all = [self.a_xa, self.a_xd, self.a_ym, self.p_m, self.dt];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("limits must be finite and strictly positive"))
        }
    }
}

/// Ego, leader and follower at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WorldState {
    pub ego: KinematicState,
    pub leader: KinematicState,
    pub follower: KinematicState,
    pub t: f64,
}

impl WorldState {
    pub fn is_finite(&self) -> bool {
        self.ego.is_finite() && self.leader.is_finite() && self.follower.is_finite() && self.t.is_finite()
    }

    /// Shift every longitudinal position by `dx`.
    pub fn translated(mut self, dx: f64) -> Self {
        self.ego.px += dx;
        self.leader.px += dx;
        self.follower.px += dx;
        self
    }
}

/// Advance one vehicle by `dt` under constant acceleration.
///
/// Longitudinal speed never goes negative: if braking would reverse the
/// vehicle inside the step, it stops exactly at the stop time and stays there.
pub fn step_kinematics(s: &KinematicState, a: &Action, dt: f64) -> Result<KinematicState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument("dt must be positive and finite"));
    }
    if !s.is_finite() || !a.ax.is_finite() || !a.ay.is_finite() {
        return Err(Error::NonFinite("step_kinematics input"));
    }
    Ok(step_unchecked(s, a.ax, a.ay, dt))
}

pub(crate) fn step_unchecked(s: &KinematicState, ax: f64, ay: f64, dt: f64) -> KinematicState {
    let (px, vx) = advance_longitudinal(s.px, s.vx, ax, dt);
    KinematicState { px, py: s.py + s.vy * dt + 0.5 * ay * dt * dt, vx, vy: s.vy + ay * dt }
}

/// Position and speed after `dt` of constant acceleration with a standstill floor.
pub(crate) fn advance_longitudinal(p: f64, v: f64, a: f64, dt: f64) -> (f64, f64) {
    let v_end = v + a * dt;
    if v_end >= 0.0 {
        (p + v * dt + 0.5 * a * dt * dt, v_end)
    } else if v <= 0.0 {
        (p, 0.0)
    } else {
        // a < 0 here; the vehicle stops at v / -a
        (p + v * v / (-2.0 * a), 0.0)
    }
}

/// Axis-aligned overlap of two identical vehicle rectangles. Touching is not a collision.
pub fn collision(a: &KinematicState, b: &KinematicState, g: &Geometry) -> bool {
    (a.px - b.px).abs() < g.l_v && (a.py - b.py).abs() < g.w_v
}
