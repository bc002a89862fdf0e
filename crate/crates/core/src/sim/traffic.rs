use crate::drivers::{follower_accel, leader_accel, FollowerDriver, LeaderProfile};
use crate::kinematics::{advance_longitudinal, Geometry, KinematicState, Limits, WorldState};
use crate::safety::FollowerMode;

use super::Scenario;

/// Motion of the leader and follower around the ego.
pub trait Traffic {
    /// Ground-truth follower mode, when there is one.
    fn true_mode(&self) -> Option<FollowerMode>;

    /// Leader and follower one step after `w`.
    fn advance(&mut self, w: &WorldState, lim: &Limits, g: &Geometry) -> (KinematicState, KinematicState);
}

fn moved(s: &KinematicState, a: f64, dt: f64) -> KinematicState {
    let (px, vx) = advance_longitudinal(s.px, s.vx, a, dt);
    KinematicState { px, vx, ..*s }
}

/// Scripted leader and an IDM follower of fixed mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdmTraffic {
    pub mode: FollowerMode,
    pub driver: FollowerDriver,
    pub leader: LeaderProfile,
}

impl IdmTraffic {
    pub fn new(sc: &Scenario) -> Self {
        Self { mode: sc.mode, driver: sc.driver, leader: sc.leader }
    }
}

impl Traffic for IdmTraffic {
    fn true_mode(&self) -> Option<FollowerMode> {
        Some(self.mode)
    }

    fn advance(&mut self, w: &WorldState, lim: &Limits, g: &Geometry) -> (KinematicState, KinematicState) {
        let a_l = leader_accel(&w.leader, &self.leader, lim.dt);
        let a_f = follower_accel(w, self.mode, &self.driver, g);
        (moved(&w.leader, a_l, lim.dt), moved(&w.follower, a_f, lim.dt))
    }
}

/// A follower that holds its speed, then at `start` accelerates at `boost`
/// until it is within `close_to` of the leader, and from then on follows the
/// leader with `driver`. The leader cruises.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScriptedTraffic {
    pub start: f64,
    pub boost: f64,
    pub close_to: f64,
    pub driver: FollowerDriver,
    closed: bool,
}

impl ScriptedTraffic {
    pub fn new(start: f64, boost: f64, close_to: f64, driver: FollowerDriver) -> Self {
        Self { start, boost, close_to, driver, closed: false }
    }
}

impl Traffic for ScriptedTraffic {
    fn true_mode(&self) -> Option<FollowerMode> {
        Some(FollowerMode::Aggressive)
    }

    fn advance(&mut self, w: &WorldState, lim: &Limits, g: &Geometry) -> (KinematicState, KinematicState) {
        self.closed |= w.leader.px - w.follower.px <= self.close_to;
        let a_f = if self.closed {
            self.driver.accel_behind(&w.follower, &w.leader, g)
        } else if w.t >= self.start - 1e-9 {
            self.boost
        } else {
            0.0
        };
        (moved(&w.leader, 0.0, lim.dt), moved(&w.follower, a_f, lim.dt))
    }
}

/// Everyone at 30 m/s with 20 m between leader and follower; the follower
/// starts closing the gap at 4 m/s² after 2 s until 17 m remain, then holds
/// that spacing (IDM with a 0.2 s headway, whose equilibrium at 30 m/s is 17 m).
pub fn illustrative(g: &Geometry) -> (WorldState, ScriptedTraffic) {
    let w = WorldState {
        ego: KinematicState::in_lane(0.0, 0.0, 30.0),
        leader: KinematicState::in_lane(ILLUSTRATIVE_LEAD_GAP, g.w_l, 30.0),
        follower: KinematicState::in_lane(ILLUSTRATIVE_LEAD_GAP - 20.0, g.w_l, 30.0),
        t: 0.0,
    };
    (w, ScriptedTraffic::new(2.0, 4.0, 17.0, FollowerDriver::new(6.0, 0.2, 0.0)))
}

/// Ego-to-leader spacing at the start.
pub const ILLUSTRATIVE_LEAD_GAP: f64 = 12.9;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_follower_phases() {
        let (g, lim) = (Geometry::default(), Limits::default());
        let (mut w, mut tr) = illustrative(&g);
        let mut accel_from = None;
        let mut closest = f64::INFINITY;
        for k in 0..60 {
            w.t = k as f64 * lim.dt;
            let v_prev = w.follower.vx;
            (w.leader, w.follower) = tr.advance(&w, &lim, &g);
            if accel_from.is_none() && w.follower.vx > v_prev {
                accel_from = Some(k as f64 * lim.dt);
            }
            assert_eq!(w.leader.vx, 30.0);
            closest = closest.min(w.leader.px - w.follower.px);
        }
        assert!((accel_from.unwrap() - 2.0).abs() < 1e-9);
        assert!(closest <= 17.0 && closest > 10.0, "{closest}");
    }
}
