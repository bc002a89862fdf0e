use alloc::vec::Vec;

use crate::decision::hesitate_lateral;
use crate::kinematics::{advance_longitudinal, Action, Geometry, Limits, WorldState};

/// Enumeration MPC over bang-bang lateral profiles and constant longitudinal accelerations.
#[derive(Debug, Clone, PartialEq)]
pub struct MpcConfig {
    pub horizon: usize,
    /// Candidate durations of the full-lateral-acceleration phase toward the target center.
    pub switch_times: Vec<f64>,
    pub accels: Vec<f64>,
    pub effort_x: f64,
    pub effort_y: f64,
    pub progress: f64,
    /// Cost per predicted step spent short of the target lane.
    pub time: f64,
    /// Comfort bound on the change of lateral acceleration between consecutive steps.
    pub max_accel_change: f64,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            horizon: 30,
            switch_times: (0..=30).map(|i| i as f64 * 0.1).collect(),
            accels: (0..=20).map(|i| -6.0 + i as f64 * 0.5).collect(),
            effort_x: 1.0,
            effort_y: 1.0,
            progress: 2.0,
            time: 0.0,
            max_accel_change: 5.0,
        }
    }
}

const MAX_HORIZON: usize = 256;

/// First action of the cheapest feasible candidate.
///
/// Each candidate is rolled out for `horizon` steps against constant-velocity
/// predictions of the leader and follower. A candidate is infeasible when,
/// while any part of the ego is over the lane boundary, it comes within `p_m`
/// of either vehicle. If nothing is feasible the ego brakes fully and damps its
/// lateral speed.
pub fn plan_mpc(w: &WorldState, cfg: &MpcConfig, lim: &Limits, g: &Geometry) -> Action {
    let h = cfg.horizon.min(MAX_HORIZON);
    let dt = lim.dt;
    let bound = g.original_lane_bound();
    let dir = if w.ego.py <= g.w_l { 1.0 } else { -1.0 };

    // ego positions per longitudinal candidate are recomputed on demand; the
    // others' predictions are shared
    let mut leader_px = [0.0; MAX_HORIZON];
    let mut follower_px = [0.0; MAX_HORIZON];
    for k in 0..h {
        let t = (k + 1) as f64 * dt;
        leader_px[k] = w.leader.px + w.leader.vx * t;
        follower_px[k] = w.follower.px + w.follower.vx * t;
    }

    let mut best: Option<(f64, Action)> = None;
    let mut lat_py = [0.0; MAX_HORIZON];
    let mut ego_px = [0.0; MAX_HORIZON];
    for &ts in &cfg.switch_times {
        let Some((first_ay, lat_cost)) = lateral_candidate(w, ts, dir, h, cfg, lim, g, &mut lat_py) else {
            continue;
        };
        let exposed: Option<usize> = lat_py[..h].iter().position(|py| *py > bound);
        for &ax in &cfg.accels {
            if ax < -lim.a_xd || ax > lim.a_xa {
                continue;
            }
            let cost = lat_cost + cfg.effort_x * ax * ax * h as f64;
            if best.as_ref().is_some_and(|(c, _)| cost >= *c) {
                continue;
            }
            if let Some(first) = exposed {
                let (mut p, mut v) = (w.ego.px, w.ego.vx);
                for slot in ego_px.iter_mut().take(h) {
                    (p, v) = advance_longitudinal(p, v, ax, dt);
                    *slot = p;
                }
                let clash = (first..h).any(|k| {
                    lat_py[k] > bound && ((ego_px[k] - leader_px[k]).abs() < lim.p_m || (ego_px[k] - follower_px[k]).abs() < lim.p_m)
                });
                if clash {
                    continue;
                }
            }
            best = Some((cost, Action::new(ax, first_ay)));
        }
    }
    match best {
        Some((_, a)) => a,
        None => Action::new(-lim.a_xd, hesitate_lateral(w.ego.vy, dt, lim.a_ym)),
    }
}

/// Lateral rollout for one switch time: full acceleration toward the target
/// center for `ts`, then the strongest damping of lateral speed. Returns the
/// first lateral action and the lateral part of the cost, or `None` if the
/// comfort bound is violated.
#[allow(clippy::too_many_arguments)]
fn lateral_candidate(w: &WorldState, ts: f64, dir: f64, h: usize, cfg: &MpcConfig, lim: &Limits, g: &Geometry, py_out: &mut [f64; MAX_HORIZON]) -> Option<(f64, f64)> {
    let dt = lim.dt;
    let push_steps = libm::round(ts / dt) as usize;
    let crossed = g.target_lane_bound();
    let (mut py, mut vy) = (w.ego.py, w.ego.vy);
    let mut cost = 0.0;
    let mut first = 0.0;
    let mut prev: Option<f64> = None;
    for (k, slot) in py_out.iter_mut().enumerate().take(h) {
        let ay = if k < push_steps { dir * lim.a_ym } else { hesitate_lateral(vy, dt, lim.a_ym) };
        if let Some(p) = prev {
            if (ay - p).abs() > cfg.max_accel_change + 1e-9 {
                return None;
            }
        }
        if k == 0 {
            first = ay;
        }
        prev = Some(ay);
        py += vy * dt + 0.5 * ay * dt * dt;
        vy += ay * dt;
        *slot = py;
        let miss = py - g.w_l;
        cost += cfg.effort_y * ay * ay + cfg.progress * miss * miss;
        if py < crossed {
            cost += cfg.time;
        }
    }
    Some((first, cost))
}
