//! Worst-case evasion analysis.
//!
//! From any world state the ego must keep a way back into the original lane
//! that stays collision-free while the leader brakes as hard as it can and the
//! follower does the worst thing its assessed mode allows. The evasion is the
//! fastest lateral return (bang-bang at `a_ym`) paired with an
//! accelerate-then-brake longitudinal profile. Everything here is closed form
//! apart from the bisection for the acceleration duration `t2`.

use crate::error::{Error, Result};
use crate::kinematics::{Action, Geometry, Limits, WorldState};

/// Parameters of a verified abort back to the original lane.
///
/// Times are measured from `created_at`: lateral accel is `-a_ym` on
/// `[0, t1)`, `+a_ym` on `[t1, t_yf)`; longitudinal accel is `+a_xa` on
/// `[0, t2)` and `-a_xd` on `[t2, t_yf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvasionProfile {
    pub t1: f64,
    pub t_yf: f64,
    pub t2: f64,
    pub created_at: f64,
}

impl EvasionProfile {
    /// Nothing to evade: the ego is (and stays) inside the original lane.
    pub const fn trivial(created_at: f64) -> Self {
        Self { t1: 0.0, t_yf: 0.0, t2: 0.0, created_at }
    }
}

/// Behavior hypothesis for the follower in the target lane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FollowerMode {
    /// Closes the gap; worst case accelerates at `a_xa`.
    Aggressive,
    /// Yields to the ego; worst case still brakes at `a_xd`.
    Cautious,
}

impl FollowerMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FollowerMode::Aggressive => "aggressive",
            FollowerMode::Cautious => "cautious",
        }
    }
}

/// Switch time `t1` and completion time `t_yf` of the fastest lateral return
/// to `py = (w_l - w_v)/2` with zero lateral speed.
///
/// When the ego is already inside the original lane and moving away from the
/// target lane, the result is `(0, time to damp vy)`. When it is moving back
/// so fast that the `-a_ym`/`+a_ym` form would need a negative `t1`, the
/// return is pure `+a_ym` damping, which ends below the boundary.
pub fn lateral_evasion_times(py0: f64, vy0: f64, lim: &Limits, g: &Geometry) -> Result<(f64, f64)> {
    lateral_plan(py0, vy0, lim, g).map(|p| (p.t1, p.t_yf))
}

#[derive(Debug, Clone, Copy)]
struct LateralPlan {
    t1: f64,
    t_yf: f64,
    /// Whether the ego is above the original-lane boundary at any time before `t_yf`.
    exposed: bool,
}

fn lateral_plan(py0: f64, vy0: f64, lim: &Limits, g: &Geometry) -> Result<LateralPlan> {
    if !py0.is_finite() || !vy0.is_finite() {
        return Err(Error::NonFinite("lateral state"));
    }
    let a = lim.a_ym;
    let bound = g.original_lane_bound();
    if py0 <= bound && vy0 <= 0.0 {
        return Ok(LateralPlan { t1: 0.0, t_yf: -vy0 / a, exposed: false });
    }
    let radicand = (py0 + vy0 * vy0 / (2.0 * a) - bound) / a;
    if py0 <= bound && radicand <= 0.0 {
        // braking at -a_ym stops before the boundary
        let t = vy0 / a;
        return Ok(LateralPlan { t1: t, t_yf: t, exposed: false });
    }
    if !(radicand >= 0.0) {
        return Err(Error::NoLateralSolution { py0, vy0 });
    }
    // u is the time spent moving back toward the boundary after vy crosses zero
    let u = libm::sqrt(radicand);
    let t1 = u + vy0 / a;
    if t1 < 0.0 {
        return Ok(LateralPlan { t1: 0.0, t_yf: -vy0 / a, exposed: true });
    }
    Ok(LateralPlan { t1, t_yf: 2.0 * u + vy0 / a, exposed: true })
}

/// Minimum-headway margin against a leader braking at `a_xd` when the ego
/// brakes over the whole `[0, t_yf]` (requires the ego to still be moving at
/// `t_yf`). Negative means the gap never drops to `p_m`.
pub fn headway_c1(w: &WorldState, t_yf: f64, lim: &Limits) -> f64 {
    let (p0, v0) = (w.ego.px, w.ego.vx);
    let (pl, vl) = (w.leader.px, w.leader.vx);
    let (a_xd, a_xld) = (lim.a_xd, lim.a_xd);
    if vl / a_xld < t_yf {
        p0 - pl + v0 * t_yf - a_xd * t_yf * t_yf / 2.0 - vl * vl / (2.0 * a_xld) + lim.p_m
    } else {
        p0 - pl + (v0 - vl) * t_yf - (a_xd - a_xld) * t_yf * t_yf / 2.0 + lim.p_m
    }
}

/// Stopping-distance margin against a braking leader when the ego stops
/// before `t_yf`. Negative means safe.
pub fn headway_c2(w: &WorldState, lim: &Limits) -> f64 {
    let (p0, v0) = (w.ego.px, w.ego.vx);
    let (pl, vl) = (w.leader.px, w.leader.vx);
    p0 - pl + v0 * v0 / (2.0 * lim.a_xd) - vl * vl / (2.0 * lim.a_xd) + lim.p_m
}

const T2_RESOLUTION: f64 = 1e-4;

/// Longest `t2 <= t_yf` for which accelerating at `a_xa` and then braking keeps
/// at least `p_m` to a leader braking at `a_xd`, over `[0, t_yf]`.
///
/// The minimum leader gap strictly decreases in `t2`, so bisection to 1e-4 s
/// is exact up to resolution; the returned value is always on the safe side.
pub fn max_accel_duration_t2(w: &WorldState, t_yf: f64, lim: &Limits) -> f64 {
    if !(t_yf > 0.0) {
        return 0.0;
    }
    let feasible = |t2: f64| leader_min_gap(w, t_yf, t2, lim) >= lim.p_m;
    if !feasible(0.0) {
        return 0.0;
    }
    if feasible(t_yf) {
        return t_yf;
    }
    let (mut lo, mut hi) = (0.0, t_yf);
    while hi - lo > T2_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Left-hand side of the follower constraint for an aggressive follower:
/// the ego-to-follower gap at `t_yf` minus `p_m`. Positive means the gap holds.
pub fn follower_margin_aggressive(w: &WorldState, t_yf: f64, t2: f64, lim: &Limits) -> f64 {
    let (p0, v0) = (w.ego.px, w.ego.vx);
    let (pf, vf) = (w.follower.px, w.follower.vx);
    let (a_xa, a_xd, a_xfa) = (lim.a_xa, lim.a_xd, lim.a_xa);
    let v_peak = v0 + a_xa * t2;
    let follower = pf + vf * t_yf + a_xfa * t_yf * t_yf / 2.0;
    let ego = if t2 + v_peak / a_xd < t_yf {
        p0 + v0 * t2 + a_xa * t2 * t2 / 2.0 + v_peak * v_peak / (2.0 * a_xd)
    } else {
        let tb = t_yf - t2;
        p0 + v0 * t2 + a_xa * t2 * t2 / 2.0 + v_peak * tb - a_xd * tb * tb / 2.0
    };
    ego - follower - lim.p_m
}

/// Whether the ego keeps more than `p_m` ahead of the follower on `[0, t_yf]`
/// while executing the `(t2, t_yf)` longitudinal profile.
///
/// Aggressive: the follower accelerates at `a_xa`; the gap is concave in time
/// so the end-point margin plus the current gap decide it. Cautious: the
/// follower brakes at `a_xd` to a standstill; the gap can dip in the middle so
/// the exact minimum is used.
pub fn follower_safe(w: &WorldState, t_yf: f64, t2: f64, mode: FollowerMode, lim: &Limits) -> bool {
    let now = w.ego.px - w.follower.px;
    if !(now > lim.p_m) {
        return false;
    }
    match mode {
        FollowerMode::Aggressive => follower_margin_aggressive(w, t_yf, t2, lim) > 0.0,
        FollowerMode::Cautious => {
            let ego = ego_evasion_motion(w, t2, lim);
            let follower = Motion::constant(w.follower.px, w.follower.vx, -lim.a_xd);
            min_gap(&ego, &follower, t_yf) > lim.p_m
        }
    }
}

/// A verified evasion from `w`, or `None` when no profile survives the worst case.
pub fn safe_evasion_exists(w: &WorldState, mode: FollowerMode, lim: &Limits, g: &Geometry) -> Option<EvasionProfile> {
    let lat = lateral_plan(w.ego.py, w.ego.vy, lim, g).ok()?;
    if !lat.exposed {
        return Some(EvasionProfile { t1: lat.t1, t_yf: lat.t_yf, t2: 0.0, created_at: w.t });
    }
    if !w.ego.is_finite() || !w.leader.is_finite() || !w.follower.is_finite() {
        return None;
    }
    let t_yf = lat.t_yf;
    let (v0, vl) = (w.ego.vx, w.leader.vx);
    if vl < v0 {
        let t_xf = v0 / lim.a_xd;
        let c = if t_xf >= t_yf { headway_c1(w, t_yf, lim) } else { headway_c2(w, lim) };
        if !(c < 0.0) {
            return None;
        }
    } else if !(w.leader.px - w.ego.px > lim.p_m) {
        // braking keeps the current gap from shrinking, so only the present one matters
        return None;
    }
    let t2 = max_accel_duration_t2(w, t_yf, lim);
    let profile = |t2| EvasionProfile { t1: lat.t1, t_yf, t2, created_at: w.t };
    if follower_safe(w, t_yf, t2, mode, lim) {
        Some(profile(t2))
    } else if t2 > 0.0 && follower_safe(w, t_yf, 0.0, mode, lim) {
        Some(profile(0.0))
    } else {
        None
    }
}

/// Instantaneous action of `profile` at `elapsed` seconds after its creation.
/// Past `t_yf` the ego keeps its lane: lateral speed damped, no longitudinal input.
pub fn evasion_action(profile: &EvasionProfile, elapsed: f64, vy: f64, lim: &Limits) -> Action {
    if elapsed >= profile.t_yf {
        return Action::new(0.0, lane_keeping_lateral(vy, lim));
    }
    let ay = if elapsed < profile.t1 { -lim.a_ym } else { lim.a_ym };
    let ax = if elapsed < profile.t2 { lim.a_xa } else { -lim.a_xd };
    Action::new(ax, ay)
}

/// The profile averaged over `[elapsed, elapsed + dt]`, so that a discrete
/// controller reproduces the profile's velocities exactly at step boundaries.
pub fn evasion_step_action(profile: &EvasionProfile, elapsed: f64, dt: f64, vy: f64, lim: &Limits) -> Action {
    let (t0, t1) = (elapsed, elapsed + dt);
    if t0 >= profile.t_yf {
        return Action::new(0.0, lane_keeping_lateral(vy, lim));
    }
    let end = t1.min(profile.t_yf);
    let ay = (-lim.a_ym * overlap(t0, end, 0.0, profile.t1) + lim.a_ym * overlap(t0, end, profile.t1, profile.t_yf)) / dt;
    let ax = (lim.a_xa * overlap(t0, end, 0.0, profile.t2) - lim.a_xd * overlap(t0, end, profile.t2, profile.t_yf)) / dt;
    Action::new(ax, ay)
}

fn lane_keeping_lateral(vy: f64, lim: &Limits) -> f64 {
    (-vy / lim.dt).clamp(-lim.a_ym, lim.a_ym)
}

fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// Minimum leader-minus-ego gap on `[0, t_yf]` with the leader braking at
/// `a_xd` and the ego following the `(t2, t_yf)` profile.
pub fn leader_min_gap(w: &WorldState, t_yf: f64, t2: f64, lim: &Limits) -> f64 {
    let leader = Motion::constant(w.leader.px, w.leader.vx, -lim.a_xd);
    min_gap(&leader, &ego_evasion_motion(w, t2, lim), t_yf)
}

fn ego_evasion_motion(w: &WorldState, t2: f64, lim: &Limits) -> Motion {
    Motion { p: w.ego.px, v: w.ego.vx, a1: lim.a_xa, switch: t2, a2: -lim.a_xd }
}

/// Longitudinal motion with two constant-acceleration phases and a standstill floor.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Motion {
    pub p: f64,
    pub v: f64,
    pub a1: f64,
    pub switch: f64,
    pub a2: f64,
}

impl Motion {
    pub fn constant(p: f64, v: f64, a: f64) -> Self {
        Self { p, v, a1: a, switch: f64::INFINITY, a2: a }
    }

    pub fn at(&self, t: f64) -> (f64, f64) {
        use crate::kinematics::advance_longitudinal as adv;
        if t <= self.switch {
            adv(self.p, self.v, self.a1, t)
        } else {
            let (p, v) = adv(self.p, self.v, self.a1, self.switch);
            adv(p, v, self.a2, t - self.switch)
        }
    }

    /// Acceleration actually in effect at `t`, zero once stopped.
    fn accel_at(&self, t: f64) -> f64 {
        let a = if t < self.switch { self.a1 } else { self.a2 };
        let (_, v) = self.at(t);
        if v <= 0.0 && a <= 0.0 {
            0.0
        } else {
            a
        }
    }

    fn breakpoints(&self, out: &mut [f64; 8], n: &mut usize) {
        let mut push = |t: f64| {
            if t.is_finite() && t > 0.0 {
                out[*n] = t;
                *n += 1;
            }
        };
        push(self.switch);
        if self.a1 < 0.0 && self.v > 0.0 {
            push(self.v / -self.a1);
        }
        if self.switch.is_finite() && self.a2 < 0.0 {
            let (_, v) = self.at(self.switch);
            if v > 0.0 {
                push(self.switch + v / -self.a2);
            }
        }
    }
}

/// Exact minimum of `front(t) - rear(t)` over `[0, horizon]`.
pub(crate) fn min_gap(front: &Motion, rear: &Motion, horizon: f64) -> f64 {
    let gap = |t: f64| front.at(t).0 - rear.at(t).0;
    let mut pts = [0.0; 8];
    let mut n = 0;
    front.breakpoints(&mut pts, &mut n);
    rear.breakpoints(&mut pts, &mut n);
    let pts = &mut pts[..n];
    pts.sort_unstable_by(f64::total_cmp);

    let mut best = gap(0.0).min(gap(horizon));
    let mut start = 0.0;
    for &bp in pts.iter().chain(core::iter::once(&horizon)) {
        let end = bp.min(horizon);
        if end > start {
            let mid = 0.5 * (start + end);
            let da = front.accel_at(mid) - rear.accel_at(mid);
            if da > 0.0 {
                let dv = front.at(start).1 - rear.at(start).1;
                let t_star = start - dv / da;
                if t_star > start && t_star < end {
                    best = best.min(gap(t_star));
                }
            }
            best = best.min(gap(end));
            start = end;
        }
        if bp >= horizon {
            break;
        }
    }
    best
}
