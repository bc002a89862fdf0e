//! Proceed / hesitate / abort selection.
//!
//! Every step the proposed action is simulated for one step against the worst
//! case. It is only taken if a verified evasion exists from the resulting
//! state; otherwise the ego tries holding its lateral position, and failing
//! that it executes the evasion verified at the previous step.

use crate::kinematics::{advance_longitudinal, step_unchecked, Action, Geometry, Limits, WorldState};
use crate::safety::{evasion_step_action, safe_evasion_exists, EvasionProfile, FollowerMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Proceed,
    Hesitate,
    Abort,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Proceed => "proceed",
            Strategy::Hesitate => "hesitate",
            Strategy::Abort => "abort",
        }
    }
}

/// Lateral speed below which a completed abort hands control back.
pub const ABORT_RELEASE_VY: f64 = 0.05;
/// Tolerance on the original-lane bound for ending an abort; the discrete
/// execution of the profile lands within millimetres of the bound.
pub const ABORT_RELEASE_PY_SLACK: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionState {
    /// Evasion verified from the state reached by the last accepted action.
    pub last_profile: EvasionProfile,
    pub abort_started_at: Option<f64>,
}

impl DecisionState {
    /// The ego starts inside the original lane, which is safe by assumption.
    pub fn initial(t: f64) -> Self {
        Self { last_profile: EvasionProfile::trivial(t), abort_started_at: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub strategy: Strategy,
    pub action: Action,
    pub state: DecisionState,
}

/// Lateral acceleration that cancels the lateral speed as fast as allowed.
pub fn hesitate_lateral(vy: f64, dt: f64, a_ym: f64) -> f64 {
    (-vy / dt).max(-a_ym).min(a_ym)
}

/// Source of evasion verdicts; swapped out in tests.
pub trait EvasionVerifier {
    fn verify(&self, w: &WorldState, mode: FollowerMode) -> Option<EvasionProfile>;
}

/// The closed-form worst-case analysis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WorstCase {
    pub lim: Limits,
    pub geo: Geometry,
}

impl EvasionVerifier for WorstCase {
    fn verify(&self, w: &WorldState, mode: FollowerMode) -> Option<EvasionProfile> {
        safe_evasion_exists(w, mode, &self.lim, &self.geo)
    }
}

/// One step of `action` with the leader braking fully and the follower doing
/// the worst its mode permits.
pub fn lookahead(w: &WorldState, action: &Action, mode: FollowerMode, lim: &Limits) -> WorldState {
    let dt = lim.dt;
    let ego = step_unchecked(&w.ego, action.ax, action.ay, dt);
    let mut leader = w.leader;
    (leader.px, leader.vx) = advance_longitudinal(leader.px, leader.vx, -lim.a_xd, dt);
    let follower_a = match mode {
        FollowerMode::Aggressive => lim.a_xa,
        FollowerMode::Cautious => -lim.a_xd,
    };
    let mut follower = w.follower;
    (follower.px, follower.vx) = advance_longitudinal(follower.px, follower.vx, follower_a, dt);
    WorldState { ego, leader, follower, t: w.t + dt }
}

pub fn decide<V: EvasionVerifier + ?Sized>(
    w: &WorldState,
    ds: &DecisionState,
    nn_action: Action,
    mode: FollowerMode,
    lim: &Limits,
    geo: &Geometry,
    verifier: &V,
) -> Decision {
    let mut state = *ds;
    if state.abort_started_at.is_some() {
        let home = w.ego.py <= geo.original_lane_bound() + ABORT_RELEASE_PY_SLACK && w.ego.vy.abs() <= ABORT_RELEASE_VY;
        if !home {
            return abort(w, state, lim);
        }
        state.abort_started_at = None;
    }

    let candidates = [
        (Strategy::Proceed, nn_action),
        (Strategy::Hesitate, Action::new(nn_action.ax, hesitate_lateral(w.ego.vy, lim.dt, lim.a_ym))),
    ];
    for (strategy, action) in candidates {
        let next = lookahead(w, &action, mode, lim);
        if let Some(profile) = verifier.verify(&next, mode) {
            return Decision { strategy, action, state: DecisionState { last_profile: profile, abort_started_at: None } };
        }
    }
    state.abort_started_at = Some(w.t);
    abort(w, state, lim)
}

fn abort(w: &WorldState, state: DecisionState, lim: &Limits) -> Decision {
    let profile = &state.last_profile;
    let elapsed = (w.t - profile.created_at).max(0.0);
    let action = evasion_step_action(profile, elapsed, lim.dt, w.ego.vy, lim);
    Decision { strategy: Strategy::Abort, action, state }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::KinematicState;
    use core::cell::Cell;

    /// Answers by strategy order: the n-th call returns `answers[n]`.
    struct Scripted {
        answers: [bool; 2],
        calls: Cell<usize>,
    }

    impl EvasionVerifier for Scripted {
        fn verify(&self, w: &WorldState, _: FollowerMode) -> Option<EvasionProfile> {
            let n = self.calls.get();
            self.calls.set(n + 1);
            self.answers.get(n).copied().unwrap_or(false).then(|| EvasionProfile { t1: 0.3, t_yf: 0.9, t2: 0.1, created_at: w.t })
        }
    }

    fn world() -> WorldState {
        WorldState {
            ego: KinematicState::new(0.0, 1.2, 25.0, 0.4),
            leader: KinematicState::in_lane(30.0, 3.5, 25.0),
            follower: KinematicState::in_lane(-30.0, 3.5, 25.0),
            t: 2.0,
        }
    }

    fn run(answers: [bool; 2], ds: &DecisionState) -> Decision {
        let v = Scripted { answers, calls: Cell::new(0) };
        decide(&world(), ds, Action::new(1.0, 2.0), FollowerMode::Aggressive, &Limits::default(), &Geometry::default(), &v)
    }

    fn previous() -> DecisionState {
        DecisionState { last_profile: EvasionProfile { t1: 0.5, t_yf: 1.2, t2: 0.0, created_at: 1.9 }, abort_started_at: None }
    }

    #[test]
    fn hesitate_examples() {
        assert!((hesitate_lateral(0.1, 0.1, 2.5) - -1.0).abs() < 1e-12);
        assert_eq!(hesitate_lateral(-0.5, 0.1, 2.5), 2.5);
        assert_eq!(hesitate_lateral(0.0, 0.1, 2.5), 0.0);
    }

    #[test]
    fn proceed_passes_action_through() {
        let d = run([true, true], &previous());
        assert_eq!(d.strategy, Strategy::Proceed);
        assert_eq!(d.action, Action::new(1.0, 2.0));
        assert!((d.state.last_profile.created_at - 2.1).abs() < 1e-12);
    }

    #[test]
    fn hesitate_damps_lateral_speed() {
        let d = run([false, true], &previous());
        assert_eq!(d.strategy, Strategy::Hesitate);
        assert_eq!(d.action.ax, 1.0);
        assert!((d.action.ay - hesitate_lateral(0.4, 0.1, 2.5)).abs() < 1e-12);
    }

    #[test]
    fn abort_executes_previous_profile_and_latches() {
        let ds = previous();
        let d = run([false, false], &ds);
        assert_eq!(d.strategy, Strategy::Abort);
        assert_eq!(d.state.last_profile, ds.last_profile);
        assert_eq!(d.state.abort_started_at, Some(2.0));
        // elapsed 0.1 s < t1: lateral push back, braking since t2 = 0
        assert!((d.action.ax - -6.0).abs() < 1e-9 && (d.action.ay - -2.5).abs() < 1e-9, "{:?}", d.action);
        // latched: even a verifier that accepts everything keeps aborting
        let again = run([true, true], &d.state);
        assert_eq!(again.strategy, Strategy::Abort);
    }

    #[test]
    fn latch_releases_in_original_lane() {
        let mut ds = previous();
        ds.abort_started_at = Some(1.0);
        let v = Scripted { answers: [true, true], calls: Cell::new(0) };
        let mut w = world();
        w.ego.py = 0.7;
        w.ego.vy = 0.01;
        let d = decide(&w, &ds, Action::new(0.0, 1.0), FollowerMode::Cautious, &Limits::default(), &Geometry::default(), &v);
        assert_eq!(d.strategy, Strategy::Proceed);
        assert_eq!(d.state.abort_started_at, None);
    }

    #[test]
    fn accepted_profile_is_verified_from_post_action_state() {
        let (lim, geo) = (Limits::default(), Geometry::default());
        let verifier = WorstCase { lim, geo };
        let w = world();
        let d = decide(&w, &DecisionState::initial(0.0), Action::new(0.0, 1.0), FollowerMode::Aggressive, &lim, &geo, &verifier);
        assert_ne!(d.strategy, Strategy::Abort);
        let next = lookahead(&w, &d.action, FollowerMode::Aggressive, &lim);
        assert_eq!(safe_evasion_exists(&next, FollowerMode::Aggressive, &lim, &geo), Some(d.state.last_profile));
    }
}
