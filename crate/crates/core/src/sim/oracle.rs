use crate::kinematics::{advance_longitudinal, collision, step_unchecked, Geometry, Limits, WorldState};
use crate::safety::{evasion_step_action, EvasionProfile, FollowerMode};

/// Slack on the lateral end position, covering the fine-step discretization.
const LATERAL_SLACK: f64 = 1e-3;

/// Brute-force check of an evasion: integrate the ego through `profile` in
/// steps of `dt_fine` while the leader brakes fully and the follower does the
/// worst its mode allows. True iff nothing collides and the ego is back inside
/// the original lane once the profile ends. `profile` times count from `w`.
pub fn worst_case_rollout_safe(w: &WorldState, profile: &EvasionProfile, mode: FollowerMode, dt_fine: f64, lim: &Limits, g: &Geometry) -> bool {
    if !(dt_fine > 0.0 && dt_fine <= 0.01) || !w.is_finite() {
        return false;
    }
    let follower_a = match mode {
        FollowerMode::Aggressive => lim.a_xa,
        FollowerMode::Cautious => -lim.a_xd,
    };
    let (mut ego, mut leader, mut follower) = (w.ego, w.leader, w.follower);
    if collision(&ego, &leader, g) || collision(&ego, &follower, g) {
        return false;
    }
    let steps = libm::ceil(profile.t_yf / dt_fine) as usize;
    for k in 0..steps {
        let a = evasion_step_action(profile, k as f64 * dt_fine, dt_fine, ego.vy, lim);
        ego = step_unchecked(&ego, a.ax, a.ay, dt_fine);
        (leader.px, leader.vx) = advance_longitudinal(leader.px, leader.vx, -lim.a_xd, dt_fine);
        (follower.px, follower.vx) = advance_longitudinal(follower.px, follower.vx, follower_a, dt_fine);
        if collision(&ego, &leader, g) || collision(&ego, &follower, g) {
            return false;
        }
    }
    ego.py <= g.original_lane_bound() + LATERAL_SLACK
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::KinematicState;
    use crate::safety::safe_evasion_exists;

    fn world(py: f64, vy: f64, gap_lead: f64, gap_follow: f64) -> WorldState {
        WorldState {
            ego: KinematicState::new(0.0, py, 25.0, vy),
            leader: KinematicState::in_lane(gap_lead, 3.5, 25.0),
            follower: KinematicState::in_lane(-gap_follow, 3.5, 25.0),
            t: 0.0,
        }
    }

    #[test]
    fn trivial_profile_in_lane_is_safe() {
        let (lim, g) = (Limits::default(), Geometry::default());
        assert!(worst_case_rollout_safe(&world(0.0, 0.0, 1e6, 1e6), &EvasionProfile::trivial(0.0), FollowerMode::Aggressive, 0.01, &lim, &g));
    }

    #[test]
    fn verified_profile_passes() {
        let (lim, g) = (Limits::default(), Geometry::default());
        let w = world(1.75, 0.5, 30.0, 30.0);
        for mode in [FollowerMode::Aggressive, FollowerMode::Cautious] {
            let p = safe_evasion_exists(&w, mode, &lim, &g).unwrap();
            assert!(worst_case_rollout_safe(&w, &p, mode, 0.01, &lim, &g));
        }
    }

    #[test]
    fn corrupted_profile_fails() {
        let (lim, g) = (Limits::default(), Geometry::default());
        // accelerating all the way into a braking leader starting p_m ahead
        let w = world(2.5, 0.0, lim.p_m, 1e6);
        let (t1, t_yf) = crate::safety::lateral_evasion_times(2.5, 0.0, &lim, &g).unwrap();
        let p = EvasionProfile { t1, t_yf, t2: t_yf, created_at: 0.0 };
        assert!(!worst_case_rollout_safe(&w, &p, FollowerMode::Aggressive, 0.01, &lim, &g));
    }

    #[test]
    fn wrong_lateral_profile_fails() {
        let (lim, g) = (Limits::default(), Geometry::default());
        let w = world(1.75, 0.0, 1e6, 1e6);
        let p = EvasionProfile { t1: 0.1, t_yf: 0.2, t2: 0.0, created_at: 0.0 };
        assert!(!worst_case_rollout_safe(&w, &p, FollowerMode::Aggressive, 0.01, &lim, &g));
    }
}
