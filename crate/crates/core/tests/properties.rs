use proptest::prelude::*;
use safin_core::assessor::{classify, BehaviorLabel};
use safin_core::decision::{decide, DecisionState, WorstCase};
use safin_core::drivers::{idm_accel, IdmParams};
use safin_core::kinematics::{collision, step_kinematics, Action, Geometry, KinematicState, Limits, WorldState};
use safin_core::safety::{lateral_evasion_times, safe_evasion_exists, FollowerMode};
use safin_core::sim::worst_case_rollout_safe;

fn state() -> impl Strategy<Value = KinematicState> {
    (-100.0..100.0f64, -1.0..5.0f64, 0.0..40.0f64, -3.0..3.0f64).prop_map(|(px, py, vx, vy)| KinematicState::new(px, py, vx, vy))
}

fn mode() -> impl Strategy<Value = FollowerMode> {
    prop_oneof![Just(FollowerMode::Aggressive), Just(FollowerMode::Cautious)]
}

fn world() -> impl Strategy<Value = WorldState> {
    let g = Geometry::default();
    (0.0..3.5f64, 0.0..40.0f64, -2.5..2.5f64, 5.0..80.0f64, 0.0..40.0f64, 5.0..80.0f64, 0.0..40.0f64).prop_map(move |(py, vx, vy, lg, vl, fg, vf)| WorldState {
        ego: KinematicState::new(0.0, py, vx, vy),
        leader: KinematicState::in_lane(lg, g.w_l, vl),
        follower: KinematicState::in_lane(-fg, g.w_l, vf),
        t: 0.0,
    })
}

fn idm() -> impl Strategy<Value = IdmParams> {
    (5.0..8.0f64, 1.0..2.0f64, 1.0..45.0f64).prop_map(|(h_s, t_g, v_des)| IdmParams { a_max: 4.0, a_dec: 6.0, v_des, h_s, t_g })
}

proptest! {
    #[test]
    fn step_keeps_speed_non_negative(s in state(), ax in -6.0..4.0f64, ay in -2.5..2.5f64) {
        let n = step_kinematics(&s, &Action::new(ax, ay), 0.1).unwrap();
        prop_assert!(n.vx >= 0.0);
        prop_assert!(n.px >= s.px);
        prop_assert!((n.vy - (s.vy + ay * 0.1)).abs() < 1e-12);
    }

    #[test]
    fn step_matches_constant_acceleration_when_not_stopping(s in state(), ax in 0.0..4.0f64) {
        let n = step_kinematics(&s, &Action::new(ax, 0.0), 0.1).unwrap();
        prop_assert!((n.px - (s.px + s.vx * 0.1 + 0.5 * ax * 0.01)).abs() < 1e-9);
        prop_assert!((n.vx - (s.vx + ax * 0.1)).abs() < 1e-12);
    }

    #[test]
    fn collision_is_symmetric(a in state(), b in state()) {
        let g = Geometry::default();
        prop_assert_eq!(collision(&a, &b, &g), collision(&b, &a, &g));
    }

    #[test]
    fn idm_stays_within_bounds_and_rises_with_gap(v in 0.0..40.0f64, gap in 0.1..100.0f64, dv in -20.0..20.0f64, extra in 0.0..50.0f64, p in idm()) {
        let a = idm_accel(v, gap, dv, &p);
        prop_assert!((-6.0..=4.0).contains(&a));
        prop_assert!(idm_accel(v, gap + extra, dv, &p) >= a);
    }

    #[test]
    fn classify_is_translation_invariant(a in -6.0..4.0f64, a1 in -6.0..4.0f64, a0 in -6.0..4.0f64, th in 0.0..1.0f64, shift in -3.0..3.0f64) {
        // dyadic values keep the shifted distances exact
        let q = |x: f64| (x * 64.0).round() / 64.0;
        let (a, a1, a0, th, shift) = (q(a), q(a1), q(a0), q(th), q(shift));
        prop_assert_eq!(classify(a, a1, a0, th), classify(a + shift, a1 + shift, a0 + shift, th));
    }

    #[test]
    fn larger_threshold_never_makes_a_label_definite(a in -6.0..4.0f64, a1 in -6.0..4.0f64, a0 in -6.0..4.0f64, th in 0.0..1.0f64, more in 0.0..1.0f64) {
        if classify(a, a1, a0, th) == BehaviorLabel::Uncertain {
            prop_assert_eq!(classify(a, a1, a0, th + more), BehaviorLabel::Uncertain);
        }
    }

    #[test]
    fn lateral_times_solve_the_return(py0 in 0.76..4.0f64, vy0 in -1.0..2.5f64) {
        let (lim, g) = (Limits::default(), Geometry::default());
        let (t1, t_yf) = lateral_evasion_times(py0, vy0, &lim, &g).unwrap();
        prop_assert!(t1 >= 0.0 && t_yf >= t1);
        let a = lim.a_ym;
        let tb = t_yf - t1;
        let v_end = vy0 - a * t1 + a * tb;
        let p_end = py0 + vy0 * t1 - 0.5 * a * t1 * t1 + (vy0 - a * t1) * tb + 0.5 * a * tb * tb;
        prop_assert!(v_end.abs() < 1e-9);
        prop_assert!(p_end <= g.original_lane_bound() + 1e-9);
        if t1 > 0.0 {
            prop_assert!((p_end - g.original_lane_bound()).abs() < 1e-9);
        }
    }

    #[test]
    fn more_room_ahead_keeps_an_evasion(w in world(), m in mode(), extra in 0.0..30.0f64) {
        let (lim, g) = (Limits::default(), Geometry::default());
        if safe_evasion_exists(&w, m, &lim, &g).is_some() {
            let mut wider = w;
            wider.leader.px += extra;
            wider.follower.px -= extra;
            prop_assert!(safe_evasion_exists(&wider, m, &lim, &g).is_some());
        }
    }

    #[test]
    fn evasion_ignores_absolute_position(w in world(), m in mode(), dx in -500.0..500.0f64) {
        let (lim, g) = (Limits::default(), Geometry::default());
        let a = safe_evasion_exists(&w, m, &lim, &g).is_some();
        prop_assert_eq!(a, safe_evasion_exists(&w.translated(dx), m, &lim, &g).is_some());
    }

    #[test]
    fn decide_is_deterministic(w in world(), m in mode(), ax in -6.0..4.0f64, ay in -2.5..2.5f64) {
        let (lim, g) = (Limits::default(), Geometry::default());
        let v = WorstCase { lim, geo: g };
        let ds = DecisionState::initial(0.0);
        let a = decide(&w, &ds, Action::new(ax, ay), m, &lim, &g, &v);
        let b = decide(&w, &ds, Action::new(ax, ay), m, &lim, &g, &v);
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn verified_evasions_survive_the_fine_rollout(w in world(), m in mode()) {
        let (lim, g) = (Limits::default(), Geometry::default());
        if let Some(p) = safe_evasion_exists(&w, m, &lim, &g) {
            prop_assert!(worst_case_rollout_safe(&w, &p, m, 0.01, &lim, &g));
        }
    }
}

#[test]
fn idm_settles_at_its_equilibrium_spacing() {
    let dt = 0.1;
    for (h_s, t_g, v_lead, gap0, v0) in [(5.0, 1.0, 20.0, 80.0, 30.0), (8.0, 2.0, 30.0, 20.0, 10.0), (6.0, 1.5, 25.0, 40.0, 25.0)] {
        // a very high desired speed isolates the spacing term
        let p = IdmParams { a_max: 4.0, a_dec: 6.0, v_des: 1e3, h_s, t_g };
        let (mut gap, mut v) = (gap0, v0);
        for _ in 0..600 {
            let a = idm_accel(v, gap, v - v_lead, &p);
            let v_next = (v + a * dt).max(0.0);
            gap += (v_lead - 0.5 * (v + v_next)) * dt;
            v = v_next;
        }
        let target = h_s + v_lead * t_g;
        assert!((gap - target).abs() <= 0.5, "gap {gap} vs {target}");
    }
}
