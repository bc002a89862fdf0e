use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use safin_core::kinematics::{collision, Geometry};
use safin_core::planners::MpcConfig;
use safin_core::sim::{aggregate, run_episode, AssessMode, EpisodeConfig, EpisodeSummary, MetricsAccumulator, Planner, Scenario, ScenarioClass};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn episodes_replay_identically_and_flag_collisions_consistently(seed in 0u64..1_000, index in 0u64..1_000, class in 1u8..=4) {
        let g = Geometry::default();
        let sc = Scenario::sample(&ScenarioClass::preset(class).unwrap(), seed, index, &g);
        let mpc = MpcConfig::default();
        let cfg = EpisodeConfig { record: true, ..EpisodeConfig::default() };
        let a = run_episode(&sc, &Planner::Mpc(&mpc), &AssessMode::Oracle, &cfg).unwrap();
        let b = run_episode(&sc, &Planner::Mpc(&mpc), &AssessMode::Oracle, &cfg).unwrap();
        prop_assert_eq!(&a, &b);

        let hits: Vec<bool> = a.trajectory.iter().map(|s| collision(&s.world.ego, &s.world.leader, &g) || collision(&s.world.ego, &s.world.follower, &g)).collect();
        prop_assert_eq!(a.collided, hits.iter().any(|h| *h));
        prop_assert_eq!(a.collided, a.collision_time.is_some());
        if a.collided {
            prop_assert!(*hits.last().unwrap());
            prop_assert!(!hits[..hits.len() - 1].iter().any(|h| *h));
            prop_assert!(!a.success);
        }
        if a.success {
            prop_assert!(a.final_py >= g.target_lane_bound());
        }
    }
}

#[test]
fn streaming_and_merged_aggregation_agree_with_batch() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let batch: Vec<EpisodeSummary> = (0..200_000)
        .map(|_| {
            let collided = rng.gen_bool(0.1);
            let success = !collided && rng.gen_bool(0.7);
            EpisodeSummary { collided, success, crossing_time: success.then(|| rng.gen_range(1.0..8.0)), final_py: rng.gen_range(0.0..3.6) }
        })
        .collect();
    let whole = aggregate(&batch);
    let mut merged = MetricsAccumulator::new();
    for chunk in batch.chunks(7_919) {
        let mut part = MetricsAccumulator::new();
        chunk.iter().for_each(|s| part.push(s));
        merged.merge(&part);
    }
    let merged = merged.finish();
    assert_eq!(whole.count, 200_000);
    assert_eq!((whole.success_rate, whole.collision_rate, whole.timeout_rate), (merged.success_rate, merged.collision_rate, merged.timeout_rate));
    let close = |a: Option<f64>, b: Option<f64>| (a.unwrap() - b.unwrap()).abs() <= 1e-12 * a.unwrap().abs();
    assert!(close(whole.mean_crossing_time, merged.mean_crossing_time));
    assert!(close(whole.mean_final_py, merged.mean_final_py));
    let n_ok = batch.iter().filter(|s| !s.collided).count() as f64;
    let naive: f64 = batch.iter().filter(|s| !s.collided).map(|s| s.final_py).sum::<f64>() / n_ok;
    assert!((whole.mean_final_py.unwrap() - naive).abs() < 1e-9);
}
