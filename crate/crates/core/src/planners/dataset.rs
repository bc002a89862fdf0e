use super::{encode_input, MpcConfig, PlannerInput};
use crate::error::{Error, Result};
use crate::kinematics::{Geometry, Limits};
use crate::mlp::Dataset;
use crate::sim::{run_episode, AssessMode, EpisodeConfig, Planner, Scenario, ScenarioClass};

pub const PLANNER_FEATURES: [&str; PlannerInput::DIM] = ["py", "vx", "vy", "gap_lead", "v_xl", "gap_follow", "v_xf"];
pub const PLANNER_LABELS: [&str; 2] = ["ax", "ay"];

/// Lateral speed below which a lane change inside the target lane counts as finished.
pub const SETTLED_VY: f64 = 0.05;

/// Seconds of lane keeping recorded after the lane change completes.
pub const SETTLE_DWELL: f64 = 1.0;

/// Roll the MPC through `n_scenarios` randomized episodes of the mildest class
/// and record one `(features, [ax, ay])` row per control step until the lane
/// change is complete (the ego inside the target lane with its lateral motion
/// settled) plus [`SETTLE_DWELL`] seconds of lane keeping.
pub fn synth_dataset(n_scenarios: usize, seed: u64, cfg: &MpcConfig, lim: &Limits, g: &Geometry) -> Result<Dataset> {
    if n_scenarios == 0 {
        return Err(Error::InvalidArgument("n_scenarios must be positive"));
    }
    let mut data = Dataset::new(PlannerInput::DIM, PLANNER_LABELS.len());
    for i in 0..n_scenarios {
        data.append(&scenario_rows(seed, i as u64, cfg, lim, g)?)?;
    }
    Ok(data)
}

/// Rows contributed by episode `index`; lets callers spread synthesis over workers.
pub fn scenario_rows(seed: u64, index: u64, cfg: &MpcConfig, lim: &Limits, g: &Geometry) -> Result<Dataset> {
    let class = ScenarioClass::preset(1).expect("class 1 exists");
    let ep = EpisodeConfig { lim: *lim, geo: *g, record: true, ..EpisodeConfig::default() };
    let sc = Scenario::sample(&class, seed, index, g);
    let result = run_episode(&sc, &Planner::Mpc(cfg), &AssessMode::Oracle, &ep)?;
    let mut data = Dataset::new(PlannerInput::DIM, PLANNER_LABELS.len());
    let done = g.target_lane_bound();
    let mut settled_at = None;
    for rec in &result.trajectory {
        let w = &rec.world;
        if settled_at.is_none() && w.ego.py >= done && w.ego.vy.abs() <= SETTLED_VY {
            settled_at = Some(w.t);
        }
        if settled_at.is_some_and(|t0| w.t >= t0 + SETTLE_DWELL - 1e-9) {
            break;
        }
        if let Some(a) = rec.action {
            data.push(&encode_input(&rec.world).to_array(), &[a.ax, a.ay]);
        }
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_within_limits() {
        let (cfg, lim, g) = (MpcConfig::default(), Limits::default(), Geometry::default());
        let a = synth_dataset(2, 7, &cfg, &lim, &g).unwrap();
        let b = synth_dataset(2, 7, &cfg, &lim, &g).unwrap();
        assert_eq!(a, b);
        assert!(a.len() > 10);
        for i in 0..a.len() {
            let (_, y) = a.row(i);
            assert!(y[0] >= -lim.a_xd && y[0] <= lim.a_xa && y[1].abs() <= lim.a_ym);
        }
        assert!(synth_dataset(0, 7, &cfg, &lim, &g).is_err());
    }
}
