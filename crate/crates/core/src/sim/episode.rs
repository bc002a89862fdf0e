use alloc::vec::Vec;

use crate::assessor::assess;
use crate::decision::{decide, DecisionState, Strategy, WorstCase};
use crate::error::{Error, Result};
use crate::kinematics::{collision, step_kinematics, Action, Geometry, Limits, WorldState};
use crate::mlp::MlpModel;
use crate::planners::{plan_mpc, plan_nn, MpcConfig, NnPlanner};
use crate::safety::FollowerMode;

use super::traffic::{IdmTraffic, Traffic};
use super::Scenario;

#[derive(Debug, Clone, Copy)]
pub enum Planner<'a> {
    Mpc(&'a MpcConfig),
    NnOnly(&'a NnPlanner),
    /// Networks wrapped by the proceed / hesitate / abort layer.
    SafIn(&'a NnPlanner),
}

impl Planner<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Planner::Mpc(_) => "mpc",
            Planner::NnOnly(_) => "nn",
            Planner::SafIn(_) => "safin",
        }
    }
}

/// Where the safety layer's follower mode comes from.
#[derive(Debug, Clone, Copy)]
pub enum AssessMode<'a> {
    Learned { model: &'a MlpModel, a_th: f64 },
    /// Ground truth; traffic without one is treated as aggressive.
    Oracle,
    AlwaysAggressive,
}

impl AssessMode<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            AssessMode::Learned { .. } => "learned",
            AssessMode::Oracle => "oracle",
            AssessMode::AlwaysAggressive => "always-aggressive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeConfig {
    pub lim: Limits,
    pub geo: Geometry,
    /// Seconds simulated unless a collision ends the episode earlier.
    pub horizon: f64,
    /// Keep the per-step trajectory.
    pub record: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self { lim: Limits::default(), geo: Geometry::default(), horizon: 10.0, record: false }
    }
}

impl EpisodeConfig {
    pub fn steps(&self) -> usize {
        libm::round(self.horizon / self.lim.dt) as usize
    }
}

/// State at the start of a step and what was done during it. The final
/// record of a trajectory carries the end state and no action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub world: WorldState,
    pub action: Option<Action>,
    pub strategy: Option<Strategy>,
    pub assessed: Option<FollowerMode>,
    pub true_mode: Option<FollowerMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub collided: bool,
    pub collision_time: Option<f64>,
    /// Not collided and inside the target lane at the end.
    pub success: bool,
    /// First time the ego was completely inside the target lane.
    pub crossing_time: Option<f64>,
    pub final_py: f64,
    pub final_world: WorldState,
    pub trajectory: Vec<StepRecord>,
}

pub fn run_episode(sc: &Scenario, planner: &Planner, assess_mode: &AssessMode, cfg: &EpisodeConfig) -> Result<EpisodeResult> {
    let mut traffic = IdmTraffic::new(sc);
    run_with_traffic(sc.world, &mut traffic, planner, assess_mode, cfg)
}

/// Closed loop from `start` (its `t` is ignored; episodes start at 0).
pub fn run_with_traffic<T: Traffic + ?Sized>(
    start: WorldState,
    traffic: &mut T,
    planner: &Planner,
    assess_mode: &AssessMode,
    cfg: &EpisodeConfig,
) -> Result<EpisodeResult> {
    let (lim, geo) = (&cfg.lim, &cfg.geo);
    lim.validate()?;
    geo.validate()?;
    if !start.is_finite() {
        return Err(Error::EpisodeDiverged { t: 0.0 });
    }
    let verifier = WorstCase { lim: *lim, geo: *geo };
    let crossed = geo.target_lane_bound();

    let mut w = WorldState { t: 0.0, ..start };
    let mut ds = DecisionState::initial(0.0);
    let mut prev_follower_vx: Option<f64> = None;
    let mut trajectory = Vec::new();
    let mut collision_time = None;
    let mut crossing_time = (w.ego.py >= crossed).then_some(0.0);
    let true_mode = traffic.true_mode();

    for k in 0..cfg.steps() {
        w.t = k as f64 * lim.dt;
        let (action, strategy, assessed) = match planner {
            Planner::Mpc(c) => (plan_mpc(&w, c, lim, geo), None, None),
            Planner::NnOnly(nn) => (plan_nn(&w, nn, lim), None, None),
            Planner::SafIn(nn) => {
                let mode = match assess_mode {
                    AssessMode::Learned { model, a_th } => {
                        let a_obs = prev_follower_vx.map(|v| (w.follower.vx - v) / lim.dt);
                        assess(&w, a_obs, model, *a_th, lim)
                    }
                    AssessMode::Oracle => true_mode.unwrap_or(FollowerMode::Aggressive),
                    AssessMode::AlwaysAggressive => FollowerMode::Aggressive,
                };
                let d = decide(&w, &ds, plan_nn(&w, nn, lim), mode, lim, geo, &verifier);
                ds = d.state;
                (d.action, Some(d.strategy), Some(mode))
            }
        };
        if cfg.record {
            trajectory.push(StepRecord { world: w, action: Some(action), strategy, assessed, true_mode });
        }

        let (leader, follower) = traffic.advance(&w, lim, geo);
        prev_follower_vx = Some(w.follower.vx);
        let t = (k + 1) as f64 * lim.dt;
        let ego = step_kinematics(&w.ego, &action, lim.dt).map_err(|_| Error::EpisodeDiverged { t })?;
        w = WorldState { ego, leader, follower, t };
        if !w.is_finite() {
            return Err(Error::EpisodeDiverged { t });
        }
        if crossing_time.is_none() && w.ego.py >= crossed {
            crossing_time = Some(t);
        }
        if collision(&w.ego, &w.leader, geo) || collision(&w.ego, &w.follower, geo) {
            collision_time = Some(t);
            break;
        }
    }
    if cfg.record {
        trajectory.push(StepRecord { world: w, action: None, strategy: None, assessed: None, true_mode });
    }
    let collided = collision_time.is_some();
    Ok(EpisodeResult {
        collided,
        collision_time,
        success: !collided && w.ego.py >= crossed,
        crossing_time,
        final_py: w.ego.py,
        final_world: w,
        trajectory,
    })
}
