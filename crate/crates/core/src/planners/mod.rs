//! Ego trajectory planners: the enumeration MPC that also labels training
//! data, and the pair of feed-forward networks imitating it.

mod dataset;
mod mpc;

pub use dataset::{scenario_rows, synth_dataset, PLANNER_FEATURES, PLANNER_LABELS};
pub use mpc::{plan_mpc, MpcConfig};

use crate::kinematics::{Action, Limits, WorldState};
use crate::mlp::MlpModel;

/// Ego-relative features shared by both planner networks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerInput {
    pub py: f64,
    pub vx: f64,
    pub vy: f64,
    pub gap_lead: f64,
    pub v_xl: f64,
    pub gap_follow: f64,
    pub v_xf: f64,
}

impl PlannerInput {
    pub const DIM: usize = 7;

    pub fn to_array(&self) -> [f64; Self::DIM] {
        [self.py, self.vx, self.vy, self.gap_lead, self.v_xl, self.gap_follow, self.v_xf]
    }
}

/// Features in ego-relative longitudinal coordinates, so absolute position drops out.
pub fn encode_input(w: &WorldState) -> PlannerInput {
    PlannerInput {
        py: w.ego.py,
        vx: w.ego.vx,
        vy: w.ego.vy,
        gap_lead: w.leader.px - w.ego.px,
        v_xl: w.leader.vx,
        gap_follow: w.ego.px - w.follower.px,
        v_xf: w.follower.vx,
    }
}

/// Longitudinal and lateral networks, one scalar output each.
#[derive(Debug, Clone, PartialEq)]
pub struct NnPlanner {
    pub longitudinal: MlpModel,
    pub lateral: MlpModel,
}

/// Hidden layout used for both planner networks.
pub const PLANNER_LAYERS: [usize; 4] = [PlannerInput::DIM, 64, 64, 1];

pub fn plan_nn(w: &WorldState, planner: &NnPlanner, lim: &Limits) -> Action {
    let x = encode_input(w).to_array();
    let ax = planner.longitudinal.forward(&x)[0];
    let ay = planner.lateral.forward(&x)[0];
    // a diverged model must not leak NaN into the dynamics
    let ax = if ax.is_finite() { ax } else { -lim.a_xd };
    let ay = if ay.is_finite() { ay } else { 0.0 };
    Action::new(ax, ay).clamped(lim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::KinematicState;

    fn world() -> WorldState {
        WorldState {
            ego: KinematicState::new(100.0, 0.4, 25.0, 0.2),
            leader: KinematicState::in_lane(120.0, 3.5, 24.0),
            follower: KinematicState::in_lane(85.0, 3.5, 27.0),
            t: 1.0,
        }
    }

    #[test]
    fn features_are_relative() {
        let f = encode_input(&world());
        assert_eq!(f.to_array(), [0.4, 25.0, 0.2, 20.0, 24.0, 15.0, 27.0]);
        assert_eq!(encode_input(&world().translated(1000.0)), f);
    }

    #[test]
    fn zero_models_reduce_to_normalization_offset() {
        let mut long = MlpModel::zeros(&PLANNER_LAYERS);
        long.output_norm.mean[0] = 1.5;
        let mut lat = MlpModel::zeros(&PLANNER_LAYERS);
        lat.output_norm.mean[0] = 9.0;
        let a = plan_nn(&world(), &NnPlanner { longitudinal: long, lateral: lat }, &Limits::default());
        assert_eq!(a, Action::new(1.5, 2.5));
    }

    #[test]
    fn output_is_clamped() {
        let mut long = MlpModel::zeros(&PLANNER_LAYERS);
        long.layers[2].bias[0] = -50.0;
        let lat = long.clone();
        let a = plan_nn(&world(), &NnPlanner { longitudinal: long, lateral: lat }, &Limits::default());
        assert_eq!(a, Action::new(-6.0, -2.5));
    }
}
