//! Follower aggressiveness assessment.
//!
//! A network predicts what the follower would do under both hypotheses:
//! `a1` if it yields and follows the ego, `a0` if it follows the leader. The
//! observed acceleration is then compared against both predictions.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::drivers::FollowerDriver;
use crate::error::{Error, Result};
use crate::kinematics::{Geometry, KinematicState, Limits, WorldState};
use crate::mlp::{Dataset, MlpModel};
use crate::safety::FollowerMode;

/// Ego-relative features; lateral state does not enter the follower's decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssessorInput {
    pub vx: f64,
    pub gap_lead: f64,
    pub v_xl: f64,
    pub gap_follow: f64,
    pub v_xf: f64,
}

impl AssessorInput {
    pub const DIM: usize = 5;

    pub fn from_world(w: &WorldState) -> Self {
        Self {
            vx: w.ego.vx,
            gap_lead: w.leader.px - w.ego.px,
            v_xl: w.leader.vx,
            gap_follow: w.ego.px - w.follower.px,
            v_xf: w.follower.vx,
        }
    }

    pub fn to_array(&self) -> [f64; Self::DIM] {
        [self.vx, self.gap_lead, self.v_xl, self.gap_follow, self.v_xf]
    }

    /// Longitudinal world with the ego at the origin and the other two in the target lane.
    pub fn to_world(&self, g: &Geometry) -> WorldState {
        WorldState {
            ego: KinematicState::in_lane(0.0, 0.0, self.vx),
            leader: KinematicState::in_lane(self.gap_lead, g.w_l, self.v_xl),
            follower: KinematicState::in_lane(-self.gap_follow, g.w_l, self.v_xf),
            t: 0.0,
        }
    }
}

pub const ASSESSOR_FEATURES: [&str; AssessorInput::DIM] = ["vx", "gap_lead", "v_xl", "gap_follow", "v_xf"];
pub const ASSESSOR_LABELS: [&str; 2] = ["a1", "a0"];
pub const ASSESSOR_LAYERS: [usize; 4] = [AssessorInput::DIM, 64, 64, 2];
pub const DEFAULT_A_TH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BehaviorLabel {
    Cautious,
    Aggressive,
    Uncertain,
}

impl BehaviorLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            BehaviorLabel::Cautious => "cautious",
            BehaviorLabel::Aggressive => "aggressive",
            BehaviorLabel::Uncertain => "uncertain",
        }
    }

    /// Only a confident cautious verdict relaxes the worst case.
    pub fn to_mode(self) -> FollowerMode {
        match self {
            BehaviorLabel::Cautious => FollowerMode::Cautious,
            BehaviorLabel::Aggressive | BehaviorLabel::Uncertain => FollowerMode::Aggressive,
        }
    }
}

/// Predicted `(a1, a0)`, clamped to the acceleration box.
pub fn predict_accels(w: &WorldState, m: &MlpModel, lim: &Limits) -> (f64, f64) {
    let out = m.forward(&AssessorInput::from_world(w).to_array());
    (out[0].clamp(-lim.a_xd, lim.a_xa), out[1].clamp(-lim.a_xd, lim.a_xa))
}

/// Whichever hypothesis explains `a_obs` better by more than `a_th` wins.
/// Non-finite inputs compare false everywhere and end up `Uncertain`.
pub fn classify(a_obs: f64, a1: f64, a0: f64, a_th: f64) -> BehaviorLabel {
    let d1 = (a_obs - a1).abs();
    let d0 = (a_obs - a0).abs();
    if d1 < d0 - a_th {
        BehaviorLabel::Cautious
    } else if d0 < d1 - a_th {
        BehaviorLabel::Aggressive
    } else {
        BehaviorLabel::Uncertain
    }
}

/// Mode to plan against. Without an observation yet the follower is treated as aggressive.
pub fn assess(w: &WorldState, a_obs: Option<f64>, m: &MlpModel, a_th: f64, lim: &Limits) -> FollowerMode {
    let Some(a_obs) = a_obs else {
        return FollowerMode::Aggressive;
    };
    let (a1, a0) = predict_accels(w, m, lim);
    classify(a_obs, a1, a0, a_th).to_mode()
}

/// IDM accelerations of `driver` at the follower slot behind the ego and behind the leader.
pub fn idm_labels(x: &AssessorInput, driver: &FollowerDriver, g: &Geometry) -> (f64, f64) {
    let w = x.to_world(g);
    (driver.accel_behind(&w.follower, &w.ego, g), driver.accel_behind(&w.follower, &w.leader, g))
}

/// Sampling box for synthetic follower situations.
pub const SPEED_RANGE: (f64, f64) = (10.0, 35.0);
pub const GAP_LEAD_RANGE: (f64, f64) = (5.0, 60.0);
pub const GAP_FOLLOW_RANGE: (f64, f64) = (5.0, 60.0);
/// Leader-to-follower spacing never sampled below this.
pub const MIN_LEADER_FOLLOWER: f64 = 10.0;

/// One random situation and driver.
pub fn sample_situation<R: Rng + ?Sized>(rng: &mut R) -> (AssessorInput, FollowerDriver) {
    let speed = |rng: &mut R| rng.gen_range(SPEED_RANGE.0..=SPEED_RANGE.1);
    let (vx, v_xl, v_xf) = (speed(rng), speed(rng), speed(rng));
    let (gap_lead, gap_follow) = loop {
        let l = rng.gen_range(GAP_LEAD_RANGE.0..=GAP_LEAD_RANGE.1);
        let f = rng.gen_range(GAP_FOLLOW_RANGE.0..=GAP_FOLLOW_RANGE.1);
        if l + f >= MIN_LEADER_FOLLOWER {
            break (l, f);
        }
    };
    let driver = FollowerDriver::sample(rng);
    (AssessorInput { vx, gap_lead, v_xl, gap_follow, v_xf }, driver)
}

/// `n` rows of five features and the IDM labels `(a1*, a0*)`.
pub fn synth_assessor_dataset(n: usize, seed: u64, g: &Geometry) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Dataset::new(AssessorInput::DIM, 2);
    for _ in 0..n {
        let (x, driver) = sample_situation(&mut rng);
        let (a1, a0) = idm_labels(&x, &driver, g);
        data.push(&x.to_array(), &[a1, a0]);
    }
    Ok(data)
}

/// Held-out situation with a known true mode; `a_obs` is what the follower actually did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalEntry {
    pub input: AssessorInput,
    pub a1: f64,
    pub a0: f64,
    pub true_mode: FollowerMode,
    pub a_obs: f64,
}

impl EvalEntry {
    pub fn difficulty(&self) -> Difficulty {
        Difficulty::of((self.a1 - self.a0).abs())
    }
}

/// Labelled situations for the threshold sweep. States where either hypothesis
/// saturates at an acceleration bound are redrawn: a follower pinned at a
/// limit does not reveal which vehicle it is following.
pub fn synth_assessor_eval(n: usize, seed: u64, lim: &Limits, g: &Geometry) -> Vec<EvalEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let (input, a1, a0) = loop {
                let (input, driver) = sample_situation(&mut rng);
                let (a1, a0) = idm_labels(&input, &driver, g);
                let inside = |a: f64| a > -lim.a_xd && a < lim.a_xa;
                if inside(a1) && inside(a0) && a1 != a0 {
                    break (input, a1, a0);
                }
            };
            let (true_mode, a_obs) = if rng.gen_bool(0.5) { (FollowerMode::Aggressive, a0) } else { (FollowerMode::Cautious, a1) };
            EvalEntry { input, a1, a0, true_mode, a_obs }
        })
        .collect()
}

/// How far apart the two hypotheses are, in m/s².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn of(delta: f64) -> Self {
        if delta > 0.5 {
            Difficulty::Easy
        } else if delta > 0.25 {
            Difficulty::Medium
        } else {
            Difficulty::Hard
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

pub const SWEEP_THRESHOLDS: [f64; 5] = [0.0, 0.15, 0.25, 0.5, 1.0];

/// Outcome counts of one (difficulty, threshold) cell. Both rates are over all entries of the cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub difficulty: Difficulty,
    pub a_th: f64,
    pub count: usize,
    pub uncertain: usize,
    pub errors: usize,
}

impl SweepRow {
    pub fn uncertain_rate(&self) -> f64 {
        ratio(self.uncertain, self.count)
    }

    pub fn error_rate(&self) -> f64 {
        ratio(self.errors, self.count)
    }
}

fn ratio(k: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}

/// Classify every entry with the model at each threshold. Rows come out
/// difficulty-major in `Difficulty::ALL` order.
pub fn assess_sweep(m: &MlpModel, entries: &[EvalEntry], thresholds: &[f64], lim: &Limits, g: &Geometry) -> Vec<SweepRow> {
    let preds: Vec<(f64, f64)> = entries.iter().map(|e| predict_accels(&e.input.to_world(g), m, lim)).collect();
    let mut rows = Vec::with_capacity(Difficulty::ALL.len() * thresholds.len());
    for d in Difficulty::ALL {
        for &a_th in thresholds {
            let mut row = SweepRow { difficulty: d, a_th, count: 0, uncertain: 0, errors: 0 };
            for (e, &(a1, a0)) in entries.iter().zip(&preds) {
                if e.difficulty() != d {
                    continue;
                }
                row.count += 1;
                match classify(e.a_obs, a1, a0, a_th) {
                    BehaviorLabel::Uncertain => row.uncertain += 1,
                    label if label.to_mode() != e.true_mode => row.errors += 1,
                    _ => {}
                }
            }
            rows.push(row);
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_examples() {
        assert_eq!(classify(-0.9, -1.0, 2.0, 0.5), BehaviorLabel::Cautious);
        assert_eq!(classify(0.5, 0.0, 1.0, 0.5), BehaviorLabel::Uncertain);
        assert_eq!(classify(0.9, 0.0, 1.0, 0.5), BehaviorLabel::Aggressive);
        assert_eq!(classify(0.5, 0.0, 1.0, 0.0), BehaviorLabel::Uncertain);
        assert_eq!(classify(0.51, 0.0, 1.0, 0.0), BehaviorLabel::Aggressive);
        assert_eq!(classify(f64::NAN, 0.0, 1.0, 0.0), BehaviorLabel::Uncertain);
    }

    #[test]
    fn uncertain_maps_to_aggressive() {
        assert_eq!(BehaviorLabel::Uncertain.to_mode(), FollowerMode::Aggressive);
        assert_eq!(BehaviorLabel::Cautious.to_mode(), FollowerMode::Cautious);
    }

    fn constant_model(a1: f64, a0: f64) -> MlpModel {
        let mut m = MlpModel::zeros(&ASSESSOR_LAYERS);
        m.output_norm.mean = alloc::vec![a1, a0];
        m
    }

    #[test]
    fn predictions_are_clamped() {
        let w = AssessorInput { vx: 20.0, gap_lead: 20.0, v_xl: 20.0, gap_follow: 20.0, v_xf: 20.0 }.to_world(&Geometry::default());
        assert_eq!(predict_accels(&w, &constant_model(9.0, -9.0), &Limits::default()), (4.0, -6.0));
    }

    #[test]
    fn assess_composes_classification() {
        let lim = Limits::default();
        let w = AssessorInput { vx: 20.0, gap_lead: 20.0, v_xl: 20.0, gap_follow: 20.0, v_xf: 20.0 }.to_world(&Geometry::default());
        let m = constant_model(-1.0, 2.0);
        assert_eq!(assess(&w, Some(-0.9), &m, 0.5, &lim), FollowerMode::Cautious);
        assert_eq!(assess(&w, Some(0.5), &m, 0.5, &lim), FollowerMode::Aggressive);
        assert_eq!(assess(&w, None, &m, 0.5, &lim), FollowerMode::Aggressive);
    }

    #[test]
    fn dataset_is_reproducible_and_bounded() {
        let g = Geometry::default();
        let a = synth_assessor_dataset(500, 3, &g).unwrap();
        assert_eq!(a, synth_assessor_dataset(500, 3, &g).unwrap());
        assert_ne!(a, synth_assessor_dataset(500, 4, &g).unwrap());
        for i in 0..a.len() {
            let (x, y) = a.row(i);
            assert!(x[1] + x[3] >= MIN_LEADER_FOLLOWER);
            assert!(y.iter().all(|v| (-6.0..=4.0).contains(v)), "{y:?}");
        }
    }

    #[test]
    fn spot_label() {
        // v = v_des = 30, bumper gap 51 m, matched speeds, h_s 6, t_g 1.5: s* = 51
        let g = Geometry::default();
        let x = AssessorInput { vx: 30.0, gap_lead: 100.0, v_xl: 30.0, gap_follow: 56.0, v_xf: 30.0 };
        let driver = FollowerDriver::new(6.0, 1.5, 0.0);
        let (a1, _) = idm_labels(&x, &driver, &g);
        assert!((a1 - -4.0).abs() < 1e-12, "{a1}");
    }

    #[test]
    fn sweep_with_exact_model_makes_no_errors_at_zero_threshold() {
        let g = Geometry::default();
        let entries = synth_assessor_eval(200, 9, &Limits::default(), &g);
        // per-entry exact predictions via a lookup is not expressible as an MLP,
        // so check the counting logic directly on the IDM labels
        for e in &entries {
            assert!(e.a1 != e.a0 && e.a1 > -6.0 && e.a0 < 4.0);
            assert_eq!(classify(e.a_obs, e.a1, e.a0, 0.0).to_mode(), e.true_mode);
        }
        let rows = assess_sweep(&constant_model(0.0, 0.0), &entries, &SWEEP_THRESHOLDS, &Limits::default(), &g);
        assert_eq!(rows.len(), 15);
        let total: usize = rows.iter().filter(|r| r.a_th == 0.0).map(|r| r.count).sum();
        assert_eq!(total, 200);
        // identical predictions cannot separate the hypotheses
        assert!(rows.iter().all(|r| r.uncertain == r.count && r.errors == 0));
    }

    #[test]
    fn difficulty_edges() {
        assert_eq!(Difficulty::of(0.51), Difficulty::Easy);
        assert_eq!(Difficulty::of(0.5), Difficulty::Medium);
        assert_eq!(Difficulty::of(0.25), Difficulty::Hard);
        assert_eq!(Difficulty::of(0.0), Difficulty::Hard);
    }
}
