//! Batch episodes, model bundles and the training pipelines.

use std::path::Path;

use anyhow::{bail, Context};
use rayon::prelude::*;
use safin_core::assessor::ASSESSOR_LAYERS;
use safin_core::mlp::{evaluate_mse, train_mlp, Dataset, MlpModel, TrainConfig, TrainReport};
use safin_core::kinematics::{Geometry, Limits};
use safin_core::planners::{scenario_rows, MpcConfig, NnPlanner, PlannerInput, PLANNER_LABELS, PLANNER_LAYERS};
use safin_core::sim::{run_episode, AssessMode, EpisodeConfig, EpisodeResult, EpisodeSummary, Planner, Scenario, ScenarioClass};

use crate::model_file::{load_model, save_model};

pub const LONG_FILE: &str = "long.mlp";
pub const LAT_FILE: &str = "lat.mlp";
pub const ASSESSOR_FILE: &str = "assessor.mlp";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum PlannerKind {
    Mpc,
    Nn,
    Safin,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 3] = [PlannerKind::Mpc, PlannerKind::Nn, PlannerKind::Safin];

    pub fn name(&self) -> &'static str {
        match self {
            PlannerKind::Mpc => "mpc",
            PlannerKind::Nn => "nn",
            PlannerKind::Safin => "safin",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum AssessKind {
    Learned,
    Oracle,
    AlwaysAggressive,
}

/// Trained networks; the assessor is only needed for learned assessment.
#[derive(Debug, Clone, PartialEq)]
pub struct Models {
    pub planner: Option<NnPlanner>,
    pub assessor: Option<MlpModel>,
}

impl Models {
    pub fn load(dir: &Path) -> anyhow::Result<Self> {
        let opt = |name: &str| -> anyhow::Result<Option<MlpModel>> {
            let p = dir.join(name);
            if p.exists() {
                load_model(&p).map(Some)
            } else {
                Ok(None)
            }
        };
        let planner = match (opt(LONG_FILE)?, opt(LAT_FILE)?) {
            (Some(longitudinal), Some(lateral)) => Some(NnPlanner { longitudinal, lateral }),
            (None, None) => None,
            _ => bail!("{} needs both {LONG_FILE} and {LAT_FILE}", dir.display()),
        };
        Ok(Self { planner, assessor: opt(ASSESSOR_FILE)? })
    }

    pub fn save(&self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        if let Some(p) = &self.planner {
            save_model(&dir.join(LONG_FILE), &p.longitudinal)?;
            save_model(&dir.join(LAT_FILE), &p.lateral)?;
        }
        if let Some(a) = &self.assessor {
            save_model(&dir.join(ASSESSOR_FILE), a)?;
        }
        Ok(())
    }

    fn nn(&self) -> anyhow::Result<&NnPlanner> {
        self.planner.as_ref().with_context(|| format!("planner models ({LONG_FILE}, {LAT_FILE}) are missing"))
    }

    pub fn planner<'a>(&'a self, kind: PlannerKind, mpc: &'a MpcConfig) -> anyhow::Result<Planner<'a>> {
        Ok(match kind {
            PlannerKind::Mpc => Planner::Mpc(mpc),
            PlannerKind::Nn => Planner::NnOnly(self.nn()?),
            PlannerKind::Safin => Planner::SafIn(self.nn()?),
        })
    }

    pub fn assess_mode(&self, kind: AssessKind, a_th: f64) -> anyhow::Result<AssessMode<'_>> {
        Ok(match kind {
            AssessKind::Learned => {
                let model = self.assessor.as_ref().with_context(|| format!("assessor model ({ASSESSOR_FILE}) is missing"))?;
                AssessMode::Learned { model, a_th }
            }
            AssessKind::Oracle => AssessMode::Oracle,
            AssessKind::AlwaysAggressive => AssessMode::AlwaysAggressive,
        })
    }
}

/// A fixed-size worker pool; `0` means one worker per available core.
pub fn pool(workers: usize) -> anyhow::Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().context("building worker pool")
}

/// Episodes `0..n` of `class` under `seed`, in index order regardless of scheduling.
pub fn run_batch(
    class: &ScenarioClass,
    seed: u64,
    n: u64,
    planner: &Planner,
    assess: &AssessMode,
    cfg: &EpisodeConfig,
    pool: &rayon::ThreadPool,
) -> anyhow::Result<Vec<EpisodeSummary>> {
    class.validate()?;
    pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let sc = Scenario::sample(class, seed, i, &cfg.geo);
                run_episode(&sc, planner, assess, cfg).map(|r| EpisodeSummary::from(&r)).with_context(|| format!("episode {i} (seed {seed})"))
            })
            .collect()
    })
}

/// MPC-labelled rows from scenarios `0..n`, concatenated in index order.
pub fn synth_planner_data(seed: u64, n: u64, mpc: &MpcConfig, lim: &Limits, g: &Geometry, pool: &rayon::ThreadPool) -> anyhow::Result<Dataset> {
    let parts: Vec<Dataset> = pool.install(|| (0..n).into_par_iter().map(|i| scenario_rows(seed, i, mpc, lim, g)).collect::<Result<_, _>>())?;
    let mut data = Dataset::new(PlannerInput::DIM, PLANNER_LABELS.len());
    for p in &parts {
        data.append(p)?;
    }
    Ok(data)
}

/// A single recorded episode.
pub fn run_single(class: &ScenarioClass, seed: u64, index: u64, planner: &Planner, assess: &AssessMode, cfg: &EpisodeConfig) -> anyhow::Result<EpisodeResult> {
    class.validate()?;
    let sc = Scenario::sample(class, seed, index, &cfg.geo);
    Ok(run_episode(&sc, planner, assess, &EpisodeConfig { record: true, ..*cfg })?)
}

/// Defaults that fit the planner and assessor networks on a desk machine.
pub fn default_train_config(seed: u64) -> TrainConfig {
    TrainConfig { epochs: 40, lr: 1e-3, batch: 64, seed, ..TrainConfig::default() }
}

/// Fraction of rows (taken from the end, i.e. whole late episodes) kept out of training.
pub const HOLDOUT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub model: MlpModel,
    pub report: TrainReport,
    /// Physical-unit MSE per output on the held-out tail.
    pub holdout_mse: Vec<f64>,
}

/// Fit `layers` to the `targets` columns of `data`, holding out the tail.
pub fn train_on(data: &Dataset, targets: &[usize], layers: &[usize], cfg: &TrainConfig) -> anyhow::Result<Trained> {
    let d = data.select_targets(targets);
    let (train, test) = d.split_tail(HOLDOUT);
    let (model, report) = train_mlp(&train, MlpModel::init(layers, cfg.seed), cfg)?;
    let holdout_mse = if test.is_empty() { Vec::new() } else { evaluate_mse(&model, &test) };
    Ok(Trained { model, report, holdout_mse })
}

pub fn train_longitudinal(data: &Dataset, cfg: &TrainConfig) -> anyhow::Result<Trained> {
    train_on(data, &[0], &PLANNER_LAYERS, cfg)
}

pub fn train_lateral(data: &Dataset, cfg: &TrainConfig) -> anyhow::Result<Trained> {
    train_on(data, &[1], &PLANNER_LAYERS, cfg)
}

pub fn train_assessor(data: &Dataset, cfg: &TrainConfig) -> anyhow::Result<Trained> {
    train_on(data, &[0, 1], &ASSESSOR_LAYERS, cfg)
}
