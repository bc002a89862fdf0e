//! The `safin` command line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use safin_core::assessor::{assess_sweep, synth_assessor_dataset, synth_assessor_eval, ASSESSOR_FEATURES, ASSESSOR_LABELS, DEFAULT_A_TH, SWEEP_THRESHOLDS};
use safin_core::mlp::TrainConfig;
use safin_core::planners::{MpcConfig, PLANNER_FEATURES, PLANNER_LABELS};
use safin_core::sim::{aggregate, run_with_traffic, EpisodeConfig, EpisodeResult, ScenarioClass};
use safin_core::{Geometry, Limits};

use crate::config::{Config, EpisodeSection};
use crate::dataset_file::{load_dataset, save_dataset};
use crate::model_file::{load_model, save_model};
use crate::replay::{load_trace, ReplayTraffic};
use crate::report::{experiment_table, sweep_table, write_experiment_csv, write_sweep_csv, ExperimentRow};
use crate::runner::{default_train_config, pool, run_batch, run_single, synth_planner_data, train_assessor, train_lateral, train_longitudinal, AssessKind, Models, PlannerKind};
use crate::trajectory::write_trajectory;

#[derive(Debug, Parser)]
#[command(name = "safin", version, about = "Safety-driven interactive lane changing: data, training and Monte Carlo experiments")]
pub struct Cli {
    /// TOML file with per-command sections; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for batch commands (0 = all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a training dataset.
    Synth(SynthArgs),
    /// Train one network from a dataset.
    Train(TrainArgs),
    /// Run and log a single episode.
    Run(EpisodeArgs),
    /// Monte Carlo metrics per (class, planner).
    Experiment(EpisodeArgs),
    /// Uncertain and error rates of the assessor over thresholds.
    AssessSweep(SweepArgs),
    /// Drive the ego against recorded leader and follower trajectories.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SynthKind {
    Planner,
    Assessor,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    pub kind: SynthKind,
    /// Episodes (planner) or samples (assessor).
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TrainKind {
    Long,
    Lat,
    Assessor,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub kind: TrainKind,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EpisodeArgs {
    /// Directory holding long.mlp, lat.mlp and assessor.mlp.
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// 1-4, `custom` (ranges from the config file) or `all`.
    #[arg(long)]
    pub class: Option<String>,
    /// Comma-separated list of mpc, nn, safin.
    #[arg(long)]
    pub planner: Option<String>,
    #[arg(long, value_enum)]
    pub assess: Option<AssessKind>,
    #[arg(long = "a-th")]
    pub a_th: Option<f64>,
    /// Episodes per class.
    #[arg(long)]
    pub n: Option<u64>,
    /// Episode index within the seeded stream (run only).
    #[arg(long)]
    pub index: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub models: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub models: Option<PathBuf>,
    #[arg(long)]
    pub planner: Option<String>,
    #[arg(long, value_enum)]
    pub assess: Option<AssessKind>,
    #[arg(long = "a-th")]
    pub a_th: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

pub const DEFAULT_PLANNER_EPISODES: u64 = 6000;
pub const DEFAULT_ASSESSOR_SAMPLES: u64 = 100_000;
pub const DEFAULT_EXPERIMENT_EPISODES: u64 = 20_000;
pub const DEFAULT_SWEEP_SAMPLES: u64 = 20_000;

struct Ctx {
    cfg: Config,
    seed: Option<u64>,
    workers: usize,
}

impl Ctx {
    fn seed(&self, section: Option<u64>) -> u64 {
        self.seed.or(section).or(self.cfg.seed).unwrap_or(0)
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let workers = cli.workers.or(cfg.workers).unwrap_or(1);
    let ctx = Ctx { cfg, seed: cli.seed, workers };
    match cli.command {
        Command::Synth(a) => synth(&ctx, a),
        Command::Train(a) => train(&ctx, a),
        Command::Run(a) => run_one(&ctx, a),
        Command::Experiment(a) => experiment(&ctx, a),
        Command::AssessSweep(a) => sweep(&ctx, a),
        Command::Replay(a) => replay(&ctx, a),
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn planner_columns() -> Vec<&'static str> {
    PLANNER_FEATURES.iter().chain(&PLANNER_LABELS).copied().collect()
}

fn assessor_columns() -> Vec<&'static str> {
    ASSESSOR_FEATURES.iter().chain(&ASSESSOR_LABELS).copied().collect()
}

fn synth(ctx: &Ctx, a: SynthArgs) -> anyhow::Result<()> {
    let s = &ctx.cfg.synth;
    let seed = ctx.seed(s.seed);
    let (lim, geo) = (Limits::default(), Geometry::default());
    match a.kind {
        SynthKind::Planner => {
            let n = a.n.or(s.n).unwrap_or(DEFAULT_PLANNER_EPISODES);
            let data = synth_planner_data(seed, n, &MpcConfig::default(), &lim, &geo, &pool(ctx.workers)?)?;
            save_dataset(&a.out, &planner_columns(), &data)?;
            eprintln!("{} rows from {n} episodes -> {}", data.len(), a.out.display());
        }
        SynthKind::Assessor => {
            let n = a.n.or(s.n).unwrap_or(DEFAULT_ASSESSOR_SAMPLES);
            let data = synth_assessor_dataset(n as usize, seed, &geo)?;
            save_dataset(&a.out, &assessor_columns(), &data)?;
            eprintln!("{} rows -> {}", data.len(), a.out.display());
        }
    }
    Ok(())
}

fn train(ctx: &Ctx, a: TrainArgs) -> anyhow::Result<()> {
    let t = &ctx.cfg.train;
    let base = default_train_config(ctx.seed(t.seed));
    let cfg = TrainConfig {
        epochs: a.epochs.or(t.epochs).unwrap_or(base.epochs),
        lr: a.lr.or(t.lr).unwrap_or(base.lr),
        batch: a.batch.or(t.batch).unwrap_or(base.batch),
        ..base
    };
    let trained = match a.kind {
        TrainKind::Long | TrainKind::Lat => {
            let data = load_dataset(&a.data, &planner_columns(), PLANNER_LABELS.len())?;
            if matches!(a.kind, TrainKind::Long) {
                train_longitudinal(&data, &cfg)?
            } else {
                train_lateral(&data, &cfg)?
            }
        }
        TrainKind::Assessor => train_assessor(&load_dataset(&a.data, &assessor_columns(), ASSESSOR_LABELS.len())?, &cfg)?,
    };
    save_model(&a.out, &trained.model)?;
    let loss = trained.report.epoch_loss.last().copied().unwrap_or(f64::NAN);
    eprintln!("final training loss {loss:.6}, held-out MSE {:?} -> {}", trained.holdout_mse, a.out.display());
    Ok(())
}

fn parse_planners(s: Option<&str>) -> anyhow::Result<Vec<PlannerKind>> {
    let Some(s) = s else { return Ok(PlannerKind::ALL.to_vec()) };
    s.split(',')
        .map(|p| PlannerKind::from_str(p.trim(), true).map_err(|_| anyhow::anyhow!("unknown planner `{p}` (expected mpc, nn or safin)")))
        .collect()
}

fn parse_classes(s: &str, section: &EpisodeSection) -> anyhow::Result<Vec<(String, ScenarioClass)>> {
    let preset = |id: u8| (id.to_string(), ScenarioClass::preset(id).expect("preset ids are valid"));
    match s {
        "all" => Ok(ScenarioClass::PRESET_IDS.iter().map(|&id| preset(id)).collect()),
        "custom" => {
            let (Some(a_xl), Some(delta_p)) = (section.a_xl, section.delta_p) else {
                bail!("class `custom` needs `a_xl` and `delta_p` in the config file");
            };
            let c = ScenarioClass { a_xl: (a_xl[0], a_xl[1]), delta_p: (delta_p[0], delta_p[1]) };
            c.validate()?;
            Ok(vec![("custom".to_string(), c)])
        }
        id => match id.parse::<u8>().ok().and_then(ScenarioClass::preset) {
            Some(c) => Ok(vec![(id.to_string(), c)]),
            None => bail!("unknown class `{id}` (expected 1-4, custom or all)"),
        },
    }
}

fn parse_assess(flag: Option<AssessKind>, section: &EpisodeSection) -> anyhow::Result<AssessKind> {
    if let Some(a) = flag {
        return Ok(a);
    }
    match section.assess.as_deref() {
        Some(s) => AssessKind::from_str(s, true).map_err(|_| anyhow::anyhow!("unknown assess mode `{s}`")),
        None => Ok(AssessKind::Learned),
    }
}

fn episode_config(section: &EpisodeSection) -> EpisodeConfig {
    let base = EpisodeConfig::default();
    EpisodeConfig { horizon: section.horizon.unwrap_or(base.horizon), ..base }
}

fn models_dir(flag: Option<PathBuf>, section: Option<&PathBuf>) -> PathBuf {
    flag.or_else(|| section.cloned()).unwrap_or_else(|| PathBuf::from("models"))
}

fn run_one(ctx: &Ctx, a: EpisodeArgs) -> anyhow::Result<()> {
    let s = &ctx.cfg.run;
    let models = Models::load(&models_dir(a.models, s.models.as_ref()))?;
    let classes = parse_classes(a.class.as_deref().or(s.class.as_deref()).unwrap_or("1"), s)?;
    let [(_, class)] = classes.as_slice() else { bail!("run takes a single class") };
    let planners = parse_planners(a.planner.as_deref().or(s.planner.as_deref()).or(Some("safin")))?;
    let [kind] = planners.as_slice() else { bail!("run takes a single planner") };
    let mpc = MpcConfig::default();
    let planner = models.planner(*kind, &mpc)?;
    let assess = models.assess_mode(parse_assess(a.assess, s)?, a.a_th.or(s.a_th).unwrap_or(DEFAULT_A_TH))?;
    let r = run_single(class, ctx.seed(s.seed), a.index.or(s.index).unwrap_or(0), &planner, &assess, &episode_config(s))?;
    let mut out = create(&a.out)?;
    write_trajectory(&mut out, &r.trajectory)?;
    out.flush()?;
    println!("{}", outcome_line(&r));
    Ok(())
}

pub fn outcome_line(r: &EpisodeResult) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |t| t.to_string());
    format!(
        "collided={} collision_time={} success={} crossing_time={} final_py={}",
        r.collided,
        opt(r.collision_time),
        r.success,
        opt(r.crossing_time),
        r.final_py
    )
}

fn experiment(ctx: &Ctx, a: EpisodeArgs) -> anyhow::Result<()> {
    let s = &ctx.cfg.experiment;
    let models = Models::load(&models_dir(a.models, s.models.as_ref()))?;
    let classes = parse_classes(a.class.as_deref().or(s.class.as_deref()).unwrap_or("all"), s)?;
    let planners = parse_planners(a.planner.as_deref().or(s.planner.as_deref()))?;
    let assess_kind = parse_assess(a.assess, s)?;
    let assess = models.assess_mode(assess_kind, a.a_th.or(s.a_th).unwrap_or(DEFAULT_A_TH))?;
    let n = a.n.or(s.n).unwrap_or(DEFAULT_EXPERIMENT_EPISODES);
    let seed = ctx.seed(s.seed);
    let cfg = episode_config(s);
    let mpc = MpcConfig::default();
    let workers = pool(ctx.workers)?;
    let mut rows = Vec::new();
    for (name, class) in &classes {
        for kind in &planners {
            let planner = models.planner(*kind, &mpc)?;
            let summaries = run_batch(class, seed, n, &planner, &assess, &cfg, &workers)?;
            let assess_name = if *kind == PlannerKind::Safin { assess.name() } else { "-" };
            rows.push(ExperimentRow { class: name.clone(), planner: kind.name().into(), assess: assess_name.into(), metrics: aggregate(&summaries) });
        }
    }
    let mut out = create(&a.out)?;
    write_experiment_csv(&mut out, &rows)?;
    out.flush()?;
    print!("{}", experiment_table(&rows));
    Ok(())
}

fn sweep(ctx: &Ctx, a: SweepArgs) -> anyhow::Result<()> {
    let s = &ctx.cfg.assess_sweep;
    let dir = models_dir(a.models, s.models.as_ref());
    let model = load_model(&dir.join(crate::runner::ASSESSOR_FILE))?;
    let n = a.n.or(s.n).unwrap_or(DEFAULT_SWEEP_SAMPLES);
    let thresholds = s.thresholds.clone().unwrap_or_else(|| SWEEP_THRESHOLDS.to_vec());
    let (lim, geo) = (Limits::default(), Geometry::default());
    let entries = synth_assessor_eval(n as usize, ctx.seed(s.seed), &lim, &geo);
    let rows = assess_sweep(&model, &entries, &thresholds, &lim, &geo);
    let mut out = create(&a.out)?;
    write_sweep_csv(&mut out, &rows)?;
    out.flush()?;
    print!("{}", sweep_table(&rows));
    Ok(())
}

fn replay(ctx: &Ctx, a: ReplayArgs) -> anyhow::Result<()> {
    let s = &ctx.cfg.replay;
    let models = Models::load(&models_dir(a.models, s.models.as_ref()))?;
    let planners = parse_planners(a.planner.as_deref().or(s.planner.as_deref()).or(Some("safin")))?;
    let [kind] = planners.as_slice() else { bail!("replay takes a single planner") };
    let mpc = MpcConfig::default();
    let planner = models.planner(*kind, &mpc)?;
    let assess = models.assess_mode(parse_assess(a.assess, s)?, a.a_th.or(s.a_th).unwrap_or(DEFAULT_A_TH))?;
    let trace = load_trace(&a.trace)?;
    let mut cfg = EpisodeConfig { record: true, ..episode_config(s) };
    let mut traffic = ReplayTraffic::new(&trace, &cfg.lim);
    cfg.horizon = cfg.horizon.min(traffic.duration(&cfg.lim));
    let r = run_with_traffic(trace.initial_world(&cfg.geo), &mut traffic, &planner, &assess, &cfg)?;
    let mut out = create(&a.out)?;
    write_trajectory(&mut out, &r.trajectory)?;
    out.flush()?;
    println!("{}", outcome_line(&r));
    Ok(())
}
