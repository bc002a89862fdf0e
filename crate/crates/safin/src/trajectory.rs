//! Per-step episode logs, one CSV line per control step plus the final state.

use std::io::Write;

use safin_core::sim::StepRecord;

pub const TRAJECTORY_COLUMNS: [&str; 16] = [
    "t", "ego_px", "ego_py", "ego_vx", "ego_vy", "leader_px", "leader_py", "leader_vx", "follower_px", "follower_py", "follower_vx", "ax", "ay",
    "strategy", "assessed", "true_mode",
];

pub fn write_trajectory<W: Write>(out: W, records: &[StepRecord]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_COLUMNS)?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in records {
        let s = &r.world;
        let mut row: Vec<String> = [
            s.t, s.ego.px, s.ego.py, s.ego.vx, s.ego.vy, s.leader.px, s.leader.py, s.leader.vx, s.follower.px, s.follower.py, s.follower.vx,
        ]
        .iter()
        .map(f64::to_string)
        .collect();
        row.push(opt(r.action.map(|a| a.ax.to_string())));
        row.push(opt(r.action.map(|a| a.ay.to_string())));
        row.push(opt(r.strategy.map(|s| s.as_str().to_string())));
        row.push(opt(r.assessed.map(|m| m.as_str().to_string())));
        row.push(opt(r.true_mode.map(|m| m.as_str().to_string())));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
