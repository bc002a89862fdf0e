//! Metric tables in CSV and fixed-width text.

use std::fmt::Write as _;
use std::io::Write;

use safin_core::assessor::SweepRow;
use safin_core::sim::Metrics;

/// One (class, planner) row of a batch experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub class: String,
    pub planner: String,
    pub assess: String,
    pub metrics: Metrics,
}

pub const EXPERIMENT_COLUMNS: [&str; 9] =
    ["class", "planner", "assess", "episodes", "success_rate", "collision_rate", "timeout_rate", "mean_crossing_time", "mean_final_py"];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{:.2}%", 100.0 * v))
}

fn num(v: Option<f64>, unit: &str) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}{unit}"))
}

pub fn write_experiment_csv<W: Write>(out: W, rows: &[ExperimentRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EXPERIMENT_COLUMNS)?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.class.clone(),
            r.planner.clone(),
            r.assess.clone(),
            m.count.to_string(),
            opt(m.success_rate),
            opt(m.collision_rate),
            opt(m.timeout_rate),
            opt(m.mean_crossing_time),
            opt(m.mean_final_py),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn experiment_table(rows: &[ExperimentRow]) -> String {
    let mut s = String::new();
    writeln!(s, "{:<7} {:<7} {:<18} {:>8} {:>9} {:>10} {:>9} {:>10} {:>9}", "class", "planner", "assess", "episodes", "success", "collision", "timeout", "cross time", "final py").unwrap();
    for r in rows {
        let m = &r.metrics;
        writeln!(
            s,
            "{:<7} {:<7} {:<18} {:>8} {:>9} {:>10} {:>9} {:>10} {:>9}",
            r.class,
            r.planner,
            r.assess,
            m.count,
            pct(m.success_rate),
            pct(m.collision_rate),
            pct(m.timeout_rate),
            num(m.mean_crossing_time, " s"),
            num(m.mean_final_py, " m")
        )
        .unwrap();
    }
    s
}

pub const SWEEP_COLUMNS: [&str; 5] = ["difficulty", "a_th", "count", "uncertain_rate", "error_rate"];

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.difficulty.as_str().to_string(),
            r.a_th.to_string(),
            r.count.to_string(),
            r.uncertain_rate().to_string(),
            r.error_rate().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut s = String::new();
    writeln!(s, "{:<10} {:>6} {:>8} {:>10} {:>8}", "difficulty", "a_th", "count", "uncertain", "error").unwrap();
    for r in rows {
        writeln!(
            s,
            "{:<10} {:>6} {:>8} {:>10} {:>8}",
            r.difficulty.as_str(),
            r.a_th,
            r.count,
            pct(Some(r.uncertain_rate())),
            pct(Some(r.error_rate()))
        )
        .unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use safin_core::sim::{aggregate, EpisodeSummary};

    #[test]
    fn csv_leaves_absent_means_empty() {
        let rows = [ExperimentRow { class: "4".into(), planner: "safin".into(), assess: "oracle".into(), metrics: aggregate(&[]) }];
        let mut buf = Vec::new();
        write_experiment_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1), Some("4,safin,oracle,0,,,,,"));
        assert!(experiment_table(&rows).contains('-'));
    }

    #[test]
    fn table_shows_percentages() {
        let m = aggregate(&[EpisodeSummary { collided: false, success: true, crossing_time: Some(2.0), final_py: 3.4 }]);
        let rows = [ExperimentRow { class: "1".into(), planner: "nn".into(), assess: "-".into(), metrics: m }];
        let t = experiment_table(&rows);
        assert!(t.contains("100.00%") && t.contains("2.00 s") && t.contains("3.40 m"), "{t}");
    }
}
