//! Recorded surrounding traffic.
//!
//! A trace is a CSV file with the header `t,actor,px,vx`. `actor` is `leader`
//! or `follower`, each with strictly increasing timestamps, plus exactly one
//! `ego` row at the trace start giving the ego's initial position and speed.
//! Both recorded vehicles are resampled to the control step by linear
//! interpolation and then played back regardless of what the ego does.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::Context;
use safin_core::kinematics::{Geometry, KinematicState, Limits, WorldState};
use safin_core::safety::FollowerMode;
use safin_core::sim::{EpisodeResult, Traffic};

use crate::format::{csv_error, parse_f64, FormatError};

pub const TRACE_COLUMNS: [&str; 4] = ["t", "actor", "px", "vx"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    pub px: f64,
    pub vx: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayTrace {
    pub ego: TraceSample,
    pub leader: Vec<TraceSample>,
    pub follower: Vec<TraceSample>,
}

impl ReplayTrace {
    pub fn start(&self) -> f64 {
        self.ego.t
    }

    /// Initial world with everyone at their recorded start.
    pub fn initial_world(&self, g: &Geometry) -> WorldState {
        WorldState {
            ego: KinematicState::in_lane(self.ego.px, 0.0, self.ego.vx),
            leader: KinematicState::in_lane(self.leader[0].px, g.w_l, self.leader[0].vx),
            follower: KinematicState::in_lane(self.follower[0].px, g.w_l, self.follower[0].vx),
            t: 0.0,
        }
    }

    /// Recording of the other two vehicles in a logged episode.
    pub fn from_episode(r: &EpisodeResult) -> anyhow::Result<Self> {
        let first = r.trajectory.first().context("episode was run without recording")?;
        let sample = |s: &KinematicState, t: f64| TraceSample { t, px: s.px, vx: s.vx };
        Ok(Self {
            ego: sample(&first.world.ego, first.world.t),
            leader: r.trajectory.iter().map(|s| sample(&s.world.leader, s.world.t)).collect(),
            follower: r.trajectory.iter().map(|s| sample(&s.world.follower, s.world.t)).collect(),
        })
    }
}

pub fn read_trace<R: Read>(input: R) -> Result<ReplayTrace, FormatError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().map(str::trim).ne(TRACE_COLUMNS) {
        return Err(FormatError::new(1, format!("header must be `{}`", TRACE_COLUMNS.join(","))));
    }
    let mut ego: Option<(u64, TraceSample)> = None;
    let (mut leader, mut follower) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let s = TraceSample { t: parse_f64(&rec[0], line, "t")?, px: parse_f64(&rec[2], line, "px")?, vx: parse_f64(&rec[3], line, "vx")? };
        if s.vx < 0.0 {
            return Err(FormatError::field(line, "vx", "speed must be non-negative"));
        }
        let track: &mut Vec<TraceSample> = match rec[1].trim() {
            "leader" => &mut leader,
            "follower" => &mut follower,
            "ego" => {
                if ego.is_some() {
                    return Err(FormatError::field(line, "actor", "more than one `ego` row"));
                }
                ego = Some((line, s));
                continue;
            }
            other => return Err(FormatError::field(line, "actor", format!("unknown actor `{other}`"))),
        };
        if let Some(prev) = track.last() {
            if !(s.t > prev.t) {
                return Err(FormatError::field(line, "t", format!("timestamps must strictly increase ({} after {})", s.t, prev.t)));
            }
        }
        track.push(s);
    }
    let (ego_line, ego) = ego.ok_or_else(|| FormatError::field(0, "actor", "missing `ego` row"))?;
    for (name, track) in [("leader", &leader), ("follower", &follower)] {
        match track.first() {
            None => return Err(FormatError::field(0, "actor", format!("no `{name}` rows"))),
            Some(s) if s.t != ego.t => {
                return Err(FormatError::field(ego_line, "t", format!("`{name}` starts at {} but `ego` at {}", s.t, ego.t)));
            }
            Some(_) => {}
        }
    }
    Ok(ReplayTrace { ego, leader, follower })
}

pub fn write_trace<W: Write>(out: W, trace: &ReplayTrace) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    let mut row = |actor: &str, s: &TraceSample| w.write_record([s.t.to_string(), actor.to_string(), s.px.to_string(), s.vx.to_string()]);
    row("ego", &trace.ego)?;
    for s in &trace.leader {
        row("leader", s)?;
    }
    for s in &trace.follower {
        row("follower", s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_trace(path: &Path) -> anyhow::Result<ReplayTrace> {
    let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_trace(std::io::BufReader::new(f)).with_context(|| format!("trace {}", path.display()))
}

pub fn save_trace(path: &Path, trace: &ReplayTrace) -> anyhow::Result<()> {
    let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_trace(std::io::BufWriter::new(f), trace)
}

/// `(px, vx)` at `start + k * dt` for every `k` the track covers. Grid points
/// that coincide with a recorded timestamp reproduce the sample exactly.
pub fn resample(track: &[TraceSample], start: f64, dt: f64) -> Vec<(f64, f64)> {
    let Some(last) = track.last() else { return Vec::new() };
    let mut out = Vec::new();
    let mut seg = 0;
    for k in 0.. {
        let t = start + k as f64 * dt;
        if t > last.t + 1e-9 {
            break;
        }
        while seg + 1 < track.len() && track[seg + 1].t <= t {
            seg += 1;
        }
        let a = track[seg];
        if t <= a.t || seg + 1 == track.len() {
            out.push((a.px, a.vx));
            continue;
        }
        let b = track[seg + 1];
        let f = (t - a.t) / (b.t - a.t);
        out.push((a.px + f * (b.px - a.px), a.vx + f * (b.vx - a.vx)));
    }
    out
}

/// Plays back resampled leader and follower states.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayTraffic {
    leader: Vec<(f64, f64)>,
    follower: Vec<(f64, f64)>,
}

impl ReplayTraffic {
    pub fn new(trace: &ReplayTrace, lim: &Limits) -> Self {
        let leader = resample(&trace.leader, trace.start(), lim.dt);
        let follower = resample(&trace.follower, trace.start(), lim.dt);
        Self { leader, follower }
    }

    /// Seconds of playback available from the trace start.
    pub fn duration(&self, lim: &Limits) -> f64 {
        self.leader.len().min(self.follower.len()).saturating_sub(1) as f64 * lim.dt
    }
}

impl Traffic for ReplayTraffic {
    fn true_mode(&self) -> Option<FollowerMode> {
        None
    }

    fn advance(&mut self, w: &WorldState, lim: &Limits, _g: &Geometry) -> (KinematicState, KinematicState) {
        let k = (w.t / lim.dt).round() as usize + 1;
        let at = |track: &[(f64, f64)], s: &KinematicState| {
            let (px, vx) = track[k.min(track.len() - 1)];
            KinematicState { px, vx, ..*s }
        };
        (at(&self.leader, &w.leader), at(&self.follower, &w.follower))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: f64, px: f64, vx: f64) -> TraceSample {
        TraceSample { t, px, vx }
    }

    #[test]
    fn interpolation_and_exact_hits() {
        let track = [s(0.0, 0.0, 10.0), s(0.25, 2.5, 10.0), s(0.5, 5.5, 14.0)];
        let r = resample(&track, 0.0, 0.1);
        assert_eq!(r.len(), 6);
        assert_eq!(r[0], (0.0, 10.0));
        assert!((r[1].0 - 1.0).abs() < 1e-12);
        assert!((r[3].0 - (2.5 + 0.2 * 3.0)).abs() < 1e-12 && (r[3].1 - 10.8).abs() < 1e-12);
        assert_eq!(r[5], (5.5, 14.0));
    }

    #[test]
    fn parse_and_write_roundtrip() {
        let text = "t,actor,px,vx\n0,ego,0,25\n0,leader,20,24\n0.1,leader,22.4,24\n0,follower,-15,26\n0.1,follower,-12.4,26\n";
        let tr = read_trace(text.as_bytes()).unwrap();
        assert_eq!(tr.leader.len(), 2);
        let mut buf = Vec::new();
        write_trace(&mut buf, &tr).unwrap();
        assert_eq!(read_trace(&buf[..]).unwrap(), tr);
    }

    #[test]
    fn malformed_traces_are_located() {
        let err = read_trace("t,actor,px,vx\n0,ego,0,25\n0,leader,20,24\n0,leader,21,24\n0,follower,0,1\n".as_bytes()).unwrap_err();
        assert_eq!((err.line, err.field.as_deref()), (4, Some("t")));
        let err = read_trace("t,actor,px,vx\n0,ego,0,25\n0,bus,20,24\n".as_bytes()).unwrap_err();
        assert_eq!((err.line, err.field.as_deref()), (3, Some("actor")));
        let err = read_trace("t,actor,px,vx\n0,leader,20,24\n0,follower,0,1\n".as_bytes()).unwrap_err();
        assert!(err.message.contains("ego"));
        let err = read_trace("t,actor,px,vx\n0,ego,0,25\n0,leader,20,x\n".as_bytes()).unwrap_err();
        assert_eq!((err.line, err.field.as_deref()), (3, Some("vx")));
    }
}
