//! Fixed-timestep scenario runner and trace files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cues::{compute_inputs, CueConfig, CueController, CueInputs, CueMode, CueState, CueType};
use crate::geometry::{normalize_angle, Pose2D};
use crate::nav::{
    follow_step, integrate, plan_path, FollowerLimits, GridConfig, NavError, OccupancyGrid, VelocityCommand,
};
use crate::scenario::ScenarioSpec;

pub const TRACE_SCHEMA: &str = "legibility-trace";
pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Nav(#[from] NavError),
    #[error("run did not reach goal 2 within {0} ticks")]
    NonTermination(u64),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("unsupported trace schema {schema} v{version} (expected {TRACE_SCHEMA} v{TRACE_VERSION})")]
    Version { schema: String, version: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub goal_tolerance: f64,
    pub cue_type: CueType,
    pub cue_mode: Option<CueMode>,
    /// Replan the current leg every N motion ticks; `None` plans once per leg.
    pub replan_every: Option<u32>,
    pub seed: u64,
    pub max_ticks: u64,
    /// On arrival, turn in place to the goal's heading until within this
    /// many radians. `None` skips the alignment.
    pub align_tolerance: Option<f64>,
    pub cue: CueConfig,
    pub follower: FollowerLimits,
    pub grid: GridConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            goal_tolerance: 0.15,
            cue_type: CueType::NoCue,
            cue_mode: None,
            replan_every: None,
            seed: 0,
            max_ticks: 20_000,
            align_tolerance: Some(0.02),
            cue: CueConfig::default(),
            follower: FollowerLimits::default(),
            grid: GridConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn with_cue(cue_type: CueType, cue_mode: Option<CueMode>) -> Self {
        Self {
            cue_type,
            cue_mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0) {
            return Err(SimError::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.goal_tolerance > 0.0) {
            return Err(SimError::Config(format!(
                "goal_tolerance must be > 0, got {}",
                self.goal_tolerance
            )));
        }
        if self.cue_type != CueType::NoCue && self.cue_mode.is_none() {
            return Err(SimError::Config(format!("cue type {} needs a mode", self.cue_type)));
        }
        if self.replan_every == Some(0) {
            return Err(SimError::Config("replan_every must be at least 1".into()));
        }
        self.cue.validate().map_err(SimError::Config)
    }
}

/// Number of ticks spanned by a pause. Guards against `5.0 / 0.05`
/// landing a hair above 100 in floating point.
pub fn pause_ticks(pause_s: f64, dt: f64) -> u64 {
    if pause_s <= 0.0 {
        return 0;
    }
    (pause_s / dt - 1e-9).ceil() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub pose: Pose2D,
    pub cmd: VelocityCommand,
    pub inputs: CueInputs,
    pub cue: CueState,
    /// 1 while heading for goal 1 (and during the pause), 2 afterwards.
    pub leg: u8,
    pub paused: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub schema: String,
    pub version: u32,
    pub scenario: String,
    pub cue_type: CueType,
    pub cue_mode: Option<CueMode>,
    pub dt: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Runs both legs of a scenario: start to goal 1, a pause at goal 1 that
/// previews leg 2, then goal 1 to goal 2. One record per tick.
pub fn run(spec: &ScenarioSpec, cfg: &SimConfig) -> Result<Trace, SimError> {
    cfg.validate()?;
    let grid = OccupancyGrid::from_scenario(spec, &cfg.grid);
    let mut controller = CueController::new(cfg.cue_type, cfg.cue_mode, cfg.cue);
    let mut records: Vec<TraceRecord> = Vec::new();
    let mut pose = spec.start;
    let mut tick: u64 = 0;
    let now = |tick: u64| tick as f64 * cfg.dt;
    let guard = |tick: u64| {
        if tick >= cfg.max_ticks {
            Err(SimError::NonTermination(cfg.max_ticks))
        } else {
            Ok(())
        }
    };

    // Leg 1 aims at goal 1 with goal 2 next. During leg 2 goal 2 plays
    // the role of both goals, so the turn condition cannot fire.
    let mut path = plan_path(&grid, pose, spec.goal1)?;
    for (leg, target, next) in [(1u8, spec.goal1, spec.goal2), (2u8, spec.goal2, spec.goal2)] {
        let mut motion_ticks: u32 = 0;
        loop {
            guard(tick)?;
            if let Some(n) = cfg.replan_every {
                if motion_ticks > 0 && motion_ticks % n == 0 {
                    if let Ok(p) = plan_path(&grid, pose, target) {
                        path = p;
                    }
                }
            }
            let inputs = compute_inputs(pose, &path, target, next)?;
            let arrived = pose.position().distance(target.position()) <= cfg.goal_tolerance;
            let heading_error = normalize_angle(target.heading() - pose.heading());
            if arrived && cfg.align_tolerance.is_some_and(|tol| heading_error.abs() > tol) {
                // Rotate in place; the last step lands exactly on the goal heading.
                let rate = (heading_error.abs() / cfg.dt).min(cfg.follower.max_angular);
                let cmd = VelocityCommand::new(0.0, rate.copysign(heading_error));
                let cue = controller.step(pose, &inputs, now(tick));
                records.push(TraceRecord {
                    t: now(tick),
                    pose,
                    cmd,
                    inputs,
                    cue,
                    leg,
                    paused: false,
                });
                pose = integrate(pose, cmd, cfg.dt);
                tick += 1;
                continue;
            }

            if arrived && leg == 2 {
                let cue = controller.step(pose, &inputs, now(tick));
                records.push(TraceRecord {
                    t: now(tick),
                    pose,
                    cmd: VelocityCommand::ZERO,
                    inputs,
                    cue,
                    leg,
                    paused: false,
                });
                return Ok(Trace {
                    header: header(spec, cfg),
                    records,
                });
            }

            if arrived {
                // Junction pause. The leg-2 plan is made now and the cues
                // preview it: goal 1 stays the junction, goal 2 is next.
                path = plan_path(&grid, pose, spec.goal2)?;
                for _ in 0..pause_ticks(spec.pause_at_goal1_s, cfg.dt) {
                    guard(tick)?;
                    let inputs = compute_inputs(pose, &path, spec.goal1, spec.goal2)?;
                    let cue = controller.step(pose, &inputs, now(tick));
                    records.push(TraceRecord {
                        t: now(tick),
                        pose,
                        cmd: VelocityCommand::ZERO,
                        inputs,
                        cue,
                        leg,
                        paused: true,
                    });
                    tick += 1;
                }
                break;
            }

            let cmd = follow_step(pose, &path, &cfg.follower)?;
            let cue = controller.step(pose, &inputs, now(tick));
            records.push(TraceRecord {
                t: now(tick),
                pose,
                cmd,
                inputs,
                cue,
                leg,
                paused: false,
            });
            pose = integrate(pose, cmd, cfg.dt);
            tick += 1;
            motion_ticks += 1;
        }
    }
    unreachable!("leg 2 returns on arrival")
}

fn header(spec: &ScenarioSpec, cfg: &SimConfig) -> TraceHeader {
    TraceHeader {
        schema: TRACE_SCHEMA.to_string(),
        version: TRACE_VERSION,
        scenario: spec.name.clone(),
        cue_type: cfg.cue_type,
        cue_mode: cfg.cue_mode,
        dt: cfg.dt,
        seed: cfg.seed,
    }
}

/// Serializes a trace: a header line, then one JSON object per record.
pub fn trace_to_string(trace: &Trace) -> String {
    let mut out = serde_json::to_string(&trace.header).expect("header serializes");
    out.push('\n');
    for r in &trace.records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn write_trace(trace: &Trace, path: impl AsRef<Path>) -> Result<(), TraceError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(trace_to_string(trace).as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Trace, TraceError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let first = lines.next().ok_or(TraceError::Format {
        line: 1,
        message: "empty file".into(),
    })??;
    let value: serde_json::Value = serde_json::from_str(&first).map_err(|e| TraceError::Format {
        line: 1,
        message: e.to_string(),
    })?;
    let schema = value.get("schema").and_then(|v| v.as_str()).unwrap_or("").to_string();
    let version = value.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if schema != TRACE_SCHEMA || version != TRACE_VERSION {
        return Err(TraceError::Version { schema, version });
    }
    let header: TraceHeader = serde_json::from_value(value).map_err(|e| TraceError::Format {
        line: 1,
        message: e.to_string(),
    })?;
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| TraceError::Format {
            line: i + 2,
            message: e.to_string(),
        })?;
        records.push(rec);
    }
    Ok(Trace { header, records })
}

/// Counts per cue source over a trace, for run summaries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TraceSummary {
    pub ticks: usize,
    pub paused_ticks: usize,
    pub pause_start: Option<usize>,
    pub path_active: usize,
    pub goal_active: usize,
    pub lit_lights: usize,
    pub visible_arrows: usize,
}

pub fn summarize(trace: &Trace) -> TraceSummary {
    use crate::cues::ActiveSource;
    let mut s = TraceSummary {
        ticks: trace.records.len(),
        ..Default::default()
    };
    for (i, r) in trace.records.iter().enumerate() {
        if r.paused {
            s.paused_ticks += 1;
            s.pause_start.get_or_insert(i);
        }
        match r.cue.active_source {
            ActiveSource::Path => s.path_active += 1,
            ActiveSource::Goal => s.goal_active += 1,
            ActiveSource::None => {}
        }
        s.lit_lights += usize::from(r.cue.lights.lit);
        s.visible_arrows += usize::from(r.cue.arrow.visible);
    }
    s
}
