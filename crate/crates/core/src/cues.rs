//! Cue controller: maps the robot's navigation state to Flashing Lights and
//! Projected Arrows outputs in Path, Goal and Path&Goal modes.
//!
//! All angles here are degrees in the robot frame, positive to the left.
//! Thresholds are compared against absolute angles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_degrees, Point, Pose2D};
use crate::nav::{point_along_path, NavError, PlannedPath};

/// Distance along the planned path used for the path angle.
pub const PATH_PREVIEW_M: f64 = 1.0;

pub const LED_COLOR: &str = "orange";
pub const ARROW_COLOR: &str = "green";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CueType {
    Arrows,
    Lights,
    #[serde(rename = "none")]
    NoCue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CueMode {
    Path,
    Goal,
    #[serde(rename = "pathgoal")]
    PathGoal,
}

impl fmt::Display for CueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CueType::Arrows => "arrows",
            CueType::Lights => "lights",
            CueType::NoCue => "none",
        })
    }
}

impl fmt::Display for CueMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CueMode::Path => "path",
            CueMode::Goal => "goal",
            CueMode::PathGoal => "pathgoal",
        })
    }
}

impl FromStr for CueType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "arrows" => Ok(CueType::Arrows),
            "lights" => Ok(CueType::Lights),
            "none" | "nocue" => Ok(CueType::NoCue),
            other => Err(format!("unknown cue type '{other}' (expected arrows, lights or none)")),
        }
    }
}

impl FromStr for CueMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "path" => Ok(CueMode::Path),
            "goal" => Ok(CueMode::Goal),
            "pathgoal" | "path&goal" | "path-goal" => Ok(CueMode::PathGoal),
            other => Err(format!("unknown cue mode '{other}' (expected path, goal or pathgoal)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CueInputs {
    pub theta_p: f64,
    pub theta_g1: f64,
    pub theta_g1g2: f64,
    pub d: f64,
}

impl CueInputs {
    pub fn new(theta_p: f64, theta_g1: f64, theta_g1g2: f64, d: f64) -> Self {
        Self {
            theta_p,
            theta_g1,
            theta_g1g2,
            d,
        }
    }

    /// Negates every angle.
    pub fn mirrored(&self) -> Self {
        Self::new(
            normalize_degrees(-self.theta_p),
            normalize_degrees(-self.theta_g1),
            normalize_degrees(-self.theta_g1g2),
            self.d,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CueConfig {
    pub freq_min: f64,
    pub freq_max: f64,
    pub path_angle_threshold: f64,
    pub goal_bearing_threshold: f64,
    pub goal_distance_threshold: f64,
    pub goal_turn_threshold: f64,
    /// Hz per degree of path angle.
    pub path_freq_coeff: f64,
    /// Hz per meter of distance to goal 1.
    pub goal_freq_coeff: f64,
    /// Use `coeff * (distance_threshold - d)` instead of `coeff * d`, so the
    /// goal flash speeds up on approach.
    pub invert_goal_frequency: bool,
    pub arrow_length: f64,
    /// Distance from robot center to arrow tail, along the heading.
    pub arrow_anchor_offset: f64,
    /// Fraction of each flash period spent lit.
    pub duty_cycle: f64,
    /// Ticks an activation must persist before it shows (0 = immediate).
    pub activation_smoothing: u32,
}

impl Default for CueConfig {
    fn default() -> Self {
        Self {
            freq_min: 0.5,
            freq_max: 5.0,
            path_angle_threshold: 20.0,
            goal_bearing_threshold: 45.0,
            goal_distance_threshold: 1.5,
            goal_turn_threshold: 20.0,
            path_freq_coeff: 0.1,
            goal_freq_coeff: 5.0,
            invert_goal_frequency: false,
            arrow_length: 0.30,
            arrow_anchor_offset: 0.5,
            duty_cycle: 0.5,
            activation_smoothing: 0,
        }
    }
}

impl CueConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.freq_min > 0.0 && self.freq_min < self.freq_max) {
            return Err("need 0 < freq_min < freq_max".into());
        }
        let thresholds = [
            self.path_angle_threshold,
            self.goal_bearing_threshold,
            self.goal_distance_threshold,
            self.goal_turn_threshold,
        ];
        if thresholds.iter().any(|&t| !(t > 0.0)) {
            return Err("thresholds must be positive".into());
        }
        if !(self.duty_cycle > 0.0 && self.duty_cycle < 1.0) {
            return Err("duty_cycle must lie in (0, 1)".into());
        }
        if !(self.arrow_length > 0.0) {
            return Err("arrow_length must be positive".into());
        }
        Ok(())
    }

    fn clamp_freq(&self, f: f64) -> f64 {
        f.clamp(self.freq_min, self.freq_max)
    }

    fn path_frequency(&self, theta_p: f64) -> f64 {
        self.clamp_freq(self.path_freq_coeff * theta_p.abs())
    }

    fn goal_frequency(&self, d: f64) -> f64 {
        let raw = if self.invert_goal_frequency {
            self.goal_freq_coeff * (self.goal_distance_threshold - d)
        } else {
            self.goal_freq_coeff * d
        };
        self.clamp_freq(raw)
    }

    /// Goal-mode arrow activation: near goal 1 and facing it.
    pub fn arrows_goal_active(&self, inp: &CueInputs) -> bool {
        inp.d < self.goal_distance_threshold && inp.theta_g1.abs() < self.goal_bearing_threshold
    }

    /// Goal-mode light activation: the arrow condition plus a turn at goal 1.
    pub fn lights_goal_active(&self, inp: &CueInputs) -> bool {
        self.arrows_goal_active(inp) && inp.theta_g1g2.abs() > self.goal_turn_threshold
    }

    pub fn lights_path_active(&self, inp: &CueInputs) -> bool {
        inp.theta_p.abs() > self.path_angle_threshold
    }
}

/// Square wave: true during the first `duty` fraction of each period,
/// with phase zero at `t = 0`.
pub fn flash_phase(freq: f64, t: f64, duty: f64) -> bool {
    (t * freq).rem_euclid(1.0) < duty
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn of(angle: f64) -> Side {
        if angle > 0.0 {
            Side::Left
        } else {
            Side::Right
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LightState {
    pub left_active: bool,
    pub right_active: bool,
    pub frequency: Option<f64>,
    pub lit: bool,
}

impl LightState {
    pub const OFF: LightState = LightState {
        left_active: false,
        right_active: false,
        frequency: None,
        lit: false,
    };

    fn flashing(side: Side, frequency: f64, t: f64, duty: f64) -> Self {
        Self {
            left_active: side == Side::Left,
            right_active: side == Side::Right,
            frequency: Some(frequency),
            lit: flash_phase(frequency, t, duty),
        }
    }

    pub fn is_active(&self) -> bool {
        self.left_active || self.right_active
    }

    pub fn active_side(&self) -> Option<Side> {
        match (self.left_active, self.right_active) {
            (true, _) => Some(Side::Left),
            (_, true) => Some(Side::Right),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrowFill {
    Solid,
    Dashed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrowState {
    pub visible: bool,
    /// Degrees in the robot frame.
    pub direction: f64,
    pub fill: ArrowFill,
    pub frequency: Option<f64>,
    pub lit: bool,
    pub tail: Point,
    pub tip: Point,
    /// Outline vertices. Produced in the robot frame by the cue operations;
    /// [`ArrowState::placed`] moves it into the world frame.
    pub polygon: Vec<Point>,
}

impl ArrowState {
    pub fn hidden() -> Self {
        Self {
            visible: false,
            direction: 0.0,
            fill: ArrowFill::Solid,
            frequency: None,
            lit: false,
            tail: Point::new(0.0, 0.0),
            tip: Point::new(0.0, 0.0),
            polygon: Vec::new(),
        }
    }

    fn shown(direction: f64, fill: ArrowFill, frequency: Option<f64>, lit: bool, cfg: &CueConfig) -> Self {
        let origin = Pose2D::new(0.0, 0.0, 0.0);
        let (tail, tip, polygon) = arrow_geometry(origin, direction, cfg);
        Self {
            visible: true,
            direction,
            fill,
            frequency,
            lit,
            tail,
            tip,
            polygon,
        }
    }

    /// Re-expresses the geometry relative to a robot at `pose`.
    pub fn placed(mut self, pose: Pose2D) -> Self {
        if self.visible {
            self.tail = pose.to_world(self.tail);
            self.tip = pose.to_world(self.tip);
            for p in &mut self.polygon {
                *p = pose.to_world(*p);
            }
        }
        self
    }
}

/// Share of the arrow length taken by the head.
pub const ARROW_HEAD_FRACTION: f64 = 0.4;
pub const ARROW_HEAD_WIDTH_FRACTION: f64 = 0.4;
pub const ARROW_SHAFT_WIDTH_FRACTION: f64 = 0.15;

/// Tail, tip and outline of an arrow anchored in front of a robot at `pose`,
/// pointing `direction` degrees off its heading.
pub fn arrow_geometry(pose: Pose2D, direction: f64, cfg: &CueConfig) -> (Point, Point, Vec<Point>) {
    let len = cfg.arrow_length;
    let tail_local = Point::new(cfg.arrow_anchor_offset, 0.0);
    let (s, c) = direction.to_radians().sin_cos();
    // Arrow frame: u along the arrow, v to its left.
    let at = |u: f64, v: f64| {
        let local = Point::new(tail_local.x + c * u - s * v, tail_local.y + s * u + c * v);
        pose.to_world(local)
    };
    let neck = len * (1.0 - ARROW_HEAD_FRACTION);
    let hw = len * ARROW_HEAD_WIDTH_FRACTION / 2.0;
    let sw = len * ARROW_SHAFT_WIDTH_FRACTION / 2.0;
    let polygon = vec![
        at(0.0, sw),
        at(neck, sw),
        at(neck, hw),
        at(len, 0.0),
        at(neck, -hw),
        at(neck, -sw),
        at(0.0, -sw),
    ];
    (at(0.0, 0.0), at(len, 0.0), polygon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActiveSource {
    #[default]
    None,
    Path,
    Goal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueState {
    pub lights: LightState,
    pub arrow: ArrowState,
    pub active_source: ActiveSource,
}

impl CueState {
    /// No cue shown (also the No Cue control state).
    pub fn empty() -> Self {
        Self {
            lights: LightState::OFF,
            arrow: ArrowState::hidden(),
            active_source: ActiveSource::None,
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.lights.is_active() && !self.arrow.visible && self.active_source == ActiveSource::None
    }
}

/// Cue signals for a robot at `pose` following `path`, with goal 1 as the
/// next intermediate goal and goal 2 the one after it.
pub fn compute_inputs(pose: Pose2D, path: &PlannedPath, goal1: Pose2D, goal2: Pose2D) -> Result<CueInputs, NavError> {
    let ahead = point_along_path(path, pose, PATH_PREVIEW_M)?;
    let theta_p = pose.bearing_to(ahead).to_degrees();
    let theta_g1 = pose.bearing_to(goal1.position()).to_degrees();
    let dx = goal2.x - goal1.x;
    let dy = goal2.y - goal1.y;
    let theta_g1g2 = if dx == 0.0 && dy == 0.0 {
        0.0
    } else {
        (dy.atan2(dx) - pose.heading()).to_degrees()
    };
    Ok(CueInputs {
        theta_p: normalize_degrees(theta_p),
        theta_g1: normalize_degrees(theta_g1),
        theta_g1g2: normalize_degrees(theta_g1g2),
        d: pose.position().distance(goal1.position()),
    })
}

/// Path-mode lights: flash on the side of the path angle once it exceeds the
/// threshold, at a rate proportional to the angle.
pub fn lights_path(inp: &CueInputs, cfg: &CueConfig, t: f64) -> LightState {
    if !cfg.lights_path_active(inp) {
        return LightState::OFF;
    }
    let f = cfg.path_frequency(inp.theta_p);
    LightState::flashing(Side::of(inp.theta_p), f, t, cfg.duty_cycle)
}

/// Goal-mode lights: near goal 1 and facing it, flash on the side of the
/// upcoming turn.
pub fn lights_goal(inp: &CueInputs, cfg: &CueConfig, t: f64) -> LightState {
    if !cfg.lights_goal_active(inp) {
        return LightState::OFF;
    }
    let f = cfg.goal_frequency(inp.d);
    LightState::flashing(Side::of(inp.theta_g1g2), f, t, cfg.duty_cycle)
}

/// Path-mode arrow: always shown, solid, pointing along the path angle.
pub fn arrows_path(inp: &CueInputs, cfg: &CueConfig) -> ArrowState {
    ArrowState::shown(inp.theta_p, ArrowFill::Solid, None, true, cfg)
}

/// Goal-mode arrow: dashed and flashing, pointing toward goal 2 as seen
/// from goal 1. Unlike the lights it shows for straight continuations too.
pub fn arrows_goal(inp: &CueInputs, cfg: &CueConfig, t: f64) -> ArrowState {
    if !cfg.arrows_goal_active(inp) {
        return ArrowState::hidden();
    }
    let f = cfg.goal_frequency(inp.d);
    ArrowState::shown(
        inp.theta_g1g2,
        ArrowFill::Dashed,
        Some(f),
        flash_phase(f, t, cfg.duty_cycle),
        cfg,
    )
}

/// One evaluation of the cue for a type and mode. `t` is the time since the
/// current activation began (flash phase origin).
pub fn cue_step(cue_type: CueType, mode: CueMode, inp: &CueInputs, cfg: &CueConfig, t: f64) -> CueState {
    let goal_fires = match cue_type {
        CueType::Lights => cfg.lights_goal_active(inp),
        CueType::Arrows => cfg.arrows_goal_active(inp),
        CueType::NoCue => return CueState::empty(),
    };
    let use_goal = match mode {
        CueMode::Path => false,
        CueMode::Goal => true,
        CueMode::PathGoal => goal_fires,
    };
    let mut state = CueState::empty();
    match (cue_type, use_goal) {
        (CueType::Lights, false) => state.lights = lights_path(inp, cfg, t),
        (CueType::Lights, true) => state.lights = lights_goal(inp, cfg, t),
        (CueType::Arrows, false) => state.arrow = arrows_path(inp, cfg),
        (CueType::Arrows, true) => state.arrow = arrows_goal(inp, cfg, t),
        (CueType::NoCue, _) => unreachable!(),
    }
    let shown = state.lights.is_active() || state.arrow.visible;
    state.active_source = match (shown, use_goal) {
        (false, _) => ActiveSource::None,
        (true, false) => ActiveSource::Path,
        (true, true) => ActiveSource::Goal,
    };
    state
}

/// Identity of what is currently flashing; a change restarts the phase.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Activation {
    source: ActiveSource,
    side: Option<Side>,
}

/// Stateful wrapper around [`cue_step`]: tracks the activation edge so each
/// new activation starts its flash at phase zero, optionally debounces
/// activations, and places arrows in the world frame.
#[derive(Debug, Clone)]
pub struct CueController {
    pub cue_type: CueType,
    pub mode: Option<CueMode>,
    pub cfg: CueConfig,
    current: Option<Activation>,
    phase_origin: f64,
    pending: Option<(Activation, u32)>,
}

impl CueController {
    pub fn new(cue_type: CueType, mode: Option<CueMode>, cfg: CueConfig) -> Self {
        Self {
            cue_type,
            mode,
            cfg,
            current: None,
            phase_origin: 0.0,
            pending: None,
        }
    }

    pub fn step(&mut self, pose: Pose2D, inp: &CueInputs, now: f64) -> CueState {
        let Some(mode) = self.mode.filter(|_| self.cue_type != CueType::NoCue) else {
            return CueState::empty();
        };
        let probe = cue_step(self.cue_type, mode, inp, &self.cfg, 0.0);
        let activation = (probe.active_source != ActiveSource::None).then(|| Activation {
            source: probe.active_source,
            side: probe.lights.active_side(),
        });

        if activation != self.current {
            let debounced = match (activation, self.cfg.activation_smoothing) {
                (None, _) | (_, 0) => true,
                (Some(a), need) => {
                    let count = match self.pending {
                        Some((p, n)) if p == a => n + 1,
                        _ => 1,
                    };
                    self.pending = Some((a, count));
                    count > need
                }
            };
            if !debounced {
                return CueState::empty();
            }
            self.current = activation;
            self.phase_origin = now;
            self.pending = None;
        } else {
            self.pending = None;
        }

        let mut state = cue_step(self.cue_type, mode, inp, &self.cfg, now - self.phase_origin);
        state.arrow = state.arrow.placed(pose);
        state
    }
}
