//! Structured test environments: a passage with an obstacle, a junction
//! (goal 1) and a follow-up goal either straight ahead or to the left.
//!
//! Scenario files are TOML documents:
//!
//! ```toml
//! name = "turn"
//! walls = [[-1.0, -1.5, 4.5, -1.5], ...]
//! obstacle = [[2.6, -0.9], [3.4, -0.9], [3.4, -0.1], [2.6, -0.1]]
//! start = [0.0, 0.0, 0.0]
//! goal1 = [6.0, 0.0, 0.0]
//! goal2 = [6.0, 6.0, 1.5707963267948966]
//! observer = [6.0, -4.0, 1.5707963267948966]
//! pause_at_goal1_s = 5.0
//! robot = { length_m = 0.83, width_m = 0.63 }
//! ```
//!
//! Units are meters and radians. Unknown keys are rejected.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{is_convex, polygon_distance, Point, Pose2D, Segment};

/// Minimum lateral offset (meters) for goal 2 to count as "left of" goal 1.
const TURN_LATERAL_MIN: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MovementScenario {
    Turn,
    Straight,
}

impl MovementScenario {
    pub fn name(self) -> &'static str {
        match self {
            MovementScenario::Turn => "turn",
            MovementScenario::Straight => "straight",
        }
    }
}

impl fmt::Display for MovementScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotFootprint {
    pub length_m: f64,
    pub width_m: f64,
}

impl RobotFootprint {
    pub fn half_width(&self) -> f64 {
        self.width_m / 2.0
    }

    /// Radius of the circle circumscribing the footprint rectangle.
    pub fn circumscribed_radius(&self) -> f64 {
        (self.length_m / 2.0).hypot(self.width_m / 2.0)
    }
}

impl Default for RobotFootprint {
    fn default() -> Self {
        Self {
            length_m: 0.83,
            width_m: 0.63,
        }
    }
}

/// A validated scenario. Construct through [`ScenarioSpec::new`],
/// [`load_scenario`] or [`builtin_scenarios`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    walls: Vec<[f64; 4]>,
    obstacle: Vec<[f64; 2]>,
    pub start: Pose2D,
    pub goal1: Pose2D,
    pub goal2: Pose2D,
    pub observer: Pose2D,
    pub pause_at_goal1_s: f64,
    pub robot: RobotFootprint,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario file: {0}")]
    Parse(String),
    #[error("invalid scenario: {}", join_errors(.0))]
    Validation(Vec<FieldError>),
}

/// One failed check, naming the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl ScenarioError {
    /// Field names of all validation failures (empty for I/O or parse errors).
    pub fn fields(&self) -> Vec<&str> {
        match self {
            ScenarioError::Validation(errs) => errs.iter().map(|e| e.field.as_str()).collect(),
            _ => Vec::new(),
        }
    }
}

fn join_errors(errs: &[FieldError]) -> String {
    errs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl ScenarioSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        walls: Vec<Segment>,
        obstacle: Vec<Point>,
        start: Pose2D,
        goal1: Pose2D,
        goal2: Pose2D,
        observer: Pose2D,
        pause_at_goal1_s: f64,
        robot: RobotFootprint,
    ) -> Result<Self, ScenarioError> {
        let spec = Self {
            name: name.into(),
            walls: walls
                .iter()
                .map(|s| [s.a.x, s.a.y, s.b.x, s.b.y])
                .collect(),
            obstacle: obstacle.iter().map(|p| [p.x, p.y]).collect(),
            start,
            goal1,
            goal2,
            observer,
            pause_at_goal1_s,
            robot,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn walls(&self) -> Vec<Segment> {
        self.walls
            .iter()
            .map(|w| Segment::new(Point::new(w[0], w[1]), Point::new(w[2], w[3])))
            .collect()
    }

    pub fn obstacle(&self) -> Vec<Point> {
        self.obstacle.iter().map(|p| Point::new(p[0], p[1])).collect()
    }

    /// Clearance from a point to the nearest wall or the obstacle.
    pub fn clearance(&self, p: Point) -> f64 {
        let wall = self
            .walls()
            .iter()
            .map(|w| w.distance_to(p))
            .fold(f64::INFINITY, f64::min);
        wall.min(polygon_distance(&self.obstacle(), p))
    }

    /// Axis-aligned bounds of all walls and the obstacle: (min, max).
    pub fn bounds(&self) -> (Point, Point) {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let pts = self
            .walls
            .iter()
            .flat_map(|w| [Point::new(w[0], w[1]), Point::new(w[2], w[3])])
            .chain(self.obstacle())
            .chain([
                self.start.position(),
                self.goal1.position(),
                self.goal2.position(),
                self.observer.position(),
            ]);
        for p in pts {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        (min, max)
    }

    /// Classifies the scenario by where goal 2 sits relative to goal 1.
    pub fn movement(&self) -> Option<MovementScenario> {
        let local = self.goal1.to_local(self.goal2.position());
        if local.y > TURN_LATERAL_MIN {
            Some(MovementScenario::Turn)
        } else if local.x > 0.0 && local.y.abs() <= 1e-9 * local.x.max(1.0) {
            Some(MovementScenario::Straight)
        } else {
            None
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut errs = Vec::new();
        let mut fail = |field: &str, message: String| {
            errs.push(FieldError {
                field: field.to_string(),
                message,
            })
        };

        if self.name.trim().is_empty() {
            fail("name", "must not be empty".into());
        }
        let poses = [self.start, self.goal1, self.goal2, self.observer];
        let all_finite = self
            .walls
            .iter()
            .flatten()
            .chain(self.obstacle.iter().flatten())
            .copied()
            .chain(poses.into_iter().flat_map(<[f64; 3]>::from))
            .chain([self.pause_at_goal1_s, self.robot.length_m, self.robot.width_m])
            .all(f64::is_finite);
        if !all_finite {
            fail("*", "all numbers must be finite".into());
        } else {
            if !(self.pause_at_goal1_s >= 0.0) {
                fail("pause_at_goal1_s", format!("must be >= 0, got {}", self.pause_at_goal1_s));
            }
            if !(self.robot.length_m > 0.0) {
                fail("robot.length_m", format!("must be > 0, got {}", self.robot.length_m));
            }
            if !(self.robot.width_m > 0.0) {
                fail("robot.width_m", format!("must be > 0, got {}", self.robot.width_m));
            }
            if self.walls.is_empty() {
                fail("walls", "at least one wall segment is required".into());
            }
            let obstacle = self.obstacle();
            if obstacle.len() < 3 || !is_convex(&obstacle) {
                fail("obstacle", "must be a convex polygon with at least 3 vertices".into());
            }
            if self.robot.width_m > 0.0 {
                let inflation = self.robot.half_width();
                let walls = self.walls();
                for (field, pose) in [("start", self.start), ("goal1", self.goal1), ("goal2", self.goal2)] {
                    let p = pose.position();
                    if obstacle.len() >= 3 && polygon_distance(&obstacle, p) <= inflation {
                        fail(field, format!("({}, {}) collides with the inflated obstacle", p.x, p.y));
                    }
                    if let Some(i) = walls.iter().position(|w| w.distance_to(p) <= inflation) {
                        fail(field, format!("({}, {}) collides with wall {i}", p.x, p.y));
                    }
                }
            }
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Validation(errs))
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let spec: ScenarioSpec =
            toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml()).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioSpec, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ScenarioSpec::from_toml(&text)
}

/// Dimensions of the built-in environment. The junction (goal 1) is a
/// four-way crossing: the approach leg with the obstacle, a straight leg,
/// a left leg and a right leg where the observer stands.
#[derive(Debug, Clone, Copy)]
pub struct LayoutParams {
    pub passage_width: f64,
    pub leg_length: f64,
    pub obstacle_size: f64,
    /// Lateral offset of the obstacle center from the passage axis (negative = right).
    pub obstacle_lateral_offset: f64,
    pub observer_distance: f64,
    pub pause_at_goal1_s: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            passage_width: 3.0,
            leg_length: 6.0,
            obstacle_size: 0.8,
            obstacle_lateral_offset: -0.5,
            observer_distance: 4.0,
            pause_at_goal1_s: 5.0,
        }
    }
}

/// Builds one built-in scenario from layout parameters.
pub fn builtin_scenario(kind: MovementScenario, params: &LayoutParams) -> ScenarioSpec {
    let h = params.passage_width / 2.0;
    let l = params.leg_length;
    // Back wall sits one meter behind the start; side legs end one meter past their goals.
    let back = -1.0;
    let jx = l;
    let (xw, xe) = (jx - h, jx + h);
    let far_x = jx + l + 1.0;
    let far_left = l + 1.0;
    let far_right = -(params.observer_distance + 1.5);

    let p = Point::new;
    let walls = vec![
        Segment::new(p(back, -h), p(back, h)),
        Segment::new(p(back, -h), p(xw, -h)),
        Segment::new(p(back, h), p(xw, h)),
        Segment::new(p(xw, h), p(xw, far_left)),
        Segment::new(p(xw, far_left), p(xe, far_left)),
        Segment::new(p(xe, far_left), p(xe, h)),
        Segment::new(p(xe, h), p(far_x, h)),
        Segment::new(p(far_x, h), p(far_x, -h)),
        Segment::new(p(far_x, -h), p(xe, -h)),
        Segment::new(p(xe, -h), p(xe, far_right)),
        Segment::new(p(xe, far_right), p(xw, far_right)),
        Segment::new(p(xw, far_right), p(xw, -h)),
    ];
    let c = Point::new(l / 2.0, params.obstacle_lateral_offset);
    let s = params.obstacle_size / 2.0;
    let obstacle = vec![
        p(c.x - s, c.y - s),
        p(c.x + s, c.y - s),
        p(c.x + s, c.y + s),
        p(c.x - s, c.y + s),
    ];
    let goal2 = match kind {
        MovementScenario::Turn => Pose2D::new(jx, l, FRAC_PI_2),
        MovementScenario::Straight => Pose2D::new(jx + l, 0.0, 0.0),
    };
    ScenarioSpec::new(
        kind.name(),
        walls,
        obstacle,
        Pose2D::new(0.0, 0.0, 0.0),
        Pose2D::new(jx, 0.0, 0.0),
        goal2,
        Pose2D::new(jx, -params.observer_distance, FRAC_PI_2),
        params.pause_at_goal1_s,
        RobotFootprint::default(),
    )
    .expect("built-in layout is valid")
}

/// The two movement scenarios with the default layout, Turn first.
pub fn builtin_scenarios() -> Vec<(MovementScenario, ScenarioSpec)> {
    let params = LayoutParams::default();
    [MovementScenario::Turn, MovementScenario::Straight]
        .into_iter()
        .map(|k| (k, builtin_scenario(k, &params)))
        .collect()
}

/// Looks up a built-in scenario by name ("turn" or "straight").
pub fn builtin_by_name(name: &str) -> Option<ScenarioSpec> {
    builtin_scenarios()
        .into_iter()
        .find(|(k, _)| k.name().eq_ignore_ascii_case(name))
        .map(|(_, s)| s)
}
