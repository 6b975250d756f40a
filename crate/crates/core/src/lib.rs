//! Motion legibility cues for a mobile robot: scenario geometry, grid
//! navigation, the cue controller for flashing lights and projected arrows,
//! a deterministic simulator and top-down rendering.

pub mod cues;
pub mod geometry;
pub mod nav;
pub mod render;
pub mod scenario;
pub mod sim;

pub use cues::{CueConfig, CueInputs, CueMode, CueState, CueType};
pub use geometry::{Point, Pose2D};
pub use scenario::{builtin_scenarios, load_scenario, MovementScenario, ScenarioSpec};
pub use sim::{read_trace, run, write_trace, SimConfig, Trace, TraceRecord};
