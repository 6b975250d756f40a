use std::path::Path;

use anyhow::anyhow;
use legibility_core::cues::CueType;
use legibility_core::scenario::{builtin_by_name, builtin_scenarios, load_scenario, ScenarioError, ScenarioSpec};
use legibility_core::sim::{run as run_sim, summarize, write_trace, SimConfig, SimError, TraceError};

use crate::{Failure, Outcome, SimulateArgs};

pub fn scenario_failure(e: ScenarioError) -> Failure {
    match e {
        ScenarioError::Io { .. } => Failure::Runtime(e.into()),
        _ => Failure::Invalid(e.into()),
    }
}

pub fn trace_failure(e: TraceError) -> Failure {
    match e {
        TraceError::Io(_) => Failure::Runtime(e.into()),
        _ => Failure::Invalid(e.into()),
    }
}

/// A built-in name, else a file path.
pub fn resolve_scenario(name_or_path: &str) -> Result<ScenarioSpec, Failure> {
    match builtin_by_name(name_or_path) {
        Some(spec) => Ok(spec),
        None => load_scenario(name_or_path).map_err(scenario_failure),
    }
}

pub fn run(args: &SimulateArgs) -> Outcome {
    match (args.cue, args.mode) {
        (CueType::NoCue, Some(m)) => return Err(Failure::Usage(format!("--mode {m} given with --cue none"))),
        (t, None) if t != CueType::NoCue => return Err(Failure::Usage(format!("--cue {t} needs --mode"))),
        _ => {}
    }
    let spec = resolve_scenario(&args.scenario)?;
    let mut cfg = SimConfig::with_cue(args.cue, args.mode);
    cfg.dt = args.dt;
    cfg.seed = args.seed;
    cfg.replan_every = args.replan_every;
    cfg.max_ticks = args.max_ticks;
    cfg.cue.invert_goal_frequency = args.invert_goal_frequency;

    let trace = run_sim(&spec, &cfg).map_err(|e| match e {
        SimError::Config(_) => Failure::Invalid(e.into()),
        _ => Failure::Runtime(e.into()),
    })?;
    write_trace(&trace, &args.out).map_err(trace_failure)?;

    let s = summarize(&trace);
    let mode = args.mode.map_or("none".to_string(), |m| m.to_string());
    println!("scenario {} cue {}/{}", spec.name, args.cue, mode);
    println!("ticks {} ({:.2} s at dt {})", s.ticks, s.ticks as f64 * cfg.dt, cfg.dt);
    match s.pause_start {
        Some(start) => println!(
            "pause ticks {}..{} ({} ticks, {:.2} s)",
            start,
            start + s.paused_ticks,
            s.paused_ticks,
            s.paused_ticks as f64 * cfg.dt
        ),
        None => println!("pause none"),
    }
    println!("active path {} goal {}", s.path_active, s.goal_active);
    println!("lit lights {} visible arrows {}", s.lit_lights, s.visible_arrows);
    if let Some(last) = trace.records.last() {
        println!(
            "final distance to goal2 {:.3} m",
            last.pose.position().distance(spec.goal2.position())
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

pub fn export_scenarios(dir: &Path) -> Outcome {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(anyhow!("creating {}: {e}", dir.display())))?;
    for (kind, spec) in builtin_scenarios() {
        let path = dir.join(format!("{}.scenario", kind.name()));
        spec.save(&path).map_err(scenario_failure)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
