use legibility_core::cues::{ActiveSource, ArrowFill, CueMode, CueType};
use legibility_core::nav::VelocityCommand;
use legibility_core::scenario::{builtin_by_name, builtin_scenarios};
use legibility_core::sim::{pause_ticks, read_trace, run, trace_to_string, write_trace, SimConfig, Trace, TraceRecord};
use legibility_core::{CueInputs, CueState, Pose2D};

const ALL_CONDITIONS: [(CueType, Option<CueMode>); 7] = [
    (CueType::NoCue, None),
    (CueType::Lights, Some(CueMode::Path)),
    (CueType::Lights, Some(CueMode::Goal)),
    (CueType::Lights, Some(CueMode::PathGoal)),
    (CueType::Arrows, Some(CueMode::Path)),
    (CueType::Arrows, Some(CueMode::Goal)),
    (CueType::Arrows, Some(CueMode::PathGoal)),
];

fn longest_paused_run(trace: &Trace) -> usize {
    let mut best = 0;
    let mut cur = 0;
    for r in &trace.records {
        if r.paused && r.cmd.is_zero() {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best
}

#[test]
fn every_run_satisfies_trace_invariants() {
    for (_, spec) in builtin_scenarios() {
        let radius = spec.robot.circumscribed_radius();
        for (ty, mode) in ALL_CONDITIONS {
            let cfg = SimConfig::with_cue(ty, mode);
            let trace = run(&spec, &cfg).unwrap();
            let label = format!("{} {ty:?} {mode:?}", spec.name);

            assert_eq!(longest_paused_run(&trace), pause_ticks(spec.pause_at_goal1_s, cfg.dt) as usize, "{label}");
            assert_eq!(trace.records.iter().filter(|r| r.paused).count(), 100, "{label}");

            for r in &trace.records {
                assert!(spec.clearance(r.pose.position()) > radius, "{label}: collision at t={}", r.t);
                assert!(r.cmd.linear.abs() <= cfg.follower.max_linear + 1e-12, "{label}");
                assert!(r.cmd.angular.abs() <= cfg.follower.max_angular + 1e-12, "{label}");
            }
            let last = trace.records.last().unwrap();
            assert!(last.pose.position().distance(spec.goal2.position()) <= cfg.goal_tolerance, "{label}");
        }
    }
}

#[test]
fn straight_arrows_goal_shows_dashed_arrow_on_approach() {
    let spec = builtin_by_name("straight").unwrap();
    let trace = run(&spec, &SimConfig::with_cue(CueType::Arrows, Some(CueMode::Goal))).unwrap();
    let approach: Vec<&TraceRecord> = trace.records.iter().filter(|r| r.leg == 1 && !r.paused).collect();
    assert!(approach
        .iter()
        .any(|r| r.cue.arrow.visible && r.cue.arrow.fill == ArrowFill::Dashed && r.inputs.d < 1.5));
}

#[test]
fn turn_goal_modes_activate_near_goal1() {
    let spec = builtin_by_name("turn").unwrap();
    for ty in [CueType::Lights, CueType::Arrows] {
        let trace = run(&spec, &SimConfig::with_cue(ty, Some(CueMode::Goal))).unwrap();
        let active: Vec<&TraceRecord> = trace
            .records
            .iter()
            .filter(|r| r.leg == 1 && r.cue.active_source == ActiveSource::Goal)
            .collect();
        assert!(!active.is_empty(), "{ty:?}");
        assert!(active.iter().all(|r| r.inputs.d < 1.5));
    }
}

#[test]
fn runs_are_byte_identical() {
    let spec = builtin_by_name("turn").unwrap();
    let cfg = SimConfig::with_cue(CueType::Lights, Some(CueMode::PathGoal));
    assert_eq!(trace_to_string(&run(&spec, &cfg).unwrap()), trace_to_string(&run(&spec, &cfg).unwrap()));
}

#[test]
fn trace_file_round_trip() {
    let spec = builtin_by_name("straight").unwrap();
    let mut trace = run(&spec, &SimConfig::with_cue(CueType::Arrows, Some(CueMode::PathGoal))).unwrap();
    trace.records.truncate(3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    write_trace(&trace, &path).unwrap();
    assert_eq!(read_trace(&path).unwrap(), trace);
}

#[test]
fn thirty_seconds_at_twenty_hertz_is_600_records() {
    let spec = builtin_by_name("turn").unwrap();
    let mut trace = run(&spec, &SimConfig::default()).unwrap();
    let dt = trace.header.dt;
    let n = (30.0 / dt).round() as usize;
    trace.records = (0..n)
        .map(|i| TraceRecord {
            t: i as f64 * dt,
            pose: Pose2D::new(0.0, 0.0, 0.0),
            cmd: VelocityCommand::ZERO,
            inputs: CueInputs::new(0.0, 0.0, 0.0, 6.0),
            cue: CueState::empty(),
            leg: 1,
            paused: false,
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    write_trace(&trace, &path).unwrap();
    assert_eq!(read_trace(&path).unwrap().len(), 600);
}

#[test]
fn unknown_trace_version_is_rejected() {
    let spec = builtin_by_name("turn").unwrap();
    let mut trace = run(&spec, &SimConfig::default()).unwrap();
    trace.records.truncate(2);
    let text = trace_to_string(&trace).replacen("\"version\":1", "\"version\":99", 1);
    assert!(text.contains("\"version\":99"));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    std::fs::write(&path, text).unwrap();
    assert!(matches!(
        read_trace(&path),
        Err(legibility_core::sim::TraceError::Version { .. })
    ));
}
