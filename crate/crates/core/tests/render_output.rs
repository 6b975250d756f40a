use legibility_core::cues::{CueMode, CueType};
use legibility_core::render::{frame_file_name, render_animation, AnimationFormat, Style};
use legibility_core::scenario::builtin_by_name;
use legibility_core::sim::{run, SimConfig};

#[test]
fn frames_follow_records_and_are_deterministic() {
    let spec = builtin_by_name("turn").unwrap();
    let mut trace = run(&spec, &SimConfig::with_cue(CueType::Lights, Some(CueMode::Goal))).unwrap();
    trace.records.truncate(40);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = render_animation(&trace, &spec, a.path(), AnimationFormat::Frames, &Style::default()).unwrap();
    let fb = render_animation(&trace, &spec, b.path(), AnimationFormat::Frames, &Style::default()).unwrap();
    assert_eq!(fa.len(), 40);
    assert_eq!(fa[39].file_name().unwrap().to_str().unwrap(), frame_file_name(39));
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }

    let style = Style {
        stride: 4,
        ..Style::default()
    };
    let c = tempfile::tempdir().unwrap();
    assert_eq!(render_animation(&trace, &spec, c.path(), AnimationFormat::Frames, &style).unwrap().len(), 10);
}

#[test]
fn gif_animation_is_deterministic() {
    let spec = builtin_by_name("straight").unwrap();
    let mut trace = run(&spec, &SimConfig::with_cue(CueType::Arrows, Some(CueMode::PathGoal))).unwrap();
    trace.records.truncate(16);
    let style = Style {
        stride: 4,
        ..Style::default()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ga = render_animation(&trace, &spec, a.path(), AnimationFormat::Gif, &style).unwrap();
    let gb = render_animation(&trace, &spec, b.path(), AnimationFormat::Gif, &style).unwrap();
    let bytes = std::fs::read(&ga[0]).unwrap();
    assert!(bytes.starts_with(b"GIF89a"));
    assert_eq!(bytes, std::fs::read(&gb[0]).unwrap());

    let mut opts = gif::DecodeOptions::new();
    opts.set_color_output(gif::ColorOutput::Indexed);
    let mut dec = opts.read_info(std::fs::File::open(&ga[0]).unwrap()).unwrap();
    let mut frames = 0;
    while let Some(f) = dec.read_next_frame().unwrap() {
        assert_eq!(f.delay, 20);
        frames += 1;
    }
    assert_eq!(frames, 4);
}
