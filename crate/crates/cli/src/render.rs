use anyhow::anyhow;
use legibility_core::render::{
    plot_condition_means, plot_quartiles, render_animation, AnimationFormat, BoxPoint, ChartPoint, Facet, RenderError,
    Style,
};
use legibility_core::scenario::builtin_by_name;
use legibility_core::sim::read_trace;
use legibility_stats::data::{CueType, Scenario};
use legibility_stats::report::Report;

use crate::simulate::{resolve_scenario, trace_failure};
use crate::{Failure, Outcome, RenderArgs};

fn render_failure(e: RenderError) -> Failure {
    match e {
        RenderError::Io(_) | RenderError::Gif(_) => Failure::Runtime(e.into()),
        _ => Failure::Invalid(e.into()),
    }
}

pub fn run(args: &RenderArgs) -> Outcome {
    if let Some(trace) = &args.trace {
        render_trace(args, trace)
    } else if let Some(report) = &args.report {
        render_chart(args, report)
    } else {
        Err(Failure::Usage("need --trace or --report".into()))
    }
}

fn render_trace(args: &RenderArgs, path: &std::path::Path) -> Outcome {
    let format: AnimationFormat = args.format.parse().map_err(Failure::Usage)?;
    let mut style = match &args.style {
        Some(p) => Style::load(p).map_err(render_failure)?,
        None => Style::default(),
    };
    if let Some(stride) = args.stride {
        style.stride = stride;
    }
    let trace = read_trace(path).map_err(trace_failure)?;
    let spec = match &args.scenario {
        Some(s) => resolve_scenario(s)?,
        None => builtin_by_name(&trace.header.scenario).ok_or_else(|| {
            Failure::Usage(format!(
                "trace scenario '{}' is not built in; pass --scenario FILE",
                trace.header.scenario
            ))
        })?,
    };
    let files = render_animation(&trace, &spec, &args.out, format, &style).map_err(render_failure)?;
    println!(
        "wrote {} file(s) to {} ({} records, {:.2} fps)",
        files.len(),
        args.out.display(),
        trace.len(),
        legibility_core::render::animation_fps(trace.header.dt, style.stride)
    );
    Ok(())
}

fn scenario_facets<T>(make: impl Fn(Scenario) -> Vec<T>) -> Vec<Facet<T>> {
    Scenario::ALL
        .iter()
        .map(|&s| Facet {
            label: s.name().to_string(),
            points: make(s),
        })
        .collect()
}

fn render_chart(args: &RenderArgs, path: &std::path::Path) -> Outcome {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Runtime(anyhow!("reading {}: {e}", path.display())))?;
    let report = Report::from_json(&text).map_err(|e| Failure::Invalid(e.into()))?;
    let svg = match args.chart.as_str() {
        "sas" => {
            let facets = scenario_facets(|s| {
                report
                    .sas_summary
                    .iter()
                    .filter(|c| c.condition.scenario == s && c.condition.cue_type != CueType::NoCue)
                    .map(|c| ChartPoint {
                        series: c.condition.cue_type.to_string(),
                        category: c.condition.cue_mode.to_string(),
                        mean: c.mean,
                        ci_half_width: c.ci_half_width,
                    })
                    .collect()
            });
            plot_condition_means("Social acceptability by cue type and mode", &facets)
        }
        "comprehension" => {
            let facets = scenario_facets(|s| {
                report
                    .comprehension
                    .iter()
                    .filter(|c| c.condition.scenario == s && c.condition.cue_type != CueType::NoCue)
                    .flat_map(|c| {
                        let category = format!("{}/{}", c.condition.cue_type, c.condition.cue_mode);
                        [("1.3 path", &c.path_quartiles), ("1.4 goal", &c.goal_quartiles)].map(|(series, q)| BoxPoint {
                            series: series.to_string(),
                            category: category.clone(),
                            min: q.min,
                            q1: q.q1,
                            median: q.median,
                            q3: q.q3,
                            max: q.max,
                            mean: q.mean,
                        })
                    })
                    .collect()
            });
            plot_quartiles("Path and goal predictability", &facets)
        }
        other => return Err(Failure::Usage(format!("unknown chart '{other}' (expected sas or comprehension)"))),
    }
    .map_err(render_failure)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(e.into()))?;
    }
    std::fs::write(&args.out, svg).map_err(|e| Failure::Runtime(anyhow!("writing {}: {e}", args.out.display())))?;
    println!("wrote {}", args.out.display());
    Ok(())
}
