use anyhow::anyhow;
use legibility_stats::data::{ingest, write_responses};
use legibility_stats::report::{analyze, AnalysisOptions};
use legibility_stats::synth::{synth_responses, EffectSpec};
use legibility_stats::StatsError;

use crate::{AnalyzeArgs, Failure, Outcome};

fn stats_failure(e: StatsError) -> Failure {
    match e {
        StatsError::Io { .. } => Failure::Runtime(e.into()),
        _ => Failure::Invalid(e.into()),
    }
}

pub fn run(args: &AnalyzeArgs) -> Outcome {
    let records = if args.synth {
        let spec = EffectSpec {
            attention_failures: args.failures,
            ..EffectSpec::study_like()
        };
        let recs = synth_responses(&spec, args.participants, args.seed).map_err(stats_failure)?;
        if let Some(path) = &args.write_responses {
            write_responses(&recs, path).map_err(stats_failure)?;
        }
        recs
    } else if let Some(path) = &args.responses {
        if args.failures != 0 {
            return Err(Failure::Usage("--failures applies to --synth only".into()));
        }
        ingest(path).map_err(stats_failure)?
    } else {
        return Err(Failure::Usage("need --responses or --synth".into()));
    };

    let opts = AnalysisOptions {
        alpha: args.alpha,
        ..AnalysisOptions::default()
    };
    let report = analyze(records, &opts).map_err(stats_failure)?;
    std::fs::write(&args.out, report.to_json())
        .map_err(|e| Failure::Runtime(anyhow!("writing {}: {e}", args.out.display())))?;

    println!(
        "participants {} excluded {} retained {}",
        report.participants_total, report.excluded, report.retained
    );
    if let Some(a) = report.reliability.min_alpha {
        println!("minimum Cronbach alpha {a:.3}");
    }
    for (label, table) in [
        ("cue type x scenario", &report.anova.cue_type),
        ("cue type x mode x scenario", &report.anova.cue_type_by_mode),
    ] {
        println!("{label}:");
        for r in &table.rows {
            let mark = if r.p < report.alpha_used { " *" } else { "" };
            println!(
                "  {:32} F({}, {}) = {:8.3}  p = {:.3e}  eta_p^2 = {:.3}{mark}",
                r.effect, r.df, r.error_df, r.f, r.p, r.partial_eta_sq
            );
        }
    }
    println!("wrote {}", args.out.display());
    Ok(())
}
