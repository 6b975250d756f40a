//! The full analysis: exclusion, reliability, SAS summaries, both mixed
//! ANOVAs, their ART counterparts, planned comparisons and comprehension.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::anova::{mixed_anova, AnovaTable, Observation};
use crate::art::{art_anova, ArtTable};
use crate::comprehension::{comprehension_report, path_goal_ratings, ComprehensionCell};
use crate::data::{
    exclude_failures, participant_count, participant_groups, ratings_by_condition, sas_scores, Condition, CueMode,
    CueType, ResponseRecord, Scenario, Statement,
};
use crate::pairwise::{pairwise, PairKind, PairSpec, PairwiseResult};
use crate::reliability::cronbach_alpha;
use crate::summary::within_subject_ci;
use crate::{Result, StatsError};

pub const REPORT_SCHEMA: &str = "legibility-report";
pub const REPORT_VERSION: u32 = 1;
/// Alternative threshold carried alongside the applied one.
pub const ALPHA_AS_PRINTED: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    /// Significance threshold after Bonferroni correction over the two ANOVAs.
    pub alpha: f64,
    pub ci_level: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            alpha: 0.025,
            ci_level: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReliability {
    pub condition: Condition,
    pub n: usize,
    /// None when the items have no variance in this condition.
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reliability {
    pub conditions: Vec<ConditionReliability>,
    pub min_alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: Condition,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci_half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anovas {
    /// Cue type (arrows, lights, none) × scenario.
    pub cue_type: AnovaTable,
    /// Cue type (arrows, lights) × cue mode × scenario.
    pub cue_type_by_mode: AnovaTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtTables {
    pub cue_type: ArtTable,
    pub cue_type_by_mode: ArtTable,
    /// Statement 1.3 minus 1.4, cue type × cue mode × scenario.
    pub comprehension: ArtTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseFamily {
    pub name: String,
    pub family_size: usize,
    pub results: Vec<PairwiseResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: u32,
    pub participants_total: usize,
    pub excluded: usize,
    pub retained: usize,
    pub alpha_used: f64,
    pub alpha_as_printed: f64,
    pub ci_level: f64,
    pub ci_method: String,
    pub reliability: Reliability,
    pub sas_summary: Vec<ConditionSummary>,
    pub anova: Anovas,
    pub art: ArtTables,
    pub pairwise: Vec<PairwiseFamily>,
    pub comprehension: Vec<ComprehensionCell>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text).map_err(|e| StatsError::Invalid(format!("report: {e}")))?;
        if r.schema != REPORT_SCHEMA || r.version != REPORT_VERSION {
            return Err(StatsError::Invalid(format!(
                "unsupported report {} v{} (expected {REPORT_SCHEMA} v{REPORT_VERSION})",
                r.schema, r.version
            )));
        }
        Ok(r)
    }

    pub fn summary(&self, c: Condition) -> Option<&ConditionSummary> {
        self.sas_summary.iter().find(|s| s.condition == c)
    }
}

fn cue_cells(group: Scenario) -> Vec<Condition> {
    CueType::CUES
        .iter()
        .flat_map(|&cue_type| {
            CueMode::MODES.iter().map(move |&cue_mode| Condition {
                scenario: group,
                cue_type,
                cue_mode,
            })
        })
        .collect()
}

fn control(scenario: Scenario) -> Condition {
    Condition {
        scenario,
        cue_type: CueType::NoCue,
        cue_mode: CueMode::None,
    }
}

/// Participant id → condition → value, with each participant's group.
struct Table {
    groups: BTreeMap<String, Scenario>,
    values: BTreeMap<String, BTreeMap<Condition, f64>>,
}

impl Table {
    fn get(&self, pid: &str, c: Condition) -> Result<f64> {
        self.values
            .get(pid)
            .and_then(|m| m.get(&c))
            .copied()
            .ok_or_else(|| StatsError::Unbalanced(format!("participant {pid} has no data for {c}")))
    }

    fn members(&self, group: Scenario) -> impl Iterator<Item = &str> {
        self.groups.iter().filter(move |(_, g)| **g == group).map(|(p, _)| p.as_str())
    }

    /// Means over the three modes per cue type, the two control videos for none.
    fn cue_type_means(&self, pid: &str) -> Result<[f64; 3]> {
        let g = self.groups[pid];
        let mut out = [0.0; 3];
        for (i, t) in CueType::CUES.iter().enumerate() {
            let mut s = 0.0;
            for m in CueMode::MODES {
                s += self.get(
                    pid,
                    Condition {
                        scenario: g,
                        cue_type: *t,
                        cue_mode: m,
                    },
                )?;
            }
            out[i] = s / 3.0;
        }
        out[2] = (self.get(pid, control(Scenario::Turn))? + self.get(pid, control(Scenario::Straight))?) / 2.0;
        Ok(out)
    }

    fn cue_type_obs(&self) -> Result<Vec<Observation>> {
        let mut obs = Vec::new();
        for (pid, g) in &self.groups {
            for (t, y) in CueType::ALL.iter().zip(self.cue_type_means(pid)?) {
                obs.push(Observation {
                    subject: pid.clone(),
                    group: g.name().into(),
                    within: vec![t.name().into()],
                    y,
                });
            }
        }
        Ok(obs)
    }

    fn cue_mode_obs(&self) -> Result<Vec<Observation>> {
        let mut obs = Vec::new();
        for (pid, g) in &self.groups {
            for c in cue_cells(*g) {
                obs.push(Observation {
                    subject: pid.clone(),
                    group: g.name().into(),
                    within: vec![c.cue_type.name().into(), c.cue_mode.name().into()],
                    y: self.get(pid, c)?,
                });
            }
        }
        Ok(obs)
    }
}

fn reliability(records: &[ResponseRecord]) -> Reliability {
    let mut by_cond: BTreeMap<Condition, Vec<Vec<f64>>> = BTreeMap::new();
    for ((_, cond), items) in ratings_by_condition(records) {
        let row: Option<Vec<f64>> = Statement::SAS.iter().map(|s| items.get(s).map(|&r| f64::from(r))).collect();
        if let Some(row) = row {
            by_cond.entry(cond).or_default().push(row);
        }
    }
    let conditions: Vec<ConditionReliability> = by_cond
        .into_iter()
        .map(|(condition, rows)| ConditionReliability {
            condition,
            n: rows.len(),
            alpha: cronbach_alpha(&rows).ok(),
        })
        .collect();
    let min_alpha = conditions.iter().filter_map(|c| c.alpha).reduce(f64::min);
    Reliability { conditions, min_alpha }
}

fn summaries(table: &Table, level: f64) -> Result<Vec<ConditionSummary>> {
    let mut out = Vec::new();
    for g in Scenario::ALL {
        let cells = cue_cells(g);
        let members: Vec<&str> = table.members(g).collect();
        let rows = members
            .iter()
            .map(|p| cells.iter().map(|&c| table.get(p, c)).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()?;
        for (c, ci) in cells.into_iter().zip(within_subject_ci(&rows, level)?) {
            out.push(ConditionSummary {
                condition: c,
                n: rows.len(),
                mean: ci.mean,
                sd: ci.sd,
                ci_half_width: ci.ci_half_width,
            });
        }
    }
    let controls = [control(Scenario::Turn), control(Scenario::Straight)];
    let rows = table
        .groups
        .keys()
        .map(|p| controls.iter().map(|&c| table.get(p, c)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    for (c, ci) in controls.into_iter().zip(within_subject_ci(&rows, level)?) {
        out.push(ConditionSummary {
            condition: c,
            n: rows.len(),
            mean: ci.mean,
            sd: ci.sd,
            ci_half_width: ci.ci_half_width,
        });
    }
    Ok(out)
}

fn planned_comparisons(table: &Table) -> Result<Vec<PairwiseFamily>> {
    let mut type_means: BTreeMap<&str, [f64; 3]> = BTreeMap::new();
    for pid in table.groups.keys() {
        type_means.insert(pid, table.cue_type_means(pid)?);
    }
    let column = |g: Scenario, i: usize| -> Vec<f64> { table.members(g).map(|p| type_means[p][i]).collect() };

    let mut by_type = Vec::new();
    for g in Scenario::ALL {
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            by_type.push(PairSpec {
                label_a: format!("{g}/{}", CueType::ALL[i]),
                label_b: format!("{g}/{}", CueType::ALL[j]),
                kind: PairKind::Paired,
                a: column(g, i),
                b: column(g, j),
            });
        }
    }
    for (i, t) in CueType::ALL.iter().enumerate() {
        by_type.push(PairSpec {
            label_a: format!("turn/{t}"),
            label_b: format!("straight/{t}"),
            kind: PairKind::Independent,
            a: column(Scenario::Turn, i),
            b: column(Scenario::Straight, i),
        });
    }

    let mut by_mode = Vec::new();
    for g in Scenario::ALL {
        for m in CueMode::MODES {
            let cell = |t: CueType| Condition {
                scenario: g,
                cue_type: t,
                cue_mode: m,
            };
            let col = |t: CueType| table.members(g).map(|p| table.get(p, cell(t))).collect::<Result<Vec<f64>>>();
            by_mode.push(PairSpec {
                label_a: cell(CueType::Arrows).to_string(),
                label_b: cell(CueType::Lights).to_string(),
                kind: PairKind::Paired,
                a: col(CueType::Arrows)?,
                b: col(CueType::Lights)?,
            });
        }
    }

    Ok(vec![
        PairwiseFamily {
            name: "cue_type".into(),
            family_size: by_type.len(),
            results: pairwise(&by_type, by_type.len())?,
        },
        PairwiseFamily {
            name: "cue_type_by_mode".into(),
            family_size: by_mode.len(),
            results: pairwise(&by_mode, by_mode.len())?,
        },
    ])
}

pub const CUE_TYPE_FACTORS: [&str; 1] = ["cue_type"];
pub const CUE_MODE_FACTORS: [&str; 2] = ["cue_type", "cue_mode"];
pub const BETWEEN_FACTOR: &str = "scenario";

pub fn analyze(records: Vec<ResponseRecord>, opts: &AnalysisOptions) -> Result<Report> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(StatsError::Invalid(format!("alpha {} outside (0, 1)", opts.alpha)));
    }
    let participants_total = participant_count(&records);
    let (kept, excluded) = exclude_failures(records);
    let groups = participant_groups(&kept);
    if let Some(r) = kept.iter().find(|r| !groups.contains_key(&r.participant_id)) {
        return Err(StatsError::Unbalanced(format!(
            "participant {} has no cue-condition responses, so no scenario group",
            r.participant_id
        )));
    }

    let mut sas = Table {
        groups: groups.clone(),
        values: BTreeMap::new(),
    };
    for s in sas_scores(&kept)? {
        let c = s.condition();
        sas.values.entry(s.participant_id).or_default().insert(c, s.score);
    }
    let mut comp = Table {
        groups,
        values: BTreeMap::new(),
    };
    for (c, rows) in path_goal_ratings(&kept)? {
        for (pid, p, g) in rows {
            comp.values.entry(pid).or_default().insert(c, p - g);
        }
    }

    let type_obs = sas.cue_type_obs()?;
    let mode_obs = sas.cue_mode_obs()?;
    let comp_obs = comp.cue_mode_obs()?;
    Ok(Report {
        schema: REPORT_SCHEMA.into(),
        version: REPORT_VERSION,
        participants_total,
        excluded,
        retained: participants_total - excluded,
        alpha_used: opts.alpha,
        alpha_as_printed: ALPHA_AS_PRINTED,
        ci_level: opts.ci_level,
        ci_method: "within-subjects (Cousineau normalization, Morey correction)".into(),
        reliability: reliability(&kept),
        sas_summary: summaries(&sas, opts.ci_level)?,
        anova: Anovas {
            cue_type: mixed_anova(&type_obs, &CUE_TYPE_FACTORS, BETWEEN_FACTOR)?,
            cue_type_by_mode: mixed_anova(&mode_obs, &CUE_MODE_FACTORS, BETWEEN_FACTOR)?,
        },
        art: ArtTables {
            cue_type: art_anova(&type_obs, &CUE_TYPE_FACTORS, BETWEEN_FACTOR)?,
            cue_type_by_mode: art_anova(&mode_obs, &CUE_MODE_FACTORS, BETWEEN_FACTOR)?,
            comprehension: art_anova(&comp_obs, &CUE_MODE_FACTORS, BETWEEN_FACTOR)?,
        },
        pairwise: planned_comparisons(&sas)?,
        comprehension: comprehension_report(&kept)?,
    })
}
