//! Path and goal comprehension from statements 1.3 (path) and 1.4 (goal).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{ratings_by_condition, Condition, CueMode, ResponseRecord, Statement};
use crate::summary::{quartiles, Quartiles};
use crate::{Result, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Comprehension,
    LackOfComprehension,
    Indeterminate,
}

fn verdict(expected_higher: f64, other: f64) -> Verdict {
    if expected_higher > other {
        Verdict::Comprehension
    } else if expected_higher < other {
        Verdict::LackOfComprehension
    } else {
        Verdict::Indeterminate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComprehensionCell {
    pub condition: Condition,
    pub n: usize,
    pub mean_path: f64,
    pub mean_goal: f64,
    /// mean(1.3) − mean(1.4).
    pub difference: f64,
    /// Path and Path&Goal modes: is 1.3 above 1.4?
    pub path_verdict: Option<Verdict>,
    /// Goal and Path&Goal modes: is 1.4 above 1.3?
    pub goal_verdict: Option<Verdict>,
    pub path_quartiles: Quartiles,
    pub goal_quartiles: Quartiles,
}

/// Per-participant (1.3, 1.4) ratings for each condition.
pub(crate) fn path_goal_ratings(records: &[ResponseRecord]) -> Result<BTreeMap<Condition, Vec<(String, f64, f64)>>> {
    let mut out: BTreeMap<Condition, Vec<(String, f64, f64)>> = BTreeMap::new();
    for ((pid, cond), items) in ratings_by_condition(records) {
        let get = |s: Statement| {
            items.get(&s).map(|&r| f64::from(r)).ok_or_else(|| StatsError::MissingItem {
                participant: pid.clone(),
                condition: cond.to_string(),
                statement: s.to_string(),
            })
        };
        let (p, g) = (get(Statement::PATH)?, get(Statement::GOAL)?);
        out.entry(cond).or_default().push((pid.clone(), p, g));
    }
    Ok(out)
}

pub fn comprehension_report(records: &[ResponseRecord]) -> Result<Vec<ComprehensionCell>> {
    Ok(path_goal_ratings(records)?
        .into_iter()
        .map(|(condition, rows)| {
            let n = rows.len();
            let path: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let goal: Vec<f64> = rows.iter().map(|r| r.2).collect();
            let mean_path = path.iter().sum::<f64>() / n as f64;
            let mean_goal = goal.iter().sum::<f64>() / n as f64;
            let mode = condition.cue_mode;
            ComprehensionCell {
                condition,
                n,
                mean_path,
                mean_goal,
                difference: mean_path - mean_goal,
                path_verdict: matches!(mode, CueMode::Path | CueMode::PathGoal).then(|| verdict(mean_path, mean_goal)),
                goal_verdict: matches!(mode, CueMode::Goal | CueMode::PathGoal).then(|| verdict(mean_goal, mean_path)),
                path_quartiles: quartiles(&path),
                goal_quartiles: quartiles(&goal),
            }
        })
        .collect())
}
