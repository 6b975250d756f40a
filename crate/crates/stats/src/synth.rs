//! Seeded synthetic Likert responses for exercising the analysis pipeline.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Condition, CueMode, CueType, ResponseRecord, Scenario, Statement};
use crate::{Result, StatsError};

/// Latent means of one video.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub condition: Condition,
    /// Statements 1.1, 1.2 and 1.5 to 1.8.
    pub sas_mean: f64,
    /// Statement 1.3.
    pub path_mean: f64,
    /// Statement 1.4.
    pub goal_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSpec {
    pub cells: Vec<CellSpec>,
    /// Per-rating noise sd on the latent scale.
    pub noise_sd: f64,
    /// Sd of the per-participant random intercept.
    pub participant_sd: f64,
    /// Sd of a per-participant, per-video shift shared by that video's items.
    pub video_sd: f64,
    /// Participants given one failed attention check.
    pub attention_failures: usize,
}

/// The eight videos a participant of `group` sees: six cue videos of their
/// scenario, then both control videos.
pub fn videos_for(group: Scenario) -> Vec<Condition> {
    let mut v: Vec<Condition> = CueType::CUES
        .iter()
        .flat_map(|&cue_type| {
            CueMode::MODES.iter().map(move |&cue_mode| Condition {
                scenario: group,
                cue_type,
                cue_mode,
            })
        })
        .collect();
    v.extend(Scenario::ALL.iter().map(|&scenario| Condition {
        scenario,
        cue_type: CueType::NoCue,
        cue_mode: CueMode::None,
    }));
    v
}

fn all_videos() -> Vec<Condition> {
    let mut v = videos_for(Scenario::Turn);
    v.extend(videos_for(Scenario::Straight).into_iter().take(6));
    v
}

impl EffectSpec {
    /// Every video with the same latent means.
    pub fn uniform(mean: f64, noise_sd: f64, participant_sd: f64) -> Self {
        Self {
            cells: all_videos()
                .into_iter()
                .map(|condition| CellSpec {
                    condition,
                    sas_mean: mean,
                    path_mean: mean,
                    goal_mean: mean,
                })
                .collect(),
            noise_sd,
            participant_sd,
            video_sd: 0.0,
            attention_failures: 0,
        }
    }

    /// Ordered preset: arrows above lights in
    /// Straight in every mode, arrows/path highest overall, and a cue type
    /// difference that depends on both mode and scenario.
    pub fn study_like() -> Self {
        let sas = |c: &Condition| match (c.scenario, c.cue_type, c.cue_mode) {
            (Scenario::Turn, CueType::Arrows, CueMode::Path) => 4.0,
            (Scenario::Turn, CueType::Arrows, CueMode::Goal) => 3.3,
            (Scenario::Turn, CueType::Arrows, _) => 3.6,
            (Scenario::Turn, CueType::Lights, CueMode::Path) => 3.2,
            (Scenario::Turn, CueType::Lights, CueMode::Goal) => 3.7,
            (Scenario::Turn, CueType::Lights, _) => 3.3,
            (Scenario::Straight, CueType::Arrows, CueMode::Path) => 4.2,
            (Scenario::Straight, CueType::Arrows, CueMode::Goal) => 3.6,
            (Scenario::Straight, CueType::Arrows, _) => 3.8,
            (Scenario::Straight, CueType::Lights, CueMode::Path) => 2.8,
            (Scenario::Straight, CueType::Lights, CueMode::Goal) => 2.6,
            (Scenario::Straight, CueType::Lights, _) => 2.7,
            (_, CueType::NoCue, _) => 3.0,
        };
        let path_goal = |c: &Condition| match (c.cue_type, c.cue_mode) {
            (CueType::NoCue, _) => (3.0, 3.0),
            (_, CueMode::Path) => (4.0, 3.3),
            (CueType::Lights, CueMode::Goal) if c.scenario == Scenario::Straight => (3.4, 3.0),
            (_, CueMode::Goal) => (3.2, 3.9),
            _ => (3.8, 3.7),
        };
        Self {
            cells: all_videos()
                .into_iter()
                .map(|condition| {
                    let (path_mean, goal_mean) = path_goal(&condition);
                    CellSpec {
                        condition,
                        sas_mean: sas(&condition),
                        path_mean,
                        goal_mean,
                    }
                })
                .collect(),
            noise_sd: 0.5,
            participant_sd: 0.5,
            video_sd: 0.45,
            attention_failures: 0,
        }
    }

    fn cell(&self, c: Condition) -> Result<&CellSpec> {
        self.cells
            .iter()
            .find(|s| s.condition == c)
            .ok_or_else(|| StatsError::Invalid(format!("effect spec has no cell for {c}")))
    }
}

/// Rounds to the nearest rating and clamps into 1..=5.
pub fn to_likert(latent: f64) -> u8 {
    latent.round().clamp(1.0, 5.0) as u8
}

/// Participants alternate between Turn and Straight. Each rating is the
/// clamped rounding of cell mean + participant intercept + video shift + noise.
pub fn synth_responses(spec: &EffectSpec, n_participants: usize, seed: u64) -> Result<Vec<ResponseRecord>> {
    if spec.attention_failures > n_participants {
        return Err(StatsError::Invalid(format!(
            "{} attention failures among {n_participants} participants",
            spec.attention_failures
        )));
    }
    if !(spec.noise_sd >= 0.0 && spec.participant_sd >= 0.0 && spec.video_sd >= 0.0) {
        return Err(StatsError::Invalid("noise levels must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failing = vec![false; n_participants];
    for i in sample(&mut rng, n_participants, spec.attention_failures) {
        failing[i] = true;
    }
    let mut out = Vec::with_capacity(n_participants * 64);
    for (i, &fails) in failing.iter().enumerate() {
        let group = Scenario::ALL[i % 2];
        let pid = format!("P{:04}", i + 1);
        let intercept = spec.participant_sd * rng.sample::<f64, _>(StandardNormal);
        let videos = videos_for(group);
        let failed_video = if fails { Some(rng.random_range(0..videos.len())) } else { None };
        for (v, cond) in videos.into_iter().enumerate() {
            let cell = spec.cell(cond)?;
            let shift = intercept + spec.video_sd * rng.sample::<f64, _>(StandardNormal);
            for statement in Statement::all() {
                let mean = match statement {
                    Statement::PATH => cell.path_mean,
                    Statement::GOAL => cell.goal_mean,
                    _ => cell.sas_mean,
                };
                let latent = mean + shift + spec.noise_sd * rng.sample::<f64, _>(StandardNormal);
                out.push(ResponseRecord {
                    participant_id: pid.clone(),
                    scenario: cond.scenario,
                    cue_type: cond.cue_type,
                    cue_mode: cond.cue_mode,
                    statement,
                    rating: to_likert(latent),
                    attention_passed: failed_video != Some(v),
                });
            }
        }
    }
    Ok(out)
}
