//! Survey statistics for cue evaluation studies: response ingestion and
//! exclusion, Social Acceptability Scale scores, Cronbach's alpha,
//! split-plot mixed ANOVA, aligned rank transform ANOVA, Bonferroni
//! pairwise tests, comprehension contrasts and a synthetic data generator.

pub mod anova;
pub mod art;
pub mod comprehension;
pub mod data;
pub mod pairwise;
pub mod reliability;
pub mod report;
pub mod special;
pub mod summary;
pub mod synth;

pub use anova::{mixed_anova, AnovaRow, AnovaTable, Observation};
pub use art::art_anova;
pub use data::{exclude_failures, ingest, sas_scores, CueMode, CueType, ResponseRecord, SasScore, Scenario, Statement};
pub use reliability::cronbach_alpha;
pub use report::{analyze, AnalysisOptions, Report};
pub use special::f_upper_tail;
pub use synth::{synth_responses, EffectSpec};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    /// 1-based line number in the source file, header included.
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV: {0}")]
    Csv(String),
    #[error("{} invalid row(s):\n{}", .0.len(), .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
    Validation(Vec<RowError>),
    #[error("participant {participant}, condition {condition}: missing statement {statement}")]
    MissingItem {
        participant: String,
        condition: String,
        statement: String,
    },
    #[error("unbalanced design: {0}")]
    Unbalanced(String),
    #[error("insufficient replication: {0}")]
    InsufficientReplication(String),
    #[error("total variance is zero")]
    DegenerateVariance,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("differences have zero variance")]
    ZeroVariance,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, StatsError>;
