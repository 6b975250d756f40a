//! Long-format Likert responses: CSV ingestion, attention-check exclusion and
//! Social Acceptability Scale scores.
//!
//! CSV columns: `participant_id, scenario, cue_type, cue_mode, statement,
//! rating, attention_passed`. Column order is free, names are not.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Result, RowError, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Turn,
    Straight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CueType {
    Arrows,
    Lights,
    #[serde(rename = "none")]
    NoCue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CueMode {
    Path,
    Goal,
    PathGoal,
    None,
}

impl Scenario {
    pub const ALL: [Scenario; 2] = [Scenario::Turn, Scenario::Straight];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Turn => "turn",
            Scenario::Straight => "straight",
        }
    }
}

impl CueType {
    pub const CUES: [CueType; 2] = [CueType::Arrows, CueType::Lights];
    pub const ALL: [CueType; 3] = [CueType::Arrows, CueType::Lights, CueType::NoCue];

    pub fn name(self) -> &'static str {
        match self {
            CueType::Arrows => "arrows",
            CueType::Lights => "lights",
            CueType::NoCue => "none",
        }
    }
}

impl CueMode {
    pub const MODES: [CueMode; 3] = [CueMode::Path, CueMode::Goal, CueMode::PathGoal];

    pub fn name(self) -> &'static str {
        match self {
            CueMode::Path => "path",
            CueMode::Goal => "goal",
            CueMode::PathGoal => "pathgoal",
            CueMode::None => "none",
        }
    }
}

macro_rules! display_and_parse {
    ($ty:ty, $what:literal, [$($alias:literal => $val:expr),* $(,)?]) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($alias => Ok($val),)*
                    _ => Err(format!("unknown {} '{}'", $what, s)),
                }
            }
        }
    };
}

display_and_parse!(Scenario, "scenario", ["turn" => Scenario::Turn, "straight" => Scenario::Straight]);
display_and_parse!(CueType, "cue type", [
    "arrows" => CueType::Arrows,
    "lights" => CueType::Lights,
    "none" => CueType::NoCue,
    "nocue" => CueType::NoCue,
]);
display_and_parse!(CueMode, "cue mode", [
    "path" => CueMode::Path,
    "goal" => CueMode::Goal,
    "pathgoal" => CueMode::PathGoal,
    "path&goal" => CueMode::PathGoal,
    "none" => CueMode::None,
]);

/// Questionnaire statement 1.1 to 1.8, stored as its second digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Statement(u8);

impl Statement {
    /// Items of the Social Acceptability Scale.
    pub const SAS: [Statement; 6] = [
        Statement(1),
        Statement(2),
        Statement(5),
        Statement(6),
        Statement(7),
        Statement(8),
    ];
    /// "I could predict the robot's path."
    pub const PATH: Statement = Statement(3);
    /// "I could predict where the robot was going."
    pub const GOAL: Statement = Statement(4);

    pub fn new(item: u8) -> Option<Self> {
        (1..=8).contains(&item).then_some(Statement(item))
    }

    pub fn all() -> impl Iterator<Item = Statement> {
        (1..=8).map(Statement)
    }

    pub fn item(self) -> u8 {
        self.0
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1.{}", self.0)
    }
}

impl FromStr for Statement {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.trim()
            .strip_prefix("1.")
            .and_then(|d| d.parse::<u8>().ok())
            .and_then(Statement::new)
            .ok_or_else(|| format!("unknown statement '{s}' (expected 1.1 to 1.8)"))
    }
}

impl TryFrom<String> for Statement {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Statement> for String {
    fn from(s: Statement) -> String {
        s.to_string()
    }
}

/// The video a response refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub scenario: Scenario,
    pub cue_type: CueType,
    pub cue_mode: CueMode,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.scenario, self.cue_type, self.cue_mode)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub participant_id: String,
    pub scenario: Scenario,
    pub cue_type: CueType,
    pub cue_mode: CueMode,
    pub statement: Statement,
    pub rating: u8,
    pub attention_passed: bool,
}

impl ResponseRecord {
    pub fn condition(&self) -> Condition {
        Condition {
            scenario: self.scenario,
            cue_type: self.cue_type,
            cue_mode: self.cue_mode,
        }
    }
}

pub const COLUMNS: [&str; 7] = [
    "participant_id",
    "scenario",
    "cue_type",
    "cue_mode",
    "statement",
    "rating",
    "attention_passed",
];

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("attention_passed '{s}' is not a boolean")),
    }
}

fn parse_row(fields: &[&str]) -> std::result::Result<ResponseRecord, Vec<String>> {
    let mut errs = Vec::new();
    let field = |i: usize| -> &str { fields[i] };
    let participant_id = field(0).trim().to_string();
    if participant_id.is_empty() {
        errs.push("participant_id is empty".to_string());
    }
    let scenario = field(1).parse::<Scenario>().map_err(|e| errs.push(e)).ok();
    let cue_type = field(2).parse::<CueType>().map_err(|e| errs.push(e)).ok();
    let cue_mode = field(3).parse::<CueMode>().map_err(|e| errs.push(e)).ok();
    let statement = field(4).parse::<Statement>().map_err(|e| errs.push(e)).ok();
    let rating = match field(5).trim().parse::<i64>() {
        Ok(r) if (1..=5).contains(&r) => Some(r as u8),
        Ok(r) => {
            errs.push(format!("rating {r} outside 1..=5"));
            None
        }
        Err(_) => {
            errs.push(format!("rating '{}' is not an integer", field(5)));
            None
        }
    };
    let attention_passed = parse_bool(field(6)).map_err(|e| errs.push(e)).ok();
    if let (Some(t), Some(m)) = (cue_type, cue_mode) {
        if (t == CueType::NoCue) != (m == CueMode::None) {
            errs.push(format!("cue_type {t} with cue_mode {m}: mode must be none exactly when type is none"));
        }
    }
    match (scenario, cue_type, cue_mode, statement, rating, attention_passed) {
        (Some(scenario), Some(cue_type), Some(cue_mode), Some(statement), Some(rating), Some(attention_passed))
            if errs.is_empty() =>
        {
            Ok(ResponseRecord {
                participant_id,
                scenario,
                cue_type,
                cue_mode,
                statement,
                rating,
                attention_passed,
            })
        }
        _ => Err(errs),
    }
}

/// Parses and validates responses from any CSV source.
pub fn ingest_reader(reader: impl Read) -> Result<Vec<ResponseRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| StatsError::Csv(e.to_string()))?.clone();
    let mut index = [0usize; 7];
    let mut missing = Vec::new();
    for (k, col) in COLUMNS.iter().enumerate() {
        match headers.iter().position(|h| h == *col) {
            Some(i) => index[k] = i,
            None => missing.push(*col),
        }
    }
    if !missing.is_empty() {
        return Err(StatsError::Validation(vec![RowError {
            line: 1,
            message: format!("missing column(s): {}", missing.join(", ")),
        }]));
    }

    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    let mut scenario_of: BTreeMap<String, (Scenario, usize)> = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| StatsError::Csv(e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let fields: Vec<&str> = index.iter().map(|&i| row.get(i).unwrap_or("")).collect();
        match parse_row(&fields) {
            Ok(rec) => {
                let key = (rec.participant_id.clone(), rec.condition(), rec.statement);
                if !seen.insert(key) {
                    errors.push(RowError {
                        line,
                        message: format!(
                            "duplicate response: participant {}, {}, statement {}",
                            rec.participant_id,
                            rec.condition(),
                            rec.statement
                        ),
                    });
                    continue;
                }
                if rec.cue_type != CueType::NoCue {
                    let entry = scenario_of.entry(rec.participant_id.clone()).or_insert((rec.scenario, line));
                    if entry.0 != rec.scenario {
                        errors.push(RowError {
                            line,
                            message: format!(
                                "participant {} already assigned to scenario {} (line {})",
                                rec.participant_id, entry.0, entry.1
                            ),
                        });
                        continue;
                    }
                }
                records.push(rec);
            }
            Err(msgs) => errors.extend(msgs.into_iter().map(|message| RowError { line, message })),
        }
    }
    if errors.is_empty() {
        Ok(records)
    } else {
        Err(StatsError::Validation(errors))
    }
}

pub fn ingest(path: impl AsRef<Path>) -> Result<Vec<ResponseRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| StatsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ingest_reader(file)
}

pub fn write_responses_to(records: &[ResponseRecord], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| StatsError::Csv(e.to_string());
    w.write_record(COLUMNS).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.participant_id.as_str(),
            r.scenario.name(),
            r.cue_type.name(),
            r.cue_mode.name(),
            &r.statement.to_string(),
            &r.rating.to_string(),
            if r.attention_passed { "true" } else { "false" },
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| StatsError::Csv(e.to_string()))
}

pub fn write_responses(records: &[ResponseRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| StatsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_responses_to(records, std::io::BufWriter::new(file))
}

pub fn participant_count(records: &[ResponseRecord]) -> usize {
    records.iter().map(|r| r.participant_id.as_str()).collect::<BTreeSet<_>>().len()
}

/// Drops every record of any participant with a failed attention check.
/// Returns the kept records and the number of participants removed.
pub fn exclude_failures(records: Vec<ResponseRecord>) -> (Vec<ResponseRecord>, usize) {
    let failed: BTreeSet<String> = records
        .iter()
        .filter(|r| !r.attention_passed)
        .map(|r| r.participant_id.clone())
        .collect();
    let kept = records.into_iter().filter(|r| !failed.contains(&r.participant_id)).collect();
    (kept, failed.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SasScore {
    pub participant_id: String,
    pub scenario: Scenario,
    pub cue_type: CueType,
    pub cue_mode: CueMode,
    pub score: f64,
}

impl SasScore {
    pub fn condition(&self) -> Condition {
        Condition {
            scenario: self.scenario,
            cue_type: self.cue_type,
            cue_mode: self.cue_mode,
        }
    }
}

/// Ratings grouped by participant and condition, keyed by statement.
pub(crate) fn ratings_by_condition(
    records: &[ResponseRecord],
) -> BTreeMap<(String, Condition), BTreeMap<Statement, u8>> {
    let mut out: BTreeMap<(String, Condition), BTreeMap<Statement, u8>> = BTreeMap::new();
    for r in records {
        out.entry((r.participant_id.clone(), r.condition()))
            .or_default()
            .insert(r.statement, r.rating);
    }
    out
}

/// One score per participant and condition: the mean of the six SAS items.
pub fn sas_scores(records: &[ResponseRecord]) -> Result<Vec<SasScore>> {
    let mut scores = Vec::new();
    for ((pid, cond), items) in ratings_by_condition(records) {
        let mut sum = 0.0;
        for s in Statement::SAS {
            let r = items.get(&s).ok_or_else(|| StatsError::MissingItem {
                participant: pid.clone(),
                condition: cond.to_string(),
                statement: s.to_string(),
            })?;
            sum += f64::from(*r);
        }
        scores.push(SasScore {
            participant_id: pid,
            scenario: cond.scenario,
            cue_type: cond.cue_type,
            cue_mode: cond.cue_mode,
            score: sum / Statement::SAS.len() as f64,
        });
    }
    Ok(scores)
}

/// Scenario group of each participant, taken from their cue-condition rows.
pub fn participant_groups(records: &[ResponseRecord]) -> BTreeMap<String, Scenario> {
    records
        .iter()
        .filter(|r| r.cue_type != CueType::NoCue)
        .map(|r| (r.participant_id.clone(), r.scenario))
        .collect()
}
