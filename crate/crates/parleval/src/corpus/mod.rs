//! Speech-corpus data model and JSONL ingestion.
//!
//! Input files carry one JSON object per line. Field names accept both the
//! released capitalized forms (`"Party"`, `"Political Orientation"`, ...)
//! and lowercase snake-case aliases; the engine serializes the lowercase
//! canonical names. Malformed lines are skipped and reported per line, never
//! aborting a load.

mod references;
mod sampling;
mod topics;

pub use references::{select_references, ReferenceError, ReferenceSelection};
pub use sampling::{
    filter_min_affiliation, stratified_sample, PromptSource, SampleError, SampledRecord,
    StratifiedSample, DEFAULT_GENERIC_TEMPLATE,
};
pub use topics::{
    builtin_topic_table, map_topic, ExternalClassifier, MappingMethod, TopicError,
    TopicMappingRow, TopicMappingTable,
};

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Chamber of the UK Parliament.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum House {
    Commons,
    Lords,
}

impl House {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "house of commons" | "commons" => Some(House::Commons),
            "house of lords" | "lords" => Some(House::Lords),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            House::Commons => "House of Commons",
            House::Lords => "House of Lords",
        }
    }
}

impl fmt::Display for House {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for House {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for House {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        House::parse(&raw)
            .ok_or_else(|| serde::de::Error::custom(format!("unrecognized house: {raw:?}")))
    }
}

/// Baseline or fine-tuned evaluation arm of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Variant {
    Baseline,
    Finetuned,
}

impl Variant {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "baseline" => Some(Variant::Baseline),
            "finetuned" | "fine-tuned" => Some(Variant::Finetuned),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Finetuned => "finetuned",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        Variant::parse(&raw)
            .ok_or_else(|| serde::de::Error::custom(format!("unrecognized variant: {raw:?}")))
    }
}

/// Context axes used for stratification, grouping and stability analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Party,
    Topic,
    Orientation,
}

impl Dimension {
    pub fn as_str(&self) -> &'static str {
        match self {
            Dimension::Party => "party",
            Dimension::Topic => "topic",
            Dimension::Orientation => "orientation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "party" | "affiliation" => Some(Dimension::Party),
            "topic" => Some(Dimension::Topic),
            "orientation" => Some(Dimension::Orientation),
            _ => None,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One value on one context axis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ContextKey {
    pub dimension: Dimension,
    pub value: String,
}

/// The closed political-orientation vocabulary, left to right. Any label
/// outside this set is coerced to [`UNKNOWN_ORIENTATION`] at load time.
pub const ORIENTATION_LABELS: [&str; 9] = [
    "Far-left",
    "Left",
    "Centre-left to left",
    "Centre-left",
    "Centre to centre-left",
    "Centre",
    "Centre-right",
    "Right",
    "Far-right",
];

pub const UNKNOWN_ORIENTATION: &str = "Unknown";

/// Canonical form of an orientation label, or `None` when it is outside the
/// closed vocabulary (including explicit "Unknown").
pub fn canonical_orientation(raw: &str) -> Option<&'static str> {
    let t = raw.trim();
    ORIENTATION_LABELS
        .iter()
        .find(|l| l.eq_ignore_ascii_case(t))
        .copied()
}

/// A reference (human) parliamentary speech with its political context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeechRecord {
    pub party: String,
    pub topic: String,
    #[serde(rename = "political_orientation")]
    pub orientation: String,
    pub section: String,
    pub house: House,
    pub speech: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompts: Option<String>,
}

impl SpeechRecord {
    pub fn context_value(&self, dimension: Dimension) -> &str {
        match dimension {
            Dimension::Party => &self.party,
            Dimension::Topic => &self.topic,
            Dimension::Orientation => &self.orientation,
        }
    }

    /// Canonical single-line JSON form; `load_training` inverts it exactly.
    pub fn to_jsonl_line(&self) -> String {
        serde_json::to_string(self).expect("speech record serializes")
    }
}

/// A model-generated speech, carrying the full source context plus the
/// generating model's identity and optional per-metric scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedRecord {
    pub party: String,
    pub topic: String,
    #[serde(rename = "political_orientation")]
    pub orientation: String,
    pub section: String,
    pub house: House,
    pub speech: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompts: Option<String>,
    pub model_id: String,
    pub variant: Variant,
    pub generated_speech: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<BTreeMap<String, f64>>,
    /// Alignment key shared by every model's output for one evaluation
    /// prompt. Optional for externally produced files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompt_id: Option<String>,
    #[serde(default = "default_true")]
    pub valid: bool,
}

fn default_true() -> bool {
    true
}

impl GeneratedRecord {
    /// Stable per-record identifier used to key embeddings and verdicts.
    pub fn record_id(&self) -> String {
        format!(
            "{}:{}:{}",
            self.model_id,
            self.variant,
            self.prompt_id.as_deref().unwrap_or("-")
        )
    }

    pub fn context_value(&self, dimension: Dimension) -> &str {
        match dimension {
            Dimension::Party => &self.party,
            Dimension::Topic => &self.topic,
            Dimension::Orientation => &self.orientation,
        }
    }

    pub fn to_jsonl_line(&self) -> String {
        serde_json::to_string(self).expect("generated record serializes")
    }
}

/// Raw shapes: tolerant of the released capitalized field names.
#[derive(Deserialize)]
struct RawSpeech {
    #[serde(alias = "Party")]
    party: String,
    #[serde(alias = "Topic")]
    topic: String,
    #[serde(alias = "Political Orientation", alias = "political_orientation")]
    orientation: String,
    #[serde(alias = "Section")]
    section: String,
    #[serde(alias = "House")]
    house: House,
    #[serde(alias = "Speech")]
    speech: String,
    #[serde(default, alias = "Prompts")]
    prompts: Option<String>,
}

#[derive(Deserialize)]
struct RawGenerated {
    #[serde(alias = "Party")]
    party: String,
    #[serde(alias = "Topic")]
    topic: String,
    #[serde(alias = "Political Orientation", alias = "political_orientation")]
    orientation: String,
    #[serde(alias = "Section")]
    section: String,
    #[serde(alias = "House")]
    house: House,
    #[serde(default, alias = "Speech")]
    speech: String,
    #[serde(default, alias = "Prompts")]
    prompts: Option<String>,
    #[serde(alias = "Model", alias = "model")]
    model_id: String,
    #[serde(alias = "Type", alias = "type")]
    variant: Variant,
    #[serde(alias = "Generated Speech")]
    generated_speech: String,
    #[serde(default, alias = "Evaluation Scores")]
    scores: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    prompt_id: Option<String>,
    #[serde(default = "default_true")]
    valid: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LineError {
    pub line: usize,
    pub reason: String,
}

/// Per-load accounting: context counts, skipped lines, coerced orientations.
#[derive(Debug, Clone, Default, Serialize)]
pub struct LoadSummary {
    pub lines_total: usize,
    pub records_loaded: usize,
    pub by_party: BTreeMap<String, usize>,
    pub by_topic: BTreeMap<String, usize>,
    pub by_house: BTreeMap<String, usize>,
    pub by_orientation: BTreeMap<String, usize>,
    pub unknown_orientation_coerced: usize,
    pub errors: Vec<LineError>,
}

impl LoadSummary {
    fn count(&mut self, party: &str, topic: &str, house: House, orientation: &str) {
        self.records_loaded += 1;
        *self.by_party.entry(party.to_string()).or_default() += 1;
        *self.by_topic.entry(topic.to_string()).or_default() += 1;
        *self.by_house.entry(house.to_string()).or_default() += 1;
        *self.by_orientation.entry(orientation.to_string()).or_default() += 1;
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot open corpus file {path}: {source}")]
    Open {
        path: String,
        source: std::io::Error,
    },
    #[error("io error while reading corpus: {0}")]
    Read(#[from] std::io::Error),
}

fn normalize_orientation(raw: &str, summary: &mut LoadSummary) -> String {
    match canonical_orientation(raw) {
        Some(label) => label.to_string(),
        None => {
            if !raw.trim().eq_ignore_ascii_case(UNKNOWN_ORIENTATION) {
                summary.unknown_orientation_coerced += 1;
            }
            UNKNOWN_ORIENTATION.to_string()
        }
    }
}

fn non_empty(value: &str, field: &str) -> Result<(), String> {
    if value.trim().is_empty() {
        Err(format!("field {field:?} must be non-empty"))
    } else {
        Ok(())
    }
}

fn none_if_blank(prompts: Option<String>) -> Option<String> {
    prompts.filter(|p| !p.trim().is_empty())
}

/// Loads a training-corpus JSONL file. Order is preserved; each bad line is
/// reported in the summary and skipped.
pub fn load_training(path: impl AsRef<Path>) -> Result<(Vec<SpeechRecord>, LoadSummary), CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CorpusError::Open {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut records = Vec::new();
    let mut summary = LoadSummary::default();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        summary.lines_total += 1;
        let lineno = idx + 1;
        match parse_training_line(&line, &mut summary) {
            Ok(record) => {
                summary.count(&record.party, &record.topic, record.house, &record.orientation);
                records.push(record);
            }
            Err(reason) => summary.errors.push(LineError { line: lineno, reason }),
        }
    }
    Ok((records, summary))
}

fn parse_training_line(line: &str, summary: &mut LoadSummary) -> Result<SpeechRecord, String> {
    let raw: RawSpeech = serde_json::from_str(line).map_err(|e| e.to_string())?;
    non_empty(&raw.party, "party")?;
    non_empty(&raw.topic, "topic")?;
    non_empty(&raw.orientation, "orientation")?;
    non_empty(&raw.speech, "speech")?;
    let orientation = normalize_orientation(&raw.orientation, summary);
    Ok(SpeechRecord {
        party: raw.party,
        topic: raw.topic,
        orientation,
        section: raw.section,
        house: raw.house,
        speech: raw.speech,
        prompts: none_if_blank(raw.prompts),
    })
}

/// Loads a generated-corpus JSONL file with the same error isolation as
/// [`load_training`].
pub fn load_generated(
    path: impl AsRef<Path>,
) -> Result<(Vec<GeneratedRecord>, LoadSummary), CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CorpusError::Open {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut records = Vec::new();
    let mut summary = LoadSummary::default();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        summary.lines_total += 1;
        let lineno = idx + 1;
        match parse_generated_line(&line, &mut summary) {
            Ok(record) => {
                summary.count(&record.party, &record.topic, record.house, &record.orientation);
                records.push(record);
            }
            Err(reason) => summary.errors.push(LineError { line: lineno, reason }),
        }
    }
    Ok((records, summary))
}

fn parse_generated_line(line: &str, summary: &mut LoadSummary) -> Result<GeneratedRecord, String> {
    let raw: RawGenerated = serde_json::from_str(line).map_err(|e| e.to_string())?;
    non_empty(&raw.party, "party")?;
    non_empty(&raw.topic, "topic")?;
    non_empty(&raw.orientation, "orientation")?;
    non_empty(&raw.model_id, "model_id")?;
    if raw.valid {
        non_empty(&raw.generated_speech, "generated_speech")?;
    }
    let orientation = normalize_orientation(&raw.orientation, summary);
    Ok(GeneratedRecord {
        party: raw.party,
        topic: raw.topic,
        orientation,
        section: raw.section,
        house: raw.house,
        speech: raw.speech,
        prompts: none_if_blank(raw.prompts),
        model_id: raw.model_id,
        variant: raw.variant,
        generated_speech: raw.generated_speech,
        scores: raw.scores,
        prompt_id: raw.prompt_id,
        valid: raw.valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const PAPER_EXAMPLE: &str = r#"{"Party":"Labour Party","Topic":"Economy","Political Orientation":"Left","Section":"Economic Affairs","House":"House of Lords","Speech":"Thank you, Mr. Speaker. I rise to address...","Prompts":"What measures will your party take..."}"#;

    fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn paper_example_entry_loads_with_lords_house() {
        let f = write_lines(&[PAPER_EXAMPLE]);
        let (records, summary) = load_training(f.path()).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.party, "Labour Party");
        assert_eq!(r.topic, "Economy");
        assert_eq!(r.orientation, "Left");
        assert_eq!(r.house, House::Lords);
        assert_eq!(r.prompts.as_deref(), Some("What measures will your party take..."));
        assert!(summary.errors.is_empty());
        assert_eq!(summary.by_house["House of Lords"], 1);
    }

    #[test]
    fn paper_example_round_trips_losslessly() {
        let f = write_lines(&[PAPER_EXAMPLE]);
        let (records, _) = load_training(f.path()).unwrap();
        let line = records[0].to_jsonl_line();
        let f2 = write_lines(&[&line]);
        let (again, summary) = load_training(f2.path()).unwrap();
        assert_eq!(again, records);
        assert!(summary.errors.is_empty());
    }

    #[test]
    fn empty_file_gives_empty_list_and_zero_counts() {
        let f = write_lines(&[]);
        let (records, summary) = load_training(f.path()).unwrap();
        assert!(records.is_empty());
        assert_eq!(summary.records_loaded, 0);
        assert!(summary.by_party.is_empty());
    }

    #[test]
    fn malformed_line_is_skipped_and_reported() {
        let good = PAPER_EXAMPLE;
        let f = write_lines(&[good, "{bad", good]);
        let (records, summary) = load_training(f.path()).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(summary.errors.len(), 1);
        assert_eq!(summary.errors[0].line, 2);
    }

    #[test]
    fn missing_required_field_is_reported_with_line_number() {
        let no_party = r#"{"Topic":"Economy","Political Orientation":"Left","Section":"S","House":"House of Commons","Speech":"text"}"#;
        let f = write_lines(&[no_party]);
        let (records, summary) = load_training(f.path()).unwrap();
        assert!(records.is_empty());
        assert_eq!(summary.errors.len(), 1);
        assert!(summary.errors[0].reason.contains("party"));
    }

    #[test]
    fn unknown_orientation_is_coerced_and_counted() {
        let odd = r#"{"Party":"P","Topic":"T","Political Orientation":"Radical centrist","Section":"S","House":"House of Commons","Speech":"text"}"#;
        let f = write_lines(&[odd]);
        let (records, summary) = load_training(f.path()).unwrap();
        assert_eq!(records[0].orientation, UNKNOWN_ORIENTATION);
        assert_eq!(summary.unknown_orientation_coerced, 1);
    }

    #[test]
    fn whitespace_only_speech_is_rejected() {
        let blank = r#"{"Party":"P","Topic":"T","Political Orientation":"Left","Section":"S","House":"House of Commons","Speech":"   "}"#;
        let f = write_lines(&[blank]);
        let (records, summary) = load_training(f.path()).unwrap();
        assert!(records.is_empty());
        assert!(summary.errors[0].reason.contains("speech"));
    }

    #[test]
    fn generated_record_round_trips() {
        let record = GeneratedRecord {
            party: "Labour".into(),
            topic: "LAW".into(),
            orientation: "Centre-left".into(),
            section: "Justice".into(),
            house: House::Commons,
            speech: "original".into(),
            prompts: Some("What about courts?".into()),
            model_id: "alpha".into(),
            variant: Variant::Finetuned,
            generated_speech: "Mr Speaker, I rise...".into(),
            scores: Some([("ppl".to_string(), 12.5)].into_iter().collect()),
            prompt_id: Some("p00001".into()),
            valid: true,
        };
        let f = write_lines(&[&record.to_jsonl_line()]);
        let (records, summary) = load_generated(f.path()).unwrap();
        assert!(summary.errors.is_empty());
        assert_eq!(records[0], record);
    }

    #[test]
    fn generated_accepts_released_field_names() {
        let line = r#"{"Party":"Labour","Topic":"LAW","Political Orientation":"Centre-left","Section":"Justice","House":"House of Commons","Speech":"s","Model":"llama","Type":"fine-tuned","Generated Speech":"My Lords..."}"#;
        let f = write_lines(&[line]);
        let (records, summary) = load_generated(f.path()).unwrap();
        assert!(summary.errors.is_empty(), "{:?}", summary.errors);
        assert_eq!(records[0].model_id, "llama");
        assert_eq!(records[0].variant, Variant::Finetuned);
    }

    #[test]
    fn valid_generated_record_requires_generated_speech() {
        let line = r#"{"Party":"P","Topic":"T","Political Orientation":"Left","Section":"S","House":"House of Commons","Speech":"s","Model":"m","Type":"baseline","Generated Speech":""}"#;
        let f = write_lines(&[line]);
        let (records, summary) = load_generated(f.path()).unwrap();
        assert!(records.is_empty());
        assert!(summary.errors[0].reason.contains("generated_speech"));
    }
}
