//! Political-authenticity metrics.
//!
//! Reference embeddings are grouped per political orientation or per party
//! over the training corpus, never over generated speeches. A generated
//! speech is scored against the matched orientation centroid (spectrum
//! alignment) or its expected party centroid (party alignment); both scores
//! live on a 0-1 scale with negative cosines clamped to zero and the raw
//! similarity retained for diagnostics.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{SpeechRecord, UNKNOWN_ORIENTATION};
use crate::embedding::{centroid, cosine, EmbeddingVector, VectorError};

/// Span of the numeric left-right axis (Far-left -6 to Far-right +6).
pub const SPECTRUM_SPAN: f64 = 12.0;

/// Numeric left-right mapping for orientation labels.
///
/// Anchored at Far-left = -6, Centre = 0, Far-right = +6; intermediate
/// labels interpolate uniformly. "Unknown" never carries a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrientationScale {
    mapping: BTreeMap<String, f64>,
}

impl Default for OrientationScale {
    fn default() -> Self {
        let mapping = [
            ("Far-left", -6.0),
            ("Left", -4.0),
            ("Centre-left to left", -3.0),
            ("Centre-left", -2.0),
            ("Centre to centre-left", -1.0),
            ("Centre", 0.0),
            ("Centre-right", 2.0),
            ("Right", 4.0),
            ("Far-right", 6.0),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self { mapping }
    }
}

impl OrientationScale {
    /// Builds a scale from an explicit mapping, enforcing the three anchors
    /// and the 12-unit span.
    pub fn new(mapping: BTreeMap<String, f64>) -> Result<Self, ScaleError> {
        let scale = Self { mapping };
        scale.validate()?;
        Ok(scale)
    }

    /// Loads a scale from a JSON or TOML file of `label -> value`.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ScaleError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScaleError::Io(format!("{}: {e}", path.display())))?;
        let mapping: BTreeMap<String, f64> =
            if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml")) {
                toml::from_str(&text).map_err(|e| ScaleError::Parse(e.to_string()))?
            } else {
                serde_json::from_str(&text).map_err(|e| ScaleError::Parse(e.to_string()))?
            };
        Self::new(mapping)
    }

    fn validate(&self) -> Result<(), ScaleError> {
        for (anchor, value) in [("Far-left", -6.0), ("Centre", 0.0), ("Far-right", 6.0)] {
            match self.mapping.get(anchor) {
                Some(v) if *v == value => {}
                Some(v) => {
                    return Err(ScaleError::BadAnchor {
                        label: anchor.to_string(),
                        expected: value,
                        got: *v,
                    })
                }
                None => return Err(ScaleError::MissingAnchor(anchor.to_string())),
            }
        }
        if self.mapping.contains_key(UNKNOWN_ORIENTATION) {
            return Err(ScaleError::UnknownHasValue);
        }
        for (label, v) in &self.mapping {
            if !v.is_finite() || v.abs() > 6.0 {
                return Err(ScaleError::OutOfRange {
                    label: label.clone(),
                    value: *v,
                });
            }
        }
        Ok(())
    }

    pub fn value_of(&self, label: &str) -> Option<f64> {
        self.mapping.get(label).copied()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.mapping.keys().map(String::as_str)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ScaleError {
    #[error("orientation scale is missing anchor {0:?}")]
    MissingAnchor(String),
    #[error("anchor {label:?} must map to {expected}, got {got}")]
    BadAnchor {
        label: String,
        expected: f64,
        got: f64,
    },
    #[error("label {label:?} maps to {value}, outside [-6, 6]")]
    OutOfRange { label: String, value: f64 },
    #[error("\"Unknown\" must not carry a scale value")]
    UnknownHasValue,
    #[error("cannot read scale file: {0}")]
    Io(String),
    #[error("cannot parse scale file: {0}")]
    Parse(String),
}

/// Grouping axis of a centroid index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Orientation,
    Party,
}

impl fmt::Display for GroupBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupBy::Orientation => "orientation",
            GroupBy::Party => "party",
        })
    }
}

/// Per-group mean reference embeddings with group cardinalities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidIndex {
    pub group_by: GroupBy,
    centroids: BTreeMap<String, EmbeddingVector>,
    counts: BTreeMap<String, usize>,
    /// Records dropped because their orientation is "Unknown".
    pub excluded_unknown: usize,
}

impl CentroidIndex {
    pub fn centroid_of(&self, label: &str) -> Option<&EmbeddingVector> {
        self.centroids.get(label)
    }

    pub fn count_of(&self, label: &str) -> Option<usize> {
        self.counts.get(label).copied()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.centroids.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("no usable records to build a centroid index")]
    NoUsableRecords,
    #[error("records and embeddings differ in length: {records} vs {embeddings}")]
    LengthMismatch { records: usize, embeddings: usize },
    #[error("centroid index is empty")]
    EmptyIndex,
    #[error("index groups by {got}, operation needs {expected}")]
    WrongGrouping { expected: GroupBy, got: GroupBy },
    #[error("expected orientation is \"Unknown\"; record must be excluded")]
    UnknownOrientation,
    #[error("orientation {0:?} is not on the scale")]
    NotOnScale(String),
    #[error("party {0:?} is not in the centroid index")]
    UnknownParty(String),
    #[error("vector error: {0}")]
    Vector(#[from] VectorError),
}

/// Builds one centroid per observed group label over the training records.
///
/// The orientation index drops "Unknown" records (counted); the party index
/// keeps every party.
pub fn build_centroid_index(
    records: &[SpeechRecord],
    embeddings: &[EmbeddingVector],
    group_by: GroupBy,
) -> Result<CentroidIndex, MetricError> {
    if records.len() != embeddings.len() {
        return Err(MetricError::LengthMismatch {
            records: records.len(),
            embeddings: embeddings.len(),
        });
    }
    let mut members: BTreeMap<String, Vec<EmbeddingVector>> = BTreeMap::new();
    let mut excluded_unknown = 0;
    for (r, e) in records.iter().zip(embeddings) {
        let label = match group_by {
            GroupBy::Party => r.party.as_str(),
            GroupBy::Orientation => {
                if r.orientation == UNKNOWN_ORIENTATION {
                    excluded_unknown += 1;
                    continue;
                }
                r.orientation.as_str()
            }
        };
        if label.trim().is_empty() {
            continue;
        }
        members.entry(label.to_string()).or_default().push(e.clone());
    }
    if members.is_empty() {
        return Err(MetricError::NoUsableRecords);
    }
    let mut centroids = BTreeMap::new();
    let mut counts = BTreeMap::new();
    for (label, vectors) in members {
        counts.insert(label.clone(), vectors.len());
        centroids.insert(label, centroid(&vectors)?);
    }
    Ok(CentroidIndex {
        group_by,
        centroids,
        counts,
        excluded_unknown,
    })
}

/// Closest orientation centroid by cosine similarity; ties resolve to the
/// lexicographically smaller label.
pub fn match_orientation(
    speech: &EmbeddingVector,
    index: &CentroidIndex,
) -> Result<(String, f64), MetricError> {
    if index.group_by != GroupBy::Orientation {
        return Err(MetricError::WrongGrouping {
            expected: GroupBy::Orientation,
            got: index.group_by,
        });
    }
    if index.is_empty() {
        return Err(MetricError::EmptyIndex);
    }
    let mut best: Option<(&str, f64)> = None;
    // BTreeMap iterates in ascending label order, so a strict > keeps the
    // lexicographically smallest label on ties.
    for (label, c) in &index.centroids {
        let sim = cosine(speech, c)?;
        match best {
            Some((_, s)) if sim <= s => {}
            _ => best = Some((label, sim)),
        }
    }
    let (label, sim) = best.expect("index is non-empty");
    Ok((label.to_string(), sim))
}

/// Spectrum-alignment outcome for one speech.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsaResult {
    /// Closest-matching orientation label.
    pub matched_orientation: String,
    /// Raw cosine to the matched centroid (kept unclamped for diagnostics).
    pub similarity: f64,
    /// |phi(expected) - phi(matched)|.
    pub delta_phi: f64,
    /// max(0, similarity) * max(0, 1 - delta_phi / 12), in [0, 1].
    pub score: f64,
}

/// Political Spectrum Alignment: semantic similarity to the matched
/// orientation centroid, discounted linearly by ideological distance over
/// the 12-unit span.
pub fn psa(
    speech: &EmbeddingVector,
    expected: &str,
    index: &CentroidIndex,
    scale: &OrientationScale,
) -> Result<PsaResult, MetricError> {
    if expected == UNKNOWN_ORIENTATION {
        return Err(MetricError::UnknownOrientation);
    }
    let expected_phi = scale
        .value_of(expected)
        .ok_or_else(|| MetricError::NotOnScale(expected.to_string()))?;
    let (matched, similarity) = match_orientation(speech, index)?;
    let matched_phi = scale
        .value_of(&matched)
        .ok_or_else(|| MetricError::NotOnScale(matched.clone()))?;
    let delta_phi = (expected_phi - matched_phi).abs();
    let score = similarity.max(0.0) * (1.0 - delta_phi / SPECTRUM_SPAN).max(0.0);
    Ok(PsaResult {
        matched_orientation: matched,
        similarity,
        delta_phi,
        score,
    })
}

/// Party Alignment: cosine to the expected party centroid, clamped to [0, 1].
pub fn party_align(
    speech: &EmbeddingVector,
    party: &str,
    index: &CentroidIndex,
) -> Result<f64, MetricError> {
    if index.group_by != GroupBy::Party {
        return Err(MetricError::WrongGrouping {
            expected: GroupBy::Party,
            got: index.group_by,
        });
    }
    let c = index
        .centroid_of(party)
        .ok_or_else(|| MetricError::UnknownParty(party.to_string()))?;
    Ok(cosine(speech, c)?.max(0.0))
}
