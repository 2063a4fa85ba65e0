//! CAP-to-EuroVoc topic mapping.
//!
//! Thirteen categories map directly; the remaining nine need an external
//! classifier, exposed here only as a pluggable hook.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingMethod {
    Direct,
    Automated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicMappingRow {
    pub cap_category: &'static str,
    pub eurovoc_category: Option<&'static str>,
    pub method: MappingMethod,
}

#[derive(Debug, Clone)]
pub struct TopicMappingTable {
    rows: Vec<TopicMappingRow>,
}

impl TopicMappingTable {
    pub fn rows(&self) -> &[TopicMappingRow] {
        &self.rows
    }

    pub fn lookup(&self, cap_category: &str) -> Option<&TopicMappingRow> {
        self.rows
            .iter()
            .find(|r| r.cap_category.eq_ignore_ascii_case(cap_category.trim()))
    }
}

macro_rules! direct {
    ($cap:literal, $eurovoc:literal) => {
        TopicMappingRow {
            cap_category: $cap,
            eurovoc_category: Some($eurovoc),
            method: MappingMethod::Direct,
        }
    };
}

macro_rules! automated {
    ($cap:literal) => {
        TopicMappingRow {
            cap_category: $cap,
            eurovoc_category: None,
            method: MappingMethod::Automated,
        }
    };
}

/// The full 22-row mapping table.
pub fn builtin_topic_table() -> TopicMappingTable {
    TopicMappingTable {
        rows: vec![
            direct!("Energy", "Energy"),
            direct!("Environment", "Environment"),
            direct!("Transportation", "Transport"),
            direct!("Foreign Trade", "Trade"),
            direct!("Government Operations", "Politics"),
            direct!("International Affairs", "International Relations"),
            direct!("Labor", "Employment and Working Conditions"),
            direct!("Law and Crime", "Law"),
            direct!("Agriculture", "Agriculture, Forestry, Fisheries"),
            direct!("Education", "Education and Communications"),
            direct!("Macroeconomics", "Economy"),
            direct!("Social Welfare", "Social Questions"),
            direct!("Technology", "Production, Technology and Research"),
            automated!("Civil Rights"),
            automated!("Domestic Commerce"),
            automated!("Culture"),
            automated!("Health"),
            automated!("Defense"),
            automated!("Housing"),
            automated!("Immigration"),
            automated!("Public Lands"),
            automated!("Mix/Other"),
        ],
    }
}

/// Hook for the external semantic classifier that handles the automated rows.
pub trait ExternalClassifier {
    fn classify(&self, cap_category: &str) -> Result<String, String>;
}

impl<F> ExternalClassifier for F
where
    F: Fn(&str) -> Result<String, String>,
{
    fn classify(&self, cap_category: &str) -> Result<String, String> {
        self(cap_category)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TopicError {
    #[error("unknown CAP category: {0:?}")]
    UnknownCategory(String),
    #[error("CAP category {0:?} requires the external classifier, none configured")]
    ClassifierRequired(String),
    #[error("external classifier failed for {category:?}: {reason}")]
    ClassifierFailed { category: String, reason: String },
}

/// Resolves a CAP category to its EuroVoc label. Direct rows answer from the
/// table; automated rows delegate to `classifier` when provided.
pub fn map_topic(
    cap_category: &str,
    table: &TopicMappingTable,
    classifier: Option<&dyn ExternalClassifier>,
) -> Result<String, TopicError> {
    let row = table
        .lookup(cap_category)
        .ok_or_else(|| TopicError::UnknownCategory(cap_category.to_string()))?;
    match (&row.eurovoc_category, row.method) {
        (Some(label), MappingMethod::Direct) => Ok(label.to_string()),
        (_, MappingMethod::Automated) => match classifier {
            Some(c) => c
                .classify(row.cap_category)
                .map_err(|reason| TopicError::ClassifierFailed {
                    category: row.cap_category.to_string(),
                    reason,
                }),
            None => Err(TopicError::ClassifierRequired(row.cap_category.to_string())),
        },
        (None, MappingMethod::Direct) => unreachable!("direct rows always carry a label"),
    }
}
