//! Record model and line-delimited loaders for records, readership logs and
//! synonym tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {0}: duplicate bibcode")]
    DuplicateBibcode(usize),
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: usize, field: &'static str },
    #[error("term `{0}` appears in more than one synonym group")]
    OverlappingGroups(String),
}

/// One bibliographic item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub bibcode: String,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub year: u32,
    #[serde(default)]
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub references: Vec<String>,
}

impl Record {
    fn check(&self) -> Result<(), String> {
        if self.bibcode.is_empty() {
            return Err("bibcode is empty".into());
        }
        if self.bibcode.chars().any(char::is_whitespace) {
            return Err(format!("bibcode `{}` contains whitespace", self.bibcode));
        }
        if self.year > 9999 {
            return Err(format!("year {} outside 0..=9999", self.year));
        }
        if self.authors.iter().any(|a| a.trim().is_empty()) {
            return Err("empty author entry".into());
        }
        let mut seen = BTreeSet::new();
        for r in &self.references {
            if r == &self.bibcode {
                return Err("record references itself".into());
            }
            if !seen.insert(r.as_str()) {
                return Err(format!("duplicate reference `{r}`"));
            }
        }
        Ok(())
    }
}

/// An anonymized (reader, paper) usage pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ReadershipEvent {
    #[serde(rename = "reader")]
    pub reader_id: String,
    pub bibcode: String,
}

/// A group of mutually synonymous lowercase terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynonymSet {
    pub terms: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub records: BTreeMap<String, Record>,
    /// Sorted and deduplicated.
    pub readership: Vec<ReadershipEvent>,
    pub synonyms: Vec<SynonymSet>,
}

impl Corpus {
    pub fn new(
        records: BTreeMap<String, Record>,
        readership: Vec<ReadershipEvent>,
        synonyms: Vec<SynonymSet>,
    ) -> Self {
        Corpus {
            records,
            readership: dedup_events(readership),
            synonyms,
        }
    }

    pub fn get(&self, bibcode: &str) -> Option<&Record> {
        self.records.get(bibcode)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Findings of [`validate_corpus`]. Nothing in here is fatal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    /// Referenced bibcodes with no record, sorted and unique.
    pub dangling_references: Vec<String>,
    /// Readership events whose bibcode has no record.
    pub unknown_readership: Vec<ReadershipEvent>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.dangling_references.is_empty() && self.unknown_readership.is_empty()
    }
}

fn read_file(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_records(path: impl AsRef<Path>) -> Result<BTreeMap<String, Record>, CorpusError> {
    parse_records(&read_file(path.as_ref())?)
}

/// Parses the records format: one JSON object per non-blank line.
pub fn parse_records(text: &str) -> Result<BTreeMap<String, Record>, CorpusError> {
    let mut records = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(raw).map_err(|e| CorpusError::MalformedLine {
                line,
                reason: e.to_string(),
            })?;
        if value.get("bibcode").is_none() {
            return Err(CorpusError::MissingField {
                line,
                field: "bibcode",
            });
        }
        let record: Record =
            serde_json::from_value(value).map_err(|e| CorpusError::MalformedLine {
                line,
                reason: e.to_string(),
            })?;
        record
            .check()
            .map_err(|reason| CorpusError::MalformedLine { line, reason })?;
        if records.contains_key(&record.bibcode) {
            return Err(CorpusError::DuplicateBibcode(line));
        }
        records.insert(record.bibcode.clone(), record);
    }
    Ok(records)
}

/// Writes records in the same line format `parse_records` reads, in bibcode order.
pub fn write_records<'a, W: Write>(
    out: &mut W,
    records: impl IntoIterator<Item = &'a Record>,
) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn load_readership(path: impl AsRef<Path>) -> Result<Vec<ReadershipEvent>, CorpusError> {
    parse_readership(&read_file(path.as_ref())?)
}

pub fn parse_readership(text: &str) -> Result<Vec<ReadershipEvent>, CorpusError> {
    let mut events = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let ev: ReadershipEvent =
            serde_json::from_str(raw).map_err(|e| CorpusError::MalformedLine {
                line,
                reason: e.to_string(),
            })?;
        if ev.reader_id.is_empty() {
            return Err(CorpusError::MalformedLine {
                line,
                reason: "reader is empty".into(),
            });
        }
        if ev.bibcode.is_empty() {
            return Err(CorpusError::MalformedLine {
                line,
                reason: "bibcode is empty".into(),
            });
        }
        events.push(ev);
    }
    Ok(dedup_events(events))
}

fn dedup_events(mut events: Vec<ReadershipEvent>) -> Vec<ReadershipEvent> {
    events.sort();
    events.dedup();
    events
}

pub fn load_synonyms(path: impl AsRef<Path>) -> Result<Vec<SynonymSet>, CorpusError> {
    parse_synonyms(&read_file(path.as_ref())?)
}

/// Parses comma-separated synonym groups. `#` starts a comment that runs to
/// the end of the line.
pub fn parse_synonyms(text: &str) -> Result<Vec<SynonymSet>, CorpusError> {
    let mut groups = Vec::new();
    let mut owner: BTreeSet<String> = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let terms: BTreeSet<String> = content
            .split(',')
            .map(|t| t.trim().to_lowercase())
            .filter(|t| !t.is_empty())
            .collect();
        if terms.is_empty() {
            continue;
        }
        if terms.len() < 2 {
            return Err(CorpusError::MalformedLine {
                line: idx + 1,
                reason: "a synonym group needs at least two terms".into(),
            });
        }
        for t in &terms {
            if !owner.insert(t.clone()) {
                return Err(CorpusError::OverlappingGroups(t.clone()));
            }
        }
        groups.push(SynonymSet { terms });
    }
    Ok(groups)
}

/// Loads a full corpus. Readership and synonyms are optional.
pub fn load_corpus(
    records: impl AsRef<Path>,
    readership: Option<&Path>,
    synonyms: Option<&Path>,
) -> Result<Corpus, CorpusError> {
    let records = load_records(records)?;
    let readership = match readership {
        Some(p) => load_readership(p)?,
        None => Vec::new(),
    };
    let synonyms = match synonyms {
        Some(p) => load_synonyms(p)?,
        None => Vec::new(),
    };
    Ok(Corpus::new(records, readership, synonyms))
}

pub fn validate_corpus(corpus: &Corpus) -> ValidationReport {
    let dangling: BTreeSet<&String> = corpus
        .records
        .values()
        .flat_map(|r| r.references.iter())
        .filter(|b| !corpus.records.contains_key(*b))
        .collect();
    ValidationReport {
        dangling_references: dangling.into_iter().cloned().collect(),
        unknown_readership: corpus
            .readership
            .iter()
            .filter(|ev| !corpus.records.contains_key(&ev.bibcode))
            .cloned()
            .collect(),
    }
}

pub const DESK6_RECORDS: &str = include_str!("../data/desk6/records.jsonl");
pub const DESK6_READERSHIP: &str = include_str!("../data/desk6/readership.jsonl");
pub const DESK6_SYNONYMS: &str = include_str!("../data/desk6/synonyms.txt");

/// The six-record demonstration corpus shipped with the crate.
pub fn desk6() -> Corpus {
    Corpus::new(
        parse_records(DESK6_RECORDS).expect("desk6 records parse"),
        parse_readership(DESK6_READERSHIP).expect("desk6 readership parse"),
        parse_synonyms(DESK6_SYNONYMS).expect("desk6 synonyms parse"),
    )
}
