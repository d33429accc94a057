//! Immutable positional inverted index, one term dictionary per field.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{normalize_author, tokenize_field};
use crate::corpus::{Corpus, Record};

pub type DocId = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndexError {
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("fuzziness {0} outside [0, 1)")]
    FuzzyOutOfRange(f64),
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Author,
    Title,
    Abstract,
    Body,
    Year,
    Bibcode,
    All,
}

impl Field {
    pub const ALL: [Field; 7] = [
        Field::Author,
        Field::Title,
        Field::Abstract,
        Field::Body,
        Field::Year,
        Field::Bibcode,
        Field::All,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Author => "author",
            Field::Title => "title",
            Field::Abstract => "abstract",
            Field::Body => "body",
            Field::Year => "year",
            Field::Bibcode => "bibcode",
            Field::All => "all",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }

    /// Turns query text into the terms this field indexes.
    ///
    /// Author text becomes a single normalized name, year and bibcode text
    /// a single lowercased literal, everything else goes through the tokenizer.
    pub fn analyze(self, text: &str) -> Vec<String> {
        match self {
            Field::Author => {
                let full = normalize_author(text).full;
                if full.is_empty() {
                    vec![]
                } else {
                    vec![full]
                }
            }
            Field::Year | Field::Bibcode => {
                let t = text.trim().to_lowercase();
                if t.is_empty() {
                    vec![]
                } else {
                    vec![t]
                }
            }
            _ => tokenize_field(text).into_iter().map(|t| t.term).collect(),
        }
    }

    /// The (term, position) stream indexed for `record` in this field.
    pub fn record_tokens(self, record: &Record) -> Vec<(String, u32)> {
        let text_tokens = |s: &str| -> Vec<(String, u32)> {
            tokenize_field(s)
                .into_iter()
                .map(|t| (t.term, t.position))
                .collect()
        };
        match self {
            Field::Author => {
                let mut out = Vec::new();
                for (i, raw) in record.authors.iter().enumerate() {
                    let forms = normalize_author(raw);
                    if forms.full.is_empty() {
                        continue;
                    }
                    if forms.last != forms.full && !forms.last.is_empty() {
                        out.push((forms.last, i as u32));
                    }
                    out.push((forms.full, i as u32));
                }
                out
            }
            Field::Title => text_tokens(&record.title),
            Field::Abstract => text_tokens(&record.abstract_text),
            Field::Body => text_tokens(&record.body),
            Field::Year => vec![(record.year.to_string(), 0)],
            Field::Bibcode => vec![(record.bibcode.to_lowercase(), 0)],
            Field::All => text_tokens(&format!(
                "{} {} {}",
                record.title, record.abstract_text, record.body
            )),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Field {
    type Err = IndexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Field::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| IndexError::UnknownField(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: DocId,
    /// Ascending, unique.
    pub positions: Vec<u32>,
}

impl Posting {
    pub fn term_frequency(&self) -> u32 {
        self.positions.len() as u32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldIndex {
    pub field: Field,
    postings: BTreeMap<String, Vec<Posting>>,
    /// Token count per document, zero when the document has no content here.
    doc_lengths: Vec<u32>,
}

impl FieldIndex {
    fn build(field: Field, records: &[&Record]) -> Self {
        let mut postings: HashMap<String, Vec<Posting>> = HashMap::new();
        let mut doc_lengths = Vec::with_capacity(records.len());
        let mut per_doc: HashMap<String, Vec<u32>> = HashMap::new();
        for (doc, record) in records.iter().enumerate() {
            let tokens = field.record_tokens(record);
            doc_lengths.push(tokens.len() as u32);
            for (term, pos) in tokens {
                per_doc.entry(term).or_default().push(pos);
            }
            for (term, mut positions) in per_doc.drain() {
                positions.sort_unstable();
                positions.dedup();
                postings.entry(term).or_default().push(Posting {
                    doc: doc as DocId,
                    positions,
                });
            }
        }
        FieldIndex {
            field,
            postings: postings.into_iter().collect(),
            doc_lengths,
        }
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn vocabulary_len(&self) -> usize {
        self.postings.len()
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All (term, postings) pairs in term order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Posting])> {
        self.postings
            .iter()
            .map(|(t, p)| (t.as_str(), p.as_slice()))
    }

    pub fn doc_length(&self, doc: DocId) -> u32 {
        self.doc_lengths.get(doc as usize).copied().unwrap_or(0)
    }

    fn average_length(&self) -> f64 {
        let (sum, n) = self
            .doc_lengths
            .iter()
            .filter(|&&l| l > 0)
            .fold((0u64, 0u64), |(s, n), &l| (s + l as u64, n + 1));
        if n == 0 {
            0.0
        } else {
            sum as f64 / n as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexStats {
    pub doc_count: usize,
    /// Mean token count over documents with content, in `Field::ALL` order.
    avg_field_length: Vec<f64>,
}

impl IndexStats {
    pub fn avg_field_length(&self, field: Field) -> f64 {
        self.avg_field_length[field.slot()]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Index {
    /// Bibcodes in ascending order; a document's id is its position here.
    docs: Vec<String>,
    #[serde(skip)]
    doc_ids: HashMap<String, DocId>,
    fields: Vec<FieldIndex>,
    stats: IndexStats,
}

impl PartialEq for Index {
    fn eq(&self, other: &Self) -> bool {
        self.docs == other.docs && self.fields == other.fields && self.stats == other.stats
    }
}

pub fn build_index(corpus: &Corpus) -> Index {
    let records: Vec<&Record> = corpus.records.values().collect();
    let fields: Vec<FieldIndex> = Field::ALL
        .iter()
        .map(|&f| FieldIndex::build(f, &records))
        .collect();
    let stats = IndexStats {
        doc_count: records.len(),
        avg_field_length: fields.iter().map(FieldIndex::average_length).collect(),
    };
    Index {
        docs: records.iter().map(|r| r.bibcode.clone()).collect(),
        doc_ids: HashMap::new(),
        fields,
        stats,
    }
    .restore()
}

impl Index {
    pub(crate) fn restore(mut self) -> Self {
        self.doc_ids = self
            .docs
            .iter()
            .enumerate()
            .map(|(i, b)| (b.clone(), i as DocId))
            .collect();
        self
    }

    pub fn stats(&self) -> &IndexStats {
        &self.stats
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn field(&self, field: Field) -> &FieldIndex {
        &self.fields[field.slot()]
    }

    pub fn bibcode(&self, doc: DocId) -> &str {
        &self.docs[doc as usize]
    }

    pub fn doc_id(&self, bibcode: &str) -> Option<DocId> {
        self.doc_ids.get(bibcode).copied()
    }

    pub fn bibcodes(&self, docs: &[DocId]) -> Vec<&str> {
        docs.iter().map(|&d| self.bibcode(d)).collect()
    }

    pub fn lookup_term(&self, field: Field, term: &str) -> &[Posting] {
        self.field(field).postings(term)
    }

    pub fn doc_frequency(&self, field: Field, term: &str) -> usize {
        self.lookup_term(field, term).len()
    }

    /// Documents where `terms` occur at consecutive positions.
    pub fn match_phrase(&self, field: Field, terms: &[String]) -> Vec<DocId> {
        let Some((first, rest)) = terms.split_first() else {
            return Vec::new();
        };
        let fi = self.field(field);
        let lists: Vec<&[Posting]> = rest.iter().map(|t| fi.postings(t)).collect();
        if lists.iter().any(|l| l.is_empty()) {
            return Vec::new();
        }
        let mut out = Vec::new();
        'docs: for head in fi.postings(first) {
            let mut others = Vec::with_capacity(lists.len());
            for list in &lists {
                match find_doc(list, head.doc) {
                    Some(p) => others.push(p),
                    None => continue 'docs,
                }
            }
            let hit = head.positions.iter().any(|&start| {
                others
                    .iter()
                    .enumerate()
                    .all(|(i, p)| p.positions.binary_search(&(start + i as u32 + 1)).is_ok())
            });
            if hit {
                out.push(head.doc);
            }
        }
        out
    }

    /// Documents with occurrences of `a` and `b` at distinct positions at most
    /// `distance` apart, in either order.
    pub fn match_proximity(&self, field: Field, a: &str, b: &str, distance: u32) -> Vec<DocId> {
        let fi = self.field(field);
        let right = fi.postings(b);
        let mut out = Vec::new();
        for pa in fi.postings(a) {
            let Some(pb) = find_doc(right, pa.doc) else {
                continue;
            };
            if positions_near(&pa.positions, &pb.positions, distance) {
                out.push(pa.doc);
            }
        }
        out
    }

    /// Vocabulary terms within normalized edit distance `max_ratio` of `term`.
    ///
    /// In the author field a name with a comma only matches other full names
    /// and a bare surname only matches other surnames.
    pub fn expand_fuzzy(
        &self,
        field: Field,
        term: &str,
        max_ratio: f64,
    ) -> Result<Vec<String>, IndexError> {
        if !(0.0..1.0).contains(&max_ratio) {
            return Err(IndexError::FuzzyOutOfRange(max_ratio));
        }
        let query: Vec<char> = term.chars().collect();
        let query_full = term.contains(',');
        let mut out = Vec::new();
        for cand in self.field(field).vocabulary() {
            if field == Field::Author && cand.contains(',') != query_full {
                continue;
            }
            let cand_chars: Vec<char> = cand.chars().collect();
            let longest = query.len().max(cand_chars.len()).max(1) as f64;
            let gap = query.len().abs_diff(cand_chars.len()) as f64;
            if gap / longest > max_ratio {
                continue;
            }
            if osa_distance(&query, &cand_chars) as f64 / longest <= max_ratio {
                out.push(cand.to_string());
            }
        }
        Ok(out)
    }

    /// Vocabulary terms fully matching `pattern`.
    pub fn expand_regex(&self, field: Field, pattern: &str) -> Result<Vec<String>, IndexError> {
        let re = Regex::new(&format!("^(?:{pattern})$"))
            .map_err(|e| IndexError::InvalidPattern(e.to_string()))?;
        Ok(self
            .field(field)
            .vocabulary()
            .filter(|t| re.is_match(t))
            .map(str::to_string)
            .collect())
    }
}

fn find_doc(list: &[Posting], doc: DocId) -> Option<&Posting> {
    list.binary_search_by_key(&doc, |p| p.doc)
        .ok()
        .map(|i| &list[i])
}

fn positions_near(a: &[u32], b: &[u32], distance: u32) -> bool {
    a.iter().any(|&pa| {
        let idx = b.partition_point(|&pb| pb < pa);
        // nearest candidates on either side, skipping an equal position
        let below = b[..idx].last();
        let above = b[idx..].iter().find(|&&pb| pb != pa);
        below.is_some_and(|&pb| pa - pb <= distance) || above.is_some_and(|&pb| pb - pa <= distance)
    })
}

/// Optimal-string-alignment distance: insertions, deletions, substitutions
/// and transpositions of adjacent characters, each costing one.
pub fn osa_distance(a: &[char], b: &[char]) -> usize {
    let (n, m) = (a.len(), b.len());
    let mut prev2 = vec![0usize; m + 1];
    let mut prev: Vec<usize> = (0..=m).collect();
    let mut cur = vec![0usize; m + 1];
    for i in 1..=n {
        cur[0] = i;
        for j in 1..=m {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut best = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                best = best.min(prev2[j - 2] + 1);
            }
            cur[j] = best;
        }
        std::mem::swap(&mut prev2, &mut prev);
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m]
}
