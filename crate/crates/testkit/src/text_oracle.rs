//! Linear-scan evaluation of query trees: every document's raw text is
//! tokenized on the spot and each predicate is checked by direct search.

use std::collections::BTreeSet;

use adsk_core::analysis::{normalize_author, tokenize_field};
use adsk_core::corpus::{Corpus, Record};
use adsk_core::qlang::QueryNode;
use adsk_core::Field;
use regex::Regex;

use crate::edit_distance;

pub struct TextOracle<'c> {
    corpus: &'c Corpus,
}

impl<'c> TextOracle<'c> {
    pub fn new(corpus: &'c Corpus) -> Self {
        TextOracle { corpus }
    }

    /// Matching bibcodes. Panics on functional operators or bad regexes.
    pub fn matches(&self, node: &QueryNode) -> BTreeSet<String> {
        self.corpus
            .records
            .values()
            .filter(|r| self.holds(node, r))
            .map(|r| r.bibcode.clone())
            .collect()
    }

    fn holds(&self, node: &QueryNode, record: &Record) -> bool {
        match node {
            QueryNode::And(c) => c.iter().all(|n| self.holds(n, record)),
            QueryNode::Or(c) => c.iter().any(|n| self.holds(n, record)),
            QueryNode::Not(c) => !self.holds(c, record),
            QueryNode::Term(t) => {
                let tokens = field_tokens(t.field, record);
                tokens.iter().any(|(tok, _)| {
                    if let Some(f) = t.fuzz {
                        if t.field == Field::Author && tok.contains(',') != t.text.contains(',') {
                            return false;
                        }
                        let longest = tok.chars().count().max(t.text.chars().count()) as f64;
                        edit_distance(tok, &t.text) as f64 / longest <= f
                    } else if t.synonyms {
                        self.synonyms_of(&t.text).contains(tok)
                    } else {
                        *tok == t.text
                    }
                })
            }
            QueryNode::Phrase { field, terms } => {
                let tokens = field_tokens(*field, record);
                tokens.iter().any(|(_, start)| {
                    terms.iter().enumerate().all(|(k, term)| {
                        tokens
                            .iter()
                            .any(|(tok, pos)| tok == term && *pos == start + k as u32)
                    })
                })
            }
            QueryNode::Proximity {
                field,
                left,
                right,
                distance,
            } => {
                let tokens = field_tokens(*field, record);
                tokens.iter().any(|(a, pa)| {
                    a == left
                        && tokens
                            .iter()
                            .any(|(b, pb)| b == right && pa != pb && pa.abs_diff(*pb) <= *distance)
                })
            }
            QueryNode::Regex { field, pattern } => {
                let re = Regex::new(&format!("^(?:{pattern})$")).expect("oracle regex");
                field_tokens(*field, record)
                    .iter()
                    .any(|(tok, _)| re.is_match(tok))
            }
            QueryNode::Func { .. } => panic!("text oracle has no graph semantics"),
        }
    }

    fn synonyms_of(&self, term: &str) -> BTreeSet<String> {
        for group in &self.corpus.synonyms {
            if group.terms.contains(term) {
                return group.terms.clone();
            }
        }
        BTreeSet::from([term.to_string()])
    }
}

/// (term, position) pairs of one record's field, straight from its text.
pub fn field_tokens(field: Field, record: &Record) -> Vec<(String, u32)> {
    let text = |s: &str| -> Vec<(String, u32)> {
        tokenize_field(s)
            .into_iter()
            .map(|t| (t.term, t.position))
            .collect()
    };
    match field {
        Field::Author => record
            .authors
            .iter()
            .enumerate()
            .flat_map(|(i, a)| {
                let forms = normalize_author(a);
                [(forms.full, i as u32), (forms.last, i as u32)]
            })
            .collect(),
        Field::Title => text(&record.title),
        Field::Abstract => text(&record.abstract_text),
        Field::Body => text(&record.body),
        Field::Year => vec![(record.year.to_string(), 0)],
        Field::Bibcode => vec![(record.bibcode.to_lowercase(), 0)],
        Field::All => text(
            &[
                record.title.as_str(),
                record.abstract_text.as_str(),
                record.body.as_str(),
            ]
            .join(" "),
        ),
    }
}
