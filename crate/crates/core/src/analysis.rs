//! Tokenization, author-name normalization and query-time synonym expansion.

use std::collections::{BTreeSet, HashMap};

use crate::corpus::SynonymSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub term: String,
    pub position: u32,
}

/// Lowercases and splits on every run of non-alphanumeric characters.
pub fn tokenize_field(text: &str) -> Vec<Token> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .enumerate()
        .map(|(i, w)| Token {
            term: w.to_string(),
            position: i as u32,
        })
        .collect()
}

/// Just the terms of [`tokenize_field`].
pub fn terms(text: &str) -> Vec<String> {
    tokenize_field(text).into_iter().map(|t| t.term).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorForms {
    pub full: String,
    pub last: String,
}

/// `"Eisenstein, D."` becomes `("eisenstein, d", "eisenstein")`.
///
/// Characters other than letters, digits, commas, hyphens and apostrophes are
/// treated as spaces; whitespace is collapsed and every comma is followed by
/// exactly one space.
pub fn normalize_author(raw: &str) -> AuthorForms {
    let cleaned: String = raw
        .to_lowercase()
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c == ',' || c == '-' || c == '\'' {
                c
            } else {
                ' '
            }
        })
        .collect();
    let parts: Vec<String> = cleaned
        .split(',')
        .map(|p| p.split_whitespace().collect::<Vec<_>>().join(" "))
        .collect();
    // Drop empty trailing segments ("Curie," -> "curie").
    let mut end = parts.len();
    while end > 1 && parts[end - 1].is_empty() {
        end -= 1;
    }
    let full = parts[..end].join(", ");
    let last = parts[0].clone();
    AuthorForms { full, last }
}

/// Synonym lookup table built from disjoint groups.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymTable {
    groups: Vec<BTreeSet<String>>,
    member_of: HashMap<String, usize>,
}

impl SynonymTable {
    pub fn new(sets: &[SynonymSet]) -> Self {
        let mut table = SynonymTable {
            groups: sets.iter().map(|s| s.terms.clone()).collect(),
            member_of: HashMap::new(),
        };
        table.reindex();
        table
    }

    fn reindex(&mut self) {
        self.member_of = self
            .groups
            .iter()
            .enumerate()
            .flat_map(|(i, g)| g.iter().map(move |t| (t.clone(), i)))
            .collect();
    }

    pub fn expand(&self, term: &str) -> BTreeSet<String> {
        match self.member_of.get(term) {
            Some(&g) => self.groups[g].clone(),
            None => BTreeSet::from([term.to_string()]),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Returns `term`'s whole synonym group, or just `{term}`.
pub fn expand_synonyms(term: &str, table: &[SynonymSet]) -> BTreeSet<String> {
    table
        .iter()
        .find(|s| s.terms.contains(term))
        .map(|s| s.terms.clone())
        .unwrap_or_else(|| BTreeSet::from([term.to_string()]))
}
