//! Query evaluation: boolean set semantics over the index, BM25 ranking, and
//! the functional operators that expand a result set through the graphs.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::SynonymTable;
use crate::graphs::{Direction, Graphs};
use crate::index::{DocId, Field, Index, IndexError};
use crate::qlang::{FuncOp, QueryNode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExecError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("rows {rows} exceeds the maximum of {max}")]
    RowsOutOfRange { rows: usize, max: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecConfig {
    /// How many inner results feed a functional operator; `None` means all.
    pub inner_top_k: Option<usize>,
    pub bm25_k1: f64,
    pub bm25_b: f64,
    pub default_rows: usize,
    pub max_rows: usize,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            inner_top_k: Some(200),
            bm25_k1: 1.2,
            bm25_b: 0.75,
            default_rows: 10,
            max_rows: 2000,
        }
    }
}

impl ExecConfig {
    pub fn validate(&self) -> Result<(), ExecError> {
        if self.inner_top_k == Some(0) {
            return Err(ExecError::InvalidConfig(
                "inner_top_k must be at least 1".into(),
            ));
        }
        if !(self.bm25_k1 > 0.0 && self.bm25_k1.is_finite()) {
            return Err(ExecError::InvalidConfig("bm25_k1 must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.bm25_b) {
            return Err(ExecError::InvalidConfig("bm25_b must lie in [0, 1]".into()));
        }
        if self.default_rows > self.max_rows {
            return Err(ExecError::InvalidConfig(
                "default_rows exceeds max_rows".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    TextBm25,
    OperatorCount,
    OperatorWeighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDoc {
    pub bibcode: String,
    pub score: f64,
    pub kind: ScoreKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultPage {
    pub num_found: usize,
    pub start: usize,
    pub docs: Vec<ScoredDoc>,
}

/// Score descending, then bibcode ascending.
pub fn rank_order(a_score: f64, a_bib: &str, b_score: f64, b_bib: &str) -> Ordering {
    b_score
        .partial_cmp(&a_score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a_bib.cmp(b_bib))
}

fn bm25(tf: u32, df: usize, n: usize, len: u32, avg_len: f64, config: &ExecConfig) -> f64 {
    if tf == 0 || df == 0 {
        return 0.0;
    }
    let (tf, df, n) = (tf as f64, df as f64, n as f64);
    let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
    let k1 = config.bm25_k1;
    let norm = if avg_len > 0.0 {
        1.0 - config.bm25_b + config.bm25_b * len as f64 / avg_len
    } else {
        1.0
    };
    idf * tf * (k1 + 1.0) / (tf + k1 * norm)
}

/// BM25 contribution of `term` to `bibcode`'s score in `field`; zero when absent.
pub fn score_bm25(
    index: &Index,
    field: Field,
    term: &str,
    bibcode: &str,
    config: &ExecConfig,
) -> f64 {
    index
        .doc_id(bibcode)
        .map_or(0.0, |doc| term_score(index, field, term, doc, config))
}

fn term_score(index: &Index, field: Field, term: &str, doc: DocId, config: &ExecConfig) -> f64 {
    let postings = index.lookup_term(field, term);
    let Ok(i) = postings.binary_search_by_key(&doc, |p| p.doc) else {
        return 0.0;
    };
    let fi = index.field(field);
    bm25(
        postings[i].term_frequency(),
        postings.len(),
        index.doc_count(),
        fi.doc_length(doc),
        index.stats().avg_field_length(field),
        config,
    )
}

#[derive(Debug, Clone, Copy)]
struct Hit {
    score: f64,
    kind: ScoreKind,
}

type Hits<'a> = HashMap<&'a str, Hit>;

pub struct Executor<'a> {
    index: &'a Index,
    graphs: &'a Graphs,
    synonyms: &'a SynonymTable,
    config: &'a ExecConfig,
}

impl<'a> Executor<'a> {
    pub fn new(
        index: &'a Index,
        graphs: &'a Graphs,
        synonyms: &'a SynonymTable,
        config: &'a ExecConfig,
    ) -> Self {
        Executor {
            index,
            graphs,
            synonyms,
            config,
        }
    }

    pub fn config(&self) -> &ExecConfig {
        self.config
    }

    /// One page of the full ranking.
    pub fn execute(
        &self,
        node: &QueryNode,
        rows: usize,
        start: usize,
    ) -> Result<ResultPage, ExecError> {
        if rows > self.config.max_rows {
            return Err(ExecError::RowsOutOfRange {
                rows,
                max: self.config.max_rows,
            });
        }
        let ranked = self.ranked(node)?;
        let num_found = ranked.len();
        let docs = ranked
            .into_iter()
            .skip(start)
            .take(rows)
            .map(|(b, h)| ScoredDoc {
                bibcode: b.to_string(),
                score: h.score,
                kind: h.kind,
            })
            .collect();
        Ok(ResultPage {
            num_found,
            start,
            docs,
        })
    }

    /// The complete ordering, without paging limits.
    pub fn search_all(&self, node: &QueryNode) -> Result<Vec<ScoredDoc>, ExecError> {
        Ok(self
            .ranked(node)?
            .into_iter()
            .map(|(b, h)| ScoredDoc {
                bibcode: b.to_string(),
                score: h.score,
                kind: h.kind,
            })
            .collect())
    }

    fn ranked(&self, node: &QueryNode) -> Result<Vec<(&'a str, Hit)>, ExecError> {
        let mut hits: Vec<(&str, Hit)> = self.eval(node)?.into_iter().collect();
        hits.sort_by(|a, b| rank_order(a.1.score, a.0, b.1.score, b.0));
        Ok(hits)
    }

    fn eval(&self, node: &QueryNode) -> Result<Hits<'a>, ExecError> {
        let index = self.index;
        match node {
            QueryNode::Term(t) => {
                let variants: Vec<String> = if let Some(f) = t.fuzz {
                    index.expand_fuzzy(t.field, &t.text, f)?
                } else if t.synonyms {
                    self.synonyms.expand(&t.text).into_iter().collect()
                } else {
                    vec![t.text.clone()]
                };
                Ok(self.best_of(t.field, &variants))
            }
            QueryNode::Regex { field, pattern } => {
                let variants = index.expand_regex(*field, pattern)?;
                Ok(self.best_of(*field, &variants))
            }
            QueryNode::Phrase { field, terms } => {
                let docs = index.match_phrase(*field, terms);
                Ok(self.sum_of(*field, &docs, terms.iter().map(String::as_str)))
            }
            QueryNode::Proximity {
                field,
                left,
                right,
                distance,
            } => {
                let docs = index.match_proximity(*field, left, right, *distance);
                Ok(self.sum_of(*field, &docs, [left.as_str(), right.as_str()]))
            }
            QueryNode::And(children) => {
                let mut iter = children.iter();
                let mut acc = match iter.next() {
                    Some(first) => self.eval(first)?,
                    None => return Ok(Hits::new()),
                };
                for child in iter {
                    let other = self.eval(child)?;
                    acc.retain(|b, hit| match other.get(b) {
                        Some(o) => {
                            hit.score += o.score;
                            true
                        }
                        None => false,
                    });
                }
                Ok(acc)
            }
            QueryNode::Or(children) => {
                // children are merged in order so the first matching child sets the kind
                let mut acc = Hits::new();
                for child in children {
                    let mut part: Vec<(&str, Hit)> = self.eval(child)?.into_iter().collect();
                    part.sort_by(|a, b| a.0.cmp(b.0));
                    for (b, hit) in part {
                        acc.entry(b)
                            .and_modify(|h| h.score += hit.score)
                            .or_insert(hit);
                    }
                }
                Ok(acc)
            }
            QueryNode::Not(child) => {
                let excluded = self.eval(child)?;
                Ok((0..index.doc_count() as DocId)
                    .map(|d| index.bibcode(d))
                    .filter(|b| !excluded.contains_key(b))
                    .map(|b| {
                        (
                            b,
                            Hit {
                                score: 0.0,
                                kind: ScoreKind::TextBm25,
                            },
                        )
                    })
                    .collect())
            }
            QueryNode::Func { op, inner } => {
                let mut seeds = self.ranked(inner)?;
                if let Some(k) = self.config.inner_top_k {
                    seeds.truncate(k);
                }
                let seeds: Vec<(&str, f64)> =
                    seeds.into_iter().map(|(b, h)| (b, h.score)).collect();
                Ok(expand_operator(*op, &seeds, self.graphs)
                    .into_iter()
                    .map(|(b, score, kind)| (b, Hit { score, kind }))
                    .collect())
            }
        }
    }

    /// Union of the variants' postings, each doc scored by its best variant.
    fn best_of(&self, field: Field, variants: &[String]) -> Hits<'a> {
        let index = self.index;
        let fi = index.field(field);
        let n = index.doc_count();
        let avg = index.stats().avg_field_length(field);
        let mut hits = Hits::new();
        for v in variants {
            let postings = fi.postings(v);
            for p in postings {
                let score = bm25(
                    p.term_frequency(),
                    postings.len(),
                    n,
                    fi.doc_length(p.doc),
                    avg,
                    self.config,
                );
                let hit = hits.entry(index.bibcode(p.doc)).or_insert(Hit {
                    score: 0.0,
                    kind: ScoreKind::TextBm25,
                });
                hit.score = hit.score.max(score);
            }
        }
        hits
    }

    fn sum_of<'t>(
        &self,
        field: Field,
        docs: &[DocId],
        terms: impl IntoIterator<Item = &'t str> + Clone,
    ) -> Hits<'a> {
        docs.iter()
            .map(|&d| {
                let score = terms
                    .clone()
                    .into_iter()
                    .map(|t| term_score(self.index, field, t, d, self.config))
                    .sum();
                (
                    self.index.bibcode(d),
                    Hit {
                        score,
                        kind: ScoreKind::TextBm25,
                    },
                )
            })
            .collect()
    }
}

fn expand_operator<'g>(
    op: FuncOp,
    seeds: &[(&str, f64)],
    graphs: &'g Graphs,
) -> Vec<(&'g str, f64, ScoreKind)> {
    let citations = &graphs.citations;
    let counted = |m: BTreeMap<&'g str, usize>| -> Vec<(&'g str, f64, ScoreKind)> {
        m.into_iter()
            .map(|(b, c)| (b, c as f64, ScoreKind::OperatorCount))
            .collect()
    };
    let weighted = |direction: Direction| -> Vec<(&'g str, f64, ScoreKind)> {
        let mut acc: BTreeMap<&'g str, f64> = BTreeMap::new();
        for &(paper, relevance) in seeds {
            let linked = match direction {
                Direction::Refs => citations.refs_of(paper),
                Direction::Cites => citations.cited_by(paper),
            };
            for c in linked {
                *acc.entry(c.as_str()).or_insert(0.0) += relevance;
            }
        }
        acc.into_iter()
            .map(|(b, s)| (b, s, ScoreKind::OperatorWeighted))
            .collect()
    };
    let seed_ids = seeds.iter().map(|&(b, _)| b);
    match op {
        FuncOp::References => counted(citations.neighborhood(seed_ids, Direction::Refs)),
        FuncOp::Citations => counted(citations.neighborhood(seed_ids, Direction::Cites)),
        FuncOp::Useful => weighted(Direction::Refs),
        FuncOp::Instructive => weighted(Direction::Cites),
        FuncOp::Trending => counted(graphs.readership.coread_counts(seed_ids)),
    }
}

fn eval_op(op: FuncOp, inner: &[ScoredDoc], graphs: &Graphs) -> Vec<ScoredDoc> {
    let seeds: Vec<(&str, f64)> = inner
        .iter()
        .map(|d| (d.bibcode.as_str(), d.score))
        .collect();
    let mut out: Vec<ScoredDoc> = expand_operator(op, &seeds, graphs)
        .into_iter()
        .map(|(b, score, kind)| ScoredDoc {
            bibcode: b.to_string(),
            score,
            kind,
        })
        .collect();
    out.sort_by(|a, b| rank_order(a.score, &a.bibcode, b.score, &b.bibcode));
    out
}

/// Papers cited by the inner set, scored by how many inner papers cite each.
pub fn eval_references(inner: &[ScoredDoc], graphs: &Graphs) -> Vec<ScoredDoc> {
    eval_op(FuncOp::References, inner, graphs)
}

/// Papers citing the inner set, scored by how many inner papers each cites.
pub fn eval_citations(inner: &[ScoredDoc], graphs: &Graphs) -> Vec<ScoredDoc> {
    eval_op(FuncOp::Citations, inner, graphs)
}

/// Like [`eval_references`] but each citing paper contributes its relevance.
pub fn eval_useful(inner: &[ScoredDoc], graphs: &Graphs) -> Vec<ScoredDoc> {
    eval_op(FuncOp::Useful, inner, graphs)
}

/// Like [`eval_citations`] but each cited paper contributes its relevance.
pub fn eval_instructive(inner: &[ScoredDoc], graphs: &Graphs) -> Vec<ScoredDoc> {
    eval_op(FuncOp::Instructive, inner, graphs)
}

/// Papers co-read with the inner set, scored by shared readers.
pub fn eval_trending(inner: &[ScoredDoc], graphs: &Graphs) -> Vec<ScoredDoc> {
    eval_op(FuncOp::Trending, inner, graphs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::desk6;
    use crate::index::build_index;
    use crate::qlang::parse;

    struct Fixture {
        index: Index,
        graphs: Graphs,
        synonyms: SynonymTable,
        config: ExecConfig,
    }

    impl Fixture {
        fn new() -> Self {
            let c = desk6();
            Fixture {
                index: build_index(&c),
                graphs: Graphs::build(&c),
                synonyms: SynonymTable::new(&c.synonyms),
                config: ExecConfig::default(),
            }
        }

        fn exec(&self) -> Executor<'_> {
            Executor::new(&self.index, &self.graphs, &self.synonyms, &self.config)
        }

        fn all(&self, q: &str) -> Vec<ScoredDoc> {
            self.exec().search_all(&parse(q).unwrap()).unwrap()
        }

        fn bibs(&self, q: &str) -> Vec<String> {
            self.all(q).into_iter().map(|d| d.bibcode).collect()
        }

        fn sorted_bibs(&self, q: &str) -> Vec<String> {
            let mut v = self.bibs(q);
            v.sort();
            v
        }
    }

    fn docs(pairs: &[(&str, f64)]) -> Vec<ScoredDoc> {
        pairs
            .iter()
            .map(|&(b, s)| ScoredDoc {
                bibcode: b.into(),
                score: s,
                kind: ScoreKind::TextBm25,
            })
            .collect()
    }

    fn summary(d: &[ScoredDoc]) -> Vec<(String, f64)> {
        d.iter().map(|d| (d.bibcode.clone(), d.score)).collect()
    }

    fn pairs(p: &[(&str, f64)]) -> Vec<(String, f64)> {
        p.iter().map(|&(b, s)| (b.to_string(), s)).collect()
    }

    #[test]
    fn author_query() {
        let f = Fixture::new();
        let page = f
            .exec()
            .execute(&parse("author:einstein").unwrap(), 10, 0)
            .unwrap();
        assert_eq!(page.num_found, 2);
        assert_eq!(f.sorted_bibs("author:einstein"), ["B2", "B3"]);
    }

    #[test]
    fn proximity_query() {
        let f = Fixture::new();
        assert!(f
            .bibs("body:(weak NEAR5 lensing)")
            .contains(&"B1".to_string()));
    }

    #[test]
    fn synonyms_and_exact() {
        let f = Fixture::new();
        assert_eq!(f.sorted_bibs("body:galaxy"), ["B1", "B4"]);
        assert_eq!(f.sorted_bibs("body:=galaxy"), ["B4"]);
    }

    #[test]
    fn bm25_matches_formula() {
        let f = Fixture::new();
        // N = 6, df = 1, tf = 1, |B6 body| = 6, avg body length = 39/6
        let idf = (1.0f64 + (6.0 - 1.0 + 0.5) / (1.0 + 0.5)).ln();
        let expected = idf * 1.0 * 2.2 / (1.0 + 1.2 * (0.25 + 0.75 * 6.0 / (39.0 / 6.0)));
        let got = score_bm25(&f.index, Field::Body, "numerical", "B6", &f.config);
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert_eq!(
            score_bm25(&f.index, Field::Body, "numerical", "B1", &f.config),
            0.0
        );
        let hits = f.all("body:numerical");
        assert_eq!(hits.len(), 1);
        assert!(hits[0].score > 0.0);
    }

    #[test]
    fn identical_documents_score_identically() {
        let mut c = desk6();
        let mut twin = c.records["B6"].clone();
        twin.bibcode = "B7".into();
        c.records.insert("B7".into(), twin);
        let index = build_index(&c);
        let cfg = ExecConfig::default();
        let a = score_bm25(&index, Field::Body, "structure", "B6", &cfg);
        let b = score_bm25(&index, Field::Body, "structure", "B7", &cfg);
        assert!(a > 0.0);
        assert_eq!(a, b);
    }

    #[test]
    fn references_and_citations() {
        let f = Fixture::new();
        let g = &f.graphs;
        let s = docs(&[("B2", 1.0), ("B3", 1.0)]);
        assert_eq!(
            summary(&eval_references(&s, g)),
            pairs(&[("B1", 2.0), ("B2", 1.0)])
        );
        assert_eq!(
            summary(&eval_citations(&s, g)),
            pairs(&[("B5", 2.0), ("B3", 1.0), ("B4", 1.0)])
        );
        assert!(eval_references(&[], g).is_empty());
        assert!(eval_references(&docs(&[("B6", 1.0)]), g).is_empty());
        assert!(eval_citations(&docs(&[("B6", 1.0)]), g).is_empty());

        let inner = f.all("author:einstein");
        assert_eq!(
            summary(&eval_references(&inner, g)),
            pairs(&[("B1", 2.0), ("B2", 1.0)])
        );
    }

    #[test]
    fn nested_operators() {
        let f = Fixture::new();
        let got = f.all("citations(references(author:einstein))");
        assert_eq!(
            summary(&got),
            pairs(&[("B3", 2.0), ("B2", 1.0), ("B4", 1.0), ("B5", 1.0)])
        );
        assert!(got.iter().all(|d| d.kind == ScoreKind::OperatorCount));
        // three levels deep
        f.exec()
            .execute(
                &parse("references(citations(references(body:lensing)))").unwrap(),
                10,
                0,
            )
            .unwrap();
    }

    #[test]
    fn useful_and_instructive() {
        let f = Fixture::new();
        let g = &f.graphs;
        let lensing = f.all("title:lensing");
        assert_eq!(
            lensing
                .iter()
                .map(|d| d.bibcode.as_str())
                .collect::<Vec<_>>()
                .len(),
            2
        );
        let useful = eval_useful(&lensing, g);
        assert_eq!(
            useful
                .iter()
                .map(|d| d.bibcode.as_str())
                .collect::<Vec<_>>(),
            ["B1", "B2"]
        );
        assert_eq!(useful[0].score, useful[1].score);
        assert!(useful.iter().all(|d| d.kind == ScoreKind::OperatorWeighted));

        let dark = f.all("title:\"dark energy\"");
        assert_eq!(dark.len(), 1);
        let instructive = eval_instructive(&dark, g);
        assert_eq!(
            instructive
                .iter()
                .map(|d| d.bibcode.as_str())
                .collect::<Vec<_>>(),
            ["B3", "B4", "B5"]
        );
        assert!(eval_useful(&[], g).is_empty());
        assert!(eval_instructive(&[], g).is_empty());
    }

    #[test]
    fn uniform_weights_match_unweighted_order() {
        let f = Fixture::new();
        let g = &f.graphs;
        let s = docs(&[("B2", 0.7), ("B3", 0.7), ("B5", 0.7)]);
        let order = |d: Vec<ScoredDoc>| d.into_iter().map(|d| d.bibcode).collect::<Vec<_>>();
        assert_eq!(order(eval_useful(&s, g)), order(eval_references(&s, g)));
        assert_eq!(order(eval_instructive(&s, g)), order(eval_citations(&s, g)));
    }

    #[test]
    fn trending() {
        let f = Fixture::new();
        let got = eval_trending(&f.all("title:lensing"), &f.graphs);
        assert_eq!(
            summary(&got),
            pairs(&[("B2", 2.0), ("B3", 2.0), ("B1", 1.0), ("B5", 1.0)])
        );
        assert!(eval_trending(&docs(&[("B6", 1.0)]), &f.graphs).is_empty());
        let mut c = desk6();
        c.readership.clear();
        assert!(eval_trending(&docs(&[("B1", 1.0)]), &Graphs::build(&c)).is_empty());
    }

    #[test]
    fn boolean_semantics() {
        let f = Fixture::new();
        assert_eq!(f.sorted_bibs("NOT body:lensing"), ["B6"]);
        assert_eq!(f.sorted_bibs("weak dark"), ["B2", "B3"]);
        assert_eq!(f.sorted_bibs("author:curie OR author:fermi"), ["B4", "B6"]);
        let and = f.all("weak dark");
        for d in &and {
            let w = score_bm25(&f.index, Field::All, "weak", &d.bibcode, &f.config);
            let k = score_bm25(&f.index, Field::All, "dark", &d.bibcode, &f.config);
            assert!((d.score - (w + k)).abs() < 1e-12);
        }
    }

    #[test]
    fn paging() {
        let f = Fixture::new();
        let q = parse("body:lensing").unwrap();
        let full = f.exec().search_all(&q).unwrap();
        for start in 0..7 {
            let page = f.exec().execute(&q, 2, start).unwrap();
            assert_eq!(page.num_found, 5);
            let want: Vec<_> = full.iter().skip(start).take(2).cloned().collect();
            assert_eq!(page.docs, want);
        }
        assert!(matches!(
            f.exec().execute(&q, 2001, 0),
            Err(ExecError::RowsOutOfRange { .. })
        ));
    }

    #[test]
    fn inner_truncation() {
        let mut f = Fixture::new();
        f.config.inner_top_k = Some(1);
        // top hit of author:einstein decides the single seed
        let top = f.bibs("author:einstein")[0].clone();
        let expect = eval_references(&docs(&[(&top, 1.0)]), &f.graphs);
        let got = f.all("references(author:einstein)");
        assert_eq!(summary(&got), summary(&expect));
    }

    #[test]
    fn invalid_regex_surfaces() {
        let f = Fixture::new();
        let err = f
            .exec()
            .search_all(&parse("body:/(/").unwrap())
            .unwrap_err();
        assert!(matches!(
            err,
            ExecError::Index(IndexError::InvalidPattern(_))
        ));
    }

    #[test]
    fn config_validation() {
        assert!(ExecConfig::default().validate().is_ok());
        for bad in [
            ExecConfig {
                inner_top_k: Some(0),
                ..Default::default()
            },
            ExecConfig {
                bm25_k1: 0.0,
                ..Default::default()
            },
            ExecConfig {
                bm25_b: 1.5,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
