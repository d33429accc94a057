//! Second-order operators computed by double loops over the raw reference
//! lists and readership events. Output is sorted by score descending, then
//! bibcode ascending.

use std::collections::{BTreeMap, BTreeSet};

use adsk_core::corpus::Corpus;
use adsk_core::FuncOp;

pub type Ranked = Vec<(String, f64)>;

fn ranked(scores: BTreeMap<String, f64>) -> Ranked {
    let mut out: Ranked = scores.into_iter().collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Every (citing, cited) pair present in the corpus, ghosts included.
fn edges(corpus: &Corpus) -> Vec<(&str, &str)> {
    let mut out = Vec::new();
    for r in corpus.records.values() {
        for cited in &r.references {
            out.push((r.bibcode.as_str(), cited.as_str()));
        }
    }
    out
}

/// Seeds are (bibcode, relevance); relevance is ignored by the counted operators.
pub fn evaluate(op: FuncOp, corpus: &Corpus, seeds: &[(String, f64)]) -> Ranked {
    let mut scores: BTreeMap<String, f64> = BTreeMap::new();
    let edges = edges(corpus);
    match op {
        FuncOp::References | FuncOp::Useful => {
            for (seed, weight) in seeds {
                for &(citing, cited) in &edges {
                    if citing == seed {
                        let w = if op == FuncOp::Useful { *weight } else { 1.0 };
                        *scores.entry(cited.to_string()).or_insert(0.0) += w;
                    }
                }
            }
        }
        FuncOp::Citations | FuncOp::Instructive => {
            for (seed, weight) in seeds {
                for &(citing, cited) in &edges {
                    if cited == seed {
                        let w = if op == FuncOp::Instructive {
                            *weight
                        } else {
                            1.0
                        };
                        *scores.entry(citing.to_string()).or_insert(0.0) += w;
                    }
                }
            }
        }
        FuncOp::Trending => {
            let seed_set: BTreeSet<&str> = seeds.iter().map(|(s, _)| s.as_str()).collect();
            let readers: BTreeSet<&str> = corpus
                .readership
                .iter()
                .filter(|e| seed_set.contains(e.bibcode.as_str()))
                .map(|e| e.reader_id.as_str())
                .collect();
            // distinct (reader, paper) pairs among interested readers
            let pairs: BTreeSet<(&str, &str)> = corpus
                .readership
                .iter()
                .filter(|e| readers.contains(e.reader_id.as_str()))
                .map(|e| (e.reader_id.as_str(), e.bibcode.as_str()))
                .collect();
            for (_, paper) in pairs {
                *scores.entry(paper.to_string()).or_insert(0.0) += 1.0;
            }
        }
    }
    ranked(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use adsk_core::corpus::desk6;

    fn seeds(b: &[&str]) -> Vec<(String, f64)> {
        b.iter().map(|s| (s.to_string(), 1.0)).collect()
    }

    #[test]
    fn desk6_fixture() {
        let c = desk6();
        let got = evaluate(FuncOp::References, &c, &seeds(&["B3", "B5"]));
        assert_eq!(
            got,
            vec![
                ("B2".to_string(), 2.0),
                ("B1".to_string(), 1.0),
                ("B3".to_string(), 1.0)
            ]
        );
        let got = evaluate(FuncOp::Trending, &c, &seeds(&["B1"]));
        assert_eq!(got, vec![("B1".to_string(), 1.0), ("B2".to_string(), 1.0)]);
    }
}
