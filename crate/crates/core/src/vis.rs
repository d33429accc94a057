//! Data payloads for the paper-network and word-cloud views.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::graphs::Graphs;
use crate::index::{DocId, Field, Index};

pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");
pub const WORD_CLOUD_SIZE: usize = 50;

pub fn default_stopwords() -> BTreeSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkNode {
    pub bibcode: String,
    pub group: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkLink {
    pub source: String,
    pub target: String,
    pub weight: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkPayload {
    pub nodes: Vec<NetworkNode>,
    pub links: Vec<NetworkLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedTerm {
    pub term: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WordCloudPayload {
    pub terms: Vec<WeightedTerm>,
}

/// Bibliographic-coupling network: two papers are linked by the number of
/// references they share, and groups are the connected components numbered
/// in order of each component's smallest bibcode.
pub fn paper_network<S: AsRef<str>>(graphs: &Graphs, bibcodes: &[S]) -> NetworkPayload {
    let papers: Vec<&str> = bibcodes
        .iter()
        .map(AsRef::as_ref)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    // reference -> papers in the set citing it
    let mut citing: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, &p) in papers.iter().enumerate() {
        for r in graphs.citations.refs_of(p) {
            citing.entry(r.as_str()).or_default().push(i);
        }
    }
    let mut weights: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for members in citing.values() {
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                *weights.entry((a, b)).or_insert(0) += 1;
            }
        }
    }

    let mut parent: Vec<usize> = (0..papers.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in weights.keys() {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        // keep the smaller index as root so a root is its component's smallest bibcode
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            parent[hi] = lo;
        }
    }
    let mut group_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let nodes = (0..papers.len())
        .map(|i| {
            let root = find(&mut parent, i);
            let next = group_of_root.len();
            let group = *group_of_root.entry(root).or_insert(next);
            NetworkNode {
                bibcode: papers[i].to_string(),
                group,
            }
        })
        .collect();
    let links = weights
        .into_iter()
        .map(|((a, b), weight)| NetworkLink {
            source: papers[a].to_string(),
            target: papers[b].to_string(),
            weight,
        })
        .collect();
    NetworkPayload { nodes, links }
}

/// Top terms of the `all` field over `docs`, weighted by
/// `Σ tf · ln(1 + N / df)`. Stopwords and one-character terms are dropped.
pub fn word_cloud(index: &Index, docs: &[DocId], stopwords: &BTreeSet<String>) -> WordCloudPayload {
    let wanted: HashSet<DocId> = docs.iter().copied().collect();
    if wanted.is_empty() {
        return WordCloudPayload::default();
    }
    let n = index.doc_count() as f64;
    let mut terms: Vec<WeightedTerm> = Vec::new();
    for (term, postings) in index.field(Field::All).iter() {
        if term.chars().count() < 2 || stopwords.contains(term) {
            continue;
        }
        let tf: u32 = postings
            .iter()
            .filter(|p| wanted.contains(&p.doc))
            .map(|p| p.term_frequency())
            .sum();
        if tf == 0 {
            continue;
        }
        let idf = (1.0 + n / postings.len() as f64).ln();
        terms.push(WeightedTerm {
            term: term.to_string(),
            weight: tf as f64 * idf,
        });
    }
    terms.sort_by(|a, b| {
        b.weight
            .partial_cmp(&a.weight)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.term.cmp(&b.term))
    });
    terms.truncate(WORD_CLOUD_SIZE);
    WordCloudPayload { terms }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::desk6;
    use crate::index::build_index;

    fn link(a: &str, b: &str, w: usize) -> NetworkLink {
        NetworkLink {
            source: a.into(),
            target: b.into(),
            weight: w,
        }
    }

    #[test]
    fn coupling_network() {
        let g = Graphs::build(&desk6());
        let net = paper_network(&g, &["B5", "B3", "B2"]);
        assert_eq!(net.links, [link("B2", "B3", 1), link("B3", "B5", 1)]);
        assert_eq!(net.nodes.len(), 3);
        assert!(net.nodes.iter().all(|n| n.group == 0));

        let single = paper_network(&g, &["B1"]);
        assert_eq!(single.nodes.len(), 1);
        assert!(single.links.is_empty());

        let apart = paper_network(&g, &["B6", "B1"]);
        assert_eq!(apart.nodes.len(), 2);
        assert!(apart.links.is_empty());
        assert_eq!(
            apart.nodes.iter().map(|n| n.group).collect::<Vec<_>>(),
            [0, 1]
        );
    }

    #[test]
    fn groups_follow_smallest_member() {
        let g = Graphs::build(&desk6());
        // B4 and B5 share B2; B1 and B6 are isolated
        let net = paper_network(&g, &["B6", "B5", "B4", "B1"]);
        let groups: Vec<(&str, usize)> = net
            .nodes
            .iter()
            .map(|n| (n.bibcode.as_str(), n.group))
            .collect();
        assert_eq!(groups, [("B1", 0), ("B4", 1), ("B5", 1), ("B6", 2)]);
    }

    #[test]
    fn cloud_top_term() {
        let c = desk6();
        let index = build_index(&c);
        let docs: Vec<DocId> = ["B1", "B2", "B3", "B4"]
            .iter()
            .map(|b| index.doc_id(b).unwrap())
            .collect();
        let cloud = word_cloud(&index, &docs, &default_stopwords());
        assert_eq!(cloud.terms[0].term, "lensing");
        // 6 occurrences, df 5 of 6
        assert!((cloud.terms[0].weight - 6.0 * (1.0f64 + 6.0 / 5.0).ln()).abs() < 1e-12);
        assert!(cloud.terms.windows(2).all(|w| w[0].weight >= w[1].weight));
        assert!(cloud.terms.iter().all(|t| t.term != "of" && t.term != "a"));
    }

    #[test]
    fn cloud_edge_cases() {
        let index = build_index(&desk6());
        assert!(word_cloud(&index, &[], &default_stopwords())
            .terms
            .is_empty());
        let everything: BTreeSet<String> = index
            .field(Field::All)
            .vocabulary()
            .map(str::to_string)
            .collect();
        assert!(word_cloud(&index, &[0, 1], &everything).terms.is_empty());
    }

    #[test]
    fn default_list_has_fifty_words() {
        assert_eq!(default_stopwords().len(), 50);
    }
}
