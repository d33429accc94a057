//! Citation graph (references and cited-by) and the reader/paper usage graph.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{Corpus, ReadershipEvent};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CitationNode {
    pub refs: BTreeSet<String>,
    pub cited_by: BTreeSet<String>,
    /// Cited but not present in the corpus.
    pub ghost: bool,
    /// Publication year, known only for corpus records.
    pub year: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CitationGraph {
    nodes: BTreeMap<String, CitationNode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Papers the seeds reference.
    Refs,
    /// Papers that cite the seeds.
    Cites,
}

static EMPTY: BTreeSet<String> = BTreeSet::new();

pub fn build_citation_graph(corpus: &Corpus) -> CitationGraph {
    let mut nodes: BTreeMap<String, CitationNode> = BTreeMap::new();
    for record in corpus.records.values() {
        let node = nodes.entry(record.bibcode.clone()).or_default();
        node.refs.extend(record.references.iter().cloned());
        node.year = Some(record.year);
    }
    for record in corpus.records.values() {
        for target in &record.references {
            let node = nodes.entry(target.clone()).or_insert_with(|| CitationNode {
                ghost: true,
                ..Default::default()
            });
            node.cited_by.insert(record.bibcode.clone());
        }
    }
    CitationGraph { nodes }
}

impl CitationGraph {
    pub fn node(&self, bibcode: &str) -> Option<&CitationNode> {
        self.nodes.get(bibcode)
    }

    pub fn contains(&self, bibcode: &str) -> bool {
        self.nodes.contains_key(bibcode)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&str, &CitationNode)> {
        self.nodes.iter().map(|(b, n)| (b.as_str(), n))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn refs_of(&self, bibcode: &str) -> &BTreeSet<String> {
        self.nodes.get(bibcode).map_or(&EMPTY, |n| &n.refs)
    }

    pub fn cited_by(&self, bibcode: &str) -> &BTreeSet<String> {
        self.nodes.get(bibcode).map_or(&EMPTY, |n| &n.cited_by)
    }

    pub fn is_ghost(&self, bibcode: &str) -> bool {
        self.nodes.get(bibcode).is_some_and(|n| n.ghost)
    }

    /// Candidate → number of seeds linked to it in `direction`.
    pub fn neighborhood<'g, 's>(
        &'g self,
        seeds: impl IntoIterator<Item = &'s str>,
        direction: Direction,
    ) -> BTreeMap<&'g str, usize> {
        let mut counts = BTreeMap::new();
        let seeds: BTreeSet<&str> = seeds.into_iter().collect();
        for seed in seeds {
            let linked = match direction {
                Direction::Refs => self.refs_of(seed),
                Direction::Cites => self.cited_by(seed),
            };
            for c in linked {
                *counts.entry(c.as_str()).or_insert(0) += 1;
            }
        }
        counts
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReadershipGraph {
    readers_of: BTreeMap<String, BTreeSet<String>>,
    reads_of: BTreeMap<String, BTreeSet<String>>,
}

pub fn build_readership_graph(events: &[ReadershipEvent]) -> ReadershipGraph {
    let mut g = ReadershipGraph::default();
    for ev in events {
        g.readers_of
            .entry(ev.bibcode.clone())
            .or_default()
            .insert(ev.reader_id.clone());
        g.reads_of
            .entry(ev.reader_id.clone())
            .or_default()
            .insert(ev.bibcode.clone());
    }
    g
}

impl ReadershipGraph {
    pub fn readers_of(&self, bibcode: &str) -> &BTreeSet<String> {
        self.readers_of.get(bibcode).unwrap_or(&EMPTY)
    }

    pub fn reads_of(&self, reader: &str) -> &BTreeSet<String> {
        self.reads_of.get(reader).unwrap_or(&EMPTY)
    }

    pub fn papers(&self) -> impl Iterator<Item = &str> {
        self.readers_of.keys().map(String::as_str)
    }

    pub fn readers(&self) -> impl Iterator<Item = &str> {
        self.reads_of.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.readers_of.is_empty()
    }

    /// For every paper sharing a reader with the seeds, how many of the
    /// seeds' readers also read it.
    pub fn coread_counts<'g, 's>(
        &'g self,
        seeds: impl IntoIterator<Item = &'s str>,
    ) -> BTreeMap<&'g str, usize> {
        let interested: BTreeSet<&str> = seeds
            .into_iter()
            .flat_map(|s| self.readers_of(s).iter().map(String::as_str))
            .collect();
        let mut counts = BTreeMap::new();
        for reader in interested {
            for paper in self.reads_of(reader) {
                *counts.entry(paper.as_str()).or_insert(0) += 1;
            }
        }
        counts
    }
}

/// Both graphs, built together from one corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graphs {
    pub citations: CitationGraph,
    pub readership: ReadershipGraph,
}

impl Graphs {
    pub fn build(corpus: &Corpus) -> Self {
        Graphs {
            citations: build_citation_graph(corpus),
            readership: build_readership_graph(&corpus.readership),
        }
    }
}
