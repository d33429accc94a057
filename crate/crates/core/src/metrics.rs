//! Citation and usage indicators for a set of papers.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::graphs::Graphs;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperCounts {
    pub citation_count: usize,
    pub read_count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub paper_count: usize,
    pub total_citations: usize,
    pub mean_citations: f64,
    pub median_citations: f64,
    pub h_index: usize,
    pub g_index: usize,
    pub i10_count: usize,
    pub total_reads: usize,
    pub per_paper: BTreeMap<String, PaperCounts>,
    /// Year of the citing paper → citations received that year.
    pub citation_histogram: BTreeMap<u32, usize>,
    /// Requested bibcodes with no node in the citation graph.
    pub skipped: Vec<String>,
}

/// Largest h such that h of the counts are at least h.
pub fn h_index(counts: &[usize]) -> usize {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .enumerate()
        .take_while(|&(i, &c)| c > i)
        .count()
}

/// Largest g (at most the number of papers) such that the g most cited
/// papers hold at least g² citations together.
pub fn g_index(counts: &[usize]) -> usize {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut sum = 0usize;
    let mut g = 0;
    for (i, c) in sorted.iter().enumerate() {
        sum += c;
        let k = i + 1;
        if sum >= k * k {
            g = k;
        }
    }
    g
}

fn median(sorted: &[usize]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2] as f64,
        n => (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0,
    }
}

/// Duplicates in `bibcodes` are counted once.
pub fn compute_metrics<S: AsRef<str>>(graphs: &Graphs, bibcodes: &[S]) -> MetricsReport {
    let requested: BTreeSet<&str> = bibcodes.iter().map(AsRef::as_ref).collect();
    let mut report = MetricsReport::default();
    for b in requested {
        if !graphs.citations.contains(b) {
            report.skipped.push(b.to_string());
            continue;
        }
        report.per_paper.insert(
            b.to_string(),
            PaperCounts {
                citation_count: graphs.citations.cited_by(b).len(),
                read_count: if graphs.citations.is_ghost(b) {
                    0
                } else {
                    graphs.readership.readers_of(b).len()
                },
            },
        );
    }
    let mut counts: Vec<usize> = report
        .per_paper
        .values()
        .map(|p| p.citation_count)
        .collect();
    counts.sort_unstable();
    report.paper_count = counts.len();
    report.total_citations = counts.iter().sum();
    report.total_reads = report.per_paper.values().map(|p| p.read_count).sum();
    if report.paper_count > 0 {
        report.mean_citations = report.total_citations as f64 / report.paper_count as f64;
    }
    report.median_citations = median(&counts);
    report.h_index = h_index(&counts);
    report.g_index = g_index(&counts);
    report.i10_count = counts.iter().filter(|&&c| c >= 10).count();
    report.citation_histogram = citation_histogram(graphs, report.per_paper.keys());
    report
}

/// Citations received by `bibcodes`, bucketed by the citing paper's year.
/// Citing papers without a record (and so without a year) are left out.
pub fn citation_histogram<S: AsRef<str>>(
    graphs: &Graphs,
    bibcodes: impl IntoIterator<Item = S>,
) -> BTreeMap<u32, usize> {
    let targets: BTreeSet<String> = bibcodes
        .into_iter()
        .map(|b| b.as_ref().to_string())
        .collect();
    let mut hist = BTreeMap::new();
    for target in &targets {
        for citer in graphs.citations.cited_by(target) {
            if let Some(year) = graphs.citations.node(citer).and_then(|n| n.year) {
                *hist.entry(year).or_insert(0) += 1;
            }
        }
    }
    hist
}
