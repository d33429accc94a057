//! Desk-scale bibliographic search.
//!
//! Records, fulltext, citations and readership live in one [`Catalog`]:
//!
//! - [`corpus`]: record model and line-delimited loaders
//! - [`analysis`]: tokenizer, author normalization, synonym expansion
//! - [`index`]: positional inverted index with phrase, proximity, fuzzy and regex access
//! - [`qlang`]: the query dialect (parser and canonical renderer)
//! - [`graphs`]: citation and readership graphs
//! - [`exec`]: query evaluation, BM25 ranking, second-order operators
//! - [`metrics`]: citation and usage indicators
//! - [`vis`]: paper-network and word-cloud payloads

pub mod analysis;
pub mod catalog;
pub mod corpus;
pub mod exec;
pub mod graphs;
pub mod index;
pub mod metrics;
pub mod qlang;
pub mod vis;

pub use catalog::{Catalog, SnapshotError};
pub use corpus::{Corpus, CorpusError, ReadershipEvent, Record, SynonymSet};
pub use exec::{ExecConfig, ExecError, Executor, ResultPage, ScoreKind, ScoredDoc};
pub use graphs::{CitationGraph, Graphs, ReadershipGraph};
pub use index::{DocId, Field, Index, IndexError};
pub use metrics::MetricsReport;
pub use qlang::{parse, render, FuncOp, QueryError, QueryNode};
