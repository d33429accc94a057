//! A loaded corpus with its index and graphs, plus the on-disk snapshot.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::SynonymTable;
use crate::corpus::Corpus;
use crate::exec::{ExecConfig, Executor};
use crate::graphs::Graphs;
use crate::index::{build_index, Index};

pub const SNAPSHOT_FORMAT: &str = "adsk-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot encoding: {0}")]
    Encoding(#[from] serde_json::Error),
    #[error("not a snapshot file (format tag `{0}`)")]
    WrongFormat(String),
    #[error("unsupported snapshot version {found}, expected {expected}")]
    WrongVersion { found: u32, expected: u32 },
}

#[derive(Debug, Clone)]
pub struct Catalog {
    pub corpus: Corpus,
    pub index: Index,
    pub graphs: Graphs,
    pub synonyms: SynonymTable,
}

#[derive(Serialize)]
struct SnapshotRef<'a> {
    format: &'a str,
    version: u32,
    corpus: &'a Corpus,
    index: &'a Index,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Deserialize)]
struct Snapshot {
    corpus: Corpus,
    index: Index,
}

impl Catalog {
    pub fn build(corpus: Corpus) -> Self {
        let index = build_index(&corpus);
        let graphs = Graphs::build(&corpus);
        let synonyms = SynonymTable::new(&corpus.synonyms);
        Catalog {
            corpus,
            index,
            graphs,
            synonyms,
        }
    }

    pub fn executor<'a>(&'a self, config: &'a ExecConfig) -> Executor<'a> {
        Executor::new(&self.index, &self.graphs, &self.synonyms, config)
    }

    pub fn to_json(&self) -> Result<String, SnapshotError> {
        Ok(serde_json::to_string(&SnapshotRef {
            format: SNAPSHOT_FORMAT,
            version: SNAPSHOT_VERSION,
            corpus: &self.corpus,
            index: &self.index,
        })?)
    }

    /// Graphs are rebuilt from the stored corpus; the index is restored as saved.
    pub fn from_json(text: &str) -> Result<Self, SnapshotError> {
        let header: Header = serde_json::from_str(text)?;
        if header.format != SNAPSHOT_FORMAT {
            return Err(SnapshotError::WrongFormat(header.format));
        }
        if header.version != SNAPSHOT_VERSION {
            return Err(SnapshotError::WrongVersion {
                found: header.version,
                expected: SNAPSHOT_VERSION,
            });
        }
        let snap: Snapshot = serde_json::from_str(text)?;
        let graphs = Graphs::build(&snap.corpus);
        let synonyms = SynonymTable::new(&snap.corpus.synonyms);
        Ok(Catalog {
            index: snap.index.restore(),
            graphs,
            synonyms,
            corpus: snap.corpus,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SnapshotError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SnapshotError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
