//! The query dialect: fielded terms, phrases, `NEARn` proximity groups,
//! `~f` fuzzy terms, `/regex/` terms, the `=` synonym switch, boolean
//! operators and the functional operators that expand a result set through
//! the citation and readership graphs.

mod lexer;
mod parser;
mod render;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::index::Field;

pub use lexer::{lex, Lexeme, TokenKind};
pub use parser::parse;
pub use render::render;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FuncOp {
    /// Papers cited by the operand set.
    References,
    /// Papers citing the operand set.
    Citations,
    /// References weighted by the operand's relevance.
    Useful,
    /// Citations weighted by the operand's relevance.
    Instructive,
    /// Papers co-read with the operand set.
    Trending,
}

impl FuncOp {
    pub const ALL: [FuncOp; 5] = [
        FuncOp::References,
        FuncOp::Citations,
        FuncOp::Useful,
        FuncOp::Instructive,
        FuncOp::Trending,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FuncOp::References => "references",
            FuncOp::Citations => "citations",
            FuncOp::Useful => "useful",
            FuncOp::Instructive => "instructive",
            FuncOp::Trending => "trending",
        }
    }
}

impl fmt::Display for FuncOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FuncOp {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        FuncOp::ALL.into_iter().find(|op| op.name() == s).ok_or(())
    }
}

/// A single searchable term.
#[derive(Debug, Clone, PartialEq)]
pub struct TermQuery {
    pub field: Field,
    pub text: String,
    /// Cleared by the `=` modifier.
    pub synonyms: bool,
    /// Maximum normalized edit distance, in `[0, 1)`.
    pub fuzz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryNode {
    /// At least two children.
    And(Vec<QueryNode>),
    /// At least two children.
    Or(Vec<QueryNode>),
    Not(Box<QueryNode>),
    Term(TermQuery),
    Phrase {
        field: Field,
        terms: Vec<String>,
    },
    Proximity {
        field: Field,
        left: String,
        right: String,
        distance: u32,
    },
    Regex {
        field: Field,
        pattern: String,
    },
    Func {
        op: FuncOp,
        inner: Box<QueryNode>,
    },
}

impl QueryNode {
    pub fn term(field: Field, text: impl Into<String>) -> Self {
        QueryNode::Term(TermQuery {
            field,
            text: text.into(),
            synonyms: true,
            fuzz: None,
        })
    }

    pub fn func(op: FuncOp, inner: QueryNode) -> Self {
        QueryNode::Func {
            op,
            inner: Box::new(inner),
        }
    }

    /// Whether any functional operator appears in the tree.
    pub fn has_func(&self) -> bool {
        match self {
            QueryNode::Func { .. } => true,
            QueryNode::And(c) | QueryNode::Or(c) => c.iter().any(QueryNode::has_func),
            QueryNode::Not(c) => c.has_func(),
            _ => false,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            QueryNode::And(c) | QueryNode::Or(c) => {
                1 + c.iter().map(QueryNode::depth).max().unwrap_or(0)
            }
            QueryNode::Not(c) => 1 + c.depth(),
            QueryNode::Func { inner, .. } => 1 + inner.depth(),
            _ => 1,
        }
    }

    pub(crate) fn disable_synonyms(&mut self) {
        match self {
            QueryNode::Term(t) => t.synonyms = false,
            QueryNode::And(c) | QueryNode::Or(c) => {
                c.iter_mut().for_each(QueryNode::disable_synonyms)
            }
            QueryNode::Not(c) => c.disable_synonyms(),
            QueryNode::Func { inner, .. } => inner.disable_synonyms(),
            QueryNode::Phrase { .. } | QueryNode::Proximity { .. } | QueryNode::Regex { .. } => {}
        }
    }
}

impl fmt::Display for QueryNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

/// Positions are character offsets into the query string.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("empty query")]
    EmptyQuery,
    #[error("syntax error at {position}: expected {expected}")]
    SyntaxError { position: usize, expected: String },
    #[error("unterminated phrase starting at {position}")]
    UnterminatedPhrase { position: usize },
    #[error("unterminated regular expression starting at {position}")]
    UnterminatedRegex { position: usize },
    #[error("bad fuzziness value at {position}: must be a number in [0, 1)")]
    BadFuzzValue { position: usize },
}

impl QueryError {
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::EmptyQuery => "empty_query",
            QueryError::SyntaxError { .. } => "syntax_error",
            QueryError::UnterminatedPhrase { .. } => "unterminated_phrase",
            QueryError::UnterminatedRegex { .. } => "unterminated_regex",
            QueryError::BadFuzzValue { .. } => "bad_fuzz_value",
        }
    }

    pub fn position(&self) -> Option<usize> {
        match self {
            QueryError::EmptyQuery => None,
            QueryError::SyntaxError { position, .. }
            | QueryError::UnterminatedPhrase { position }
            | QueryError::UnterminatedRegex { position }
            | QueryError::BadFuzzValue { position } => Some(*position),
        }
    }

    pub(crate) fn syntax(position: usize, expected: impl Into<String>) -> Self {
        QueryError::SyntaxError {
            position,
            expected: expected.into(),
        }
    }
}
