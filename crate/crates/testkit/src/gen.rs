//! Seeded generators for corpora and query trees.

use std::collections::BTreeMap;

use adsk_core::corpus::{Corpus, ReadershipEvent, Record, SynonymSet};
use adsk_core::qlang::{FuncOp, QueryNode, TermQuery};
use adsk_core::Field;
use rand::seq::SliceRandom;
use rand::Rng;

pub const VOCAB: &[&str] = &[
    "weak",
    "lensing",
    "galaxy",
    "galaxies",
    "dark",
    "energy",
    "survey",
    "cluster",
    "cosmic",
    "star",
    "stars",
    "model",
    "gravitational",
    "map",
    "of",
    "the",
];
pub const SURNAMES: &[&str] = &[
    "einstein",
    "eisenstein",
    "eisenman",
    "curie",
    "dirac",
    "fermi",
    "bohr",
    "o'neil",
    "smith-jones",
];
pub const REGEXES: &[&str] = &[
    "ga.*",
    "[a-d].*",
    "l.+g",
    "star(s)?",
    "e.*",
    "(weak|dark)",
    ".",
    "x+",
    "ei.*",
    "20.*",
    "b1.*",
];
const TEXT_FIELDS: &[Field] = &[Field::Title, Field::Abstract, Field::Body, Field::All];

pub fn synonym_table() -> Vec<SynonymSet> {
    [["galaxy", "galaxies"], ["star", "stars"]]
        .iter()
        .map(|g| SynonymSet {
            terms: g.iter().map(|s| s.to_string()).collect(),
        })
        .collect()
}

fn words<R: Rng>(rng: &mut R, max: usize) -> String {
    let n = rng.gen_range(0..=max);
    (0..n)
        .map(|_| *VOCAB.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(if rng.gen_bool(0.2) { "-" } else { " " })
}

fn author<R: Rng>(rng: &mut R) -> String {
    let last = SURNAMES.choose(rng).unwrap();
    let mut name = last[..1].to_uppercase() + &last[1..];
    if rng.gen_bool(0.8) {
        let initial = (b'A' + rng.gen_range(0..4u8)) as char;
        name.push_str(&format!(", {initial}."));
    }
    name
}

/// Text-heavy corpus of `n` records with a small shared vocabulary.
pub fn text_corpus<R: Rng>(rng: &mut R, n: usize) -> Corpus {
    let mut records = BTreeMap::new();
    for i in 0..n {
        let bibcode = format!("B{i:03}");
        let n_authors = rng.gen_range(0..=3);
        records.insert(
            bibcode.clone(),
            Record {
                bibcode,
                authors: (0..n_authors).map(|_| author(rng)).collect(),
                year: rng.gen_range(2000..2006),
                title: words(rng, 5),
                abstract_text: words(rng, 8),
                body: words(rng, 25),
                references: Vec::new(),
            },
        );
    }
    Corpus::new(records, Vec::new(), synonym_table())
}

/// Citation DAG over `n` records (edges only point to older records), with
/// occasional references to papers outside the corpus and random readership.
pub fn graph_corpus<R: Rng>(rng: &mut R, n: usize) -> Corpus {
    let mut records = BTreeMap::new();
    let ids: Vec<String> = (0..n).map(|i| format!("P{i:03}")).collect();
    for (i, id) in ids.iter().enumerate() {
        let mut refs: Vec<String> = ids[..i]
            .iter()
            .filter(|_| rng.gen_bool(0.08))
            .cloned()
            .collect();
        if rng.gen_bool(0.1) {
            refs.push(format!("GHOST{}", rng.gen_range(0..5)));
        }
        refs.shuffle(rng);
        records.insert(
            id.clone(),
            Record {
                bibcode: id.clone(),
                authors: vec![author(rng)],
                year: rng.gen_range(1990..2020),
                title: words(rng, 4),
                abstract_text: String::new(),
                body: words(rng, 10),
                references: refs,
            },
        );
    }
    let n_readers = rng.gen_range(0..20);
    let mut readership = Vec::new();
    for r in 0..n_readers {
        for _ in 0..rng.gen_range(1..6) {
            let bibcode = if n > 0 && rng.gen_bool(0.95) {
                ids.choose(rng).unwrap().clone()
            } else {
                "UNKNOWN".to_string()
            };
            readership.push(ReadershipEvent {
                reader_id: format!("r{r}"),
                bibcode,
            });
        }
    }
    Corpus::new(records, readership, Vec::new())
}

fn vocab_word<R: Rng>(rng: &mut R) -> String {
    VOCAB.choose(rng).unwrap().to_string()
}

fn field_term<R: Rng>(rng: &mut R, field: Field, corpus: &Corpus) -> String {
    match field {
        Field::Author => {
            let last = SURNAMES.choose(rng).unwrap().to_string();
            if rng.gen_bool(0.4) {
                format!("{last}, {}", (b'a' + rng.gen_range(0..4u8)) as char)
            } else {
                last
            }
        }
        Field::Year => rng.gen_range(1999..2007).to_string(),
        Field::Bibcode => corpus
            .records
            .keys()
            .collect::<Vec<_>>()
            .choose(rng)
            .map_or_else(|| "b000".to_string(), |b| b.to_lowercase()),
        _ => vocab_word(rng),
    }
}

fn random_field<R: Rng>(rng: &mut R) -> Field {
    *Field::ALL.choose(rng).unwrap()
}

/// Random executable tree without functional operators, at most `depth`
/// levels deep, drawing terms from the generator vocabulary.
pub fn text_query<R: Rng>(rng: &mut R, depth: usize, corpus: &Corpus) -> QueryNode {
    let leaf = depth <= 1 || rng.gen_bool(0.35);
    if leaf {
        return text_leaf(rng, corpus);
    }
    match rng.gen_range(0..3) {
        0 => QueryNode::And(
            (0..rng.gen_range(2..=3))
                .map(|_| text_query(rng, depth - 1, corpus))
                .collect(),
        ),
        1 => QueryNode::Or(
            (0..rng.gen_range(2..=3))
                .map(|_| text_query(rng, depth - 1, corpus))
                .collect(),
        ),
        _ => QueryNode::Not(Box::new(text_query(rng, depth - 1, corpus))),
    }
}

fn text_leaf<R: Rng>(rng: &mut R, corpus: &Corpus) -> QueryNode {
    let field = random_field(rng);
    match rng.gen_range(0..10) {
        0..=4 => {
            let fuzz = if rng.gen_bool(0.25) {
                Some([0.0, 0.1, 0.2, 0.3, 0.5][rng.gen_range(0..5)])
            } else {
                None
            };
            QueryNode::Term(TermQuery {
                field,
                text: field_term(rng, field, corpus),
                synonyms: rng.gen_bool(0.7),
                fuzz,
            })
        }
        5 | 6 => {
            let field = *TEXT_FIELDS.choose(rng).unwrap();
            QueryNode::Phrase {
                field,
                terms: (0..rng.gen_range(1..=3)).map(|_| vocab_word(rng)).collect(),
            }
        }
        7 | 8 => {
            let field = if rng.gen_bool(0.2) {
                Field::Author
            } else {
                *TEXT_FIELDS.choose(rng).unwrap()
            };
            QueryNode::Proximity {
                field,
                left: field_term(rng, field, corpus),
                right: field_term(rng, field, corpus),
                distance: rng.gen_range(1..=6),
            }
        }
        _ => QueryNode::Regex {
            field,
            pattern: REGEXES.choose(rng).unwrap().to_string(),
        },
    }
}

/// Random tree of any shape the parser can produce, for render/parse
/// round trips. Terms are not meant to match anything.
pub fn syntax_tree<R: Rng>(rng: &mut R, depth: usize) -> QueryNode {
    if depth <= 1 || rng.gen_bool(0.3) {
        return syntax_leaf(rng);
    }
    match rng.gen_range(0..4) {
        0 => QueryNode::And(
            (0..rng.gen_range(2..=4))
                .map(|_| syntax_tree(rng, depth - 1))
                .collect(),
        ),
        1 => QueryNode::Or(
            (0..rng.gen_range(2..=4))
                .map(|_| syntax_tree(rng, depth - 1))
                .collect(),
        ),
        2 => QueryNode::Not(Box::new(syntax_tree(rng, depth - 1))),
        _ => QueryNode::func(
            *FuncOp::ALL.choose(rng).unwrap(),
            syntax_tree(rng, depth - 1),
        ),
    }
}

fn syntax_word<R: Rng>(rng: &mut R, field: Field) -> String {
    const ALNUM: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
    fn w<R: Rng>(rng: &mut R) -> String {
        (0..rng.gen_range(1..8))
            .map(|_| ALNUM[rng.gen_range(0..ALNUM.len())] as char)
            .collect()
    }
    match field {
        Field::Author => {
            let last = w(rng);
            match rng.gen_range(0..4) {
                0 => last,
                1 => format!("{last}-{}", w(rng)),
                2 => format!("o'{last}, {}", w(rng)),
                _ => format!("{last}, {}", w(rng)),
            }
        }
        Field::Bibcode => format!("{}a&a..{}", w(rng), w(rng)),
        Field::Year => rng.gen_range(0..10000).to_string(),
        _ => {
            let mut s = w(rng);
            // keep the word from reading as an operator name
            if s.parse::<FuncOp>().is_ok() {
                s.push('x');
            }
            s
        }
    }
}

fn syntax_leaf<R: Rng>(rng: &mut R) -> QueryNode {
    let field = random_field(rng);
    match rng.gen_range(0..4) {
        0 => QueryNode::Term(TermQuery {
            field,
            text: syntax_word(rng, field),
            synonyms: rng.gen_bool(0.5),
            fuzz: match rng.gen_range(0..3) {
                0 => Some(rng.gen_range(0..1000) as f64 / 1000.0),
                1 => Some(rng.gen::<f64>() * 0.999),
                _ => None,
            },
        }),
        1 => {
            let terms = match field {
                Field::Author | Field::Year | Field::Bibcode => vec![syntax_word(rng, field)],
                _ => (0..rng.gen_range(1..4))
                    .map(|_| syntax_word(rng, field))
                    .collect(),
            };
            QueryNode::Phrase { field, terms }
        }
        2 => QueryNode::Proximity {
            field,
            left: syntax_word(rng, field),
            right: syntax_word(rng, field),
            distance: rng.gen_range(1..100),
        },
        _ => QueryNode::Regex {
            field,
            pattern: ["a/b", "[a-z]+", "x.*y", "(ab|cd)", r"\d+", "é.*", "a b"]
                .choose(rng)
                .unwrap()
                .to_string(),
        },
    }
}

/// Synthetic word `w{rank}`; ranks are drawn with a Zipf-like skew.
fn bulk_word<R: Rng>(rng: &mut R, vocab: usize) -> String {
    let u: f64 = rng.gen();
    let rank = ((vocab as f64).powf(u) - 1.0) as usize;
    format!("w{rank}")
}

/// Large corpus for timing: `n` records whose title, abstract and body
/// together hold about `tokens` words from a skewed `vocab`-word vocabulary.
pub fn bulk_corpus<R: Rng>(rng: &mut R, n: usize, tokens: usize, vocab: usize) -> Corpus {
    let mut records = BTreeMap::new();
    let text = |rng: &mut R, k: usize| -> String {
        (0..k)
            .map(|_| bulk_word(rng, vocab))
            .collect::<Vec<_>>()
            .join(" ")
    };
    for i in 0..n {
        let bibcode = format!("S{i:06}");
        let title = text(rng, 10);
        let abstract_text = text(rng, 40);
        let body = text(rng, tokens.saturating_sub(50));
        let references = (0..rng.gen_range(0..=10))
            .filter(|_| i > 0)
            .map(|_| format!("S{:06}", rng.gen_range(0..i)))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        records.insert(
            bibcode.clone(),
            Record {
                bibcode,
                authors: vec![author(rng)],
                year: rng.gen_range(1990..2020),
                title,
                abstract_text,
                body,
                references,
            },
        );
    }
    Corpus::new(records, Vec::new(), Vec::new())
}
