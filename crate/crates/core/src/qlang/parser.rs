use super::lexer::{lex, Lexeme, TokenKind};
use super::{QueryError, QueryNode, TermQuery};
use crate::index::Field;

const MAX_DEPTH: usize = 200;

/// Parses the query dialect.
///
/// ```text
/// query  := or
/// or     := and ("OR" and)*
/// and    := clause (("AND")? clause)*
/// clause := "NOT" clause | "=" clause | func "(" query ")" | FIELD fbody | atom
/// fbody  := "=" fbody | atom
/// atom   := WORD fuzz? | PHRASE | REGEX | "(" (WORD NEARn WORD | query) ")"
/// ```
pub fn parse(input: &str) -> Result<QueryNode, QueryError> {
    let tokens = lex(input)?;
    if tokens.is_empty() {
        return Err(QueryError::EmptyQuery);
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        end: input.chars().count(),
        depth: 0,
    };
    let node = p.parse_or(Field::All)?;
    if let Some(tok) = p.peek() {
        return Err(match tok.kind {
            TokenKind::Near(_) => QueryError::syntax(
                tok.position,
                "NEAR only between exactly two terms inside parentheses",
            ),
            TokenKind::RParen => QueryError::syntax(tok.position, "end of query (unbalanced `)`)"),
            _ => QueryError::syntax(tok.position, "end of query"),
        });
    }
    Ok(node)
}

struct Parser {
    tokens: Vec<Lexeme>,
    pos: usize,
    end: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Lexeme> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self, ahead: usize) -> Option<&TokenKind> {
        self.tokens.get(self.pos + ahead).map(|l| &l.kind)
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |l| l.position)
    }

    fn next(&mut self) -> Option<Lexeme> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn expect_rparen(&mut self) -> Result<(), QueryError> {
        match self.peek_kind(0) {
            Some(TokenKind::RParen) => {
                self.pos += 1;
                Ok(())
            }
            Some(TokenKind::Near(_)) => Err(QueryError::syntax(
                self.here(),
                "NEAR only between exactly two terms inside parentheses",
            )),
            _ => Err(QueryError::syntax(self.here(), "`)`")),
        }
    }

    fn enter(&mut self) -> Result<(), QueryError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(QueryError::syntax(self.here(), "shallower nesting"));
        }
        Ok(())
    }

    fn parse_or(&mut self, field: Field) -> Result<QueryNode, QueryError> {
        self.enter()?;
        let mut children = vec![self.parse_and(field)?];
        while matches!(self.peek_kind(0), Some(TokenKind::Or)) {
            self.pos += 1;
            children.push(self.parse_and(field)?);
        }
        self.depth -= 1;
        Ok(collapse(children, QueryNode::Or))
    }

    fn parse_and(&mut self, field: Field) -> Result<QueryNode, QueryError> {
        let mut children = vec![self.parse_clause(field)?];
        loop {
            match self.peek_kind(0) {
                Some(TokenKind::And) => {
                    self.pos += 1;
                    children.push(self.parse_clause(field)?);
                }
                Some(k) if starts_clause(k) => children.push(self.parse_clause(field)?),
                _ => break,
            }
        }
        Ok(collapse(children, QueryNode::And))
    }

    fn parse_clause(&mut self, field: Field) -> Result<QueryNode, QueryError> {
        self.enter()?;
        let at = self.here();
        let node = match self.peek_kind(0) {
            Some(TokenKind::Not) => {
                self.pos += 1;
                QueryNode::Not(Box::new(self.parse_clause(field)?))
            }
            Some(TokenKind::Equals) => {
                self.pos += 1;
                let mut inner = self.parse_clause(field)?;
                inner.disable_synonyms();
                inner
            }
            Some(&TokenKind::Func(op)) => {
                self.pos += 1;
                match self.next().map(|l| l.kind) {
                    Some(TokenKind::LParen) => {}
                    _ => return Err(QueryError::syntax(at, "`(` after operator name")),
                }
                if matches!(self.peek_kind(0), Some(TokenKind::RParen)) {
                    return Err(QueryError::syntax(self.here(), "operator argument"));
                }
                let inner = self.parse_or(Field::All)?;
                self.expect_rparen()?;
                QueryNode::func(op, inner)
            }
            Some(TokenKind::Field(name)) => {
                let field: Field = name
                    .parse()
                    .map_err(|_| QueryError::syntax(at, "known field name"))?;
                self.pos += 1;
                self.parse_field_body(field)?
            }
            _ => self.parse_atom(field)?,
        };
        self.depth -= 1;
        Ok(node)
    }

    fn parse_field_body(&mut self, field: Field) -> Result<QueryNode, QueryError> {
        let mut exact = false;
        while matches!(self.peek_kind(0), Some(TokenKind::Equals)) {
            self.pos += 1;
            exact = true;
        }
        let mut node = self.parse_atom(field)?;
        if exact {
            node.disable_synonyms();
        }
        Ok(node)
    }

    fn parse_atom(&mut self, field: Field) -> Result<QueryNode, QueryError> {
        let at = self.here();
        let Some(tok) = self.next() else {
            return Err(QueryError::syntax(at, "term, phrase, regex or group"));
        };
        match tok.kind {
            TokenKind::Word(word) => {
                let fuzz = match self.peek_kind(0) {
                    Some(&TokenKind::Fuzz(f)) => {
                        self.pos += 1;
                        Some(f)
                    }
                    _ => None,
                };
                make_term(field, &word, fuzz, at)
            }
            TokenKind::Phrase(text) => {
                let terms = field.analyze(&text);
                if terms.is_empty() {
                    return Err(QueryError::syntax(at, "searchable phrase text"));
                }
                Ok(QueryNode::Phrase { field, terms })
            }
            TokenKind::Regex(pattern) => Ok(QueryNode::Regex { field, pattern }),
            TokenKind::LParen => {
                if let (
                    Some(TokenKind::Word(_)),
                    Some(TokenKind::Near(_)),
                    Some(TokenKind::Word(_)),
                    Some(TokenKind::RParen),
                ) = (
                    self.peek_kind(0),
                    self.peek_kind(1),
                    self.peek_kind(2),
                    self.peek_kind(3),
                ) {
                    return self.parse_proximity(field);
                }
                if matches!(self.peek_kind(0), Some(TokenKind::RParen)) {
                    return Err(QueryError::syntax(self.here(), "query inside parentheses"));
                }
                let inner = self.parse_or(field)?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokenKind::Near(_) => Err(QueryError::syntax(
                at,
                "NEAR only between exactly two terms inside parentheses",
            )),
            TokenKind::Fuzz(_) => Err(QueryError::syntax(at, "term before `~`")),
            _ => Err(QueryError::syntax(at, "term, phrase, regex or group")),
        }
    }

    fn parse_proximity(&mut self, field: Field) -> Result<QueryNode, QueryError> {
        let word = |p: &mut Parser| -> Result<String, QueryError> {
            let tok = p.next().expect("lookahead checked");
            let TokenKind::Word(w) = tok.kind else {
                unreachable!("lookahead checked")
            };
            single_term(field, &w, tok.position)
        };
        let left = word(self)?;
        let near = self.next().expect("lookahead checked");
        let TokenKind::Near(distance) = near.kind else {
            unreachable!("lookahead checked")
        };
        if distance == 0 {
            return Err(QueryError::syntax(
                near.position,
                "NEAR distance of at least 1",
            ));
        }
        let right = word(self)?;
        self.pos += 1; // `)`
        Ok(QueryNode::Proximity {
            field,
            left,
            right,
            distance,
        })
    }
}

fn starts_clause(kind: &TokenKind) -> bool {
    matches!(
        kind,
        TokenKind::Word(_)
            | TokenKind::Field(_)
            | TokenKind::Not
            | TokenKind::LParen
            | TokenKind::Equals
            | TokenKind::Phrase(_)
            | TokenKind::Regex(_)
            | TokenKind::Func(_)
    )
}

fn collapse(mut children: Vec<QueryNode>, wrap: fn(Vec<QueryNode>) -> QueryNode) -> QueryNode {
    if children.len() == 1 {
        children.pop().expect("one child")
    } else {
        wrap(children)
    }
}

fn single_term(field: Field, word: &str, at: usize) -> Result<String, QueryError> {
    let mut terms = field.analyze(word);
    if terms.len() != 1 {
        return Err(QueryError::syntax(at, "a single term"));
    }
    Ok(terms.pop().expect("one term"))
}

fn make_term(
    field: Field,
    word: &str,
    fuzz: Option<f64>,
    at: usize,
) -> Result<QueryNode, QueryError> {
    let terms = field.analyze(word);
    match terms.len() {
        0 => Err(QueryError::syntax(at, "searchable term")),
        1 => Ok(QueryNode::Term(TermQuery {
            field,
            text: terms.into_iter().next().expect("one term"),
            synonyms: true,
            fuzz,
        })),
        _ if fuzz.is_some() => Err(QueryError::syntax(at, "a single term before `~`")),
        _ => Ok(QueryNode::Phrase { field, terms }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlang::FuncOp;

    fn term(field: Field, text: &str) -> QueryNode {
        QueryNode::term(field, text)
    }

    #[test]
    fn nested_operators() {
        assert_eq!(
            parse("citations(references(author:einstein))").unwrap(),
            QueryNode::func(
                FuncOp::Citations,
                QueryNode::func(FuncOp::References, term(Field::Author, "einstein"))
            )
        );
    }

    #[test]
    fn fuzzy_term() {
        assert_eq!(
            parse("author:eisenstein~0.3").unwrap(),
            QueryNode::Term(TermQuery {
                field: Field::Author,
                text: "eisenstein".into(),
                synonyms: true,
                fuzz: Some(0.3)
            })
        );
    }

    #[test]
    fn empty() {
        assert_eq!(parse(""), Err(QueryError::EmptyQuery));
        assert_eq!(parse("   "), Err(QueryError::EmptyQuery));
    }

    #[test]
    fn proximity() {
        assert_eq!(
            parse("body:(weak NEAR5 lensing)").unwrap(),
            QueryNode::Proximity {
                field: Field::Body,
                left: "weak".into(),
                right: "lensing".into(),
                distance: 5
            }
        );
        for bad in [
            "body:(a NEAR2 b NEAR2 c)",
            "a NEAR2 b",
            "body:(a NEAR0 b)",
            "body:(NEAR2 b)",
        ] {
            assert!(
                matches!(parse(bad), Err(QueryError::SyntaxError { .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn adjacency_is_and() {
        assert_eq!(
            parse("dark energy").unwrap(),
            QueryNode::And(vec![term(Field::All, "dark"), term(Field::All, "energy")])
        );
        assert_eq!(
            parse("dark AND energy").unwrap(),
            parse("dark energy").unwrap()
        );
    }

    #[test]
    fn precedence() {
        assert_eq!(
            parse("a b OR c").unwrap(),
            QueryNode::Or(vec![
                QueryNode::And(vec![term(Field::All, "a"), term(Field::All, "b")]),
                term(Field::All, "c")
            ])
        );
    }

    #[test]
    fn equals_distribution() {
        let QueryNode::And(c) = parse("=a b").unwrap() else {
            panic!()
        };
        assert!(matches!(&c[0], QueryNode::Term(t) if !t.synonyms));
        assert!(matches!(&c[1], QueryNode::Term(t) if t.synonyms));

        let QueryNode::And(c) = parse("=(a b)").unwrap() else {
            panic!()
        };
        assert!(c
            .iter()
            .all(|n| matches!(n, QueryNode::Term(t) if !t.synonyms)));

        let QueryNode::Term(t) = parse("body:=galaxy").unwrap() else {
            panic!()
        };
        assert_eq!((t.field, t.synonyms), (Field::Body, false));
        assert_eq!(
            parse("=body:galaxy").unwrap(),
            parse("body:=galaxy").unwrap()
        );
    }

    #[test]
    fn field_groups_propagate() {
        assert_eq!(
            parse("title:(dark OR abstract:energy)").unwrap(),
            QueryNode::Or(vec![
                term(Field::Title, "dark"),
                term(Field::Abstract, "energy")
            ])
        );
    }

    #[test]
    fn multi_token_words_become_phrases() {
        assert_eq!(
            parse("body:gravitational-lensing").unwrap(),
            QueryNode::Phrase {
                field: Field::Body,
                terms: vec!["gravitational".into(), "lensing".into()]
            }
        );
        assert!(parse("body:a-b~0.2").is_err());
        assert!(parse("body:---").is_err());
    }

    #[test]
    fn author_phrase_and_word() {
        assert_eq!(
            parse("author:\"Einstein, A.\"").unwrap(),
            QueryNode::Phrase {
                field: Field::Author,
                terms: vec!["einstein, a".into()]
            }
        );
        assert_eq!(
            parse("author:Einstein,A").unwrap(),
            term(Field::Author, "einstein, a")
        );
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse("author:("),
            Err(QueryError::syntax(8, "term, phrase, regex or group"))
        );
        assert!(matches!(
            parse("subject:x"),
            Err(QueryError::SyntaxError { position: 0, .. })
        ));
        assert!(matches!(
            parse("a )"),
            Err(QueryError::SyntaxError { position: 2, .. })
        ));
        assert!(matches!(parse("()"), Err(QueryError::SyntaxError { .. })));
        assert!(matches!(parse("NOT"), Err(QueryError::SyntaxError { .. })));
        assert!(matches!(parse("a OR"), Err(QueryError::SyntaxError { .. })));
        assert!(matches!(
            parse("references()"),
            Err(QueryError::SyntaxError { .. })
        ));
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let q = format!("{}a{}", "(".repeat(5000), ")".repeat(5000));
        assert!(matches!(parse(&q), Err(QueryError::SyntaxError { .. })));
        let q = format!("{}a", "NOT ".repeat(5000));
        assert!(parse(&q).is_err());
    }
}
