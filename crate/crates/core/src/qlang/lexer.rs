use super::{FuncOp, QueryError};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Word(String),
    /// A word immediately followed by `:`.
    Field(String),
    And,
    Or,
    Not,
    LParen,
    RParen,
    Equals,
    Fuzz(f64),
    Near(u32),
    Regex(String),
    Phrase(String),
    /// An operator name immediately followed by `(`; the paren is a separate token.
    Func(FuncOp),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexeme {
    pub kind: TokenKind,
    pub position: usize,
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '(' | ')' | '"' | ':' | '~')
}

pub fn lex(input: &str) -> Result<Vec<Lexeme>, QueryError> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let kind = match c {
            '(' => {
                i += 1;
                TokenKind::LParen
            }
            ')' => {
                i += 1;
                TokenKind::RParen
            }
            '=' => {
                i += 1;
                TokenKind::Equals
            }
            ':' => return Err(QueryError::syntax(start, "field name before `:`")),
            '"' => {
                i += 1;
                let mut text = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(QueryError::UnterminatedPhrase { position: start }),
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') if matches!(chars.get(i + 1), Some('"' | '\\')) => {
                            text.push(chars[i + 1]);
                            i += 2;
                        }
                        Some(&ch) => {
                            text.push(ch);
                            i += 1;
                        }
                    }
                }
                TokenKind::Phrase(text)
            }
            '/' => {
                i += 1;
                let mut pattern = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(QueryError::UnterminatedRegex { position: start }),
                        Some('/') => {
                            i += 1;
                            break;
                        }
                        Some('\\') if chars.get(i + 1) == Some(&'/') => {
                            pattern.push('/');
                            i += 2;
                        }
                        Some('\\') if i + 1 < chars.len() => {
                            pattern.push('\\');
                            pattern.push(chars[i + 1]);
                            i += 2;
                        }
                        Some(&ch) => {
                            pattern.push(ch);
                            i += 1;
                        }
                    }
                }
                TokenKind::Regex(pattern)
            }
            '~' => {
                i += 1;
                let from = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let text: String = chars[from..i].iter().collect();
                match text.parse::<f64>() {
                    Ok(v) if (0.0..1.0).contains(&v) => TokenKind::Fuzz(v),
                    _ => return Err(QueryError::BadFuzzValue { position: start }),
                }
            }
            _ => {
                while i < chars.len() && is_word_char(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                if chars.get(i) == Some(&':') {
                    i += 1;
                    TokenKind::Field(word)
                } else {
                    classify_word(word, chars.get(i) == Some(&'('))
                }
            }
        };
        out.push(Lexeme {
            kind,
            position: start,
        });
    }
    Ok(out)
}

fn classify_word(word: String, before_paren: bool) -> TokenKind {
    match word.as_str() {
        "AND" => return TokenKind::And,
        "OR" => return TokenKind::Or,
        "NOT" => return TokenKind::Not,
        _ => {}
    }
    if let Some(digits) = word.strip_prefix("NEAR") {
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            if let Ok(n) = digits.parse() {
                return TokenKind::Near(n);
            }
        }
    }
    if before_paren {
        if let Ok(op) = word.parse::<FuncOp>() {
            return TokenKind::Func(op);
        }
    }
    TokenKind::Word(word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(q: &str) -> Vec<TokenKind> {
        lex(q).unwrap().into_iter().map(|l| l.kind).collect()
    }

    #[test]
    fn proximity_group() {
        assert_eq!(
            kinds("body:(weak NEAR5 lensing)"),
            [
                Field("body".into()),
                LParen,
                Word("weak".into()),
                Near(5),
                Word("lensing".into()),
                RParen
            ]
        );
    }

    #[test]
    fn equals_modifier() {
        assert_eq!(kinds("=star"), [Equals, Word("star".into())]);
    }

    #[test]
    fn unterminated_phrase() {
        assert_eq!(
            lex("author:\"einstein, a"),
            Err(QueryError::UnterminatedPhrase { position: 7 })
        );
        assert!(matches!(
            lex("/abc"),
            Err(QueryError::UnterminatedRegex { position: 0 })
        ));
    }

    #[test]
    fn fuzz_values() {
        assert_eq!(
            kinds("author:eisenstein~0.3"),
            [Field("author".into()), Word("eisenstein".into()), Fuzz(0.3)]
        );
        for bad in ["a~", "a~1.5", "a~1", "a~x", "a~0..1"] {
            assert!(
                matches!(lex(bad), Err(QueryError::BadFuzzValue { position: 1 })),
                "{bad}"
            );
        }
    }

    #[test]
    fn keywords_are_case_sensitive() {
        assert_eq!(
            kinds("a and b"),
            [Word("a".into()), Word("and".into()), Word("b".into())]
        );
        assert_eq!(kinds("a AND b OR NOT c")[1], And);
        assert_eq!(
            kinds("near5 NEAR")[..],
            [Word("near5".into()), Word("NEAR".into())]
        );
    }

    #[test]
    fn operators_need_adjacent_paren() {
        assert_eq!(kinds("references(x)")[0], Func(FuncOp::References));
        assert_eq!(kinds("references (x)")[0], Word("references".into()));
        assert_eq!(kinds("trending")[0], Word("trending".into()));
    }

    #[test]
    fn regex_escapes() {
        assert_eq!(kinds(r"/a\/b\d/"), [Regex(r"a/b\d".into())]);
    }

    #[test]
    fn phrase_escapes() {
        assert_eq!(kinds(r#""a \"b\" \\""#), [Phrase(r#"a "b" \"#.into())]);
    }
}
