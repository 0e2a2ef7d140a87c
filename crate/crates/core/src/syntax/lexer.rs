use std::fmt;
use std::sync::Arc;

use super::ast::Span;
use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Data,
    Let,
    In,
    If,
    Then,
    Else,
    Case,
    Of,
    Import,
    /// Lowercase identifier (possibly module-qualified).
    Lower(String),
    /// Uppercase identifier (possibly module-qualified).
    Upper(String),
    /// Primitive reference, `#add`.
    Prim(String),
    Int(u64),
    Eq,
    Bar,
    LParen,
    RParen,
    Backslash,
    Dot,
    FatArrow,
    Arrow,
    Colon,
    Underscore,
    Semi,
    LBrace,
    RBrace,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Data => "data",
            Tok::Let => "let",
            Tok::In => "in",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::Case => "case",
            Tok::Of => "of",
            Tok::Import => "import",
            Tok::Lower(s) | Tok::Upper(s) => return f.write_str(s),
            Tok::Prim(s) => return write!(f, "#{s}"),
            Tok::Int(n) => return write!(f, "{n}"),
            Tok::Eq => "=",
            Tok::Bar => "|",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Backslash => "\\",
            Tok::Dot => ".",
            Tok::FatArrow => "=>",
            Tok::Arrow => "->",
            Tok::Colon => ":",
            Tok::Underscore => "_",
            Tok::Semi => ";",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
    /// First token on its source line.
    pub line_start: bool,
    /// Inserted by the layout pass rather than written in the source.
    pub virtual_: bool,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "data" => Tok::Data,
        "let" => Tok::Let,
        "in" => Tok::In,
        "if" => Tok::If,
        "then" => Tok::Then,
        "else" => Tok::Else,
        "case" => Tok::Case,
        "of" => Tok::Of,
        "import" => Tok::Import,
        _ => return None,
    })
}

/// Splits LambdaM source into tokens. `--` starts a comment running to the
/// end of the line.
pub fn lex(file: &str, source: &str) -> Result<Vec<Token>, SyntaxError> {
    let file: Arc<str> = Arc::from(file);
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let mut line_start = true;

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            line_start = true;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }

        let span = Span::new(file.clone(), line, col);
        let start = i;
        let tok = if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let n = text.parse::<u64>().map_err(|_| SyntaxError::Lex {
                span: span.clone(),
                found: text.clone(),
            })?;
            Tok::Int(n)
        } else if c.is_ascii_uppercase() {
            // Qualified names: Upper(.Upper)*(.lower)? with no intervening spaces.
            let mut upper = true;
            loop {
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let next_starts_ident = chars
                    .get(i + 1)
                    .is_some_and(|n| n.is_ascii_alphabetic() || *n == '_');
                if upper && chars.get(i) == Some(&'.') && next_starts_ident {
                    upper = chars[i + 1].is_ascii_uppercase();
                    i += 1;
                } else {
                    break;
                }
            }
            let text: String = chars[start..i].iter().collect();
            if upper {
                Tok::Upper(text)
            } else {
                Tok::Lower(text)
            }
        } else if c.is_ascii_lowercase()
            || (c == '_' && chars.get(i + 1).is_some_and(|n| is_ident_char(*n)))
        {
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            keyword(&text).unwrap_or(Tok::Lower(text))
        } else if c == '#' && chars.get(i + 1).is_some_and(|n| n.is_ascii_lowercase()) {
            i += 1;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            Tok::Prim(chars[start + 1..i].iter().collect())
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let (tok, len) = match (c, two.as_str()) {
                (_, "=>") => (Tok::FatArrow, 2),
                (_, "->") => (Tok::Arrow, 2),
                ('=', _) => (Tok::Eq, 1),
                ('|', _) => (Tok::Bar, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('\\', _) => (Tok::Backslash, 1),
                ('.', _) => (Tok::Dot, 1),
                (':', _) => (Tok::Colon, 1),
                ('_', _) => (Tok::Underscore, 1),
                (';', _) => (Tok::Semi, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                _ => {
                    return Err(SyntaxError::Lex {
                        span,
                        found: c.to_string(),
                    })
                }
            };
            i += len;
            tok
        };
        col += (i - start) as u32;
        out.push(Token {
            tok,
            span,
            line_start,
            virtual_: false,
        });
        line_start = false;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex("t.lm", src)
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect()
    }

    #[test]
    fn data_declaration_tokens() {
        assert_eq!(
            toks("data Bool = False | True"),
            vec![
                Tok::Data,
                Tok::Upper("Bool".into()),
                Tok::Eq,
                Tok::Upper("False".into()),
                Tok::Bar,
                Tok::Upper("True".into()),
            ]
        );
    }

    #[test]
    fn empty_source() {
        assert!(toks("").is_empty());
        assert!(toks("  -- only a comment\n\n").is_empty());
    }

    #[test]
    fn application_with_literals() {
        assert_eq!(
            toks("plus 1 1"),
            vec![Tok::Lower("plus".into()), Tok::Int(1), Tok::Int(1)]
        );
    }

    #[test]
    fn qualified_names_and_lambda_dots() {
        assert_eq!(
            toks("StdLib.Map.mapInsert StdLib.Map.Map \\x.x"),
            vec![
                Tok::Lower("StdLib.Map.mapInsert".into()),
                Tok::Upper("StdLib.Map.Map".into()),
                Tok::Backslash,
                Tok::Lower("x".into()),
                Tok::Dot,
                Tok::Lower("x".into()),
            ]
        );
        assert_eq!(
            toks("\\x . Nil"),
            vec![
                Tok::Backslash,
                Tok::Lower("x".into()),
                Tok::Dot,
                Tok::Upper("Nil".into())
            ]
        );
    }

    #[test]
    fn symbols_and_prims() {
        assert_eq!(
            toks("case x of { A => #add 1 _ ; }"),
            vec![
                Tok::Case,
                Tok::Lower("x".into()),
                Tok::Of,
                Tok::LBrace,
                Tok::Upper("A".into()),
                Tok::FatArrow,
                Tok::Prim("add".into()),
                Tok::Int(1),
                Tok::Underscore,
                Tok::Semi,
                Tok::RBrace,
            ]
        );
    }

    #[test]
    fn bad_character_reports_position() {
        let err = lex("f.lm", "main = 1\nx = $").unwrap_err();
        match err {
            SyntaxError::Lex { span, found } => {
                assert_eq!((span.line, span.col), (2, 5));
                assert_eq!(found, "$");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn positions_strictly_increase() {
        let src = "data List a = Nil | Cons a (List a)\nlen Nil = Z\nlen (Cons _ r) = S (len r)\n";
        let ts = lex("t.lm", src).unwrap();
        for w in ts.windows(2) {
            assert!((w[0].span.line, w[0].span.col) < (w[1].span.line, w[1].span.col));
        }
    }
}
