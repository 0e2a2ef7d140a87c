//! Textual assembler syntax.
//!
//! ```text
//! term ::= atom+                      (left-associative application)
//! atom ::= K | Y | V path | integer | #name | ( term )
//! path ::= ε | < path | > path | { path , path }
//! ```
//!
//! Newlines are ordinary whitespace.

use super::path::Multipath;
use super::{KvyError, KvyTerm};
use crate::prim::{op_id, op_name};

pub fn print_kvy(t: &KvyTerm) -> String {
    let mut out = String::new();
    write_term(&mut out, t, false);
    out
}

fn write_term(out: &mut String, t: &KvyTerm, arg: bool) {
    match t {
        KvyTerm::K => out.push('K'),
        KvyTerm::Y => out.push('Y'),
        KvyTerm::V(p) => {
            out.push('V');
            out.push_str(&p.to_string());
        }
        KvyTerm::Prim(id) => {
            out.push('#');
            out.push_str(&op_name(*id));
        }
        KvyTerm::Int(n) => out.push_str(&n.to_string()),
        KvyTerm::App(f, a) => {
            if arg {
                out.push('(');
            }
            write_term(out, f, false);
            out.push(' ');
            write_term(out, a, true);
            if arg {
                out.push(')');
            }
        }
    }
}

pub fn parse_kvy(text: &str) -> Result<KvyTerm, KvyError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let t = p.term()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error(format!("unexpected `{}`", p.chars[p.pos])));
    }
    Ok(t)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Parser {
    fn error(&self, message: String) -> KvyError {
        KvyError::Parse {
            line: self.line,
            col: self.col,
            message,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn term(&mut self) -> Result<KvyTerm, KvyError> {
        let mut t = self.atom()?;
        loop {
            self.skip_ws();
            match self.peek() {
                None | Some(')') => return Ok(t),
                _ => t = KvyTerm::app(t, self.atom()?),
            }
        }
    }

    fn atom(&mut self) -> Result<KvyTerm, KvyError> {
        self.skip_ws();
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of input, expected a term".into()));
        };
        match c {
            'K' => {
                self.bump();
                Ok(KvyTerm::K)
            }
            'Y' => {
                self.bump();
                Ok(KvyTerm::Y)
            }
            'V' => {
                self.bump();
                Ok(KvyTerm::V(self.path()?))
            }
            '(' => {
                self.bump();
                let t = self.term()?;
                self.skip_ws();
                if self.bump() != Some(')') {
                    return Err(self.error("expected `)`".into()));
                }
                Ok(t)
            }
            '#' => {
                self.bump();
                let mut name = String::new();
                while let Some(c) = self.peek().filter(char::is_ascii_alphanumeric) {
                    name.push(c);
                    self.bump();
                }
                op_id(&name)
                    .map(KvyTerm::Prim)
                    .ok_or_else(|| self.error(format!("unknown operation `#{name}`")))
            }
            '-' | '0'..='9' => {
                let mut digits = String::new();
                digits.push(c);
                self.bump();
                while let Some(d) = self.peek().filter(char::is_ascii_digit) {
                    digits.push(d);
                    self.bump();
                }
                digits
                    .parse()
                    .map(KvyTerm::Int)
                    .map_err(|_| self.error(format!("bad integer `{digits}`")))
            }
            _ => Err(self.error(format!("unexpected `{c}`, expected a term"))),
        }
    }

    fn path(&mut self) -> Result<Multipath, KvyError> {
        match self.peek() {
            Some('<') => {
                self.bump();
                Ok(Multipath::left(self.path()?))
            }
            Some('>') => {
                self.bump();
                Ok(Multipath::right(self.path()?))
            }
            Some('{') => {
                self.bump();
                let l = self.path()?;
                if self.bump() != Some(',') {
                    return Err(self.error("expected `,` in path".into()));
                }
                let r = self.path()?;
                if self.bump() != Some('}') {
                    return Err(self.error("expected `}` in path".into()));
                }
                Ok(Multipath::fork(l, r))
            }
            _ => Ok(Multipath::End),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_paths_after_v() {
        let p = Multipath::fork(
            Multipath::right(Multipath::right(Multipath::right(Multipath::End))),
            Multipath::left(Multipath::End),
        );
        assert_eq!(print_kvy(&KvyTerm::V(p)), "V{>>>,<}");
    }

    #[test]
    fn parses_paths() {
        assert_eq!(
            parse_kvy("V<<").unwrap(),
            KvyTerm::V(Multipath::left(Multipath::left(Multipath::End)))
        );
        let dup = parse_kvy("V{,}").unwrap();
        assert_eq!(
            dup,
            KvyTerm::V(Multipath::fork(Multipath::End, Multipath::End))
        );
        assert_eq!(dup.arity(), Some(1));
    }

    #[test]
    fn application_and_atoms() {
        let t = parse_kvy("K (V> K) #add -3\n 12").unwrap();
        assert_eq!(print_kvy(&t), "K (V> K) #add -3 12");
        assert_eq!(
            parse_kvy("#probe2").unwrap(),
            KvyTerm::Prim(crate::prim::PROBE_BASE + 2)
        );
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse_kvy("K\n  (V"),
            Err(KvyError::Parse {
                line: 2,
                col: 5,
                message: "expected `)`".into()
            })
        );
        assert!(matches!(
            parse_kvy("K Q"),
            Err(KvyError::Parse {
                line: 1,
                col: 3,
                ..
            })
        ));
        assert!(parse_kvy("").is_err());
    }

    #[test]
    fn listing_tokens_parse() {
        let listing = "V<{{<>>>>>,},} (K V) V<< V<{>>,>}\nY (V<> V{><>,}) V<<> V><> (V>< K)";
        let t = parse_kvy(listing).unwrap();
        let (head, args) = t.spine();
        assert_eq!(head.to_string(), "V<{{<>>>>>,},}");
        assert_eq!(args.len(), 8);
    }
}
