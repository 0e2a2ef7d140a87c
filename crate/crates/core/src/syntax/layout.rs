//! Indentation-sensitive block insertion.
//!
//! The top level, `let` groups and `case` alternatives form blocks. When a
//! block is not opened with an explicit `{`, its column is the column of its
//! first token: a line starting at that column begins a new item (`;`), a
//! line starting further left closes the block (`}`), a line starting further
//! right continues the current item. Inside parentheses line breaks are
//! ignored.

use super::lexer::{Tok, Token};

enum Ctx {
    Implicit(u32),
    Explicit,
    Paren,
    If,
    Then,
    Let,
}

fn virtual_token(tok: Tok, at: &Token) -> Token {
    Token {
        tok,
        span: at.span.clone(),
        line_start: false,
        virtual_: true,
    }
}

pub fn layout(tokens: Vec<Token>) -> Vec<Token> {
    let mut out = Vec::with_capacity(tokens.len() + 16);
    let Some(first) = tokens.first() else {
        return out;
    };
    let mut stack = vec![Ctx::Implicit(first.span.col)];
    out.push(virtual_token(Tok::LBrace, first));
    let mut open_block = false;

    for (i, tok) in tokens.into_iter().enumerate() {
        if i == 0 {
            // The virtual `{` above already opened the top-level block.
        } else if open_block {
            open_block = false;
            if tok.tok == Tok::LBrace {
                stack.push(Ctx::Explicit);
                out.push(tok);
                continue;
            }
            stack.push(Ctx::Implicit(tok.span.col));
            out.push(virtual_token(Tok::LBrace, &tok));
        } else if tok.line_start {
            line_start(&mut stack, &mut out, &tok);
        }

        match tok.tok {
            Tok::LParen => stack.push(Ctx::Paren),
            Tok::RParen => {
                close_until(&mut stack, &mut out, &tok, |c| matches!(c, Ctx::Paren));
            }
            Tok::If => stack.push(Ctx::If),
            Tok::Then => {
                if close_until(&mut stack, &mut out, &tok, |c| matches!(c, Ctx::If)) {
                    stack.push(Ctx::Then);
                }
            }
            Tok::Else => {
                close_until(&mut stack, &mut out, &tok, |c| matches!(c, Ctx::Then));
            }
            Tok::Let => {
                stack.push(Ctx::Let);
                open_block = true;
            }
            Tok::In => {
                close_until(&mut stack, &mut out, &tok, |c| matches!(c, Ctx::Let));
            }
            Tok::Of => open_block = true,
            Tok::LBrace => stack.push(Ctx::Explicit),
            Tok::RBrace => {
                close_until(&mut stack, &mut out, &tok, |c| matches!(c, Ctx::Explicit));
            }
            _ => {}
        }
        out.push(tok);
    }

    let last = out.last().cloned().expect("non-empty");
    while let Some(ctx) = stack.pop() {
        if let Ctx::Implicit(_) = ctx {
            out.push(virtual_token(Tok::RBrace, &last));
        }
    }
    out
}

fn line_start(stack: &mut Vec<Ctx>, out: &mut Vec<Token>, tok: &Token) {
    loop {
        let Some(pos) = stack
            .iter()
            .rposition(|c| matches!(c, Ctx::Implicit(_) | Ctx::Explicit | Ctx::Paren))
        else {
            return;
        };
        let Ctx::Implicit(col) = stack[pos] else {
            return;
        };
        if tok.span.col < col {
            stack.truncate(pos);
            out.push(virtual_token(Tok::RBrace, tok));
            continue;
        }
        if tok.span.col == col {
            stack.truncate(pos + 1);
            out.push(virtual_token(Tok::Semi, tok));
        }
        return;
    }
}

/// Pops contexts down to (and including) the first one matching `target`,
/// closing implicit blocks on the way. Stops without popping at an explicit
/// block or parenthesis that is not the target; returns whether the target
/// was found.
fn close_until(
    stack: &mut Vec<Ctx>,
    out: &mut Vec<Token>,
    at: &Token,
    target: impl Fn(&Ctx) -> bool,
) -> bool {
    let Some(pos) = stack.iter().rposition(&target) else {
        return false;
    };
    if stack[pos + 1..]
        .iter()
        .any(|c| matches!(c, Ctx::Explicit | Ctx::Paren))
    {
        return false;
    }
    for ctx in stack.drain(pos..).rev() {
        if let Ctx::Implicit(_) = ctx {
            out.push(virtual_token(Tok::RBrace, at));
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::super::lexer::lex;
    use super::*;

    fn shape(src: &str) -> String {
        layout(lex("t.lm", src).unwrap())
            .iter()
            .map(|t| t.tok.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    #[test]
    fn top_level_items_split_on_column_one() {
        assert_eq!(shape("a = 1\nb =\n  2\n"), "{ a = 1 ; b = 2 }");
    }

    #[test]
    fn case_block_from_indentation() {
        let src =
            "cond b = case b of\n           False => S Z\n           True  => Z\nmain = cond True";
        assert_eq!(
            shape(src),
            "{ cond b = case b of { False => S Z ; True => Z } ; main = cond True }"
        );
    }

    #[test]
    fn nested_case_blocks_close_on_dedent() {
        let src = "f xs = case xs of\n  Cons y ys => case ys of\n    Cons z zs => r\n    Nil => d\n  Nil => d\n";
        assert_eq!(
            shape(src),
            "{ f xs = case xs of { Cons y ys => case ys of { Cons z zs => r ; Nil => d } ; Nil => d } }"
        );
    }

    #[test]
    fn let_closed_by_in_and_if_closes_case() {
        assert_eq!(shape("f = let x = 1 in x"), "{ f = let { x = 1 } in x }");
        assert_eq!(
            shape("f = if case b of A => c then 1 else 2"),
            "{ f = if case b of { A => c } then 1 else 2 }"
        );
    }

    #[test]
    fn parentheses_suspend_layout() {
        assert_eq!(shape("f = (g\nx)\nh = 1"), "{ f = ( g x ) ; h = 1 }");
        assert_eq!(
            shape("f = (case b of A => 1\n               B => 2)"),
            "{ f = ( case b of { A => 1 ; B => 2 } ) }"
        );
    }

    #[test]
    fn explicit_braces_ignore_newlines() {
        assert_eq!(
            shape("cond b = case b of { False => S Z\n ; True => Z }"),
            "{ cond b = case b of { False => S Z ; True => Z } }"
        );
    }
}
