//! Reader for the algebra text format.
//!
//! ```text
//! algebra Z2        # comments run to end of line
//! size 2
//! op + 2
//! values 0 1 1 0
//! ```
//!
//! `op`/`values` blocks repeat; the declaration order of the symbols is the
//! order of the signature.

use crate::algebra::{Algebra, Elem, Signature, Symbol};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let mut start = None;
        for (i, c) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
            match (c.is_whitespace(), start) {
                (true, Some(s)) => {
                    tokens.push(Token {
                        text: &line[s..i],
                        line: lineno + 1,
                        column: line[..s].chars().count() + 1,
                    });
                    start = None;
                }
                (false, None) => start = Some(i),
                _ => {}
            }
        }
    }
    tokens
}

struct Cursor<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    end: (usize, usize),
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<Token<'a>> {
        self.tokens.get(self.pos).copied()
    }

    fn next(&mut self, what: &str) -> Result<Token<'a>> {
        let tok = self.peek().ok_or_else(|| {
            Error::syntax(self.end.0, self.end.1, format!("unexpected end of input, expected {what}"))
        })?;
        self.pos += 1;
        Ok(tok)
    }

    fn keyword(&mut self, kw: &str) -> Result<Token<'a>> {
        let tok = self.next(&format!("`{kw}`"))?;
        if tok.text != kw {
            return Err(Error::syntax(
                tok.line,
                tok.column,
                format!("expected `{kw}`, found `{}`", tok.text),
            ));
        }
        Ok(tok)
    }

    fn number(&mut self, what: &str) -> Result<(u64, Token<'a>)> {
        let tok = self.next(what)?;
        let value = tok.text.parse::<u64>().map_err(|_| {
            Error::syntax(tok.line, tok.column, format!("expected {what}, found `{}`", tok.text))
        })?;
        Ok((value, tok))
    }
}

pub fn parse_algebra(text: &str) -> Result<Algebra> {
    let tokens = tokenize(text);
    let end = (text.lines().count().max(1), 1);
    let mut cur = Cursor { tokens, pos: 0, end };

    cur.keyword("algebra")?;
    let name = cur.next("an algebra name")?.text.to_string();
    cur.keyword("size")?;
    let (size, size_tok) = cur.number("the carrier size")?;
    if size == 0 {
        return Err(Error::syntax(size_tok.line, size_tok.column, "size must be positive"));
    }
    let size = usize::try_from(size)
        .map_err(|_| Error::syntax(size_tok.line, size_tok.column, "size too large"))?;

    let mut symbols: Vec<Symbol> = Vec::new();
    let mut tables = Vec::new();
    while cur.peek().is_some() {
        cur.keyword("op")?;
        let sym_tok = cur.next("an operation symbol")?;
        if sym_tok.text.contains(['(', ')']) {
            return Err(Error::syntax(
                sym_tok.line,
                sym_tok.column,
                format!("symbol `{}` may not contain parentheses", sym_tok.text),
            ));
        }
        if symbols.iter().any(|s| s.name == sym_tok.text) {
            return Err(Error::DuplicateSymbol(sym_tok.text.to_string()));
        }
        let (arity, arity_tok) = cur.number("an arity")?;
        let arity = usize::try_from(arity)
            .map_err(|_| Error::syntax(arity_tok.line, arity_tok.column, "arity too large"))?;
        let expected = crate::algebra::checked_pow(size, arity).ok_or_else(|| {
            Error::syntax(arity_tok.line, arity_tok.column, "operation table too large")
        })?;
        cur.keyword("values")?;
        let mut table = Vec::with_capacity(expected.min(1 << 20));
        while let Some(tok) = cur.peek() {
            if tok.text == "op" {
                break;
            }
            let (v, _) = cur.number("a table value")?;
            if v >= size as u64 {
                return Err(Error::OutOfRange {
                    symbol: sym_tok.text.to_string(),
                    value: v,
                    size,
                });
            }
            table.push(v as Elem);
        }
        if table.len() != expected {
            return Err(Error::TableLength {
                symbol: sym_tok.text.to_string(),
                expected,
                found: table.len(),
            });
        }
        symbols.push(Symbol::new(sym_tok.text, arity));
        tables.push(table);
    }
    Algebra::new(name, Signature::new(symbols)?, size, tables)
}
