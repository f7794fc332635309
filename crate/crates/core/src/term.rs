//! Terms over a signature, their s-expression syntax and evaluation.
//!
//! Syntax: `TERM := 'x' INDEX | '(' SYMBOL TERM* ')'`, e.g. `(+ x0 (+ x0 x1))`.
//! Subterms are reference counted, so terms produced by derivation replay
//! share structure and stay linear in the size of the derivation.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use crate::algebra::{checked_pow, Algebra, Elem, Signature};
use crate::error::{Error, Result};

/// Largest number of assignments a term table may have.
const MAX_TABLE: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    App { op: usize, args: Arc<[Term]> },
}

impl Term {
    pub fn var(index: usize) -> Term {
        Term::Var(index)
    }

    pub fn app(op: usize, args: Vec<Term>) -> Term {
        Term::App {
            op,
            args: args.into(),
        }
    }

    /// Resolves the symbol by name and checks its arity.
    pub fn apply(sig: &Signature, name: &str, args: Vec<Term>) -> Result<Term> {
        let op = sig
            .index_of(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        if sig.arity(op) != args.len() {
            return Err(Error::ArityMismatch {
                symbol: name.to_string(),
                arity: sig.arity(op),
                given: args.len(),
            });
        }
        Ok(Term::app(op, args))
    }

    /// One more than the largest variable index, 0 for ground terms.
    pub fn width(&self) -> usize {
        let mut seen = HashMap::new();
        self.width_memo(&mut seen)
    }

    fn width_memo(&self, seen: &mut HashMap<(usize, usize), usize>) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::App { op, args } => {
                let key = (args.as_ptr() as usize, *op);
                if let Some(&w) = seen.get(&key) {
                    return w;
                }
                let w = args.iter().map(|t| t.width_memo(seen)).max().unwrap_or(0);
                seen.insert(key, w);
                w
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App { args, .. } => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Number of nodes of the term written out as a tree (saturating).
    pub fn tree_size(&self) -> u64 {
        match self {
            Term::Var(_) => 1,
            Term::App { args, .. } => args
                .iter()
                .fold(1u64, |acc, t| acc.saturating_add(t.tree_size())),
        }
    }

    /// Checks that every symbol exists in `sig` with the right number of arguments.
    pub fn check(&self, sig: &Signature) -> Result<()> {
        match self {
            Term::Var(_) => Ok(()),
            Term::App { op, args } => {
                let sym = sig
                    .symbol(*op)
                    .ok_or_else(|| Error::UnknownSymbol(format!("#{op}")))?;
                if sym.arity != args.len() {
                    return Err(Error::ArityMismatch {
                        symbol: sym.name.clone(),
                        arity: sym.arity,
                        given: args.len(),
                    });
                }
                args.iter().try_for_each(|t| t.check(sig))
            }
        }
    }

    /// Replaces variable `i` by `subs[i]`.
    pub fn substitute(&self, subs: &[Term]) -> Result<Term> {
        let width = self.width();
        if width > subs.len() {
            return Err(Error::Width {
                width,
                max: subs.len(),
            });
        }
        let mut memo = HashMap::new();
        Ok(self.subst_memo(subs, &mut memo))
    }

    fn subst_memo(&self, subs: &[Term], memo: &mut HashMap<(usize, usize), Term>) -> Term {
        match self {
            Term::Var(i) => subs[*i].clone(),
            Term::App { op, args } => {
                let key = (args.as_ptr() as usize, *op);
                if let Some(t) = memo.get(&key) {
                    return t.clone();
                }
                let t = Term::app(*op, args.iter().map(|a| a.subst_memo(subs, memo)).collect());
                memo.insert(key, t.clone());
                t
            }
        }
    }

    /// Bottom-up evaluation at one assignment.
    pub fn eval(&self, alg: &Algebra, assignment: &[Elem]) -> Result<Elem> {
        self.check(alg.signature())?;
        let width = self.width();
        if assignment.len() < width {
            return Err(Error::AssignmentTooShort {
                needed: width,
                given: assignment.len(),
            });
        }
        if let Some(&v) = assignment.iter().find(|&&v| v as usize >= alg.size()) {
            return Err(Error::ElementOutOfRange {
                value: v as u64,
                size: alg.size(),
            });
        }
        Ok(self.eval_unchecked(alg, assignment))
    }

    pub(crate) fn eval_unchecked(&self, alg: &Algebra, assignment: &[Elem]) -> Elem {
        match self {
            Term::Var(i) => assignment[*i],
            Term::App { op, args } => {
                let vals: Vec<Elem> = args
                    .iter()
                    .map(|t| t.eval_unchecked(alg, assignment))
                    .collect();
                alg.apply(*op, &vals)
            }
        }
    }

    /// The term function as a table over all `n^arity` assignments, first
    /// variable most significant. `arity` must be at least the width.
    pub fn table(&self, alg: &Algebra, arity: usize) -> Result<Vec<Elem>> {
        self.check(alg.signature())?;
        let width = self.width();
        if width > arity {
            return Err(Error::Width { width, max: arity });
        }
        let len = checked_pow(alg.size(), arity)
            .filter(|&l| l <= MAX_TABLE)
            .ok_or_else(|| Error::Width {
                width: arity,
                max: (MAX_TABLE as f64).log(alg.size().max(2) as f64) as usize,
            })?;
        let mut memo = HashMap::new();
        let out = self.table_memo(alg, arity, len, &mut memo);
        Ok(Rc::try_unwrap(out).unwrap_or_else(|rc| (*rc).clone()))
    }

    fn table_memo(
        &self,
        alg: &Algebra,
        arity: usize,
        len: usize,
        memo: &mut HashMap<(usize, usize), Rc<Vec<Elem>>>,
    ) -> Rc<Vec<Elem>> {
        match self {
            Term::Var(i) => {
                let n = alg.size();
                let stride = checked_pow(n, arity - 1 - i).unwrap();
                Rc::new((0..len).map(|idx| ((idx / stride) % n) as Elem).collect())
            }
            Term::App { op, args } => {
                let key = (args.as_ptr() as usize, *op);
                if let Some(t) = memo.get(&key) {
                    return t.clone();
                }
                let children: Vec<Rc<Vec<Elem>>> = args
                    .iter()
                    .map(|a| a.table_memo(alg, arity, len, memo))
                    .collect();
                let mut buf = vec![0; children.len()];
                let table: Vec<Elem> = (0..len)
                    .map(|idx| {
                        for (slot, c) in buf.iter_mut().zip(&children) {
                            *slot = c[idx];
                        }
                        alg.apply(*op, &buf)
                    })
                    .collect();
                let table = Rc::new(table);
                memo.insert(key, table.clone());
                table
            }
        }
    }

    pub fn parse(text: &str, sig: &Signature) -> Result<Term> {
        let mut p = TermParser::new(text);
        let t = p.term(sig)?;
        p.skip_ws();
        if let Some(c) = p.peek() {
            let (line, column) = p.position();
            return Err(Error::syntax(line, column, format!("unexpected `{c}` after term")));
        }
        Ok(t)
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> TermDisplay<'a> {
        TermDisplay { term: self, sig }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(i) => write!(f, "x{i}"),
            Term::App { op, args } => {
                match self.sig.symbol(*op) {
                    Some(s) => write!(f, "({}", s.name)?,
                    None => write!(f, "(#{op}")?,
                }
                for a in args.iter() {
                    write!(f, " {}", a.display(self.sig))?;
                }
                write!(f, ")")
            }
        }
    }
}

struct TermParser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> TermParser<'a> {
    fn new(text: &'a str) -> Self {
        TermParser { text, pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn position(&self) -> (usize, usize) {
        let before = &self.text[..self.pos];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().unwrap_or("").chars().count() + 1;
        (line, column)
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        let (line, column) = self.position();
        Error::syntax(line, column, msg)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn atom(&mut self) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || c == '(' || c == ')' {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.text[start..self.pos]
    }

    fn term(&mut self, sig: &Signature) -> Result<Term> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("unexpected end of term")),
            Some(')') => Err(self.error("unexpected `)`")),
            Some('(') => {
                self.pos += 1;
                self.skip_ws();
                let at = self.position();
                let name = self.atom();
                if name.is_empty() {
                    return Err(self.error("expected an operation symbol"));
                }
                let op = sig.index_of(name).ok_or_else(|| {
                    Error::syntax(at.0, at.1, format!("unknown symbol `{name}`"))
                })?;
                let mut args = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(')') => {
                            self.pos += 1;
                            break;
                        }
                        None => return Err(self.error("missing `)`")),
                        _ => args.push(self.term(sig)?),
                    }
                }
                if args.len() != sig.arity(op) {
                    return Err(Error::syntax(
                        at.0,
                        at.1,
                        format!(
                            "`{name}` has arity {} but was given {} arguments",
                            sig.arity(op),
                            args.len()
                        ),
                    ));
                }
                Ok(Term::app(op, args))
            }
            Some(_) => {
                let at = self.position();
                let word = self.atom();
                word.strip_prefix('x')
                    .and_then(|d| {
                        (!d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                            .then(|| d.parse::<usize>().ok())
                            .flatten()
                    })
                    .map(Term::Var)
                    .ok_or_else(|| {
                        Error::syntax(at.0, at.1, format!("expected a variable like x0, found `{word}`"))
                    })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::cyclic_group;

    #[test]
    fn eval_examples() {
        let z3 = cyclic_group(3);
        let t = Term::parse("(+ x0 x0)", z3.signature()).unwrap();
        assert_eq!(t.eval(&z3, &[2]).unwrap(), 1);

        let z2 = cyclic_group(2);
        assert_eq!(Term::var(1).eval(&z2, &[0, 1]).unwrap(), 1);

        let z4 = cyclic_group(4);
        let t = Term::parse("(+ (+ x0 x0) x1)", z4.signature()).unwrap();
        assert_eq!(t.eval(&z4, &[3, 2]).unwrap(), 0);
    }

    #[test]
    fn eval_errors() {
        let z2 = cyclic_group(2);
        let t = Term::parse("(+ x0 x3)", z2.signature()).unwrap();
        assert_eq!(
            t.eval(&z2, &[0, 1]),
            Err(Error::AssignmentTooShort { needed: 4, given: 2 })
        );
        let bogus = Term::app(5, vec![]);
        assert!(matches!(bogus.eval(&z2, &[]), Err(Error::UnknownSymbol(_))));
    }

    #[test]
    fn parse_and_print() {
        let z2 = cyclic_group(2);
        let sig = z2.signature();
        let text = "(+ x0 (+ x0 x1))";
        let t = Term::parse(text, sig).unwrap();
        assert_eq!(t.display(sig).to_string(), text);
        assert_eq!(t.width(), 2);
        assert_eq!(t.depth(), 2);
        assert_eq!(Term::parse("  x12 ", sig).unwrap(), Term::Var(12));
    }

    #[test]
    fn parse_errors() {
        let sig = cyclic_group(2).signature().clone();
        for bad in ["(+ x0)", "(* x0 x1)", "(+ x0 x1", "y0", "x", "(+ x0 x1) x2", ")", ""] {
            assert!(
                matches!(Term::parse(bad, &sig), Err(Error::Syntax { .. })),
                "{bad:?} should not parse"
            );
        }
    }

    #[test]
    fn table_matches_pointwise_eval() {
        let z3 = cyclic_group(3);
        let t = Term::parse("(+ x1 (+ x0 (+ x2 x2)))", z3.signature()).unwrap();
        let table = t.table(&z3, 3).unwrap();
        for (idx, &v) in table.iter().enumerate() {
            let a = [(idx / 9) as u32, ((idx / 3) % 3) as u32, (idx % 3) as u32];
            assert_eq!(v, t.eval(&z3, &a).unwrap());
        }
        assert!(t.table(&z3, 2).is_err());
    }

    #[test]
    fn substitution_shares_structure() {
        let z2 = cyclic_group(2);
        let sig = z2.signature();
        let t = Term::parse("(+ x0 x1)", sig).unwrap();
        let r = Term::parse("(+ x1 x1)", sig).unwrap();
        let u = t.substitute(&[r.clone(), Term::var(0)]).unwrap();
        assert_eq!(u.display(sig).to_string(), "(+ (+ x1 x1) x0)");
        assert!(t.substitute(&[r]).is_err());
    }
}
