//! Finite algebras stored as flat operation tables.
//!
//! The carrier of an algebra of size `n` is always `{0, .., n-1}`. The table of
//! an `r`-ary symbol has `n^r` entries; the arguments `(a1, .., ar)` live at
//! index `a1·n^(r-1) + .. + ar`, so the first argument is the most significant
//! digit.

use std::fmt;

use crate::error::{Error, Result};

/// Carrier element.
pub type Elem = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

impl Symbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Symbol {
            name: name.into(),
            arity,
        }
    }
}

/// An ordered list of operation symbols. Order is significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

fn valid_symbol_name(name: &str) -> bool {
    !name.is_empty()
        && !name
            .chars()
            .any(|c| c.is_whitespace() || c == '(' || c == ')' || c == '#')
}

impl Signature {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        for (i, s) in symbols.iter().enumerate() {
            if !valid_symbol_name(&s.name) {
                return Err(Error::Usage(format!("invalid symbol name {:?}", s.name)));
            }
            if symbols[..i].iter().any(|t| t.name == s.name) {
                return Err(Error::DuplicateSymbol(s.name.clone()));
            }
        }
        Ok(Signature { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, op: usize) -> Option<&Symbol> {
        self.symbols.get(op)
    }

    pub fn arity(&self, op: usize) -> usize {
        self.symbols[op].arity
    }

    pub fn name(&self, op: usize) -> &str {
        &self.symbols[op].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn max_arity(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Algebra {
    name: String,
    signature: Signature,
    size: usize,
    tables: Vec<Vec<Elem>>,
}

impl Algebra {
    pub fn new(
        name: impl Into<String>,
        signature: Signature,
        size: usize,
        tables: Vec<Vec<Elem>>,
    ) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Usage(format!("invalid algebra name {name:?}")));
        }
        if size == 0 {
            return Err(Error::Usage("algebra size must be positive".into()));
        }
        if tables.len() != signature.len() {
            return Err(Error::Usage(format!(
                "{} tables given for {} symbols",
                tables.len(),
                signature.len()
            )));
        }
        for (sym, table) in signature.symbols().iter().zip(&tables) {
            let expected = checked_pow(size, sym.arity).ok_or_else(|| {
                Error::Usage(format!("table for `{}` is too large", sym.name))
            })?;
            if table.len() != expected {
                return Err(Error::TableLength {
                    symbol: sym.name.clone(),
                    expected,
                    found: table.len(),
                });
            }
            if let Some(&v) = table.iter().find(|&&v| v as usize >= size) {
                return Err(Error::OutOfRange {
                    symbol: sym.name.clone(),
                    value: v as u64,
                    size,
                });
            }
        }
        Ok(Algebra {
            name,
            signature,
            size,
            tables,
        })
    }

    /// Builds an algebra by tabulating each operation from a closure.
    pub fn from_fn(
        name: impl Into<String>,
        signature: Signature,
        size: usize,
        mut f: impl FnMut(usize, &[Elem]) -> Elem,
    ) -> Result<Self> {
        let mut tables = Vec::with_capacity(signature.len());
        let mut args = Vec::new();
        for (op, sym) in signature.symbols().iter().enumerate() {
            let len = checked_pow(size, sym.arity)
                .ok_or_else(|| Error::Usage(format!("table for `{}` is too large", sym.name)))?;
            let mut table = Vec::with_capacity(len);
            for idx in 0..len {
                decode_args(idx, size, sym.arity, &mut args);
                table.push(f(op, &args));
            }
            tables.push(table);
        }
        Algebra::new(name, signature, size, tables)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Usage(format!("invalid algebra name {name:?}")));
        }
        self.name = name;
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn table(&self, op: usize) -> &[Elem] {
        &self.tables[op]
    }

    pub fn tables(&self) -> &[Vec<Elem>] {
        &self.tables
    }

    #[inline]
    pub fn apply(&self, op: usize, args: &[Elem]) -> Elem {
        let n = self.size;
        let idx = args.iter().fold(0usize, |acc, &a| acc * n + a as usize);
        self.tables[op][idx]
    }

    pub fn same_signature(&self, other: &Algebra) -> Result<()> {
        if self.signature == other.signature {
            Ok(())
        } else {
            Err(Error::SignatureMismatch(
                self.name.clone(),
                other.name.clone(),
            ))
        }
    }

    /// The direct product `self × other`; the pair `(a, b)` is element `a·|other| + b`.
    pub fn product(&self, other: &Algebra) -> Result<Algebra> {
        self.same_signature(other)?;
        let nb = other.size;
        let size = self
            .size
            .checked_mul(nb)
            .ok_or_else(|| Error::Usage("product too large".into()))?;
        let mut left = Vec::new();
        let mut right = Vec::new();
        Algebra::from_fn(
            format!("{}×{}", self.name, other.name),
            self.signature.clone(),
            size,
            |op, args| {
                left.clear();
                right.clear();
                for &x in args {
                    left.push(x / nb as Elem);
                    right.push(x % nb as Elem);
                }
                self.apply(op, &left) * nb as Elem + other.apply(op, &right)
            },
        )
    }

    /// True iff `universe` is closed under every operation (including the constants).
    pub fn is_subuniverse(&self, universe: &[Elem]) -> bool {
        let mut member = vec![false; self.size];
        for &u in universe {
            match member.get_mut(u as usize) {
                Some(m) => *m = true,
                None => return false,
            }
        }
        let mut args = Vec::new();
        for (op, sym) in self.signature.symbols().iter().enumerate() {
            let mut digits = vec![0usize; sym.arity];
            if universe.is_empty() && sym.arity > 0 {
                continue;
            }
            loop {
                args.clear();
                args.extend(digits.iter().map(|&d| universe[d]));
                if !member[self.apply(op, &args) as usize] {
                    return false;
                }
                if !advance(&mut digits, universe.len()) {
                    break;
                }
            }
        }
        true
    }

    /// Restriction to a subuniverse, renumbered in ascending element order.
    pub fn subalgebra(&self, universe: &[Elem]) -> Result<Algebra> {
        let mut sorted = universe.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() {
            return Err(Error::Precondition("subuniverse is empty".into()));
        }
        if let Some(&bad) = sorted.iter().find(|&&u| u as usize >= self.size) {
            return Err(Error::ElementOutOfRange {
                value: bad as u64,
                size: self.size,
            });
        }
        if !self.is_subuniverse(&sorted) {
            return Err(Error::Precondition(format!(
                "{sorted:?} is not a subuniverse of {}",
                self.name
            )));
        }
        let mut renumber = vec![u32::MAX; self.size];
        for (i, &u) in sorted.iter().enumerate() {
            renumber[u as usize] = i as Elem;
        }
        let mut lifted = Vec::new();
        Algebra::from_fn(
            format!("{}|sub", self.name),
            self.signature.clone(),
            sorted.len(),
            |op, args| {
                lifted.clear();
                lifted.extend(args.iter().map(|&a| sorted[a as usize]));
                renumber[self.apply(op, &lifted) as usize]
            },
        )
    }

    /// Appends operations to the signature, keeping the existing ones in place.
    pub fn expand(&self, extra: Vec<(Symbol, Vec<Elem>)>) -> Result<Algebra> {
        let mut symbols = self.signature.symbols().to_vec();
        let mut tables = self.tables.clone();
        for (sym, table) in extra {
            symbols.push(sym);
            tables.push(table);
        }
        Algebra::new(self.name.clone(), Signature::new(symbols)?, self.size, tables)
    }

    /// Parses the text format documented in the README.
    pub fn parse(text: &str) -> Result<Algebra> {
        crate::format::parse_algebra(text)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "algebra {}", self.name)?;
        writeln!(f, "size {}", self.size)?;
        for (sym, table) in self.signature.symbols().iter().zip(&self.tables) {
            writeln!(f, "op {} {}", sym.name, sym.arity)?;
            write!(f, "values")?;
            for v in table {
                write!(f, " {v}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Writes the base-`n` digits of `idx` (most significant first) into `out`.
pub(crate) fn decode_args(mut idx: usize, n: usize, arity: usize, out: &mut Vec<Elem>) {
    out.clear();
    out.resize(arity, 0);
    for slot in out.iter_mut().rev() {
        *slot = (idx % n) as Elem;
        idx /= n;
    }
}

/// Odometer step over `digits` in base `base`; false after the last tuple.
pub(crate) fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}
