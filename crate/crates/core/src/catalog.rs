//! Small standard algebras and terms used by the tests, benchmarks and docs.

use crate::algebra::{Algebra, Elem, Signature, Symbol};
use crate::term::Term;

/// Signature `{+/2}`.
pub fn group_signature() -> Signature {
    Signature::new(vec![Symbol::new("+", 2)]).unwrap()
}

/// `Z_n` under addition.
pub fn cyclic_group(n: usize) -> Algebra {
    Algebra::from_fn(format!("Z{n}"), group_signature(), n, |_, a| {
        (a[0] + a[1]) % n as Elem
    })
    .unwrap()
}

/// `Z_n` expanded by unary operations `f1, f2, ..` given as value lists.
pub fn cyclic_group_with_unaries(n: usize, unaries: &[Vec<Elem>]) -> Algebra {
    let mut symbols = vec![Symbol::new("+", 2)];
    symbols.extend((0..unaries.len()).map(|i| Symbol::new(format!("f{}", i + 1), 1)));
    let mut tables = cyclic_group(n).tables().to_vec();
    tables.extend(unaries.iter().cloned());
    Algebra::new(format!("Z{n}"), Signature::new(symbols).unwrap(), n, tables).unwrap()
}

/// Signature `{meet/2, join/2}`.
pub fn lattice_signature() -> Signature {
    Signature::new(vec![Symbol::new("meet", 2), Symbol::new("join", 2)]).unwrap()
}

/// The chain `0 < 1 < .. < n-1` as a lattice.
pub fn chain(n: usize) -> Algebra {
    Algebra::from_fn(format!("C{n}"), lattice_signature(), n, |op, a| match op {
        0 => a[0].min(a[1]),
        _ => a[0].max(a[1]),
    })
    .unwrap()
}

/// The two-element lattice.
pub fn lattice2() -> Algebra {
    chain(2).with_name("L2").unwrap()
}

/// The one-element algebra of the given signature.
pub fn trivial(sig: &Signature) -> Algebra {
    Algebra::from_fn("T1", sig.clone(), 1, |_, _| 0).unwrap()
}

/// Signature `{m/3, t/2}`.
pub fn majority_projection_signature() -> Signature {
    Signature::new(vec![Symbol::new("m", 3), Symbol::new("t", 2)]).unwrap()
}

/// `({0,1}, majority, t)` where `t` is the first projection if `first`, else the second.
pub fn majority_projection(first: bool) -> Algebra {
    let name = if first { "MP1" } else { "MP2" };
    Algebra::from_fn(name, majority_projection_signature(), 2, |op, a| match op {
        0 => {
            if a[0] == a[1] || a[0] == a[2] {
                a[0]
            } else {
                a[1]
            }
        }
        _ => {
            if first {
                a[0]
            } else {
                a[1]
            }
        }
    })
    .unwrap()
}

/// `c0·x0 + c1·x1 + ..` written with the binary symbol `plus`, balanced
/// left to right. Variables with coefficient 0 are left out; at least one
/// coefficient must be positive.
pub fn linear_term(plus: usize, coeffs: &[usize]) -> Term {
    let mut summands = Vec::new();
    for (i, &c) in coeffs.iter().enumerate() {
        summands.extend(std::iter::repeat_n(Term::var(i), c));
    }
    let mut iter = summands.into_iter();
    let first = iter.next().expect("linear_term needs a positive coefficient");
    iter.fold(first, |acc, t| Term::app(plus, vec![acc, t]))
}

/// `x0 + c·x1 + x2` with `c ≡ -1` modulo every group order in question.
pub fn group_malcev(minus_one: usize) -> Term {
    linear_term(0, &[1, minus_one, 1])
}

/// `(x0 ∧ x1) ∨ (x1 ∧ x2) ∨ (x0 ∧ x2)` over [`lattice_signature`].
pub fn lattice_majority() -> Term {
    let meet = |a, b| Term::app(0, vec![Term::var(a), Term::var(b)]);
    let join = |a, b| Term::app(1, vec![a, b]);
    join(join(meet(0, 1), meet(1, 2)), meet(0, 2))
}
