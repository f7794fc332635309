//! Identity checking by exhaustive evaluation, and the edge / parallelogram
//! term conditions written out as explicit row patterns.

use std::fmt;

use crate::algebra::{Algebra, Elem};
use crate::error::{Error, Result};
use crate::term::Term;

/// A variable of an identity row pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    X,
    Y,
    Z,
}

impl Slot {
    fn var(self) -> Term {
        Term::var(match self {
            Slot::X => 0,
            Slot::Y => 1,
            Slot::Z => 2,
        })
    }

    fn letter(self) -> char {
        match self {
            Slot::X => 'x',
            Slot::Y => 'y',
            Slot::Z => 'z',
        }
    }
}

/// Rows of the `k`-edge identities; each row has `k+1` entries and must evaluate to `y`.
///
/// Row 1 is `x x y .. y`, row 2 is `x y x y .. y`, and row `i >= 3` is all `y`
/// except an `x` in column `i+1`.
pub fn edge_rows(k: usize) -> Vec<Vec<Slot>> {
    assert!(k >= 2, "edge terms need k >= 2");
    (1..=k)
        .map(|i| {
            (1..=k + 1)
                .map(|col| {
                    let is_x = (col == 1 && i <= 2) || col == i + 1;
                    if is_x {
                        Slot::X
                    } else {
                        Slot::Y
                    }
                })
                .collect()
        })
        .collect()
}

/// Rows of the `(1,k-1)`-parallelogram identities; `k+3` entries each, all
/// evaluating to `y`.
///
/// Row 1 is `x x y z y .. y`. Row `i >= 2` starts with `y x x y` and carries a
/// single `z` in column `i+3`.
pub fn parallelogram_rows(k: usize) -> Vec<Vec<Slot>> {
    assert!(k >= 2, "parallelogram terms need k >= 2");
    (1..=k)
        .map(|i| {
            let mut row = vec![Slot::Y; k + 3];
            if i == 1 {
                row[0] = Slot::X;
                row[1] = Slot::X;
                row[3] = Slot::Z;
            } else {
                row[1] = Slot::X;
                row[2] = Slot::X;
                row[i + 2] = Slot::Z;
            }
            row
        })
        .collect()
}

/// A failed identity together with the assignment that breaks it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityFailure {
    pub identity: String,
    pub assignment: Vec<(char, Elem)>,
}

impl fmt::Display for IdentityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails at", self.identity)?;
        for (i, (v, a)) in self.assignment.iter().enumerate() {
            let sep = if i == 0 { " " } else { ", " };
            write!(f, "{sep}{v}={a}")?;
        }
        Ok(())
    }
}

/// First assignment (in table order) where `s` and `t` disagree on `alg`.
pub fn identity_violation(alg: &Algebra, s: &Term, t: &Term) -> Result<Option<Vec<Elem>>> {
    identity_violation_width(alg, s, t, s.width().max(t.width()))
}

/// True iff `alg ⊨ s ≈ t`, checked over all assignments.
pub fn satisfies_identity(alg: &Algebra, s: &Term, t: &Term) -> Result<bool> {
    Ok(identity_violation(alg, s, t)?.is_none())
}

fn pattern_violation(
    alg: &Algebra,
    t: &Term,
    rows: &[Vec<Slot>],
    name: &str,
) -> Result<Option<IdentityFailure>> {
    let vars = if rows.iter().flatten().any(|&s| s == Slot::Z) {
        &[Slot::X, Slot::Y, Slot::Z][..]
    } else {
        &[Slot::X, Slot::Y][..]
    };
    for row in rows {
        let lhs = t.substitute(&row.iter().map(|s| s.var()).collect::<Vec<_>>())?;
        if let Some(args) = identity_violation_width(alg, &lhs, &Slot::Y.var(), vars.len())? {
            let pattern: String = row.iter().map(|s| s.letter().to_string()).collect::<Vec<_>>().join(",");
            return Ok(Some(IdentityFailure {
                identity: format!("{name}({pattern}) ≈ y"),
                assignment: vars.iter().map(|s| s.letter()).zip(args).collect(),
            }));
        }
    }
    Ok(None)
}

fn identity_violation_width(
    alg: &Algebra,
    s: &Term,
    t: &Term,
    width: usize,
) -> Result<Option<Vec<Elem>>> {
    let ls = s.table(alg, width)?;
    let lt = t.table(alg, width)?;
    Ok(ls.iter().zip(&lt).position(|(a, b)| a != b).map(|idx| {
        let mut args = Vec::new();
        crate::algebra::decode_args(idx, alg.size(), width, &mut args);
        args
    }))
}

fn check_width(t: &Term, max: usize) -> Result<()> {
    let width = t.width();
    if width > max {
        return Err(Error::Width { width, max });
    }
    Ok(())
}

pub fn edge_violation(alg: &Algebra, t: &Term, k: usize) -> Result<Option<IdentityFailure>> {
    if k < 2 {
        return Err(Error::Usage("edge terms need k >= 2".into()));
    }
    check_width(t, k + 1)?;
    pattern_violation(alg, t, &edge_rows(k), "t")
}

/// True iff `t` satisfies the `k`-edge identities on `alg`.
pub fn verify_edge_term(alg: &Algebra, t: &Term, k: usize) -> Result<bool> {
    Ok(edge_violation(alg, t, k)?.is_none())
}

pub fn parallelogram_violation(
    alg: &Algebra,
    p: &Term,
    k: usize,
) -> Result<Option<IdentityFailure>> {
    if k < 2 {
        return Err(Error::Usage("parallelogram terms need k >= 2".into()));
    }
    check_width(p, k + 3)?;
    pattern_violation(alg, p, &parallelogram_rows(k), "p")
}

/// True iff `p` satisfies the `(1,k-1)`-parallelogram identities on `alg`.
pub fn verify_parallelogram_term(alg: &Algebra, p: &Term, k: usize) -> Result<bool> {
    Ok(parallelogram_violation(alg, p, k)?.is_none())
}

/// Checks `d(x,x,y) ≈ y ≈ d(y,x,x)`.
pub fn malcev_violation(alg: &Algebra, d: &Term) -> Result<Option<IdentityFailure>> {
    check_width(d, 3)?;
    use Slot::*;
    pattern_violation(alg, d, &[vec![X, X, Y], vec![Y, X, X]], "d")
}

/// Checks `m(x,x,y) ≈ m(x,y,x) ≈ m(y,x,x) ≈ x`, written with the roles of
/// `x` and `y` swapped so that every row evaluates to `y`.
pub fn majority_violation(alg: &Algebra, m: &Term) -> Result<Option<IdentityFailure>> {
    check_width(m, 3)?;
    use Slot::*;
    pattern_violation(
        alg,
        m,
        &[vec![Y, Y, X], vec![Y, X, Y], vec![X, Y, Y]],
        "m",
    )
}

/// Turns a Mal'cev term `d` into a `k`-edge term for `k ∈ {2, 3}`:
/// `t(x1,x2,x3) = d(x2,x1,x3)` resp. `e(x1,..,x4) = d(x2,x1,x3)`.
pub fn malcev_to_edge(d: &Term, k: usize) -> Result<Term> {
    check_width(d, 3)?;
    if k != 2 && k != 3 {
        return Err(Error::Usage(format!("malcev_to_edge supports k = 2 or 3, got {k}")));
    }
    d.substitute(&[Term::var(1), Term::var(0), Term::var(2)])
}

/// The 3-edge term `e(x1,x2,x3,x4) = m(x2,x3,x4)` of a majority term `m`.
pub fn majority_to_edge(m: &Term) -> Result<Term> {
    check_width(m, 3)?;
    m.substitute(&[Term::var(1), Term::var(2), Term::var(3)])
}

/// Inverse of [`malcev_to_edge`] for `k = 2`: `d(x1,x2,x3) = t(x2,x1,x3)`.
pub fn edge2_to_malcev(t: &Term) -> Result<Term> {
    check_width(t, 3)?;
    t.substitute(&[Term::var(1), Term::var(0), Term::var(2)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::*;
    use Slot::*;

    #[test]
    fn edge_rows_by_hand() {
        assert_eq!(edge_rows(2), vec![vec![X, X, Y], vec![X, Y, X]]);
        assert_eq!(
            edge_rows(3),
            vec![vec![X, X, Y, Y], vec![X, Y, X, Y], vec![Y, Y, Y, X]]
        );
        assert_eq!(
            edge_rows(4),
            vec![
                vec![X, X, Y, Y, Y],
                vec![X, Y, X, Y, Y],
                vec![Y, Y, Y, X, Y],
                vec![Y, Y, Y, Y, X],
            ]
        );
    }

    #[test]
    fn parallelogram_rows_by_hand() {
        assert_eq!(
            parallelogram_rows(2),
            vec![vec![X, X, Y, Z, Y], vec![Y, X, X, Y, Z]]
        );
        assert_eq!(
            parallelogram_rows(3),
            vec![
                vec![X, X, Y, Z, Y, Y],
                vec![Y, X, X, Y, Z, Y],
                vec![Y, X, X, Y, Y, Z],
            ]
        );
        assert_eq!(
            parallelogram_rows(4),
            vec![
                vec![X, X, Y, Z, Y, Y, Y],
                vec![Y, X, X, Y, Z, Y, Y],
                vec![Y, X, X, Y, Y, Z, Y],
                vec![Y, X, X, Y, Y, Y, Z],
            ]
        );
    }

    fn parse(alg: &Algebra, s: &str) -> Term {
        Term::parse(s, alg.signature()).unwrap()
    }

    #[test]
    fn identity_examples() {
        let z2 = cyclic_group(2);
        assert!(satisfies_identity(&z2, &parse(&z2, "(+ x0 x0)"), &parse(&z2, "(+ x1 x1)")).unwrap());
        let z3 = cyclic_group(3);
        // 3x is 0 on Z3, not x; four summands bring x back.
        let thrice = parse(&z3, "(+ x0 (+ x0 x0))");
        assert_eq!(identity_violation(&z3, &Term::var(0), &thrice).unwrap(), Some(vec![1]));
        let four = parse(&z3, "(+ x0 (+ x0 (+ x0 x0)))");
        assert!(satisfies_identity(&z3, &Term::var(0), &four).unwrap());
        let z4 = cyclic_group(4);
        let thrice = parse(&z4, "(+ x0 (+ x0 x0))");
        assert!(!satisfies_identity(&z4, &Term::var(0), &thrice).unwrap());
        assert_eq!(identity_violation(&z4, &Term::var(0), &thrice).unwrap(), Some(vec![1]));
    }

    #[test]
    fn edge_examples() {
        let z3 = cyclic_group(3);
        assert!(verify_edge_term(&z3, &linear_term(0, &[2, 1, 1]), 2).unwrap());
        let sum = linear_term(0, &[1, 1, 1]);
        assert!(verify_edge_term(&cyclic_group(2), &sum, 2).unwrap());
        let z4 = cyclic_group(4);
        let failure = edge_violation(&z4, &sum, 2).unwrap().unwrap();
        // Both rows fail (2x+y ≠ y); the scan reports the first row.
        assert_eq!(failure.identity, "t(x,x,y) ≈ y");
        assert_eq!(failure.assignment, vec![('x', 1), ('y', 0)]);
        let row2 = linear_term(0, &[2, 1]);
        assert!(!satisfies_identity(&z4, &row2, &Term::var(1)).unwrap());
        assert!(matches!(
            verify_edge_term(&z4, &linear_term(0, &[1, 1, 1, 1]), 2),
            Err(Error::Width { width: 4, max: 3 })
        ));
    }

    #[test]
    fn parallelogram_examples() {
        let z2 = cyclic_group(2);
        let t = trivial(z2.signature());
        let p5 = linear_term(0, &[1, 1, 1, 1, 1]);
        assert!(verify_parallelogram_term(&t, &p5, 2).unwrap());
        assert!(!verify_parallelogram_term(&z2, &p5, 2).unwrap());

        // p(x1..x5) = d(x1,x2,x3) with d = x + 2y + z on Z3: checked over all 27 triples.
        let z3 = cyclic_group(3);
        let p = linear_term(0, &[1, 2, 1]);
        assert!(verify_parallelogram_term(&z3, &p, 2).unwrap());
        // x1 + x2 + x3 is not one: row 1 gives 2x + y.
        assert!(!verify_parallelogram_term(&z3, &linear_term(0, &[1, 1, 1]), 2).unwrap());
        assert!(verify_parallelogram_term(&z3, &linear_term(0, &[1; 6]), 2).is_err());
    }

    #[test]
    fn malcev_to_edge_examples() {
        let z3 = cyclic_group(3);
        let d = linear_term(0, &[1, 2, 1]);
        let t = malcev_to_edge(&d, 2).unwrap();
        assert!(satisfies_identity(&z3, &t, &linear_term(0, &[2, 1, 1])).unwrap());
        assert!(verify_edge_term(&z3, &t, 2).unwrap());

        let z2 = cyclic_group(2);
        let e = malcev_to_edge(&linear_term(0, &[1, 1, 1]), 3).unwrap();
        assert!(satisfies_identity(&z2, &e, &linear_term(0, &[1, 1, 1])).unwrap());
        assert!(verify_edge_term(&z2, &e, 3).unwrap());

        let not_malcev = malcev_to_edge(&Term::var(0), 2).unwrap();
        assert!(!verify_edge_term(&z2, &not_malcev, 2).unwrap());
        assert!(malcev_to_edge(&Term::var(3), 2).is_err());
        assert!(malcev_to_edge(&d, 4).is_err());
    }

    #[test]
    fn majority_to_edge_examples() {
        let l2 = lattice2();
        let m = lattice_majority();
        assert!(majority_violation(&l2, &m).unwrap().is_none());
        let e = majority_to_edge(&m).unwrap();
        assert!(verify_edge_term(&l2, &e, 3).unwrap());

        let middle = majority_to_edge(&Term::var(1)).unwrap();
        let failure = edge_violation(&l2, &middle, 3).unwrap().unwrap();
        // Row 1 passes (x3 = y there); row 2 puts x in the middle argument.
        assert_eq!(failure.identity, "t(x,y,x,y) ≈ y");

        let t = trivial(l2.signature());
        assert!(verify_edge_term(&t, &middle, 3).unwrap());
    }

    #[test]
    fn malcev_check_names_identity() {
        let z2 = cyclic_group(2);
        let f = malcev_violation(&z2, &Term::var(0)).unwrap().unwrap();
        assert_eq!(f.to_string(), "d(x,x,y) ≈ y fails at x=0, y=1");
        assert!(malcev_violation(&z2, &group_malcev(1)).unwrap().is_none());
    }
}
