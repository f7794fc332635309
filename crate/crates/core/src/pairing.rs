//! Pairing terms of independent algebras, constant expansions, and clone
//! sizes.
//!
//! If `t(x, y)` is `x` on `A` and `y` on `B`, then `u = t(r, s)` is `r` on
//! `A` and `s` on `B`, so every pair of `k`-ary term operations is realised
//! by a single term. With one constant symbol per element of `A × B` the same
//! works for polynomials.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::algebra::{Algebra, Elem, Symbol};
use crate::error::{Error, Result};
use crate::identities::{edge_violation, satisfies_identity};
use crate::independence::{check_oracle, verify_witness, Verdict, DEFAULT_LIMIT};
use crate::relations::all_tolerances_product;
use crate::subpower::{generate_subuniverse, ProductContext, TupleCode};
use crate::term::Term;

/// `u = t(r, s)`, checked to be `r` on `a` and `s` on `b`.
pub fn pair_terms(a: &Algebra, b: &Algebra, witness: &Term, r: &Term, s: &Term) -> Result<Term> {
    a.same_signature(b)?;
    for t in [witness, r, s] {
        t.check(a.signature())?;
    }
    if !verify_witness(a, b, witness)? {
        return Err(Error::Precondition(format!(
            "`{}` is not x on {} and y on {}",
            witness.display(a.signature()),
            a.name(),
            b.name()
        )));
    }
    let u = witness.substitute(&[r.clone(), s.clone()])?;
    if !satisfies_identity(a, &u, r)? || !satisfies_identity(b, &u, s)? {
        return Err(Error::Internal("paired term fails verification".into()));
    }
    Ok(u)
}

/// Name of the constant symbol for `(x, y) ∈ A × B`.
pub fn constant_symbol(x: Elem, y: Elem) -> String {
    format!("c_{x}_{y}")
}

/// `A*` and `B*`: the signature gains a nullary `c_x_y` for each
/// `(x, y) ∈ A × B`, read as `x` in `A*` and `y` in `B*`.
pub fn constant_expansion(a: &Algebra, b: &Algebra) -> Result<(Algebra, Algebra)> {
    a.same_signature(b)?;
    let mut extra_a = Vec::with_capacity(a.size() * b.size());
    let mut extra_b = Vec::with_capacity(a.size() * b.size());
    for x in 0..a.size() as Elem {
        for y in 0..b.size() as Elem {
            let sym = Symbol::new(constant_symbol(x, y), 0);
            extra_a.push((sym.clone(), vec![x]));
            extra_b.push((sym, vec![y]));
        }
    }
    Ok((a.expand(extra_a)?, b.expand(extra_b)?))
}

/// Optional inputs for [`pair_polynomials`].
#[derive(Debug, Clone)]
pub struct PairOptions {
    /// A `k`-edge term over the base signature, verified on both algebras.
    pub edge_term: Option<(Term, usize)>,
    /// Member limit for the witness search.
    pub limit: usize,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions { edge_term: None, limit: DEFAULT_LIMIT }
    }
}

type WitnessCache = Mutex<HashMap<(Algebra, Algebra), Term>>;

fn witness_cache() -> &'static WitnessCache {
    static CACHE: OnceLock<WitnessCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// A witness for the constant expansions of `(a, b)`, searched once per pair.
fn expanded_witness(a: &Algebra, b: &Algebra, a_star: &Algebra, b_star: &Algebra, limit: usize) -> Result<Term> {
    let key = (a.clone(), b.clone());
    if let Some(t) = witness_cache().lock().unwrap().get(&key) {
        return Ok(t.clone());
    }
    let report = check_oracle(a_star, b_star, limit)?;
    let t = match report.verdict {
        Verdict::Independent => report.witness.expect("independent oracle reports carry a witness"),
        Verdict::NotIndependent => {
            return Err(Error::Precondition(
                "the constant expansions are not independent".into(),
            ))
        }
        Verdict::Inconclusive { limit } => return Err(Error::LimitExceeded { limit }),
    };
    witness_cache().lock().unwrap().entry(key).or_insert_with(|| t.clone());
    Ok(t)
}

/// A term `h` over the expanded signature with `h = pf` on `A*` and
/// `h = pg` on `B*`.
///
/// Requires every tolerance of `A × B` to be a product tolerance, and the
/// supplied edge term (if any) to hold in both algebras.
pub fn pair_polynomials(a: &Algebra, b: &Algebra, pf: &Term, pg: &Term, opts: &PairOptions) -> Result<Term> {
    a.same_signature(b)?;
    if let Some((t, k)) = &opts.edge_term {
        for alg in [a, b] {
            t.check(alg.signature())?;
            if let Some(f) = edge_violation(alg, t, *k)? {
                return Err(Error::Precondition(format!("not a {k}-edge term on {}: {f}", alg.name())));
            }
        }
    }
    if let Some(failure) = all_tolerances_product(a, b)? {
        let [p, q] = failure.seeds;
        return Err(Error::Precondition(format!(
            "the tolerance of {}×{} generated by {:?} and {:?} is not a product",
            a.name(),
            b.name(),
            p,
            q
        )));
    }
    let (a_star, b_star) = constant_expansion(a, b)?;
    let witness = expanded_witness(a, b, &a_star, &b_star, opts.limit)?;
    pair_terms(&a_star, &b_star, &witness, pf, pg)
}

/// `|Clo_k(alg)|`: the size of the subalgebra of `alg^{n^k}` generated by
/// the `k` projections.
pub fn clone_size(alg: &Algebra, k: usize, limit: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::Usage("clone_size needs k >= 1".into()));
    }
    let n = alg.size();
    let coords = crate::algebra::checked_pow(n, k).ok_or_else(|| Error::CodingOverflow {
        what: format!("{n}^{k} coordinates"),
    })?;
    let ctx = ProductContext::new(alg, alg, coords, 0)?;
    let mut digits = vec![0 as Elem; k];
    let mut projections = vec![Vec::with_capacity(coords); k];
    for j in 0..coords {
        crate::algebra::decode_args(j, n, k, &mut digits);
        for (i, p) in projections.iter_mut().enumerate() {
            p.push(digits[i]);
        }
    }
    let gens: Vec<TupleCode> = projections.iter().map(|p| ctx.encode(p)).collect::<Result<_>>()?;
    let res = generate_subuniverse(&ctx, &gens, limit)?;
    if res.truncated() {
        return Err(Error::LimitExceeded { limit });
    }
    Ok(res.len())
}
