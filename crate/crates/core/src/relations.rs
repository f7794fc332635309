//! Tolerances and congruences of finite algebras, with product-decomposition
//! tests for relations on a binary product `E × F`.
//!
//! Elements of `E × F` are coded as `e·|F| + f`, matching [`Algebra::product`].
//!
//! # Two-generated reduction
//!
//! Every tolerance of `E × F` is a product tolerance iff for all pairs
//! `p, q ∈ (E×F)²` the tolerance generated by `{p, q}` contains both
//! recombinations `mixed(p, q)` and `mixed(q, p)` (the `E`-parts of one pair
//! with the `F`-parts of the other). Necessity is immediate. For sufficiency,
//! a tolerance `γ` with `p, q ∈ γ` contains `Tg(p, q)` and hence both
//! recombinations; a reflexive relation closed under recombination is the
//! product of its two projections. The same argument works for congruences.

use rayon::prelude::*;

use crate::algebra::{Algebra, Elem};
use crate::error::{Error, Result};
use crate::subpower::{generate_subuniverse, ProductContext, TupleCode};
use std::collections::BTreeSet;
use std::fmt;

/// A binary relation on `{0..size-1}`, stored as a dense bitmap.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinRel {
    size: usize,
    bits: Vec<bool>,
}

impl BinRel {
    pub fn empty(size: usize) -> Self {
        BinRel { size, bits: vec![false; size * size] }
    }

    pub fn diagonal(size: usize) -> Self {
        let mut r = Self::empty(size);
        for x in 0..size as Elem {
            r.insert(x, x);
        }
        r
    }

    pub fn full(size: usize) -> Self {
        BinRel { size, bits: vec![true; size * size] }
    }

    pub fn from_pairs(size: usize, pairs: impl IntoIterator<Item = (Elem, Elem)>) -> Result<Self> {
        let mut r = Self::empty(size);
        for (x, y) in pairs {
            for v in [x, y] {
                if v as usize >= size {
                    return Err(Error::ElementOutOfRange { value: v as u64, size });
                }
            }
            r.insert(x, y);
        }
        Ok(r)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, x: Elem, y: Elem) -> bool {
        self.bits[x as usize * self.size + y as usize]
    }

    /// Returns true if the pair was new.
    pub fn insert(&mut self, x: Elem, y: Elem) -> bool {
        let slot = &mut self.bits[x as usize * self.size + y as usize];
        !std::mem::replace(slot, true)
    }

    /// Pairs in ascending order.
    pub fn pairs(&self) -> impl Iterator<Item = (Elem, Elem)> + '_ {
        let n = self.size;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| ((i / n) as Elem, (i % n) as Elem))
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_subset(&self, other: &BinRel) -> bool {
        self.size == other.size && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn transpose(&self) -> BinRel {
        let mut t = Self::empty(self.size);
        for (x, y) in self.pairs() {
            t.insert(y, x);
        }
        t
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.size as Elem).all(|x| self.contains(x, x))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().all(|(x, y)| self.contains(y, x))
    }

    pub fn is_transitive(&self) -> bool {
        let n = self.size as Elem;
        self.pairs()
            .all(|(x, y)| (0..n).all(|z| !self.contains(y, z) || self.contains(x, z)))
    }

    /// Closed under every operation of `alg`, applied coordinatewise.
    pub fn is_compatible(&self, alg: &Algebra) -> bool {
        if alg.size() != self.size {
            return false;
        }
        let pairs: Vec<(Elem, Elem)> = self.pairs().collect();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for op in 0..alg.signature().len() {
            let r = alg.signature().arity(op);
            if r > 0 && pairs.is_empty() {
                continue;
            }
            let mut idx = vec![0usize; r];
            loop {
                xs.clear();
                ys.clear();
                for &j in &idx {
                    xs.push(pairs[j].0);
                    ys.push(pairs[j].1);
                }
                if !self.contains(alg.apply(op, &xs), alg.apply(op, &ys)) {
                    return false;
                }
                if !crate::algebra::advance(&mut idx, pairs.len()) {
                    break;
                }
            }
        }
        true
    }

    pub fn is_tolerance(&self, alg: &Algebra) -> bool {
        self.is_reflexive() && self.is_symmetric() && self.is_compatible(alg)
    }

    pub fn is_congruence(&self, alg: &Algebra) -> bool {
        self.is_tolerance(alg) && self.is_transitive()
    }

    /// Equivalence classes in order of least element. Only meaningful for equivalences.
    pub fn classes(&self) -> Vec<Vec<Elem>> {
        let mut seen = vec![false; self.size];
        let mut out = Vec::new();
        for x in 0..self.size {
            if seen[x] {
                continue;
            }
            let class: Vec<Elem> = (x..self.size)
                .filter(|&y| self.contains(x as Elem, y as Elem))
                .inspect(|&y| seen[y] = true)
                .map(|y| y as Elem)
                .collect();
            out.push(class);
        }
        out
    }

    /// Warshall closure in place; returns true if anything was added.
    fn close_transitively(&mut self) -> bool {
        let n = self.size;
        let mut grew = false;
        for k in 0..n {
            for i in 0..n {
                if !self.bits[i * n + k] {
                    continue;
                }
                for j in 0..n {
                    if self.bits[k * n + j] && !self.bits[i * n + j] {
                        self.bits[i * n + j] = true;
                        grew = true;
                    }
                }
            }
        }
        grew
    }
}

impl fmt::Display for BinRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, y)) in self.pairs().enumerate() {
            let sep = if i == 0 { "" } else { ", " };
            write!(f, "{sep}({x},{y})")?;
        }
        write!(f, "}}")
    }
}

fn check_seeds(alg: &Algebra, seeds: &[(Elem, Elem)]) -> Result<()> {
    for &(x, y) in seeds {
        for v in [x, y] {
            if v as usize >= alg.size() {
                return Err(Error::ElementOutOfRange { value: v as u64, size: alg.size() });
            }
        }
    }
    Ok(())
}

/// Subuniverse of `alg²` generated by `rel`.
fn close_operations(alg: &Algebra, rel: &BinRel) -> Result<BinRel> {
    let n = alg.size();
    let ctx = ProductContext::power(alg, 2)?;
    let gens: Vec<TupleCode> = rel
        .pairs()
        .map(|(x, y)| TupleCode(x as u128 * n as u128 + y as u128))
        .collect();
    let res = generate_subuniverse(&ctx, &gens, n * n)?;
    let mut out = BinRel::empty(n);
    for &TupleCode(c) in res.members() {
        out.insert((c / n as u128) as Elem, (c % n as u128) as Elem);
    }
    Ok(out)
}

fn tolerance_seed(alg: &Algebra, seeds: &[(Elem, Elem)]) -> Result<BinRel> {
    check_seeds(alg, seeds)?;
    let mut rel = BinRel::diagonal(alg.size());
    for &(x, y) in seeds {
        rel.insert(x, y);
        rel.insert(y, x);
    }
    Ok(rel)
}

/// Least tolerance of `alg` containing `seeds`.
///
/// The generating set is made reflexive and symmetric up front; transposition
/// is an automorphism of `alg²`, so the generated subuniverse stays symmetric.
/// To work on a subuniverse, restrict first with [`Algebra::subalgebra`].
pub fn principal_tolerance(alg: &Algebra, seeds: &[(Elem, Elem)]) -> Result<BinRel> {
    close_operations(alg, &tolerance_seed(alg, seeds)?)
}

/// Least congruence of `alg` containing `seeds`: operation closure and
/// transitive closure alternate until neither adds a pair.
pub fn principal_congruence(alg: &Algebra, seeds: &[(Elem, Elem)]) -> Result<BinRel> {
    let mut rel = close_operations(alg, &tolerance_seed(alg, seeds)?)?;
    while rel.close_transitively() {
        rel = close_operations(alg, &rel)?;
    }
    Ok(rel)
}

/// Outcome of [`decompose_product_relation`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposition {
    Product { alpha: BinRel, beta: BinRel },
    /// `witness` lies in `alpha ×_c beta` but not in the relation.
    NotProduct { alpha: BinRel, beta: BinRel, witness: (Elem, Elem) },
}

impl Decomposition {
    pub fn is_product(&self) -> bool {
        matches!(self, Decomposition::Product { .. })
    }
}

/// `((e1,f1),(e2,f2))` for the product coding with `|F| = f_size`.
fn split(x: Elem, f_size: usize) -> (Elem, Elem) {
    (x / f_size as Elem, x % f_size as Elem)
}

fn join(e: Elem, f: Elem, f_size: usize) -> Elem {
    e * f_size as Elem + f
}

/// Split a reflexive, symmetric relation on `E × F` into its projections and
/// test whether it is their product.
pub fn decompose_product_relation(rel: &BinRel, e_size: usize, f_size: usize) -> Result<Decomposition> {
    if e_size * f_size != rel.size() {
        return Err(Error::Precondition(format!(
            "relation on {} elements is not on a product of sizes {e_size} and {f_size}",
            rel.size()
        )));
    }
    if !rel.is_reflexive() || !rel.is_symmetric() {
        return Err(Error::Contract("relation is not reflexive and symmetric".into()));
    }
    let mut alpha = BinRel::empty(e_size);
    let mut beta = BinRel::empty(f_size);
    for (x, y) in rel.pairs() {
        let ((e1, f1), (e2, f2)) = (split(x, f_size), split(y, f_size));
        alpha.insert(e1, e2);
        beta.insert(f1, f2);
    }
    let witness = product_relation(&alpha, &beta)
        .pairs()
        .find(|&(x, y)| !rel.contains(x, y));
    Ok(match witness {
        Some(witness) => Decomposition::NotProduct { alpha, beta, witness },
        None => Decomposition::Product { alpha, beta },
    })
}

/// `α ×_c β` on `E × F`.
pub fn product_relation(alpha: &BinRel, beta: &BinRel) -> BinRel {
    let f_size = beta.size();
    let mut rel = BinRel::empty(alpha.size() * f_size);
    for (e1, e2) in alpha.pairs() {
        for (f1, f2) in beta.pairs() {
            rel.insert(join(e1, f1, f_size), join(e2, f2, f_size));
        }
    }
    rel
}

/// A generated relation that is not a product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductFailure {
    pub seeds: [(Elem, Elem); 2],
    pub relation: BinRel,
    pub missing: (Elem, Elem),
}

/// The `E`-parts of `p` with the `F`-parts of `q`.
fn mixed(p: (Elem, Elem), q: (Elem, Elem), f_size: usize) -> (Elem, Elem) {
    let ((e1, _), (e2, _)) = (split(p.0, f_size), split(p.1, f_size));
    let ((_, f1), (_, f2)) = (split(q.0, f_size), split(q.1, f_size));
    (join(e1, f1, f_size), join(e2, f2, f_size))
}

fn sweep_two_generated(
    e: &Algebra,
    f: &Algebra,
    generate: impl Fn(&Algebra, &[(Elem, Elem)]) -> Result<BinRel> + Sync,
) -> Result<Option<ProductFailure>> {
    let c = e.product(f)?;
    let n = c.size() as Elem;
    let fs = f.size();
    // Tg(p, q) = Tg(pᵀ, q), so one representative per transposition class.
    let reps: Vec<(Elem, Elem)> = (0..n).flat_map(|x| (x..n).map(move |y| (x, y))).collect();
    let seeds: Vec<(usize, usize)> = (0..reps.len())
        .flat_map(|i| (i..reps.len()).map(move |j| (i, j)))
        .collect();
    let found = seeds.par_iter().map(|&(i, j)| {
        let (p, q) = (reps[i], reps[j]);
        let rel = generate(&c, &[p, q])?;
        let t = |r: (Elem, Elem)| (r.1, r.0);
        let candidates = [mixed(p, q, fs), mixed(p, t(q), fs), mixed(q, p, fs), mixed(q, t(p), fs)];
        Ok(candidates
            .into_iter()
            .find(|&(x, y)| !rel.contains(x, y))
            .map(|missing| ProductFailure { seeds: [p, q], relation: rel, missing }))
    });
    found
        .find_map_first(|r: Result<Option<ProductFailure>>| match r {
            Ok(None) => None,
            other => Some(other),
        })
        .unwrap_or(Ok(None))
}

/// `None` iff every tolerance of `E × F` is a product tolerance; otherwise
/// the first failing two-generated tolerance in seed order.
pub fn all_tolerances_product(e: &Algebra, f: &Algebra) -> Result<Option<ProductFailure>> {
    sweep_two_generated(e, f, principal_tolerance)
}

/// As [`all_tolerances_product`] for congruences.
pub fn all_congruences_product(e: &Algebra, f: &Algebra) -> Result<Option<ProductFailure>> {
    sweep_two_generated(e, f, principal_congruence)
}

/// Re-index a relation on `A × B` as the set `{((a1,a2),(b1,b2))}` in
/// `A² × B²`; `ctx` must be the context with `m = n = 2`.
pub fn relation_as_subalgebra(ctx: &ProductContext<'_>, rel: &BinRel) -> Result<BTreeSet<TupleCode>> {
    let (e_size, f_size) = (ctx.alg_a().size(), ctx.alg_b().size());
    if ctx.m() != 2 || ctx.n() != 2 || rel.size() != e_size * f_size {
        return Err(Error::Precondition(
            "relation_as_subalgebra needs the A²×B² context of the relation's product".into(),
        ));
    }
    rel.pairs()
        .map(|(x, y)| {
            let ((a1, b1), (a2, b2)) = (split(x, f_size), split(y, f_size));
            ctx.encode_parts(&[a1, a2], &[b1, b2])
        })
        .collect()
}

/// Every tolerance of `alg`, smallest first by size then pairs. Each
/// tolerance is the join of principal ones, so starting from the diagonal
/// and adding one generator pair at a time reaches all of them.
pub fn enumerate_tolerances(alg: &Algebra, size_bound: usize) -> Result<Vec<BinRel>> {
    if alg.size() > size_bound {
        return Err(Error::Precondition(format!(
            "algebra has {} elements, above the enumeration bound {size_bound}",
            alg.size()
        )));
    }
    let n = alg.size() as Elem;
    let bottom = principal_tolerance(alg, &[])?;
    let mut found: BTreeSet<Vec<bool>> = BTreeSet::new();
    found.insert(bottom.bits.clone());
    let mut queue = vec![bottom];
    let mut all = Vec::new();
    while let Some(t) = queue.pop() {
        for x in 0..n {
            for y in x + 1..n {
                if t.contains(x, y) {
                    continue;
                }
                let mut seed = t.clone();
                seed.insert(x, y);
                seed.insert(y, x);
                let bigger = close_operations(alg, &seed)?;
                if found.insert(bigger.bits.clone()) {
                    queue.push(bigger);
                }
            }
        }
        all.push(t);
    }
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| b.bits.cmp(&a.bits)));
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Signature, Symbol};
    use crate::catalog::{cyclic_group, trivial};
    use proptest::prelude::*;

    /// All tolerances by scanning every subset of `n²` pairs.
    fn brute_tolerances(alg: &Algebra) -> Vec<BinRel> {
        let n = alg.size();
        assert!(n * n <= 16);
        (0u32..1 << (n * n))
            .map(|mask| BinRel {
                size: n,
                bits: (0..n * n).map(|i| mask >> i & 1 == 1).collect(),
            })
            .filter(|r| r.is_tolerance(alg))
            .collect()
    }

    fn least_containing(all: &[BinRel], seeds: &[(Elem, Elem)]) -> BinRel {
        let mut it = all.iter().filter(|r| seeds.iter().all(|&(x, y)| r.contains(x, y)));
        let first = it.next().unwrap().clone();
        it.fold(first, |acc, r| BinRel {
            size: acc.size,
            bits: acc.bits.iter().zip(&r.bits).map(|(&a, &b)| a && b).collect(),
        })
    }

    fn rel(size: usize, pairs: &[(Elem, Elem)]) -> BinRel {
        BinRel::from_pairs(size, pairs.iter().copied()).unwrap()
    }

    fn skew_kernel() -> BinRel {
        rel(4, &[(0, 0), (0, 3), (3, 0), (3, 3), (1, 1), (1, 2), (2, 1), (2, 2)])
    }

    #[test]
    fn principal_tolerance_examples() {
        let z2 = cyclic_group(2);
        assert_eq!(principal_tolerance(&z2, &[(0, 1)]).unwrap(), BinRel::full(2));
        assert_eq!(principal_tolerance(&z2, &[]).unwrap(), BinRel::diagonal(2));
        let z3 = cyclic_group(3);
        assert_eq!(principal_tolerance(&z3, &[(0, 1)]).unwrap(), BinRel::full(3));
        assert_eq!(principal_tolerance(&z3, &[(0, 1)]).unwrap(), least_containing(&brute_tolerances(&z3), &[(0, 1)]));
        assert!(principal_tolerance(&z3, &[(0, 3)]).is_err());
    }

    #[test]
    fn principal_congruence_examples() {
        let z4 = cyclic_group(4);
        let c = principal_congruence(&z4, &[(0, 2)]).unwrap();
        assert_eq!(c.classes(), vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(principal_congruence(&z4, &[]).unwrap(), BinRel::diagonal(4));
        let z22 = z2_squared();
        let k = principal_congruence(&z22, &[(0, 3)]).unwrap();
        assert_eq!(k, skew_kernel());
        assert_eq!(k.classes(), vec![vec![0, 3], vec![1, 2]]);
    }

    #[test]
    fn congruence_needs_transitivity_rounds() {
        // a path order on a 3-chain: the tolerance generated by (0,1),(1,2) is
        // not transitive, the congruence is everything
        let c3 = crate::catalog::chain(3);
        let t = principal_tolerance(&c3, &[(0, 1), (1, 2)]).unwrap();
        assert!(!t.contains(0, 2));
        assert!(!t.is_transitive());
        assert_eq!(principal_congruence(&c3, &[(0, 1), (1, 2)]).unwrap(), BinRel::full(3));
    }

    fn z2_squared() -> Algebra {
        cyclic_group(2).product(&cyclic_group(2)).unwrap()
    }

    #[test]
    fn decomposition_examples() {
        let full = decompose_product_relation(&BinRel::full(6), 2, 3).unwrap();
        assert_eq!(full, Decomposition::Product { alpha: BinRel::full(2), beta: BinRel::full(3) });

        match decompose_product_relation(&skew_kernel(), 2, 2).unwrap() {
            Decomposition::NotProduct { alpha, beta, witness } => {
                assert_eq!((alpha, beta), (BinRel::full(2), BinRel::full(2)));
                assert!(!skew_kernel().contains(witness.0, witness.1));
                // the pair ((0,0),(1,0)) is another one
                assert!(!skew_kernel().contains(0, 2));
            }
            other => panic!("{other:?}"),
        }

        let diag = decompose_product_relation(&BinRel::diagonal(6), 3, 2).unwrap();
        assert_eq!(diag, Decomposition::Product { alpha: BinRel::diagonal(3), beta: BinRel::diagonal(2) });

        assert!(matches!(
            decompose_product_relation(&rel(4, &[(0, 1)]), 2, 2),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn tolerance_sweep_examples() {
        let (z2, z3) = (cyclic_group(2), cyclic_group(3));
        assert_eq!(all_tolerances_product(&z2, &z3).unwrap(), None);
        assert_eq!(all_congruences_product(&z2, &z3).unwrap(), None);

        let failure = all_tolerances_product(&z2, &z2).unwrap().unwrap();
        assert!(!failure.relation.contains(failure.missing.0, failure.missing.1));
        assert!(!decompose_product_relation(&failure.relation, 2, 2).unwrap().is_product());
        assert!(all_congruences_product(&z2, &z2).unwrap().is_some());

        // the skew kernel is reached from the single off-diagonal seed
        let t = principal_tolerance(&z2_squared(), &[(0, 3), (0, 0)]).unwrap();
        assert_eq!(t, skew_kernel());

        let one = trivial(z2.signature());
        assert_eq!(all_tolerances_product(&z3, &one).unwrap(), None);
        assert_eq!(all_tolerances_product(&one, &z2).unwrap(), None);
        assert_eq!(all_congruences_product(&z2, &one).unwrap(), None);
    }

    #[test]
    fn relation_as_subalgebra_examples() {
        let (z2, z3) = (cyclic_group(2), cyclic_group(3));
        let ctx = ProductContext::new(&z2, &z3, 2, 2).unwrap();
        let diag = relation_as_subalgebra(&ctx, &BinRel::diagonal(6)).unwrap();
        let expected: BTreeSet<_> = (0..2)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .map(|(a, b)| ctx.encode_parts(&[a, a], &[b, b]).unwrap())
            .collect();
        assert_eq!(diag, expected);
        assert!(crate::subpower::is_product_subuniverse(&ctx, &diag).is_product());

        let full = relation_as_subalgebra(&ctx, &BinRel::full(6)).unwrap();
        assert_eq!(full.len() as u128, ctx.space());

        let z2b = cyclic_group(2);
        let ctx22 = ProductContext::new(&z2, &z2b, 2, 2).unwrap();
        let skew = relation_as_subalgebra(&ctx22, &skew_kernel()).unwrap();
        assert!(!crate::subpower::is_product_subuniverse(&ctx22, &skew).is_product());
        assert!(relation_as_subalgebra(&ctx, &skew_kernel()).is_err());
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_tolerances(&cyclic_group(2), 4).unwrap(), vec![BinRel::diagonal(2), BinRel::full(2)]);
        assert_eq!(enumerate_tolerances(&cyclic_group(3), 4).unwrap().len(), 2);
        assert_eq!(enumerate_tolerances(&trivial(&crate::catalog::group_signature()), 4).unwrap().len(), 1);
        assert!(enumerate_tolerances(&cyclic_group(5), 4).is_err());
        // the 3-chain: diagonal, blocks {0,1}, {1,2}, both overlapping blocks, full
        assert_eq!(enumerate_tolerances(&crate::catalog::chain(3), 4).unwrap().len(), 5);
    }

    fn small_signature() -> Signature {
        Signature::new(vec![Symbol::new("f", 2), Symbol::new("g", 1)]).unwrap()
    }

    fn arb_small_algebra(max: usize) -> impl Strategy<Value = Algebra> {
        (1..=max).prop_flat_map(|n| {
            let n32 = n as u32;
            (
                proptest::collection::vec(0..n32, n * n),
                proptest::collection::vec(0..n32, n),
            )
                .prop_map(move |(f, g)| Algebra::new("R", small_signature(), n, vec![f, g]).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn enumeration_matches_brute_force(alg in arb_small_algebra(3)) {
            let mut brute = brute_tolerances(&alg);
            let mut fast = enumerate_tolerances(&alg, 4).unwrap();
            brute.sort_by(|a, b| a.bits.cmp(&b.bits));
            fast.sort_by(|a, b| a.bits.cmp(&b.bits));
            prop_assert_eq!(brute, fast);
        }

        #[test]
        fn principal_relations_are_least(alg in arb_small_algebra(3), x in 0u32..3, y in 0u32..3) {
            let n = alg.size() as u32;
            let seeds = [(x % n, y % n)];
            let t = principal_tolerance(&alg, &seeds).unwrap();
            prop_assert_eq!(&t, &least_containing(&brute_tolerances(&alg), &seeds));

            let c = principal_congruence(&alg, &seeds).unwrap();
            prop_assert!(c.is_reflexive());
            prop_assert!(c.is_symmetric());
            prop_assert!(c.is_transitive());
            prop_assert!(c.is_compatible(&alg));
            let congruences: Vec<BinRel> =
                brute_tolerances(&alg).into_iter().filter(|r| r.is_transitive()).collect();
            prop_assert_eq!(c, least_containing(&congruences, &seeds));
        }

        #[test]
        fn products_decompose(e in arb_small_algebra(2), f in arb_small_algebra(2), i in any::<usize>(), j in any::<usize>()) {
            let te = enumerate_tolerances(&e, 4).unwrap();
            let tf = enumerate_tolerances(&f, 4).unwrap();
            let (alpha, beta) = (&te[i % te.len()], &tf[j % tf.len()]);
            let prod = product_relation(alpha, beta);
            prop_assert!(prod.is_tolerance(&e.product(&f).unwrap()));
            let d = decompose_product_relation(&prod, e.size(), f.size()).unwrap();
            prop_assert_eq!(d, Decomposition::Product { alpha: alpha.clone(), beta: beta.clone() });
        }

        #[test]
        fn reduction_agrees_with_enumeration(e in arb_small_algebra(3), f in arb_small_algebra(3)) {
            let c = e.product(&f).unwrap();
            let ctx = ProductContext::new(&e, &f, 2, 2).unwrap();
            let tolerances = enumerate_tolerances(&c, 9).unwrap();
            let mut all_product = true;
            for t in &tolerances {
                let d = decompose_product_relation(t, e.size(), f.size()).unwrap();
                let sub = relation_as_subalgebra(&ctx, t).unwrap();
                let closed = generate_subuniverse(&ctx, &sub.iter().copied().collect::<Vec<_>>(), 1 << 16).unwrap();
                prop_assert_eq!(closed.len(), sub.len());
                prop_assert_eq!(crate::subpower::is_product_subuniverse(&ctx, &sub).is_product(), d.is_product());
                all_product &= d.is_product();
            }
            prop_assert_eq!(all_tolerances_product(&e, &f).unwrap().is_none(), all_product);
            let all_cong = tolerances
                .iter()
                .filter(|t| t.is_transitive())
                .all(|t| decompose_product_relation(t, e.size(), f.size()).unwrap().is_product());
            prop_assert_eq!(all_congruences_product(&e, &f).unwrap().is_none(), all_cong);
        }
    }
}
