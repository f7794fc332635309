//! Products `A^m × B^n` with integer-coded tuples, subuniverse generation
//! with derivation records, product-subuniverse tests, forks and
//! representations.
//!
//! A tuple `(a1,..,am | b1,..,bn)` is coded in mixed radix with the `a`-digits
//! (base `|A|`) most significant, followed by the `b`-digits (base `|B|`).

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use rustc_hash::FxHashSet;

use crate::algebra::{Algebra, Elem};
use crate::error::{Error, Result};
use crate::term::Term;

/// Coding spaces up to this size use a dense bit set for membership.
pub const DENSE_LIMIT: u128 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupleCode(pub u128);

/// The ambient algebra `A^m × B^n`.
#[derive(Debug, Clone)]
pub struct ProductContext<'a> {
    alg_a: &'a Algebra,
    alg_b: &'a Algebra,
    m: usize,
    n: usize,
    weights: Vec<u128>,
    b_space: u128,
    space: u128,
}

impl<'a> ProductContext<'a> {
    pub fn new(alg_a: &'a Algebra, alg_b: &'a Algebra, m: usize, n: usize) -> Result<Self> {
        alg_a.same_signature(alg_b)?;
        for alg in [alg_a, alg_b] {
            if alg.size() > u16::MAX as usize + 1 {
                return Err(Error::Usage(format!(
                    "carrier of {} is too large for tuple coding",
                    alg.name()
                )));
            }
        }
        let overflow = || Error::CodingOverflow {
            what: format!("{}^{m} × {}^{n}", alg_a.name(), alg_b.name()),
        };
        let mut weights = vec![0u128; m + n];
        let mut acc: u128 = 1;
        let mut b_space: u128 = 1;
        for i in (0..m + n).rev() {
            weights[i] = acc;
            let radix = if i < m { alg_a.size() } else { alg_b.size() } as u128;
            acc = acc.checked_mul(radix).ok_or_else(overflow)?;
            if i == m {
                b_space = acc;
            }
        }
        Ok(ProductContext {
            alg_a,
            alg_b,
            m,
            n,
            weights,
            b_space,
            space: acc,
        })
    }

    /// `A^m`, with the empty `B` block.
    pub fn power(alg: &'a Algebra, m: usize) -> Result<Self> {
        ProductContext::new(alg, alg, m, 0)
    }

    pub fn alg_a(&self) -> &'a Algebra {
        self.alg_a
    }

    pub fn alg_b(&self) -> &'a Algebra {
        self.alg_b
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of coordinates, `m + n`.
    pub fn width(&self) -> usize {
        self.m + self.n
    }

    /// Number of elements, `|A|^m·|B|^n`.
    pub fn space(&self) -> u128 {
        self.space
    }

    pub fn algebra_at(&self, coord: usize) -> &'a Algebra {
        if coord < self.m {
            self.alg_a
        } else {
            self.alg_b
        }
    }

    pub fn encode(&self, tuple: &[Elem]) -> Result<TupleCode> {
        if tuple.len() != self.width() {
            return Err(Error::Usage(format!(
                "tuple has {} coordinates, expected {}",
                tuple.len(),
                self.width()
            )));
        }
        let mut code = 0u128;
        for (i, &v) in tuple.iter().enumerate() {
            let size = self.algebra_at(i).size();
            if v as usize >= size {
                return Err(Error::ElementOutOfRange {
                    value: v as u64,
                    size,
                });
            }
            code += v as u128 * self.weights[i];
        }
        Ok(TupleCode(code))
    }

    pub fn encode_parts(&self, a: &[Elem], b: &[Elem]) -> Result<TupleCode> {
        let mut t = a.to_vec();
        t.extend_from_slice(b);
        self.encode(&t)
    }

    pub fn decode(&self, code: TupleCode) -> Vec<Elem> {
        let mut out = vec![0; self.width()];
        self.decode_into(code, &mut out);
        out
    }

    pub(crate) fn decode_into(&self, code: TupleCode, out: &mut [Elem]) {
        let mut c = code.0;
        for i in (0..self.width()).rev() {
            let radix = self.algebra_at(i).size() as u128;
            out[i] = (c % radix) as Elem;
            c /= radix;
        }
    }

    pub fn check_code(&self, code: TupleCode) -> Result<()> {
        if code.0 >= self.space {
            return Err(Error::Usage(format!(
                "tuple code {} outside a space of {} elements",
                code.0, self.space
            )));
        }
        Ok(())
    }

    /// The tuple with the `A`-block of `p` and the `B`-block of `q`.
    pub fn mixed(&self, p: TupleCode, q: TupleCode) -> TupleCode {
        TupleCode(p.0 / self.b_space * self.b_space + q.0 % self.b_space)
    }

    pub fn a_part(&self, code: TupleCode) -> u128 {
        code.0 / self.b_space
    }

    pub fn b_part(&self, code: TupleCode) -> u128 {
        code.0 % self.b_space
    }

    /// `(a1,..,am | b1,..,bn)`.
    pub fn format(&self, code: TupleCode) -> String {
        let t = self.decode(code);
        let join = |s: &[Elem]| {
            s.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!("({} | {})", join(&t[..self.m]), join(&t[self.m..]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RawDerivation {
    Generator(u32),
    Applied { op: u32, start: u32 },
}

/// How a member of a closure was first obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivation<'r> {
    Generator(usize),
    /// `op` applied coordinatewise to earlier members (by index).
    Applied { op: usize, args: &'r [u32] },
}

#[derive(Debug, Clone)]
enum Store {
    Dense(Vec<u64>),
    Sparse(FxHashSet<u128>),
}

impl Store {
    fn for_space(space: u128) -> Store {
        if space <= DENSE_LIMIT {
            Store::Dense(vec![0; (space as usize).div_ceil(64)])
        } else {
            Store::Sparse(FxHashSet::default())
        }
    }

    #[inline]
    fn insert(&mut self, code: u128) -> bool {
        match self {
            Store::Dense(bits) => {
                let (w, b) = ((code >> 6) as usize, code & 63);
                let fresh = bits[w] & (1 << b) == 0;
                bits[w] |= 1 << b;
                fresh
            }
            Store::Sparse(set) => set.insert(code),
        }
    }

    #[inline]
    fn contains(&self, code: u128) -> bool {
        match self {
            Store::Dense(bits) => bits
                .get((code >> 6) as usize)
                .is_some_and(|w| w & (1 << (code & 63)) != 0),
            Store::Sparse(set) => set.contains(&code),
        }
    }
}

/// A generated subuniverse with one derivation per member.
#[derive(Debug, Clone)]
pub struct ClosureResult {
    codes: Vec<TupleCode>,
    derivations: Vec<RawDerivation>,
    args: Vec<u32>,
    arities: Vec<usize>,
    store: Store,
    truncated: bool,
    stopped_early: bool,
    rounds: usize,
}

impl ClosureResult {
    /// Members in discovery order.
    pub fn members(&self) -> &[TupleCode] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// True if generation stopped at the member limit; the members are then
    /// not closed under the operations.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Number of generation rounds performed.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn contains(&self, code: TupleCode) -> bool {
        self.store.contains(code.0)
    }

    pub fn index_of(&self, code: TupleCode) -> Option<usize> {
        if !self.contains(code) {
            return None;
        }
        self.codes.iter().position(|&c| c == code)
    }

    pub fn derivation(&self, index: usize) -> Derivation<'_> {
        match self.derivations[index] {
            RawDerivation::Generator(g) => Derivation::Generator(g as usize),
            RawDerivation::Applied { op, start } => {
                let start = start as usize;
                Derivation::Applied {
                    op: op as usize,
                    args: &self.args[start..start + self.arities[op as usize]],
                }
            }
        }
    }

    pub fn member_set(&self) -> BTreeSet<TupleCode> {
        self.codes.iter().copied().collect()
    }
}

enum Step {
    Continue,
    Stop,
}

struct Engine<'c, 'a> {
    ctx: &'c ProductContext<'a>,
    width: usize,
    coords: Vec<u16>,
    codes: Vec<TupleCode>,
    derivations: Vec<RawDerivation>,
    args: Vec<u32>,
    store: Store,
    limit: usize,
    track: bool,
    targets: Vec<u128>,
    truncated: bool,
    stopped_early: bool,
    scratch: Vec<u16>,
}

impl Engine<'_, '_> {
    fn push(&mut self, code: u128, derivation: RawDerivation, arg_ids: &[u32]) -> Step {
        if self.store.contains(code) {
            return Step::Continue;
        }
        if self.codes.len() >= self.limit {
            self.truncated = true;
            return Step::Stop;
        }
        self.store.insert(code);
        self.codes.push(TupleCode(code));
        self.coords.extend_from_slice(&self.scratch);
        if self.track {
            self.derivations.push(derivation);
            self.args.extend_from_slice(arg_ids);
        }
        if !self.targets.is_empty() {
            self.targets.retain(|&t| t != code);
            if self.targets.is_empty() {
                self.stopped_early = true;
                return Step::Stop;
            }
        }
        Step::Continue
    }

    fn set_scratch_from_code(&mut self, code: TupleCode) {
        let mut tuple = vec![0; self.width];
        self.ctx.decode_into(code, &mut tuple);
        for (s, v) in self.scratch.iter_mut().zip(tuple) {
            *s = v as u16;
        }
    }

    /// Applies `op` coordinatewise to the members `arg_ids`; result in
    /// `scratch`, code returned.
    #[inline]
    fn apply(&mut self, table_a: &[Elem], table_b: &[Elem], arg_ids: &[u32]) -> u128 {
        let w = self.width;
        let m = self.ctx.m;
        let na = self.ctx.alg_a.size();
        let nb = self.ctx.alg_b.size();
        let mut code: u128 = 0;
        for i in 0..w {
            let (table, radix) = if i < m { (table_a, na) } else { (table_b, nb) };
            let mut idx = 0usize;
            for &a in arg_ids {
                idx = idx * radix + self.coords[a as usize * w + i] as usize;
            }
            let v = table[idx];
            self.scratch[i] = v as u16;
            code = code * radix as u128 + v as u128;
        }
        code
    }

    fn run(&mut self, generators: &[TupleCode]) -> usize {
        for (g, &code) in generators.iter().enumerate() {
            self.set_scratch_from_code(code);
            if let Step::Stop = self.push(code.0, RawDerivation::Generator(g as u32), &[]) {
                return 0;
            }
        }
        let sig = self.ctx.alg_a.signature();
        for op in 0..sig.len() {
            if sig.arity(op) == 0 {
                let code = self.apply(self.ctx.alg_a.table(op), self.ctx.alg_b.table(op), &[]);
                let d = RawDerivation::Applied {
                    op: op as u32,
                    start: self.args.len() as u32,
                };
                if let Step::Stop = self.push(code, d, &[]) {
                    return 0;
                }
            }
        }

        let mut rounds = 0;
        let mut old_end = 0usize;
        let mut ids: Vec<u32> = Vec::new();
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        loop {
            let cur_end = self.codes.len();
            if cur_end == old_end {
                return rounds;
            }
            rounds += 1;
            for op in 0..sig.len() {
                let arity = sig.arity(op);
                if arity == 0 {
                    continue;
                }
                let table_a = self.ctx.alg_a.table(op);
                let table_b = self.ctx.alg_b.table(op);
                // Argument tuples over [0, cur_end) with at least one entry in
                // [old_end, cur_end): the first such position is `first_new`.
                for first_new in 0..arity {
                    if first_new > 0 && old_end == 0 {
                        break;
                    }
                    lo.clear();
                    hi.clear();
                    for pos in 0..arity {
                        let (l, h) = match pos.cmp(&first_new) {
                            std::cmp::Ordering::Less => (0, old_end),
                            std::cmp::Ordering::Equal => (old_end, cur_end),
                            std::cmp::Ordering::Greater => (0, cur_end),
                        };
                        lo.push(l as u32);
                        hi.push(h as u32);
                    }
                    ids.clear();
                    ids.extend_from_slice(&lo);
                    loop {
                        let code = self.apply(table_a, table_b, &ids);
                        let d = RawDerivation::Applied {
                            op: op as u32,
                            start: self.args.len() as u32,
                        };
                        if let Step::Stop = self.push(code, d, &ids) {
                            return rounds;
                        }
                        let mut pos = arity;
                        let exhausted = loop {
                            if pos == 0 {
                                break true;
                            }
                            pos -= 1;
                            ids[pos] += 1;
                            if ids[pos] < hi[pos] {
                                break false;
                            }
                            ids[pos] = lo[pos];
                        };
                        if exhausted {
                            break;
                        }
                    }
                }
            }
            old_end = cur_end;
        }
    }
}

pub(crate) struct ClosureOptions<'t> {
    pub limit: usize,
    pub track: bool,
    pub targets: &'t [TupleCode],
}

pub(crate) fn close(
    ctx: &ProductContext<'_>,
    generators: &[TupleCode],
    opts: ClosureOptions<'_>,
) -> Result<ClosureResult> {
    for &g in generators {
        ctx.check_code(g)?;
    }
    let width = ctx.width();
    let mut engine = Engine {
        ctx,
        width,
        coords: Vec::new(),
        codes: Vec::new(),
        derivations: Vec::new(),
        args: Vec::new(),
        store: Store::for_space(ctx.space),
        limit: opts.limit,
        track: opts.track,
        targets: opts.targets.iter().map(|t| t.0).collect(),
        truncated: false,
        stopped_early: false,
        scratch: vec![0; width],
    };
    let rounds = engine.run(generators);
    let sig = ctx.alg_a.signature();
    Ok(ClosureResult {
        codes: engine.codes,
        derivations: engine.derivations,
        args: engine.args,
        arities: sig.symbols().iter().map(|s| s.arity).collect(),
        store: engine.store,
        truncated: engine.truncated,
        stopped_early: engine.stopped_early,
        rounds,
    })
}

impl ClosureResult {
    pub(crate) fn stopped_early(&self) -> bool {
        self.stopped_early
    }
}

/// The least subuniverse of `A^m × B^n` containing `generators` and the
/// constants, generated round by round. Stops with `truncated` set once
/// more than `limit` members would be needed.
pub fn generate_subuniverse(
    ctx: &ProductContext<'_>,
    generators: &[TupleCode],
    limit: usize,
) -> Result<ClosureResult> {
    close(
        ctx,
        generators,
        ClosureOptions {
            limit,
            track: true,
            targets: &[],
        },
    )
}

/// Replays derivations into a term over the generator variables. `None` if
/// `target` is not a member.
pub fn member_term(res: &ClosureResult, target: TupleCode, generator_vars: &[usize]) -> Option<Term> {
    let idx = res.index_of(target)?;
    if res.derivations.len() != res.codes.len() {
        return None;
    }
    let mut memo: HashMap<usize, Term> = HashMap::new();
    // Explicit stack: derivation chains can be long.
    let mut stack = vec![(idx, false)];
    while let Some((i, expanded)) = stack.pop() {
        if memo.contains_key(&i) {
            continue;
        }
        match res.derivation(i) {
            Derivation::Generator(g) => {
                memo.insert(i, Term::var(generator_vars[g]));
            }
            Derivation::Applied { op, args } => {
                if expanded {
                    let children = args.iter().map(|&a| memo[&(a as usize)].clone()).collect();
                    memo.insert(i, Term::app(op, children));
                } else {
                    stack.push((i, true));
                    for &a in args {
                        if !memo.contains_key(&(a as usize)) {
                            stack.push((a as usize, false));
                        }
                    }
                }
            }
        }
    }
    memo.remove(&idx)
}

/// Evaluates `term` coordinatewise at the tuples `generators`.
pub fn eval_in_product(ctx: &ProductContext<'_>, term: &Term, generators: &[TupleCode]) -> Result<TupleCode> {
    let tuples: Vec<Vec<Elem>> = generators.iter().map(|&g| ctx.decode(g)).collect();
    let mut out = Vec::with_capacity(ctx.width());
    let mut assignment = vec![0; tuples.len()];
    for i in 0..ctx.width() {
        for (slot, t) in assignment.iter_mut().zip(&tuples) {
            *slot = t[i];
        }
        out.push(term.eval(ctx.algebra_at(i), &assignment)?);
    }
    ctx.encode(&out)
}

/// Outcome of [`is_product_subuniverse`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProductCheck {
    Product,
    /// `p, q` are members and `missing`, the `A`-part of `p` with the
    /// `B`-part of `q`, is not.
    Counterexample {
        p: TupleCode,
        q: TupleCode,
        missing: TupleCode,
    },
}

impl ProductCheck {
    pub fn is_product(&self) -> bool {
        matches!(self, ProductCheck::Product)
    }
}

/// Checks `(a,b), (c,d) ∈ S ⟹ (a,d) ∈ S`; scans pairs in ascending code order.
pub fn is_product_subuniverse(ctx: &ProductContext<'_>, members: &BTreeSet<TupleCode>) -> ProductCheck {
    let a_parts: HashSet<u128> = members.iter().map(|&c| ctx.a_part(c)).collect();
    let b_parts: HashSet<u128> = members.iter().map(|&c| ctx.b_part(c)).collect();
    if a_parts.len() * b_parts.len() == members.len() {
        return ProductCheck::Product;
    }
    for &p in members {
        for &q in members {
            let missing = ctx.mixed(p, q);
            if !members.contains(&missing) {
                return ProductCheck::Counterexample { p, q, missing };
            }
        }
    }
    unreachable!("projection sizes disagree with the mixing check")
}

/// Forks at coordinate `i` (0-based): pairs `(a_i, b_i)` for members `a, b`
/// agreeing on all coordinates before `i`.
pub fn forks(tuples: &[Vec<Elem>], i: usize) -> BTreeSet<(Elem, Elem)> {
    let mut groups: HashMap<&[Elem], BTreeSet<Elem>> = HashMap::new();
    for t in tuples {
        groups.entry(&t[..i]).or_default().insert(t[i]);
    }
    let mut out = BTreeSet::new();
    for values in groups.values() {
        for &u in values {
            for &v in values {
                out.insert((u, v));
            }
        }
    }
    out
}

fn subsets_below(width: usize, k: usize) -> Vec<Vec<usize>> {
    assert!(width < 32, "too many coordinates");
    (0u32..1 << width)
        .filter(|s| (s.count_ones() as usize) < k)
        .map(|s| (0..width).filter(|&i| s & (1 << i) != 0).collect())
        .collect()
}

fn project(t: &[Elem], coords: &[usize]) -> Vec<Elem> {
    coords.iter().map(|&i| t[i]).collect()
}

/// Checks that `r ⊆ b` has every projection of `b` onto fewer than `k`
/// coordinates and every fork of `b`.
pub fn is_representation(ctx: &ProductContext<'_>, r: &[TupleCode], b: &[TupleCode], k: usize) -> bool {
    let b_set: HashSet<TupleCode> = b.iter().copied().collect();
    if !r.iter().all(|c| b_set.contains(c)) {
        return false;
    }
    let rt: Vec<Vec<Elem>> = r.iter().map(|&c| ctx.decode(c)).collect();
    let bt: Vec<Vec<Elem>> = b.iter().map(|&c| ctx.decode(c)).collect();
    for t in subsets_below(ctx.width(), k) {
        let pr: HashSet<Vec<Elem>> = rt.iter().map(|x| project(x, &t)).collect();
        let pb: HashSet<Vec<Elem>> = bt.iter().map(|x| project(x, &t)).collect();
        if pr != pb {
            return false;
        }
    }
    (0..ctx.width()).all(|i| forks(&rt, i) == forks(&bt, i))
}

/// A representation of the subuniverse `members`, built greedily: members
/// are scanned in ascending code order and kept when they show a new
/// small projection or, with an earlier member, witness a fork not yet
/// witnessed inside the representation. Not canonical.
pub fn build_representation(ctx: &ProductContext<'_>, members: &[TupleCode], k: usize) -> Vec<TupleCode> {
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let tuples: Vec<Vec<Elem>> = sorted.iter().map(|&c| ctx.decode(c)).collect();
    let width = ctx.width();
    let subsets = subsets_below(width, k);

    let mut keep = vec![false; sorted.len()];
    let mut seen_proj: HashSet<(usize, Vec<Elem>)> = HashSet::new();
    let mut witnessed: HashSet<(usize, Elem, Elem)> = HashSet::new();
    for (gi, g) in tuples.iter().enumerate() {
        for (ti, t) in subsets.iter().enumerate() {
            if seen_proj.insert((ti, project(g, t))) {
                keep[gi] = true;
            }
        }
        for (fi, f) in tuples[..=gi].iter().enumerate() {
            let agree = f.iter().zip(g).take_while(|(a, b)| a == b).count();
            // f and g witness forks at every index up to the first disagreement.
            for i in 0..width.min(agree + 1) {
                let fresh_fg = witnessed.insert((i, f[i], g[i]));
                let fresh_gf = witnessed.insert((i, g[i], f[i]));
                if fresh_fg || fresh_gf {
                    keep[gi] = true;
                    keep[fi] = true;
                }
            }
        }
    }
    let r: Vec<TupleCode> = sorted
        .iter()
        .zip(&keep)
        .filter_map(|(&c, &k)| k.then_some(c))
        .collect();
    assert!(
        is_representation(ctx, &r, &sorted, k),
        "greedy representation misses a projection or fork"
    );
    r
}

/// True iff the subuniverse generated by `r` is exactly `b`.
pub fn representation_generates(ctx: &ProductContext<'_>, r: &[TupleCode], b: &[TupleCode]) -> Result<bool> {
    let target: BTreeSet<TupleCode> = b.iter().copied().collect();
    let res = close(
        ctx,
        r,
        ClosureOptions {
            limit: target.len() + 1,
            track: false,
            targets: &[],
        },
    )?;
    Ok(!res.truncated() && res.member_set() == target)
}

impl fmt::Display for TupleCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
