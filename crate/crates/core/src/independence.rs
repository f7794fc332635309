//! Deciding whether two algebras are independent: whether some binary term
//! `t` satisfies `t(x,y) ≈ x` in `A` and `t(x,y) ≈ y` in `B`.
//!
//! Two routes are offered:
//!
//! * the **fast sweeps** look for a two-generated subalgebra of `A^r × B^s`
//!   that is not a product, for `r, s ≥ 1` with `r + s` bounded (by 4 for a
//!   Mal'cev term, by `max(4, k-1)` for a `k`-edge term). Independence holds
//!   iff no such subalgebra exists. They need a verified term and run in time
//!   polynomial in `max(|A|, |B|)`;
//! * the **oracle** closes the two projections inside
//!   `A^{A²} × B^{B²}` and asks whether `(x on A, y on B)` shows up. It needs
//!   no term, is exponential, and yields a witness when it succeeds.
//!
//! The sweep only depends on the *set* of coordinate columns of a generator
//! pair, so pairs are reduced to a canonical column set and each set is
//! closed once; both recombinations are checked per closure.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rustc_hash::FxHashSet;

use crate::algebra::{Algebra, Elem};
use crate::error::{Error, Result};
use crate::identities::{edge2_to_malcev, edge_violation, malcev_violation, satisfies_identity};
use crate::subpower::{close, generate_subuniverse, member_term, ClosureOptions, ProductContext, TupleCode};
use crate::term::Term;

/// Default member limit for oracle closures.
pub const DEFAULT_LIMIT: usize = 1 << 22;

/// Largest stage (`|A|^r·|B|^s` tuples) the fast sweep will enumerate.
const MAX_STAGE: u128 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Independent,
    NotIndependent,
    /// The oracle closure hit `limit` members without reaching the target.
    Inconclusive { limit: usize },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Independent => "independent",
            Verdict::NotIndependent => "not-independent",
            Verdict::Inconclusive { .. } => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    FastMalcev,
    FastEdge(usize),
    Oracle,
    Both,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::FastMalcev => f.write_str("fast-malcev"),
            Method::FastEdge(k) => write!(f, "fast-edge({k})"),
            Method::Oracle => f.write_str("oracle"),
            Method::Both => f.write_str("both"),
        }
    }
}

/// Generators `p = (a, b)`, `q = (c, d)` of `A^r × B^s` whose subalgebra
/// misses `missing`, one of the recombinations `(a, d)` or `(c, b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub r: usize,
    pub s: usize,
    pub a: Vec<Elem>,
    pub b: Vec<Elem>,
    pub c: Vec<Elem>,
    pub d: Vec<Elem>,
    pub missing: Vec<Elem>,
}

fn tuple(a: &[Elem], b: &[Elem]) -> String {
    let join = |s: &[Elem]| s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
    format!("({} | {})", join(a), join(b))
}

impl Counterexample {
    pub fn p(&self) -> String {
        tuple(&self.a, &self.b)
    }

    pub fn q(&self) -> String {
        tuple(&self.c, &self.d)
    }

    pub fn missing_tuple(&self) -> String {
        tuple(&self.missing[..self.r], &self.missing[self.r..])
    }

    /// Recomputes `⟨p, q⟩` and confirms `missing` is absent.
    pub fn verify(&self, alg_a: &Algebra, alg_b: &Algebra) -> Result<bool> {
        let ctx = ProductContext::new(alg_a, alg_b, self.r, self.s)?;
        let p = ctx.encode_parts(&self.a, &self.b)?;
        let q = ctx.encode_parts(&self.c, &self.d)?;
        let missing = ctx.encode(&self.missing)?;
        let expected = [ctx.mixed(p, q), ctx.mixed(q, p)];
        if !expected.contains(&missing) {
            return Ok(false);
        }
        let space = usize::try_from(ctx.space()).unwrap_or(usize::MAX);
        let res = generate_subuniverse(&ctx, &[p, q], space)?;
        Ok(!res.truncated() && !res.contains(missing))
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "r={} s={} p={} q={} missing={}",
            self.r,
            self.s,
            self.p(),
            self.q(),
            self.missing_tuple()
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    /// Closures computed by the fast sweep.
    pub closures: usize,
    pub max_closure: usize,
    /// The `(m-1)·n^{2m}` ceiling the sweep's closure count is held to.
    pub closure_bound: Option<u128>,
    pub oracle_members: Option<usize>,
    pub fast_time: Option<Duration>,
    pub oracle_time: Option<Duration>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependenceReport {
    pub verdict: Verdict,
    pub method: Method,
    pub counterexample: Option<Counterexample>,
    pub witness: Option<Term>,
    pub stats: Stats,
}

/// True iff `t ≈ x0` holds in `a` and `t ≈ x1` in `b`.
pub fn verify_witness(a: &Algebra, b: &Algebra, t: &Term) -> Result<bool> {
    if t.width() > 2 {
        return Ok(false);
    }
    Ok(satisfies_identity(a, t, &Term::var(0))? && satisfies_identity(b, t, &Term::var(1))?)
}

fn require_malcev(alg: &Algebra, d: &Term) -> Result<()> {
    d.check(alg.signature())?;
    if let Some(failure) = malcev_violation(alg, d)? {
        return Err(Error::Precondition(format!(
            "not a Mal'cev term on {}: {failure}",
            alg.name()
        )));
    }
    Ok(())
}

fn require_edge(alg: &Algebra, t: &Term, k: usize) -> Result<()> {
    t.check(alg.signature())?;
    if let Some(failure) = edge_violation(alg, t, k)? {
        return Err(Error::Precondition(format!(
            "not a {k}-edge term on {}: {failure}",
            alg.name()
        )));
    }
    Ok(())
}

/// `(m-1)·n^{2m}` with `m = max(4, k-1)`, `n = max(|A|, |B|)`; saturating.
pub fn closure_bound(size_a: usize, size_b: usize, k: usize) -> u128 {
    let m = 4.max(k.saturating_sub(1)) as u32;
    let n = size_a.max(size_b) as u128;
    n.checked_pow(2 * m)
        .and_then(|p| p.checked_mul(m as u128 - 1))
        .unwrap_or(u128::MAX)
}

/// Sweep over `A^r × B^s` for `r, s ∈ {1, 2}`, given a Mal'cev term `d`
/// for both algebras.
pub fn check_fast_malcev(a: &Algebra, b: &Algebra, d: &Term) -> Result<IndependenceReport> {
    a.same_signature(b)?;
    require_malcev(a, d)?;
    require_malcev(b, d)?;
    let stages = vec![(1, 1), (1, 2), (2, 1), (2, 2)];
    sweep(a, b, &stages, Method::FastMalcev, closure_bound(a.size(), b.size(), 2))
}

/// Sweep over `A^r × B^s` for `r, s ≥ 1`, `r + s ≤ max(4, k-1)`, given a
/// `k`-edge term for both algebras.
pub fn check_fast_edge(a: &Algebra, b: &Algebra, t: &Term, k: usize) -> Result<IndependenceReport> {
    a.same_signature(b)?;
    require_edge(a, t, k)?;
    require_edge(b, t, k)?;
    let total = 4.max(k - 1);
    let mut stages = Vec::new();
    for sum in 2..=total {
        for r in 1..sum {
            stages.push((r, sum - r));
        }
    }
    sweep(a, b, &stages, Method::FastEdge(k), closure_bound(a.size(), b.size(), k))
}

/// A generator pair reduced to its distinct columns: `A`-columns `(a_i, c_i)`
/// coded `a_i·|A| + c_i`, then `B`-columns likewise, sorted; the number of
/// `A`-columns leads. Of the two orientations the smaller is kept.
type ColumnKey = Vec<u32>;

struct Job {
    key: ColumnKey,
    p: TupleCode,
    q: TupleCode,
}

fn column_key(pa: &[Elem], pb: &[Elem], qa: &[Elem], qb: &[Elem], na: u32, nb: u32) -> Option<ColumnKey> {
    // With all A-columns diagonal, (a,d) = q and (c,b) = p; likewise for B.
    if pa == qa || pb == qb {
        return None;
    }
    let build = |flip: bool| {
        let mut ka: Vec<u32> = pa
            .iter()
            .zip(qa)
            .map(|(&x, &y)| if flip { y * na + x } else { x * na + y })
            .collect();
        let mut kb: Vec<u32> = pb
            .iter()
            .zip(qb)
            .map(|(&x, &y)| if flip { y * nb + x } else { x * nb + y })
            .collect();
        ka.sort_unstable();
        ka.dedup();
        kb.sort_unstable();
        kb.dedup();
        let mut key = Vec::with_capacity(1 + ka.len() + kb.len());
        key.push(ka.len() as u32);
        key.extend(ka);
        key.extend(kb);
        key
    };
    Some(build(false).min(build(true)))
}

/// Closes the two generators of a column key; true iff both recombinations
/// are members. Returns the closure size alongside.
fn key_passes(a: &Algebra, b: &Algebra, key: &[u32]) -> Result<(bool, usize)> {
    let (na, nb) = (a.size() as u32, b.size() as u32);
    let ra = key[0] as usize;
    let (ka, kb) = key[1..].split_at(ra);
    let ctx = ProductContext::new(a, b, ra, kb.len())?;
    let first_a: Vec<Elem> = ka.iter().map(|&c| c / na).collect();
    let second_a: Vec<Elem> = ka.iter().map(|&c| c % na).collect();
    let first_b: Vec<Elem> = kb.iter().map(|&c| c / nb).collect();
    let second_b: Vec<Elem> = kb.iter().map(|&c| c % nb).collect();
    let g1 = ctx.encode_parts(&first_a, &first_b)?;
    let g2 = ctx.encode_parts(&second_a, &second_b)?;
    let targets = [ctx.mixed(g1, g2), ctx.mixed(g2, g1)];
    let res = close(
        &ctx,
        &[g1, g2],
        ClosureOptions {
            limit: usize::MAX,
            track: false,
            targets: &targets,
        },
    )?;
    let ok = res.stopped_early() || targets.iter().all(|&t| res.contains(t));
    Ok((ok, res.len()))
}

fn sweep(a: &Algebra, b: &Algebra, stages: &[(usize, usize)], method: Method, bound: u128) -> Result<IndependenceReport> {
    let start = Instant::now();
    let (na, nb) = (a.size() as u32, b.size() as u32);
    let mut seen: FxHashSet<ColumnKey> = FxHashSet::default();
    let closures = AtomicUsize::new(0);
    let max_closure = AtomicUsize::new(0);
    let mut counterexample = None;

    for &(r, s) in stages {
        let ctx = ProductContext::new(a, b, r, s)?;
        if ctx.space() > MAX_STAGE {
            return Err(Error::Precondition(format!(
                "fast sweep stage A^{r}×B^{s} has {} tuples, above {MAX_STAGE}",
                ctx.space()
            )));
        }
        let space = ctx.space() as usize;
        let width = r + s;
        let mut tuples = vec![0 as Elem; space * width];
        for (code, chunk) in tuples.chunks_mut(width).enumerate() {
            ctx.decode_into(TupleCode(code as u128), chunk);
        }
        let mut jobs = Vec::new();
        for p in 0..space {
            let tp = &tuples[p * width..(p + 1) * width];
            for q in p + 1..space {
                let tq = &tuples[q * width..(q + 1) * width];
                let Some(key) = column_key(&tp[..r], &tp[r..], &tq[..r], &tq[r..], na, nb) else {
                    continue;
                };
                if seen.insert(key.clone()) {
                    jobs.push(Job {
                        key,
                        p: TupleCode(p as u128),
                        q: TupleCode(q as u128),
                    });
                }
            }
        }
        let failure = jobs
            .par_iter()
            .map(|job| -> Result<Option<(TupleCode, TupleCode)>> {
                let (ok, size) = key_passes(a, b, &job.key)?;
                closures.fetch_add(1, Ordering::Relaxed);
                max_closure.fetch_max(size, Ordering::Relaxed);
                Ok((!ok).then_some((job.p, job.q)))
            })
            .find_map_first(|r| match r {
                Ok(None) => None,
                other => Some(other),
            })
            .transpose()?
            .flatten();
        if let Some((p, q)) = failure {
            counterexample = Some(reverify(&ctx, p, q)?);
            break;
        }
    }

    let closures = closures.into_inner();
    if closures as u128 > bound {
        return Err(Error::Internal(format!(
            "fast sweep used {closures} closures, above the bound {bound}"
        )));
    }
    let verdict = if counterexample.is_some() {
        Verdict::NotIndependent
    } else {
        Verdict::Independent
    };
    Ok(IndependenceReport {
        verdict,
        method,
        counterexample,
        witness: None,
        stats: Stats {
            closures,
            max_closure: max_closure.into_inner(),
            closure_bound: Some(bound),
            fast_time: Some(start.elapsed()),
            ..Stats::default()
        },
    })
}

/// Recomputes the full closure of the original (not reduced) pair and picks
/// the recombination it misses.
fn reverify(ctx: &ProductContext<'_>, p: TupleCode, q: TupleCode) -> Result<Counterexample> {
    let res = generate_subuniverse(ctx, &[p, q], ctx.space() as usize)?;
    let missing = [ctx.mixed(p, q), ctx.mixed(q, p)]
        .into_iter()
        .find(|&t| !res.contains(t))
        .ok_or_else(|| Error::Internal("reduced closure disagrees with the full closure".into()))?;
    let (r, tp, tq) = (ctx.m(), ctx.decode(p), ctx.decode(q));
    Ok(Counterexample {
        r,
        s: ctx.n(),
        a: tp[..r].to_vec(),
        b: tp[r..].to_vec(),
        c: tq[..r].to_vec(),
        d: tq[r..].to_vec(),
        missing: ctx.decode(missing),
    })
}

/// The binary projections as tuples over argument pairs in table order.
fn projections(n: usize) -> (Vec<Elem>, Vec<Elem>) {
    (0..n * n).map(|i| ((i / n) as Elem, (i % n) as Elem)).unzip()
}

/// The context `A^{A²} × B^{B²}` with the two projection generators and the
/// target `(x on A, y on B)`, coordinates indexed by argument pairs in table order.
pub struct OracleSetup<'a> {
    pub ctx: ProductContext<'a>,
    pub generators: [TupleCode; 2],
    pub target: TupleCode,
}

pub fn oracle_setup<'a>(a: &'a Algebra, b: &'a Algebra) -> Result<OracleSetup<'a>> {
    a.same_signature(b)?;
    let (ma, nb) = (a.size() * a.size(), b.size() * b.size());
    let ctx = ProductContext::new(a, b, ma, nb).map_err(|e| match e {
        Error::CodingOverflow { .. } => Error::CodingOverflow {
            what: format!(
                "oracle space {}^{ma}·{}^{nb}; use the fast method with an edge term",
                a.size(),
                b.size()
            ),
        },
        other => other,
    })?;
    let (e1, e2) = projections(a.size());
    let (f1, f2) = projections(b.size());
    let generators = [ctx.encode_parts(&e1, &f1)?, ctx.encode_parts(&e2, &f2)?];
    let target = ctx.encode_parts(&e1, &f2)?;
    Ok(OracleSetup { ctx, generators, target })
}

/// The whole subalgebra generated by the two projections: the binary term
/// operations of `A × B`, one member per operation.
pub fn oracle_closure(a: &Algebra, b: &Algebra, limit: usize) -> Result<crate::subpower::ClosureResult> {
    let setup = oracle_setup(a, b)?;
    generate_subuniverse(&setup.ctx, &setup.generators, limit)
}

/// Closes `(x on A, x on B)` and `(y on A, y on B)` in `A^{A²} × B^{B²}`
/// until `(x on A, y on B)` appears or the closure is complete; independent
/// iff it appears, with the replayed derivation as witness.
pub fn check_oracle(a: &Algebra, b: &Algebra, limit: usize) -> Result<IndependenceReport> {
    let start = Instant::now();
    let OracleSetup { ctx, generators, target } = oracle_setup(a, b)?;
    let [g1, g2] = generators;
    let res = close(
        &ctx,
        &generators,
        ClosureOptions {
            limit,
            track: true,
            targets: &[target],
        },
    )?;

    let mut report = IndependenceReport {
        verdict: Verdict::NotIndependent,
        method: Method::Oracle,
        counterexample: None,
        witness: None,
        stats: Stats {
            oracle_members: Some(res.len()),
            ..Stats::default()
        },
    };
    if res.contains(target) {
        report.verdict = Verdict::Independent;
        let witness = if target == g2 {
            Term::var(1)
        } else {
            member_term(&res, target, &[0, 1])
                .ok_or_else(|| Error::Internal("oracle target has no derivation".into()))?
        };
        if !verify_witness(a, b, &witness)? {
            return Err(Error::Internal("oracle witness fails verification".into()));
        }
        report.witness = Some(witness);
    } else if res.truncated() {
        report.verdict = Verdict::Inconclusive { limit };
    } else {
        let (p, q) = (ctx.decode(g1), ctx.decode(g2));
        let m = ctx.m();
        report.counterexample = Some(Counterexample {
            r: m,
            s: ctx.n(),
            a: p[..m].to_vec(),
            b: p[m..].to_vec(),
            c: q[..m].to_vec(),
            d: q[m..].to_vec(),
            missing: ctx.decode(target),
        });
    }
    report.stats.oracle_time = Some(start.elapsed());
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    /// Fast when an edge term is given and verifies, else the oracle.
    #[default]
    Auto,
    Fast,
    Oracle,
    Both,
}

#[derive(Debug, Clone)]
pub struct DecideOptions {
    pub method: MethodChoice,
    /// A `k`-edge term for both algebras.
    pub edge_term: Option<Term>,
    pub k: Option<usize>,
    pub limit: usize,
    /// Worker threads for the sweep; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            method: MethodChoice::Auto,
            edge_term: None,
            k: None,
            limit: DEFAULT_LIMIT,
            threads: None,
        }
    }
}

/// Fast route for a `k`-edge term; `k = 2` goes through the Mal'cev sweep.
fn run_fast(a: &Algebra, b: &Algebra, t: &Term, k: usize) -> Result<IndependenceReport> {
    if k == 2 {
        require_edge(a, t, 2)?;
        require_edge(b, t, 2)?;
        check_fast_malcev(a, b, &edge2_to_malcev(t)?)
    } else {
        check_fast_edge(a, b, t, k)
    }
}

fn decide_inner(a: &Algebra, b: &Algebra, opts: &DecideOptions) -> Result<IndependenceReport> {
    a.same_signature(b)?;
    let edge = match (&opts.edge_term, opts.k) {
        (Some(t), Some(k)) => Some((t, k)),
        (None, None) => None,
        _ => return Err(Error::Usage("an edge term needs --k and vice versa".into())),
    };
    let need_edge = || edge.ok_or_else(|| Error::Usage("the fast method needs an edge term and k".into()));
    match opts.method {
        MethodChoice::Oracle => check_oracle(a, b, opts.limit),
        MethodChoice::Fast => {
            let (t, k) = need_edge()?;
            run_fast(a, b, t, k)
        }
        MethodChoice::Auto => match edge {
            Some((t, k)) => match run_fast(a, b, t, k) {
                Err(Error::Precondition(_)) => check_oracle(a, b, opts.limit),
                other => other,
            },
            None => check_oracle(a, b, opts.limit),
        },
        MethodChoice::Both => {
            let (t, k) = need_edge()?;
            let fast = run_fast(a, b, t, k)?;
            let oracle = check_oracle(a, b, opts.limit)?;
            if let Verdict::Inconclusive { .. } = oracle.verdict {
                // nothing to compare against
            } else if oracle.verdict != fast.verdict {
                return Err(Error::Internal(format!(
                    "fast method says {} but the oracle says {}",
                    fast.verdict, oracle.verdict
                )));
            }
            Ok(IndependenceReport {
                verdict: fast.verdict,
                method: Method::Both,
                counterexample: fast.counterexample,
                witness: oracle.witness,
                stats: Stats {
                    oracle_members: oracle.stats.oracle_members,
                    oracle_time: oracle.stats.oracle_time,
                    ..fast.stats
                },
            })
        }
    }
}

/// Decides independence of `a` and `b` by the selected method.
pub fn decide(a: &Algebra, b: &Algebra, opts: &DecideOptions) -> Result<IndependenceReport> {
    match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(|| decide_inner(a, b, opts)),
        None => decide_inner(a, b, opts),
    }
}
