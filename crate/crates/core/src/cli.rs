//! Command-line front end.
//!
//! Every command can print a line protocol (`--output lines`): the first
//! line is `RESULT key=value ...`, followed by one `KEY=VALUE` record per
//! line. Exit codes: 0 independent / verified, 1 not independent / not
//! verified, 2 usage or input error, 3 inconclusive (limit), 4 internal
//! disagreement.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::algebra::{Algebra, Elem};
use crate::error::{Error, Result};
use crate::identities::{edge_violation, majority_violation, malcev_violation, parallelogram_violation};
use crate::independence::{
    check_fast_edge, check_fast_malcev, check_oracle, decide, verify_witness, DecideOptions, IndependenceReport,
    MethodChoice, Verdict, DEFAULT_LIMIT,
};
use crate::pairing::{constant_expansion, pair_polynomials, PairOptions};
use crate::relations::{all_congruences_product, all_tolerances_product, ProductFailure};
use crate::subpower::{generate_subuniverse, member_term, ProductContext, TupleCode};
use crate::term::Term;

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "varind", version, about = "Decide independence of finite algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Output::Human, global = true)]
    pub output: Output,
    /// Worker threads for the sweeps; 1 gives byte-identical runs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Member limit for closures.
    #[arg(long, default_value_t = DEFAULT_LIMIT, global = true)]
    pub limit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Human,
    Lines,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Fast,
    Oracle,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TermKind {
    Edge,
    Parallelogram,
    Malcev,
    Majority,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RelationKind {
    Tolerance,
    Congruence,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether two algebras are independent.
    Check {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Edge term, inline or `@FILE`.
        #[arg(long)]
        edge_term: Option<String>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Search for a binary term that is x on A and y on B.
    Witness { a: PathBuf, b: PathBuf },
    /// Check a term against the edge, parallelogram, Mal'cev or majority identities.
    VerifyTerm {
        alg: PathBuf,
        #[arg(long, value_enum)]
        kind: TermKind,
        /// Term, inline or `@FILE`.
        #[arg(long)]
        term: String,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Generate a subalgebra of A^m × B^n.
    Closure {
        a: PathBuf,
        /// Defaults to A.
        b: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        n: usize,
        /// Generator tuple such as `1,0|2`; repeatable.
        #[arg(long = "gen")]
        generators: Vec<String>,
        /// Print a term for each member.
        #[arg(long)]
        emit_terms: bool,
    },
    /// Check whether all tolerances (congruences) of E × F are products.
    Relations {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = RelationKind::Tolerance)]
        kind: RelationKind,
        /// Subuniverse of A such as `0,2`; defaults to all of A.
        #[arg(long)]
        sub_a: Option<String>,
        #[arg(long)]
        sub_b: Option<String>,
    },
    /// Pair two polynomials over the constant-expanded signature.
    Pair {
        a: PathBuf,
        b: PathBuf,
        /// Polynomial for A, inline or `@FILE`.
        #[arg(long)]
        pf: String,
        /// Polynomial for B, inline or `@FILE`.
        #[arg(long)]
        pg: String,
        #[arg(long)]
        edge_term: Option<String>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Run fast and oracle methods over a corpus directory and print CSV.
    Bench { corpus: PathBuf },
}

/// Output of one command: the exit code and the text for stdout.
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

fn exit_code_for_error(e: &Error) -> i32 {
    match e {
        Error::LimitExceeded { .. } => EXIT_INCONCLUSIVE,
        Error::Internal(_) | Error::Contract(_) => EXIT_INTERNAL,
        _ => EXIT_USAGE,
    }
}

/// Exit code for a verdict.
pub fn exit_code(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::Independent => EXIT_YES,
        Verdict::NotIndependent => EXIT_NO,
        Verdict::Inconclusive { .. } => EXIT_INCONCLUSIVE,
    }
}

fn read_algebra(path: &Path) -> Result<Algebra> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    Algebra::parse(&text).map_err(|e| match e {
        Error::Syntax { line, column, message } => Error::Usage(format!("{}:{line}:{column}: {message}", path.display())),
        other => other,
    })
}

/// An inline string, or the contents of `FILE` for `@FILE`.
fn read_inline(arg: &str) -> Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map(|s| s.trim().to_string())
            .map_err(|e| Error::Usage(format!("cannot read {path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn parse_term(arg: &str, alg: &Algebra) -> Result<Term> {
    Term::parse(&read_inline(arg)?, alg.signature())
}

fn parse_elems(text: &str) -> Result<Vec<Elem>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Elem>().map_err(|_| Error::Usage(format!("`{s}` is not an element"))))
        .collect()
}

fn edge_args(edge_term: &Option<String>, k: Option<usize>, alg: &Algebra) -> Result<Option<(Term, usize)>> {
    match (edge_term, k) {
        (Some(t), Some(k)) => Ok(Some((parse_term(t, alg)?, k))),
        (None, None) => Ok(None),
        _ => Err(Error::Usage("--edge-term and --k go together".into())),
    }
}

/// Printer for both output modes.
struct Report {
    lines: bool,
    out: String,
}

impl Report {
    fn new(lines: bool) -> Self {
        Report { lines, out: String::new() }
    }

    fn result(&mut self, fields: &[(&str, String)], human: &str) {
        if self.lines {
            let fields: Vec<String> = fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(self.out, "RESULT {}", fields.join(" "));
        } else {
            let _ = writeln!(self.out, "{human}");
        }
    }

    fn field(&mut self, key: &str, human_label: &str, value: impl std::fmt::Display) {
        if self.lines {
            let _ = writeln!(self.out, "{key}={value}");
        } else {
            let _ = writeln!(self.out, "  {human_label}: {value}");
        }
    }

    /// Human-only line, e.g. timings, which would break byte-identical runs.
    fn note(&mut self, text: impl std::fmt::Display) {
        if !self.lines {
            let _ = writeln!(self.out, "  {text}");
        }
    }
}

fn print_independence(rep: &mut Report, a: &Algebra, b: &Algebra, r: &IndependenceReport) -> Result<i32> {
    // Never print an unverified claim.
    if let Some(cx) = &r.counterexample {
        if !cx.verify(a, b)? {
            return Err(Error::Internal("counterexample failed re-verification".into()));
        }
    }
    if let Some(w) = &r.witness {
        if !verify_witness(a, b, w)? {
            return Err(Error::Internal("witness failed re-verification".into()));
        }
    }
    rep.result(
        &[("verdict", r.verdict.to_string()), ("method", r.method.to_string())],
        &format!("{} and {}: {} (method {})", a.name(), b.name(), r.verdict, r.method),
    );
    if let Verdict::Inconclusive { limit } = r.verdict {
        rep.field("LIMIT", "closure limit reached", limit);
    }
    if let Some(w) = &r.witness {
        rep.field("WITNESS", "witness", w.display(a.signature()));
    }
    if let Some(cx) = &r.counterexample {
        rep.field("R", "r", cx.r);
        rep.field("S", "s", cx.s);
        rep.field("P", "p", cx.p());
        rep.field("Q", "q", cx.q());
        rep.field("MISSING", "missing from <p,q>", cx.missing_tuple());
    }
    let s = &r.stats;
    if s.closure_bound.is_some() {
        rep.field("CLOSURES", "closures", s.closures);
        rep.field("MAX_CLOSURE", "largest closure", s.max_closure);
    }
    if let Some(bound) = s.closure_bound {
        rep.field("CLOSURE_BOUND", "closure bound", bound);
    }
    if let Some(m) = s.oracle_members {
        rep.field("ORACLE_MEMBERS", "oracle members", m);
    }
    if let Some(t) = s.fast_time {
        rep.note(format!("fast time: {:.3} ms", t.as_secs_f64() * 1e3));
    }
    if let Some(t) = s.oracle_time {
        rep.note(format!("oracle time: {:.3} ms", t.as_secs_f64() * 1e3));
    }
    Ok(exit_code(r.verdict))
}

fn cmd_check(
    cli: &Cli,
    rep: &mut Report,
    a: &Path,
    b: &Path,
    method: MethodArg,
    edge_term: &Option<String>,
    k: Option<usize>,
) -> Result<i32> {
    let (a, b) = (read_algebra(a)?, read_algebra(b)?);
    a.same_signature(&b)?;
    let edge = edge_args(edge_term, k, &a)?;
    let opts = DecideOptions {
        method: match method {
            MethodArg::Auto => MethodChoice::Auto,
            MethodArg::Fast => MethodChoice::Fast,
            MethodArg::Oracle => MethodChoice::Oracle,
            MethodArg::Both => MethodChoice::Both,
        },
        k: edge.as_ref().map(|e| e.1),
        edge_term: edge.map(|e| e.0),
        limit: cli.limit,
        threads: cli.threads,
    };
    let report = decide(&a, &b, &opts)?;
    print_independence(rep, &a, &b, &report)
}

fn cmd_witness(cli: &Cli, rep: &mut Report, a: &Path, b: &Path) -> Result<i32> {
    let (a, b) = (read_algebra(a)?, read_algebra(b)?);
    let report = check_oracle(&a, &b, cli.limit)?;
    if rep.lines {
        return print_independence(rep, &a, &b, &report);
    }
    // Human mode prints just the term, for piping.
    match &report.witness {
        Some(w) => {
            if !verify_witness(&a, &b, w)? {
                return Err(Error::Internal("witness failed re-verification".into()));
            }
            let _ = writeln!(rep.out, "{}", w.display(a.signature()));
        }
        None => {
            let _ = writeln!(rep.out, "no witness: {}", report.verdict);
        }
    }
    Ok(exit_code(report.verdict))
}

fn cmd_verify_term(rep: &mut Report, alg: &Path, kind: TermKind, term: &str, k: Option<usize>) -> Result<i32> {
    let alg = read_algebra(alg)?;
    let t = parse_term(term, &alg)?;
    let need_k = || k.ok_or_else(|| Error::Usage("--k is required for this kind".into()));
    let (failure, name) = match kind {
        TermKind::Edge => (edge_violation(&alg, &t, need_k()?)?, "edge"),
        TermKind::Parallelogram => (parallelogram_violation(&alg, &t, need_k()?)?, "parallelogram"),
        TermKind::Malcev => (malcev_violation(&alg, &t)?, "malcev"),
        TermKind::Majority => (majority_violation(&alg, &t)?, "majority"),
    };
    let verified = failure.is_none();
    let mut fields = vec![("verified", verified.to_string()), ("kind", name.to_string())];
    if let Some(k) = k {
        fields.push(("k", k.to_string()));
    }
    let human = if verified {
        format!("{name} identities hold on {}", alg.name())
    } else {
        format!("{name} identities fail on {}", alg.name())
    };
    rep.result(&fields, &human);
    if let Some(f) = failure {
        rep.field("FAILURE", "failure", f);
    }
    Ok(if verified { EXIT_YES } else { EXIT_NO })
}

fn parse_tuple(ctx: &ProductContext<'_>, text: &str) -> Result<TupleCode> {
    let (a, b) = match text.split_once('|') {
        Some((a, b)) => (parse_elems(a)?, parse_elems(b)?),
        None => (parse_elems(text)?, Vec::new()),
    };
    if a.len() != ctx.m() || b.len() != ctx.n() {
        return Err(Error::Usage(format!(
            "tuple `{text}` needs {} A-entries and {} B-entries",
            ctx.m(),
            ctx.n()
        )));
    }
    ctx.encode_parts(&a, &b)
}

#[allow(clippy::too_many_arguments)]
fn cmd_closure(
    cli: &Cli,
    rep: &mut Report,
    a: &Path,
    b: &Option<PathBuf>,
    m: usize,
    n: usize,
    generators: &[String],
    emit_terms: bool,
) -> Result<i32> {
    let alg_a = read_algebra(a)?;
    let alg_b = match b {
        Some(p) => read_algebra(p)?,
        None => alg_a.clone(),
    };
    let ctx = ProductContext::new(&alg_a, &alg_b, m, n)?;
    let gens: Vec<TupleCode> = generators.iter().map(|g| parse_tuple(&ctx, g)).collect::<Result<_>>()?;
    let res = generate_subuniverse(&ctx, &gens, cli.limit)?;
    rep.result(
        &[("members", res.len().to_string()), ("truncated", res.truncated().to_string())],
        &format!(
            "{} members{}",
            res.len(),
            if res.truncated() { " (truncated at the limit)" } else { "" }
        ),
    );
    let vars: Vec<usize> = (0..gens.len()).collect();
    for &code in res.members() {
        rep.field("MEMBER", "member", ctx.format(code));
        if emit_terms {
            let t = member_term(&res, code, &vars).expect("members have derivations");
            rep.field("TERM", "  term", t.display(alg_a.signature()));
        }
    }
    Ok(if res.truncated() { EXIT_INCONCLUSIVE } else { EXIT_YES })
}

fn restrict(alg: Algebra, sub: &Option<String>) -> Result<Algebra> {
    match sub {
        Some(s) => alg.subalgebra(&parse_elems(s)?),
        None => Ok(alg),
    }
}

fn format_pair(p: (Elem, Elem), f_size: usize) -> String {
    let f = f_size as Elem;
    format!("(({},{}),({},{}))", p.0 / f, p.0 % f, p.1 / f, p.1 % f)
}

fn cmd_relations(
    rep: &mut Report,
    a: &Path,
    b: &Path,
    kind: RelationKind,
    sub_a: &Option<String>,
    sub_b: &Option<String>,
) -> Result<i32> {
    let e = restrict(read_algebra(a)?, sub_a)?;
    let f = restrict(read_algebra(b)?, sub_b)?;
    let (failure, name): (Option<ProductFailure>, &str) = match kind {
        RelationKind::Tolerance => (all_tolerances_product(&e, &f)?, "tolerance"),
        RelationKind::Congruence => (all_congruences_product(&e, &f)?, "congruence"),
    };
    let product = if failure.is_none() { "yes" } else { "no" };
    rep.result(
        &[("product", product.to_string()), ("kind", name.to_string())],
        &format!("every {name} of E×F is a product: {product}"),
    );
    if let Some(fl) = failure {
        let fs = f.size();
        rep.field("SEED1", "seed", format_pair(fl.seeds[0], fs));
        rep.field("SEED2", "seed", format_pair(fl.seeds[1], fs));
        rep.field("MISSING", "missing recombination", format_pair(fl.missing, fs));
        let pairs: Vec<String> = fl.relation.pairs().map(|p| format_pair(p, fs)).collect();
        rep.field("RELATION", "generated relation", pairs.join(" "));
        return Ok(EXIT_NO);
    }
    Ok(EXIT_YES)
}

#[allow(clippy::too_many_arguments)]
fn cmd_pair(
    cli: &Cli,
    rep: &mut Report,
    a: &Path,
    b: &Path,
    pf: &str,
    pg: &str,
    edge_term: &Option<String>,
    k: Option<usize>,
) -> Result<i32> {
    let (a, b) = (read_algebra(a)?, read_algebra(b)?);
    let edge = edge_args(edge_term, k, &a)?;
    let (a_star, _) = constant_expansion(&a, &b)?;
    let pf = parse_term(pf, &a_star)?;
    let pg = parse_term(pg, &a_star)?;
    let opts = PairOptions { edge_term: edge, limit: cli.limit };
    let h = pair_polynomials(&a, &b, &pf, &pg, &opts)?;
    rep.result(&[("verified", "true".to_string())], "paired term (verified on both algebras):");
    rep.field("TERM", "term", h.display(a_star.signature()));
    Ok(EXIT_YES)
}

const BENCH_HEADER: &str = "pair,verdict,method,closures,max_closure,oracle_members,fast_ms,oracle_ms";

/// A corpus entry: `NAME A_FILE B_FILE K EDGE_TERM`, paths relative to the corpus.
struct BenchEntry {
    name: String,
    a: PathBuf,
    b: PathBuf,
    k: String,
    term: String,
}

fn read_corpus(dir: &Path) -> Result<Vec<BenchEntry>> {
    if !dir.is_dir() {
        return Err(Error::Usage(format!("{} is not a directory", dir.display())));
    }
    let manifest = dir.join("corpus.txt");
    if !manifest.exists() {
        return Ok(Vec::new());
    }
    let text = std::fs::read_to_string(&manifest)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", manifest.display())))?;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(5, char::is_whitespace);
        let mut next = || parts.next().map(str::trim).filter(|s| !s.is_empty());
        match (next(), next(), next(), next(), next()) {
            (Some(name), Some(a), Some(b), Some(k), Some(term)) => entries.push(BenchEntry {
                name: name.to_string(),
                a: dir.join(a),
                b: dir.join(b),
                k: k.to_string(),
                term: term.to_string(),
            }),
            _ => {
                return Err(Error::Usage(format!(
                    "{}:{}: expected `NAME A_FILE B_FILE K EDGE_TERM`",
                    manifest.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(entries)
}

/// CSV row for one entry; `Err` rows are printed as errors.
fn bench_row(cli: &Cli, entry: &BenchEntry) -> Result<(String, i32)> {
    let (a, b) = (read_algebra(&entry.a)?, read_algebra(&entry.b)?);
    a.same_signature(&b)?;
    let k: usize = entry
        .k
        .parse()
        .map_err(|_| Error::Usage(format!("`{}` is not a valid k", entry.k)))?;
    let t = Term::parse(&entry.term, a.signature())?;
    let run = || -> Result<_> {
        let fast = if k == 2 {
            check_fast_malcev(&a, &b, &crate::identities::edge2_to_malcev(&t)?)
                .or_else(|_| check_fast_edge(&a, &b, &t, k))?
        } else {
            check_fast_edge(&a, &b, &t, k)?
        };
        let oracle = check_oracle(&a, &b, cli.limit)?;
        Ok((fast, oracle))
    };
    let (fast, oracle) = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let agree = match oracle.verdict {
        Verdict::Inconclusive { .. } => true,
        v => v == fast.verdict,
    };
    let members = oracle.stats.oracle_members.unwrap_or(0);
    let members = match oracle.verdict {
        Verdict::Inconclusive { .. } => format!(">={members}"),
        _ => members.to_string(),
    };
    let ms = |d: Option<std::time::Duration>| format!("{:.3}", d.unwrap_or_default().as_secs_f64() * 1e3);
    let verdict = if agree { fast.verdict.to_string() } else { "disagree".into() };
    let row = format!(
        "{},{},{},{},{},{},{},{}",
        entry.name,
        verdict,
        fast.method,
        fast.stats.closures,
        fast.stats.max_closure,
        members,
        ms(fast.stats.fast_time),
        ms(oracle.stats.oracle_time)
    );
    Ok((row, if agree { EXIT_YES } else { EXIT_INTERNAL }))
}

fn cmd_bench(cli: &Cli, rep: &mut Report, corpus: &Path) -> Result<i32> {
    let entries = read_corpus(corpus)?;
    let _ = writeln!(rep.out, "{BENCH_HEADER}");
    let mut code = EXIT_YES;
    for entry in &entries {
        match bench_row(cli, entry) {
            Ok((row, c)) => {
                let _ = writeln!(rep.out, "{row}");
                code = code.max(c);
            }
            Err(e) => {
                let _ = writeln!(rep.out, "{},error,,,,,,", entry.name);
                eprintln!("{}: {e}", entry.name);
                code = code.max(exit_code_for_error(&e));
            }
        }
    }
    Ok(code)
}

/// Runs a parsed command line, returning the exit code and stdout text.
pub fn run(cli: &Cli) -> Outcome {
    let mut rep = Report::new(cli.output == Output::Lines);
    let started = Instant::now();
    let result = match &cli.command {
        Command::Check { a, b, method, edge_term, k } => cmd_check(cli, &mut rep, a, b, *method, edge_term, *k),
        Command::Witness { a, b } => cmd_witness(cli, &mut rep, a, b),
        Command::VerifyTerm { alg, kind, term, k } => cmd_verify_term(&mut rep, alg, *kind, term, *k),
        Command::Closure { a, b, m, n, generators, emit_terms } => {
            cmd_closure(cli, &mut rep, a, b, *m, *n, generators, *emit_terms)
        }
        Command::Relations { a, b, kind, sub_a, sub_b } => cmd_relations(&mut rep, a, b, *kind, sub_a, sub_b),
        Command::Pair { a, b, pf, pg, edge_term, k } => cmd_pair(cli, &mut rep, a, b, pf, pg, edge_term, *k),
        Command::Bench { corpus } => cmd_bench(cli, &mut rep, corpus),
    };
    match result {
        Ok(code) => {
            if !matches!(cli.command, Command::Bench { .. } | Command::Witness { .. }) {
                rep.note(format!("wall time: {:.3} ms", started.elapsed().as_secs_f64() * 1e3));
            }
            Outcome { code, stdout: rep.out }
        }
        Err(e) => {
            let code = exit_code_for_error(&e);
            let mut out = rep.out;
            if rep.lines {
                let kind = match code {
                    EXIT_INCONCLUSIVE => "inconclusive",
                    EXIT_INTERNAL => "internal",
                    _ => "usage",
                };
                let _ = writeln!(out, "RESULT error={kind}");
                let _ = writeln!(out, "ERROR={e}");
            }
            eprintln!("error: {e}");
            Outcome { code, stdout: out }
        }
    }
}

/// Entry point for the binary: parses `std::env::args`, prints, returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_YES };
            let _ = e.print();
            return code;
        }
    };
    let outcome = run(&cli);
    print!("{}", outcome.stdout);
    outcome.code
}
