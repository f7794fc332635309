use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;
use varind::catalog::{cyclic_group, group_signature, lattice2, trivial};
use varind::{Algebra, Signature, Term};

const Z2_Z3_EDGE: &str = "(+ x1 (+ x0 (+ x0 (+ x0 (+ x0 (+ x0 x2))))))";

struct Run {
    code: i32,
    stdout: String,
}

fn varind(args: &[&str], dir: &Path) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_varind"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("utf-8"),
    }
}

fn write(dir: &Path, name: &str, alg: &Algebra) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, alg.to_text()).unwrap();
    path
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "z2.alg", &cyclic_group(2));
    write(dir.path(), "z3.alg", &cyclic_group(3));
    write(dir.path(), "z4.alg", &cyclic_group(4));
    write(dir.path(), "l2.alg", &lattice2());
    write(dir.path(), "one.alg", &trivial(&group_signature()));
    dir
}

fn value<'a>(stdout: &'a str, key: &str) -> Option<&'a str> {
    stdout.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
}

fn sig() -> Signature {
    group_signature()
}

#[test]
fn check_both_methods_agree_on_z2_z3() {
    let dir = setup();
    let r = varind(
        &["check", "z2.alg", "z3.alg", "--method", "both", "--edge-term", Z2_Z3_EDGE, "--k", "2", "--output", "lines"],
        dir.path(),
    );
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.stdout.lines().next(), Some("RESULT verdict=independent method=both"));
    let w = Term::parse(value(&r.stdout, "WITNESS").unwrap(), &sig()).unwrap();
    let (z2, z3) = (cyclic_group(2), cyclic_group(3));
    for x in 0..3u32 {
        for y in 0..3u32 {
            if x < 2 && y < 2 {
                assert_eq!(w.eval(&z2, &[x, y]).unwrap(), x);
            }
            assert_eq!(w.eval(&z3, &[x, y]).unwrap(), y);
        }
    }
}

#[test]
fn check_oracle_reports_counterexample() {
    let dir = setup();
    let r = varind(&["check", "z2.alg", "z4.alg", "--method", "oracle", "--output", "lines"], dir.path());
    assert_eq!(r.code, 1);
    assert_eq!(r.stdout.lines().next(), Some("RESULT verdict=not-independent method=oracle"));
    for key in ["R", "S", "P", "Q", "MISSING"] {
        assert!(value(&r.stdout, key).is_some(), "missing {key}");
    }
}

#[test]
fn signature_mismatch_is_an_input_error() {
    let dir = setup();
    assert_eq!(varind(&["check", "z2.alg", "l2.alg"], dir.path()).code, 2);
    let r = varind(&["check", "z2.alg", "l2.alg", "--output", "lines"], dir.path());
    assert!(r.stdout.starts_with("RESULT error=usage\nERROR="));
}

#[test]
fn usage_errors() {
    let dir = setup();
    assert_eq!(varind(&["check", "z2.alg"], dir.path()).code, 2);
    assert_eq!(varind(&["check", "z2.alg", "missing.alg"], dir.path()).code, 2);
    assert_eq!(varind(&["check", "z2.alg", "z3.alg", "--k", "2"], dir.path()).code, 2);
    assert_eq!(varind(&["check", "z2.alg", "z3.alg", "--method", "fast"], dir.path()).code, 2);
}

#[test]
fn fast_method_with_term_file() {
    let dir = setup();
    std::fs::write(dir.path().join("edge.term"), Z2_Z3_EDGE).unwrap();
    let r = varind(
        &["check", "z2.alg", "z4.alg", "--method", "fast", "--edge-term", "@edge.term", "--k", "2", "--output", "lines"],
        dir.path(),
    );
    // 5·x1 is not −x1 in Z4, so the term is rejected.
    assert_eq!(r.code, 2, "{}", r.stdout);
    let r = varind(
        &["check", "z2.alg", "z3.alg", "--method", "fast", "--edge-term", "@edge.term", "--k", "2", "--output", "lines"],
        dir.path(),
    );
    assert_eq!(r.code, 0);
    assert!(value(&r.stdout, "CLOSURE_BOUND").is_some());
}

#[test]
fn limit_gives_inconclusive() {
    let dir = setup();
    let r = varind(&["check", "z2.alg", "z3.alg", "--method", "oracle", "--limit", "3", "--output", "lines"], dir.path());
    assert_eq!(r.code, 3);
    assert_eq!(r.stdout.lines().next(), Some("RESULT verdict=inconclusive method=oracle"));
}

#[test]
fn line_output_is_stable_single_threaded() {
    let dir = setup();
    let edge = varind::identities::malcev_to_edge(&varind::catalog::group_malcev(11), 2).unwrap();
    let edge = edge.display(&sig()).to_string();
    let args = [
        "check", "z3.alg", "z4.alg", "--method", "both", "--edge-term", &edge, "--k", "2", "--threads", "1", "--output",
        "lines",
    ];
    let first = varind(&args, dir.path());
    assert_eq!(first.code, 0, "{}", first.stdout);
    assert_eq!(first.stdout, varind(&args, dir.path()).stdout);
    assert!(first.stdout.lines().skip(1).all(|l| l.contains('=') && !l.contains(' ') || l.starts_with("WITNESS=")));
}

#[test]
fn witness_command() {
    let dir = setup();
    let r = varind(&["witness", "z2.alg", "z3.alg"], dir.path());
    assert_eq!(r.code, 0);
    let t = Term::parse(r.stdout.trim(), &sig()).unwrap();
    assert!(varind::independence::verify_witness(&cyclic_group(2), &cyclic_group(3), &t).unwrap());

    let r = varind(&["witness", "one.alg", "one.alg"], dir.path());
    assert_eq!((r.code, r.stdout.trim()), (0, "x1"));

    let r = varind(&["witness", "z2.alg", "z4.alg", "--output", "lines"], dir.path());
    assert_eq!(r.code, 1);
    assert!(value(&r.stdout, "WITNESS").is_none());
}

#[test]
fn verify_term_command() {
    let dir = setup();
    let edge = varind::identities::malcev_to_edge(&varind::catalog::group_malcev(2), 2).unwrap();
    let edge = edge.display(&sig()).to_string();
    assert_eq!(varind(&["verify-term", "z3.alg", "--kind", "edge", "--k", "2", "--term", &edge], dir.path()).code, 0);
    let r = varind(
        &["verify-term", "z4.alg", "--kind", "edge", "--k", "2", "--term", "(+ x0 (+ x1 x2))", "--output", "lines"],
        dir.path(),
    );
    assert_eq!(r.code, 1);
    assert!(r.stdout.starts_with("RESULT verified=false kind=edge k=2\nFAILURE="));
    assert_eq!(varind(&["verify-term", "z4.alg", "--kind", "malcev", "--term", "(+ x0 x1 x2)"], dir.path()).code, 2);
    assert_eq!(varind(&["verify-term", "z4.alg", "--kind", "edge", "--term", "x0"], dir.path()).code, 2);
    assert_eq!(
        varind(&["verify-term", "l2.alg", "--kind", "majority", "--term", &varind::catalog::lattice_majority().display(lattice2().signature()).to_string()], dir.path()).code,
        0
    );
}

#[test]
fn closure_command() {
    let dir = setup();
    let r = varind(
        &["closure", "z2.alg", "z4.alg", "--m", "1", "--n", "1", "--gen", "1|1", "--gen", "0|2", "--emit-terms", "--output", "lines"],
        dir.path(),
    );
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout.lines().next(), Some("RESULT members=4 truncated=false"));
    let members: Vec<&str> = r.stdout.lines().filter_map(|l| l.strip_prefix("MEMBER=")).collect();
    assert_eq!(members, ["(1 | 1)", "(0 | 2)", "(1 | 3)", "(0 | 0)"]);
    assert_eq!(r.stdout.lines().filter(|l| l.starts_with("TERM=")).count(), 4);

    let r = varind(&["closure", "z4.alg", "--gen", "1", "--output", "lines"], dir.path());
    assert_eq!(r.stdout.lines().next(), Some("RESULT members=4 truncated=false"));

    assert_eq!(varind(&["closure", "z4.alg", "--gen", "1,2"], dir.path()).code, 2);
    assert_eq!(varind(&["closure", "z4.alg", "--gen", "7"], dir.path()).code, 2);
}

#[test]
fn relations_command() {
    let dir = setup();
    let r = varind(&["relations", "z2.alg", "z3.alg", "--output", "lines"], dir.path());
    assert_eq!((r.code, r.stdout.trim()), (0, "RESULT product=yes kind=tolerance"));
    let r = varind(&["relations", "z2.alg", "z2.alg", "--kind", "congruence", "--output", "lines"], dir.path());
    assert_eq!(r.code, 1);
    assert!(value(&r.stdout, "SEED1").is_some() && value(&r.stdout, "MISSING").is_some());
    assert_eq!(varind(&["relations", "one.alg", "one.alg"], dir.path()).code, 0);
    // {0,2} is a subuniverse of Z4 isomorphic to Z2.
    let r = varind(&["relations", "z4.alg", "z2.alg", "--sub-a", "0,2", "--kind", "congruence"], dir.path());
    assert_eq!(r.code, 1);
    assert_eq!(varind(&["relations", "z4.alg", "z2.alg", "--sub-a", "0,1"], dir.path()).code, 2);
}

#[test]
fn pair_command() {
    let dir = setup();
    let r = varind(&["pair", "z2.alg", "z3.alg", "--pf", "(+ x0 (c_1_0))", "--pg", "x0", "--output", "lines"], dir.path());
    assert_eq!(r.code, 0, "{}", r.stdout);
    let (a, b) = varind::pairing::constant_expansion(&cyclic_group(2), &cyclic_group(3)).unwrap();
    let h = Term::parse(value(&r.stdout, "TERM").unwrap(), a.signature()).unwrap();
    for x in 0..2 {
        assert_eq!(h.eval(&a, &[x]).unwrap(), (x + 1) % 2);
    }
    for y in 0..3 {
        assert_eq!(h.eval(&b, &[y]).unwrap(), y);
    }
    assert_eq!(varind(&["pair", "z2.alg", "z2.alg", "--pf", "x0", "--pg", "x0"], dir.path()).code, 2);
}

#[test]
fn bench_command() {
    let dir = setup();
    let corpus = dir.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    let r = varind(&["bench", "corpus"], dir.path());
    assert_eq!((r.code, r.stdout.lines().count()), (0, 1));

    for name in ["z2.alg", "z3.alg", "z4.alg", "l2.alg"] {
        std::fs::copy(dir.path().join(name), corpus.join(name)).unwrap();
    }
    let manifest = format!(
        "# name a b k edge-term\nz2z3 z2.alg z3.alg 2 {Z2_Z3_EDGE}\nz2z4 z2.alg z4.alg 2 (+ x1 (+ x0 (+ x0 (+ x0 x2))))\nz3z3 z3.alg z3.alg 2 (+ x1 (+ x0 (+ x0 x2)))\n"
    );
    std::fs::write(corpus.join("corpus.txt"), &manifest).unwrap();
    let r = varind(&["bench", "corpus", "--threads", "1"], dir.path());
    assert_eq!(r.code, 0, "{}", r.stdout);
    let rows: Vec<Vec<&str>> = r.stdout.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let verdicts: Vec<&str> = rows.iter().map(|r| r[1]).collect();
    assert_eq!(verdicts, ["independent", "not-independent", "not-independent"]);

    std::fs::write(corpus.join("corpus.txt"), manifest + "bad z2.alg l2.alg 2 x0\n").unwrap();
    let r = varind(&["bench", "corpus"], dir.path());
    assert_eq!(r.code, 2);
    assert!(r.stdout.lines().last().unwrap().starts_with("bad,error"));
}
