use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn lpterm(args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lpterm"));
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("LPTERM_")) {
        cmd.env_remove(k);
    }
    cmd.args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn terminating_program_exits_zero() {
    let o = lpterm(&[path(&corpus("ex12.pl"))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("verdict: TERMINATING\n"), "{out}");
    assert!(out.contains("dependency graph: SCCs {(2), (3)}"));
}

#[test]
fn unknown_exits_one() {
    let o = lpterm(&[path(&corpus("pq.pl"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("verdict: UNKNOWN"));
}

#[test]
fn missing_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.pl");
    let o = lpterm(&[missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.starts_with("lpterm: ") && err.contains("missing.pl"), "{err}");
}

#[test]
fn syntax_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.pl");
    std::fs::write(&f, "p(X) :- q(X").unwrap();
    let o = lpterm(&[f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classical_on_non_well_moded_program() {
    let o = lpterm(&["--classical", path(&corpus("ex13.pl"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("not well moded"), "{err}");
}

#[test]
fn emits_classical_rewrite_system() {
    let o = lpterm(&["--classical", "--emit-trs", path(&corpus("ex12.pl"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "p_in(X) -> p_out(X)\n\
         p_in(f(X)) -> u_2_1(p_in(f(X)), X)\n\
         u_2_1(p_out(f(Z)), X) -> u_2_2(p_in(Z), X, Z)\n\
         u_2_2(p_out(g(Y)), X, Z) -> p_out(g(Y))\n"
    );
}

#[test]
fn emits_new_rewrite_system() {
    let o = lpterm(&["--emit-trs", path(&corpus("append.pl"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "append_in([], M, M) -> append_out([], M, M)\n\
         append_in(.(X, L), M, .(X, N)) -> u_2_1(append_in(L, M, N), X, L, M, N)\n\
         u_2_1(append_out(L, M, N), X, L, M, N) -> append_out(.(X, L), M, .(X, N))\n"
    );
}

#[test]
fn options_from_environment() {
    let f = corpus("fg.pl");
    assert_eq!(lpterm(&[path(&f)]).status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_lpterm")).env("LPTERM_MAX_COEFF", "5").arg(&f).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("max coeff 5"));
    let o = Command::new(env!("CARGO_BIN_EXE_lpterm"))
        .env("LPTERM_MODE_SPLITTING", "off")
        .arg(corpus("rotate.pl"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn flags_select_heuristic() {
    assert_eq!(lpterm(&["--heuristic", "tb2", path(&corpus("safeinv.pl"))]).status.code(), Some(0));
    assert_eq!(lpterm(&["--heuristic", "tb", path(&corpus("safeinv.pl"))]).status.code(), Some(1));
    assert_eq!(lpterm(&["--heuristic", "xx", path(&corpus("safeinv.pl"))]).status.code(), Some(2));
    assert_eq!(lpterm(&["--max-coeff", "6", path(&corpus("safeinv.pl"))]).status.code(), Some(2));
}

#[test]
fn json_proof() {
    let o = lpterm(&["--proof-format", "json", path(&corpus("ex12.pl"))]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "TERMINATING");
    assert!(v["proof"]["hash"].as_str().is_some_and(|h| h.len() == 16));
}

#[test]
fn identical_runs_give_identical_output() {
    for args in [vec![path(&corpus("rotate.pl"))], vec!["--proof-format", "json", path(&corpus("fg.pl"))]] {
        assert_eq!(lpterm(&args).stdout, lpterm(&args).stdout);
    }
}

#[test]
fn directory_table() {
    let dir = corpus("");
    let o = lpterm(&[path(&dir)]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().filter(|l| l.contains(".pl ")).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().any(|r| r.starts_with("ex12.pl") && r.contains("TERMINATING")));
    assert!(out.contains("Successes: 5  Failures: 4  Timeouts: 0  Errors: 0"), "{out}");
}

#[test]
fn directory_records_as_json_lines() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["append.pl", "ex12.pl"] {
        std::fs::copy(corpus(name), tmp.path().join(name)).unwrap();
    }
    let o = lpterm(&["--proof-format", "json", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let recs: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(recs.len(), 3);
    assert_eq!(recs[0]["program"], "append.pl");
    assert_eq!(recs[2]["successes"], 2);
}

#[test]
fn check_subcommand_is_consistent() {
    let o = lpterm(&["check", "--samples", "20", "--depth-bound", "2000", path(&corpus("append.pl"))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("queries: 20"), "{out}");
    assert!(out.contains("exceeded: 0"), "{out}");
    let o = lpterm(&[
        "check",
        "--samples",
        "5",
        "--depth-bound",
        "200",
        "--proof-format",
        "json",
        path(&corpus("ordered.pl")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["verdict"], "UNKNOWN (no reduction pair found)");
    assert!(v["report"]["depth_exceeded"].as_u64().unwrap() > 0);
}
