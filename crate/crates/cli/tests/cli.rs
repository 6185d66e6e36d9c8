use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pika::grammars;
use serde_json::Value;

const ASSIGN: &str = "
Program <- Assign+;
Assign  <- Ident '=' Expr ';';
Expr    <- Term (('+' / '-') Term)*;
Term    <- Ident / [0-9]+ / '(' Expr ')';
Ident   <- [a-z]+;
";

fn pika(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pika")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn left_recursive_parse_is_left_nested() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "lr.peg", grammars::PRECEDENCE_LEFT_RECURSIVE);
    let i = write(dir.path(), "in.txt", "a+b+c");
    let out = pika(&["parse", "--grammar", &g, "--input", &i]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["complete"], true);
    let root = &v["tree"];
    assert_eq!(root["name"], "E0");
    assert_eq!(root["len"], 5);
    let lhs = &root["children"][0]["children"][0];
    assert_eq!((lhs["name"].as_str(), lhs["len"].as_u64()), (Some("E0"), Some(3)));
}

#[test]
fn missing_paren_reports_one_span() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "assign.peg", ASSIGN);
    let i = write(dir.path(), "in.txt", "a=1;bb=2;c=(d+e;f=5;g=6;");
    let out = pika(&[
        "parse",
        "--grammar",
        &g,
        "--input",
        &i,
        "--recover-rule",
        "Program",
        "--recover-rule",
        "Assign",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let errors = v["errors"].as_array().unwrap();
    assert_eq!(errors.len(), 1);
    assert_eq!((errors[0]["start"].as_u64(), errors[0]["end"].as_u64()), (Some(9), Some(16)));
    assert_eq!(errors[0]["text"], "c=(d+e;");
    assert_eq!(errors[0]["recovery"]["start"], 16);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let i = write(dir.path(), "in.txt", "x");
    assert_eq!(pika(&["parse", "--grammar", "/nonexistent.peg", "--input", &i]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.peg", "S <- 'a' V;");
    let out = pika(&["parse", "--grammar", &bad, "--input", &i]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("offset 9"), "{err}");
    let g = write(dir.path(), "g.peg", "S <- 'x';");
    assert_eq!(
        pika(&["parse", "--grammar", &g, "--input", &i, "--start-rule", "Q"]).status.code(),
        Some(2)
    );
    assert_eq!(pika(&["parse", "--input", &i]).status.code(), Some(2));
    assert_eq!(pika(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn packrat_engine_rejects_left_recursion() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "lr.peg", grammars::PRECEDENCE_LEFT_RECURSIVE);
    let i = write(dir.path(), "in.txt", "a+b");
    let out = pika(&["parse", "--grammar", &g, "--input", &i, "--engine", "packrat"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("left-recursive"));
}

#[test]
fn engines_print_the_same_tree() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "p.peg", grammars::PRECEDENCE_PRIMITIVE);
    let i = write(dir.path(), "in.txt", "-(a+1)*b-c");
    let a = pika(&["parse", "--grammar", &g, "--input", &i, "--format", "sexpr"]);
    let b = pika(&["parse", "--grammar", &g, "--input", &i, "--format", "sexpr", "--engine", "packrat"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "lr.peg", grammars::PRECEDENCE_SHORTHAND);
    let i = write(dir.path(), "in.txt", "1*2+3*-4-(5)");
    let runs: Vec<_> = (0..3).map(|_| pika(&["parse", "--grammar", &g, "--input", &i]).stdout).collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn ast_output_elides_unlabeled_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(
        dir.path(),
        "sum.peg",
        "Sum <- S:(left:Term WS '+' WS right:Term); Term <- [a-z]+; WS <- [ ]*;",
    );
    let i = write(dir.path(), "in.txt", "ab + c");
    let out = pika(&["parse", "--grammar", &g, "--input", &i, "--ast", "--format", "sexpr"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        r#"(S 0 6 (left 0 2 "ab") (right 5 1 "c"))"#
    );
}

#[test]
fn naive_repetition_flag() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "w.peg", "W <- [a-z]+;");
    let i = write(dir.path(), "in.txt", "hello");
    let a = json(&pika(&["parse", "--grammar", &g, "--input", &i]));
    let b = json(&pika(&["parse", "--grammar", &g, "--input", &i, "--no-oneormore-rewrite"]));
    assert_eq!(a["tree"]["children"].as_array().unwrap().len(), 5);
    assert_eq!(b["tree"]["children"].as_array().unwrap().len(), 5);
}

#[test]
fn gen_is_seeded() {
    let a = pika(&["gen", "--count", "5", "--max-depth", "8", "--seed", "11"]);
    let b = pika(&["gen", "--count", "5", "--max-depth", "8", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 5);
}

#[test]
fn bench_writes_csv_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    assert_eq!(
        pika(&["gen", "--count", "6", "--max-depth", "9", "--seed", "2", "--out", corpus.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let csv = dir.path().join("out.csv");
    let out = pika(&[
        "bench",
        corpus.to_str().unwrap(),
        "--engines",
        "pika,packrat",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("engine,input_id,input_length,parse_nanos,memo_entries"));
    assert_eq!(lines.count(), 12);
    let summary = String::from_utf8_lossy(&out.stdout);
    assert!(summary.contains("pika:") && summary.contains("packrat:"), "{summary}");
}

#[test]
fn bench_single_input_has_no_fit() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "one.txt", "1+2");
    let out = pika(&["bench", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("fit undefined"));
    let empty = tempfile::tempdir().unwrap();
    assert_eq!(pika(&["bench", empty.path().to_str().unwrap()]).status.code(), Some(2));
}
