use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polybounce")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

#[test]
fn bounce_forward_and_backward() {
    let sq = data("square.table");
    let out = stdout(&["bounce", "--table", &sq, "--start", "1/2", "1/2", "--dir", "2", "1", "--bounces", "6", "--backward", "3"]);
    assert_eq!(out, "2,3,4,2,1,4\nbackward 4,1,2\n");
}

#[test]
fn bounce_into_corner() {
    let sq = data("square.table");
    let out = stdout(&["bounce", "--table", &sq, "--start", "1/2", "1/2", "--dir", "1", "1", "--bounces", "4"]);
    assert_eq!(out, "()\nsingular vertex 2\n");
}

#[test]
fn negative_numbers_are_values() {
    let sq = data("square.table");
    let out = stdout(&["bounce", "--table", &sq, "--start", "1/2", "1/2", "--dir", "-2", "-1", "--bounces", "2"]);
    assert_eq!(out, "4,1\n");
}

#[test]
fn periodic_rows() {
    let sq = data("square.table");
    assert_eq!(stdout(&["periodic", "--table", &sq, "--word", "3,1"]), "3,1\ttrue\t0\t2\t1\n# reason Found\n");
    assert_eq!(
        stdout(&["periodic", "--table", &sq, "--word", "2,3"]),
        "2,3\tfalse\t-\t-\t-\n# reason NonTranslationComposite\n"
    );
    assert_eq!(
        stdout(&["periodic", "--table", &sq, "--word", "2,3,4,1"]),
        "2,3,4,1\ttrue\t2\t2\tsqrt(1/2)\n# reason Found\n"
    );
}

#[test]
fn diagonal_table() {
    let out = stdout(&["diagonals", "--table", &data("square.table"), "--vertex", "0", "--max-len", "5"]);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0], "()\t2\t2");
    assert!(rows.iter().all(|r| r.split('\t').count() == 3));
}

#[test]
fn unfold_word_lists_gates() {
    let out = stdout(&["unfold", "--table", &data("square.table"), "--word", "3,1"]);
    assert_eq!(out, "copies 3\ngate 1 3 1 1 0 1\ngate 2 1 0 2 1 2\ncomposite 1 0 0 1 0 2\n");
}

#[test]
fn unfold_rational_square() {
    let out = stdout(&["unfold", "--table", &data("square.table"), "--rational"]);
    assert!(out.starts_with("surface square copies 4 genus 1\n"), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("glue ")).count(), 8);
}

#[test]
fn float_output_has_seventeen_digits() {
    let out = stdout(&["periodic", "--table", &data("fagnano.table"), "--word", "1,2,3", "--backend", "f64"]);
    let tx = out.split('\t').nth(2).unwrap();
    let mantissa = tx.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
    assert_eq!(mantissa.len(), 17, "{tx}");
}

#[test]
fn spectrum_depends_on_seed_only_through_flag() {
    let sq = data("square.table");
    let a = stdout(&["spectrum", "--table", &sq, "--k", "3", "--budget", "50"]);
    let b = stdout(&["spectrum", "--table", &sq, "--k", "3", "--budget", "50", "--seed", "0"]);
    assert_eq!(a, b);
    assert!(a.starts_with("# k 3 budget 50 seed 0 "));
    assert!(a.lines().skip(1).all(|w| w.split(',').count() == 3));
}

#[test]
fn compare_same_table_is_indistinguishable() {
    let sq = data("square.table");
    let out = stdout(&["compare", "--table1", &sq, "--table2", &sq, "--k", "4", "--budget", "200", "--map", "1=1,2=2,3=3,4=4"]);
    assert_eq!(out, "indistinguishable k 4\n");
}

#[test]
fn compare_rejects_partial_map() {
    let sq = data("square.table");
    let o = run(&["compare", "--table1", &sq, "--table2", &sq, "--k", "2", "--budget", "20", "--map", "1=1,2=2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn cutting_octagon() {
    let oct = data("octagon.surface");
    let out = stdout(&["cutting", "--surface", &oct, "--start", "8", "12", "--dir", "0", "-1", "--crossings", "5"]);
    assert_eq!(out, "A,A,A,A,A\n");
}

#[test]
fn flag_singular_filters_words() {
    let dir = tempfile::tempdir().unwrap();
    let lang = dir.path().join("lang.txt");
    let diag = dir.path().join("diag.txt");
    std::fs::write(&lang, "1,2,3,4\n2,3,1,4\n3,1,3,2\n").unwrap();
    std::fs::write(&diag, "# diagonals\n2,3,4\n").unwrap();
    let out = stdout(&[
        "flag-singular",
        "--language",
        lang.to_str().unwrap(),
        "--diagonals",
        diag.to_str().unwrap(),
        "--suffix",
        "2",
    ]);
    assert_eq!(out, "1,2,3,4\n2,3,1,4\n");
}

#[test]
fn svg_written() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("orbit.svg");
    stdout(&[
        "bounce", "--table", &data("square.table"), "--start", "1/2", "1/2", "--dir", "2", "1", "--bounces", "12", "--svg",
        svg.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(svg).unwrap();
    assert_eq!(text.matches("<circle").count(), 12);
}

#[test]
fn domain_errors_exit_one() {
    let sq = data("square.table");
    for args in [
        vec!["bounce", "--table", "missing.table", "--start", "0", "0", "--dir", "1", "0", "--bounces", "1"],
        vec!["bounce", "--table", &sq, "--start", "3", "3", "--dir", "1", "0", "--bounces", "1"],
        vec!["bounce", "--table", &sq, "--start", "1/2", "1/2", "--dir", "0", "0", "--bounces", "1"],
        vec!["periodic", "--table", &sq, "--word", "1,9"],
        vec!["diagonals", "--table", &sq, "--vertex", "7", "--max-len", "2"],
        vec!["unfold", "--table", &data("quad.table"), "--rational"],
        vec!["cutting", "--surface", &sq, "--start", "1/2", "1/2", "--dir", "1", "0", "--crossings", "2"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn usage_errors_exit_two() {
    let sq = data("square.table");
    for args in [
        vec!["bounce", "--table", &sq],
        vec!["frobnicate"],
        vec!["unfold", "--table", &sq],
        vec!["unfold", "--table", &sq, "--word", "1", "--rational"],
        vec!["periodic", "--table", &sq, "--word", "1,2", "--backend", "quad"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}
