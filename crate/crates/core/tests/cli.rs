use std::fs;
use std::process::{Command, Output};

use tempfile::TempDir;

const D5: &str = "A B C\nA B\nA C\nB C\nA B C\n";

fn rulehide(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rulehide"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Workspace(TempDir);

impl Workspace {
    fn new() -> Self {
        let w = Workspace(tempfile::tempdir().unwrap());
        w.write("d5.basket", D5);
        w.write("rules.txt", "A -> B\n");
        w
    }

    fn path(&self, name: &str) -> String {
        self.0.path().join(name).to_string_lossy().into_owned()
    }

    fn write(&self, name: &str, text: &str) {
        fs::write(self.path(name), text).unwrap();
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path(name)).unwrap()
    }
}

#[test]
fn mine_d5() {
    let w = Workspace::new();
    let out = rulehide(&[
        "mine",
        "--input",
        &w.path("d5.basket"),
        "--min-support-count",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "A support=4\nB support=4\nC support=4\nA B support=3\nA C support=3\nB C support=3\nA B C support=2\nscans=4\n"
    );
}

#[test]
fn mine_with_brute_force_matches_listing() {
    let w = Workspace::new();
    let a = rulehide(&[
        "mine",
        "--input",
        &w.path("d5.basket"),
        "--min-support",
        "0.4",
    ]);
    let b = rulehide(&[
        "mine",
        "--input",
        &w.path("d5.basket"),
        "--min-support",
        "0.4",
        "--miner",
        "brute-force",
    ]);
    let strip = |s: String| {
        s.lines()
            .filter(|l| !l.starts_with("scans="))
            .map(str::to_owned)
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(stdout(&a)), strip(stdout(&b)));
}

#[test]
fn rules_listing_to_file() {
    let w = Workspace::new();
    let out = rulehide(&[
        "rules",
        "--input",
        &w.path("d5.basket"),
        "--min-support-count",
        "2",
        "--min-confidence",
        "0.7",
        "--output",
        &w.path("rules.out"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = w.read("rules.out");
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("A -> B support=3 conf=0.7500\n"));
}

#[test]
fn hide_d5() {
    let w = Workspace::new();
    let out = rulehide(&[
        "hide",
        "--input",
        &w.path("d5.basket"),
        "--sensitive",
        &w.path("rules.txt"),
        "--min-support-count",
        "2",
        "--min-confidence",
        "0.7",
        "--safety-margin",
        "0",
        "--output",
        &w.path("out.basket"),
        "--log",
        &w.path("out.log"),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let sanitized = w.read("out.basket");
    assert_eq!(sanitized.lines().nth(1), Some("B"));
    assert_eq!(
        w.read("out.log"),
        "# step\ttid\titem\trule\n1\t2\tA\tA -> B\n"
    );
    assert_eq!(
        stdout(&out),
        "A -> B status=hidden deletions=1 conf=3/4->2/3\ndeletions=1\n"
    );
    // Input untouched.
    assert_eq!(w.read("d5.basket"), D5);

    // The sanitized file no longer yields the sensitive rule.
    let rules = rulehide(&[
        "rules",
        "--input",
        &w.path("out.basket"),
        "--min-support-count",
        "2",
        "--min-confidence",
        "0.7",
    ]);
    assert!(!stdout(&rules).lines().any(|l| l.starts_with("A -> B ")));

    let diff = rulehide(&[
        "diff",
        "--original",
        &w.path("d5.basket"),
        "--sanitized",
        &w.path("out.basket"),
        "--min-support-count",
        "2",
        "--min-confidence",
        "0.7",
        "--sensitive",
        &w.path("rules.txt"),
    ]);
    assert_eq!(diff.status.code(), Some(0));
    let report = stdout(&diff);
    assert!(
        report.starts_with("hidden=1\nfailed=0\nlost=1\nnew=1\ndeletions=1\n"),
        "{report}"
    );
}

#[test]
fn diff_handles_vanished_items() {
    let w = Workspace::new();
    w.write("gone.basket", "B C\nB\nC\nB C\nB C\n");
    let out = rulehide(&[
        "diff",
        "--original",
        &w.path("d5.basket"),
        "--sanitized",
        &w.path("gone.basket"),
        "--min-support-count",
        "2",
        "--min-confidence",
        "0",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("deletions=4\n"));
}

#[test]
fn parameter_errors_exit_1() {
    let w = Workspace::new();
    let d5 = w.path("d5.basket");
    for args in [
        vec![
            "rules",
            "--input",
            &d5,
            "--min-support-count",
            "2",
            "--min-confidence",
            "1.1",
        ],
        vec!["mine", "--input", &d5],
        vec![
            "mine",
            "--input",
            &d5,
            "--min-support",
            "0.5",
            "--min-support-count",
            "2",
        ],
        vec!["mine", "--input", &d5, "--min-support", "1.5"],
        vec![
            "mine",
            "--input",
            &d5,
            "--min-support-count",
            "2",
            "--miner",
            "eclat",
        ],
        vec!["frobnicate"],
    ] {
        assert_eq!(rulehide(&args).status.code(), Some(1), "{args:?}");
    }
    let hide = |sm: &str, weight: &str| {
        rulehide(&[
            "hide",
            "--input",
            &d5,
            "--sensitive",
            &w.path("rules.txt"),
            "--min-support-count",
            "2",
            "--min-confidence",
            "0.5",
            "--safety-margin",
            sm,
            "--weight",
            weight,
            "--output",
            &w.path("o"),
            "--log",
            &w.path("l"),
        ])
        .status
        .code()
    };
    assert_eq!(hide("0.5", "confidence"), Some(1));
    assert_eq!(hide("0", "entropy"), Some(1));
    assert_eq!(hide("0", "unit"), Some(0));
}

#[test]
fn input_errors_exit_2() {
    let w = Workspace::new();
    w.write("bad.basket", "A B\nC#D\n");
    w.write("bad.rules", "A -> Z\n");
    let out = rulehide(&[
        "mine",
        "--input",
        &w.path("bad.basket"),
        "--min-support-count",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let missing = rulehide(&[
        "mine",
        "--input",
        &w.path("nope"),
        "--min-support-count",
        "1",
    ]);
    assert_eq!(missing.status.code(), Some(2));
    let bad_rules = rulehide(&[
        "hide",
        "--input",
        &w.path("d5.basket"),
        "--sensitive",
        &w.path("bad.rules"),
        "--min-support-count",
        "2",
        "--min-confidence",
        "0.7",
        "--output",
        &w.path("o"),
        "--log",
        &w.path("l"),
    ]);
    assert_eq!(bad_rules.status.code(), Some(2));
}

#[test]
fn help_exits_0() {
    let out = rulehide(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("hide"));
}
