//! Golden tests for every CLI verb, run against the built binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stallings"))
        .args(args)
        .output()
        .expect("binary must run")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn assert_golden(args: &[&str], expected_stdout: &str, expected_code: i32) {
    let output = run(args);
    assert_eq!(
        output.status.code(),
        Some(expected_code),
        "exit code for {args:?}; stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert_eq!(stdout(&output), expected_stdout, "stdout for {args:?}");
}

#[test]
fn reduce_golden() {
    assert_golden(&["reduce", "-n", "2", "aaAbBAAb"], "Ab\n", 0);
    assert_golden(&["reduce", "-n", "2", "abBA"], "1\n", 0);
}

#[test]
fn reduce_rejects_bad_words() {
    let output = run(&["reduce", "-n", "2", "a2b"]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("a2b"),
        "diagnostic must name the token: {stderr}"
    );

    let output = run(&["reduce", "-n", "2", "c"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn stallings_golden() {
    let expected = "alphabet 2\nvertices 2\nbase 0\narc 0 a 0\narc 0 b 1\narc 1 a 1\n";
    assert_golden(
        &["stallings", "-n", "2", "-H", &fixture("stallings_gens.txt")],
        expected,
        0,
    );
}

#[test]
fn stallings_trace_goes_to_stderr() {
    let output = run(&[
        "stallings",
        "-n",
        "2",
        "-H",
        &fixture("stallings_gens.txt"),
        "--trace",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert_eq!(stderr.lines().count(), 8, "one line per fold event");
    assert!(stderr
        .lines()
        .all(|l| l.starts_with("open") || l.starts_with("closed")));
}

#[test]
fn basis_and_rank_golden() {
    assert_golden(
        &["basis", "-n", "2", "-H", &fixture("stallings_gens.txt")],
        "a\nbaB\n",
        0,
    );
    assert_golden(
        &["rank", "-n", "2", "-H", &fixture("stallings_gens.txt")],
        "2\n",
        0,
    );
}

#[test]
fn member_golden() {
    assert_golden(
        &[
            "member",
            "-n",
            "2",
            "-H",
            &fixture("stallings_gens.txt"),
            "a",
        ],
        "v2 v3^-1 v1^-1 v2 v3^-1\n",
        0,
    );
    assert_golden(
        &["member", "-n", "2", "-H", &fixture("index_three.txt"), "B"],
        "not a member\n",
        1,
    );
}

#[test]
fn express_golden() {
    assert_golden(
        &["express", "-n", "2", "-H", &fixture("b_loop.txt"), "bbb"],
        "v1 v1 v1\n",
        0,
    );
}

#[test]
fn index_and_transversal_golden() {
    assert_golden(
        &["index", "-n", "2", "-H", &fixture("index_three.txt")],
        "3\n1\nb\nba\n",
        0,
    );
    assert_golden(
        &["transversal", "-n", "2", "-H", &fixture("index_three.txt")],
        "1\nb\nba\n",
        0,
    );
    assert_golden(
        &["index", "-n", "2", "-H", &fixture("b_loop.txt")],
        "infinite\n",
        1,
    );
}

#[test]
fn explicit_rank_matters_for_saturation() {
    // ⟨a⟩ has index 1 in F₁ but infinite index in F₂
    assert_golden(&["index", "-H", &fixture("a_loop.txt")], "1\n1\n", 0);
    assert_golden(
        &["index", "-n", "2", "-H", &fixture("a_loop.txt")],
        "infinite\n",
        1,
    );
}

#[test]
fn normal_golden() {
    assert_golden(
        &["normal", "-n", "2", "-H", &fixture("mod3_kernel.txt")],
        "normal\n",
        0,
    );
    assert_golden(
        &["normal", "-n", "2", "-H", &fixture("b_loop.txt")],
        "not normal\n",
        1,
    );
}

#[test]
fn conjugate_golden() {
    assert_golden(
        &[
            "conjugate",
            "-n",
            "2",
            "-H",
            &fixture("b_loop.txt"),
            "-K",
            &fixture("conj_b.txt"),
        ],
        "A\n",
        0,
    );
    assert_golden(
        &[
            "conjugate",
            "-n",
            "2",
            "-H",
            &fixture("a_loop.txt"),
            "-K",
            &fixture("b_loop.txt"),
        ],
        "not conjugate\n",
        1,
    );
}

#[test]
fn intersect_golden() {
    assert_golden(
        &[
            "intersect",
            "-n",
            "2",
            "-H",
            &fixture("intersect_h.txt"),
            "-K",
            &fixture("intersect_k.txt"),
        ],
        "aaa\nBaaab\nAbaaaBa\nAbaBaaabABa\nAbaBabAbABa\n",
        0,
    );
}

#[test]
fn shn_golden() {
    assert_golden(
        &[
            "shn",
            "-n",
            "2",
            "-H",
            &fixture("intersect_h.txt"),
            "-K",
            &fixture("intersect_k.txt"),
        ],
        "components: 4\nsum: 4\nhowson bound: 8\nstrong bound: 4\n",
        0,
    );
}

#[test]
fn coset_golden() {
    assert_golden(
        &[
            "coset",
            "-n",
            "2",
            "-H",
            &fixture("a_loop.txt"),
            "-K",
            &fixture("b_loop.txt"),
            "b",
            "b",
        ],
        "b\n",
        0,
    );
    assert_golden(
        &[
            "coset",
            "-n",
            "2",
            "-H",
            &fixture("a_loop.txt"),
            "-K",
            &fixture("a_loop.txt"),
            "b",
            "1",
        ],
        "empty\n",
        1,
    );
}

#[test]
fn hall_golden() {
    let output = run(&["hall", "-n", "2", "-H", &fixture("hall_h.txt")]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("6"));
    // rank 6·(2−1)+1 = 7 basis words for the index-6 completion
    assert_eq!(lines.count(), 7);
}

#[test]
fn enumerate_golden() {
    let output = run(&["enumerate", "-n", "2", "3"]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert_eq!(text.lines().next(), Some("13"));
    assert_eq!(text.lines().count(), 14);
    // output is deterministic
    assert_eq!(stdout(&run(&["enumerate", "-n", "2", "3"])), text);
}

#[test]
fn free_family_golden() {
    assert_golden(
        &[
            "free-family",
            "-n",
            "2",
            "-H",
            &fixture("stallings_gens.txt"),
        ],
        "not free\n",
        1,
    );
    assert_golden(
        &["free-family", "-n", "2", "-H", &fixture("gen_pair.txt")],
        "free\n",
        0,
    );
}

#[test]
fn generates_golden() {
    assert_golden(
        &["generates", "-n", "2", "-H", &fixture("gen_pair.txt")],
        "generates (a basis)\n",
        0,
    );
    assert_golden(
        &["generates", "-n", "2", "-H", &fixture("b_loop.txt")],
        "does not generate\n",
        1,
    );
}

#[test]
fn dot_golden() {
    let expected = "digraph stallings {\n  rankdir=LR;\n  node [shape=circle, label=\"\", width=0.25];\n  v0 [shape=doublecircle];\n  v0 -> v0 [label=\"b\", color=\"#d62728\", fontcolor=\"#d62728\"];\n}\n";
    assert_golden(
        &["dot", "-n", "2", "-H", &fixture("b_loop.txt")],
        expected,
        0,
    );
}

#[test]
fn dot_writes_to_file() {
    let path = std::env::temp_dir().join(format!("stallings-dot-{}.gv", std::process::id()));
    let path_str = path.display().to_string();
    let output = run(&[
        "dot",
        "-n",
        "2",
        "-H",
        &fixture("b_loop.txt"),
        "-o",
        &path_str,
    ]);
    assert_eq!(output.status.code(), Some(0));
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("digraph stallings"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn missing_file_is_a_usage_error() {
    let output = run(&["basis", "-n", "2", "-H", "/nonexistent/gens.txt"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("/nonexistent/gens.txt"));
}

#[test]
fn out_of_alphabet_letter_is_a_usage_error() {
    let output = run(&[
        "member",
        "-n",
        "2",
        "-H",
        &fixture("stallings_gens.txt"),
        "ac",
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_subgroup_flag_is_a_usage_error() {
    let output = run(&["basis", "-n", "2"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn enumerate_requires_an_explicit_rank() {
    let output = run(&["enumerate", "3"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("-n"));
}

#[test]
fn trivial_subgroup_from_a_comment_only_file() {
    assert_golden(
        &["rank", "-n", "2", "-H", &fixture("trivial.txt")],
        "0\n",
        0,
    );
    assert_golden(&["basis", "-n", "2", "-H", &fixture("trivial.txt")], "", 0);
    assert_golden(
        &["index", "-n", "2", "-H", &fixture("trivial.txt")],
        "infinite\n",
        1,
    );
    assert_golden(
        &["normal", "-n", "2", "-H", &fixture("trivial.txt")],
        "normal\n",
        0,
    );
}
