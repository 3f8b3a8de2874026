//! End-to-end tests against the compiled binary: exit codes, report files,
//! determinism under a fixed seed, and the generate -> estimate round trip.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn polyvol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyvol"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn read_json(path: &Path) -> Value {
    let text = std::fs::read_to_string(path).expect("report file exists");
    serde_json::from_str(&text).expect("valid json")
}

/// Wall-clock fields differ between runs; zero them before comparing.
fn scrub_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            if let Some(t) = map.get_mut("elapsed_seconds") {
                *t = Value::from(0.0);
            }
            for child in map.values_mut() {
                scrub_timing(child);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(scrub_timing),
        _ => {}
    }
}

#[test]
fn estimate_succeeds_and_echoes_the_seed() {
    let out = polyvol(&["estimate", "--generate", "cube:3", "--seed", "7"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("seed: 7"), "missing seed echo in:\n{text}");
    assert!(text.contains("cube:3 (d = 3, m = 6)"));
    assert!(text.contains("exact 8.0"), "known volume should be reported:\n{text}");
}

#[test]
fn same_seed_gives_identical_reports_modulo_timing() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = polyvol(&[
            "estimate",
            "--generate",
            "simplex:4",
            "--seed",
            "123",
            "--repeat",
            "2",
            "--json",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    let (mut ja, mut jb) = (read_json(&a), read_json(&b));
    scrub_timing(&mut ja);
    scrub_timing(&mut jb);
    assert_eq!(ja, jb);
}

#[test]
fn parallel_runs_reproduce_the_sequential_result() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq.json");
    let par = dir.path().join("par.json");
    for (path, threads) in [(&seq, "1"), (&par, "2")] {
        let out = polyvol(&[
            "estimate",
            "--generate",
            "cube:4",
            "--seed",
            "55",
            "--repeat",
            "3",
            "--parallel",
            threads,
            "--json",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    let (mut js, mut jp) = (read_json(&seq), read_json(&par));
    // The thread count is echoed in the report; everything else must match.
    js["parallel"] = Value::from(0);
    jp["parallel"] = Value::from(0);
    scrub_timing(&mut js);
    scrub_timing(&mut jp);
    assert_eq!(js, jp);
}

#[test]
fn generated_file_estimates_like_the_inline_generator() {
    let dir = tempfile::tempdir().unwrap();
    let body = dir.path().join("rh.hpoly");
    let from_file = dir.path().join("file.json");
    let inline = dir.path().join("inline.json");

    // Same seed for generation and estimation: the random body is built from
    // stream 0, estimation repetitions from substreams 1 and up, so writing
    // the body out and reading it back must not change the estimate.
    let out = polyvol(&[
        "generate",
        "rh:3,8",
        "--seed",
        "42",
        "-o",
        body.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let out = polyvol(&[
        "estimate",
        "--file",
        body.to_str().unwrap(),
        "--seed",
        "42",
        "--json",
        from_file.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let out = polyvol(&[
        "estimate",
        "--generate",
        "rh:3,8",
        "--seed",
        "42",
        "--json",
        inline.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let (jf, ji) = (read_json(&from_file), read_json(&inline));
    assert_eq!(
        jf["statistics"]["runs"][0]["volume"],
        ji["statistics"]["runs"][0]["volume"],
        "file round trip changed the estimate"
    );
}

#[test]
fn generate_writes_stdout_when_no_output_is_given() {
    let out = polyvol(&["generate", "cube:2", "--seed", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("4 2\n"), "unexpected stdout:\n{text}");
    // Metadata stays off stdout so the output can be piped into a file.
    assert!(stderr(&out).contains("seed: 1"));
}

#[test]
fn chebyshev_reports_the_unit_ball_of_the_cube() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("cheb.json");
    let out = polyvol(&[
        "chebyshev",
        "--generate",
        "cube:3",
        "--seed",
        "9",
        "--json",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let j = read_json(&report);
    assert_eq!(j["command"], "chebyshev");
    assert!((j["radius"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let center = j["center"].as_array().unwrap();
    assert_eq!(center.len(), 3);
    for c in center {
        assert!(c.as_f64().unwrap().abs() < 1e-9);
    }
}

#[test]
fn csv_has_a_header_and_one_row_per_repetition() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let out = polyvol(&[
        "estimate",
        "--generate",
        "cube:3",
        "--seed",
        "3",
        "--repeat",
        "4",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("run,volume,"));
    for (i, line) in lines[1..].iter().enumerate() {
        assert!(line.starts_with(&format!("{},", i + 1)));
    }
}

#[test]
fn input_errors_exit_with_code_one() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["estimate", "--file", "/definitely/not/here.hpoly"],
        vec!["estimate", "--generate", "dodecahedron:12"],
        vec!["estimate", "--generate", "cube:0"],
        vec!["estimate"],
        vec!["estimate", "--generate", "cube:3", "--repeat", "0"],
        vec!["chebyshev", "--generate", "cross:99"],
    ];
    for args in cases {
        let out = polyvol(&args);
        assert_eq!(
            out.status.code(),
            Some(1),
            "args {args:?}, stderr: {}",
            stderr(&out)
        );
    }
}

#[test]
fn both_input_flags_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let body = dir.path().join("c.hpoly");
    let out = polyvol(&["generate", "cube:2", "-o", body.to_str().unwrap()]);
    assert!(out.status.success());
    let out = polyvol(&[
        "estimate",
        "--file",
        body.to_str().unwrap(),
        "--generate",
        "cube:2",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_files_exit_with_code_one_and_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.hpoly");
    std::fs::write(&bad, "2 2\n1 0 1\nnot a number here\n").unwrap();
    let out = polyvol(&["estimate", "--file", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"), "stderr: {}", stderr(&out));
}

#[test]
fn unbounded_input_exits_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let open = dir.path().join("halfplane.hpoly");
    // x <= 1, y <= 1: a quadrant, unbounded below.
    std::fs::write(&open, "2 2\n1 0 1\n0 1 1\n").unwrap();
    let out = polyvol(&["estimate", "--file", open.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unbounded"), "stderr: {}", stderr(&out));
}

#[test]
fn help_and_version_exit_zero() {
    for args in [["--help"], ["--version"]] {
        let out = polyvol(&args);
        assert_eq!(out.status.code(), Some(0), "args {args:?}");
    }
}
