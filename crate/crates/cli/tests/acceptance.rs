//! Acceptance check for the command-line front end: every command is
//! byte-identical across consecutive runs with the same flags, and the
//! exit codes follow the contract (0 all checks pass, 2 usage errors).

use std::path::PathBuf;
use std::process::{Command, Output};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_magmatic")
}

fn run(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .env_remove("MAGMATIC_OUT_DIR")
        .output()
        .expect("binary runs")
}

/// Run the command twice and insist on identical bytes everywhere.
fn assert_deterministic(args: &[&str]) -> Output {
    let first = run(args);
    let second = run(args);
    assert_eq!(
        first.stdout, second.stdout,
        "stdout changed between runs of {args:?}"
    );
    assert_eq!(
        first.stderr, second.stderr,
        "stderr changed between runs of {args:?}"
    );
    assert_eq!(
        first.status.code(),
        second.status.code(),
        "exit code changed between runs of {args:?}"
    );
    first
}

#[test]
fn criterion_10_determinism() {
    let passing: &[&[&str]] = &[
        &["dims", "--s", "all", "--t", "3..all", "--max-degree", "7"],
        &["dims", "--s", "2,3", "--t", "2", "--max-degree", "6", "--format", "json"],
        &["dims", "--s", "2", "--max-degree", "5", "--format", "csv"],
        &["dims", "--s", "all", "--t", "odd3..all", "--max-degree", "7"],
        &["enumerate", "--s", "2,3", "--max-degree", "5"],
        &["enumerate", "--s", "2,3,4", "--t", "2", "--max-degree", "4", "--format", "json"],
        &["primitives", "--s", "2,3", "--t", "2", "--max-degree", "4", "--format", "csv"],
        &["verify", "compat", "--s", "2,3", "--t", "2", "--dim-v", "2", "--max-degree", "4"],
        &["verify", "rigidity", "--s", "2", "--dim-v", "2", "--max-degree", "4", "--format", "json"],
        &["verify", "pbw", "--s", "2,3", "--t", "2", "--max-degree", "5"],
        &["verify", "koszul", "--s", "all", "--max-degree", "8", "--format", "csv"],
        &["verify", "unital-compat", "--s", "2,3", "--t", "2", "--max-degree", "3"],
        &["verify", "unital-primitives", "--s", "2,3", "--t", "2", "--max-degree", "4"],
    ];
    for args in passing {
        let out = assert_deterministic(args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "expected success for {args:?}, stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(
            !out.stdout.is_empty(),
            "expected output from {args:?}"
        );
    }
    println!("criterion 10 (command determinism): pass");
}

#[test]
fn usage_errors_exit_with_code_two() {
    let bad: &[&[&str]] = &[
        // T outside S.
        &["dims", "--s", "2", "--t", "3", "--max-degree", "3"],
        // Mismatched sets for rigidity.
        &["verify", "rigidity", "--s", "2,3", "--t", "2", "--max-degree", "3"],
        // Degree guard on an infinite arity set without --force.
        &["dims", "--s", "all", "--max-degree", "25"],
        // Unital suites need interval arity sets.
        &["verify", "unital-compat", "--s", "2,4", "--t", "2", "--max-degree", "3"],
        // Unparseable arity set.
        &["dims", "--s", "fish", "--max-degree", "3"],
    ];
    for args in bad {
        let out = run(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "expected usage error for {args:?}, stdout: {}",
            String::from_utf8_lossy(&out.stdout)
        );
        assert!(
            !out.stderr.is_empty(),
            "expected an error message for {args:?}"
        );
    }
    // The guard yields to --force.
    let forced = run(&["dims", "--s", "all", "--max-degree", "21", "--force"]);
    assert_eq!(forced.status.code(), Some(0));
}

#[test]
fn output_files_resolve_against_the_env_directory() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-out");
    std::fs::create_dir_all(&dir).unwrap();
    let mut contents = Vec::new();
    for round in 0..2 {
        let file = format!("dims-{round}.csv");
        let out = Command::new(binary())
            .args([
                "dims", "--s", "2,3", "--t", "2", "--max-degree", "5", "--format", "csv",
                "--output", &file,
            ])
            .env("MAGMATIC_OUT_DIR", &dir)
            .output()
            .expect("binary runs");
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty(), "file output should not echo to stdout");
        contents.push(std::fs::read(dir.join(&file)).expect("output file written"));
    }
    assert_eq!(contents[0], contents[1], "file output changed between runs");
    assert!(contents[0].starts_with(b"n,mag,magroot\n"));
}
