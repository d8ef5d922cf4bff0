//! Acceptance gate for the command-line pipeline.
//!
//! One criterion lives here because it concerns the shipped binary rather
//! than the library: rerunning `millopt pipeline` with an identical
//! configuration and seed must reproduce every artifact byte for byte,
//! independent of the worker-thread count. The runtime budget is pinned
//! next to the test.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

const CRITERION_11_BUDGET: Duration = Duration::from_secs(120);

/// Runs the full pipeline from `dir` with the shared fast configuration and
/// a fixed worker-thread count.
fn run_pipeline(dir: &Path, threads: &str) {
    fs::create_dir_all(dir).unwrap();
    fs::write(dir.join("config.toml"), common::fast_config(true, true)).unwrap();
    let output = Command::new(common::binary())
        .current_dir(dir)
        .env("RAYON_NUM_THREADS", threads)
        .args(["pipeline", "--config", "config.toml"])
        .output()
        .expect("failed to spawn millopt");
    common::assert_success(&output, "pipeline run");
}

fn artifact_names(dir: &Path) -> BTreeSet<String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|entry| entry.unwrap().file_name().into_string().unwrap())
        .collect()
}

#[test]
fn criterion_11_pipeline_reruns_reproduce_artifacts_byte_for_byte() {
    let started = Instant::now();
    let root = tempfile::tempdir().unwrap();
    let runs = [
        (root.path().join("a"), "1"),
        (root.path().join("b"), "1"),
        (root.path().join("c"), "4"),
    ];
    for (dir, threads) in &runs {
        run_pipeline(dir, threads);
    }

    let reference = runs[0].0.join("out");
    let names = artifact_names(&reference);
    assert!(
        names.iter().filter(|name| name.ends_with(".csv")).count() >= 10,
        "reference run produced too few CSV artifacts: {names:?}"
    );
    for (dir, _) in &runs[1..] {
        let out = dir.join("out");
        assert_eq!(
            artifact_names(&out),
            names,
            "artifact sets differ between {} and {}",
            reference.display(),
            out.display()
        );
        for name in &names {
            // Timestamps live only inside the manifest; every other
            // artifact must come back identical.
            if name == "manifest.toml" {
                continue;
            }
            let want = fs::read(reference.join(name)).unwrap();
            let got = fs::read(out.join(name)).unwrap();
            assert!(
                want == got,
                "artifact {name} differs between {} and {}",
                reference.display(),
                out.display()
            );
        }
    }
    for (dir, _) in &runs {
        let manifest = common::read_text(&dir.join("out").join("manifest.toml"));
        assert!(
            manifest.contains("status = \"complete\""),
            "run in {} did not complete:\n{manifest}",
            dir.display()
        );
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed < CRITERION_11_BUDGET,
        "criterion 11 took {elapsed:.2?}, budget is {CRITERION_11_BUDGET:.2?}"
    );
    println!("criterion_11: PASS ({elapsed:.2?})");
}
