//! Shared helpers for driving the `millopt` binary in integration tests.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Path to the compiled `millopt` binary under test.
pub fn binary() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_millopt"))
}

/// Runs `millopt` with `args` from `cwd`, panicking only on spawn failure so
/// callers can assert on exit status and diagnostics.
pub fn millopt(cwd: &Path, args: &[&str]) -> Output {
    Command::new(binary())
        .current_dir(cwd)
        .args(args)
        .output()
        .expect("failed to spawn millopt")
}

pub fn assert_success(output: &Output, context: &str) {
    assert!(
        output.status.success(),
        "{context} failed\nstdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr),
    );
}

pub fn read_text(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap_or_else(|error| panic!("reading {}: {error}", path.display()))
}

/// A quick synthetic configuration that exercises every pipeline stage.
/// The output directory is relative so runs started from different working
/// directories produce byte-comparable artifacts.
pub fn fast_config(lof_enabled: bool, rfe_enabled: bool) -> String {
    format!(
        r#"seed = 7

[data]
source = "synthetic"

[data.synthetic]
n = 600
seed = 7
noise_std = 30.0

[output]
dir = "out"

[cv]
k = 5

[models]
roster = ["ols", "cart", "gbm"]

[lof]
enabled = {lof_enabled}
k = 10

[rfe]
enabled = {rfe_enabled}
trainer = "cart"
target_k = 15

[campaign]
methods = ["de", "ga", "pso", "uniform", "latin_hypercube"]
runs = 3
population = 10
generations = 9
"#
    )
}
