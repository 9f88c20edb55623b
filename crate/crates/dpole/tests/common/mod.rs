#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub fn dpole(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpole"))
        .args(args)
        .output()
        .expect("dpole binary runs")
}

pub fn dpole_ok(args: &[&str]) -> Output {
    let out = dpole(args);
    assert!(
        out.status.success(),
        "dpole {args:?} failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn write(path: &Path, body: &str) {
    std::fs::write(path, body).unwrap();
}

/// CSV text with the trailing compute_ns column removed.
pub fn without_compute(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
