#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pcq_core::bitstream::{StreamBuilder, SyntaxDescriptorProfile};
use pcq_core::synthetic::{generate, SyntheticSpec};
use pcq_core::ModelParams;

pub fn pcq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pcq"))
}

pub fn run(args: &[&str]) -> Output {
    pcq().args(args).output().expect("spawn pcq")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

pub fn profile() -> SyntaxDescriptorProfile {
    SyntaxDescriptorProfile::builtin("tmc13-v23").expect("builtin profile")
}

/// Stream with the given settings and `attr_bytes` of attribute payload.
pub fn stream(tqp: i64, tnsl: i64, attr_bytes: usize) -> Vec<u8> {
    let p = profile();
    StreamBuilder::new(&p)
        .tqp(tqp)
        .tnsl(tnsl)
        .geometry_data(vec![0x5A; 512])
        .attribute_data(vec![0xA5; attr_bytes])
        .build()
}

pub fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).expect("write fixture");
    path
}

pub fn sidecar(tqp: f64, tbpp: f64, tnsl: f64) -> String {
    format!(r#"{{"tqp": {tqp}, "tbpp": {tbpp}, "tnsl": {tnsl}}}"#)
}

/// Synthetic dataset CSV from the published parameters.
pub fn dataset_csv(spec: &SyntheticSpec) -> Vec<u8> {
    let d = generate(&ModelParams::published(), spec);
    let mut buf = Vec::new();
    d.write_csv(&mut buf).expect("csv to memory");
    buf
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}
