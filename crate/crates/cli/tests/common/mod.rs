#![allow(dead_code)]

use std::path::PathBuf;

pub fn fixtures() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures"))
}

pub fn compound() -> PathBuf {
    fixtures().join("compound")
}

pub fn qualitative() -> PathBuf {
    fixtures().join("compound-qualitative.json")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn tiger(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = tiger_cli::run(std::iter::once("tiger").chain(args.iter().copied()), &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

pub fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}
