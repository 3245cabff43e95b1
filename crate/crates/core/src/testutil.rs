use std::path::PathBuf;

use crate::interp::TestSuite;
use crate::minilang::{parse_program, Program};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn program(name: &str) -> Program {
    let src = std::fs::read_to_string(corpus_dir().join(format!("{name}.mlg"))).unwrap();
    parse_program(&src).unwrap()
}

pub fn load(name: &str) -> (Program, TestSuite) {
    let p = program(name);
    let text = std::fs::read_to_string(corpus_dir().join(format!("{name}.tests.json"))).unwrap();
    let suite = TestSuite::from_json(&text, &p).unwrap();
    (p, suite)
}
