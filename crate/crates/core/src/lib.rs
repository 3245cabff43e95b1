//! Test-driven program repair for MiniLang.
//!
//! The pipeline runs a test suite, ranks statements by spectrum-based
//! suspiciousness, turns each candidate location into a repair constraint by
//! forced (angelic) replay, synthesizes the smallest expression satisfying
//! it, and validates the patched program against the whole suite.

pub mod evidence;
pub mod faultloc;
pub mod interp;
pub mod minilang;
pub mod par;
pub mod repair;
pub mod symexec;
pub mod synth;

#[cfg(test)]
mod testutil;
