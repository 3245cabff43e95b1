//! Spectrum-based fault localization over statement coverage.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::interp::{SuiteReport, Verdict};
use crate::minilang::Program;
pub use crate::minilang::{FixKind, FixLocation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Formula {
    /// `ef / sqrt(F * (ef + ep))`
    #[default]
    Ochiai,
    /// `(ef / F) / (ef / F + ep / P)`
    Tarantula,
}

impl Formula {
    /// Score of a line executed by `ef` of `total_fail` failing and `ep` of
    /// `total_pass` passing tests.
    pub fn score(self, ef: usize, ep: usize, total_fail: usize, total_pass: usize) -> f64 {
        if ef == 0 {
            return 0.0;
        }
        let (ef, ep, tf, tp) = (ef as f64, ep as f64, total_fail as f64, total_pass as f64);
        match self {
            Formula::Ochiai => ef / (tf * (ef + ep)).sqrt(),
            Formula::Tarantula => {
                let fail_ratio = ef / tf;
                let pass_ratio = if tp > 0.0 { ep / tp } else { 0.0 };
                fail_ratio / (fail_ratio + pass_ratio)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspiciousnessEntry {
    pub line: u32,
    pub score: f64,
    pub exec_fail: usize,
    pub exec_pass: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspiciousnessReport {
    pub formula: Formula,
    pub total_fail: usize,
    pub total_pass: usize,
    /// Sorted by score descending, ties broken by descending line number.
    pub entries: Vec<SuspiciousnessEntry>,
}

impl SuspiciousnessReport {
    pub fn score_of(&self, line: u32) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.line == line)
            .map(|e| e.score)
    }

    pub fn render_table(&self) -> String {
        let mut out = format!(
            "{:>5}  {:>10}  {:>9}  {:>9}\n",
            "line", "score", "exec_fail", "exec_pass"
        );
        for e in &self.entries {
            out.push_str(&format!(
                "{:>5}  {:>10.6}  {:>9}  {:>9}\n",
                e.line, e.score, e.exec_fail, e.exec_pass
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FaultLocError {
    #[error("no failing tests: the program already passes the suite")]
    NoFailingTests,
    #[error("no scored statement can be repaired")]
    NoRepairableLocation,
}

pub fn suspiciousness(
    report: &SuiteReport,
    formula: Formula,
) -> Result<SuspiciousnessReport, FaultLocError> {
    let total_fail = report.failed();
    let total_pass = report.passed();
    if total_fail == 0 {
        return Err(FaultLocError::NoFailingTests);
    }
    // line -> (exec_fail, exec_pass)
    let mut counts: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for case in &report.cases {
        for line in &case.covered {
            let slot = counts.entry(*line).or_default();
            match case.verdict {
                Verdict::Fail => slot.0 += 1,
                Verdict::Pass => slot.1 += 1,
            }
        }
    }
    let mut entries: Vec<SuspiciousnessEntry> = counts
        .into_iter()
        .map(|(line, (ef, ep))| SuspiciousnessEntry {
            line,
            score: formula.score(ef, ep, total_fail, total_pass),
            exec_fail: ef,
            exec_pass: ep,
        })
        .collect();
    entries.sort_by(|a, b| b.score.total_cmp(&a.score).then(b.line.cmp(&a.line)));
    Ok(SuspiciousnessReport {
        formula,
        total_fail,
        total_pass,
        entries,
    })
}

/// The `top_k` most suspicious repairable statements, in ranking order.
///
/// Lines that no failing test executes (score zero) are never candidates.
pub fn candidate_locations(
    susp: &SuspiciousnessReport,
    program: &Program,
    top_k: usize,
) -> Result<Vec<FixLocation>, FaultLocError> {
    let out: Vec<FixLocation> = susp
        .entries
        .iter()
        .filter(|e| e.score > 0.0)
        .filter_map(|e| FixLocation::at(program, e.line))
        .take(top_k.max(1))
        .collect();
    if out.is_empty() {
        Err(FaultLocError::NoRepairableLocation)
    } else {
        Ok(out)
    }
}
