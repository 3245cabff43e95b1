//! Evidence for a repair: amplified tests that distinguish the original from
//! the repaired program, and an overfitting audit against held-out tests.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::interp::{
    evaluate, run_cases, ExecutionLimits, ExecutionStatus, SuiteReport, TestCase, TestSuite,
};
use crate::minilang::{apply_patch, Patch, PatchError, Program};
use crate::par;

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// Seeded input vectors: every combination of range endpoints, then uniform
/// draws inside the ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputGenerator {
    pub seed: u64,
    /// Inclusive range per parameter; the last entry is reused for extra parameters.
    pub ranges: Vec<(i64, i64)>,
    /// Share of agreeing probes kept as regression tests.
    pub agree_fraction: f64,
}

impl Default for InputGenerator {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            ranges: vec![(-2, 10)],
            agree_fraction: 0.1,
        }
    }
}

impl InputGenerator {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn range(&self, i: usize) -> (i64, i64) {
        let (lo, hi) = self
            .ranges
            .get(i)
            .or(self.ranges.last())
            .copied()
            .unwrap_or((-2, 10));
        (lo.min(hi), lo.max(hi))
    }

    /// Up to `n` distinct input vectors of length `arity`.
    pub fn inputs(&self, arity: usize, n: usize) -> Vec<Vec<i64>> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let corners = 1usize.checked_shl(arity as u32).unwrap_or(usize::MAX);
        for mask in 0..corners {
            if out.len() >= n {
                return out;
            }
            let v: Vec<i64> = (0..arity)
                .map(|i| {
                    let (lo, hi) = self.range(i);
                    if mask >> i & 1 == 0 {
                        lo
                    } else {
                        hi
                    }
                })
                .collect();
            if seen.insert(v.clone()) {
                out.push(v);
            }
        }
        let space: u128 = (0..arity)
            .map(|i| {
                let (lo, hi) = self.range(i);
                (hi - lo) as u128 + 1
            })
            .product();
        let target = (n as u128).min(space) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        while out.len() < target {
            let v: Vec<i64> = (0..arity)
                .map(|i| {
                    let (lo, hi) = self.range(i);
                    rng.gen_range(lo..=hi)
                })
                .collect();
            if seen.insert(v.clone()) {
                out.push(v);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// The original and repaired programs disagree on these inputs.
    DifferenceRevealing,
    RandomProbe,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleSource {
    ReferenceProgram { path: String },
    Unoracled,
}

/// A reference implementation used as the test oracle.
#[derive(Debug, Clone, Copy)]
pub struct Reference<'a> {
    pub program: &'a Program,
    pub path: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmplifiedTest {
    pub name: String,
    pub inputs: Vec<i64>,
    /// Reference output; absent when unoracled or when the reference fails.
    pub expected: Option<i64>,
    pub provenance: Provenance,
    pub original: ExecutionStatus,
    pub repaired: ExecutionStatus,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceSummary {
    pub probes: usize,
    pub difference_revealing: usize,
    pub random_probes: usize,
    /// Repaired-program results over the base suite plus oracled amplified tests.
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceReport {
    pub oracle_source: OracleSource,
    pub amplified: Vec<AmplifiedTest>,
    /// Present only with a reference oracle.
    pub verdicts: Option<SuiteReport>,
    pub summary: EvidenceSummary,
}

impl EvidenceReport {
    /// The base suite extended with every oracled amplified test.
    pub fn combined_suite(&self, base: &TestSuite) -> TestSuite {
        let mut suite = base.clone();
        suite.cases.extend(self.oracled_cases());
        suite
    }

    pub fn oracled_cases(&self) -> Vec<TestCase> {
        oracled_cases(&self.amplified)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn oracled_cases(tests: &[AmplifiedTest]) -> Vec<TestCase> {
    tests
        .iter()
        .filter_map(|t| {
            t.expected.map(|expected| TestCase {
                name: t.name.clone(),
                inputs: t.inputs.clone(),
                expected,
            })
        })
        .collect()
}

/// Probe `original` and `repaired` on generated inputs and keep the
/// disagreements plus a sample of agreements as new tests.
pub fn amplify(
    original: &Program,
    repaired: &Program,
    base: &TestSuite,
    gen: &InputGenerator,
    reference: Option<Reference<'_>>,
    n: usize,
) -> EvidenceReport {
    let limits = ExecutionLimits::default();
    let inputs = gen.inputs(original.arity(), n.max(1));
    let runs = par::map(&inputs, |v| {
        let before = evaluate(original, v, limits).status;
        let after = evaluate(repaired, v, limits).status;
        let oracle = reference.map(|r| evaluate(r.program, v, limits).status);
        (before, after, oracle)
    });

    let mut rng = ChaCha8Rng::seed_from_u64(gen.seed ^ 0x5EED);
    let mut amplified = Vec::new();
    let mut summary = EvidenceSummary {
        probes: inputs.len(),
        ..EvidenceSummary::default()
    };
    let base_inputs: HashSet<&Vec<i64>> = base.cases.iter().map(|c| &c.inputs).collect();
    for (v, (before, after, oracle)) in inputs.iter().zip(runs) {
        let provenance = if before != after {
            Provenance::DifferenceRevealing
        } else if rng.gen_bool(gen.agree_fraction.clamp(0.0, 1.0)) {
            Provenance::RandomProbe
        } else {
            continue;
        };
        if base_inputs.contains(v) {
            continue;
        }
        match provenance {
            Provenance::DifferenceRevealing => summary.difference_revealing += 1,
            Provenance::RandomProbe => summary.random_probes += 1,
        }
        let expected = oracle.and_then(ExecutionStatus::returned);
        amplified.push(AmplifiedTest {
            name: format!("amplified_{:03}", amplified.len() + 1),
            inputs: v.clone(),
            expected,
            provenance,
            original: before,
            repaired: after,
        });
    }

    let (oracle_source, verdicts) = match reference {
        Some(r) => {
            let cases: Vec<TestCase> = base
                .cases
                .iter()
                .cloned()
                .chain(oracled_cases(&amplified))
                .collect();
            let verdicts = run_cases(repaired, &cases, limits);
            summary.passed = verdicts.passed();
            summary.failed = verdicts.failed();
            (
                OracleSource::ReferenceProgram {
                    path: r.path.to_string(),
                },
                Some(verdicts),
            )
        }
        None => (OracleSource::Unoracled, None),
    };
    EvidenceReport {
        oracle_source,
        amplified,
        verdicts,
        summary,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OverfitVerdict {
    /// Passes every guiding test but fails a held-out one.
    Overfitting,
    NotOverfitting,
    /// Fails a guiding test, so it is not a repair at all.
    InvalidPatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverfitReport {
    pub verdict: OverfitVerdict,
    pub guiding: SuiteReport,
    pub held_out: SuiteReport,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvidenceError {
    #[error("the suite has no held-out tests")]
    NoHeldOutTests,
    #[error(transparent)]
    Patch(#[from] PatchError),
}

pub fn overfit_check(
    program: &Program,
    patch: &Patch,
    suite: &TestSuite,
) -> Result<OverfitReport, EvidenceError> {
    if suite.held_out.is_empty() {
        return Err(EvidenceError::NoHeldOutTests);
    }
    let patched = apply_patch(program, patch)?;
    let limits = ExecutionLimits::default();
    let guiding = run_cases(&patched, &suite.cases, limits);
    let held_out = run_cases(&patched, &suite.held_out, limits);
    Ok(OverfitReport {
        verdict: overfit_verdict(&guiding, &held_out),
        guiding,
        held_out,
    })
}

pub fn overfit_verdict(guiding: &SuiteReport, held_out: &SuiteReport) -> OverfitVerdict {
    if !guiding.all_pass() {
        OverfitVerdict::InvalidPatch
    } else if held_out.all_pass() {
        OverfitVerdict::NotOverfitting
    } else {
        OverfitVerdict::Overfitting
    }
}
