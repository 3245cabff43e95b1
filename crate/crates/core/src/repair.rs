//! The repair loop: run the suite, rank locations, and for each candidate
//! location build a repair constraint, synthesize a replacement, and accept
//! it only if the patched program passes every test.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::faultloc::{
    candidate_locations, suspiciousness, FaultLocError, Formula, SuspiciousnessReport,
};
use crate::interp::{run_suite, ExecutionLimits, SuiteReport, TestSuite};
use crate::minilang::{apply_patch, FixLocation, Patch, PatchError, Program};
use crate::symexec::{build_repair_constraint, install_probe, AngelicBounds, SymexecError};
use crate::synth::{synthesize_until, ComponentFlags, ComponentSet, SynthError, DEFAULT_MAX_SIZE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairConfig {
    pub top_k: usize,
    pub max_size: usize,
    pub bounds: AngelicBounds,
    pub flags: ComponentFlags,
    pub formula: Formula,
    pub limits: ExecutionLimits,
    /// Wall-clock budget for one location's synthesis.
    pub location_budget: Duration,
    /// Wall-clock budget for the whole repair.
    pub total_budget: Duration,
}

impl Default for RepairConfig {
    fn default() -> Self {
        Self {
            top_k: 5,
            max_size: DEFAULT_MAX_SIZE,
            bounds: AngelicBounds::default(),
            flags: ComponentFlags::default(),
            formula: Formula::Ochiai,
            limits: ExecutionLimits::default(),
            location_budget: Duration::from_secs(10),
            total_budget: Duration::from_secs(120),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepairStatus {
    Repaired,
    AlreadyPassing,
    NoPatchFound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttemptResult {
    /// No repair constraint could be built.
    Infeasible {
        reason: String,
    },
    SynthesisExhausted {
        reason: String,
    },
    /// The synthesized expression satisfied the constraint but the patched
    /// program still fails these tests.
    ValidationFailed {
        candidate: String,
        failing: Vec<String>,
    },
    Accepted {
        replacement: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub location: FixLocation,
    pub result: AttemptResult,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairStats {
    pub tests_run: usize,
    pub candidates_checked: usize,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairOutcome {
    pub status: RepairStatus,
    pub patch: Option<Patch>,
    pub repaired: Option<Program>,
    /// In localization ranking order.
    pub attempts: Vec<Attempt>,
    pub stats: RepairStats,
    pub initial: SuiteReport,
    pub suspiciousness: Option<SuspiciousnessReport>,
}

impl RepairOutcome {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("outcome serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RepairError {
    #[error("the test suite is empty")]
    EmptySuite,
    #[error(transparent)]
    Patch(#[from] PatchError),
}

/// Run `suite` on `program` with `patch` applied.
pub fn validate(
    program: &Program,
    patch: &Patch,
    suite: &TestSuite,
) -> Result<SuiteReport, PatchError> {
    validate_with(program, patch, suite, ExecutionLimits::default())
}

pub fn validate_with(
    program: &Program,
    patch: &Patch,
    suite: &TestSuite,
    limits: ExecutionLimits,
) -> Result<SuiteReport, PatchError> {
    let patched = apply_patch(program, patch)?;
    Ok(run_suite(&patched, suite, limits))
}

fn millis(d: Duration) -> u64 {
    d.as_millis().try_into().unwrap_or(u64::MAX)
}

pub fn repair(
    program: &Program,
    suite: &TestSuite,
    cfg: &RepairConfig,
) -> Result<RepairOutcome, RepairError> {
    if suite.cases.is_empty() {
        return Err(RepairError::EmptySuite);
    }
    let start = Instant::now();
    let deadline = start + cfg.total_budget;
    let initial = run_suite(program, suite, cfg.limits);
    let mut stats = RepairStats {
        tests_run: suite.cases.len(),
        ..RepairStats::default()
    };
    let mut outcome = RepairOutcome {
        status: RepairStatus::NoPatchFound,
        patch: None,
        repaired: None,
        attempts: Vec::new(),
        stats: RepairStats::default(),
        initial: initial.clone(),
        suspiciousness: None,
    };

    let susp = match suspiciousness(&initial, cfg.formula) {
        Ok(s) => s,
        Err(FaultLocError::NoFailingTests) => {
            outcome.status = RepairStatus::AlreadyPassing;
            stats.elapsed_ms = millis(start.elapsed());
            outcome.stats = stats;
            return Ok(outcome);
        }
        Err(FaultLocError::NoRepairableLocation) => {
            unreachable!("suspiciousness never reports this")
        }
    };
    let locations = candidate_locations(&susp, program, cfg.top_k).unwrap_or_default();
    outcome.suspiciousness = Some(susp);

    for location in locations {
        let now = Instant::now();
        if now >= deadline {
            break;
        }
        let location_deadline = (now + cfg.location_budget).min(deadline);
        let (result, accepted) = attempt(
            program,
            suite,
            cfg,
            &location,
            location_deadline,
            &mut stats,
        )?;
        outcome.attempts.push(Attempt {
            location,
            result,
            elapsed_ms: millis(now.elapsed()),
        });
        if let Some((patch, repaired)) = accepted {
            assert_eq!(program.statements().len(), repaired.statements().len());
            outcome.status = RepairStatus::Repaired;
            outcome.patch = Some(patch);
            outcome.repaired = Some(repaired);
            break;
        }
    }
    stats.elapsed_ms = millis(start.elapsed());
    outcome.stats = stats;
    Ok(outcome)
}

type Accepted = Option<(Patch, Program)>;

fn attempt(
    program: &Program,
    suite: &TestSuite,
    cfg: &RepairConfig,
    location: &FixLocation,
    deadline: Instant,
    stats: &mut RepairStats,
) -> Result<(AttemptResult, Accepted), RepairError> {
    let constraint = install_probe(program, location).and_then(|mut pp| {
        pp.limits = cfg.limits;
        build_repair_constraint(&pp, suite, cfg.bounds)
    });
    let constraint = match constraint {
        Ok(c) => c,
        Err(
            e @ (SymexecError::InfeasibleLocation { .. } | SymexecError::EvalBudgetExceeded { .. }),
        ) => {
            return Ok((
                AttemptResult::Infeasible {
                    reason: e.to_string(),
                },
                None,
            ))
        }
        Err(SymexecError::EmptySuite) => return Err(RepairError::EmptySuite),
        Err(e @ SymexecError::UnsupportedLocation { .. }) => {
            return Ok((
                AttemptResult::Infeasible {
                    reason: e.to_string(),
                },
                None,
            ))
        }
    };
    let cs = ComponentSet::for_constraint(&constraint, cfg.flags);
    let found = match synthesize_until(&constraint, &cs, cfg.max_size, Some(deadline)) {
        Ok(found) => found,
        Err(e @ (SynthError::SynthesisExhausted { .. } | SynthError::DeadlineExceeded { .. })) => {
            return Ok((
                AttemptResult::SynthesisExhausted {
                    reason: e.to_string(),
                },
                None,
            ))
        }
    };
    stats.candidates_checked += found.explored;
    let patch = Patch {
        location: constraint.location.clone(),
        original: constraint.original.clone(),
        replacement: found.expr,
    };
    let repaired = apply_patch(program, &patch)?;
    let report = run_suite(&repaired, suite, cfg.limits);
    stats.tests_run += suite.cases.len();
    if report.all_pass() {
        let replacement = patch.replacement.to_string();
        Ok((
            AttemptResult::Accepted { replacement },
            Some((patch, repaired)),
        ))
    } else {
        Ok((
            AttemptResult::ValidationFailed {
                candidate: patch.replacement.to_string(),
                failing: report
                    .failing_names()
                    .into_iter()
                    .map(String::from)
                    .collect(),
            },
            None,
        ))
    }
}
