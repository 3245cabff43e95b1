//! Angelic exploration of a fix location.
//!
//! The expression at the location is replaced by an unknown `X`. Each test is
//! replayed while forcing successive dynamic evaluations of `X` to chosen
//! values; every vector of forced values that makes the test pass is an
//! angelic path, and the passing paths of one test form its angelic forest.
//! A candidate expression satisfies the repair constraint when, for every
//! forest, it reproduces some path pointwise.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::interp::{
    evaluate_probed, ExecutionLimits, ExecutionStatus, Probe, TestCase, TestSuite, Value,
    ValueOracle,
};
use crate::minilang::{Expr, FixKind, FixLocation, Program, Type};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngelicBounds {
    /// Dynamic evaluations of `X` allowed in one replay.
    pub max_evals: usize,
    /// Passing paths recorded per forest.
    pub max_paths: usize,
    /// Forced replays attempted per test before the search gives up.
    pub max_replays: usize,
}

impl Default for AngelicBounds {
    fn default() -> Self {
        Self {
            max_evals: 12,
            max_paths: 64,
            max_replays: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValueKind {
    Boolean,
    Integer,
}

impl From<Type> for ValueKind {
    fn from(t: Type) -> Self {
        match t {
            Type::Bool => ValueKind::Boolean,
            Type::Int => ValueKind::Integer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymexecError {
    #[error("line {line} has no {kind} expression to probe")]
    UnsupportedLocation { line: u32, kind: FixKind },
    #[error("test `{test}` evaluates the probe more than {max_evals} times")]
    EvalBudgetExceeded { test: String, max_evals: usize },
    #[error("no forced value on line {line} makes test `{test}` pass")]
    InfeasibleLocation { line: u32, test: String },
    #[error("the test suite is empty")]
    EmptySuite,
}

/// A program whose expression at `location` is an unknown.
#[derive(Debug, Clone)]
pub struct ProbedProgram {
    pub program: Program,
    pub location: FixLocation,
    pub original: Expr,
    pub value_kind: ValueKind,
    pub limits: ExecutionLimits,
}

pub fn install_probe(
    program: &Program,
    location: &FixLocation,
) -> Result<ProbedProgram, SymexecError> {
    let unsupported = || SymexecError::UnsupportedLocation {
        line: location.line,
        kind: location.kind,
    };
    let stmt = program
        .statement_at(location.line)
        .ok_or_else(unsupported)?;
    if FixKind::of(&stmt.kind) != location.kind {
        return Err(unsupported());
    }
    Ok(ProbedProgram {
        program: program.clone(),
        location: FixLocation::at(program, location.line).ok_or_else(unsupported)?,
        original: stmt.expr().clone(),
        value_kind: location.kind.value_type().into(),
        limits: ExecutionLimits::default(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngelicStep {
    pub env: BTreeMap<String, i64>,
    pub forced: Value,
}

pub type AngelicPath = Vec<AngelicStep>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngelicForest {
    pub test_name: String,
    pub passing_paths: Vec<AngelicPath>,
}

impl AngelicForest {
    /// True when `eval` reproduces every forced value of some path.
    pub fn satisfied_by<F>(&self, mut eval: F) -> bool
    where
        F: FnMut(&BTreeMap<String, i64>) -> Option<Value>,
    {
        self.passing_paths
            .iter()
            .any(|path| path.iter().all(|step| eval(&step.env) == Some(step.forced)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairConstraint {
    pub location: FixLocation,
    pub value_kind: ValueKind,
    pub forests: Vec<AngelicForest>,
    pub unreached_tests: Vec<String>,
    /// Named constants of the program, for evaluating candidates.
    pub constants: BTreeMap<String, i64>,
    /// The expression the probe replaced.
    pub original: Expr,
    /// Integer literals of the function body.
    pub program_literals: Vec<i64>,
}

impl RepairConstraint {
    /// Conjunction over forests of the disjunction over each forest's paths.
    pub fn satisfied_by<F>(&self, mut eval: F) -> bool
    where
        F: FnMut(&BTreeMap<String, i64>) -> Option<Value>,
    {
        self.forests.iter().all(|f| f.satisfied_by(&mut eval))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("constraint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Values tried at each evaluation of an integer unknown for `test`.
pub fn integer_domain(pp: &ProbedProgram, test: &TestCase) -> Vec<i64> {
    let mut d: BTreeSet<i64> = (-8..=8).collect();
    d.extend(&test.inputs);
    d.insert(test.expected);
    d.extend(pp.program.constants.iter().map(|c| c.value));
    d.extend(pp.program.literals());
    for (i, a) in test.inputs.iter().enumerate() {
        for b in &test.inputs[i..] {
            d.insert(a.wrapping_add(*b));
            d.insert(a.wrapping_mul(*b));
        }
    }
    d.into_iter().collect()
}

fn domain(pp: &ProbedProgram, test: &TestCase) -> Vec<Value> {
    match pp.value_kind {
        ValueKind::Boolean => vec![Value::Bool(true), Value::Bool(false)],
        ValueKind::Integer => integer_domain(pp, test)
            .into_iter()
            .map(Value::Int)
            .collect(),
    }
}

/// Supplies a fixed prefix of forced values, then stops the replay.
struct PrefixOracle<'a> {
    prefix: &'a [Value],
}

impl ValueOracle for PrefixOracle<'_> {
    fn value(&mut self, index: usize, _env: &BTreeMap<String, i64>) -> Option<Value> {
        self.prefix.get(index).copied()
    }
}

enum Replay {
    Finished {
        pass: bool,
        path: AngelicPath,
    },
    /// `X` was evaluated once more than the prefix covers.
    NeedsValue,
    Aborted,
}

fn replay_prefix(pp: &ProbedProgram, test: &TestCase, prefix: &[Value]) -> Replay {
    match replay(pp, test, prefix) {
        (ExecutionStatus::Returned(v), path) => Replay::Finished {
            pass: v == test.expected,
            path,
        },
        (ExecutionStatus::ProbeStopped, _) => Replay::NeedsValue,
        _ => Replay::Aborted,
    }
}

/// Replay `test` forcing the i-th evaluation of `X` to `forced[i]`. Returns
/// the final status and the recorded evaluations; the status is
/// `ProbeStopped` when `X` is evaluated more than `forced.len()` times.
pub fn replay(
    pp: &ProbedProgram,
    test: &TestCase,
    forced: &[Value],
) -> (ExecutionStatus, AngelicPath) {
    let mut oracle = PrefixOracle { prefix: forced };
    let result = evaluate_probed(
        &pp.program,
        &test.inputs,
        pp.limits,
        Probe {
            line: pp.location.line,
            live_vars: &pp.location.live_vars,
            oracle: &mut oracle,
        },
    );
    let path = result
        .eval_log
        .into_iter()
        .map(|r| AngelicStep {
            env: r.env,
            forced: r.value,
        })
        .collect();
    (result.status, path)
}

/// Breadth-first search over forced-value prefixes. `Ok(None)` means the
/// test never evaluates `X`.
pub fn collect_forest(
    pp: &ProbedProgram,
    test: &TestCase,
    bounds: AngelicBounds,
) -> Result<Option<AngelicForest>, SymexecError> {
    let max_evals = bounds.max_evals.max(1);
    let max_paths = bounds.max_paths.max(1);
    let values = domain(pp, test);
    let mut frontier: Vec<Vec<Value>> = vec![Vec::new()];
    let mut replays = 0usize;
    let mut paths = Vec::new();
    let mut exceeded = false;
    let mut reached = false;

    while !frontier.is_empty() && paths.len() < max_paths {
        let room = bounds.max_replays.saturating_sub(replays);
        if room == 0 {
            break;
        }
        frontier.truncate(room);
        replays += frontier.len();
        let outcomes = par::map(&frontier, |prefix| replay_prefix(pp, test, prefix));
        let mut next = Vec::new();
        for (prefix, outcome) in frontier.iter().zip(outcomes) {
            match outcome {
                Replay::Finished { pass, path } => {
                    if prefix.is_empty() {
                        // Decided without ever evaluating X.
                        return Ok(None);
                    }
                    if pass && paths.len() < max_paths {
                        paths.push(path);
                    }
                }
                Replay::NeedsValue => {
                    reached = true;
                    if prefix.len() == max_evals {
                        exceeded = true;
                    } else if next.len() < bounds.max_replays {
                        for v in &values {
                            let mut child = prefix.clone();
                            child.push(*v);
                            next.push(child);
                        }
                    }
                }
                Replay::Aborted => {
                    if prefix.is_empty() {
                        return Ok(None);
                    }
                }
            }
        }
        frontier = next;
    }

    debug_assert!(reached);
    if paths.is_empty() && exceeded {
        return Err(SymexecError::EvalBudgetExceeded {
            test: test.name.clone(),
            max_evals,
        });
    }
    Ok(Some(AngelicForest {
        test_name: test.name.clone(),
        passing_paths: paths,
    }))
}

pub fn build_repair_constraint(
    pp: &ProbedProgram,
    suite: &TestSuite,
    bounds: AngelicBounds,
) -> Result<RepairConstraint, SymexecError> {
    if suite.cases.is_empty() {
        return Err(SymexecError::EmptySuite);
    }
    let results = par::map(&suite.cases, |t| collect_forest(pp, t, bounds));
    let mut forests = Vec::new();
    let mut unreached_tests = Vec::new();
    for (test, result) in suite.cases.iter().zip(results) {
        match result? {
            None => unreached_tests.push(test.name.clone()),
            Some(f) if f.passing_paths.is_empty() => {
                return Err(SymexecError::InfeasibleLocation {
                    line: pp.location.line,
                    test: test.name.clone(),
                })
            }
            Some(f) => forests.push(f),
        }
    }
    Ok(RepairConstraint {
        location: pp.location.clone(),
        value_kind: pp.value_kind,
        forests,
        unreached_tests,
        constants: pp
            .program
            .constants
            .iter()
            .map(|c| (c.name.clone(), c.value))
            .collect(),
        original: pp.original.clone(),
        program_literals: pp.program.literals(),
    })
}
