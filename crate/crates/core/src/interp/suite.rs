use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{evaluate, ExecutionLimits, ExecutionStatus};
use crate::minilang::Program;
use crate::par;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub name: String,
    pub inputs: Vec<i64>,
    pub expected: i64,
}

/// Expected value as written in a suite file: an integer or a constant name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expected {
    Int(i64),
    Symbol(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CaseFile {
    name: String,
    inputs: Vec<i64>,
    expected: Expected,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SuiteFile {
    function: String,
    tests: Vec<CaseFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    held_out: Vec<CaseFile>,
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("malformed test suite: {0}")]
    Json(#[from] serde_json::Error),
    #[error("suite targets function `{suite}` but the program defines `{program}`")]
    FunctionMismatch { suite: String, program: String },
    #[error("test `{test}` expects `{symbol}`, which is not a constant of the program")]
    UnknownSymbol { test: String, symbol: String },
    #[error("duplicate test name `{0}`")]
    DuplicateName(String),
    #[error("test `{test}` has {found} inputs, function takes {expected}")]
    Arity {
        test: String,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSuite {
    pub function: String,
    pub cases: Vec<TestCase>,
    #[serde(default)]
    pub held_out: Vec<TestCase>,
}

impl TestSuite {
    pub fn new(function: impl Into<String>, cases: Vec<TestCase>) -> Self {
        Self {
            function: function.into(),
            cases,
            held_out: Vec::new(),
        }
    }

    /// Parse the JSON suite format, resolving symbolic expected values
    /// against the program's constants.
    pub fn from_json(text: &str, program: &Program) -> Result<Self, SuiteError> {
        let file: SuiteFile = serde_json::from_str(text)?;
        if file.function != program.function.name {
            return Err(SuiteError::FunctionMismatch {
                suite: file.function,
                program: program.function.name.clone(),
            });
        }
        let mut seen = HashSet::new();
        let mut resolve = |cases: Vec<CaseFile>| -> Result<Vec<TestCase>, SuiteError> {
            cases
                .into_iter()
                .map(|c| {
                    if !seen.insert(c.name.clone()) {
                        return Err(SuiteError::DuplicateName(c.name));
                    }
                    if c.inputs.len() != program.arity() {
                        return Err(SuiteError::Arity {
                            test: c.name,
                            expected: program.arity(),
                            found: c.inputs.len(),
                        });
                    }
                    let expected = match c.expected {
                        Expected::Int(v) => v,
                        Expected::Symbol(s) => {
                            program
                                .constant(&s)
                                .ok_or_else(|| SuiteError::UnknownSymbol {
                                    test: c.name.clone(),
                                    symbol: s,
                                })?
                        }
                    };
                    Ok(TestCase {
                        name: c.name,
                        inputs: c.inputs,
                        expected,
                    })
                })
                .collect()
        };
        let cases = resolve(file.tests)?;
        let held_out = resolve(file.held_out)?;
        Ok(Self {
            function: file.function,
            cases,
            held_out,
        })
    }

    /// Render in the suite file format with integer expected values.
    pub fn to_json(&self) -> String {
        let convert = |cases: &[TestCase]| {
            cases
                .iter()
                .map(|c| CaseFile {
                    name: c.name.clone(),
                    inputs: c.inputs.clone(),
                    expected: Expected::Int(c.expected),
                })
                .collect()
        };
        let file = SuiteFile {
            function: self.function.clone(),
            tests: convert(&self.cases),
            held_out: convert(&self.held_out),
        };
        serde_json::to_string_pretty(&file).expect("suite serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub name: String,
    pub inputs: Vec<i64>,
    pub expected: i64,
    pub verdict: Verdict,
    pub status: ExecutionStatus,
    pub covered: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Per-test verdicts in suite order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub cases: Vec<CaseReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.cases
            .iter()
            .filter(|c| c.verdict == Verdict::Pass)
            .count()
    }

    pub fn failed(&self) -> usize {
        self.cases.len() - self.passed()
    }

    pub fn all_pass(&self) -> bool {
        self.failed() == 0
    }

    pub fn verdicts(&self) -> Vec<Verdict> {
        self.cases.iter().map(|c| c.verdict).collect()
    }

    pub fn failing_names(&self) -> Vec<&str> {
        self.cases
            .iter()
            .filter(|c| c.verdict == Verdict::Fail)
            .map(|c| c.name.as_str())
            .collect()
    }

    /// Aligned text table, one row per test.
    pub fn render_table(&self) -> String {
        let name_w = self
            .cases
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(4)
            .max(4);
        let input_strs: Vec<String> = self
            .cases
            .iter()
            .map(|c| {
                c.inputs
                    .iter()
                    .map(i64::to_string)
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let in_w = input_strs.iter().map(String::len).max().unwrap_or(6).max(6);
        let mut out = format!(
            "{:<name_w$}  {:<in_w$}  {:>8}  {:>10}  outcome\n",
            "test", "inputs", "expected", "actual"
        );
        for (c, inputs) in self.cases.iter().zip(&input_strs) {
            let actual = match c.status {
                ExecutionStatus::Returned(v) => v.to_string(),
                ExecutionStatus::RuntimeError { .. } => "error".into(),
                ExecutionStatus::BoundExceeded => "timeout".into(),
                ExecutionStatus::ProbeStopped => "stopped".into(),
            };
            let verdict = match c.verdict {
                Verdict::Pass => "Pass",
                Verdict::Fail => "Fail",
            };
            out.push_str(&format!(
                "{:<name_w$}  {:<in_w$}  {:>8}  {:>10}  {verdict}\n",
                c.name, inputs, c.expected, actual
            ));
        }
        out.push_str(&format!(
            "{} passed, {} failed\n",
            self.passed(),
            self.failed()
        ));
        out
    }
}

/// Run the suite's guiding tests (not the held-out ones).
pub fn run_suite(program: &Program, suite: &TestSuite, limits: ExecutionLimits) -> SuiteReport {
    run_cases(program, &suite.cases, limits)
}

pub fn run_cases(program: &Program, cases: &[TestCase], limits: ExecutionLimits) -> SuiteReport {
    let cases = par::map(cases, |case| {
        let result = evaluate(program, &case.inputs, limits);
        let pass = result.status == ExecutionStatus::Returned(case.expected);
        let diagnostic = match result.status {
            ExecutionStatus::Returned(_) => None,
            other => Some(other.to_string()),
        };
        CaseReport {
            name: case.name.clone(),
            inputs: case.inputs.clone(),
            expected: case.expected,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            status: result.status,
            covered: result.covered.into_iter().collect(),
            diagnostic,
        }
    });
    SuiteReport { cases }
}
