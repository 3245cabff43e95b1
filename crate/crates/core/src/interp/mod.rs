//! Big-step interpreter with statement coverage and an optional probe that
//! overrides the value of one statement's expression.

mod suite;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::minilang::{BinaryOp, Else, Expr, Program, Stmt, StmtKind, Type, UnaryOp};

pub use suite::{
    run_cases, run_suite, CaseReport, Expected, SuiteError, SuiteReport, TestCase, TestSuite,
    Verdict,
};

pub const DEFAULT_STEP_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionLimits {
    /// Statement executions allowed per run; each loop iteration counts too.
    pub step_budget: u64,
}

impl Default for ExecutionLimits {
    fn default() -> Self {
        Self {
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
}

impl Value {
    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(v),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            Value::Int(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuntimeErrorKind {
    DivByZero,
    Uninitialized,
    /// Control fell off the end of the function.
    MissingReturn,
    ArityMismatch,
    /// A probe oracle produced a value of the wrong type.
    ProbeType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExecutionStatus {
    Returned(i64),
    RuntimeError {
        kind: RuntimeErrorKind,
        line: u32,
    },
    BoundExceeded,
    /// The probe oracle declined to supply a value; only arises in forced replay.
    ProbeStopped,
}

impl ExecutionStatus {
    pub fn returned(self) -> Option<i64> {
        match self {
            ExecutionStatus::Returned(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for ExecutionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExecutionStatus::Returned(v) => write!(f, "returned {v}"),
            ExecutionStatus::RuntimeError { kind, line } => write!(f, "{kind:?} on line {line}"),
            ExecutionStatus::BoundExceeded => f.write_str("step budget exceeded"),
            ExecutionStatus::ProbeStopped => f.write_str("probe stopped"),
        }
    }
}

/// One dynamic evaluation of a probed expression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub line: u32,
    pub env: BTreeMap<String, i64>,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub status: ExecutionStatus,
    pub covered: BTreeSet<u32>,
    pub eval_log: Vec<ProbeRecord>,
}

/// Supplies the value of a probed expression at each dynamic evaluation.
pub trait ValueOracle {
    /// `index` counts evaluations of the probe within this run, from zero.
    /// Returning `None` stops the run with [`ExecutionStatus::ProbeStopped`].
    fn value(&mut self, index: usize, env: &BTreeMap<String, i64>) -> Option<Value>;
}

/// Override for the expression of the statement on `line`.
pub struct Probe<'a> {
    pub line: u32,
    pub live_vars: &'a [String],
    pub oracle: &'a mut dyn ValueOracle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    DivByZero,
    Unbound(String),
}

/// Evaluate `expr` with variables from `lookup` and named constants from `consts`.
pub fn eval_expr<F>(
    expr: &Expr,
    lookup: &F,
    consts: &HashMap<String, i64>,
) -> Result<Value, EvalError>
where
    F: Fn(&str) -> Option<i64>,
{
    Ok(match expr {
        Expr::Int(v) => Value::Int(*v),
        Expr::Var(name) => {
            Value::Int(lookup(name).ok_or_else(|| EvalError::Unbound(name.clone()))?)
        }
        Expr::Const(name) => Value::Int(
            *consts
                .get(name)
                .ok_or_else(|| EvalError::Unbound(name.clone()))?,
        ),
        Expr::Unary(op, e) => {
            let v = eval_expr(e, lookup, consts)?;
            match (op, v) {
                (UnaryOp::Neg, Value::Int(x)) => Value::Int(x.wrapping_neg()),
                (UnaryOp::Not, Value::Bool(b)) => Value::Bool(!b),
                _ => unreachable!("ill-typed unary operand"),
            }
        }
        Expr::Binary(op, l, r) => {
            let lv = eval_expr(l, lookup, consts)?;
            match op {
                BinaryOp::And => {
                    if lv == Value::Bool(false) {
                        return Ok(lv);
                    }
                    return eval_expr(r, lookup, consts);
                }
                BinaryOp::Or => {
                    if lv == Value::Bool(true) {
                        return Ok(lv);
                    }
                    return eval_expr(r, lookup, consts);
                }
                _ => {}
            }
            let rv = eval_expr(r, lookup, consts)?;
            match (lv, rv) {
                (Value::Int(a), Value::Int(b)) => apply_int(*op, a, b)?,
                _ => unreachable!("ill-typed binary operands"),
            }
        }
    })
}

/// Apply an integer-operand binary operator. Arithmetic wraps on overflow.
pub fn apply_int(op: BinaryOp, a: i64, b: i64) -> Result<Value, EvalError> {
    Ok(match op {
        BinaryOp::Add => Value::Int(a.wrapping_add(b)),
        BinaryOp::Sub => Value::Int(a.wrapping_sub(b)),
        BinaryOp::Mul => Value::Int(a.wrapping_mul(b)),
        BinaryOp::Div => {
            if b == 0 {
                return Err(EvalError::DivByZero);
            }
            Value::Int(a.wrapping_div(b))
        }
        BinaryOp::Mod => {
            if b == 0 {
                return Err(EvalError::DivByZero);
            }
            Value::Int(a.wrapping_rem(b))
        }
        BinaryOp::Eq => Value::Bool(a == b),
        BinaryOp::Ne => Value::Bool(a != b),
        BinaryOp::Lt => Value::Bool(a < b),
        BinaryOp::Le => Value::Bool(a <= b),
        BinaryOp::Gt => Value::Bool(a > b),
        BinaryOp::Ge => Value::Bool(a >= b),
        BinaryOp::And | BinaryOp::Or => unreachable!("logical operators take booleans"),
    })
}

pub fn constants_of(program: &Program) -> HashMap<String, i64> {
    program
        .constants
        .iter()
        .map(|c| (c.name.clone(), c.value))
        .collect()
}

pub fn evaluate(program: &Program, inputs: &[i64], limits: ExecutionLimits) -> ExecutionResult {
    run(program, inputs, limits, None)
}

pub fn evaluate_probed(
    program: &Program,
    inputs: &[i64],
    limits: ExecutionLimits,
    probe: Probe<'_>,
) -> ExecutionResult {
    run(program, inputs, limits, Some(probe))
}

fn run(
    program: &Program,
    inputs: &[i64],
    limits: ExecutionLimits,
    probe: Option<Probe<'_>>,
) -> ExecutionResult {
    let mut m = Machine {
        consts: constants_of(program),
        env: HashMap::new(),
        covered: BTreeSet::new(),
        steps: 0,
        limits,
        probe,
        log: Vec::new(),
    };
    let f = &program.function;
    let status = if inputs.len() != f.params.len() {
        ExecutionStatus::RuntimeError {
            kind: RuntimeErrorKind::ArityMismatch,
            line: f.line,
        }
    } else {
        for (name, v) in f.params.iter().zip(inputs) {
            m.env.insert(name.clone(), *v);
        }
        match m.block(&f.body) {
            Ok(Some(v)) => ExecutionStatus::Returned(v),
            Ok(None) => ExecutionStatus::RuntimeError {
                kind: RuntimeErrorKind::MissingReturn,
                line: f.line,
            },
            Err(stop) => stop,
        }
    };
    ExecutionResult {
        status,
        covered: m.covered,
        eval_log: m.log,
    }
}

struct Machine<'p> {
    consts: HashMap<String, i64>,
    env: HashMap<String, i64>,
    covered: BTreeSet<u32>,
    steps: u64,
    limits: ExecutionLimits,
    probe: Option<Probe<'p>>,
    log: Vec<ProbeRecord>,
}

type Flow = Result<Option<i64>, ExecutionStatus>;

impl Machine<'_> {
    fn tick(&mut self) -> Result<(), ExecutionStatus> {
        self.steps += 1;
        if self.steps > self.limits.step_budget {
            Err(ExecutionStatus::BoundExceeded)
        } else {
            Ok(())
        }
    }

    fn eval(&mut self, stmt: &Stmt) -> Result<Value, ExecutionStatus> {
        if let Some(probe) = self.probe.as_mut() {
            if probe.line == stmt.line {
                let env: BTreeMap<String, i64> = probe
                    .live_vars
                    .iter()
                    .filter_map(|v| self.env.get(v).map(|x| (v.clone(), *x)))
                    .collect();
                let value = probe
                    .oracle
                    .value(self.log.len(), &env)
                    .ok_or(ExecutionStatus::ProbeStopped)?;
                let wants_bool = stmt.expr().result_type() == Type::Bool;
                if value.as_bool().is_some() != wants_bool {
                    return Err(ExecutionStatus::RuntimeError {
                        kind: RuntimeErrorKind::ProbeType,
                        line: stmt.line,
                    });
                }
                self.log.push(ProbeRecord {
                    line: stmt.line,
                    env,
                    value,
                });
                return Ok(value);
            }
        }
        let env = &self.env;
        eval_expr(stmt.expr(), &|name| env.get(name).copied(), &self.consts).map_err(|e| {
            ExecutionStatus::RuntimeError {
                kind: match e {
                    EvalError::DivByZero => RuntimeErrorKind::DivByZero,
                    EvalError::Unbound(_) => RuntimeErrorKind::Uninitialized,
                },
                line: stmt.line,
            }
        })
    }

    fn cond(&mut self, stmt: &Stmt) -> Result<bool, ExecutionStatus> {
        Ok(self.eval(stmt)?.as_bool().expect("condition is boolean"))
    }

    fn int(&mut self, stmt: &Stmt) -> Result<i64, ExecutionStatus> {
        Ok(self.eval(stmt)?.as_int().expect("expression is integer"))
    }

    fn block(&mut self, stmts: &[Stmt]) -> Flow {
        for s in stmts {
            if let Some(v) = self.stmt(s)? {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    fn stmt(&mut self, s: &Stmt) -> Flow {
        self.tick()?;
        self.covered.insert(s.line);
        match &s.kind {
            StmtKind::Let { name, .. } | StmtKind::Assign { name, .. } => {
                let v = self.int(s)?;
                self.env.insert(name.clone(), v);
                Ok(None)
            }
            StmtKind::Return(_) => Ok(Some(self.int(s)?)),
            StmtKind::If {
                then_body,
                else_branch,
                ..
            } => {
                if self.cond(s)? {
                    self.block(then_body)
                } else {
                    match else_branch {
                        None => Ok(None),
                        Some(Else::Block(body)) => self.block(body),
                        Some(Else::If(nested)) => self.stmt(nested),
                    }
                }
            }
            StmtKind::While { body, .. } => {
                while self.cond(s)? {
                    if let Some(v) = self.block(body)? {
                        return Ok(Some(v));
                    }
                    self.tick()?;
                }
                Ok(None)
            }
        }
    }
}
