use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{Expr, Program, StmtKind, Type};
use super::parser::parse_expression;
use super::MiniLangError;

/// Which expression slot of a statement a repair may replace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FixKind {
    /// Condition of an `if` or `while`.
    BranchCondition,
    /// Right-hand side of an assignment or `var` initializer.
    AssignmentRhs,
    ReturnExpr,
}

impl FixKind {
    pub fn value_type(self) -> Type {
        match self {
            FixKind::BranchCondition => Type::Bool,
            FixKind::AssignmentRhs | FixKind::ReturnExpr => Type::Int,
        }
    }

    pub fn of(kind: &StmtKind) -> FixKind {
        match kind {
            StmtKind::If { .. } | StmtKind::While { .. } => FixKind::BranchCondition,
            StmtKind::Let { .. } | StmtKind::Assign { .. } => FixKind::AssignmentRhs,
            StmtKind::Return(_) => FixKind::ReturnExpr,
        }
    }
}

impl fmt::Display for FixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FixKind::BranchCondition => "BranchCondition",
            FixKind::AssignmentRhs => "AssignmentRhs",
            FixKind::ReturnExpr => "ReturnExpr",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixLocation {
    pub line: u32,
    pub kind: FixKind,
    /// Parameters and locals in scope at the statement, in declaration order.
    pub live_vars: Vec<String>,
}

impl FixLocation {
    /// The location of the statement on `line`, if there is one.
    pub fn at(program: &Program, line: u32) -> Option<FixLocation> {
        let stmt = program.statement_at(line)?;
        Some(FixLocation {
            line,
            kind: FixKind::of(&stmt.kind),
            live_vars: program.live_vars(line)?,
        })
    }
}

/// Replacement of the single expression at a fix location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Patch {
    pub location: FixLocation,
    pub original: Expr,
    pub replacement: Expr,
}

impl Patch {
    /// The patch that undoes this one.
    pub fn reverted(&self) -> Patch {
        Patch {
            location: self.location.clone(),
            original: self.replacement.clone(),
            replacement: self.original.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatchError {
    #[error("no statement on line {0}")]
    NoSuchLine(u32),
    #[error("line {line} holds a {found} location, patch targets {expected}")]
    KindMismatch {
        line: u32,
        expected: FixKind,
        found: FixKind,
    },
    #[error("stale patch for line {line}: expected `{expected}`, found `{found}`")]
    LocationMismatch {
        line: u32,
        expected: String,
        found: String,
    },
    #[error("replacement `{replacement}` is {found}, line {line} needs {expected}")]
    TypeMismatch {
        line: u32,
        replacement: String,
        expected: Type,
        found: Type,
    },
    #[error("replacement uses `{name}`, which is not in scope on line {line}")]
    OutOfScope { line: u32, name: String },
    #[error("invalid patch expression: {0}")]
    Syntax(#[from] MiniLangError),
}

/// Replace the expression at `patch.location`, leaving every other node and
/// all line identities untouched.
pub fn apply_patch(program: &Program, patch: &Patch) -> Result<Program, PatchError> {
    let line = patch.location.line;
    let mut out = program.clone();
    let live = program
        .live_vars(line)
        .ok_or(PatchError::NoSuchLine(line))?;
    let stmt = out
        .statement_at_mut(line)
        .ok_or(PatchError::NoSuchLine(line))?;
    let found_kind = FixKind::of(&stmt.kind);
    if found_kind != patch.location.kind {
        return Err(PatchError::KindMismatch {
            line,
            expected: patch.location.kind,
            found: found_kind,
        });
    }
    if *stmt.expr() != patch.original {
        return Err(PatchError::LocationMismatch {
            line,
            expected: patch.original.to_string(),
            found: stmt.expr().to_string(),
        });
    }
    let want = found_kind.value_type();
    let got = patch.replacement.result_type();
    if got != want {
        return Err(PatchError::TypeMismatch {
            line,
            replacement: patch.replacement.to_string(),
            expected: want,
            found: got,
        });
    }
    for e in patch.replacement.subterms() {
        match e {
            Expr::Var(name) if !live.contains(name) => {
                return Err(PatchError::OutOfScope {
                    line,
                    name: name.clone(),
                })
            }
            Expr::Const(name) if program.constant(name).is_none() => {
                return Err(PatchError::OutOfScope {
                    line,
                    name: name.clone(),
                })
            }
            _ => {}
        }
    }
    *stmt.expr_mut() = patch.replacement.clone();
    Ok(out)
}

/// Hand-editable patch interchange form; expressions in MiniLang syntax.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchFile {
    pub line: u32,
    pub kind: FixKind,
    pub original: String,
    pub replacement: String,
}

impl PatchFile {
    pub fn from_patch(patch: &Patch) -> Self {
        Self {
            line: patch.location.line,
            kind: patch.location.kind,
            original: patch.original.to_string(),
            replacement: patch.replacement.to_string(),
        }
    }

    /// Resolve the textual expressions against `program`.
    pub fn to_patch(&self, program: &Program) -> Result<Patch, PatchError> {
        let location =
            FixLocation::at(program, self.line).ok_or(PatchError::NoSuchLine(self.line))?;
        if location.kind != self.kind {
            return Err(PatchError::KindMismatch {
                line: self.line,
                expected: self.kind,
                found: location.kind,
            });
        }
        let original = parse_expression(&self.original, program, self.line)?;
        let replacement = parse_expression(&self.replacement, program, self.line)?;
        Ok(Patch {
            location,
            original,
            replacement,
        })
    }
}
