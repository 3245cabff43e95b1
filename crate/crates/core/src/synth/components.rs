use std::fmt;

use serde::{Deserialize, Serialize};

use crate::minilang::{BinaryOp, Expr, Type, UnaryOp};
use crate::symexec::RepairConstraint;

/// A MiniLang operator usable as a synthesis component. Variant order is the
/// enumeration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Operator {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Neg,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Not,
}

impl Operator {
    pub const ALL: [Operator; 15] = [
        Operator::Add,
        Operator::Sub,
        Operator::Mul,
        Operator::Div,
        Operator::Mod,
        Operator::Neg,
        Operator::Eq,
        Operator::Ne,
        Operator::Lt,
        Operator::Le,
        Operator::Gt,
        Operator::Ge,
        Operator::And,
        Operator::Or,
        Operator::Not,
    ];

    pub fn binary(self) -> Option<BinaryOp> {
        Some(match self {
            Operator::Add => BinaryOp::Add,
            Operator::Sub => BinaryOp::Sub,
            Operator::Mul => BinaryOp::Mul,
            Operator::Div => BinaryOp::Div,
            Operator::Mod => BinaryOp::Mod,
            Operator::Eq => BinaryOp::Eq,
            Operator::Ne => BinaryOp::Ne,
            Operator::Lt => BinaryOp::Lt,
            Operator::Le => BinaryOp::Le,
            Operator::Gt => BinaryOp::Gt,
            Operator::Ge => BinaryOp::Ge,
            Operator::And => BinaryOp::And,
            Operator::Or => BinaryOp::Or,
            Operator::Neg | Operator::Not => return None,
        })
    }

    pub fn unary(self) -> Option<UnaryOp> {
        match self {
            Operator::Neg => Some(UnaryOp::Neg),
            Operator::Not => Some(UnaryOp::Not),
            _ => None,
        }
    }

    pub fn from_binary(op: BinaryOp) -> Operator {
        Operator::ALL
            .into_iter()
            .find(|o| o.binary() == Some(op))
            .expect("every binary operator is a component")
    }

    pub fn from_unary(op: UnaryOp) -> Operator {
        match op {
            UnaryOp::Neg => Operator::Neg,
            UnaryOp::Not => Operator::Not,
        }
    }

    pub fn result_type(self) -> Type {
        match (self.binary(), self.unary()) {
            (Some(b), _) => b.result_type(),
            (_, Some(u)) => u.result_type(),
            _ => unreachable!(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match (self.binary(), self.unary()) {
            (Some(b), _) => b.symbol(),
            (_, Some(UnaryOp::Neg)) => "neg",
            (_, Some(UnaryOp::Not)) => "!",
            _ => unreachable!(),
        }
    }

    fn family(self) -> Family {
        match self {
            Operator::Add | Operator::Sub | Operator::Mul | Operator::Neg => Family::Arithmetic,
            Operator::Div | Operator::Mod => Family::Division,
            Operator::Eq | Operator::Ne => Family::Equality,
            Operator::Lt | Operator::Le | Operator::Gt | Operator::Ge => Family::Ordering,
            Operator::And | Operator::Or | Operator::Not => Family::Logical,
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Arithmetic,
    Division,
    Equality,
    Ordering,
    Logical,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentFlags {
    /// Use every integer in -10..=10 instead of the program's literals.
    pub unrestricted_constants: bool,
    /// Add `/` and `%`.
    pub include_div: bool,
    /// Use every operator family, not only those of the original expression.
    pub all_operators: bool,
}

/// Ingredients available to the synthesizer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSet {
    pub variables: Vec<String>,
    pub constants: Vec<i64>,
    /// Sorted in enumeration order.
    pub operators: Vec<Operator>,
    /// Subexpressions tried first within their size.
    pub preferred: Vec<Expr>,
}

impl ComponentSet {
    pub fn new(
        variables: Vec<String>,
        constants: Vec<i64>,
        operators: impl IntoIterator<Item = Operator>,
    ) -> Self {
        let mut ops: Vec<Operator> = operators.into_iter().collect();
        ops.sort();
        ops.dedup();
        let mut constants = constants;
        constants.sort();
        constants.dedup();
        Self {
            variables,
            constants,
            operators: ops,
            preferred: Vec::new(),
        }
    }

    /// Components for repairing the location of `rc`: its live variables,
    /// the program's literals plus 0 and 1, the operator families of the
    /// replaced expression, and that expression's subterms as preferred
    /// ingredients.
    pub fn for_constraint(rc: &RepairConstraint, flags: ComponentFlags) -> Self {
        let constants = if flags.unrestricted_constants {
            (-10..=10).collect()
        } else {
            let mut c = rc.program_literals.clone();
            c.extend([0, 1]);
            c
        };
        let mut families = Vec::new();
        for e in rc.original.subterms() {
            let op = match e {
                Expr::Unary(op, _) => Operator::from_unary(*op),
                Expr::Binary(op, _, _) => Operator::from_binary(*op),
                _ => continue,
            };
            families.push(match op.family() {
                Family::Division => Family::Arithmetic,
                f => f,
            });
        }
        let operators = Operator::ALL.into_iter().filter(|op| match op.family() {
            Family::Division => flags.include_div,
            f => flags.all_operators || families.contains(&f),
        });
        let mut cs = Self::new(rc.location.live_vars.clone(), constants, operators);
        for e in rc.original.subterms() {
            if !cs.preferred.contains(e) {
                cs.preferred.push(e.clone());
            }
        }
        cs
    }

    pub fn has(&self, op: Operator) -> bool {
        self.operators.contains(&op)
    }
}
