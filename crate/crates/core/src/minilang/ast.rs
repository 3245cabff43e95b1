use std::fmt;

use serde::{Deserialize, Serialize};

/// Static type of a MiniLang expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Type {
    Int,
    Bool,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Bool => f.write_str("bool"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnaryOp {
    Neg,
    Not,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Not => "!",
        }
    }

    pub fn operand_type(self) -> Type {
        match self {
            UnaryOp::Neg => Type::Int,
            UnaryOp::Not => Type::Bool,
        }
    }

    pub fn result_type(self) -> Type {
        self.operand_type()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "%",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter. All levels are left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne => 3,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod => 6,
        }
    }

    pub fn operand_type(self) -> Type {
        match self {
            BinaryOp::And | BinaryOp::Or => Type::Bool,
            _ => Type::Int,
        }
    }

    pub fn result_type(self) -> Type {
        match self {
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod => {
                Type::Int
            }
            _ => Type::Bool,
        }
    }

    /// Operand order never affects the value or the error behaviour.
    ///
    /// `&&` and `||` short-circuit, so swapping operands can change whether a
    /// division by zero in the right operand is reached; they are excluded.
    pub fn is_commutative(self) -> bool {
        matches!(
            self,
            BinaryOp::Add | BinaryOp::Mul | BinaryOp::Eq | BinaryOp::Ne
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Int(i64),
    /// Reference to a `const` declaration.
    Const(String),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn unary(op: UnaryOp, operand: Expr) -> Self {
        Expr::Unary(op, Box::new(operand))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Number of tree nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Int(_) | Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, e) => 1 + e.size(),
            Expr::Binary(_, l, r) => 1 + l.size() + r.size(),
        }
    }

    /// Subterms in pre-order, the expression itself first.
    pub fn subterms(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        self.collect_subterms(&mut out);
        out
    }

    fn collect_subterms<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        out.push(self);
        match self {
            Expr::Unary(_, e) => e.collect_subterms(out),
            Expr::Binary(_, l, r) => {
                l.collect_subterms(out);
                r.collect_subterms(out);
            }
            _ => {}
        }
    }

    pub fn contains_const_ref(&self) -> bool {
        self.subterms().iter().any(|e| matches!(e, Expr::Const(_)))
    }

    /// Type of the expression, assuming names are already resolved and
    /// every variable is an integer.
    pub fn result_type(&self) -> Type {
        match self {
            Expr::Int(_) | Expr::Const(_) | Expr::Var(_) => Type::Int,
            Expr::Unary(op, _) => op.result_type(),
            Expr::Binary(op, _, _) => op.result_type(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            Expr::Unary(..) => 7,
            Expr::Int(v) if *v < 0 => 7,
            _ => 8,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Const(name) | Expr::Var(name) => f.write_str(name),
            Expr::Unary(op, e) => {
                f.write_str(op.symbol())?;
                if e.precedence() <= 7 {
                    write!(f, "({e})")
                } else {
                    write!(f, "{e}")
                }
            }
            Expr::Binary(op, l, r) => {
                let prec = op.precedence();
                if l.precedence() < prec {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                write!(f, " {} ", op.symbol())?;
                // Left-associative: an equal-precedence right child needs parens.
                if r.precedence() <= prec {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stmt {
    pub line: u32,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StmtKind {
    /// `var name = init;`
    Let {
        name: String,
        init: Expr,
    },
    Assign {
        name: String,
        value: Expr,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_branch: Option<Else>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    Return(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Else {
    Block(Vec<Stmt>),
    /// `else if (...)`: the nested statement is always an `If`.
    If(Box<Stmt>),
}

impl Stmt {
    /// The single expression owned directly by this statement.
    pub fn expr(&self) -> &Expr {
        match &self.kind {
            StmtKind::Let { init, .. } => init,
            StmtKind::Assign { value, .. } => value,
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => cond,
            StmtKind::Return(e) => e,
        }
    }

    pub fn expr_mut(&mut self) -> &mut Expr {
        match &mut self.kind {
            StmtKind::Let { init, .. } => init,
            StmtKind::Assign { value, .. } => value,
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => cond,
            StmtKind::Return(e) => e,
        }
    }

    /// Directly nested statement lists, in source order.
    pub fn children(&self) -> Vec<&[Stmt]> {
        match &self.kind {
            StmtKind::If {
                then_body,
                else_branch,
                ..
            } => {
                let mut out: Vec<&[Stmt]> = vec![then_body.as_slice()];
                match else_branch {
                    Some(Else::Block(b)) => out.push(b.as_slice()),
                    Some(Else::If(s)) => out.push(std::slice::from_ref(s.as_ref())),
                    None => {}
                }
                out
            }
            StmtKind::While { body, .. } => vec![body.as_slice()],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstDecl {
    pub name: String,
    pub value: i64,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Function {
    pub name: String,
    pub params: Vec<String>,
    pub line: u32,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub constants: Vec<ConstDecl>,
    pub function: Function,
}

impl Program {
    pub fn arity(&self) -> usize {
        self.function.params.len()
    }

    pub fn constant(&self, name: &str) -> Option<i64> {
        self.constants
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.value)
    }

    /// All statements in source (pre-)order.
    pub fn statements(&self) -> Vec<&Stmt> {
        fn walk<'a>(stmts: &'a [Stmt], out: &mut Vec<&'a Stmt>) {
            for s in stmts {
                out.push(s);
                for child in s.children() {
                    walk(child, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.function.body, &mut out);
        out
    }

    pub fn statement_at(&self, line: u32) -> Option<&Stmt> {
        self.statements().into_iter().find(|s| s.line == line)
    }

    pub fn statement_at_mut(&mut self, line: u32) -> Option<&mut Stmt> {
        fn walk(stmts: &mut [Stmt], line: u32) -> Option<&mut Stmt> {
            for s in stmts {
                if s.line == line {
                    return Some(s);
                }
                let found = match &mut s.kind {
                    StmtKind::If {
                        then_body,
                        else_branch,
                        ..
                    } => walk(then_body, line).or_else(|| match else_branch {
                        Some(Else::Block(b)) => walk(b, line),
                        Some(Else::If(nested)) => walk(std::slice::from_mut(nested.as_mut()), line),
                        None => None,
                    }),
                    StmtKind::While { body, .. } => walk(body, line),
                    _ => None,
                };
                if found.is_some() {
                    return found;
                }
            }
            None
        }
        walk(&mut self.function.body, line)
    }

    pub fn lines(&self) -> Vec<u32> {
        self.statements().iter().map(|s| s.line).collect()
    }

    /// Integer literals occurring in the function body, deduplicated, in
    /// first-occurrence order.
    pub fn literals(&self) -> Vec<i64> {
        let mut out = Vec::new();
        for stmt in self.statements() {
            for e in stmt.expr().subterms() {
                if let Expr::Int(v) = e {
                    if !out.contains(v) {
                        out.push(*v);
                    }
                }
            }
        }
        out
    }

    /// Parameters and locals in scope at the statement on `line`, in
    /// declaration order. A declaration is not in scope in its own initializer.
    pub fn live_vars(&self, line: u32) -> Option<Vec<String>> {
        fn walk(stmts: &[Stmt], scope: &mut Vec<String>, line: u32) -> Option<Vec<String>> {
            let mark = scope.len();
            for s in stmts {
                if s.line == line {
                    return Some(scope.clone());
                }
                for child in s.children() {
                    if let Some(found) = walk(child, scope, line) {
                        return Some(found);
                    }
                }
                if let StmtKind::Let { name, .. } = &s.kind {
                    scope.push(name.clone());
                }
            }
            scope.truncate(mark);
            None
        }
        let mut scope = self.function.params.clone();
        walk(&self.function.body, &mut scope, line)
    }
}
