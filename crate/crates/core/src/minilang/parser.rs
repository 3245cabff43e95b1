use std::collections::{HashMap, HashSet};

use super::ast::{
    BinaryOp, ConstDecl, Else, Expr, Function, Program, Stmt, StmtKind, Type, UnaryOp,
};
use super::lexer::{tokenize, Tok, Token};
use super::{MiniLangError, SourceError};

/// Parse and check a complete MiniLang source file.
pub fn parse_program(source: &str) -> Result<Program, MiniLangError> {
    let tokens = tokenize(source).map_err(MiniLangError::Parse)?;
    let mut parser = Parser::new(tokens);
    let (program, columns) = parser.file()?;
    let program = Checker::new(&program, &columns).check()?;
    Ok(program)
}

/// Parse a standalone expression in the scope of the statement at `line`.
///
/// Names resolve to the program's constants or to variables live at that line.
pub fn parse_expression(text: &str, program: &Program, line: u32) -> Result<Expr, MiniLangError> {
    let live = program.live_vars(line).ok_or_else(|| {
        MiniLangError::Type(SourceError::new(
            line,
            1,
            format!("no statement on line {line}"),
        ))
    })?;
    parse_expression_in(text, program, &live, line)
}

/// Parse a standalone expression where `vars` are the visible variables.
pub fn parse_expression_in(
    text: &str,
    program: &Program,
    vars: &[String],
    line: u32,
) -> Result<Expr, MiniLangError> {
    let tokens = tokenize(text).map_err(MiniLangError::Parse)?;
    let mut parser = Parser::new(tokens);
    let expr = parser.expr()?;
    if let Some(tok) = parser.peek() {
        return Err(MiniLangError::Parse(SourceError::new(
            tok.line,
            tok.col,
            format!("unexpected {} after expression", tok.tok.describe()),
        )));
    }
    let consts: HashSet<&str> = program.constants.iter().map(|c| c.name.as_str()).collect();
    let scope: Vec<&str> = vars.iter().map(String::as_str).collect();
    let (expr, _) = resolve(expr, &consts, &scope, line, 1)?;
    Ok(expr)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    lines_seen: HashSet<u32>,
    columns: HashMap<u32, u32>,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        Self {
            tokens,
            pos: 0,
            lines_seen: HashSet::new(),
            columns: HashMap::new(),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_tok(&self) -> Option<&Tok> {
        self.peek().map(|t| &t.tok)
    }

    fn bump(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn error_here(&self, message: impl Into<String>) -> MiniLangError {
        let (line, col) = match self.peek() {
            Some(t) => (t.line, t.col),
            None => self
                .tokens
                .last()
                .map(|t| (t.line, t.col + 1))
                .unwrap_or((1, 1)),
        };
        MiniLangError::Parse(SourceError::new(line, col, message))
    }

    fn unexpected(&self, wanted: &str) -> MiniLangError {
        match self.peek() {
            Some(t) => self.error_here(format!("expected {wanted}, found {}", t.tok.describe())),
            None => self.error_here(format!("expected {wanted}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<Token, MiniLangError> {
        if self.peek_tok() == Some(&tok) {
            Ok(self.bump().expect("peeked"))
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn ident(&mut self) -> Result<(String, Token), MiniLangError> {
        match self.peek_tok() {
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                let tok = self.bump().expect("peeked");
                Ok((name, tok))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn file(&mut self) -> Result<(Program, HashMap<u32, u32>), MiniLangError> {
        let mut constants = Vec::new();
        let mut function: Option<Function> = None;
        while let Some(tok) = self.peek() {
            match tok.tok {
                Tok::Const => constants.push(self.const_decl()?),
                Tok::Function => {
                    if function.is_some() {
                        return Err(self.error_here("only one function per file is allowed"));
                    }
                    function = Some(self.function()?);
                }
                _ => return Err(self.unexpected("`const` or `function`")),
            }
        }
        let function = function
            .ok_or_else(|| MiniLangError::Parse(SourceError::new(1, 1, "no function in source")))?;
        Ok((
            Program {
                constants,
                function,
            },
            std::mem::take(&mut self.columns),
        ))
    }

    fn const_decl(&mut self) -> Result<ConstDecl, MiniLangError> {
        let kw = self.expect(Tok::Const, "`const`")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::Assign, "`=`")?;
        let negative = if self.peek_tok() == Some(&Tok::Minus) {
            self.bump();
            true
        } else {
            false
        };
        let value = match self.peek_tok() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.bump();
                v
            }
            _ => return Err(self.unexpected("integer constant value")),
        };
        self.expect(Tok::Semi, "`;`")?;
        self.columns.insert(kw.line, kw.col);
        Ok(ConstDecl {
            name,
            value: if negative { -value } else { value },
            line: kw.line,
        })
    }

    fn function(&mut self) -> Result<Function, MiniLangError> {
        let kw = self.expect(Tok::Function, "`function`")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if self.peek_tok() != Some(&Tok::RParen) {
            loop {
                params.push(self.ident()?.0);
                if self.peek_tok() == Some(&Tok::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        let body = self.block()?;
        Ok(Function {
            name,
            params,
            line: kw.line,
            body,
        })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, MiniLangError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        loop {
            match self.peek_tok() {
                Some(Tok::RBrace) => {
                    self.bump();
                    return Ok(stmts);
                }
                None => return Err(self.unexpected("`}`")),
                _ => stmts.push(self.statement()?),
            }
        }
    }

    /// A braced block, or a single statement standing in for one.
    fn body(&mut self) -> Result<Vec<Stmt>, MiniLangError> {
        if self.peek_tok() == Some(&Tok::LBrace) {
            self.block()
        } else {
            Ok(vec![self.statement()?])
        }
    }

    fn statement(&mut self) -> Result<Stmt, MiniLangError> {
        let start = match self.peek() {
            Some(t) => t.clone(),
            None => return Err(self.unexpected("statement")),
        };
        if !self.lines_seen.insert(start.line) {
            return Err(MiniLangError::Parse(SourceError::new(
                start.line,
                start.col,
                "more than one statement on this line",
            )));
        }
        self.columns.insert(start.line, start.col);
        let kind = match &start.tok {
            Tok::Var => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::Assign, "`=` (locals must be initialized)")?;
                let init = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                StmtKind::Let { name, init }
            }
            Tok::Ident(_) => {
                let (name, _) = self.ident()?;
                self.expect(Tok::Assign, "`=`")?;
                let value = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                StmtKind::Assign { name, value }
            }
            Tok::Return => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                StmtKind::Return(e)
            }
            Tok::While => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let body = self.body()?;
                StmtKind::While { cond, body }
            }
            Tok::If => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let then_body = self.body()?;
                let else_branch = if self.peek_tok() == Some(&Tok::Else) {
                    self.bump();
                    if self.peek_tok() == Some(&Tok::If) {
                        Some(Else::If(Box::new(self.statement()?)))
                    } else {
                        Some(Else::Block(self.body()?))
                    }
                } else {
                    None
                };
                StmtKind::If {
                    cond,
                    then_body,
                    else_branch,
                }
            }
            _ => return Err(self.unexpected("statement")),
        };
        Ok(Stmt {
            line: start.line,
            kind,
        })
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, MiniLangError> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        Some(match self.peek_tok()? {
            Tok::OrOr => BinaryOp::Or,
            Tok::AndAnd => BinaryOp::And,
            Tok::EqEq => BinaryOp::Eq,
            Tok::NotEq => BinaryOp::Ne,
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            Tok::Plus => BinaryOp::Add,
            Tok::Minus => BinaryOp::Sub,
            Tok::Star => BinaryOp::Mul,
            Tok::Slash => BinaryOp::Div,
            Tok::Percent => BinaryOp::Mod,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, MiniLangError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, MiniLangError> {
        match self.peek_tok() {
            Some(Tok::Minus) => {
                self.bump();
                // `-7` is a single literal node, not a negation of `7`.
                if let Some(Tok::Int(v)) = self.peek_tok() {
                    let v = *v;
                    self.bump();
                    return Ok(Expr::Int(-v));
                }
                Ok(Expr::unary(UnaryOp::Neg, self.unary()?))
            }
            Some(Tok::Bang) => {
                self.bump();
                Ok(Expr::unary(UnaryOp::Not, self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, MiniLangError> {
        match self.peek_tok() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.bump();
                Ok(Expr::Int(v))
            }
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                self.bump();
                Ok(Expr::Var(name))
            }
            Some(Tok::LParen) => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}

fn type_error(line: u32, col: u32, message: impl Into<String>) -> MiniLangError {
    MiniLangError::Type(SourceError::new(line, col, message))
}

/// Resolve names to constants or variables and compute the expression type.
fn resolve(
    expr: Expr,
    consts: &HashSet<&str>,
    scope: &[&str],
    line: u32,
    col: u32,
) -> Result<(Expr, Type), MiniLangError> {
    match expr {
        Expr::Int(v) => Ok((Expr::Int(v), Type::Int)),
        Expr::Var(name) | Expr::Const(name) => {
            if scope.contains(&name.as_str()) {
                Ok((Expr::Var(name), Type::Int))
            } else if consts.contains(name.as_str()) {
                Ok((Expr::Const(name), Type::Int))
            } else {
                Err(type_error(line, col, format!("unknown name `{name}`")))
            }
        }
        Expr::Unary(op, e) => {
            let (e, ty) = resolve(*e, consts, scope, line, col)?;
            if ty != op.operand_type() {
                return Err(type_error(
                    line,
                    col,
                    format!(
                        "operator `{}` expects {}, found {ty}",
                        op.symbol(),
                        op.operand_type()
                    ),
                ));
            }
            Ok((Expr::unary(op, e), op.result_type()))
        }
        Expr::Binary(op, l, r) => {
            let (l, lt) = resolve(*l, consts, scope, line, col)?;
            let (r, rt) = resolve(*r, consts, scope, line, col)?;
            let want = op.operand_type();
            if lt != want || rt != want {
                return Err(type_error(
                    line,
                    col,
                    format!(
                        "operator `{}` expects {want} operands, found {lt} and {rt}",
                        op.symbol()
                    ),
                ));
            }
            Ok((Expr::binary(op, l, r), op.result_type()))
        }
    }
}

struct Checker<'a> {
    program: &'a Program,
    columns: &'a HashMap<u32, u32>,
    consts: HashSet<&'a str>,
    declared: HashSet<String>,
}

impl<'a> Checker<'a> {
    fn new(program: &'a Program, columns: &'a HashMap<u32, u32>) -> Self {
        Self {
            program,
            columns,
            consts: HashSet::new(),
            declared: HashSet::new(),
        }
    }

    fn col(&self, line: u32) -> u32 {
        self.columns.get(&line).copied().unwrap_or(1)
    }

    fn check(mut self) -> Result<Program, MiniLangError> {
        let program = self.program;
        for c in &program.constants {
            if !self.consts.insert(c.name.as_str()) {
                return Err(type_error(
                    c.line,
                    self.col(c.line),
                    format!("duplicate constant `{}`", c.name),
                ));
            }
        }
        let f = &program.function;
        for p in &f.params {
            if self.consts.contains(p.as_str()) || !self.declared.insert(p.clone()) {
                return Err(type_error(
                    f.line,
                    1,
                    format!("duplicate declaration of `{p}`"),
                ));
            }
        }
        let mut scope: Vec<String> = f.params.clone();
        let body = self.block(&f.body, &mut scope)?;
        Ok(Program {
            constants: program.constants.clone(),
            function: Function { body, ..f.clone() },
        })
    }

    fn block(
        &mut self,
        stmts: &[Stmt],
        scope: &mut Vec<String>,
    ) -> Result<Vec<Stmt>, MiniLangError> {
        let mark = scope.len();
        let mut out = Vec::with_capacity(stmts.len());
        for s in stmts {
            out.push(self.stmt(s, scope)?);
        }
        scope.truncate(mark);
        Ok(out)
    }

    fn expr(
        &self,
        e: &Expr,
        want: Type,
        line: u32,
        scope: &[String],
    ) -> Result<Expr, MiniLangError> {
        let col = self.col(line);
        let names: Vec<&str> = scope.iter().map(String::as_str).collect();
        let (e, ty) = resolve(e.clone(), &self.consts, &names, line, col)?;
        if ty != want {
            return Err(type_error(
                line,
                col,
                format!("expected {want} expression, found {ty}"),
            ));
        }
        Ok(e)
    }

    fn stmt(&mut self, s: &Stmt, scope: &mut Vec<String>) -> Result<Stmt, MiniLangError> {
        let line = s.line;
        let kind = match &s.kind {
            StmtKind::Let { name, init } => {
                let init = self.expr(init, Type::Int, line, scope)?;
                if self.consts.contains(name.as_str()) || !self.declared.insert(name.clone()) {
                    return Err(type_error(
                        line,
                        self.col(line),
                        format!("duplicate declaration of `{name}`"),
                    ));
                }
                scope.push(name.clone());
                StmtKind::Let {
                    name: name.clone(),
                    init,
                }
            }
            StmtKind::Assign { name, value } => {
                if !scope.contains(name) {
                    let msg = if self.consts.contains(name.as_str()) {
                        format!("cannot assign to constant `{name}`")
                    } else {
                        format!("unknown name `{name}`")
                    };
                    return Err(type_error(line, self.col(line), msg));
                }
                StmtKind::Assign {
                    name: name.clone(),
                    value: self.expr(value, Type::Int, line, scope)?,
                }
            }
            StmtKind::Return(e) => StmtKind::Return(self.expr(e, Type::Int, line, scope)?),
            StmtKind::While { cond, body } => StmtKind::While {
                cond: self.expr(cond, Type::Bool, line, scope)?,
                body: self.block(body, scope)?,
            },
            StmtKind::If {
                cond,
                then_body,
                else_branch,
            } => {
                let cond = self.expr(cond, Type::Bool, line, scope)?;
                let then_body = self.block(then_body, scope)?;
                let else_branch = match else_branch {
                    None => None,
                    Some(Else::Block(b)) => Some(Else::Block(self.block(b, scope)?)),
                    Some(Else::If(nested)) => Some(Else::If(Box::new(self.stmt(nested, scope)?))),
                };
                StmtKind::If {
                    cond,
                    then_body,
                    else_branch,
                }
            }
        };
        Ok(Stmt { line, kind })
    }
}
