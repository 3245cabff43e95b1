//! Canonical rendering that keeps every statement on its recorded line.
//!
//! Statements, constants and the function header are *pinned* to their line.
//! Structural tokens (`}` and `} else {`) float: they take a line of their own
//! when the next pinned item leaves room, otherwise they share a line with a
//! neighbour. Gaps are filled with blank lines.

use super::ast::{Else, Program, Stmt, StmtKind};

const INDENT: &str = "    ";

#[derive(Debug)]
enum Item {
    Pinned {
        line: u32,
        depth: usize,
        text: String,
        opens: bool,
    },
    /// Closes the innermost open block.
    Close { depth: usize },
    /// `} else {`: closes a block and opens the else block.
    CloseElse { depth: usize },
    /// `} else` immediately followed by a pinned `if`.
    CloseElseIf { depth: usize },
}

pub fn pretty_print(program: &Program) -> String {
    let mut items = Vec::new();
    let f = &program.function;
    let mut header_emitted = false;
    let emit_function = |items: &mut Vec<Item>| {
        items.push(Item::Pinned {
            line: f.line,
            depth: 0,
            text: format!("function {}({}) {{", f.name, f.params.join(", ")),
            opens: true,
        });
        block_items(&f.body, 1, items);
        items.push(Item::Close { depth: 0 });
    };
    for c in &program.constants {
        if !header_emitted && c.line > f.line {
            emit_function(&mut items);
            header_emitted = true;
        }
        items.push(Item::Pinned {
            line: c.line,
            depth: 0,
            text: format!("const {} = {};", c.name, c.value),
            opens: false,
        });
    }
    if !header_emitted {
        emit_function(&mut items);
    }
    layout(&items)
}

fn block_items(stmts: &[Stmt], depth: usize, items: &mut Vec<Item>) {
    for s in stmts {
        stmt_items(s, depth, items);
    }
}

fn stmt_items(s: &Stmt, depth: usize, items: &mut Vec<Item>) {
    let pin = |text: String, opens: bool| Item::Pinned {
        line: s.line,
        depth,
        text,
        opens,
    };
    match &s.kind {
        StmtKind::Let { name, init } => items.push(pin(format!("var {name} = {init};"), false)),
        StmtKind::Assign { name, value } => items.push(pin(format!("{name} = {value};"), false)),
        StmtKind::Return(e) => items.push(pin(format!("return {e};"), false)),
        StmtKind::While { cond, body } => {
            items.push(pin(format!("while ({cond}) {{"), true));
            block_items(body, depth + 1, items);
            items.push(Item::Close { depth });
        }
        StmtKind::If {
            cond,
            then_body,
            else_branch,
        } => {
            items.push(pin(format!("if ({cond}) {{"), true));
            block_items(then_body, depth + 1, items);
            match else_branch {
                None => items.push(Item::Close { depth }),
                Some(Else::Block(body)) => {
                    items.push(Item::CloseElse { depth });
                    block_items(body, depth + 1, items);
                    items.push(Item::Close { depth });
                }
                Some(Else::If(nested)) => {
                    items.push(Item::CloseElseIf { depth });
                    // The nested `if` carries its own closing brace.
                    stmt_items(nested, depth, items);
                }
            }
        }
    }
}

fn layout(items: &[Item]) -> String {
    let mut lines: Vec<String> = Vec::new();
    // Line numbers on which each currently open block started.
    let mut open: Vec<usize> = Vec::new();
    let next_pin = |from: usize| {
        items[from..].iter().find_map(|it| match it {
            Item::Pinned { line, .. } => Some(*line as usize),
            _ => None,
        })
    };
    let append = |lines: &mut Vec<String>, text: &str| match lines.last_mut() {
        Some(last) if !last.trim().is_empty() => {
            last.push(' ');
            last.push_str(text);
        }
        Some(last) => last.push_str(text),
        None => lines.push(text.to_string()),
    };
    let start_line = |lines: &mut Vec<String>, at: usize, depth: usize, text: &str| {
        while lines.len() + 1 < at {
            lines.push(String::new());
        }
        lines.push(format!("{}{}", INDENT.repeat(depth), text));
    };

    for (i, item) in items.iter().enumerate() {
        let cur = lines.len();
        match item {
            Item::Pinned {
                line,
                depth,
                text,
                opens,
            } => {
                let line = *line as usize;
                if line > cur {
                    start_line(&mut lines, line, *depth, text);
                } else {
                    debug_assert_eq!(line, cur, "pinned item behind the cursor");
                    append(&mut lines, text);
                }
                if *opens {
                    open.push(lines.len());
                }
            }
            Item::Close { depth } => {
                let opened_here = open.pop() == Some(cur);
                let room = next_pin(i + 1).is_none_or(|n| n > cur + 1);
                if !opened_here && room {
                    start_line(&mut lines, cur + 1, *depth, "}");
                } else {
                    append(&mut lines, "}");
                }
            }
            Item::CloseElse { depth } => {
                let opened_here = open.pop() == Some(cur);
                let next = next_pin(i + 1);
                if !opened_here && next.is_none_or(|n| n > cur) {
                    start_line(&mut lines, cur + 1, *depth, "} else {");
                } else {
                    append(&mut lines, "} else {");
                }
                open.push(lines.len());
            }
            Item::CloseElseIf { depth } => {
                let opened_here = open.pop() == Some(cur);
                let next = next_pin(i + 1).expect("else-if is followed by its if");
                if !opened_here && next > cur {
                    start_line(&mut lines, next, *depth, "} else");
                } else {
                    append(&mut lines, "} else");
                }
            }
        }
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}
