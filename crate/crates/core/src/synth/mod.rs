//! Component-based enumerative synthesis of a replacement expression.

mod components;
mod engine;

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use components::{ComponentFlags, ComponentSet, Operator};
use engine::Engine;

use crate::interp::{eval_expr, Value};
use crate::minilang::{Expr, Type};
use crate::symexec::{RepairConstraint, ValueKind};

pub const DEFAULT_MAX_SIZE: usize = 11;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("no expression of size at most {max_size} satisfies the repair constraint")]
    SynthesisExhausted { max_size: usize },
    #[error("synthesis deadline reached while enumerating size {size}")]
    DeadlineExceeded { size: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Synthesized {
    pub expr: Expr,
    /// Observationally distinct candidates enumerated before and including `expr`.
    pub explored: usize,
}

fn value_type(kind: ValueKind) -> Type {
    match kind {
        ValueKind::Boolean => Type::Bool,
        ValueKind::Integer => Type::Int,
    }
}

/// Every expression of `ty` up to `max_size`, without observational
/// pruning, in the synthesizer's enumeration order.
pub fn enumerate_expressions(cs: &ComponentSet, ty: Type, max_size: usize) -> Vec<Expr> {
    let mut engine = Engine::new(cs, HashMap::new(), &[], false, None);
    let mut out = Vec::new();
    let _ = engine.run(max_size, |e, id| {
        if e.node_type(id) == ty {
            out.push(e.expr(id));
        }
        false
    });
    out
}

/// True when `e` reproduces some passing path of every forest.
pub fn check_candidate(e: &Expr, rc: &RepairConstraint) -> bool {
    let consts: HashMap<String, i64> = rc.constants.clone().into_iter().collect();
    rc.satisfied_by(|env| eval_expr(e, &|name| env.get(name).copied(), &consts).ok())
}

/// The constraint's forests with each environment replaced by its index in
/// a shared table.
struct IndexedConstraint {
    envs: Vec<BTreeMap<String, i64>>,
    forests: Vec<Vec<Vec<(usize, Value)>>>,
}

impl IndexedConstraint {
    fn new(rc: &RepairConstraint) -> Self {
        let mut index: HashMap<&BTreeMap<String, i64>, usize> = HashMap::new();
        let mut envs = Vec::new();
        let forests = rc
            .forests
            .iter()
            .map(|f| {
                f.passing_paths
                    .iter()
                    .map(|path| {
                        path.iter()
                            .map(|step| {
                                let i = *index.entry(&step.env).or_insert_with(|| {
                                    envs.push(step.env.clone());
                                    envs.len() - 1
                                });
                                (i, step.forced)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self { envs, forests }
    }

    fn accepts(&self, vector: &[Option<Value>]) -> bool {
        self.forests.iter().all(|paths| {
            paths
                .iter()
                .any(|path| path.iter().all(|(i, v)| vector[*i] == Some(*v)))
        })
    }
}

/// The first satisfying expression in enumeration order, which is therefore
/// of minimal size.
pub fn synthesize(
    rc: &RepairConstraint,
    cs: &ComponentSet,
    max_size: usize,
) -> Result<Expr, SynthError> {
    synthesize_until(rc, cs, max_size, None).map(|s| s.expr)
}

pub fn synthesize_until(
    rc: &RepairConstraint,
    cs: &ComponentSet,
    max_size: usize,
    deadline: Option<Instant>,
) -> Result<Synthesized, SynthError> {
    let target = value_type(rc.value_kind);
    let indexed = IndexedConstraint::new(rc);
    let consts: HashMap<String, i64> = rc.constants.clone().into_iter().collect();
    let mut engine = Engine::new(cs, consts, &indexed.envs, true, deadline);
    let found = engine
        .run(max_size, |e, id| {
            e.node_type(id) == target && indexed.accepts(e.vector(id))
        })
        .map_err(|d| SynthError::DeadlineExceeded { size: d.size })?;
    match found {
        Some(id) => Ok(Synthesized {
            expr: engine.expr(id),
            explored: engine.explored,
        }),
        None => Err(SynthError::SynthesisExhausted { max_size }),
    }
}

#[cfg(test)]
mod tests;
