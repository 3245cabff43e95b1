//! Bottom-up, size-ordered expression enumeration.
//!
//! Candidates of size `s` are emitted in this order: preferred ingredients of
//! size `s`; then, for `s == 1`, variables followed by constants; otherwise
//! each operator in declaration order, binary operands split with the left
//! size descending, the left operand as the outer loop. Commutative operators
//! only combine operands whose (size, bank position) keys are ordered.
//!
//! With pruning enabled every candidate carries its value vector over the
//! recorded environments and only the first candidate with a given vector
//! enters the bank.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use super::components::ComponentSet;
use crate::interp::{apply_int, Value};
use crate::minilang::{BinaryOp, Expr, Type, UnaryOp};
use crate::par;

pub(crate) type Vector = Vec<Option<Value>>;

const CHUNK: usize = 4096;
const PARALLEL_THRESHOLD: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Leaf(Expr),
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize),
}

fn slot(t: Type) -> usize {
    match t {
        Type::Int => 0,
        Type::Bool => 1,
    }
}

pub(crate) struct DeadlineExceeded {
    pub size: usize,
}

pub(crate) struct Engine<'a> {
    cs: &'a ComponentSet,
    consts: HashMap<String, i64>,
    envs: &'a [BTreeMap<String, i64>],
    prune: bool,
    deadline: Option<Instant>,
    nodes: Vec<Node>,
    types: Vec<Type>,
    values: Vec<Vector>,
    /// `banks[size][slot]` holds node ids in emission order.
    banks: Vec<[Vec<usize>; 2]>,
    seen: HashSet<(Type, Vector)>,
    /// Preferred expressions closed under subterms, in pre-order.
    ingredients: Vec<Expr>,
    ingredient_ids: HashMap<Expr, usize>,
    ingredient_shapes: HashSet<Node>,
    pub explored: usize,
}

impl<'a> Engine<'a> {
    pub fn new(
        cs: &'a ComponentSet,
        consts: HashMap<String, i64>,
        envs: &'a [BTreeMap<String, i64>],
        prune: bool,
        deadline: Option<Instant>,
    ) -> Self {
        let mut ingredients: Vec<Expr> = Vec::new();
        for e in cs.preferred.iter().flat_map(|p| p.subterms()) {
            if !ingredients.contains(e) {
                ingredients.push(e.clone());
            }
        }
        Self {
            cs,
            consts,
            envs,
            prune,
            deadline,
            nodes: Vec::new(),
            types: Vec::new(),
            values: Vec::new(),
            banks: vec![[Vec::new(), Vec::new()]],
            seen: HashSet::new(),
            ingredients,
            ingredient_ids: HashMap::new(),
            ingredient_shapes: HashSet::new(),
            explored: 0,
        }
    }

    pub fn expr(&self, id: usize) -> Expr {
        match &self.nodes[id] {
            Node::Leaf(e) => e.clone(),
            Node::Unary(op, c) => Expr::unary(*op, self.expr(*c)),
            Node::Binary(op, l, r) => Expr::binary(*op, self.expr(*l), self.expr(*r)),
        }
    }

    pub fn node_type(&self, id: usize) -> Type {
        self.types[id]
    }

    pub fn vector(&self, id: usize) -> &Vector {
        &self.values[id]
    }

    /// Enumerate sizes `1..=max_size`, calling `visit` on each emitted
    /// candidate until it returns true.
    pub fn run<F>(
        &mut self,
        max_size: usize,
        mut visit: F,
    ) -> Result<Option<usize>, DeadlineExceeded>
    where
        F: FnMut(&Engine<'_>, usize) -> bool,
    {
        for size in 1..=max_size {
            self.banks.push([Vec::new(), Vec::new()]);
            if let Some(found) = self.run_size(size, &mut visit)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }

    fn check_deadline(&self, size: usize) -> Result<(), DeadlineExceeded> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(DeadlineExceeded { size }),
            _ => Ok(()),
        }
    }

    fn run_size<F>(&mut self, size: usize, visit: &mut F) -> Result<Option<usize>, DeadlineExceeded>
    where
        F: FnMut(&Engine<'_>, usize) -> bool,
    {
        self.check_deadline(size)?;
        let preferred: Vec<Expr> = self
            .ingredients
            .iter()
            .filter(|e| e.size() == size)
            .cloned()
            .collect();
        for e in preferred {
            let shape = match &e {
                Expr::Unary(op, c) => Node::Unary(*op, self.ingredient_ids[c.as_ref()]),
                Expr::Binary(op, l, r) => Node::Binary(
                    *op,
                    self.ingredient_ids[l.as_ref()],
                    self.ingredient_ids[r.as_ref()],
                ),
                leaf => Node::Leaf(leaf.clone()),
            };
            self.ingredient_shapes.insert(shape.clone());
            let vector = self.compute(&shape);
            let (id, emitted) = self.offer(size, shape, vector, true);
            self.ingredient_ids
                .insert(e, id.expect("ingredients always get a node"));
            if emitted && visit(self, id.unwrap()) {
                return Ok(id);
            }
        }

        if size == 1 {
            let leaves: Vec<Node> = self
                .cs
                .variables
                .iter()
                .map(|v| Node::Leaf(Expr::var(v.clone())))
                .chain(self.cs.constants.iter().map(|c| Node::Leaf(Expr::Int(*c))))
                .filter(|n| !self.ingredient_shapes.contains(n))
                .collect();
            return self.flush(size, leaves, visit);
        }

        for op in self.cs.operators.clone() {
            let mut chunk = Vec::new();
            if let Some(u) = op.unary() {
                let children = self.banks[size - 1][slot(u.operand_type())].clone();
                for c in children {
                    if u == UnaryOp::Neg && matches!(self.nodes[c], Node::Leaf(Expr::Int(_))) {
                        continue;
                    }
                    let shape = Node::Unary(u, c);
                    if !self.ingredient_shapes.contains(&shape) {
                        chunk.push(shape);
                    }
                }
                if let Some(found) = self.flush(size, chunk, visit)? {
                    return Ok(Some(found));
                }
                continue;
            }
            let b = op.binary().expect("operator is unary or binary");
            let operand = slot(b.operand_type());
            for ls in (1..size - 1).rev() {
                let rs = size - 1 - ls;
                if b.is_commutative() && ls > rs {
                    continue;
                }
                let left = self.banks[ls][operand].clone();
                let right = self.banks[rs][operand].clone();
                for (li, l) in left.iter().enumerate() {
                    let start = if b.is_commutative() && ls == rs {
                        li
                    } else {
                        0
                    };
                    for r in &right[start..] {
                        let shape = Node::Binary(b, *l, *r);
                        if self.ingredient_shapes.contains(&shape) {
                            continue;
                        }
                        chunk.push(shape);
                        if chunk.len() >= CHUNK {
                            if let Some(found) =
                                self.flush(size, std::mem::take(&mut chunk), visit)?
                            {
                                return Ok(Some(found));
                            }
                        }
                    }
                }
            }
            if let Some(found) = self.flush(size, chunk, visit)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }

    fn flush<F>(
        &mut self,
        size: usize,
        shapes: Vec<Node>,
        visit: &mut F,
    ) -> Result<Option<usize>, DeadlineExceeded>
    where
        F: FnMut(&Engine<'_>, usize) -> bool,
    {
        if shapes.is_empty() {
            return Ok(None);
        }
        self.check_deadline(size)?;
        let vectors = {
            let this = &*self;
            par::map_if_large(&shapes, PARALLEL_THRESHOLD, |s| this.compute(s))
        };
        for (shape, vector) in shapes.into_iter().zip(vectors) {
            if let (Some(id), true) = self.offer(size, shape, vector, false) {
                if visit(self, id) {
                    return Ok(Some(id));
                }
            }
        }
        Ok(None)
    }

    /// Returns the node id, if one was created, and whether it was emitted.
    fn offer(
        &mut self,
        size: usize,
        shape: Node,
        vector: Vector,
        ingredient: bool,
    ) -> (Option<usize>, bool) {
        let ty = self.shape_type(&shape);
        let novel = !self.prune || self.seen.insert((ty, vector.clone()));
        if !novel && !ingredient {
            return (None, false);
        }
        let id = self.nodes.len();
        self.nodes.push(shape);
        self.types.push(ty);
        self.values.push(vector);
        if novel {
            self.banks[size][slot(ty)].push(id);
            self.explored += 1;
        }
        (Some(id), novel)
    }

    fn shape_type(&self, shape: &Node) -> Type {
        match shape {
            Node::Leaf(e) => e.result_type(),
            Node::Unary(op, _) => op.result_type(),
            Node::Binary(op, _, _) => op.result_type(),
        }
    }

    fn compute(&self, shape: &Node) -> Vector {
        if !self.prune {
            return Vector::new();
        }
        match shape {
            Node::Leaf(Expr::Int(v)) => vec![Some(Value::Int(*v)); self.envs.len()],
            Node::Leaf(Expr::Const(name)) => {
                vec![self.consts.get(name).map(|v| Value::Int(*v)); self.envs.len()]
            }
            Node::Leaf(Expr::Var(name)) => self
                .envs
                .iter()
                .map(|env| env.get(name).map(|v| Value::Int(*v)))
                .collect(),
            Node::Leaf(_) => unreachable!("leaves are literals, constants or variables"),
            Node::Unary(op, c) => self.values[*c]
                .iter()
                .map(|v| match (op, v) {
                    (UnaryOp::Neg, Some(Value::Int(x))) => Some(Value::Int(x.wrapping_neg())),
                    (UnaryOp::Not, Some(Value::Bool(b))) => Some(Value::Bool(!b)),
                    _ => None,
                })
                .collect(),
            Node::Binary(op, l, r) => self.values[*l]
                .iter()
                .zip(&self.values[*r])
                .map(|(a, b)| combine(*op, *a, *b))
                .collect(),
        }
    }
}

/// Pointwise binary evaluation with the interpreter's short-circuit and
/// error semantics; `None` marks an evaluation error.
fn combine(op: BinaryOp, a: Option<Value>, b: Option<Value>) -> Option<Value> {
    match op {
        BinaryOp::And => match a? {
            Value::Bool(false) => Some(Value::Bool(false)),
            _ => b,
        },
        BinaryOp::Or => match a? {
            Value::Bool(true) => Some(Value::Bool(true)),
            _ => b,
        },
        _ => apply_int(op, a?.as_int()?, b?.as_int()?).ok(),
    }
}
