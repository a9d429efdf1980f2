use std::cell::RefCell;
use std::fmt;

use super::ops::{BinaryOp, UnaryOp};
use super::AdError;

/// Index of a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Input,
    Const(f64),
    Unary(UnaryOp),
    Binary(BinaryOp),
}

#[derive(Debug, Clone, Copy)]
struct Node {
    op: Op,
    parents: [usize; 2],
}

impl Node {
    fn arity(&self) -> usize {
        match self.op {
            Op::Input | Op::Const(_) => 0,
            Op::Unary(_) => 1,
            Op::Binary(_) => 2,
        }
    }
}

/// Counts of sweeps performed, for checking that one backward sweep yields
/// the whole gradient.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub forward: usize,
    pub backward: usize,
}

/// Append-only arena of scalar operations. Parents always precede their
/// children and the inputs occupy the first `input_count` slots, so index
/// order is a topological order.
#[derive(Debug, Clone, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    input_count: usize,
    output: Option<usize>,
    primals: Vec<f64>,
    partials: Vec<[f64; 2]>,
    adjoints: Vec<f64>,
    evaluated: bool,
    stats: SweepStats,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, op: Op, parents: [usize; 2]) -> NodeId {
        let primal = match op {
            Op::Const(v) => v,
            _ => f64::NAN,
        };
        self.nodes.push(Node { op, parents });
        self.primals.push(primal);
        self.partials.push([0.0; 2]);
        self.evaluated = false;
        NodeId(self.nodes.len() - 1)
    }

    fn check(&self, id: NodeId) -> usize {
        assert!(
            id.0 < self.nodes.len(),
            "node {} does not belong to this tape",
            id.0
        );
        id.0
    }

    /// Adds an input slot. Inputs must be created before any other node.
    pub fn input(&mut self) -> Result<NodeId, AdError> {
        if self.nodes.len() != self.input_count {
            return Err(AdError::InputAfterOperation);
        }
        self.input_count += 1;
        Ok(self.push(Op::Input, [0, 0]))
    }

    pub fn constant(&mut self, v: f64) -> NodeId {
        self.push(Op::Const(v), [0, 0])
    }

    pub fn unary(&mut self, op: UnaryOp, a: NodeId) -> NodeId {
        let a = self.check(a);
        self.push(Op::Unary(op), [a, 0])
    }

    pub fn binary(&mut self, op: BinaryOp, a: NodeId, b: NodeId) -> NodeId {
        let a = self.check(a);
        let b = self.check(b);
        self.push(Op::Binary(op), [a, b])
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary(BinaryOp::Add, a, b)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary(BinaryOp::Sub, a, b)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary(BinaryOp::Mul, a, b)
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.binary(BinaryOp::Div, a, b)
    }

    /// Designates the scalar output differentiated by [`Tape::backward`].
    pub fn set_output(&mut self, id: NodeId) {
        self.output = Some(self.check(id));
    }

    pub fn output(&self) -> Option<NodeId> {
        self.output.map(NodeId)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn input_count(&self) -> usize {
        self.input_count
    }

    pub fn op(&self, id: NodeId) -> Op {
        self.nodes[self.check(id)].op
    }

    pub fn parents(&self, id: NodeId) -> Vec<NodeId> {
        let node = &self.nodes[self.check(id)];
        node.parents[..node.arity()]
            .iter()
            .map(|&p| NodeId(p))
            .collect()
    }

    /// Primal from the most recent evaluation (constants are known up front).
    pub fn primal(&self, id: NodeId) -> f64 {
        self.primals[self.check(id)]
    }

    pub fn stats(&self) -> SweepStats {
        self.stats
    }

    /// Evaluates every node in index order, recording local partials, and
    /// returns the primal of the designated output.
    pub fn forward_eval(&mut self, x: &[f64]) -> Result<f64, AdError> {
        let out = self.output.ok_or(AdError::NoOutput)?;
        self.evaluate_all(x)?;
        Ok(self.primals[out])
    }

    /// Forward sweep without requiring a designated output.
    #[allow(clippy::needless_range_loop)]
    pub fn evaluate_all(&mut self, x: &[f64]) -> Result<(), AdError> {
        if x.len() != self.input_count {
            return Err(AdError::LengthMismatch {
                expected: self.input_count,
                got: x.len(),
            });
        }
        self.evaluated = false;
        self.stats.forward += 1;
        for i in 0..self.nodes.len() {
            let node = self.nodes[i];
            let [p0, p1] = node.parents;
            match node.op {
                Op::Input => self.primals[i] = x[i],
                Op::Const(v) => self.primals[i] = v,
                Op::Unary(op) => {
                    let (v, d) = op.apply(self.primals[p0]).map_err(|e| AdError::Domain {
                        node: i,
                        op: e.op,
                        value: e.value,
                    })?;
                    self.primals[i] = v;
                    self.partials[i] = [d, 0.0];
                }
                Op::Binary(op) => {
                    let (v, da, db) =
                        op.apply(self.primals[p0], self.primals[p1]).map_err(|e| {
                            AdError::Domain {
                                node: i,
                                op: e.op,
                                value: e.value,
                            }
                        })?;
                    self.primals[i] = v;
                    self.partials[i] = [da, db];
                }
            }
        }
        self.evaluated = true;
        Ok(())
    }

    /// Reverse sweep from the output: the adjoint of each node is the sum over
    /// its children of (child adjoint × local partial). Returns the adjoints
    /// of the inputs.
    pub fn backward(&mut self) -> Result<Vec<f64>, AdError> {
        let out = self.output.ok_or(AdError::NoOutput)?;
        if !self.evaluated {
            return Err(AdError::NotEvaluated);
        }
        self.stats.backward += 1;
        self.adjoints.clear();
        self.adjoints.resize(self.nodes.len(), 0.0);
        self.adjoints[out] = 1.0;
        for i in (0..=out).rev() {
            let adjoint = self.adjoints[i];
            if adjoint == 0.0 {
                continue;
            }
            let node = self.nodes[i];
            let [d0, d1] = self.partials[i];
            match node.arity() {
                0 => {}
                1 => self.adjoints[node.parents[0]] += adjoint * d0,
                _ => {
                    self.adjoints[node.parents[0]] += adjoint * d0;
                    self.adjoints[node.parents[1]] += adjoint * d1;
                }
            }
        }
        Ok(self.adjoints[..self.input_count].to_vec())
    }

    /// Freezes the tape into a density and gradient evaluator.
    pub fn compile(self) -> Result<CompiledTape, AdError> {
        if self.output.is_none() {
            return Err(AdError::NoOutput);
        }
        Ok(CompiledTape {
            tape: RefCell::new(self),
        })
    }
}

impl fmt::Display for Tape {
    /// One line per node: `idx op parents primal`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, node) in self.nodes.iter().enumerate() {
            let op = match node.op {
                Op::Input => "input".to_string(),
                Op::Const(v) => format!("const({v})"),
                Op::Unary(u) => u.to_string(),
                Op::Binary(b) => b.to_string(),
            };
            let parents: Vec<String> = node.parents[..node.arity()]
                .iter()
                .map(|p| p.to_string())
                .collect();
            writeln!(f, "{i} {op} [{}] {}", parents.join(","), self.primals[i])?;
        }
        Ok(())
    }
}

/// A tape closed over by `density` and `gradient`. Evaluation reuses the
/// tape's buffers, so each thread needs its own clone.
#[derive(Debug, Clone)]
pub struct CompiledTape {
    tape: RefCell<Tape>,
}

impl CompiledTape {
    pub fn dim(&self) -> usize {
        self.tape.borrow().input_count()
    }

    pub fn density(&self, x: &[f64]) -> Result<f64, AdError> {
        self.tape.borrow_mut().forward_eval(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, AdError> {
        Ok(self.density_and_gradient(x)?.1)
    }

    pub fn density_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>), AdError> {
        let mut tape = self.tape.borrow_mut();
        let value = tape.forward_eval(x)?;
        let grad = tape.backward()?;
        Ok((value, grad))
    }

    pub fn stats(&self) -> SweepStats {
        self.tape.borrow().stats()
    }

    /// Nodes on the underlying tape.
    pub fn len(&self) -> usize {
        self.tape.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
