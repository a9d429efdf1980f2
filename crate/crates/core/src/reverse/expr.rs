use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::ops::{BinaryOp, UnaryOp};
use super::tape::{NodeId, Tape};
use super::AdError;
use crate::scalar::Scalar;

/// Identity of a free input in an expression graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(u64);

static NEXT_PARAM: AtomicU64 = AtomicU64::new(0);

impl ParamId {
    pub fn fresh() -> Self {
        ParamId(NEXT_PARAM.fetch_add(1, Ordering::Relaxed))
    }
}

#[derive(Debug)]
enum Node {
    Const(f64),
    Param(ParamId),
    Unary(UnaryOp, Expr),
    Binary(BinaryOp, Expr, Expr),
    /// Left-to-right sum; lowered to a chain of binary adds.
    Sum(Vec<Expr>),
}

/// Handle to an immutable node of a scalar expression graph. Shared
/// subexpressions are shared nodes; lowering onto a [`Tape`] visits each
/// node once.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(v) => write!(f, "{v}"),
            Node::Param(id) => write!(f, "param#{}", id.0),
            Node::Unary(op, a) => write!(f, "{op}({a:?})"),
            Node::Binary(op, a, b) => write!(f, "{op}({a:?}, {b:?})"),
            Node::Sum(xs) => write!(f, "sum[{}]", xs.len()),
        }
    }
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr(Arc::new(Node::Const(v)))
    }

    /// A free input identified by `id`.
    pub fn param(id: ParamId) -> Expr {
        Expr(Arc::new(Node::Param(id)))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match &*self.0 {
            Node::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_param(&self) -> Option<ParamId> {
        match &*self.0 {
            Node::Param(id) => Some(*id),
            _ => None,
        }
    }

    /// True when both handles point at the same graph node.
    pub fn same_node(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        Expr(Arc::new(Node::Unary(op, a)))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr(Arc::new(Node::Binary(op, a, b)))
    }

    /// Sum in iteration order. The empty sum is the constant 0.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut terms: Vec<Expr> = terms.into_iter().collect();
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.pop().unwrap(),
            _ => Expr(Arc::new(Node::Sum(terms))),
        }
    }

    pub fn exp(&self) -> Expr {
        Expr::unary(UnaryOp::Exp, self.clone())
    }

    pub fn ln(&self) -> Expr {
        Expr::unary(UnaryOp::Ln, self.clone())
    }

    pub fn sin(&self) -> Expr {
        Expr::unary(UnaryOp::Sin, self.clone())
    }

    pub fn cos(&self) -> Expr {
        Expr::unary(UnaryOp::Cos, self.clone())
    }

    pub fn sqrt(&self) -> Expr {
        Expr::unary(UnaryOp::Sqrt, self.clone())
    }

    pub fn powi(&self, k: i32) -> Expr {
        Expr::unary(UnaryOp::Powi(k), self.clone())
    }

    pub fn powf(&self, exponent: impl Into<Expr>) -> Expr {
        Expr::binary(BinaryOp::Pow, self.clone(), exponent.into())
    }

    pub fn ln_gamma(&self) -> Expr {
        Expr::unary(UnaryOp::LnGamma, self.clone())
    }

    pub fn logistic(&self) -> Expr {
        Expr::unary(UnaryOp::Logistic, self.clone())
    }

    pub fn softplus(&self) -> Expr {
        Expr::unary(UnaryOp::Softplus, self.clone())
    }

    pub fn log_add_exp(&self, other: impl Into<Expr>) -> Expr {
        Expr::binary(BinaryOp::LogAddExp, self.clone(), other.into())
    }

    /// Free inputs reachable from this expression, in first-visit order.
    pub fn params(&self) -> Vec<ParamId> {
        collect_params(std::slice::from_ref(self))
    }

    /// Evaluates with the given input values. Every reachable parameter
    /// must be bound.
    pub fn eval_with(&self, env: &HashMap<ParamId, f64>) -> Result<f64, AdError> {
        let ids = self.params();
        let x = ids
            .iter()
            .map(|id| env.get(id).copied().ok_or(AdError::UnboundParameter))
            .collect::<Result<Vec<_>, _>>()?;
        let (mut tape, roots) = lower(&ids, std::slice::from_ref(self))?;
        tape.set_output(roots[0]);
        tape.forward_eval(&x)
    }

    /// Evaluates an expression with no free inputs.
    pub fn value(&self) -> Result<f64, AdError> {
        self.eval_with(&HashMap::new())
    }
}

fn for_each_child(node: &Node, mut f: impl FnMut(&Expr)) {
    match node {
        Node::Const(_) | Node::Param(_) => {}
        Node::Unary(_, a) => f(a),
        Node::Binary(_, a, b) => {
            f(a);
            f(b);
        }
        Node::Sum(xs) => xs.iter().for_each(f),
    }
}

fn collect_params(roots: &[Expr]) -> Vec<ParamId> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut stack: Vec<Expr> = roots.iter().rev().cloned().collect();
    while let Some(e) = stack.pop() {
        if !seen.insert(Arc::as_ptr(&e.0)) {
            continue;
        }
        if let Node::Param(id) = &*e.0 {
            out.push(*id);
        }
        let mut kids = Vec::new();
        for_each_child(&e.0, |c| kids.push(c.clone()));
        stack.extend(kids.into_iter().rev());
    }
    out
}

/// Lowers expression graphs onto a fresh tape whose input slots are `inputs`
/// in order. Returns the tape and the node of each root.
pub fn lower(inputs: &[ParamId], roots: &[Expr]) -> Result<(Tape, Vec<NodeId>), AdError> {
    let mut tape = Tape::new();
    let mut slots = HashMap::with_capacity(inputs.len());
    for id in inputs {
        let node = tape.input()?;
        slots.insert(*id, node);
    }
    let mut memo: HashMap<*const Node, NodeId> = HashMap::new();
    // Iterative post-order walk: deep sums must not exhaust the stack.
    let mut stack: Vec<(Expr, bool)> = roots.iter().rev().map(|r| (r.clone(), false)).collect();
    while let Some((e, expanded)) = stack.pop() {
        let key = Arc::as_ptr(&e.0);
        if memo.contains_key(&key) {
            continue;
        }
        if !expanded {
            stack.push((e.clone(), true));
            let mut kids = Vec::new();
            for_each_child(&e.0, |c| kids.push(c.clone()));
            for c in kids.into_iter().rev() {
                if !memo.contains_key(&Arc::as_ptr(&c.0)) {
                    stack.push((c, false));
                }
            }
            continue;
        }
        let get = |c: &Expr| memo[&Arc::as_ptr(&c.0)];
        let id = match &*e.0 {
            Node::Const(v) => tape.constant(*v),
            Node::Param(p) => *slots.get(p).ok_or(AdError::UnregisteredParameter)?,
            Node::Unary(op, a) => tape.unary(*op, get(a)),
            Node::Binary(op, a, b) => tape.binary(*op, get(a), get(b)),
            Node::Sum(xs) => {
                let mut acc = get(&xs[0]);
                for x in &xs[1..] {
                    acc = tape.add(acc, get(x));
                }
                acc
            }
        };
        memo.insert(key, id);
    }
    let nodes = roots.iter().map(|r| memo[&Arc::as_ptr(&r.0)]).collect();
    Ok((tape, nodes))
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::constant(v)
    }
}

impl From<&Expr> for Expr {
    fn from(e: &Expr) -> Self {
        e.clone()
    }
}

macro_rules! binary_ops {
    ($($trait:ident $method:ident $op:ident),*) => {$(
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary(BinaryOp::$op, self, rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary(BinaryOp::$op, self, rhs.clone())
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary(BinaryOp::$op, self.clone(), rhs)
            }
        }
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary(BinaryOp::$op, self.clone(), rhs.clone())
            }
        }
        impl $trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary(BinaryOp::$op, self, Expr::constant(rhs))
            }
        }
        impl $trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary(BinaryOp::$op, self.clone(), Expr::constant(rhs))
            }
        }
        impl $trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary(BinaryOp::$op, Expr::constant(self), rhs)
            }
        }
        impl $trait<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary(BinaryOp::$op, Expr::constant(self), rhs.clone())
            }
        }
    )*};
}

binary_ops!(Add add Add, Sub sub Sub, Mul mul Mul, Div div Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self.clone())
    }
}

impl Scalar for Expr {
    fn constant(v: f64) -> Self {
        Expr::constant(v)
    }
    fn exp(&self) -> Self {
        Expr::exp(self)
    }
    fn ln(&self) -> Self {
        Expr::ln(self)
    }
    fn sin(&self) -> Self {
        Expr::sin(self)
    }
    fn cos(&self) -> Self {
        Expr::cos(self)
    }
    fn sqrt(&self) -> Self {
        Expr::sqrt(self)
    }
    fn powi(&self, k: i32) -> Self {
        Expr::powi(self, k)
    }
    fn powf(&self, exponent: &Self) -> Self {
        Expr::powf(self, exponent)
    }
    fn ln_gamma(&self) -> Self {
        Expr::ln_gamma(self)
    }
    fn logistic(&self) -> Self {
        Expr::logistic(self)
    }
    fn softplus(&self) -> Self {
        Expr::softplus(self)
    }
    fn log_add_exp(&self, other: &Self) -> Self {
        Expr::log_add_exp(self, other)
    }
}
