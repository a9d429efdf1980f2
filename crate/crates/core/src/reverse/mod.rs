//! Reverse-mode automatic differentiation.
//!
//! Models are written against [`Expr`], an immutable scalar expression graph.
//! [`lower`] linearises a graph onto a [`Tape`], an index-addressed arena in
//! topological order. One forward sweep records primals and local partials;
//! one backward sweep accumulates adjoints for every input at once.

mod expr;
mod ops;
mod tape;

use thiserror::Error;

pub use expr::{lower, Expr, ParamId};
pub use ops::{BinaryOp, DomainViolation, UnaryOp};
pub use tape::{CompiledTape, NodeId, Op, SweepStats, Tape};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdError {
    #[error("expected {expected} input values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("domain error at node {node}: {op} of {value}")]
    Domain {
        node: usize,
        op: &'static str,
        value: f64,
    },
    #[error("backward called before a successful forward evaluation")]
    NotEvaluated,
    #[error("no output node designated")]
    NoOutput,
    #[error("inputs must be created before any other node")]
    InputAfterOperation,
    #[error("expression references a parameter that is not an input of the tape")]
    UnregisteredParameter,
    #[error("expression references a parameter with no bound value")]
    UnboundParameter,
}
