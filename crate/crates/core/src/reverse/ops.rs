use std::fmt;

use crate::special;

/// Single-argument primitive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnaryOp {
    Neg,
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
    Powi(i32),
    LnGamma,
    Logistic,
    Softplus,
}

/// Two-argument primitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    /// `a^b` for `a > 0`.
    Pow,
    /// `ln(e^a + e^b)`.
    LogAddExp,
}

/// Argument outside the domain of a primitive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainViolation {
    pub op: &'static str,
    pub value: f64,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "log",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Powi(_) => "powi",
            UnaryOp::LnGamma => "ln_gamma",
            UnaryOp::Logistic => "logistic",
            UnaryOp::Softplus => "softplus",
        }
    }

    /// Value and derivative at `x`.
    pub fn apply(self, x: f64) -> Result<(f64, f64), DomainViolation> {
        let violation = DomainViolation {
            op: self.name(),
            value: x,
        };
        Ok(match self {
            UnaryOp::Neg => (-x, -1.0),
            UnaryOp::Exp => {
                let e = x.exp();
                (e, e)
            }
            UnaryOp::Ln => {
                if x.is_nan() || x <= 0.0 {
                    return Err(violation);
                }
                (x.ln(), 1.0 / x)
            }
            UnaryOp::Sin => (x.sin(), x.cos()),
            UnaryOp::Cos => (x.cos(), -x.sin()),
            UnaryOp::Sqrt => {
                if x.is_nan() || x <= 0.0 {
                    return Err(violation);
                }
                let r = x.sqrt();
                (r, 0.5 / r)
            }
            UnaryOp::Powi(k) => {
                if k < 0 && x == 0.0 {
                    return Err(violation);
                }
                (x.powi(k), k as f64 * x.powi(k - 1))
            }
            UnaryOp::LnGamma => {
                if x.is_nan() || x <= 0.0 {
                    return Err(violation);
                }
                (special::ln_gamma(x), special::digamma(x))
            }
            UnaryOp::Logistic => {
                let s = special::logistic(x);
                (s, s * (1.0 - s))
            }
            UnaryOp::Softplus => (special::softplus(x), special::logistic(x)),
        })
    }
}

impl BinaryOp {
    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Add => "add",
            BinaryOp::Sub => "sub",
            BinaryOp::Mul => "mul",
            BinaryOp::Div => "div",
            BinaryOp::Pow => "pow",
            BinaryOp::LogAddExp => "log_add_exp",
        }
    }

    /// Value and the two partial derivatives at `(a, b)`.
    pub fn apply(self, a: f64, b: f64) -> Result<(f64, f64, f64), DomainViolation> {
        Ok(match self {
            BinaryOp::Add => (a + b, 1.0, 1.0),
            BinaryOp::Sub => (a - b, 1.0, -1.0),
            BinaryOp::Mul => (a * b, b, a),
            BinaryOp::Div => {
                if b == 0.0 {
                    return Err(DomainViolation {
                        op: "div",
                        value: b,
                    });
                }
                let q = a / b;
                (q, 1.0 / b, -q / b)
            }
            BinaryOp::Pow => {
                if a.is_nan() || a <= 0.0 {
                    return Err(DomainViolation {
                        op: "pow",
                        value: a,
                    });
                }
                let v = a.powf(b);
                (v, b * a.powf(b - 1.0), v * a.ln())
            }
            BinaryOp::LogAddExp => {
                let r = special::log_add_exp(a, b);
                if r == f64::NEG_INFINITY {
                    (r, 0.5, 0.5)
                } else {
                    (r, (a - r).exp(), (b - r).exp())
                }
            }
        })
    }
}

impl fmt::Display for UnaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnaryOp::Powi(k) => write!(f, "powi({k})"),
            other => f.write_str(other.name()),
        }
    }
}

impl fmt::Display for BinaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
