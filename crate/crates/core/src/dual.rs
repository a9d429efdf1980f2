//! Forward-mode automatic differentiation with dual numbers `y + ε·d`, where
//! `ε² = 0`. Evaluating a function on `x + 1ε` yields `f(x) + f'(x)ε`.
//!
//! Gradients of functions of several inputs take one pass per input
//! ([`grad_forward`]); the reverse-mode engine is checked against this.

use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::Scalar;
use crate::special;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DualError {
    #[error("singularity in {op}: divisor has zero primal")]
    Singularity { op: &'static str },
    #[error("domain error in {function}: argument {value}")]
    Domain { function: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub real: f64,
    pub eps: f64,
}

impl Dual {
    pub fn new(real: f64, eps: f64) -> Self {
        Dual { real, eps }
    }

    pub fn constant(real: f64) -> Self {
        Dual { real, eps: 0.0 }
    }

    /// The independent variable: derivative coefficient 1.
    pub fn variable(real: f64) -> Self {
        Dual { real, eps: 1.0 }
    }

    /// Applies a primitive given its value and derivative at `self.real`
    /// (the chain rule `(f∘g)' = (f'∘g)·g'`).
    pub fn chain(self, f: impl FnOnce(f64) -> (f64, f64)) -> Dual {
        let (value, derivative) = f(self.real);
        Dual::new(value, derivative * self.eps)
    }

    pub fn sin(self) -> Dual {
        self.chain(|x| (x.sin(), x.cos()))
    }

    pub fn cos(self) -> Dual {
        self.chain(|x| (x.cos(), -x.sin()))
    }

    pub fn exp(self) -> Dual {
        self.chain(|x| {
            let e = x.exp();
            (e, e)
        })
    }

    pub fn ln(self) -> Dual {
        self.chain(|x| (x.ln(), 1.0 / x))
    }

    pub fn sqrt(self) -> Dual {
        self.chain(|x| {
            let r = x.sqrt();
            (r, 0.5 / r)
        })
    }

    /// Integer power by repeated multiplication, valid for any sign of the base.
    pub fn powi(self, k: i32) -> Dual {
        let mut result = Dual::constant(1.0);
        let mut base = self;
        let mut n = k.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            n >>= 1;
        }
        if k < 0 {
            Dual::constant(1.0) / result
        } else {
            result
        }
    }

    /// `self^exponent` for a positive base.
    pub fn powf(self, exponent: Dual) -> Dual {
        (exponent * self.ln()).exp()
    }

    pub fn ln_gamma(self) -> Dual {
        self.chain(|x| (special::ln_gamma(x), special::digamma(x)))
    }

    pub fn logistic(self) -> Dual {
        self.chain(|x| {
            let s = special::logistic(x);
            (s, s * (1.0 - s))
        })
    }

    pub fn softplus(self) -> Dual {
        self.chain(|x| (special::softplus(x), special::logistic(x)))
    }

    pub fn log_add_exp(self, other: Dual) -> Dual {
        let r = special::log_add_exp(self.real, other.real);
        let wa = (self.real - r).exp();
        let wb = (other.real - r).exp();
        Dual::new(r, wa * self.eps + wb * other.eps)
    }

    pub fn try_div(self, rhs: Dual) -> Result<Dual, DualError> {
        if rhs.real == 0.0 {
            return Err(DualError::Singularity { op: "div" });
        }
        Ok(self / rhs)
    }

    pub fn try_ln(self) -> Result<Dual, DualError> {
        if self.real <= 0.0 {
            return Err(DualError::Domain {
                function: "log",
                value: self.real,
            });
        }
        Ok(self.ln())
    }

    pub fn try_sqrt(self) -> Result<Dual, DualError> {
        if self.real <= 0.0 {
            return Err(DualError::Domain {
                function: "sqrt",
                value: self.real,
            });
        }
        Ok(self.sqrt())
    }

    pub fn try_powf(self, exponent: Dual) -> Result<Dual, DualError> {
        if self.real <= 0.0 {
            return Err(DualError::Domain {
                function: "pow",
                value: self.real,
            });
        }
        Ok(self.powf(exponent))
    }

    pub fn try_ln_gamma(self) -> Result<Dual, DualError> {
        if self.real <= 0.0 {
            return Err(DualError::Domain {
                function: "ln_gamma",
                value: self.real,
            });
        }
        Ok(self.ln_gamma())
    }
}

impl From<f64> for Dual {
    fn from(v: f64) -> Self {
        Dual::constant(v)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.real + rhs.real, self.eps + rhs.eps)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.real - rhs.real, self.eps - rhs.eps)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(
            self.real * rhs.real,
            self.eps * rhs.real + rhs.eps * self.real,
        )
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        Dual::new(
            self.real / rhs.real,
            (self.eps * rhs.real - rhs.eps * self.real) / (rhs.real * rhs.real),
        )
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.real, -self.eps)
    }
}

macro_rules! scalar_rhs {
    ($($trait:ident $method:ident),*) => {$(
        impl $trait<f64> for Dual {
            type Output = Dual;
            fn $method(self, rhs: f64) -> Dual {
                $trait::$method(self, Dual::constant(rhs))
            }
        }
        impl $trait<Dual> for f64 {
            type Output = Dual;
            fn $method(self, rhs: Dual) -> Dual {
                $trait::$method(Dual::constant(self), rhs)
            }
        }
    )*};
}

scalar_rhs!(Add add, Sub sub, Mul mul, Div div);

impl Scalar for Dual {
    fn constant(v: f64) -> Self {
        Dual::constant(v)
    }
    fn exp(&self) -> Self {
        Dual::exp(*self)
    }
    fn ln(&self) -> Self {
        Dual::ln(*self)
    }
    fn sin(&self) -> Self {
        Dual::sin(*self)
    }
    fn cos(&self) -> Self {
        Dual::cos(*self)
    }
    fn sqrt(&self) -> Self {
        Dual::sqrt(*self)
    }
    fn powi(&self, k: i32) -> Self {
        Dual::powi(*self, k)
    }
    fn powf(&self, exponent: &Self) -> Self {
        Dual::powf(*self, *exponent)
    }
    fn ln_gamma(&self) -> Self {
        Dual::ln_gamma(*self)
    }
    fn logistic(&self) -> Self {
        Dual::logistic(*self)
    }
    fn softplus(&self) -> Self {
        Dual::softplus(*self)
    }
    fn log_add_exp(&self, other: &Self) -> Self {
        Dual::log_add_exp(*self, *other)
    }
}

/// Value and gradient of `f` at `x`, one forward pass per coordinate.
pub fn grad_forward<F>(f: F, x: &[f64]) -> Result<(f64, Vec<f64>), DualError>
where
    F: Fn(&[Dual]) -> Result<Dual, DualError>,
{
    if x.is_empty() {
        return Ok((f(&[])?.real, Vec::new()));
    }
    let mut args: Vec<Dual> = x.iter().copied().map(Dual::constant).collect();
    let mut value = 0.0;
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        args[i].eps = 1.0;
        let out = f(&args)?;
        args[i].eps = 0.0;
        value = out.real;
        grad.push(out.eps);
    }
    Ok((value, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn central_difference(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn quadratic_worked_example() {
        let x = Dual::variable(5.0);
        assert_eq!(x * x + 2.0 * x + 5.0, Dual::new(40.0, 12.0));
        assert_eq!(x.powi(2) + 2.0 * x + 5.0, Dual::new(40.0, 12.0));
    }

    #[test]
    fn constant_factor() {
        let c = 3.5;
        let out = Dual::constant(c) * Dual::variable(-2.0);
        assert_eq!(out, Dual::new(-7.0, c));
    }

    #[test]
    fn reciprocal() {
        let out = Dual::constant(1.0).try_div(Dual::variable(2.0)).unwrap();
        let fd = central_difference(|x| 1.0 / x, 2.0);
        assert_eq!(out.real, 0.5);
        assert_eq!(out.eps, -0.25);
        assert_relative_eq!(out.eps, fd, max_relative = 1e-8);
    }

    #[test]
    fn special_function_seeds() {
        assert_eq!(Dual::variable(0.0).sin(), Dual::new(0.0, 1.0));
        assert_eq!(Dual::variable(1.0).ln(), Dual::new(0.0, 1.0));
        let e = std::f64::consts::E;
        assert_eq!(Dual::variable(1.0).exp(), Dual::new(e, e));
    }

    #[test]
    fn domain_errors_name_the_function() {
        assert_eq!(
            Dual::variable(-1.0).try_ln(),
            Err(DualError::Domain {
                function: "log",
                value: -1.0
            })
        );
        assert!(matches!(
            Dual::variable(1.0).try_div(Dual::constant(0.0)),
            Err(DualError::Singularity { op: "div" })
        ));
        assert!(matches!(
            Dual::variable(-2.0).try_powf(Dual::constant(0.5)),
            Err(DualError::Domain {
                function: "pow",
                ..
            })
        ));
    }

    #[test]
    fn powi_negative_base() {
        let out = Dual::variable(-2.0).powi(3);
        assert_eq!(out, Dual::new(-8.0, 12.0));
        let inv = Dual::variable(-2.0).powi(-2);
        assert_relative_eq!(inv.real, 0.25);
        assert_relative_eq!(inv.eps, 0.25);
    }

    #[test]
    fn two_input_gradient() {
        let f = |x: &[Dual]| Ok(x[0] * x[1] + x[0] * x[0]);
        let (value, grad) = grad_forward(f, &[1.0, 2.0]).unwrap();
        assert_eq!(value, 3.0);
        assert_eq!(grad[0], 4.0);
        let fd = central_difference(|x2| 1.0 * x2 + 1.0, 2.0);
        assert_relative_eq!(grad[1], fd, max_relative = 1e-8);
        assert_eq!(grad[1], 1.0);
    }

    #[test]
    fn constant_function_has_zero_gradient() {
        let (value, grad) = grad_forward(|_| Ok(Dual::constant(4.2)), &[1.0, -3.0, 9.0]).unwrap();
        assert_eq!(value, 4.2);
        assert_eq!(grad, vec![0.0; 3]);
    }

    #[test]
    fn grad_forward_propagates_errors() {
        let f = |x: &[Dual]| x[0].try_ln();
        assert!(grad_forward(f, &[-1.0]).is_err());
    }

    #[test]
    fn chain_flat_map_form() {
        // sin written through `chain` equals the direct primitive.
        let x = Dual::new(0.7, 2.0);
        assert_eq!(x.chain(|r| (r.sin(), r.cos())), x.sin());
    }
}
