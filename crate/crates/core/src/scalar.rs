use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic shared by plain floats, dual numbers and graph expressions, so
/// one function body can be evaluated, forward-differentiated, or recorded
/// for reverse-mode differentiation.
pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn constant(v: f64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powi(&self, k: i32) -> Self;
    fn powf(&self, exponent: &Self) -> Self;
    fn ln_gamma(&self) -> Self;
    fn logistic(&self) -> Self;
    fn softplus(&self) -> Self;
    fn log_add_exp(&self, other: &Self) -> Self;
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powi(&self, k: i32) -> Self {
        f64::powi(*self, k)
    }
    fn powf(&self, exponent: &Self) -> Self {
        f64::powf(*self, *exponent)
    }
    fn ln_gamma(&self) -> Self {
        crate::special::ln_gamma(*self)
    }
    fn logistic(&self) -> Self {
        crate::special::logistic(*self)
    }
    fn softplus(&self) -> Self {
        crate::special::softplus(*self)
    }
    fn log_add_exp(&self, other: &Self) -> Self {
        crate::special::log_add_exp(*self, *other)
    }
}
