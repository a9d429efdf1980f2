use std::f64::consts::PI;

use super::sampling;
use super::{finite_param, positive_param, Continuous, DistError, Env, Support};
use crate::reverse::Expr;
use crate::rng::Rand;

/// Normal with mean `mu` and standard deviation `sigma`.
#[derive(Debug, Clone)]
pub struct Normal {
    mu: Expr,
    sigma: Expr,
    // -ln σ - ½ ln 2π, shared by every observation.
    log_norm: Expr,
    neg_half: Expr,
}

impl Normal {
    pub fn new(mu: impl Into<Expr>, sigma: impl Into<Expr>) -> Self {
        let sigma = sigma.into();
        let log_norm = -sigma.ln() - 0.5 * (2.0 * PI).ln();
        Normal {
            mu: mu.into(),
            sigma,
            log_norm,
            neg_half: Expr::constant(-0.5),
        }
    }

    pub fn standard() -> Self {
        Normal::new(0.0, 1.0)
    }

    pub fn mu(&self) -> &Expr {
        &self.mu
    }

    pub fn sigma(&self) -> &Expr {
        &self.sigma
    }
}

impl Continuous for Normal {
    fn name(&self) -> &'static str {
        "Normal"
    }

    fn log_pdf(&self, y: &Expr) -> Expr {
        let z = (y - &self.mu) / &self.sigma;
        &self.log_norm + &self.neg_half * z.powi(2)
    }

    fn support(&self) -> Support {
        Support::Unbounded
    }

    fn sampler_with(&self, env: &Env) -> Result<Rand<f64>, DistError> {
        let mu = finite_param("Normal", "mu", &self.mu, env)?;
        let sigma = positive_param("Normal", "sigma", &self.sigma, env)?;
        Ok(Rand::new(move |s| sampling::normal(s, mu, sigma)))
    }
}

/// Exponential with the given rate (mean `1 / rate`).
#[derive(Debug, Clone)]
pub struct Exponential {
    rate: Expr,
    log_rate: Expr,
}

impl Exponential {
    pub fn new(rate: impl Into<Expr>) -> Self {
        let rate = rate.into();
        Exponential {
            log_rate: rate.ln(),
            rate,
        }
    }
}

impl Continuous for Exponential {
    fn name(&self) -> &'static str {
        "Exponential"
    }

    fn log_pdf(&self, y: &Expr) -> Expr {
        &self.log_rate - &self.rate * y
    }

    fn support(&self) -> Support {
        Support::Positive
    }

    fn sampler_with(&self, env: &Env) -> Result<Rand<f64>, DistError> {
        let rate = positive_param("Exponential", "rate", &self.rate, env)?;
        Ok(Rand::new(move |s| sampling::exponential(s, rate)))
    }
}

/// Gamma with shape `k` and scale `θ` (mean `kθ`).
#[derive(Debug, Clone)]
pub struct Gamma {
    shape: Expr,
    scale: Expr,
    shape_minus_one: Expr,
    log_norm: Expr,
}

impl Gamma {
    pub fn new(shape: impl Into<Expr>, scale: impl Into<Expr>) -> Self {
        let shape = shape.into();
        let scale = scale.into();
        let log_norm = -shape.ln_gamma() - &shape * scale.ln();
        Gamma {
            shape_minus_one: &shape - 1.0,
            shape,
            scale,
            log_norm,
        }
    }
}

impl Continuous for Gamma {
    fn name(&self) -> &'static str {
        "Gamma"
    }

    fn log_pdf(&self, y: &Expr) -> Expr {
        &self.log_norm + &self.shape_minus_one * y.ln() - y / &self.scale
    }

    fn support(&self) -> Support {
        Support::Positive
    }

    fn sampler_with(&self, env: &Env) -> Result<Rand<f64>, DistError> {
        let shape = positive_param("Gamma", "shape", &self.shape, env)?;
        let scale = positive_param("Gamma", "scale", &self.scale, env)?;
        Ok(Rand::new(move |s| sampling::gamma(s, shape, scale)))
    }
}

#[derive(Debug, Clone)]
pub struct Beta {
    a: Expr,
    b: Expr,
    log_norm: Expr,
}

impl Beta {
    pub fn new(a: impl Into<Expr>, b: impl Into<Expr>) -> Self {
        let a = a.into();
        let b = b.into();
        let log_norm = (&a + &b).ln_gamma() - a.ln_gamma() - b.ln_gamma();
        Beta { a, b, log_norm }
    }
}

impl Continuous for Beta {
    fn name(&self) -> &'static str {
        "Beta"
    }

    fn log_pdf(&self, y: &Expr) -> Expr {
        &self.log_norm + (&self.a - 1.0) * y.ln() + (&self.b - 1.0) * (1.0 - y).ln()
    }

    fn support(&self) -> Support {
        Support::UnitInterval
    }

    fn sampler_with(&self, env: &Env) -> Result<Rand<f64>, DistError> {
        let a = positive_param("Beta", "a", &self.a, env)?;
        let b = positive_param("Beta", "b", &self.b, env)?;
        Ok(Rand::new(move |s| sampling::beta(s, a, b)))
    }
}

/// Uniform on the unit interval.
#[derive(Debug, Clone, Copy, Default)]
pub struct Uniform01;

impl Continuous for Uniform01 {
    fn name(&self) -> &'static str {
        "Uniform01"
    }

    fn log_pdf(&self, y: &Expr) -> Expr {
        match y.as_const() {
            Some(v) if !(0.0..=1.0).contains(&v) => Expr::constant(f64::NEG_INFINITY),
            _ => Expr::zero(),
        }
    }

    fn support(&self) -> Support {
        Support::UnitInterval
    }

    fn sampler_with(&self, _env: &Env) -> Result<Rand<f64>, DistError> {
        Ok(crate::rng::rand_double())
    }
}
