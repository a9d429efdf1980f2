//! Probability distributions with graph-valued log-densities.
//!
//! Densities are built as [`Expr`] graphs so that likelihood terms take part
//! in reverse-mode differentiation. Parameters may be constants or
//! expressions over model parameters; samplers evaluate the parameters under
//! an environment of parameter values and return a [`Rand`].

mod continuous;
mod discrete;
mod mixture;
pub mod sampling;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::reverse::{AdError, Expr, ParamId};
use crate::rng::Rand;
use crate::special;

pub use continuous::{Beta, Exponential, Gamma, Normal, Uniform01};
pub use discrete::{Binomial, Poisson};
pub use mixture::Mixture;

/// Parameter values keyed by input, used to evaluate distribution parameters.
pub type Env = HashMap<ParamId, f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("cannot fit an empty collection of observations")]
    EmptyObservations,
    #[error("observation {k} is outside the support of {dist}")]
    OutsideSupport { dist: &'static str, k: i64 },
    #[error("invalid parameter {name} = {value} for {dist}")]
    InvalidParameter {
        dist: &'static str,
        name: &'static str,
        value: f64,
    },
    #[error("a mixture needs at least one component")]
    EmptyMixture,
    #[error("mixture components must share one support")]
    IncompatibleSupports,
    #[error(transparent)]
    Eval(#[from] AdError),
}

/// Support of a continuous distribution, which fixes the bijection from the
/// real line used when the distribution is a model parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    Unbounded,
    Positive,
    UnitInterval,
}

impl Support {
    /// Constrained value `t(u)` and `log |t'(u)|` as graph expressions.
    pub fn transform(self, u: &Expr) -> (Expr, Expr) {
        match self {
            Support::Unbounded => (u.clone(), Expr::zero()),
            Support::Positive => (u.exp(), u.clone()),
            Support::UnitInterval => {
                let log_jac = -(-u).softplus() - u.softplus();
                (u.logistic(), log_jac)
            }
        }
    }

    pub fn constrain(self, u: f64) -> f64 {
        match self {
            Support::Unbounded => u,
            Support::Positive => u.exp(),
            Support::UnitInterval => special::logistic(u),
        }
    }

    pub fn unconstrain(self, x: f64) -> f64 {
        match self {
            Support::Unbounded => x,
            Support::Positive => x.ln(),
            Support::UnitInterval => x.ln() - (1.0 - x).ln(),
        }
    }

    pub fn log_jacobian(self, u: f64) -> f64 {
        match self {
            Support::Unbounded => 0.0,
            Support::Positive => u,
            Support::UnitInterval => -special::softplus(-u) - special::softplus(u),
        }
    }

    pub fn contains(self, x: f64) -> bool {
        match self {
            Support::Unbounded => x.is_finite(),
            Support::Positive => x > 0.0 && x.is_finite(),
            Support::UnitInterval => x > 0.0 && x < 1.0,
        }
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Support::Unbounded => "unbounded",
            Support::Positive => "positive",
            Support::UnitInterval => "unit_interval",
        })
    }
}

/// A continuous distribution over the reals.
pub trait Continuous: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn log_pdf(&self, y: &Expr) -> Expr;

    fn support(&self) -> Support;

    /// Sampler with parameter expressions evaluated under `env`.
    fn sampler_with(&self, env: &Env) -> Result<Rand<f64>, DistError>;

    /// Sampler for a distribution whose parameters are constants.
    fn sampler(&self) -> Result<Rand<f64>, DistError> {
        self.sampler_with(&Env::new())
    }

    /// Log-density at a number, through the same graph code path.
    fn log_pdf_at(&self, y: f64) -> Result<f64, DistError> {
        Ok(self.log_pdf(&Expr::constant(y)).value()?)
    }

    /// `Σ log_pdf(y_i)` in collection order.
    fn log_likelihood(&self, ys: &[f64]) -> Result<Expr, DistError> {
        if ys.is_empty() {
            return Err(DistError::EmptyObservations);
        }
        Ok(Expr::sum(
            ys.iter().map(|&y| self.log_pdf(&Expr::constant(y))),
        ))
    }
}

/// A distribution over the integers. Such distributions can be observed but
/// not used as parameters.
pub trait Discrete: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn log_pmf(&self, k: i64) -> Result<Expr, DistError>;

    fn sampler_with(&self, env: &Env) -> Result<Rand<i64>, DistError>;

    fn sampler(&self) -> Result<Rand<i64>, DistError> {
        self.sampler_with(&Env::new())
    }

    fn log_pmf_at(&self, k: i64) -> Result<f64, DistError> {
        Ok(self.log_pmf(k)?.value()?)
    }

    fn log_likelihood(&self, ks: &[i64]) -> Result<Expr, DistError> {
        if ks.is_empty() {
            return Err(DistError::EmptyObservations);
        }
        let terms = ks
            .iter()
            .map(|&k| self.log_pmf(k))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Expr::sum(terms))
    }
}

/// Evaluates a parameter and checks it is strictly positive.
pub(crate) fn positive_param(
    dist: &'static str,
    name: &'static str,
    e: &Expr,
    env: &Env,
) -> Result<f64, DistError> {
    let value = e.eval_with(env)?;
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(DistError::InvalidParameter { dist, name, value })
    }
}

pub(crate) fn finite_param(
    dist: &'static str,
    name: &'static str,
    e: &Expr,
    env: &Env,
) -> Result<f64, DistError> {
    let value = e.eval_with(env)?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(DistError::InvalidParameter { dist, name, value })
    }
}
