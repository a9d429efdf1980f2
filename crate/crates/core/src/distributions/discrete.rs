use super::sampling;
use super::{positive_param, Discrete, DistError, Env};
use crate::reverse::Expr;
use crate::rng::Rand;
use crate::special::{ln_choose, ln_gamma};

/// Number of successes in `n` trials with success probability `p`.
#[derive(Debug, Clone)]
pub struct Binomial {
    p: Expr,
    n: u64,
    log_p: Expr,
    log_q: Expr,
}

impl Binomial {
    pub fn new(p: impl Into<Expr>, n: u64) -> Self {
        let p = p.into();
        Binomial {
            log_p: p.ln(),
            log_q: (1.0 - &p).ln(),
            p,
            n,
        }
    }

    pub fn trials(&self) -> u64 {
        self.n
    }
}

impl Discrete for Binomial {
    fn name(&self) -> &'static str {
        "Binomial"
    }

    fn log_pmf(&self, k: i64) -> Result<Expr, DistError> {
        if k < 0 || k as u64 > self.n {
            return Err(DistError::OutsideSupport {
                dist: "Binomial",
                k,
            });
        }
        let k = k as u64;
        let mut terms = vec![Expr::constant(ln_choose(self.n, k))];
        if k > 0 {
            terms.push(k as f64 * &self.log_p);
        }
        if k < self.n {
            terms.push((self.n - k) as f64 * &self.log_q);
        }
        Ok(Expr::sum(terms))
    }

    fn sampler_with(&self, env: &Env) -> Result<Rand<i64>, DistError> {
        let p = self.p.eval_with(env)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(DistError::InvalidParameter {
                dist: "Binomial",
                name: "p",
                value: p,
            });
        }
        let n = self.n;
        Ok(Rand::new(move |s| sampling::binomial(s, p, n)))
    }
}

#[derive(Debug, Clone)]
pub struct Poisson {
    lambda: Expr,
    log_lambda: Expr,
}

impl Poisson {
    pub fn new(lambda: impl Into<Expr>) -> Self {
        let lambda = lambda.into();
        Poisson {
            log_lambda: lambda.ln(),
            lambda,
        }
    }
}

impl Discrete for Poisson {
    fn name(&self) -> &'static str {
        "Poisson"
    }

    fn log_pmf(&self, k: i64) -> Result<Expr, DistError> {
        if k < 0 {
            return Err(DistError::OutsideSupport { dist: "Poisson", k });
        }
        let base = -&self.lambda;
        if k == 0 {
            return Ok(base);
        }
        Ok(k as f64 * &self.log_lambda + base - ln_gamma(k as f64 + 1.0))
    }

    fn sampler_with(&self, env: &Env) -> Result<Rand<i64>, DistError> {
        let lambda = positive_param("Poisson", "lambda", &self.lambda, env)?;
        Ok(Rand::new(move |s| sampling::poisson(s, lambda)))
    }
}
