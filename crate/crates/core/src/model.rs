//! The model monad.
//!
//! A [`RandomVariable<A>`] is a value together with the log-density terms and
//! parameters its construction registered. `param` adds an unconstrained
//! input and its prior term, `fit` adds likelihood terms, and `flat_map`
//! sequences sub-models. [`RandomVariable::compile`] freezes the registry and
//! lowers the summed terms onto a tape.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::distributions::{Continuous, Discrete, DistError, Env, Gamma, Support};
use crate::reverse::{lower, AdError, CompiledTape, Expr, NodeId, ParamId, Tape};
use crate::rng::{next_double, GenState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{dist} is discrete and cannot be used as a model parameter")]
    DiscreteParameter { dist: &'static str },
    #[error("the model has no parameters to sample")]
    NoParameters,
    #[error("need at least two mixture weights, got {n}")]
    TooFewWeights { n: usize },
    #[error("gamma shape must be positive, got {0}")]
    InvalidShape(f64),
    #[error("outcome {value} at position {index} is not a valid count for {dist}")]
    NonIntegerOutcome {
        dist: &'static str,
        index: usize,
        value: f64,
    },
    #[error("predictor link returned {found} at position {index}, expected {expected}")]
    MixedFamilies {
        expected: &'static str,
        found: &'static str,
        index: usize,
    },
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Ad(#[from] AdError),
}

/// Either kind of distribution, for places that accept both.
#[derive(Debug, Clone)]
pub enum Dist {
    Continuous(Arc<dyn Continuous>),
    Discrete(Arc<dyn Discrete>),
}

impl Dist {
    pub fn continuous(d: impl Continuous + 'static) -> Self {
        Dist::Continuous(Arc::new(d))
    }

    pub fn discrete(d: impl Discrete + 'static) -> Self {
        Dist::Discrete(Arc::new(d))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Dist::Continuous(d) => d.name(),
            Dist::Discrete(d) => d.name(),
        }
    }

    /// Log-density of one outcome. Discrete outcomes must be whole numbers.
    fn log_density(&self, index: usize, y: f64) -> Result<Expr, ModelError> {
        match self {
            Dist::Continuous(d) => Ok(d.log_pdf(&Expr::constant(y))),
            Dist::Discrete(d) => {
                if y.fract() != 0.0 || !y.is_finite() || y.abs() > i64::MAX as f64 {
                    return Err(ModelError::NonIntegerOutcome {
                        dist: d.name(),
                        index,
                        value: y,
                    });
                }
                Ok(d.log_pmf(y as i64)?)
            }
        }
    }
}

/// One registered parameter.
#[derive(Debug, Clone)]
pub struct ParamInfo {
    pub id: ParamId,
    pub name: String,
    pub support: Support,
    /// Constrained value `t(u)` as handed to the model.
    pub value: Expr,
    pub prior: Arc<dyn Continuous>,
}

#[derive(Debug, Clone)]
pub struct RandomVariable<A> {
    value: A,
    terms: Vec<Expr>,
    params: Vec<ParamInfo>,
}

impl<A> RandomVariable<A> {
    pub fn pure(value: A) -> Self {
        RandomVariable {
            value,
            terms: Vec::new(),
            params: Vec::new(),
        }
    }

    pub fn value(&self) -> &A {
        &self.value
    }

    pub fn into_value(self) -> A {
        self.value
    }

    pub fn params(&self) -> &[ParamInfo] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    /// Sum of the accumulated terms in registration order.
    pub fn log_density(&self) -> Expr {
        Expr::sum(self.terms.iter().cloned())
    }

    pub fn map<B>(self, f: impl FnOnce(A) -> B) -> RandomVariable<B> {
        RandomVariable {
            value: f(self.value),
            terms: self.terms,
            params: self.params,
        }
    }

    pub fn flat_map<B>(self, f: impl FnOnce(A) -> RandomVariable<B>) -> RandomVariable<B> {
        let next = f(self.value);
        let mut terms = self.terms;
        terms.extend(next.terms);
        let mut params = self.params;
        params.extend(next.params);
        RandomVariable {
            value: next.value,
            terms,
            params,
        }
    }

    pub fn try_flat_map<B, E>(
        self,
        f: impl FnOnce(A) -> Result<RandomVariable<B>, E>,
    ) -> Result<RandomVariable<B>, E> {
        let next = f(self.value)?;
        Ok(RandomVariable {
            value: (),
            terms: self.terms,
            params: self.params,
        }
        .flat_map(|()| next))
    }

    pub fn zip<B>(self, other: RandomVariable<B>) -> RandomVariable<(A, B)> {
        self.flat_map(|a| other.map(|b| (a, b)))
    }

    /// Sequences models left to right into a model of their values.
    pub fn traverse(rvs: impl IntoIterator<Item = RandomVariable<A>>) -> RandomVariable<Vec<A>> {
        let mut out = RandomVariable::pure(Vec::new());
        for rv in rvs {
            out.terms.extend(rv.terms);
            out.params.extend(rv.params);
            out.value.push(rv.value);
        }
        out
    }

    /// Compiles with columns taken from the registry.
    pub fn compile(&self) -> Result<CompiledModel, ModelError> {
        self.compile_with(&[])
    }

    /// Compiles with named report columns. A named expression that is a
    /// parameter's constrained value renames that parameter's column; any
    /// other expression becomes a derived column after the parameters.
    pub fn compile_with(&self, named: &[(String, Expr)]) -> Result<CompiledModel, ModelError> {
        if self.params.is_empty() {
            return Err(ModelError::NoParameters);
        }
        let ids: Vec<ParamId> = self.params.iter().map(|p| p.id).collect();
        let (mut tape, roots) = lower(&ids, &[self.log_density()])?;
        tape.set_output(roots[0]);
        let density = tape.compile()?;

        let mut names: Vec<String> = self.params.iter().map(|p| p.name.clone()).collect();
        let mut derived_names = Vec::new();
        let mut derived_exprs = Vec::new();
        for (name, e) in named {
            match self.params.iter().position(|p| p.value.same_node(e)) {
                Some(i) => names[i] = name.clone(),
                None => {
                    derived_names.push(name.clone());
                    derived_exprs.push(e.clone());
                }
            }
        }
        let derived = if derived_exprs.is_empty() {
            None
        } else {
            let (tape, nodes) = lower(&ids, &derived_exprs)?;
            Some(Derived {
                tape: RefCell::new(tape),
                nodes,
            })
        };
        names.extend(derived_names);
        let columns = dedup_names(names);

        let params = self
            .params
            .iter()
            .map(|p| CompiledParam {
                id: p.id,
                support: p.support,
                prior: p.prior.clone(),
            })
            .collect();
        Ok(CompiledModel {
            density,
            params,
            columns,
            derived,
        })
    }
}

impl RandomVariable<Expr> {
    /// Registers a parameter with prior `d`. The value is the prior's support
    /// transform of a fresh unconstrained input.
    pub fn param(d: Arc<dyn Continuous>, name: &str) -> Self {
        let id = ParamId::fresh();
        let support = d.support();
        let (value, log_jac) = support.transform(&Expr::param(id));
        let mut term = d.log_pdf(&value);
        if support != Support::Unbounded {
            term = term + log_jac;
        }
        RandomVariable {
            value: value.clone(),
            terms: vec![term],
            params: vec![ParamInfo {
                id,
                name: name.to_string(),
                support,
                value,
                prior: d,
            }],
        }
    }

    /// `param` for either kind of distribution; discrete ones are rejected.
    pub fn param_dist(d: &Dist, name: &str) -> Result<RandomVariable<Expr>, ModelError> {
        match d {
            Dist::Continuous(c) => Ok(Self::param(c.clone(), name)),
            Dist::Discrete(k) => Err(ModelError::DiscreteParameter { dist: k.name() }),
        }
    }
}

impl RandomVariable<()> {
    /// Likelihood of `ys` under `d`, summed in order.
    pub fn fit_rv(d: &Dist, ys: &[f64]) -> Result<Self, ModelError> {
        if ys.is_empty() {
            return Err(DistError::EmptyObservations.into());
        }
        let terms = ys
            .iter()
            .enumerate()
            .map(|(i, &y)| d.log_density(i, y))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::observed(Expr::sum(terms)))
    }

    /// A model contributing one log-density term and no parameters.
    pub fn observed(term: Expr) -> Self {
        RandomVariable {
            value: (),
            terms: vec![term],
            params: Vec::new(),
        }
    }
}

impl RandomVariable<Vec<(String, Expr)>> {
    /// Compiles using the yielded names as report columns.
    pub fn compile_named(&self) -> Result<CompiledModel, ModelError> {
        self.compile_with(&self.value)
    }
}

/// Appends `_2`, `_3`, ... to repeated names.
fn dedup_names(names: Vec<String>) -> Vec<String> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::with_capacity(names.len());
    for name in &names {
        let count = seen.entry(name.clone()).or_insert(0);
        *count += 1;
        if *count == 1 {
            out.push(name.clone());
            continue;
        }
        let mut k = *count;
        let mut candidate = format!("{name}_{k}");
        while names.contains(&candidate) || out.contains(&candidate) {
            k += 1;
            candidate = format!("{name}_{k}");
        }
        *count = k;
        out.push(candidate);
    }
    out
}

/// `observe`-style helpers on concrete distributions.
pub trait ContinuousExt: Continuous + Sized + 'static {
    fn param(self, name: &str) -> RandomVariable<Expr> {
        RandomVariable::param(Arc::new(self), name)
    }

    fn fit(&self, ys: &[f64]) -> Result<RandomVariable<()>, ModelError> {
        Ok(RandomVariable::observed(self.log_likelihood(ys)?))
    }
}

impl<D: Continuous + 'static> ContinuousExt for D {}

pub trait DiscreteExt: Discrete + Sized + 'static {
    fn fit(&self, ks: &[i64]) -> Result<RandomVariable<()>, ModelError> {
        Ok(RandomVariable::observed(self.log_likelihood(ks)?))
    }
}

impl<D: Discrete + 'static> DiscreteExt for D {}

/// A regression likelihood: each covariate maps to an outcome distribution.
pub struct Predictor<X> {
    link: Box<dyn Fn(&X) -> Dist>,
}

impl<X> fmt::Debug for Predictor<X> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Predictor")
    }
}

impl<X> Predictor<X> {
    pub fn from_link(link: impl Fn(&X) -> Dist + 'static) -> Self {
        Predictor {
            link: Box::new(link),
        }
    }

    /// `Σ link(x_i).log_pdf(y_i)` in data order.
    pub fn fit(&self, data: &[(X, f64)]) -> Result<RandomVariable<()>, ModelError> {
        let mut family = None;
        let mut terms = Vec::with_capacity(data.len());
        for (i, (x, y)) in data.iter().enumerate() {
            let d = (self.link)(x);
            match family {
                None => family = Some(d.name()),
                Some(expected) if expected != d.name() => {
                    return Err(ModelError::MixedFamilies {
                        expected,
                        found: d.name(),
                        index: i,
                    })
                }
                Some(_) => {}
            }
            terms.push(d.log_density(i, *y)?);
        }
        if terms.is_empty() {
            return Err(DistError::EmptyObservations.into());
        }
        Ok(RandomVariable::observed(Expr::sum(terms)))
    }
}

/// `n` Gamma(shape, 1) parameters normalised by their sum, giving mixture
/// weights with a Dirichlet(shape, ..., shape) prior.
pub fn dirichlet_via_gammas(n: usize, shape: f64) -> Result<RandomVariable<Vec<Expr>>, ModelError> {
    if n < 2 {
        return Err(ModelError::TooFewWeights { n });
    }
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(ModelError::InvalidShape(shape));
    }
    let alphas = (0..n).map(|i| Gamma::new(shape, 1.0).param(&format!("alpha_{}", i + 1)));
    Ok(RandomVariable::traverse(alphas).map(|alphas| {
        let total = Expr::sum(alphas.iter().cloned());
        alphas.iter().map(|a| a / &total).collect()
    }))
}

#[derive(Debug, Clone)]
struct CompiledParam {
    id: ParamId,
    support: Support,
    prior: Arc<dyn Continuous>,
}

#[derive(Debug, Clone)]
struct Derived {
    tape: RefCell<Tape>,
    nodes: Vec<NodeId>,
}

/// Un-normalised log-posterior over the unconstrained parameter vector.
/// Evaluation reuses internal buffers, so give each thread its own clone.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    density: CompiledTape,
    params: Vec<CompiledParam>,
    columns: Vec<String>,
    derived: Option<Derived>,
}

impl CompiledModel {
    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn density(&self, u: &[f64]) -> Result<f64, AdError> {
        self.density.density(u)
    }

    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>, AdError> {
        self.density.gradient(u)
    }

    pub fn density_and_gradient(&self, u: &[f64]) -> Result<(f64, Vec<f64>), AdError> {
        self.density.density_and_gradient(u)
    }

    /// Report column names: parameters in registry order, then derived.
    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn supports(&self) -> Vec<Support> {
        self.params.iter().map(|p| p.support).collect()
    }

    /// Parameter values on their constrained supports, by column name.
    pub fn to_constrained(&self, u: &[f64]) -> Vec<(String, f64)> {
        self.columns
            .iter()
            .zip(&self.params)
            .zip(u)
            .map(|((name, p), &u)| (name.clone(), p.support.constrain(u)))
            .collect()
    }

    /// One output row: constrained parameters followed by derived values.
    pub fn draw_row(&self, u: &[f64]) -> Result<Vec<f64>, AdError> {
        if u.len() != self.dim() {
            return Err(AdError::LengthMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        let mut row: Vec<f64> = self
            .params
            .iter()
            .zip(u)
            .map(|(p, &u)| p.support.constrain(u))
            .collect();
        if let Some(derived) = &self.derived {
            let mut tape = derived.tape.borrow_mut();
            tape.evaluate_all(u)?;
            row.extend(derived.nodes.iter().map(|&n| tape.primal(n)));
        }
        Ok(row)
    }

    /// Unconstrained values keyed by parameter, for evaluating expressions
    /// over the model (posterior predictive samplers, for example).
    pub fn env(&self, u: &[f64]) -> Env {
        self.params.iter().zip(u).map(|(p, &u)| (p.id, u)).collect()
    }

    /// Ancestral draw from the priors, mapped to unconstrained space. Later
    /// priors may depend on earlier parameters.
    pub fn sample_prior(&self, state: GenState) -> (GenState, Result<Vec<f64>, ModelError>) {
        let mut env = Env::with_capacity(self.dim());
        let mut u = Vec::with_capacity(self.dim());
        let mut state = state;
        for p in &self.params {
            let sampler = match p.prior.sampler_with(&env) {
                Ok(s) => s,
                Err(e) => return (state, Err(e.into())),
            };
            let (next, x) = sampler.run(state);
            state = next;
            let value = p.support.unconstrain(x);
            env.insert(p.id, value);
            u.push(value);
        }
        (state, Ok(u))
    }

    /// Uniform draw from `[-radius, radius]^dim` in unconstrained space.
    pub fn sample_uniform(&self, state: GenState, radius: f64) -> (GenState, Vec<f64>) {
        let mut state = state;
        let mut u = Vec::with_capacity(self.dim());
        for _ in 0..self.dim() {
            let (next, x) = next_double(state);
            state = next;
            u.push(radius * (2.0 * x - 1.0));
        }
        (state, u)
    }

    /// Nodes on the density tape.
    pub fn tape_len(&self) -> usize {
        self.density.len()
    }
}
