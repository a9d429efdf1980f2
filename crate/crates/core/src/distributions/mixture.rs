use std::sync::Arc;

use super::{Continuous, DistError, Env, Support};
use crate::reverse::Expr;
use crate::rng::{next_double, Rand};

/// Finite mixture `Σ_k θ_k p_k(y)`. Weights are expected to be normalised
/// already; the log-density is accumulated with `log_add_exp` so distant
/// observations do not underflow.
#[derive(Debug, Clone)]
pub struct Mixture {
    components: Vec<(Arc<dyn Continuous>, Expr)>,
    log_weights: Vec<Expr>,
    support: Support,
}

impl Mixture {
    pub fn new(components: Vec<(Arc<dyn Continuous>, Expr)>) -> Result<Self, DistError> {
        let support = components
            .first()
            .map(|(d, _)| d.support())
            .ok_or(DistError::EmptyMixture)?;
        if components.iter().any(|(d, _)| d.support() != support) {
            return Err(DistError::IncompatibleSupports);
        }
        let log_weights = components.iter().map(|(_, w)| w.ln()).collect();
        Ok(Mixture {
            components,
            log_weights,
            support,
        })
    }

    /// Convenience constructor from concrete components and weights.
    pub fn of<D, W>(components: impl IntoIterator<Item = (D, W)>) -> Result<Self, DistError>
    where
        D: Continuous + 'static,
        W: Into<Expr>,
    {
        Mixture::new(
            components
                .into_iter()
                .map(|(d, w)| (Arc::new(d) as Arc<dyn Continuous>, w.into()))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

impl Continuous for Mixture {
    fn name(&self) -> &'static str {
        "Mixture"
    }

    fn log_pdf(&self, y: &Expr) -> Expr {
        let mut terms = self
            .components
            .iter()
            .zip(&self.log_weights)
            .map(|((d, _), lw)| lw + d.log_pdf(y));
        let first = terms.next().expect("mixture has components");
        terms.fold(first, |acc, t| acc.log_add_exp(t))
    }

    fn support(&self) -> Support {
        self.support
    }

    fn sampler_with(&self, env: &Env) -> Result<Rand<f64>, DistError> {
        let mut cumulative = Vec::with_capacity(self.components.len());
        let mut samplers = Vec::with_capacity(self.components.len());
        let mut total = 0.0;
        for (d, w) in &self.components {
            let w = super::positive_param("Mixture", "weight", w, env)?;
            total += w;
            cumulative.push(total);
            samplers.push(d.sampler_with(env)?);
        }
        Ok(Rand::new(move |s| {
            let (s, u) = next_double(s);
            let target = u * total;
            let k = cumulative
                .iter()
                .position(|&c| target < c)
                .unwrap_or(cumulative.len() - 1);
            samplers[k].run(s)
        }))
    }
}
