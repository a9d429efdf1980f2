//! Synthetic datasets for the example models.

use std::collections::BTreeMap;

use funprob::distributions::{Binomial, Poisson};
use funprob::rng::{next_double, next_std_normal};
use funprob::{Discrete, GenState};

use crate::data::format_real;
use crate::models::ModelKind;
use crate::CliError;

/// A simulated dataset ready to write.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Parameter names and defaults per model.
pub fn default_params(kind: ModelKind) -> Vec<(&'static str, f64)> {
    match kind {
        ModelKind::Lm => vec![("beta0", 4.0), ("beta1", -1.5), ("sigma", 0.5)],
        ModelKind::LmPoisson => vec![("beta0", 1.0), ("beta1", 0.5)],
        ModelKind::Mixture => vec![
            ("mu_1", -2.0),
            ("mu_2", 1.0),
            ("mu_3", 3.0),
            ("theta_1", 0.3),
            ("theta_2", 0.2),
            ("theta_3", 0.5),
            ("sigma", 0.5),
        ],
        ModelKind::Randeffects => vec![
            ("classes", 8.0),
            ("alpha_c", 4.0),
            ("sigma_a", 1.0),
            ("beta_c", -1.5),
            ("sigma_b", 0.5),
            ("sigma", 0.5),
        ],
        ModelKind::Coin => vec![("p", 0.5), ("trials", 10.0)],
    }
}

/// Rows by default; for `randeffects` this is the count per class.
pub fn default_n(kind: ModelKind) -> usize {
    match kind {
        ModelKind::Lm | ModelKind::LmPoisson => 1000,
        ModelKind::Mixture => 10_000,
        ModelKind::Randeffects => 20,
        ModelKind::Coin => 1,
    }
}

/// Parses `name=value,name=value` overrides.
pub fn parse_params(text: &str) -> Result<Vec<(String, f64)>, CliError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("expected name=value, got {pair:?}")))?;
            let value = v.trim().parse::<f64>().map_err(|_| {
                CliError::Usage(format!("parameter {}: {v:?} is not a number", k.trim()))
            })?;
            Ok((k.trim().to_string(), value))
        })
        .collect()
}

struct Params(BTreeMap<&'static str, f64>);

impl Params {
    fn resolve(kind: ModelKind, overrides: &[(String, f64)]) -> Result<Self, CliError> {
        let mut map: BTreeMap<&'static str, f64> = default_params(kind).into_iter().collect();
        for (k, v) in overrides {
            let slot = map
                .iter_mut()
                .find(|(name, _)| **name == k.as_str())
                .ok_or_else(|| {
                    let known: Vec<_> = default_params(kind).iter().map(|(n, _)| *n).collect();
                    CliError::Usage(format!(
                        "unknown parameter {k} for {kind}; expected one of {}",
                        known.join(", ")
                    ))
                })?;
            *slot.1 = *v;
        }
        Ok(Params(map))
    }

    fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    fn positive(&self, name: &str) -> Result<f64, CliError> {
        let v = self.get(name);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Usage(format!("{name} must be positive, got {v}")))
        }
    }

    fn finite(&self, name: &str) -> Result<f64, CliError> {
        let v = self.get(name);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Usage(format!("{name} must be finite, got {v}")))
        }
    }

    fn count(&self, name: &str, min: u64) -> Result<u64, CliError> {
        let v = self.get(name);
        if v.fract() == 0.0 && v >= min as f64 && v < u32::MAX as f64 {
            Ok(v as u64)
        } else {
            Err(CliError::Usage(format!(
                "{name} must be an integer >= {min}, got {v}"
            )))
        }
    }
}

fn normal(state: GenState, mean: f64, sd: f64) -> (GenState, f64) {
    let (state, z) = next_std_normal(state);
    (state, mean + sd * z)
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn rng_error(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Deterministic in `seed`. Covariates are standard normal.
pub fn simulate(
    kind: ModelKind,
    overrides: &[(String, f64)],
    n: usize,
    seed: u64,
) -> Result<Simulated, CliError> {
    if n == 0 {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    let p = Params::resolve(kind, overrides)?;
    let mut s = GenState::new(seed);
    let mut rows = Vec::with_capacity(n);
    let header = match kind {
        ModelKind::Lm => {
            let (b0, b1, sigma) = (p.finite("beta0")?, p.finite("beta1")?, p.positive("sigma")?);
            for _ in 0..n {
                let (next, x) = normal(s, 0.0, 1.0);
                let (next, y) = normal(next, b0 + b1 * x, sigma);
                s = next;
                rows.push(vec![format_real(x), format_real(y)]);
            }
            header(&["x", "y"])
        }
        ModelKind::LmPoisson => {
            let (b0, b1) = (p.finite("beta0")?, p.finite("beta1")?);
            for _ in 0..n {
                let (next, x) = normal(s, 0.0, 1.0);
                let sampler = Poisson::new((b0 + b1 * x).exp())
                    .sampler()
                    .map_err(rng_error)?;
                let (next, y) = sampler.run(next);
                s = next;
                rows.push(vec![format_real(x), y.to_string()]);
            }
            header(&["x", "y"])
        }
        ModelKind::Mixture => {
            let mus = [p.finite("mu_1")?, p.finite("mu_2")?, p.finite("mu_3")?];
            let thetas = [p.get("theta_1"), p.get("theta_2"), p.get("theta_3")];
            let sigma = p.positive("sigma")?;
            if thetas.iter().any(|t| t.is_nan() || *t < 0.0)
                || (thetas.iter().sum::<f64>() - 1.0).abs() > 1e-9
            {
                return Err(CliError::Usage(format!(
                    "mixture proportions {thetas:?} must be non-negative and sum to 1"
                )));
            }
            for _ in 0..n {
                let (next, u) = next_double(s);
                let mut acc = 0.0;
                let k = thetas
                    .iter()
                    .position(|t| {
                        acc += t;
                        u < acc
                    })
                    .unwrap_or(thetas.len() - 1);
                let (next, y) = normal(next, mus[k], sigma);
                s = next;
                rows.push(vec![format_real(y), (k + 1).to_string()]);
            }
            header(&["y", "component"])
        }
        ModelKind::Randeffects => {
            let classes = p.count("classes", 1)?;
            let (alpha_c, beta_c) = (p.finite("alpha_c")?, p.finite("beta_c")?);
            let (sigma_a, sigma_b, sigma) = (
                p.positive("sigma_a")?,
                p.positive("sigma_b")?,
                p.positive("sigma")?,
            );
            for id in 0..classes {
                let (next, a) = normal(s, alpha_c, sigma_a);
                let (next, b) = normal(next, beta_c, sigma_b);
                s = next;
                for _ in 0..n {
                    let (next, x) = normal(s, 0.0, 1.0);
                    let (next, y) = normal(next, a + b * x, sigma);
                    s = next;
                    rows.push(vec![id.to_string(), format_real(x), format_real(y)]);
                }
            }
            header(&["id", "x", "y"])
        }
        ModelKind::Coin => {
            let prob = p.get("p");
            if !(0.0..=1.0).contains(&prob) {
                return Err(CliError::Usage(format!("p must lie in [0, 1], got {prob}")));
            }
            let trials = p.count("trials", 0)?;
            let sampler = Binomial::new(prob, trials).sampler().map_err(rng_error)?;
            for _ in 0..n {
                let (next, k) = sampler.run(s);
                s = next;
                rows.push(vec![trials.to_string(), k.to_string()]);
            }
            header(&["trials", "successes"])
        }
    };
    Ok(Simulated { header, rows })
}
