//! The example models and the data layout each one reads.

use std::collections::BTreeMap;
use std::fmt;

use funprob::distributions::{Beta, Binomial, Exponential, Gamma, Normal, Poisson};
use funprob::hmc::InitStrategy;
use funprob::model::{dirichlet_via_gammas, ContinuousExt, Dist, ModelError, Predictor};
use funprob::{Expr, RandomVariable};

use crate::data::Table;
use crate::CliError;

/// A model whose value is the list of reported quantities.
pub type NamedModel = RandomVariable<Vec<(String, Expr)>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelKind {
    /// Normal linear regression on columns x, y.
    Lm,
    /// Poisson regression with log link on columns x, y (counts).
    #[value(name = "lm_poisson")]
    LmPoisson,
    /// Three-component Normal mixture on column y.
    Mixture,
    /// Random intercepts and slopes per class on columns id, x, y.
    Randeffects,
    /// Beta(3, 3) prior on p with Binomial outcomes on columns trials, successes.
    Coin,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Lm => "lm",
            ModelKind::LmPoisson => "lm_poisson",
            ModelKind::Mixture => "mixture",
            ModelKind::Randeffects => "randeffects",
            ModelKind::Coin => "coin",
        })
    }
}

impl ModelKind {
    /// Prior draws are the default start. The random-effects scale priors
    /// put almost all their mass at machine zero or infinity, so that model
    /// starts uniformly in unconstrained space instead.
    pub fn default_init(self) -> InitStrategy {
        match self {
            ModelKind::Randeffects => InitStrategy::Uniform { radius: 2.0 },
            _ => InitStrategy::Prior,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub id: i64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Lm(Vec<(f64, f64)>),
    LmPoisson(Vec<(f64, f64)>),
    Mixture(Vec<f64>),
    Randeffects(Vec<Observation>),
    Coin(Vec<(u64, f64)>),
}

pub fn load(kind: ModelKind, table: &Table) -> Result<Dataset, CliError> {
    Ok(match kind {
        ModelKind::Lm => Dataset::Lm(pairs(table.select(&["x", "y"])?)),
        ModelKind::LmPoisson => {
            let rows = table.select(&["x", "y"])?;
            for (i, r) in rows.iter().enumerate() {
                table.integer(i, "y", r[1], 0)?;
            }
            Dataset::LmPoisson(pairs(rows))
        }
        ModelKind::Mixture => {
            Dataset::Mixture(table.select(&["y"])?.into_iter().map(|r| r[0]).collect())
        }
        ModelKind::Randeffects => {
            let rows = table.select(&["id", "x", "y"])?;
            let obs = rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    Ok(Observation {
                        id: table.integer(i, "id", r[0], 0)?,
                        x: r[1],
                        y: r[2],
                    })
                })
                .collect::<Result<_, CliError>>()?;
            Dataset::Randeffects(obs)
        }
        ModelKind::Coin => {
            let rows = table.select(&["trials", "successes"])?;
            let data = rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let n = table.integer(i, "trials", r[0], 0)?;
                    let k = table.integer(i, "successes", r[1], 0)?;
                    if k > n {
                        return Err(table.parse_error(
                            table.lines[i],
                            format!("{k} successes out of {n} trials"),
                        ));
                    }
                    Ok((n as u64, k as f64))
                })
                .collect::<Result<_, CliError>>()?;
            Dataset::Coin(data)
        }
    })
}

fn pairs(rows: Vec<Vec<f64>>) -> Vec<(f64, f64)> {
    rows.into_iter().map(|r| (r[0], r[1])).collect()
}

pub fn build(data: &Dataset, prior_sd: f64) -> Result<NamedModel, ModelError> {
    match data {
        Dataset::Lm(xy) => lm(xy, prior_sd),
        Dataset::LmPoisson(xy) => lm_poisson(xy, prior_sd),
        Dataset::Mixture(ys) => mixture(ys),
        Dataset::Randeffects(obs) => randeffects(obs),
        Dataset::Coin(rows) => coin(rows),
    }
}

/// Intercept and slope with Normal priors and `y ~ Normal(a + b x, sigma)`.
/// The prior arguments may themselves be model quantities.
pub fn linear_model(
    alpha_prior: (&Expr, &Expr),
    beta_prior: (&Expr, &Expr),
    sigma: &Expr,
    data: &[(f64, f64)],
    names: [&str; 2],
) -> Result<NamedModel, ModelError> {
    let alpha = Normal::new(alpha_prior.0, alpha_prior.1).param(names[0]);
    let beta = Normal::new(beta_prior.0, beta_prior.1).param(names[1]);
    alpha.zip(beta).try_flat_map(|(a, b)| {
        let (la, lb, sigma) = (a.clone(), b.clone(), sigma.clone());
        let link = Predictor::from_link(move |x: &f64| {
            Dist::continuous(Normal::new(&la + &lb * *x, &sigma))
        });
        Ok(link
            .fit(data)?
            .map(|()| vec![(names[0].to_string(), a), (names[1].to_string(), b)]))
    })
}

pub fn lm(data: &[(f64, f64)], prior_sd: f64) -> Result<NamedModel, ModelError> {
    let (zero, sd) = (Expr::constant(0.0), Expr::constant(prior_sd));
    Exponential::new(3.0).param("sigma").try_flat_map(|sigma| {
        let coefs = linear_model((&zero, &sd), (&zero, &sd), &sigma, data, ["alpha", "beta"])?;
        Ok(coefs.map(|mut named| {
            named.push(("sigma".to_string(), sigma));
            named
        }))
    })
}

/// `y ~ Poisson(exp(a + b x))` with Normal(0, prior_sd) coefficients.
pub fn lm_poisson(data: &[(f64, f64)], prior_sd: f64) -> Result<NamedModel, ModelError> {
    let alpha = Normal::new(0.0, prior_sd).param("alpha");
    let beta = Normal::new(0.0, prior_sd).param("beta");
    alpha.zip(beta).try_flat_map(|(a, b)| {
        let (la, lb) = (a.clone(), b.clone());
        let link = Predictor::from_link(move |x: &f64| {
            Dist::discrete(Poisson::new((&la + &lb * *x).exp()))
        });
        Ok(link
            .fit(data)?
            .map(|()| vec![("alpha".to_string(), a), ("beta".to_string(), b)]))
    })
}

pub const MIXTURE_COMPONENTS: usize = 3;

/// Gamma(3, 1) weights normalised to proportions, Normal(0, 1) means and an
/// Exponential(3) common scale.
pub fn mixture(ys: &[f64]) -> Result<NamedModel, ModelError> {
    let k = MIXTURE_COMPONENTS;
    dirichlet_via_gammas(k, 3.0)?.try_flat_map(|thetas| {
        let mus =
            RandomVariable::traverse((1..=k).map(|i| Normal::standard().param(&format!("mu_{i}"))));
        mus.try_flat_map(|mus| {
            Exponential::new(3.0).param("sigma").try_flat_map(|sigma| {
                let components = mus
                    .iter()
                    .zip(&thetas)
                    .map(|(m, t)| (Normal::new(m, &sigma), t.clone()));
                let lik = funprob::distributions::Mixture::of(components)?.fit(ys)?;
                Ok(lik.map(|()| {
                    let mut named: Vec<(String, Expr)> = Vec::new();
                    named.extend(
                        mus.iter()
                            .enumerate()
                            .map(|(i, m)| (format!("mu_{}", i + 1), m.clone())),
                    );
                    named.push(("sigma".to_string(), sigma));
                    named.extend(
                        thetas
                            .iter()
                            .enumerate()
                            .map(|(i, t)| (format!("theta_{}", i + 1), t.clone())),
                    );
                    named
                }))
            })
        })
    })
}

/// Population-level hyperparameters, then one `linear_model` per class with
/// its coefficients centred on them.
pub fn randeffects(obs: &[Observation]) -> Result<NamedModel, ModelError> {
    let mut groups: BTreeMap<i64, Vec<(f64, f64)>> = BTreeMap::new();
    for o in obs {
        groups.entry(o.id).or_default().push((o.x, o.y));
    }
    let hyper = RandomVariable::traverse([
        Normal::new(0.0, 1000.0).param("alpha_c"),
        Gamma::new(0.001, 1000.0).param("sigma_a"),
        Normal::new(0.0, 1000.0).param("beta_c"),
        Gamma::new(0.001, 1000.0).param("sigma_b"),
        Exponential::new(3.0).param("sigma"),
    ]);
    hyper.try_flat_map(|h| {
        let (alpha_c, sigma_a, beta_c, sigma_b, sigma) = (&h[0], &h[1], &h[2], &h[3], &h[4]);
        let classes = groups
            .iter()
            .map(|(id, data)| {
                let names = [format!("alpha_{id}"), format!("beta_{id}")];
                linear_model(
                    (alpha_c, sigma_a),
                    (beta_c, sigma_b),
                    sigma,
                    data,
                    [&names[0], &names[1]],
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        if classes.is_empty() {
            return Err(funprob::distributions::DistError::EmptyObservations.into());
        }
        Ok(RandomVariable::traverse(classes).map(|per_class| {
            let mut named: Vec<(String, Expr)> =
                ["alpha_c", "sigma_a", "beta_c", "sigma_b", "sigma"]
                    .iter()
                    .map(|n| n.to_string())
                    .zip(h.iter().cloned())
                    .collect();
            named.extend(per_class.into_iter().flatten());
            named
        }))
    })
}

/// `p ~ Beta(3, 3)` and `successes ~ Binomial(p, trials)` per row.
pub fn coin(rows: &[(u64, f64)]) -> Result<NamedModel, ModelError> {
    Beta::new(3.0, 3.0).param("p").try_flat_map(|p| {
        let lp = p.clone();
        let lik = Predictor::from_link(move |n: &u64| Dist::discrete(Binomial::new(&lp, *n)))
            .fit(rows)?;
        Ok(lik.map(|()| vec![("p".to_string(), p)]))
    })
}
