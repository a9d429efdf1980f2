//! Hamiltonian Monte Carlo with leapfrog integration and dual-averaging
//! step-size adaptation.
//!
//! The state of a chain is a position `psi` in unconstrained parameter space
//! and an auxiliary momentum `phi ~ N(0, Σ)` with diagonal `Σ`. Each iteration
//! refreshes the momentum, integrates Hamilton's equations for `L` leapfrog
//! steps and applies a Metropolis correction.

use thiserror::Error;

use crate::model::{CompiledModel, ModelError};
use crate::reverse::AdError;
use crate::rng::{next_double, next_std_normal, GenState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HmcError {
    #[error("leapfrog steps must be at least 1")]
    ZeroLeapfrogSteps,
    #[error("thinning factor must be at least 1")]
    ZeroThin,
    #[error("target acceptance must lie in (0, 1), got {0}")]
    TargetAccept(f64),
    #[error("step size must be positive and finite, got {0}")]
    StepSize(f64),
    #[error("mass matrix has {got} entries for a model of dimension {expected}")]
    MassDimension { expected: usize, got: usize },
    #[error("mass matrix entries must be positive and finite")]
    MassNotPositive,
    #[error("initial position has {got} entries for a model of dimension {expected}")]
    InitDimension { expected: usize, got: usize },
    #[error("log density at the current position is not finite ({0})")]
    NonFiniteCurrent(f64),
    #[error("no initial position with finite log density after {attempts} attempts")]
    InitFailed { attempts: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ad(#[from] AdError),
}

/// How the first position of a chain is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum InitStrategy {
    /// Ancestral draw from the priors, mapped to unconstrained space.
    Prior,
    /// Uniform on `[-radius, radius]` per unconstrained coordinate.
    Uniform { radius: f64 },
    /// A fixed unconstrained position.
    At(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HmcConfig {
    pub leapfrog_steps: usize,
    pub warmup_iters: usize,
    pub sample_iters: usize,
    pub thin: usize,
    pub target_accept: f64,
    /// Diagonal of the momentum covariance; identity when `None`.
    pub mass_diag: Option<Vec<f64>>,
    pub seed: u64,
    pub init: InitStrategy,
    /// Starting step size. Found by the doubling heuristic when `None`.
    pub initial_step_size: Option<f64>,
}

impl Default for HmcConfig {
    fn default() -> Self {
        HmcConfig {
            leapfrog_steps: 5,
            warmup_iters: 10_000,
            sample_iters: 50_000,
            thin: 5,
            target_accept: 0.65,
            mass_diag: None,
            seed: 0,
            init: InitStrategy::Prior,
            initial_step_size: None,
        }
    }
}

impl HmcConfig {
    pub fn validate(&self) -> Result<(), HmcError> {
        if self.leapfrog_steps == 0 {
            return Err(HmcError::ZeroLeapfrogSteps);
        }
        if self.thin == 0 {
            return Err(HmcError::ZeroThin);
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(HmcError::TargetAccept(self.target_accept));
        }
        if let Some(eps) = self.initial_step_size {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(HmcError::StepSize(eps));
            }
        }
        if let Some(mass) = &self.mass_diag {
            if mass.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
                return Err(HmcError::MassNotPositive);
            }
        }
        Ok(())
    }

    fn mass(&self, dim: usize) -> Result<Vec<f64>, HmcError> {
        match &self.mass_diag {
            None => Ok(vec![1.0; dim]),
            Some(m) if m.len() == dim => Ok(m.clone()),
            Some(m) => Err(HmcError::MassDimension {
                expected: dim,
                got: m.len(),
            }),
        }
    }
}

/// Position and momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
}

impl PhaseState {
    pub fn new(psi: Vec<f64>, phi: Vec<f64>) -> Self {
        assert_eq!(psi.len(), phi.len(), "position and momentum lengths differ");
        PhaseState { psi, phi }
    }

    /// The same point with momentum negated.
    pub fn flipped(&self) -> Self {
        PhaseState {
            psi: self.psi.clone(),
            phi: self.phi.iter().map(|p| -p).collect(),
        }
    }
}

/// `½ φᵀ Σ⁻¹ φ`.
pub fn kinetic_energy(phi: &[f64], mass_diag: &[f64]) -> f64 {
    0.5 * phi
        .iter()
        .zip(mass_diag)
        .map(|(p, m)| p * p / m)
        .sum::<f64>()
}

/// One leapfrog step for the target whose log-density gradient is `grad`.
pub fn leapfrog_step(
    s: &PhaseState,
    eps: f64,
    grad: impl Fn(&[f64]) -> Result<Vec<f64>, AdError>,
    mass_diag: &[f64],
) -> Result<PhaseState, AdError> {
    leapfrogs(s, eps, 1, grad, mass_diag)
}

/// `L` leapfrog steps. The gradient at the end of one step is reused at the
/// start of the next, so this agrees exactly with repeated `leapfrog_step`.
pub fn leapfrogs(
    s: &PhaseState,
    eps: f64,
    steps: usize,
    grad: impl Fn(&[f64]) -> Result<Vec<f64>, AdError>,
    mass_diag: &[f64],
) -> Result<PhaseState, AdError> {
    if steps == 0 {
        return Ok(s.clone());
    }
    let g0 = grad(&s.psi)?;
    let (end, _, _) = integrate(s, &g0, eps, steps, mass_diag, |x| Ok((0.0, grad(x)?)))?;
    Ok(end)
}

/// Leapfrog trajectory from `s` with known gradient `g0` at the start.
/// Returns the end point with the log density and gradient there.
fn integrate(
    s: &PhaseState,
    g0: &[f64],
    eps: f64,
    steps: usize,
    mass_diag: &[f64],
    mut eval: impl FnMut(&[f64]) -> Result<(f64, Vec<f64>), AdError>,
) -> Result<(PhaseState, f64, Vec<f64>), AdError> {
    let mut psi = s.psi.clone();
    let mut phi = s.phi.clone();
    let mut g = g0.to_vec();
    let mut logp = f64::NAN;
    let half = 0.5 * eps;
    for _ in 0..steps {
        for (p, gi) in phi.iter_mut().zip(&g) {
            *p += half * gi;
        }
        for ((x, p), m) in psi.iter_mut().zip(&phi).zip(mass_diag) {
            *x += eps * p / m;
        }
        let (lp, next) = eval(&psi)?;
        logp = lp;
        g = next;
        for (p, gi) in phi.iter_mut().zip(&g) {
            *p += half * gi;
        }
    }
    Ok((PhaseState { psi, phi }, logp, g))
}

/// A position with its log density and gradient.
#[derive(Debug, Clone)]
struct Point {
    psi: Vec<f64>,
    logp: f64,
    grad: Vec<f64>,
}

impl Point {
    fn at(model: &CompiledModel, psi: Vec<f64>) -> Result<Self, HmcError> {
        let (logp, grad) = model.density_and_gradient(&psi)?;
        if !logp.is_finite() {
            return Err(HmcError::NonFiniteCurrent(logp));
        }
        Ok(Point { psi, logp, grad })
    }
}

fn draw_momentum(state: GenState, mass_diag: &[f64]) -> (GenState, Vec<f64>) {
    let mut state = state;
    let phi = mass_diag
        .iter()
        .map(|m| {
            let (next, z) = next_std_normal(state);
            state = next;
            m.sqrt() * z
        })
        .collect();
    (state, phi)
}

struct Transition {
    point: Point,
    accepted: bool,
    accept_prob: f64,
}

fn transition(
    model: &CompiledModel,
    current: &Point,
    eps: f64,
    steps: usize,
    mass_diag: &[f64],
    state: GenState,
) -> (GenState, Transition) {
    let (state, phi) = draw_momentum(state, mass_diag);
    let (state, u) = next_double(state);
    let start = PhaseState {
        psi: current.psi.clone(),
        phi,
    };
    let proposal = if steps == 0 {
        Ok((start.clone(), current.logp, current.grad.clone()))
    } else {
        integrate(&start, &current.grad, eps, steps, mass_diag, |x| {
            model.density_and_gradient(x)
        })
    };
    let reject = |state| {
        (
            state,
            Transition {
                point: current.clone(),
                accepted: false,
                accept_prob: 0.0,
            },
        )
    };
    let Ok((end, logp, grad)) = proposal else {
        return reject(state);
    };
    let alpha = logp - kinetic_energy(&end.phi, mass_diag) - current.logp
        + kinetic_energy(&start.phi, mass_diag);
    if !alpha.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return reject(state);
    }
    let accept_prob = alpha.min(0.0).exp();
    if u.ln() < alpha {
        let point = Point {
            psi: end.psi,
            logp,
            grad,
        };
        (
            state,
            Transition {
                point,
                accepted: true,
                accept_prob,
            },
        )
    } else {
        let (state, mut t) = reject(state);
        t.accept_prob = accept_prob;
        (state, t)
    }
}

/// One HMC transition from `psi`. The momentum is drawn as `√Σ_j · N(0, 1)`;
/// proposals whose density or gradient is not finite are rejected.
pub fn hmc_step(
    psi: &[f64],
    eps: f64,
    steps: usize,
    model: &CompiledModel,
    mass_diag: &[f64],
    state: GenState,
) -> Result<(GenState, Vec<f64>, bool), HmcError> {
    if mass_diag.len() != model.dim() {
        return Err(HmcError::MassDimension {
            expected: model.dim(),
            got: mass_diag.len(),
        });
    }
    let current = Point::at(model, psi.to_vec())?;
    let (state, t) = transition(model, &current, eps, steps, mass_diag, state);
    Ok((state, t.point.psi, t.accepted))
}

/// Dual-averaging state for the log step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualAveragingState {
    pub log_eps: f64,
    pub log_eps_bar: f64,
    pub h_bar: f64,
    pub mu: f64,
    pub iter: u64,
    pub target: f64,
    pub gamma: f64,
    pub t0: f64,
    pub kappa: f64,
}

impl DualAveragingState {
    pub fn new(eps0: f64, target: f64) -> Self {
        DualAveragingState {
            log_eps: eps0.ln(),
            log_eps_bar: 0.0,
            h_bar: 0.0,
            mu: (10.0 * eps0).ln(),
            iter: 0,
            target,
            gamma: 0.05,
            t0: 10.0,
            kappa: 0.75,
        }
    }

    /// Step size to use for the next iteration.
    pub fn eps(&self) -> f64 {
        self.log_eps.exp()
    }

    /// Averaged step size, used once adaptation ends.
    pub fn final_eps(&self) -> f64 {
        self.log_eps_bar.exp()
    }
}

pub fn adapt_step_size(da: DualAveragingState, accept_prob: f64) -> DualAveragingState {
    let m = (da.iter + 1) as f64;
    let w = 1.0 / (m + da.t0);
    let h_bar = (1.0 - w) * da.h_bar + w * (da.target - accept_prob);
    let log_eps = da.mu - m.sqrt() / da.gamma * h_bar;
    let eta = m.powf(-da.kappa);
    DualAveragingState {
        log_eps,
        log_eps_bar: eta * log_eps + (1.0 - eta) * da.log_eps_bar,
        h_bar,
        iter: da.iter + 1,
        ..da
    }
}

/// Starting step size: from 1.0, halve or double until the acceptance
/// probability of a single leapfrog step crosses one half.
pub fn find_initial_step(
    model: &CompiledModel,
    psi: &[f64],
    mass_diag: &[f64],
    state: GenState,
) -> Result<(GenState, f64), HmcError> {
    let current = Point::at(model, psi.to_vec())?;
    let (state, phi) = draw_momentum(state, mass_diag);
    let start = PhaseState {
        psi: current.psi.clone(),
        phi,
    };
    let h0 = current.logp - kinetic_energy(&start.phi, mass_diag);
    let log_accept = |eps: f64| match integrate(&start, &current.grad, eps, 1, mass_diag, |x| {
        model.density_and_gradient(x)
    }) {
        Ok((end, logp, _)) => {
            let a = logp - kinetic_energy(&end.phi, mass_diag) - h0;
            if a.is_nan() {
                f64::NEG_INFINITY
            } else {
                a
            }
        }
        Err(_) => f64::NEG_INFINITY,
    };
    let threshold = 0.5f64.ln();
    let mut eps = 1.0;
    let grow = log_accept(eps) > threshold;
    for _ in 0..100 {
        let next = if grow { eps * 2.0 } else { eps * 0.5 };
        if grow != (log_accept(next) > threshold) {
            // Keep the last step size on the acceptable side.
            if !grow {
                eps = next;
            }
            return Ok((state, eps));
        }
        eps = next;
    }
    Ok((state, eps))
}

/// Posterior draws in constrained space with acceptance statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub columns: Vec<String>,
    /// One row per retained draw.
    pub draws: Vec<Vec<f64>>,
    /// Unnormalised log posterior (unconstrained, Jacobian included) at each
    /// retained draw.
    pub log_density: Vec<f64>,
    pub accept_count: usize,
    pub proposal_count: usize,
    pub final_eps: f64,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Post-warmup acceptance rate.
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposal_count == 0 {
            return 0.0;
        }
        self.accept_count as f64 / self.proposal_count as f64
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|row| row[j]).collect()
    }

    /// Mean of [`Chain::log_density`]; `-inf` for an empty chain.
    pub fn mean_log_density(&self) -> f64 {
        if self.log_density.is_empty() {
            return f64::NEG_INFINITY;
        }
        self.log_density.iter().sum::<f64>() / self.log_density.len() as f64
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.column(j))
    }
}

pub const INIT_ATTEMPTS: usize = 100;

fn initial_point(
    model: &CompiledModel,
    init: &InitStrategy,
    mut state: GenState,
) -> Result<(GenState, Point), HmcError> {
    if let InitStrategy::At(psi) = init {
        if psi.len() != model.dim() {
            return Err(HmcError::InitDimension {
                expected: model.dim(),
                got: psi.len(),
            });
        }
        return Ok((state, Point::at(model, psi.clone())?));
    }
    for _ in 0..INIT_ATTEMPTS {
        let (next, psi) = match init {
            InitStrategy::Uniform { radius } => model.sample_uniform(state, *radius),
            _ => {
                let (next, psi) = model.sample_prior(state);
                (next, psi?)
            }
        };
        state = next;
        if psi.iter().all(|x| x.is_finite()) {
            if let Ok(p) = Point::at(model, psi) {
                if p.grad.iter().all(|g| g.is_finite()) {
                    return Ok((state, p));
                }
            }
        }
    }
    Err(HmcError::InitFailed {
        attempts: INIT_ATTEMPTS,
    })
}

/// Runs one chain: warmup with step-size adaptation, then `sample_iters`
/// iterations at the averaged step size keeping every `thin`-th draw.
pub fn sample(model: &CompiledModel, cfg: &HmcConfig) -> Result<Chain, HmcError> {
    cfg.validate()?;
    let mass = cfg.mass(model.dim())?;
    let state = GenState::new(cfg.seed);
    let (state, mut current) = initial_point(model, &cfg.init, state)?;
    let (mut state, eps0) = match cfg.initial_step_size {
        Some(eps) => (state, eps),
        None => find_initial_step(model, &current.psi, &mass, state)?,
    };

    let mut eps = eps0;
    if cfg.warmup_iters > 0 {
        let mut da = DualAveragingState::new(eps0, cfg.target_accept);
        for _ in 0..cfg.warmup_iters {
            let (next, t) = transition(model, &current, da.eps(), cfg.leapfrog_steps, &mass, state);
            state = next;
            current = t.point;
            da = adapt_step_size(da, t.accept_prob);
        }
        eps = da.final_eps();
    }

    let mut draws = Vec::with_capacity(cfg.sample_iters / cfg.thin);
    let mut log_density = Vec::with_capacity(cfg.sample_iters / cfg.thin);
    let mut accept_count = 0;
    for i in 1..=cfg.sample_iters {
        let (next, t) = transition(model, &current, eps, cfg.leapfrog_steps, &mass, state);
        state = next;
        current = t.point;
        accept_count += usize::from(t.accepted);
        if i % cfg.thin == 0 {
            draws.push(model.draw_row(&current.psi)?);
            log_density.push(current.logp);
        }
    }
    Ok(Chain {
        columns: model.columns().to_vec(),
        draws,
        log_density,
        accept_count,
        proposal_count: cfg.sample_iters,
        final_eps: eps,
    })
}

/// Runs `n` chains on separate threads, each with its own model clone.
/// Chain `i` is seeded with `GenState::for_chain(cfg.seed, i)`.
pub fn sample_chains(
    model: &CompiledModel,
    cfg: &HmcConfig,
    n: usize,
) -> Result<Vec<Chain>, HmcError> {
    cfg.validate()?;
    let configs: Vec<HmcConfig> = (0..n)
        .map(|i| HmcConfig {
            seed: GenState::for_chain(cfg.seed, i as u64).value(),
            ..cfg.clone()
        })
        .collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| {
                let model = model.clone();
                scope.spawn(move || sample(&model, c))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampler thread panicked"))
            .collect()
    })
}
