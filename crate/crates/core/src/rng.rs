//! Purely functional pseudo-random number generation.
//!
//! A [`GenState`] is the 64-bit state of a linear congruential generator and a
//! [`Rand<A>`] is a pure function from a state to the next state and a value.
//! Random programs are composed with [`Rand::map`] and [`Rand::flat_map`]; no
//! generator holds hidden mutable state, so running the same program from the
//! same seed always reproduces the same result.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Multiplier of the generator.
pub const LCG_MULTIPLIER: u64 = 6364136223846793005;
/// Increment of the generator.
pub const LCG_INCREMENT: u64 = 1442695040888963407;
/// Spacing between the seeds of independent chains.
pub const CHAIN_SEED_STRIDE: u64 = (1 << 32) + 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RngError {
    #[error("invalid range: from ({from}) must be less than to ({to})")]
    InvalidRange { from: i64, to: i64 },
}

/// Internal state `X_n` of the linear congruential generator. The modulus is
/// 2^64, realised by wrapping arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenState(pub u64);

impl GenState {
    pub fn new(seed: u64) -> Self {
        GenState(seed)
    }

    /// Seed for chain `index` derived from a base seed.
    pub fn for_chain(seed: u64, index: u64) -> Self {
        GenState(seed.wrapping_add(index.wrapping_mul(CHAIN_SEED_STRIDE)))
    }

    pub fn value(self) -> u64 {
        self.0
    }
}

impl From<u64> for GenState {
    fn from(seed: u64) -> Self {
        GenState(seed)
    }
}

impl fmt::Display for GenState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `(a·s + c) mod 2^64`.
pub fn lcg_step(s: GenState) -> GenState {
    GenState(s.0.wrapping_mul(LCG_MULTIPLIER).wrapping_add(LCG_INCREMENT))
}

/// Keeps the top 53 bits of the state and scales them into `[0, 1 - 2^-53]`.
pub fn to_unit_double(s: GenState) -> f64 {
    (s.0 >> 11) as f64 * f64::powi(2.0, -53)
}

/// Advances the state once and returns the new state with its unit double.
pub fn next_double(s: GenState) -> (GenState, f64) {
    let next = lcg_step(s);
    (next, to_unit_double(next))
}

/// Box-Muller transform of two uniforms (cosine branch only).
pub fn box_muller(u1: f64, u2: f64) -> f64 {
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Draws a standard normal by threading the state through two (or more, when
/// `u1 = 0` is re-drawn) unit doubles.
pub fn next_std_normal(s: GenState) -> (GenState, f64) {
    let (mut s, mut u1) = next_double(s);
    while u1 == 0.0 {
        (s, u1) = next_double(s);
    }
    let (s, u2) = next_double(s);
    (s, box_muller(u1, u2))
}

type RunFn<A> = dyn Fn(GenState) -> (GenState, A) + Send + Sync;

/// A random computation: a pure function `GenState -> (GenState, A)`.
pub struct Rand<A> {
    run: Arc<RunFn<A>>,
}

impl<A> Clone for Rand<A> {
    fn clone(&self) -> Self {
        Rand {
            run: Arc::clone(&self.run),
        }
    }
}

impl<A> fmt::Debug for Rand<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Rand(..)")
    }
}

impl<A: 'static> Rand<A> {
    pub fn new<F>(run: F) -> Self
    where
        F: Fn(GenState) -> (GenState, A) + Send + Sync + 'static,
    {
        Rand { run: Arc::new(run) }
    }

    /// Runs the computation from `state`, returning the next state and value.
    pub fn run(&self, state: GenState) -> (GenState, A) {
        (self.run)(state)
    }

    /// Runs from a seed and discards the final state.
    pub fn sample(&self, seed: u64) -> A {
        self.run(GenState(seed)).1
    }

    pub fn pure(a: A) -> Self
    where
        A: Clone + Send + Sync,
    {
        Rand::new(move |s| (s, a.clone()))
    }

    pub fn map<B: 'static, F>(&self, f: F) -> Rand<B>
    where
        F: Fn(A) -> B + Send + Sync + 'static,
    {
        let run = Arc::clone(&self.run);
        Rand::new(move |s| {
            let (s, a) = run(s);
            (s, f(a))
        })
    }

    pub fn flat_map<B: 'static, F>(&self, f: F) -> Rand<B>
    where
        F: Fn(A) -> Rand<B> + Send + Sync + 'static,
    {
        let run = Arc::clone(&self.run);
        Rand::new(move |s| {
            let (s, a) = run(s);
            f(a).run(s)
        })
    }

    pub fn zip<B: 'static>(&self, other: &Rand<B>) -> Rand<(A, B)> {
        let first = Arc::clone(&self.run);
        let second = Arc::clone(&other.run);
        Rand::new(move |s| {
            let (s, a) = first(s);
            let (s, b) = second(s);
            (s, (a, b))
        })
    }

    /// Runs `n` independent copies in sequence.
    pub fn replicate(&self, n: usize) -> Rand<Vec<A>> {
        let run = Arc::clone(&self.run);
        Rand::new(move |mut s| {
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                let (next, a) = run(s);
                s = next;
                out.push(a);
            }
            (s, out)
        })
    }

    /// Sequences a collection of computations left to right.
    pub fn sequence(rs: Vec<Rand<A>>) -> Rand<Vec<A>> {
        Rand::new(move |mut s| {
            let mut out = Vec::with_capacity(rs.len());
            for r in &rs {
                let (next, a) = r.run(s);
                s = next;
                out.push(a);
            }
            (s, out)
        })
    }
}

/// One LCG step mapped to `[0, 1)`.
pub fn rand_double() -> Rand<f64> {
    Rand::new(next_double)
}

/// Uniform integer in `[from, to)`.
pub fn rand_int(from: i64, to: i64) -> Result<Rand<i64>, RngError> {
    if from >= to {
        return Err(RngError::InvalidRange { from, to });
    }
    let width = (to - from) as f64;
    Ok(rand_double().map(move |u| (u * width + from as f64).floor() as i64))
}

pub fn rand_bool() -> Rand<bool> {
    rand_double().map(|u| u > 0.5)
}

pub fn std_normal() -> Rand<f64> {
    Rand::new(next_std_normal)
}
