//! Monad laws for `Rand` and `RandomVariable`, as property checks.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use funprob::distributions::{Beta, Exponential, Gamma, Normal};
use funprob::model::{ContinuousExt, RandomVariable};
use funprob::rng::{rand_double, rand_int, std_normal, GenState, Rand};
use funprob::Expr;

#[derive(Debug, Clone)]
pub struct RandCase {
    pub seed: u64,
    pub a: f64,
    pub m: u8,
    pub k: f64,
}

fn base(m: u8) -> Rand<f64> {
    match m % 4 {
        0 => rand_double(),
        1 => std_normal(),
        2 => rand_int(-5, 5).unwrap().map(|i| i as f64),
        _ => rand_double().replicate(3).map(|v| v.iter().sum()),
    }
}

fn f(k: f64) -> impl Fn(f64) -> Rand<f64> + Send + Sync + Clone + 'static {
    move |a| std_normal().map(move |z| a + k * z)
}

fn g(k: f64) -> impl Fn(f64) -> Rand<f64> + Send + Sync + Clone + 'static {
    move |a| rand_double().replicate(2).map(move |v| a * v[0] - k * v[1])
}

pub fn rand_cases() -> impl Strategy<Value = RandCase> {
    (any::<u64>(), -10.0f64..10.0, any::<u8>(), -3.0f64..3.0).prop_map(|(seed, a, m, k)| RandCase {
        seed,
        a,
        m,
        k,
    })
}

fn same<A: PartialEq + std::fmt::Debug>(
    law: &str,
    x: (GenState, A),
    y: (GenState, A),
) -> Result<(), String> {
    if x == y {
        Ok(())
    } else {
        Err(format!("{law}: {x:?} != {y:?}"))
    }
}

pub fn check_rand_laws(c: &RandCase) -> Result<(), String> {
    let s = GenState::new(c.seed);
    let (fk, gk) = (f(c.k), g(c.k));
    same(
        "left identity",
        Rand::pure(c.a).flat_map(fk.clone()).run(s),
        fk(c.a).run(s),
    )?;
    same(
        "right identity",
        base(c.m).flat_map(Rand::pure).run(s),
        base(c.m).run(s),
    )?;
    let (f2, g2) = (fk.clone(), gk.clone());
    same(
        "associativity",
        base(c.m).flat_map(fk.clone()).flat_map(gk.clone()).run(s),
        base(c.m)
            .flat_map(move |x| f2(x).flat_map(g2.clone()))
            .run(s),
    )?;
    same(
        "functor identity",
        base(c.m).map(|x| x).run(s),
        base(c.m).run(s),
    )?;
    let k = c.k;
    same(
        "functor composition",
        base(c.m).map(move |x| (x + k) * 2.0).run(s),
        base(c.m).map(move |x| x + k).map(|x| x * 2.0).run(s),
    )?;
    Ok(())
}

/// One prior in a generated model.
#[derive(Debug, Clone)]
pub struct Prior {
    kind: u8,
    p: f64,
    q: f64,
}

impl Prior {
    fn param(&self, name: &str) -> RandomVariable<Expr> {
        match self.kind % 4 {
            0 => Normal::new(self.p - 1.5, self.q).param(name),
            1 => Exponential::new(self.q).param(name),
            2 => Gamma::new(self.p, self.q).param(name),
            _ => Beta::new(self.p, self.q).param(name),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelCase {
    pub priors: Vec<Prior>,
    pub a: f64,
    pub sf: f64,
    pub data_f: Vec<f64>,
    pub data_g: Vec<f64>,
    pub seed: u64,
}

pub fn model_cases() -> impl Strategy<Value = ModelCase> {
    let prior =
        (any::<u8>(), 0.5f64..3.0, 0.5f64..3.0).prop_map(|(kind, p, q)| Prior { kind, p, q });
    (
        prop::collection::vec(prior, 1..4),
        -3.0f64..3.0,
        0.3f64..3.0,
        prop::collection::vec(-4.0f64..4.0, 1..6),
        prop::collection::vec(-4.0f64..4.0, 1..6),
        any::<u64>(),
    )
        .prop_map(|(priors, a, sf, data_f, data_g, seed)| ModelCase {
            priors,
            a,
            sf,
            data_f,
            data_g,
            seed,
        })
}

impl ModelCase {
    fn m(&self) -> RandomVariable<Expr> {
        let params = self
            .priors
            .iter()
            .enumerate()
            .map(|(i, p)| p.param(&format!("m{i}")));
        RandomVariable::traverse(params).map(Expr::sum)
    }

    fn f(&self) -> impl Fn(Expr) -> RandomVariable<Expr> + '_ {
        move |x| {
            Normal::new(&x, self.sf).param("y").flat_map(|y| {
                Normal::new(&y, 1.0)
                    .fit(&self.data_f)
                    .expect("non-empty data")
                    .map(|_| y)
            })
        }
    }

    fn g(&self) -> impl Fn(Expr) -> RandomVariable<Expr> + '_ {
        move |y| {
            let obs = Normal::new(&y * 0.5, 2.0)
                .fit(&self.data_g)
                .expect("non-empty data");
            obs.flat_map(|_| Exponential::new(2.0).param("z"))
                .map(move |z| z + &y)
        }
    }
}

fn same_density(
    law: &str,
    a: RandomVariable<Expr>,
    b: RandomVariable<Expr>,
    seed: u64,
) -> Result<(), String> {
    if a.dim() != b.dim() {
        return Err(format!("{law}: dims {} and {}", a.dim(), b.dim()));
    }
    let (ca, cb) = (
        a.compile().map_err(|e| e.to_string())?,
        b.compile().map_err(|e| e.to_string())?,
    );
    let mut state = GenState::new(seed);
    for _ in 0..10 {
        let (next, u) = ca.sample_uniform(state, 2.0);
        state = next;
        let (x, y) = (
            ca.density(&u).map_err(|e| e.to_string())?,
            cb.density(&u).map_err(|e| e.to_string())?,
        );
        let scale = x.abs().max(y.abs()).max(1.0);
        if (x - y).abs() > 1e-12 * scale {
            return Err(format!("{law}: {x} != {y} at {u:?}"));
        }
    }
    Ok(())
}

pub fn check_model_laws(c: &ModelCase) -> Result<(), String> {
    let a = Expr::constant(c.a);
    same_density(
        "left identity",
        RandomVariable::pure(a.clone()).flat_map(c.f()),
        c.f()(a),
        c.seed,
    )?;
    same_density(
        "right identity",
        c.m().flat_map(RandomVariable::pure),
        c.m(),
        c.seed,
    )?;
    same_density(
        "associativity",
        c.m().flat_map(c.f()).flat_map(c.g()),
        c.m().flat_map(|x| c.f()(x).flat_map(c.g())),
        c.seed,
    )?;
    let additive = c.m().flat_map(|_| c.f()(Expr::constant(0.0)));
    if additive.dim() != c.m().dim() + 1 {
        return Err("dimension is not additive".into());
    }
    Ok(())
}

/// Runs `cases` generated cases of each law suite.
pub fn run_suites(cases: u32) -> (Result<(), String>, Result<(), String>) {
    let config = || Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rand = TestRunner::new(config())
        .run(&rand_cases(), |c| {
            check_rand_laws(&c).map_err(TestCaseError::fail)
        })
        .map_err(|e| e.to_string());
    let model = TestRunner::new(config())
        .run(&model_cases(), |c| {
            check_model_laws(&c).map_err(TestCaseError::fail)
        })
        .map_err(|e| e.to_string());
    (rand, model)
}
