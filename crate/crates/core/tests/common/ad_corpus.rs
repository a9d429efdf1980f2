//! Composite scalar functions written once against `Scalar` and evaluated as
//! plain floats, dual numbers and reverse-mode graphs.

use funprob::dual::grad_forward;
use funprob::reverse::{lower, ParamId};
use funprob::rng::{rand_double, GenState, Rand};
use funprob::{Dual, Expr, Scalar};

pub struct Entry {
    pub name: &'static str,
    pub arity: usize,
    pub value: fn(&[f64]) -> f64,
    pub dual: fn(&[Dual]) -> Dual,
    pub expr: fn(&[Expr]) -> Expr,
}

macro_rules! entry {
    ($name:ident, $arity:expr) => {
        Entry {
            name: stringify!($name),
            arity: $arity,
            value: $name::<f64>,
            dual: $name::<Dual>,
            expr: $name::<Expr>,
        }
    };
}

fn c<S: Scalar>(v: f64) -> S {
    S::constant(v)
}

fn quadratic<S: Scalar>(x: &[S]) -> S {
    x[0].clone() * x[0].clone() + x[0].clone() * 2.0 + 5.0
}

fn product_plus_square<S: Scalar>(x: &[S]) -> S {
    x[0].clone() * x[1].clone() + x[0].powi(2)
}

fn trig_exp<S: Scalar>(x: &[S]) -> S {
    x[0].sin() * x[1].cos() + (x[2].clone() * 0.3).exp()
}

fn log_affine<S: Scalar>(x: &[S]) -> S {
    (x[0].clone() * x[1].clone() + x[2].clone()).ln()
}

fn norm3<S: Scalar>(x: &[S]) -> S {
    (x[0].powi(2) + x[1].powi(2) + x[2].powi(2)).sqrt()
}

fn logistic_softplus<S: Scalar>(x: &[S]) -> S {
    (x[0].clone() - x[1].clone()).logistic() * x[2].softplus()
}

fn log_add_exp_pair<S: Scalar>(x: &[S]) -> S {
    x[0].log_add_exp(&(x[1].clone() * 2.0 - 1.0))
}

fn log_gammas<S: Scalar>(x: &[S]) -> S {
    x[0].ln_gamma() + (x[1].clone() + x[2].clone()).ln_gamma()
}

fn power<S: Scalar>(x: &[S]) -> S {
    x[0].powf(&x[1])
}

fn rational<S: Scalar>(x: &[S]) -> S {
    x[0].clone() / (x[1].powi(2) + 1.0) - x[2].clone() / x[0].clone()
}

fn normal_log_pdf<S: Scalar>(x: &[S]) -> S {
    // y = 1.3, mean x0, sd x1.
    let z = (c::<S>(1.3) - x[0].clone()) / x[1].clone();
    -x[1].ln() - z.powi(2) * 0.5 - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

fn gamma_log_pdf<S: Scalar>(x: &[S]) -> S {
    // y = x2, shape x0, scale x1.
    let (k, theta, y) = (x[0].clone(), x[1].clone(), x[2].clone());
    -k.ln_gamma() - k.clone() * theta.ln() + (k - 1.0) * y.ln() - y / theta
}

fn beta_log_pdf<S: Scalar>(x: &[S]) -> S {
    // y = 0.35, shapes x0 and x1.
    let (a, b) = (x[0].clone(), x[1].clone());
    (a.clone() + b.clone()).ln_gamma() - a.ln_gamma() - b.ln_gamma()
        + (a - 1.0) * 0.35f64.ln()
        + (b - 1.0) * 0.65f64.ln()
}

fn two_component_mixture<S: Scalar>(x: &[S]) -> S {
    // weight logistic(x0), means x1 and -x2, unit sd, observation 0.4.
    let w = x[0].logistic();
    let lp = |m: S| (c::<S>(0.4) - m).powi(2) * -0.5;
    (w.ln() + lp(x[1].clone())).log_add_exp(&((c::<S>(1.0) - w).ln() + lp(-x[2].clone())))
}

fn nested_sines<S: Scalar>(x: &[S]) -> S {
    // Each layer has derivative 1 + 0.3 cos(f) in f, so the gradient stays
    // well away from zero and finite differences remain accurate.
    let mut f = x[0].clone();
    for _ in 0..10 {
        f = f.clone() + f.sin() * 0.3 + x[1].clone() * 0.1;
    }
    f
}

fn integer_powers<S: Scalar>(x: &[S]) -> S {
    x[0].powi(3) - x[1].powi(-2) + x[0].powi(0)
}

fn shared_subexpression<S: Scalar>(x: &[S]) -> S {
    let t = x[0].clone() * x[1].clone();
    t.clone() * t.clone() + t.sin() + t.exp() / 10.0
}

fn softplus_chain<S: Scalar>(x: &[S]) -> S {
    (x[0].softplus() - x[1].clone()).softplus() * x[2].clone()
}

fn poisson_log_pmf<S: Scalar>(x: &[S]) -> S {
    // k = 4 at rate exp(x0).
    let lambda = x[0].exp();
    x[0].clone() * 4.0 - lambda - c::<S>(24f64.ln())
}

fn logistic_regression<S: Scalar>(x: &[S]) -> S {
    let data = [(0.5, 1.0), (-1.2, 0.0), (2.0, 1.0), (0.1, 0.0), (1.4, 1.0)];
    let mut acc = c::<S>(0.0);
    for (xi, yi) in data {
        let eta = x[0].clone() + x[1].clone() * xi;
        // y·η - log(1 + e^η)
        acc = acc + eta.clone() * yi - eta.softplus();
    }
    acc
}

fn exp_of_log_sum<S: Scalar>(x: &[S]) -> S {
    (x[0].ln() + x[1].ln() * 0.5 - x[2].sqrt()).exp()
}

pub fn corpus() -> Vec<Entry> {
    vec![
        entry!(quadratic, 1),
        entry!(product_plus_square, 2),
        entry!(trig_exp, 3),
        entry!(log_affine, 3),
        entry!(norm3, 3),
        entry!(logistic_softplus, 3),
        entry!(log_add_exp_pair, 2),
        entry!(log_gammas, 3),
        entry!(power, 2),
        entry!(rational, 3),
        entry!(normal_log_pdf, 2),
        entry!(gamma_log_pdf, 3),
        entry!(beta_log_pdf, 2),
        entry!(two_component_mixture, 3),
        entry!(nested_sines, 2),
        entry!(integer_powers, 2),
        entry!(shared_subexpression, 2),
        entry!(softplus_chain, 3),
        entry!(poisson_log_pmf, 1),
        entry!(logistic_regression, 2),
        entry!(exp_of_log_sum, 3),
    ]
}

/// `n` points with coordinates uniform on `[0.3, 2.3)`, inside every
/// function's domain.
pub fn points(arity: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let coord: Rand<f64> = rand_double().map(|u| 0.3 + 2.0 * u);
    let (_, pts) = coord.replicate(arity).replicate(n).run(GenState::new(seed));
    pts
}

pub fn reverse_gradient(f: fn(&[Expr]) -> Expr, x: &[f64]) -> (f64, Vec<f64>) {
    let ids: Vec<ParamId> = x.iter().map(|_| ParamId::fresh()).collect();
    let args: Vec<Expr> = ids.iter().map(|&id| Expr::param(id)).collect();
    let (tape, roots) = lower(&ids, &[f(&args)]).expect("lowering");
    let mut tape = tape;
    tape.set_output(roots[0]);
    let value = tape.forward_eval(x).expect("forward sweep");
    (value, tape.backward().expect("backward sweep"))
}

/// Five-point central difference.
pub fn finite_difference(f: fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let h = 1e-4 * x[i].abs().max(1.0);
            let at = |t: f64| {
                let mut y = x.to_vec();
                y[i] += t;
                f(&y)
            };
            (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
        })
        .collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-12 {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Agreement {
    pub value: f64,
    pub forward: f64,
    pub finite_difference: f64,
}

/// Largest relative disagreements of reverse mode with plain evaluation,
/// forward mode and finite differences over `n` points.
pub fn check(entry: &Entry, n: usize, seed: u64) -> Agreement {
    let mut worst = Agreement::default();
    for x in points(entry.arity, n, seed) {
        let (value, reverse) = reverse_gradient(entry.expr, &x);
        let dual = entry.dual;
        let (fwd_value, forward) = grad_forward(|d| Ok(dual(d)), &x).expect("forward mode");
        let fd = finite_difference(entry.value, &x);
        worst.value = worst
            .value
            .max(rel_err(value, (entry.value)(&x)))
            .max(rel_err(value, fwd_value));
        for i in 0..x.len() {
            worst.forward = worst.forward.max(rel_err(reverse[i], forward[i]));
            worst.finite_difference = worst.finite_difference.max(rel_err(reverse[i], fd[i]));
        }
    }
    worst
}
