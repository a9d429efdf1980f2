//! Leapfrog integrator geometry measurements.

use nalgebra::DMatrix;

use funprob::hmc::{leapfrog_step, leapfrogs, PhaseState};
use funprob::reverse::AdError;

pub type GradFn<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>, AdError> + 'a;

/// Gradient of `-Σ ψ_j² / (2 σ_j²)`.
pub fn gaussian_grad(scales: &[f64]) -> impl Fn(&[f64]) -> Result<Vec<f64>, AdError> + '_ {
    move |x| Ok(x.iter().zip(scales).map(|(v, s)| -v / (s * s)).collect())
}

/// Gradient of `-Σ (ln cosh ψ_j + ψ_j⁴ / 12)`, a smooth non-quadratic target.
pub fn cosh_quartic_grad(x: &[f64]) -> Result<Vec<f64>, AdError> {
    Ok(x.iter().map(|v| -(v.tanh() + v * v * v / 3.0)).collect())
}

pub fn gaussian_energy(s: &PhaseState, scales: &[f64]) -> f64 {
    let potential: f64 = s
        .psi
        .iter()
        .zip(scales)
        .map(|(v, sc)| v * v / (2.0 * sc * sc))
        .sum();
    potential + 0.5 * s.phi.iter().map(|p| p * p).sum::<f64>()
}

/// Largest coordinate error after `L` steps forward, a momentum flip, `L`
/// steps back and a second flip.
pub fn reversibility_residual(s: &PhaseState, eps: f64, steps: usize, grad: &GradFn<'_>) -> f64 {
    let mass = vec![1.0; s.psi.len()];
    let there = leapfrogs(s, eps, steps, grad, &mass).unwrap();
    let back = leapfrogs(&there.flipped(), eps, steps, grad, &mass)
        .unwrap()
        .flipped();
    back.psi
        .iter()
        .chain(&back.phi)
        .zip(s.psi.iter().chain(&s.phi))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Determinant of the finite-difference Jacobian of one leapfrog step.
pub fn leapfrog_jacobian_det(s: &PhaseState, eps: f64, grad: &GradFn<'_>) -> f64 {
    let d = s.psi.len();
    let mass = vec![1.0; d];
    let flat = |st: &PhaseState| -> Vec<f64> { st.psi.iter().chain(&st.phi).copied().collect() };
    let map = |z: &[f64]| {
        let st = PhaseState::new(z[..d].to_vec(), z[d..].to_vec());
        flat(&leapfrog_step(&st, eps, grad, &mass).unwrap())
    };
    let z0 = flat(s);
    let h = 1e-6;
    let mut jac = DMatrix::zeros(2 * d, 2 * d);
    for j in 0..2 * d {
        let mut up = z0.clone();
        let mut down = z0.clone();
        up[j] += h;
        down[j] -= h;
        let (fu, fd) = (map(&up), map(&down));
        for i in 0..2 * d {
            jac[(i, j)] = (fu[i] - fd[i]) / (2.0 * h);
        }
    }
    jac.determinant()
}

/// Largest |H(t) - H(0)| along a Gaussian-target trajectory of duration
/// `eps * steps`.
pub fn max_energy_drift(s: &PhaseState, eps: f64, steps: usize, scales: &[f64]) -> f64 {
    let grad = gaussian_grad(scales);
    let mass = vec![1.0; s.psi.len()];
    let h0 = gaussian_energy(s, scales);
    let mut cur = s.clone();
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        cur = leapfrog_step(&cur, eps, &grad, &mass).unwrap();
        worst = worst.max((gaussian_energy(&cur, scales) - h0).abs());
    }
    worst
}

/// Drift ratio between step sizes `eps` and `eps / 2` over the same duration.
pub fn energy_scaling_ratio(eps: f64, duration: f64) -> f64 {
    let scales = [1.0, 2.0];
    let s = PhaseState::new(vec![1.0, 0.5], vec![0.3, -0.8]);
    let steps = (duration / eps).round() as usize;
    max_energy_drift(&s, eps, steps, &scales) / max_energy_drift(&s, eps / 2.0, 2 * steps, &scales)
}
