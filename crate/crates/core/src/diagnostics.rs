//! Chain summaries: autocorrelation, effective sample size, moments,
//! quantiles and histogram counts.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::hmc::Chain;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagError {
    #[error("series of length {len} is too short for lag {max_lag}")]
    TooShort { len: usize, max_lag: usize },
    #[error("series is constant")]
    Degenerate,
    #[error("column {name} is constant")]
    DegenerateColumn { name: String },
    #[error("chain has no draws")]
    EmptyChain,
    #[error("{got} names for {expected} columns")]
    NamesMismatch { expected: usize, got: usize },
    #[error("row {row} has {got} values, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },
}

fn centred(xs: &[f64], max_lag: usize) -> Result<(Vec<f64>, f64), DiagError> {
    if xs.len() < max_lag + 2 {
        return Err(DiagError::TooShort {
            len: xs.len(),
            max_lag,
        });
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let d: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let c0: f64 = d.iter().map(|v| v * v).sum();
    if c0 == 0.0 || !c0.is_finite() {
        return Err(DiagError::Degenerate);
    }
    Ok((d, c0))
}

/// `ρ(k) = Σ_t d_t d_{t+k} / Σ_t d_t²` for `k = 0..=max_lag`, computed
/// directly in `O(n · max_lag)`.
pub fn autocorrelation_direct(xs: &[f64], max_lag: usize) -> Result<Vec<f64>, DiagError> {
    let (d, c0) = centred(xs, max_lag)?;
    Ok((0..=max_lag)
        .map(|k| d.iter().zip(&d[k..]).map(|(a, b)| a * b).sum::<f64>() / c0)
        .collect())
}

/// Same as [`autocorrelation_direct`] through a zero-padded FFT.
pub fn autocorrelation(xs: &[f64], max_lag: usize) -> Result<Vec<f64>, DiagError> {
    let (d, _) = centred(xs, max_lag)?;
    let len = (2 * d.len()).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = d
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for c in &mut buf {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let c0 = buf[0].re;
    Ok(buf[..=max_lag].iter().map(|c| c.re / c0).collect())
}

/// `n / (1 + 2 Σ ρ(k))` with the sum truncated by Geyer's initial positive
/// sequence rule, clamped to `(0, n]`.
pub fn effective_sample_size(xs: &[f64]) -> Result<f64, DiagError> {
    let n = xs.len();
    let max_lag = n.saturating_sub(2);
    let rho = autocorrelation(xs, max_lag)?;
    // Γ_m = ρ(2m) + ρ(2m + 1); τ = -1 + 2 Σ Γ_m over the positive prefix.
    let mut tau = -1.0;
    let mut m = 0;
    while 2 * m + 1 < rho.len() {
        let gamma = rho[2 * m] + rho[2 * m + 1];
        if gamma <= 0.0 {
            break;
        }
        tau += 2.0 * gamma;
        m += 1;
    }
    let n = n as f64;
    // A non-positive τ only arises from strong anti-correlation.
    Ok(if tau > 0.0 { (n / tau).min(n) } else { n })
}

/// Linear interpolation between order statistics (type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub const QUANTILE_LEVELS: [f64; 5] = [0.025, 0.25, 0.5, 0.75, 0.975];

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSummary {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    /// At [`QUANTILE_LEVELS`].
    pub quantiles: [f64; 5],
    /// `None` for a single draw.
    pub ess: Option<f64>,
    pub acf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSummary {
    pub params: Vec<ParamSummary>,
}

/// Lags reported in a summary, further capped by the series length.
pub const SUMMARY_MAX_LAG: usize = 40;

/// Moments and quantiles only; `ess` is `None` and `acf` is empty.
pub fn describe(name: &str, xs: &[f64]) -> Result<ParamSummary, DiagError> {
    if xs.is_empty() {
        return Err(DiagError::EmptyChain);
    }
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(ParamSummary {
        name: name.to_string(),
        n,
        mean,
        sd,
        quantiles: QUANTILE_LEVELS.map(|p| quantile_sorted(&sorted, p)),
        ess: None,
        acf: Vec::new(),
    })
}

/// Full summary of one series. A constant series of more than one draw is
/// reported as degenerate.
pub fn summarize_column(name: &str, xs: &[f64]) -> Result<ParamSummary, DiagError> {
    let mut summary = describe(name, xs)?;
    let n = xs.len();
    if n > 1 {
        let named = |e: DiagError| match e {
            DiagError::Degenerate => DiagError::DegenerateColumn {
                name: name.to_string(),
            },
            other => other,
        };
        summary.acf = autocorrelation(xs, SUMMARY_MAX_LAG.min(n - 2)).map_err(named)?;
        summary.ess = Some(effective_sample_size(xs).map_err(named)?);
    }
    Ok(summary)
}

/// Per-column summaries of row-major draws.
pub fn summarize_draws(draws: &[Vec<f64>], names: &[String]) -> Result<ChainSummary, DiagError> {
    let width = draws.first().ok_or(DiagError::EmptyChain)?.len();
    if names.len() != width {
        return Err(DiagError::NamesMismatch {
            expected: width,
            got: names.len(),
        });
    }
    if let Some((row, r)) = draws.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(DiagError::RaggedRow {
            row,
            expected: width,
            got: r.len(),
        });
    }
    let params = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let column: Vec<f64> = draws.iter().map(|r| r[j]).collect();
            summarize_column(name, &column)
        })
        .collect::<Result<_, _>>()?;
    Ok(ChainSummary { params })
}

pub fn summarize(chain: &Chain, names: &[String]) -> Result<ChainSummary, DiagError> {
    summarize_draws(&chain.draws, names)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `counts.len() + 1` bin edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub const MAX_BINS: usize = 1000;

/// Histogram with Freedman–Diaconis bin width `2 · IQR · n^(-1/3)`.
pub fn histogram(xs: &[f64]) -> Result<Histogram, DiagError> {
    if xs.is_empty() {
        return Err(DiagError::EmptyChain);
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let width = 2.0 * iqr * (xs.len() as f64).powf(-1.0 / 3.0);
    let bins = if hi > lo && width > 0.0 {
        (((hi - lo) / width).ceil() as usize).clamp(1, MAX_BINS)
    } else {
        1
    };
    let step = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + i as f64 * step })
        .collect();
    let mut counts = vec![0; bins];
    for &x in xs {
        let k = if step > 0.0 {
            (((x - lo) / step) as usize).min(bins - 1)
        } else {
            0
        };
        counts[k] += 1;
    }
    Ok(Histogram { edges, counts })
}
