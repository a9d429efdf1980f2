//! The three subcommands as library functions. Files are written only once
//! every result they depend on has been computed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use funprob::diagnostics::{
    describe, histogram, summarize_column, summarize_draws, DiagError, ParamSummary,
};
use funprob::hmc::{sample, sample_chains, Chain, HmcConfig, InitStrategy};

use crate::data::{format_real, read_table, write_csv};
use crate::models::{build, load, ModelKind};
use crate::simulate::{simulate, Simulated};
use crate::CliError;

pub const SUMMARY_HEADER: [&str; 10] = [
    "parameter",
    "n",
    "mean",
    "sd",
    "q2.5",
    "q25",
    "q50",
    "q75",
    "q97.5",
    "ess",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub model: ModelKind,
    pub data: PathBuf,
    pub warmup: usize,
    pub iters: usize,
    pub thin: usize,
    pub leapfrog_steps: usize,
    pub seed: u64,
    pub chains: usize,
    pub prior_sd: f64,
    /// Model default when `None`.
    pub init: Option<InitStrategy>,
    pub out: PathBuf,
}

impl FitOptions {
    pub fn new(model: ModelKind, data: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        let d = HmcConfig::default();
        FitOptions {
            model,
            data: data.into(),
            warmup: d.warmup_iters,
            iters: d.sample_iters,
            thin: d.thin,
            leapfrog_steps: d.leapfrog_steps,
            seed: d.seed,
            chains: 1,
            prior_sd: 10.0,
            init: None,
            out: out.into(),
        }
    }

    pub fn hmc_config(&self) -> HmcConfig {
        HmcConfig {
            leapfrog_steps: self.leapfrog_steps,
            warmup_iters: self.warmup,
            sample_iters: self.iters,
            thin: self.thin,
            seed: self.seed,
            init: self
                .init
                .clone()
                .unwrap_or_else(|| self.model.default_init()),
            ..HmcConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutput {
    pub chains: Vec<Chain>,
    pub summaries: Vec<Vec<ParamSummary>>,
    pub files: Vec<PathBuf>,
}

pub fn simulate_to(
    kind: ModelKind,
    overrides: &[(String, f64)],
    n: usize,
    seed: u64,
    out: &Path,
) -> Result<Simulated, CliError> {
    let sim = simulate(kind, overrides, n, seed)?;
    write_csv(out, &sim.header, &sim.rows)?;
    Ok(sim)
}

/// Summary that tolerates a constant column: moments are still reported and
/// `ess` is left empty.
fn lenient_summary(name: &str, xs: &[f64]) -> Result<ParamSummary, DiagError> {
    match summarize_column(name, xs) {
        Err(DiagError::DegenerateColumn { .. } | DiagError::TooShort { .. }) => describe(name, xs),
        other => other,
    }
}

pub fn fit(opts: &FitOptions) -> Result<FitOutput, CliError> {
    if opts.chains == 0 {
        return Err(CliError::Usage("--chains must be at least 1".into()));
    }
    if !(opts.prior_sd > 0.0 && opts.prior_sd.is_finite()) {
        return Err(CliError::Usage(format!(
            "--prior-sd must be positive, got {}",
            opts.prior_sd
        )));
    }
    let cfg = opts.hmc_config();
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if cfg.sample_iters < cfg.thin {
        return Err(CliError::Usage(format!(
            "--iters {} keeps no draws with --thin {}",
            cfg.sample_iters, cfg.thin
        )));
    }

    let table = read_table(&opts.data)?;
    let dataset = load(opts.model, &table)?;
    let model = build(&dataset, opts.prior_sd)
        .and_then(|m| m.compile_named())
        .map_err(|e| CliError::Inference(e.to_string()))?;
    let chains = if opts.chains == 1 {
        vec![sample(&model, &cfg).map_err(|e| CliError::Inference(e.to_string()))?]
    } else {
        sample_chains(&model, &cfg, opts.chains).map_err(|e| CliError::Inference(e.to_string()))?
    };

    let summaries = chains
        .iter()
        .map(|chain| {
            (0..chain.columns.len())
                .map(|j| lenient_summary(&chain.columns[j], &chain.column(j)))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Diagnostics(e.to_string()))?;

    fs::create_dir_all(&opts.out).map_err(|e| CliError::io(&opts.out, e))?;
    let mut files = Vec::new();
    for (i, (chain, summary)) in chains.iter().zip(&summaries).enumerate() {
        let suffix = if chains.len() == 1 {
            String::new()
        } else {
            format!("_chain{i}")
        };
        let draws_path = opts.out.join(format!("draws{suffix}.csv"));
        let rows: Vec<Vec<String>> = chain
            .draws
            .iter()
            .map(|r| r.iter().map(|&x| format_real(x)).collect())
            .collect();
        write_csv(&draws_path, &chain.columns, &rows)?;
        let summary_path = opts.out.join(format!("summary{suffix}.csv"));
        write_summary(&summary_path, summary)?;
        files.push(draws_path);
        files.push(summary_path);
    }
    Ok(FitOutput {
        chains,
        summaries,
        files,
    })
}

fn summary_rows(summary: &[ParamSummary]) -> Vec<Vec<String>> {
    summary
        .iter()
        .map(|p| {
            let mut row = vec![
                p.name.clone(),
                p.n.to_string(),
                format_real(p.mean),
                format_real(p.sd),
            ];
            row.extend(p.quantiles.iter().map(|&q| format_real(q)));
            row.push(p.ess.map(format_real).unwrap_or_default());
            row
        })
        .collect()
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn write_summary(path: &Path, summary: &[ParamSummary]) -> Result<(), CliError> {
    write_csv(path, &strings(&SUMMARY_HEADER), &summary_rows(summary))
}

/// Sibling paths `{stem}_hist.csv` and `{stem}_acf.csv` of a summary file.
pub fn companion_paths(out: &Path) -> (PathBuf, PathBuf) {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    (
        out.with_file_name(format!("{stem}_hist.csv")),
        out.with_file_name(format!("{stem}_acf.csv")),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnoseOutput {
    pub summary: Vec<ParamSummary>,
    pub files: Vec<PathBuf>,
}

/// Summary, histogram and autocorrelation tables for a draws file.
pub fn diagnose(draws: &Path, out: &Path) -> Result<DiagnoseOutput, CliError> {
    let table = read_table(draws)?;
    if table.is_empty() {
        return Err(table.parse_error(1, "no draws to summarise"));
    }
    let summary = summarize_draws(&table.rows, &table.header)
        .map_err(|e| CliError::Diagnostics(e.to_string()))?
        .params;

    let mut hist_rows = Vec::new();
    let mut acf_rows = Vec::new();
    for (j, p) in summary.iter().enumerate() {
        let column: Vec<f64> = table.rows.iter().map(|r| r[j]).collect();
        let h = histogram(&column).map_err(|e| CliError::Diagnostics(e.to_string()))?;
        for (b, count) in h.counts.iter().enumerate() {
            hist_rows.push(vec![
                p.name.clone(),
                b.to_string(),
                format_real(h.edges[b]),
                format_real(h.edges[b + 1]),
                count.to_string(),
            ]);
        }
        for (lag, rho) in p.acf.iter().enumerate() {
            acf_rows.push(vec![p.name.clone(), lag.to_string(), format_real(*rho)]);
        }
    }

    let (hist_path, acf_path) = companion_paths(out);
    write_summary(out, &summary)?;
    write_csv(
        &hist_path,
        &strings(&["parameter", "bin", "lower", "upper", "count"]),
        &hist_rows,
    )?;
    write_csv(&acf_path, &strings(&["parameter", "lag", "acf"]), &acf_rows)?;
    Ok(DiagnoseOutput {
        summary,
        files: vec![out.to_path_buf(), hist_path, acf_path],
    })
}

/// Fixed-width table for the terminal.
pub fn render_summary(summary: &[ParamSummary]) -> String {
    let width = summary
        .iter()
        .map(|p| p.name.len())
        .max()
        .unwrap_or(0)
        .max(9);
    let mut s = format!(
        "{:<width$} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
        "parameter", "mean", "sd", "2.5%", "50%", "97.5%", "ess"
    );
    for p in summary {
        let ess = p
            .ess
            .map(|e| format!("{e:.0}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:<width$} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10}",
            p.name, p.mean, p.sd, p.quantiles[0], p.quantiles[2], p.quantiles[4], ess
        );
    }
    s
}
