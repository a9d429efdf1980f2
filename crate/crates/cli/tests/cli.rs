use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use funprob::rng::std_normal;
use funprob_cli::data::{format_real, read_table};
use funprob_cli::simulate::simulate;
use funprob_cli::ModelKind;

fn funprob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_funprob"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = funprob(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let t = read_table(path).unwrap();
    let j = t.header.iter().position(|h| h == name).unwrap();
    t.rows.iter().map(|r| r[j]).collect()
}

fn summary_value(path: &Path, param: &str, field: &str) -> f64 {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let j = header.iter().position(|h| *h == field).unwrap();
    let row = lines.find(|l| l.split(',').next() == Some(param)).unwrap();
    row.split(',').nth(j).unwrap().parse().unwrap()
}

#[test]
fn simulated_lm_outcome_mean() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("lm.csv");
    ok(&[
        "simulate",
        "lm",
        "--n",
        "1000",
        "--seed",
        "4",
        "--out",
        s(&data),
    ]);
    let ys = column(&data, "y");
    assert_eq!(ys.len(), 1000);
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let sd = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((mean - 4.0).abs() < 3.0 * sd / n.sqrt(), "mean {mean}");
}

#[test]
fn simulated_mixture_proportions() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("mix.csv");
    ok(&["simulate", "mixture", "--n", "10000", "--out", s(&data)]);
    let comps = column(&data, "component");
    for (k, theta) in [(1.0, 0.3), (2.0, 0.2), (3.0, 0.5)] {
        let share = comps.iter().filter(|&&c| c == k).count() as f64 / comps.len() as f64;
        assert!((share - theta).abs() < 0.02, "component {k}: {share}");
    }
}

#[test]
fn single_row_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("one.csv");
    ok(&["simulate", "lm", "--n", "1", "--out", s(&data)]);
    let text = fs::read_to_string(&data).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "x,y");
    assert_eq!(lines[1].split(',').count(), 2);
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    for kind in [
        ModelKind::Lm,
        ModelKind::LmPoisson,
        ModelKind::Mixture,
        ModelKind::Randeffects,
        ModelKind::Coin,
    ] {
        let path = dir.path().join(format!("{kind}.csv"));
        ok(&[
            "simulate",
            &kind.to_string(),
            "--n",
            "50",
            "--seed",
            "9",
            "--out",
            s(&path),
        ]);
        let sim = simulate(kind, &[], 50, 9).unwrap();
        let table = read_table(&path).unwrap();
        assert_eq!(table.header, sim.header);
        for (row, expected) in table.rows.iter().zip(&sim.rows) {
            let expected: Vec<f64> = expected.iter().map(|c| c.parse().unwrap()).collect();
            assert_eq!(row, &expected);
            let rewritten: Vec<f64> = row
                .iter()
                .map(|&x| format_real(x).parse().unwrap())
                .collect();
            assert_eq!(&rewritten, row);
        }
    }
}

#[test]
fn parameter_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("c.csv");
    ok(&[
        "simulate",
        "coin",
        "--n",
        "5",
        "--params",
        "p=1,trials=7",
        "--out",
        s(&data),
    ]);
    assert!(column(&data, "successes").iter().all(|&k| k == 7.0));
    let bad = funprob(&["simulate", "coin", "--params", "q=1", "--out", s(&data)]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("unknown parameter q"));
}

#[test]
fn coin_posterior_mean() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("coin.csv");
    fs::write(&data, "trials,successes\n10,6\n").unwrap();
    let out = dir.path().join("fit");
    ok(&[
        "fit",
        "coin",
        "--data",
        s(&data),
        "--warmup",
        "1000",
        "--iters",
        "10000",
        "--out",
        s(&out),
    ]);
    let mean = summary_value(&out.join("summary.csv"), "p", "mean");
    // Conjugate posterior Beta(9, 7) has mean 9/16.
    assert!((0.5..=0.62).contains(&mean), "posterior mean {mean}");
}

#[test]
fn lm_recovers_truth() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("lm.csv");
    ok(&[
        "simulate",
        "lm",
        "--n",
        "300",
        "--seed",
        "2",
        "--out",
        s(&data),
    ]);
    let out = dir.path().join("fit");
    ok(&[
        "fit",
        "lm",
        "--data",
        s(&data),
        "--warmup",
        "1000",
        "--iters",
        "5000",
        "--out",
        s(&out),
    ]);
    let summary = out.join("summary.csv");
    for (name, truth) in [("alpha", 4.0), ("beta", -1.5), ("sigma", 0.5)] {
        let mean = summary_value(&summary, name, "mean");
        let sd = summary_value(&summary, name, "sd");
        assert!((mean - truth).abs() < 3.0 * sd, "{name}: {mean} ± {sd}");
    }
    let header = fs::read_to_string(out.join("draws.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap(), "sigma,alpha,beta");
    assert_eq!(header.lines().count(), 1 + 1000);
}

#[test]
fn missing_data_file_exits_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit");
    let missing = dir.path().join("nope.csv");
    let res = funprob(&["fit", "lm", "--data", s(&missing), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("nope.csv"));
    assert!(!out.exists());
}

#[test]
fn parse_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    fs::write(&data, "x,y\n1,2\n0.5,abc\n").unwrap();
    let out = dir.path().join("fit");
    let res = funprob(&["fit", "lm", "--data", s(&data), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("bad.csv:3:"), "{err}");
    assert!(!out.exists());

    fs::write(&data, "y\n1\n").unwrap();
    let res = funprob(&["fit", "lm", "--data", s(&data), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("missing column x"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        funprob(&["simulate", "glm", "--out", "x.csv"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        funprob(&["fit", "lm", "--data", "d.csv", "--out", "o", "--thin", "two"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        funprob(&["fit", "lm", "--data", "d.csv", "--out", "o", "--warmup", "-1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(funprob(&[]).status.code(), Some(2));
}

#[test]
fn initialisation_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("counts.csv");
    // exp(a + b·1e6) overflows or underflows for essentially every prior draw.
    fs::write(&data, "x,y\n1e6,1\n-1e6,2\n").unwrap();
    let out = dir.path().join("fit");
    let res = funprob(&[
        "fit",
        "lm_poisson",
        "--data",
        s(&data),
        "--warmup",
        "10",
        "--iters",
        "10",
        "--out",
        s(&out),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("inference failed"));
    assert!(!out.exists());
}

#[test]
fn fit_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("re.csv");
    ok(&[
        "simulate",
        "randeffects",
        "--n",
        "5",
        "--params",
        "classes=3",
        "--out",
        s(&data),
    ]);
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "fit",
            "randeffects",
            "--data",
            s(&data),
            "--warmup",
            "200",
            "--iters",
            "500",
            "--seed",
            "3",
            "--chains",
            "2",
            "--out",
            s(&out),
        ]);
        [
            "draws_chain0.csv",
            "summary_chain0.csv",
            "draws_chain1.csv",
            "summary_chain1.csv",
        ]
        .map(|f| fs::read(out.join(f)).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    assert_ne!(a[0], a[2], "chains should differ");
    let header = String::from_utf8(a[0].clone()).unwrap();
    assert_eq!(header.lines().next().unwrap().split(',').count(), 5 + 2 * 3);
}

#[test]
fn fit_output_is_diagnosable() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("lm.csv");
    ok(&["simulate", "lm", "--n", "100", "--out", s(&data)]);
    let out = dir.path().join("fit");
    ok(&[
        "fit",
        "lm",
        "--data",
        s(&data),
        "--warmup",
        "500",
        "--iters",
        "2500",
        "--out",
        s(&out),
    ]);
    let diag = dir.path().join("diag.csv");
    ok(&[
        "diagnose",
        "--draws",
        s(&out.join("draws.csv")),
        "--out",
        s(&diag),
    ]);
    // Both paths compute the same summary from the same draws.
    assert_eq!(
        fs::read(&diag).unwrap(),
        fs::read(out.join("summary.csv")).unwrap()
    );
    let hist = fs::read_to_string(dir.path().join("diag_hist.csv")).unwrap();
    assert_eq!(
        hist.lines().next().unwrap(),
        "parameter,bin,lower,upper,count"
    );
    let alpha_total: usize = hist
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("alpha,"))
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(alpha_total, 500);
    let acf = fs::read_to_string(dir.path().join("diag_acf.csv")).unwrap();
    assert!(acf.lines().any(|l| l == "sigma,0,1.0"));
}

#[test]
fn constant_column_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let draws = dir.path().join("draws.csv");
    fs::write(&draws, "a,stuck\n1.0,2.0\n2.5,2.0\n0.3,2.0\n1.1,2.0\n").unwrap();
    let out = dir.path().join("summary.csv");
    let res = funprob(&["diagnose", "--draws", s(&draws), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("column stuck is constant"));
    assert!(!out.exists());
}

#[test]
fn empty_draws_are_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let draws = dir.path().join("draws.csv");
    fs::write(&draws, "a,b\n").unwrap();
    let res = funprob(&[
        "diagnose",
        "--draws",
        s(&draws),
        "--out",
        s(&dir.path().join("o.csv")),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("no draws"));
}

#[test]
fn iid_draws_have_full_ess() {
    let dir = tempfile::tempdir().unwrap();
    let draws = dir.path().join("iid.csv");
    let n = 10_000;
    let xs = std_normal().replicate(n).sample(21);
    let body: String = xs
        .iter()
        .map(|x| format!("{}\n", format_real(*x)))
        .collect();
    fs::write(&draws, format!("z\n{body}")).unwrap();
    let out = dir.path().join("s.csv");
    ok(&["diagnose", "--draws", s(&draws), "--out", s(&out)]);
    let ess = summary_value(&out, "z", "ess");
    let ratio = ess / n as f64;
    assert!((0.8..=1.2).contains(&ratio), "ess/n {ratio}");
}
