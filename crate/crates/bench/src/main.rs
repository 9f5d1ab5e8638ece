use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, ValueEnum};
use geopg_bench::experiment::{Criterion, DataSource, ExperimentSpec, MuRule, ProblemKind};
use geopg_bench::{run_experiment, SyntheticSpec};
use geopg_core::{RootFinder, Variant};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProblemArg {
    Ls,
    Logistic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CriterionArg {
    Relgap,
    Gradmap,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RootArg {
    Brent,
    Ssn,
}

/// Runs geometric proximal gradient solvers against an accelerated
/// baseline on elastic-net problems and writes per-iteration traces.
#[derive(Debug, Parser)]
#[command(name = "geopg-bench", version)]
struct Cli {
    #[arg(long, value_enum, default_value = "ls")]
    problem: ProblemArg,
    /// LIBSVM file.
    #[arg(long, conflicts_with = "synthetic")]
    data: Option<PathBuf>,
    /// Synthetic instance `p,n[,seed]`.
    #[arg(long)]
    synthetic: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    alpha: f64,
    /// Absolute ℓ1 weights, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "mu_scale")]
    mu: Option<Vec<f64>>,
    /// ℓ1 weights as multiples of ‖Aᵀb‖∞/p.
    #[arg(long, value_delimiter = ',')]
    mu_scale: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "geopg-b,apg-b")]
    solver: Vec<String>,
    #[arg(long, default_value_t = 5)]
    memory: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    #[arg(long, value_enum, default_value = "relgap")]
    criterion: CriterionArg,
    #[arg(long, value_enum, default_value = "ssn")]
    rootfinder: RootArg,
    #[arg(long, default_value_t = 1.0)]
    t0: f64,
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Seed for synthetic data when `--synthetic` omits one.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn parse_synthetic(s: &str, seed: u64) -> Result<SyntheticSpec> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let (p, n, seed) = match parts.as_slice() {
        [p, n] => (p.parse()?, n.parse()?, seed),
        [p, n, s] => (p.parse()?, n.parse()?, s.parse()?),
        _ => bail!("--synthetic expects p,n or p,n,seed"),
    };
    if p == 0 || n == 0 {
        bail!("--synthetic sizes must be positive");
    }
    Ok(SyntheticSpec::new(p, n, seed))
}

fn build_spec(cli: Cli) -> Result<ExperimentSpec> {
    let kind = match cli.problem {
        ProblemArg::Ls => ProblemKind::Ls,
        ProblemArg::Logistic => ProblemKind::Logistic,
    };
    let data = match (cli.data, cli.synthetic) {
        (Some(path), None) => DataSource::Libsvm(path),
        (None, Some(s)) => DataSource::Synthetic(parse_synthetic(&s, cli.seed)?),
        (None, None) => bail!("one of --data or --synthetic is required"),
        (Some(_), Some(_)) => bail!("--data and --synthetic are mutually exclusive"),
    };
    let solvers = cli
        .solver
        .iter()
        .map(|s| s.parse::<Variant>())
        .collect::<Result<Vec<_>, _>>()?;
    let mut spec = ExperimentSpec::new(kind, data, cli.out);
    spec.alpha = cli.alpha;
    if let Some(mu) = cli.mu {
        spec.mu = MuRule::Absolute(mu);
    } else if let Some(scale) = cli.mu_scale {
        spec.mu = MuRule::Scaled(scale);
    }
    spec.solvers = solvers;
    spec.memory = cli.memory;
    spec.tol = cli.tol;
    spec.max_iter = cli.max_iter;
    spec.criterion = match cli.criterion {
        CriterionArg::Relgap => Criterion::RelGap,
        CriterionArg::Gradmap => Criterion::GradMap,
    };
    spec.rootfinder = match cli.rootfinder {
        RootArg::Brent => RootFinder::Brent,
        RootArg::Ssn => RootFinder::Ssn,
    };
    spec.t0 = cli.t0;
    spec.eta = cli.eta;
    spec.gamma = cli.gamma;
    Ok(spec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_spec(cli).and_then(|spec| run_experiment(&spec));
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    print!("{}", report.table());
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let mut ok = true;
    for r in &report.rates {
        if r.checked == 0 {
            continue;
        }
        let verdict = if r.passed() { "ok" } else { "FAILED" };
        println!(
            "rate {:<10} mu={:.3e}: {} steps checked, {} violations, worst ratio {:.6} [{verdict}]",
            r.solver, r.mu, r.checked, r.violations, r.worst_ratio
        );
        ok &= r.passed();
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: contraction check failed");
        ExitCode::FAILURE
    }
}
