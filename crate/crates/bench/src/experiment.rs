//! Experiment driver: problem construction, reference optimum, solver runs,
//! CSV traces, summary table and the contraction report.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use geopg_core::problem::scaled_mu;
use geopg_core::{
    solve, CompositeProblem, ElasticNetLogistic, ElasticNetLs, EvalCounters, Monitor, RootFinder,
    SolverConfig, SparseDesign, Status, Termination, Trace, TraceRecord, Variant,
};
use serde::Serialize;

use crate::libsvm::parse_libsvm;
use crate::synthetic::{generate_logistic, generate_ls, SyntheticSpec};
use crate::trace_csv::write_trace;

/// Relative slack allowed on each contraction step.
pub const RATE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Ls,
    Logistic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Libsvm(PathBuf),
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MuRule {
    Absolute(Vec<f64>),
    /// `μ = c·‖Aᵀb‖∞/p` for each `c`.
    Scaled(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    RelGap,
    GradMap,
}

/// Per-solver settings that replace the experiment-wide ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverride {
    pub t0: Option<f64>,
    pub memory: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub rootfinder: Option<RootFinder>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub problem: ProblemKind,
    pub data: DataSource,
    pub alpha: f64,
    pub mu: MuRule,
    pub solvers: Vec<Variant>,
    /// Step for the backtracking variants. The fixed-step variants use
    /// `1/β` from power iteration unless overridden.
    pub t0: f64,
    pub eta: f64,
    pub gamma: f64,
    pub memory: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub criterion: Criterion,
    pub rootfinder: RootFinder,
    pub overrides: HashMap<Variant, ConfigOverride>,
    pub reference: ReferenceBudget,
    pub out_dir: PathBuf,
}

impl ExperimentSpec {
    pub fn new(problem: ProblemKind, data: DataSource, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            problem,
            data,
            alpha: 1e-8,
            mu: MuRule::Scaled(vec![1e-3, 1e-4, 1e-5]),
            solvers: vec![Variant::GeoPgB, Variant::ApgB],
            t0: 1.0,
            eta: 0.5,
            gamma: 0.9,
            memory: 5,
            tol: 1e-8,
            max_iter: 100_000,
            criterion: Criterion::RelGap,
            rootfinder: RootFinder::Ssn,
            overrides: HashMap::new(),
            reference: ReferenceBudget::default(),
            out_dir: out_dir.into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() {
            bail!("at least one solver is required");
        }
        let mus = match &self.mu {
            MuRule::Absolute(v) | MuRule::Scaled(v) => v,
        };
        if mus.is_empty() {
            bail!("at least one mu value is required");
        }
        Ok(())
    }
}

/// Either elastic-net problem behind one type.
#[derive(Debug, Clone)]
pub enum Problem {
    Ls(ElasticNetLs),
    Logistic(ElasticNetLogistic),
}

impl Problem {
    /// Builds the problem and stores its power-iteration estimate of `β`.
    pub fn build(kind: ProblemKind, design: SparseDesign, alpha: f64, mu: f64) -> Result<Self> {
        Ok(match kind {
            ProblemKind::Ls => Problem::Ls(ElasticNetLs::new(design, alpha, mu)?.with_estimated_beta()),
            ProblemKind::Logistic => {
                Problem::Logistic(ElasticNetLogistic::new(design, alpha, mu)?.with_estimated_beta())
            }
        })
    }

    fn inner(&self) -> &dyn CompositeProblem {
        match self {
            Problem::Ls(p) => p,
            Problem::Logistic(p) => p,
        }
    }
}

impl CompositeProblem for Problem {
    fn dim(&self) -> usize {
        self.inner().dim()
    }
    fn alpha(&self) -> f64 {
        self.inner().alpha()
    }
    fn beta(&self) -> Option<f64> {
        self.inner().beta()
    }
    fn f_value(&self, x: &[f64], c: &mut EvalCounters) -> f64 {
        self.inner().f_value(x, c)
    }
    fn grad(&self, x: &[f64], c: &mut EvalCounters) -> Vec<f64> {
        self.inner().grad(x, c)
    }
    fn hess_vec(&self, x: &[f64], v: &[f64], c: &mut EvalCounters) -> Option<Vec<f64>> {
        self.inner().hess_vec(x, v, c)
    }
    fn h_value(&self, x: &[f64]) -> f64 {
        self.inner().h_value(x)
    }
    fn prox_h(&self, v: &[f64], t: f64, c: &mut EvalCounters) -> Vec<f64> {
        self.inner().prox_h(v, t, c)
    }
    fn prox_jacobian_diag(&self, v: &[f64], t: f64) -> Vec<f64> {
        self.inner().prox_jacobian_diag(v, t)
    }
}

/// Wall clock started at construction.
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        Self(Instant::now())
    }
}

impl Monitor for WallClock {
    fn elapsed_secs(&mut self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceBudget {
    pub max_iter: usize,
    pub gradmap_tol: f64,
}

impl Default for ReferenceBudget {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            gradmap_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reference {
    pub f_star: f64,
    pub x_star: Vec<f64>,
    /// Some solver met the gradient-mapping floor; otherwise the values are
    /// best effort.
    pub reached: bool,
    pub apg_f: f64,
    pub geopg_f: f64,
}

/// Runs APG-B and GeoPG-B to a tight gradient-mapping tolerance from the
/// origin and keeps the smaller objective value.
pub fn compute_reference_fstar<P: CompositeProblem + ?Sized>(
    problem: &P,
    budget: ReferenceBudget,
) -> Result<Reference> {
    let x0 = vec![0.0; problem.dim()];
    let run = |variant| -> Result<Trace> {
        let cfg = SolverConfig {
            tol: budget.gradmap_tol,
            max_iter: budget.max_iter,
            termination: Termination::GradMap,
            ..SolverConfig::new(variant)
        };
        solve(problem, &cfg, &x0, &mut ()).with_context(|| format!("reference run of {variant}"))
    };
    let apg = run(Variant::ApgB)?;
    let geo = run(Variant::GeoPgB)?;
    let reached = apg.status == Status::Converged || geo.status == Status::Converged;
    let (f_star, x_star) = if apg.best_f <= geo.best_f {
        (apg.best_f, apg.best_x.clone())
    } else {
        (geo.best_f, geo.best_x.clone())
    };
    Ok(Reference {
        f_star,
        x_star,
        reached,
        apg_f: apg.best_f,
        geopg_f: geo.best_f,
    })
}

/// Contraction check `R_k² ≤ (1 − √(α t_k))·R_{k−1}²·(1 + 1e−10)` over a
/// trace. APG-B traces carry no radii and are vacuously fine.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCheck {
    pub solver: String,
    pub mu: f64,
    pub checked: usize,
    pub violations: usize,
    /// Largest `R_k² / ((1 − √(α t_k)) R_{k−1}²)`.
    pub worst_ratio: f64,
}

impl RateCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

pub fn check_contraction(records: &[TraceRecord], alpha: f64) -> (usize, usize, f64) {
    let mut checked = 0;
    let mut violations = 0;
    let mut worst = 0.0f64;
    for w in records.windows(2) {
        let (Some(prev), Some(cur), Some(t)) = (w[0].r_sq, w[1].r_sq, w[1].t_k) else {
            continue;
        };
        let bound = (1.0 - (alpha * t).sqrt()) * prev;
        checked += 1;
        if cur > bound * (1.0 + RATE_SLACK) {
            violations += 1;
        }
        if bound > 0.0 {
            worst = worst.max(cur / bound);
        }
    }
    (checked, violations, worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub solver: String,
    pub mu: f64,
    pub mu_scale: Option<f64>,
    pub iter: usize,
    pub cpu: f64,
    pub f_ev: u64,
    pub g_ev: u64,
    pub p_ev: u64,
    pub mvm: u64,
    pub final_f: f64,
    /// Spread `max − min` of the final objective across solvers at this `μ`.
    pub f_diff: f64,
    pub status: &'static str,
    pub t_min: f64,
    pub newton_steps: usize,
    pub csv: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceSummary {
    pub mu: f64,
    pub f_star: f64,
    pub reached: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Parameters {
    pub problem: ProblemKind,
    pub p: usize,
    pub n: usize,
    pub alpha: f64,
    pub t0: f64,
    pub eta: f64,
    pub gamma: f64,
    pub memory: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub criterion: Criterion,
    pub rootfinder: &'static str,
    pub reference: ReferenceBudget,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub parameters: Parameters,
    pub references: Vec<ReferenceSummary>,
    pub cells: Vec<CellSummary>,
    pub rates: Vec<RateCheck>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn rates_ok(&self) -> bool {
        self.rates.iter().all(RateCheck::passed)
    }

    /// Plain-text table with the columns iter, cpu, f-ev, g-ev, p-ev, MVM
    /// and f-diff.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<10} {:>10} {:>8} {:>10} {:>8} {:>8} {:>8} {:>9} {:>10}  {}",
            "solver", "mu", "iter", "cpu", "f-ev", "g-ev", "p-ev", "MVM", "f-diff", "status"
        );
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{:<10} {:>10.3e} {:>8} {:>10.3} {:>8} {:>8} {:>8} {:>9} {:>10.2e}  {}",
                c.solver, c.mu, c.iter, c.cpu, c.f_ev, c.g_ev, c.p_ev, c.mvm, c.f_diff, c.status
            );
        }
        s
    }
}

pub fn load_design(kind: ProblemKind, data: &DataSource) -> Result<SparseDesign> {
    Ok(match data {
        DataSource::Libsvm(path) => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            parse_libsvm(BufReader::new(f), None).with_context(|| format!("parsing {}", path.display()))?
        }
        DataSource::Synthetic(spec) => match kind {
            ProblemKind::Ls => generate_ls(spec).design,
            ProblemKind::Logistic => generate_logistic(spec).design,
        },
    })
}

fn config_for(spec: &ExperimentSpec, variant: Variant, problem: &Problem, termination: Termination) -> SolverConfig {
    let ov = spec.overrides.get(&variant).cloned().unwrap_or_default();
    let fixed_step = problem.beta().map_or(spec.t0, |b| 1.0 / b);
    SolverConfig {
        variant,
        t0: ov.t0.unwrap_or(if variant.backtracking() { spec.t0 } else { fixed_step }),
        eta: spec.eta,
        gamma: spec.gamma,
        memory: ov.memory.unwrap_or(match variant {
            Variant::LGeoPg | Variant::LGeoPgB => spec.memory,
            _ => 0,
        }),
        tol: ov.tol.unwrap_or(spec.tol),
        max_iter: ov.max_iter.unwrap_or(spec.max_iter),
        termination,
        rootfinder: ov.rootfinder.unwrap_or(spec.rootfinder),
        ..SolverConfig::new(variant)
    }
}

fn csv_name(variant: Variant, mu: f64) -> String {
    format!("{}_mu{:.4e}.csv", variant.name(), mu)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    fs::create_dir_all(&spec.out_dir).with_context(|| format!("creating {}", spec.out_dir.display()))?;
    let design = load_design(spec.problem, &spec.data)?;
    let (p, n) = (design.rows(), design.cols());
    let mus: Vec<(f64, Option<f64>)> = match &spec.mu {
        MuRule::Absolute(v) => v.iter().map(|&m| (m, None)).collect(),
        MuRule::Scaled(v) => v.iter().map(|&c| (scaled_mu(&design, c), Some(c))).collect(),
    };

    let mut references = Vec::new();
    let mut cells = Vec::new();
    let mut rates = Vec::new();
    let mut warnings = Vec::new();
    for &(mu, mu_scale) in &mus {
        let problem = Problem::build(spec.problem, design.clone(), spec.alpha, mu)?;
        let termination = match spec.criterion {
            Criterion::GradMap => Termination::GradMap,
            Criterion::RelGap => {
                let r = compute_reference_fstar(&problem, spec.reference)?;
                if !r.reached {
                    warnings.push(format!(
                        "mu={mu:e}: reference solves did not reach the gradient-mapping floor, F* is best effort"
                    ));
                }
                references.push(ReferenceSummary {
                    mu,
                    f_star: r.f_star,
                    reached: r.reached,
                });
                Termination::RelGap { f_star: r.f_star }
            }
        };
        let x0 = vec![0.0; n];
        let first = cells.len();
        for &variant in &spec.solvers {
            let cfg = config_for(spec, variant, &problem, termination);
            let mut clock = WallClock::start();
            let trace = solve(&problem, &cfg, &x0, &mut clock)
                .with_context(|| format!("{variant} at mu={mu:e}"))?;
            let cpu = clock.elapsed_secs();
            let name = csv_name(variant, mu);
            let path = spec.out_dir.join(&name);
            let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_trace(&trace.records, file).with_context(|| format!("writing {}", path.display()))?;
            if trace.status == Status::MaxIter {
                warnings.push(format!("{variant} at mu={mu:e} hit the iteration limit"));
            }
            let (checked, violations, worst_ratio) = check_contraction(&trace.records, spec.alpha);
            rates.push(RateCheck {
                solver: variant.name().into(),
                mu,
                checked,
                violations,
                worst_ratio,
            });
            cells.push(CellSummary {
                solver: variant.name().into(),
                mu,
                mu_scale,
                iter: trace.iterations(),
                cpu,
                f_ev: trace.counters.f_ev,
                g_ev: trace.counters.g_ev,
                p_ev: trace.counters.p_ev,
                mvm: trace.counters.mvm,
                final_f: trace.f,
                f_diff: 0.0,
                status: trace.status.as_str(),
                t_min: trace.t_min,
                newton_steps: trace.newton_steps,
                csv: name,
            });
        }
        let group = &mut cells[first..];
        let hi = group.iter().map(|c| c.final_f).fold(f64::NEG_INFINITY, f64::max);
        let lo = group.iter().map(|c| c.final_f).fold(f64::INFINITY, f64::min);
        group.iter_mut().for_each(|c| c.f_diff = hi - lo);
    }

    let report = ExperimentReport {
        parameters: Parameters {
            problem: spec.problem,
            p,
            n,
            alpha: spec.alpha,
            t0: spec.t0,
            eta: spec.eta,
            gamma: spec.gamma,
            memory: spec.memory,
            tol: spec.tol,
            max_iter: spec.max_iter,
            criterion: spec.criterion,
            rootfinder: match spec.rootfinder {
                RootFinder::Brent => "brent",
                RootFinder::Ssn => "ssn",
            },
            reference: spec.reference,
        },
        references,
        cells,
        rates,
        warnings,
    };
    write_summary(&report, &spec.out_dir)?;
    Ok(report)
}

fn write_summary(report: &ExperimentReport, dir: &Path) -> Result<()> {
    let json = dir.join("summary.json");
    let f = File::create(&json).with_context(|| format!("creating {}", json.display()))?;
    serde_json::to_writer_pretty(f, report)?;
    let txt = dir.join("summary.txt");
    fs::write(&txt, report.table()).with_context(|| format!("writing {}", txt.display()))?;
    Ok(())
}
