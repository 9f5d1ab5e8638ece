//! GeoPG, GeoPG with backtracking, limited-memory GeoPG and an accelerated
//! proximal gradient baseline.
//!
//! Every run owns its [`EvalCounters`] and returns a [`Trace`]. Timing is
//! supplied by a [`Monitor`] so the crate stays clock-free.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::geometry::{min_enclosing_two_balls, rcc_dual_solve_warm, Ball, GeometryError};
use crate::problem::{prox_grad_step, sufficient_decrease, CompositeProblem, Iterate, ProblemError};
use crate::rootfind::{find_xk_brent, find_xk_ssn, LineProbe, LineRoot, RootCase, RootFindError, DEFAULT_ROOT_TOL};
use crate::sparse::EvalCounters;
use crate::vecops;

/// Growth cap for backtracking step sizes, relative to `t0`.
pub const STEP_CAP: f64 = 1e6;

const MAX_SHRINKS: usize = 200;

/// Objective changes within this many ulps count as no progress.
const STALL_ULPS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    GeoPg,
    GeoPgB,
    LGeoPg,
    LGeoPgB,
    ApgB,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::GeoPg,
        Variant::GeoPgB,
        Variant::LGeoPg,
        Variant::LGeoPgB,
        Variant::ApgB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::GeoPg => "geopg",
            Variant::GeoPgB => "geopg-b",
            Variant::LGeoPg => "lgeopg",
            Variant::LGeoPgB => "lgeopg-b",
            Variant::ApgB => "apg-b",
        }
    }

    pub fn backtracking(self) -> bool {
        matches!(self, Variant::GeoPgB | Variant::LGeoPgB | Variant::ApgB)
    }

    /// Whether the run maintains a ball `B(c_k, R_k²)`.
    pub fn has_ball(self) -> bool {
        !matches!(self, Variant::ApgB)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown solver `{0}`")]
pub struct UnknownVariant(pub alloc::string::String);

impl FromStr for Variant {
    type Err = UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| UnknownVariant(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// `(F(x_k⁺) − F*)/|F*| ≤ tol` (denominator 1 when `F* = 0`).
    RelGap { f_star: f64 },
    /// `‖G_t(x_k⁺)‖∞ ≤ tol`.
    GradMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootFinder {
    Brent,
    Ssn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub variant: Variant,
    /// Initial step. For the non-backtracking variants this is the fixed
    /// step and must not exceed `1/β` when `β` is known.
    pub t0: f64,
    pub eta: f64,
    pub gamma: f64,
    /// Number of `x⁺⁺` balls kept by the limited-memory variants.
    pub memory: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub termination: Termination,
    pub rootfinder: RootFinder,
    /// Root tolerance relative to `αt‖x − c‖²`.
    pub root_tol: f64,
}

impl SolverConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            t0: 1.0,
            eta: 0.5,
            gamma: 0.9,
            memory: if matches!(variant, Variant::LGeoPg | Variant::LGeoPgB) { 5 } else { 0 },
            tol: 1e-8,
            max_iter: 100_000,
            termination: Termination::GradMap,
            rootfinder: RootFinder::Ssn,
            root_tol: DEFAULT_ROOT_TOL,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.t0 > 0.0) || !self.t0.is_finite() {
            return Err(SolverError::InvalidStep(self.t0));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(SolverError::InvalidConfig("eta must lie in (0, 1)"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(SolverError::InvalidConfig("gamma must lie in (0, 1)"));
        }
        if !(self.tol >= 0.0) {
            return Err(SolverError::InvalidConfig("tol must be non-negative"));
        }
        if !(self.root_tol > 0.0) {
            return Err(SolverError::InvalidConfig("root_tol must be positive"));
        }
        if let Termination::RelGap { f_star } = self.termination {
            if !f_star.is_finite() {
                return Err(SolverError::InvalidConfig("f_star must be finite"));
            }
        }
        if matches!(self.variant, Variant::LGeoPg | Variant::LGeoPgB) && self.memory == 0 {
            return Err(SolverError::InvalidConfig("limited-memory variants need memory >= 1"));
        }
        Ok(())
    }
}

/// One row of telemetry.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub elapsed: f64,
    /// `F(x_k⁺)`.
    pub f: f64,
    /// Present under [`Termination::RelGap`].
    pub rel_gap: Option<f64>,
    /// `‖G_{t_k}(x_k⁺)‖∞`.
    pub gmap_inf: f64,
    pub t_k: Option<f64>,
    /// `R_k²`; absent for APG-B and at geometric floor events.
    pub r_sq: Option<f64>,
    pub counters: EvalCounters,
}

/// Per-iteration state handed to a [`Monitor`].
pub struct Snapshot<'a> {
    pub x_plus: &'a [f64],
    pub center: Option<&'a [f64]>,
}

/// Observer of a running solver; also the source of elapsed time.
pub trait Monitor {
    fn elapsed_secs(&mut self) -> f64 {
        0.0
    }

    fn observe(&mut self, _record: &TraceRecord, _snapshot: &Snapshot<'_>) {}
}

impl Monitor for () {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    /// A disjoint-ball or non-positive-radius event: round-off has
    /// exhausted the geometric information.
    GeometricFloor,
    MaxIter,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::GeometricFloor => "converged-geometric-floor",
            Status::MaxIter => "max-iter",
        }
    }

    pub fn is_converged(self) -> bool {
        !matches!(self, Status::MaxIter)
    }
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub variant: Variant,
    pub records: Vec<TraceRecord>,
    /// Last `x_k⁺`.
    pub x: Vec<f64>,
    pub f: f64,
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub status: Status,
    pub counters: EvalCounters,
    /// Smallest accepted step.
    pub t_min: f64,
    pub newton_steps: usize,
}

impl Trace {
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iter)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid step size {0}")]
    InvalidStep(f64),
    #[error("fixed step {t} exceeds 1/beta = {bound}")]
    StepAboveLipschitz { t: f64, bound: f64 },
    #[error("starting point has length {got}, problem dimension is {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite objective at iteration {0}")]
    NonFinite(usize),
    #[error("backtracking failed to find an acceptable step at iteration {0}")]
    Backtracking(usize),
    #[error("line search failed at iteration {iter}: {source}")]
    RootFind { iter: usize, source: RootFindError },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

pub fn geopg_run<P: CompositeProblem + ?Sized>(
    problem: &P,
    config: &SolverConfig,
    x0: &[f64],
) -> Result<Trace, SolverError> {
    geometric(problem, config, x0, false, 0, &mut ())
}

pub fn geopg_b_run<P: CompositeProblem + ?Sized>(
    problem: &P,
    config: &SolverConfig,
    x0: &[f64],
) -> Result<Trace, SolverError> {
    geometric(problem, config, x0, true, 0, &mut ())
}

/// L-GeoPG; backtracking follows `config.variant` (`lgeopg-b` enables it).
pub fn lgeopg_run<P: CompositeProblem + ?Sized>(
    problem: &P,
    config: &SolverConfig,
    x0: &[f64],
) -> Result<Trace, SolverError> {
    if config.memory == 0 {
        return Err(SolverError::InvalidConfig("limited-memory variants need memory >= 1"));
    }
    let bt = config.variant == Variant::LGeoPgB;
    geometric(problem, config, x0, bt, config.memory, &mut ())
}

pub fn apg_b_run<P: CompositeProblem + ?Sized>(
    problem: &P,
    config: &SolverConfig,
    x0: &[f64],
) -> Result<Trace, SolverError> {
    accelerated(problem, config, x0, &mut ())
}

/// Runs `config.variant`, reporting every record to `monitor`.
pub fn solve<P: CompositeProblem + ?Sized, M: Monitor + ?Sized>(
    problem: &P,
    config: &SolverConfig,
    x0: &[f64],
    monitor: &mut M,
) -> Result<Trace, SolverError> {
    match config.variant {
        Variant::GeoPg => geometric(problem, config, x0, false, 0, monitor),
        Variant::GeoPgB => geometric(problem, config, x0, true, 0, monitor),
        Variant::LGeoPg => geometric(problem, config, x0, false, config.memory, monitor),
        Variant::LGeoPgB => geometric(problem, config, x0, true, config.memory, monitor),
        Variant::ApgB => accelerated(problem, config, x0, monitor),
    }
}

fn rel_gap(termination: Termination, f: f64) -> Option<f64> {
    match termination {
        Termination::RelGap { f_star } => {
            let denom = if f_star == 0.0 { 1.0 } else { f_star.abs() };
            Some((f - f_star) / denom)
        }
        Termination::GradMap => None,
    }
}

fn terminated(config: &SolverConfig, record: &TraceRecord) -> bool {
    meets_tolerance(config, record.rel_gap, record.gmap_inf)
}

fn meets_tolerance(config: &SolverConfig, rel_gap: Option<f64>, gmap_inf: f64) -> bool {
    match rel_gap {
        Some(gap) => gap <= config.tol,
        None => gmap_inf <= config.tol,
    }
}

struct Recorder<'m, M: ?Sized> {
    monitor: &'m mut M,
    records: Vec<TraceRecord>,
    best_f: f64,
    best_x: Vec<f64>,
}

impl<'m, M: Monitor + ?Sized> Recorder<'m, M> {
    fn new(monitor: &'m mut M) -> Self {
        Self {
            monitor,
            records: Vec::new(),
            best_f: f64::INFINITY,
            best_x: Vec::new(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        config: &SolverConfig,
        iter: usize,
        f: f64,
        gmap_inf: f64,
        t_k: Option<f64>,
        r_sq: Option<f64>,
        counters: EvalCounters,
        x_plus: &[f64],
        center: Option<&[f64]>,
    ) -> bool {
        let record = TraceRecord {
            iter,
            elapsed: self.monitor.elapsed_secs(),
            f,
            rel_gap: rel_gap(config.termination, f),
            gmap_inf,
            t_k,
            r_sq,
            counters,
        };
        if f < self.best_f {
            self.best_f = f;
            self.best_x = x_plus.to_vec();
        }
        self.monitor.observe(&record, &Snapshot { x_plus, center });
        let done = terminated(config, &record);
        self.records.push(record);
        done
    }
}

fn check_start<P: CompositeProblem + ?Sized>(problem: &P, config: &SolverConfig, x0: &[f64]) -> Result<(), SolverError> {
    config.validate()?;
    if x0.len() != problem.dim() {
        return Err(SolverError::Dimension {
            expected: problem.dim(),
            got: x0.len(),
        });
    }
    Ok(())
}

/// Places `x_k` on the line from `x_plus` to `center`, reusing `anchor`
/// (the step at `x_plus`) when its step size matches.
fn locate<P: CompositeProblem + ?Sized>(
    problem: &P,
    x_plus: &[f64],
    center: &[f64],
    t: f64,
    anchor: &Iterate,
    config: &SolverConfig,
    counters: &mut EvalCounters,
) -> Result<LineRoot, RootFindError> {
    let probe = match LineProbe::new(problem, x_plus, center, t) {
        Ok(p) => p,
        Err(RootFindError::Degenerate) => {
            let iterate = if anchor.t == t {
                anchor.clone()
            } else {
                prox_grad_step(problem, x_plus, t, counters)?
            };
            return Ok(LineRoot {
                s: 0.0,
                phi: 0.0,
                case: RootCase::Anchor,
                iterate,
                newton_steps: 0,
            });
        }
        Err(e) => return Err(e),
    };
    let probe = if anchor.t == t { probe.with_anchor(anchor.clone()) } else { probe };
    match config.rootfinder {
        RootFinder::Brent => find_xk_brent(&probe, config.root_tol, counters),
        RootFinder::Ssn => find_xk_ssn(&probe, config.root_tol, counters),
    }
}

struct MemBall {
    center: Vec<f64>,
    r_sq: f64,
    f: f64,
    weight: f64,
}

/// Sliding window of `x⁺⁺` balls for the limited-memory variants.
struct Memory {
    cap: usize,
    balls: VecDeque<MemBall>,
    center_weight: f64,
}

impl Memory {
    fn new(cap: usize) -> Self {
        Self {
            cap,
            balls: VecDeque::with_capacity(cap + 1),
            center_weight: 1.0,
        }
    }

    fn push(&mut self, center: Vec<f64>, r_sq: f64, f: f64) {
        self.balls.push_back(MemBall {
            center,
            r_sq,
            f,
            weight: 0.0,
        });
        while self.balls.len() > self.cap {
            self.balls.pop_front();
        }
    }

    /// Enclosing ball of `B(c, ρ_B) ∩ ⋂ B(x_i⁺⁺, ρ_i)`, where every memory
    /// radius is tightened to `r_i² − 2(F(x_i⁺) − F(x_k⁺))/α`.
    ///
    /// `two_ball` is the lens ball of the center ball and the newest memory
    /// ball; the smaller of it and the relaxed Chebyshev ball is returned.
    fn enclose(&mut self, outer: &Ball, two_ball: Ball, f_k: f64, alpha: f64) -> Result<Ball, GeometryError> {
        self.balls.retain_mut(|b| {
            b.r_sq -= 2.0 * (b.f - f_k) / alpha;
            b.f = f_k;
            b.r_sq >= 0.0
        });
        if self.balls.len() <= 1 {
            return Ok(two_ball);
        }
        let mut centers = Vec::with_capacity(self.balls.len() + 1);
        let mut radii = Vec::with_capacity(self.balls.len() + 1);
        let mut warm = Vec::with_capacity(self.balls.len() + 1);
        centers.push(outer.center.clone());
        radii.push(outer.r_sq);
        warm.push(self.center_weight);
        for b in &self.balls {
            centers.push(b.center.clone());
            radii.push(b.r_sq);
            warm.push(b.weight);
        }
        let (sol, _) = rcc_dual_solve_warm(&centers, &radii, Some(&warm))?;
        let w = sol.weights.as_slice();
        self.center_weight = w[0];
        for (b, wi) in self.balls.iter_mut().zip(&w[1..]) {
            b.weight = *wi;
        }
        if sol.ball.r_sq < two_ball.r_sq && vecops::all_finite(&sol.ball.center) {
            Ok(sol.ball)
        } else {
            Ok(two_ball)
        }
    }
}

fn ball_radius(gmap_norm_sq: f64, alpha: f64, t: f64) -> f64 {
    gmap_norm_sq * (1.0 - alpha * t) / (alpha * alpha)
}

fn geometric<P: CompositeProblem + ?Sized, M: Monitor + ?Sized>(
    problem: &P,
    config: &SolverConfig,
    x0: &[f64],
    backtracking: bool,
    memory: usize,
    monitor: &mut M,
) -> Result<Trace, SolverError> {
    check_start(problem, config, x0)?;
    let alpha = problem.alpha();
    let mut t = config.t0;
    if !backtracking {
        if let Some(beta) = problem.beta() {
            let bound = 1.0 / beta;
            if t > bound * (1.0 + 1e-12) {
                return Err(SolverError::StepAboveLipschitz { t, bound });
            }
        }
    }
    let t_cap = config.t0 * STEP_CAP;
    let mut counters = EvalCounters::new();
    let mut rec = Recorder::new(monitor);
    let mut newton_steps = 0;

    // iteration 0: c₀ = x₀⁺⁺, R₀² = ‖G_t(x₀)‖²(1 − αt)/α²
    let mut it0 = prox_grad_step(problem, x0, t, &mut counters)?;
    let mut backtracked_last = false;
    let f0_smooth = if backtracking {
        let mut shrinks = 0;
        loop {
            let (ok, fp) = sufficient_decrease(problem, &it0, &mut counters);
            if ok {
                break fp;
            }
            shrinks += 1;
            if shrinks > MAX_SHRINKS {
                return Err(SolverError::Backtracking(0));
            }
            t *= config.eta;
            backtracked_last = true;
            it0 = prox_grad_step(problem, x0, t, &mut counters)?;
        }
    } else {
        problem.f_value(&it0.x_plus, &mut counters)
    };
    let mut f_prev = f0_smooth + problem.h_value(&it0.x_plus);
    if !f_prev.is_finite() {
        return Err(SolverError::NonFinite(0));
    }
    let mut t_min = t;
    let mut center = it0.x_pp.clone();
    let mut r_sq = ball_radius(it0.gmap_norm_sq(), alpha, t);
    let mut x_plus = it0.x_plus.clone();
    let mut anchor = prox_grad_step(problem, &x_plus, t, &mut counters)?;
    let mut mem = Memory::new(memory);
    if memory > 0 {
        mem.push(it0.x_pp.clone(), r_sq, f_prev);
    }
    drop(it0);

    let finish = |rec: Recorder<'_, M>, x: Vec<f64>, f: f64, status, counters, t_min, newton_steps| Trace {
        variant: config.variant,
        records: rec.records,
        x,
        f,
        best_x: rec.best_x,
        best_f: rec.best_f,
        status,
        counters,
        t_min,
        newton_steps,
    };

    let gmap_inf = vecops::norm_inf(&anchor.gmap);
    if r_sq < 0.0 {
        let done = rec.push(config, 0, f_prev, gmap_inf, Some(t), None, counters, &x_plus, None);
        let status = if done { Status::Converged } else { Status::GeometricFloor };
        return Ok(finish(rec, x_plus, f_prev, status, counters, t_min, newton_steps));
    }
    if rec.push(config, 0, f_prev, gmap_inf, Some(t), Some(r_sq), counters, &x_plus, Some(&center)) {
        return Ok(finish(rec, x_plus, f_prev, Status::Converged, counters, t_min, newton_steps));
    }

    for iter in 1..=config.max_iter {
        let mut trial = if backtracking && !backtracked_last {
            (t / config.gamma).min(t_cap)
        } else {
            t
        };
        let mut backtracked = false;
        let mut shrinks = 0;
        let (it, f_smooth) = loop {
            match locate(problem, &x_plus, &center, trial, &anchor, config, &mut counters) {
                Ok(root) => {
                    newton_steps += root.newton_steps;
                    if !backtracking {
                        let fp = problem.f_value(&root.iterate.x_plus, &mut counters);
                        break (root.iterate, fp);
                    }
                    let (ok, fp) = sufficient_decrease(problem, &root.iterate, &mut counters);
                    if ok {
                        break (root.iterate, fp);
                    }
                }
                Err(RootFindError::Problem(e)) => return Err(e.into()),
                // too long a step can break the monotonicity the line search relies on
                Err(e) if backtracking => {
                    let _ = e;
                }
                Err(source) => return Err(SolverError::RootFind { iter, source }),
            }
            shrinks += 1;
            if shrinks > MAX_SHRINKS {
                return Err(SolverError::Backtracking(iter));
            }
            trial *= config.eta;
            backtracked = true;
        };
        t = trial;
        t_min = t_min.min(t);
        backtracked_last = backtracked;

        let f_k = f_smooth + problem.h_value(&it.x_plus);
        if !f_k.is_finite() {
            return Err(SolverError::NonFinite(iter));
        }
        let ra = ball_radius(it.gmap_norm_sq(), alpha, t);
        let rb = r_sq - 2.0 * (f_prev - f_k) / alpha;
        anchor = prox_grad_step(problem, &it.x_plus, t, &mut counters)?;
        let gmap_inf = vecops::norm_inf(&anchor.gmap);

        let next = if ra < 0.0 || rb < 0.0 {
            None
        } else {
            let outer = Ball::new(core::mem::take(&mut center), rb);
            let lens = Ball::new(it.x_pp.clone(), ra);
            match min_enclosing_two_balls(&outer, &lens) {
                Ok(two) if memory == 0 => Some(two),
                Ok(two) => {
                    mem.push(it.x_pp.clone(), ra, f_k);
                    Some(mem.enclose(&outer, two, f_k, alpha)?)
                }
                Err(GeometryError::Disjoint { .. } | GeometryError::NegativeRadius(_)) => None,
                Err(e) => return Err(e.into()),
            }
        };
        // once F stops moving by more than rounding, R_B² is driven by noise
        let stalled = f_prev - f_k <= STALL_ULPS * f64::EPSILON * f_k.abs().max(f_prev.abs());
        let done = meets_tolerance(config, rel_gap(config.termination, f_k), gmap_inf);
        x_plus = it.x_plus;
        f_prev = f_k;
        match next {
            Some(ball) if ball.r_sq >= 0.0 && (done || !stalled) => {
                center = ball.center;
                r_sq = ball.r_sq;
                if rec.push(config, iter, f_k, gmap_inf, Some(t), Some(r_sq), counters, &x_plus, Some(&center)) {
                    return Ok(finish(rec, x_plus, f_k, Status::Converged, counters, t_min, newton_steps));
                }
            }
            _ => {
                let done = rec.push(config, iter, f_k, gmap_inf, Some(t), None, counters, &x_plus, None);
                let status = if done { Status::Converged } else { Status::GeometricFloor };
                return Ok(finish(rec, x_plus, f_k, status, counters, t_min, newton_steps));
            }
        }
    }
    Ok(finish(rec, x_plus, f_prev, Status::MaxIter, counters, t_min, newton_steps))
}

/// Next momentum weight: the positive root of
/// `θ² + (θ_k² − q)θ − θ_k² = 0`.
fn next_theta(theta: f64, q: f64) -> f64 {
    let b = theta * theta - q;
    0.5 * (-b + libm::sqrt(b * b + 4.0 * theta * theta))
}

fn accelerated<P: CompositeProblem + ?Sized, M: Monitor + ?Sized>(
    problem: &P,
    config: &SolverConfig,
    x0: &[f64],
    monitor: &mut M,
) -> Result<Trace, SolverError> {
    check_start(problem, config, x0)?;
    let alpha = problem.alpha();
    let t_cap = config.t0 * STEP_CAP;
    let mut counters = EvalCounters::new();
    let mut rec = Recorder::new(monitor);
    let mut t = config.t0;
    let mut t_min = f64::INFINITY;
    let mut x = x0.to_vec();
    let mut y = x0.to_vec();
    let mut theta: Option<f64> = None;
    let mut backtracked_last = true;
    let mut f_last = f64::INFINITY;

    let finish = |rec: Recorder<'_, M>, x: Vec<f64>, f: f64, status, counters, t_min| Trace {
        variant: config.variant,
        records: rec.records,
        x,
        f,
        best_x: rec.best_x,
        best_f: rec.best_f,
        status,
        counters,
        t_min,
        newton_steps: 0,
    };

    for iter in 1..=config.max_iter {
        let mut trial = if !backtracked_last {
            (t / config.gamma).min(t_cap)
        } else {
            t
        };
        let mut backtracked = false;
        let mut shrinks = 0;
        let (step, f_smooth) = loop {
            let step = prox_grad_step(problem, &y, trial, &mut counters)?;
            let (ok, fp) = sufficient_decrease(problem, &step, &mut counters);
            if ok {
                break (step, fp);
            }
            shrinks += 1;
            if shrinks > MAX_SHRINKS {
                return Err(SolverError::Backtracking(iter));
            }
            trial *= config.eta;
            backtracked = true;
        };
        // the first iteration only validates t0
        backtracked_last = backtracked && iter > 1;
        t = trial;
        t_min = t_min.min(t);

        let x_next = step.x_plus;
        let f = f_smooth + problem.h_value(&x_next);
        if !f.is_finite() {
            return Err(SolverError::NonFinite(iter));
        }
        let q = alpha * t;
        let th = *theta.get_or_insert_with(|| libm::sqrt(q).min(1.0));
        let th_next = next_theta(th, q);
        let beta_k = th * (1.0 - th) / (th * th + th_next);
        y = x_next
            .iter()
            .zip(&x)
            .map(|(a, b)| a + beta_k * (a - b))
            .collect();
        theta = Some(th_next);
        x = x_next;
        f_last = f;

        let check = prox_grad_step(problem, &x, t, &mut counters)?;
        let gmap_inf = vecops::norm_inf(&check.gmap);
        if rec.push(config, iter, f, gmap_inf, Some(t), None, counters, &x, None) {
            return Ok(finish(rec, x, f, Status::Converged, counters, t_min));
        }
    }
    Ok(finish(rec, x, f_last, Status::MaxIter, counters, t_min))
}
