//! Composite problems `F = f + h`, the ℓ1 proximal map and the proximal
//! gradient step.
//!
//! `f` carries the ridge term so its strong convexity modulus `α` is known;
//! `h` is `μ‖·‖₁` (possibly with `μ = 0`).

use alloc::vec::Vec;

use thiserror::Error;

use crate::sparse::{EvalCounters, SparseDesign};
use crate::vecops;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("threshold must be non-negative, got {0}")]
    NegativeThreshold(f64),
    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("gradient is not finite")]
    NonFiniteGradient,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("logistic problems need every label to be +1 or -1")]
    NonBinaryLabels,
    #[error("point has length {got}, problem dimension is {expected}")]
    Dimension { expected: usize, got: usize },
}

/// Contract for `min f(x) + h(x)` with `f` α-strongly convex and smooth and
/// `h` convex with a cheap proximal map.
///
/// Implementations charge their own work to the supplied counters: `f_value`
/// bumps `f_ev`, `grad` bumps `g_ev`, `prox_h` bumps `p_ev`, and every product
/// with a data matrix bumps `mvm`.
pub trait CompositeProblem {
    fn dim(&self) -> usize;

    /// Certified strong convexity modulus of `f`.
    fn alpha(&self) -> f64;

    /// Lipschitz constant of `∇f`, when known.
    fn beta(&self) -> Option<f64> {
        None
    }

    fn f_value(&self, x: &[f64], counters: &mut EvalCounters) -> f64;

    fn grad(&self, x: &[f64], counters: &mut EvalCounters) -> Vec<f64>;

    /// `∇²f(x) v`, if the problem can provide it.
    fn hess_vec(&self, _x: &[f64], _v: &[f64], _counters: &mut EvalCounters) -> Option<Vec<f64>> {
        None
    }

    fn h_value(&self, x: &[f64]) -> f64;

    /// `Prox_{t h}(v) = argmin_z h(z) + ‖z − v‖² / (2t)`.
    fn prox_h(&self, v: &[f64], t: f64, counters: &mut EvalCounters) -> Vec<f64>;

    /// Diagonal of an element of the generalized Jacobian of `Prox_{t h}` at `v`.
    fn prox_jacobian_diag(&self, v: &[f64], t: f64) -> Vec<f64>;

    fn objective(&self, x: &[f64], counters: &mut EvalCounters) -> f64 {
        self.f_value(x, counters) + self.h_value(x)
    }
}

impl<P: CompositeProblem + ?Sized> CompositeProblem for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn alpha(&self) -> f64 {
        (**self).alpha()
    }
    fn beta(&self) -> Option<f64> {
        (**self).beta()
    }
    fn f_value(&self, x: &[f64], counters: &mut EvalCounters) -> f64 {
        (**self).f_value(x, counters)
    }
    fn grad(&self, x: &[f64], counters: &mut EvalCounters) -> Vec<f64> {
        (**self).grad(x, counters)
    }
    fn hess_vec(&self, x: &[f64], v: &[f64], counters: &mut EvalCounters) -> Option<Vec<f64>> {
        (**self).hess_vec(x, v, counters)
    }
    fn h_value(&self, x: &[f64]) -> f64 {
        (**self).h_value(x)
    }
    fn prox_h(&self, v: &[f64], t: f64, counters: &mut EvalCounters) -> Vec<f64> {
        (**self).prox_h(v, t, counters)
    }
    fn prox_jacobian_diag(&self, v: &[f64], t: f64) -> Vec<f64> {
        (**self).prox_jacobian_diag(v, t)
    }
    fn objective(&self, x: &[f64], counters: &mut EvalCounters) -> f64 {
        (**self).objective(x, counters)
    }
}

/// Componentwise `sign(vᵢ)·max(|vᵢ| − θ, 0)`.
pub fn soft_threshold(v: &[f64], threshold: f64) -> Result<Vec<f64>, ProblemError> {
    if !(threshold >= 0.0) {
        return Err(ProblemError::NegativeThreshold(threshold));
    }
    Ok(shrink(v, threshold))
}

fn shrink(v: &[f64], threshold: f64) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let m = x.abs() - threshold;
            if m > 0.0 {
                m.copysign(x)
            } else {
                0.0
            }
        })
        .collect()
}

fn shrink_jacobian(v: &[f64], threshold: f64) -> Vec<f64> {
    v.iter()
        .map(|&x| if threshold == 0.0 || x.abs() > threshold { 1.0 } else { 0.0 })
        .collect()
}

/// A point together with its proximal gradient quantities at step `t`:
/// `x⁺ = Prox_{th}(x − t∇f(x))`, `G_t(x) = (x − x⁺)/t` and
/// `x⁺⁺ = x − G_t(x)/α`.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub x: Vec<f64>,
    pub t: f64,
    pub grad: Vec<f64>,
    pub x_plus: Vec<f64>,
    pub gmap: Vec<f64>,
    pub x_pp: Vec<f64>,
}

impl Iterate {
    /// The prox argument `x − t∇f(x)`.
    pub fn prox_input(&self) -> Vec<f64> {
        vecops::add_scaled(&self.x, -self.t, &self.grad)
    }

    pub fn gmap_norm_sq(&self) -> f64 {
        vecops::norm_sq(&self.gmap)
    }
}

/// One proximal gradient step from `x` with step `t`.
pub fn prox_grad_step<P: CompositeProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    t: f64,
    counters: &mut EvalCounters,
) -> Result<Iterate, ProblemError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(ProblemError::InvalidStep(t));
    }
    if x.len() != problem.dim() {
        return Err(ProblemError::Dimension {
            expected: problem.dim(),
            got: x.len(),
        });
    }
    let grad = problem.grad(x, counters);
    if !vecops::all_finite(&grad) {
        return Err(ProblemError::NonFiniteGradient);
    }
    let v = vecops::add_scaled(x, -t, &grad);
    let x_plus = problem.prox_h(&v, t, counters);
    let gmap: Vec<f64> = x.iter().zip(&x_plus).map(|(a, b)| (a - b) / t).collect();
    let inv_alpha = 1.0 / problem.alpha();
    let x_pp = vecops::add_scaled(x, -inv_alpha, &gmap);
    Ok(Iterate {
        x: x.to_vec(),
        t,
        grad,
        x_plus,
        gmap,
        x_pp,
    })
}

/// Sufficient decrease test
/// `f(x⁺) ≤ f(x) − t⟨∇f(x), G_t(x)⟩ + (t/2)‖G_t(x)‖²`, allowing a rounding
/// slack of `16ε·max(|f(x)|, |f(x⁺)|)`. When that fails but `f(x⁺)` and `f(x)`
/// agree to within `1e-10` relative, the test falls back to
/// `⟨∇f(x⁺) − ∇f(x), x⁺ − x⟩ ≤ ‖x⁺ − x‖²/t`.
pub fn sufficient_decrease_holds<P: CompositeProblem + ?Sized>(
    problem: &P,
    it: &Iterate,
    counters: &mut EvalCounters,
) -> bool {
    sufficient_decrease(problem, it, counters).0
}

/// Like [`sufficient_decrease_holds`] but also hands back `f(x⁺)`.
pub(crate) fn sufficient_decrease<P: CompositeProblem + ?Sized>(
    problem: &P,
    it: &Iterate,
    counters: &mut EvalCounters,
) -> (bool, f64) {
    let fx = problem.f_value(&it.x, counters);
    let f_plus = problem.f_value(&it.x_plus, counters);
    let t = it.t;
    let rhs = fx - t * vecops::dot(&it.grad, &it.gmap) + 0.5 * t * it.gmap_norm_sq();
    let scale = fx.abs().max(f_plus.abs());
    if f_plus <= rhs + 16.0 * f64::EPSILON * scale {
        return (true, f_plus);
    }
    if (f_plus - fx).abs() > NOISE_BAND * scale {
        return (false, f_plus);
    }
    // f values agree to rounding: compare curvature along the step instead
    let g_plus = problem.grad(&it.x_plus, counters);
    let d = vecops::sub(&it.x_plus, &it.x);
    let curv = vecops::dot(&vecops::sub(&g_plus, &it.grad), &d);
    (curv <= vecops::dot(&d, &d) / t, f_plus)
}

const NOISE_BAND: f64 = 1e-10;

/// `μ = c/p · ‖Aᵀb‖∞`, the benchmark scaling rule for the ℓ1 weight.
pub fn scaled_mu(design: &SparseDesign, c: f64) -> f64 {
    if design.rows() == 0 {
        return 0.0;
    }
    let mut scratch = EvalCounters::new();
    let atb = design
        .matvec(design.targets(), true, &mut scratch)
        .expect("targets have one entry per row");
    c / design.rows() as f64 * vecops::norm_inf(&atb)
}

fn check_weights(alpha: f64, mu: f64) -> Result<(), ProblemError> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(ProblemError::InvalidParameter("alpha must be positive"));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(ProblemError::InvalidParameter("mu must be non-negative"));
    }
    Ok(())
}

/// `(1/2p)‖Ax − b‖² + (α/2)‖x‖² + μ‖x‖₁`.
#[derive(Debug, Clone)]
pub struct ElasticNetLs {
    design: SparseDesign,
    alpha: f64,
    mu: f64,
    beta: Option<f64>,
}

impl ElasticNetLs {
    pub fn new(design: SparseDesign, alpha: f64, mu: f64) -> Result<Self, ProblemError> {
        check_weights(alpha, mu)?;
        if design.rows() == 0 {
            return Err(ProblemError::InvalidParameter("design has no rows"));
        }
        Ok(Self {
            design,
            alpha,
            mu,
            beta: None,
        })
    }

    /// `λ_max(AᵀA)/p + α`, computed by power iteration.
    pub fn lipschitz(&self) -> f64 {
        self.design.gram_spectral_norm() / self.design.rows() as f64 + self.alpha
    }

    /// Stores [`Self::lipschitz`] so that [`CompositeProblem::beta`] reports it.
    pub fn with_estimated_beta(mut self) -> Self {
        self.beta = Some(self.lipschitz());
        self
    }

    pub fn design(&self) -> &SparseDesign {
        &self.design
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn residual(&self, x: &[f64], counters: &mut EvalCounters) -> Vec<f64> {
        let ax = self.design.matvec(x, false, counters).expect("x has problem dimension");
        ax.iter().zip(self.design.targets()).map(|(a, b)| a - b).collect()
    }
}

impl CompositeProblem for ElasticNetLs {
    fn dim(&self) -> usize {
        self.design.cols()
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn beta(&self) -> Option<f64> {
        self.beta
    }

    fn f_value(&self, x: &[f64], counters: &mut EvalCounters) -> f64 {
        counters.f_ev += 1;
        let r = self.residual(x, counters);
        0.5 * vecops::norm_sq(&r) / self.design.rows() as f64 + 0.5 * self.alpha * vecops::norm_sq(x)
    }

    fn grad(&self, x: &[f64], counters: &mut EvalCounters) -> Vec<f64> {
        counters.g_ev += 1;
        let r = self.residual(x, counters);
        let atr = self.design.matvec(&r, true, counters).expect("residual has p entries");
        let inv_p = 1.0 / self.design.rows() as f64;
        atr.iter().zip(x).map(|(g, xi)| g * inv_p + self.alpha * xi).collect()
    }

    fn hess_vec(&self, _x: &[f64], v: &[f64], counters: &mut EvalCounters) -> Option<Vec<f64>> {
        let av = self.design.matvec(v, false, counters).ok()?;
        let atav = self.design.matvec(&av, true, counters).ok()?;
        let inv_p = 1.0 / self.design.rows() as f64;
        Some(atav.iter().zip(v).map(|(h, vi)| h * inv_p + self.alpha * vi).collect())
    }

    fn h_value(&self, x: &[f64]) -> f64 {
        self.mu * vecops::norm1(x)
    }

    fn prox_h(&self, v: &[f64], t: f64, counters: &mut EvalCounters) -> Vec<f64> {
        counters.p_ev += 1;
        shrink(v, t * self.mu)
    }

    fn prox_jacobian_diag(&self, v: &[f64], t: f64) -> Vec<f64> {
        shrink_jacobian(v, t * self.mu)
    }
}

/// `log(1 + e^{−z})` without overflow.
#[inline]
pub fn log1p_exp_neg(z: f64) -> f64 {
    if z > 0.0 {
        libm::log1p(libm::exp(-z))
    } else {
        -z + libm::log1p(libm::exp(z))
    }
}

/// `1 / (1 + e^{−z})` without overflow.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `(1/p) Σ log(1 + exp(−bᵢ aᵢᵀx)) + (α/2)‖x‖² + μ‖x‖₁` with `bᵢ ∈ {±1}`.
#[derive(Debug, Clone)]
pub struct ElasticNetLogistic {
    design: SparseDesign,
    alpha: f64,
    mu: f64,
    beta: Option<f64>,
}

impl ElasticNetLogistic {
    pub fn new(design: SparseDesign, alpha: f64, mu: f64) -> Result<Self, ProblemError> {
        check_weights(alpha, mu)?;
        if design.rows() == 0 {
            return Err(ProblemError::InvalidParameter("design has no rows"));
        }
        if !design.has_binary_labels() {
            return Err(ProblemError::NonBinaryLabels);
        }
        Ok(Self {
            design,
            alpha,
            mu,
            beta: None,
        })
    }

    /// `λ_max(AᵀA)/(4p) + α`.
    pub fn lipschitz(&self) -> f64 {
        0.25 * self.design.gram_spectral_norm() / self.design.rows() as f64 + self.alpha
    }

    pub fn with_estimated_beta(mut self) -> Self {
        self.beta = Some(self.lipschitz());
        self
    }

    pub fn design(&self) -> &SparseDesign {
        &self.design
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Margins `zᵢ = bᵢ aᵢᵀx`.
    fn margins(&self, x: &[f64], counters: &mut EvalCounters) -> Vec<f64> {
        let ax = self.design.matvec(x, false, counters).expect("x has problem dimension");
        ax.iter().zip(self.design.targets()).map(|(a, b)| a * b).collect()
    }
}

impl CompositeProblem for ElasticNetLogistic {
    fn dim(&self) -> usize {
        self.design.cols()
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn beta(&self) -> Option<f64> {
        self.beta
    }

    fn f_value(&self, x: &[f64], counters: &mut EvalCounters) -> f64 {
        counters.f_ev += 1;
        let z = self.margins(x, counters);
        let loss: f64 = z.iter().map(|&zi| log1p_exp_neg(zi)).sum();
        loss / self.design.rows() as f64 + 0.5 * self.alpha * vecops::norm_sq(x)
    }

    fn grad(&self, x: &[f64], counters: &mut EvalCounters) -> Vec<f64> {
        counters.g_ev += 1;
        let z = self.margins(x, counters);
        // d/dz log(1+e^{-z}) = -σ(-z)
        let w: Vec<f64> = z
            .iter()
            .zip(self.design.targets())
            .map(|(&zi, &bi)| -bi * sigmoid(-zi))
            .collect();
        let atw = self.design.matvec(&w, true, counters).expect("weights have p entries");
        let inv_p = 1.0 / self.design.rows() as f64;
        atw.iter().zip(x).map(|(g, xi)| g * inv_p + self.alpha * xi).collect()
    }

    fn hess_vec(&self, x: &[f64], v: &[f64], counters: &mut EvalCounters) -> Option<Vec<f64>> {
        let z = self.margins(x, counters);
        let av = self.design.matvec(v, false, counters).ok()?;
        let weighted: Vec<f64> = z
            .iter()
            .zip(&av)
            .map(|(&zi, &avi)| {
                let s = sigmoid(zi);
                s * (1.0 - s) * avi
            })
            .collect();
        let atw = self.design.matvec(&weighted, true, counters).ok()?;
        let inv_p = 1.0 / self.design.rows() as f64;
        Some(atw.iter().zip(v).map(|(h, vi)| h * inv_p + self.alpha * vi).collect())
    }

    fn h_value(&self, x: &[f64]) -> f64 {
        self.mu * vecops::norm1(x)
    }

    fn prox_h(&self, v: &[f64], t: f64, counters: &mut EvalCounters) -> Vec<f64> {
        counters.p_ev += 1;
        shrink(v, t * self.mu)
    }

    fn prox_jacobian_diag(&self, v: &[f64], t: f64) -> Vec<f64> {
        shrink_jacobian(v, t * self.mu)
    }
}

/// `½ Σ dᵢ (xᵢ − aᵢ)² + μ‖x‖₁` with `dᵢ > 0`.
///
/// Small closed-form instances for tests: `α = min dᵢ`, `β = max dᵢ`.
#[derive(Debug, Clone)]
pub struct SeparableQuadratic {
    diag: Vec<f64>,
    center: Vec<f64>,
    mu: f64,
}

impl SeparableQuadratic {
    pub fn new(diag: Vec<f64>, center: Vec<f64>, mu: f64) -> Result<Self, ProblemError> {
        if diag.len() != center.len() || diag.is_empty() {
            return Err(ProblemError::InvalidParameter("diag and center must match and be non-empty"));
        }
        if diag.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(ProblemError::InvalidParameter("curvatures must be positive"));
        }
        if !(mu >= 0.0) {
            return Err(ProblemError::InvalidParameter("mu must be non-negative"));
        }
        Ok(Self { diag, center, mu })
    }

    /// `(α/2)‖x‖²` in `n` dimensions with `h ≡ 0`.
    pub fn isotropic(n: usize, alpha: f64) -> Result<Self, ProblemError> {
        Self::new(alloc::vec![alpha; n], alloc::vec![0.0; n], 0.0)
    }
}

impl CompositeProblem for SeparableQuadratic {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn alpha(&self) -> f64 {
        self.diag.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn beta(&self) -> Option<f64> {
        Some(self.diag.iter().copied().fold(0.0, f64::max))
    }

    fn f_value(&self, x: &[f64], counters: &mut EvalCounters) -> f64 {
        counters.f_ev += 1;
        0.5 * x
            .iter()
            .zip(&self.center)
            .zip(&self.diag)
            .map(|((xi, ai), di)| di * (xi - ai) * (xi - ai))
            .sum::<f64>()
    }

    fn grad(&self, x: &[f64], counters: &mut EvalCounters) -> Vec<f64> {
        counters.g_ev += 1;
        x.iter()
            .zip(&self.center)
            .zip(&self.diag)
            .map(|((xi, ai), di)| di * (xi - ai))
            .collect()
    }

    fn hess_vec(&self, _x: &[f64], v: &[f64], _counters: &mut EvalCounters) -> Option<Vec<f64>> {
        Some(v.iter().zip(&self.diag).map(|(vi, di)| vi * di).collect())
    }

    fn h_value(&self, x: &[f64]) -> f64 {
        self.mu * vecops::norm1(x)
    }

    fn prox_h(&self, v: &[f64], t: f64, counters: &mut EvalCounters) -> Vec<f64> {
        counters.p_ev += 1;
        shrink(v, t * self.mu)
    }

    fn prox_jacobian_diag(&self, v: &[f64], t: f64) -> Vec<f64> {
        shrink_jacobian(v, t * self.mu)
    }
}
