//! Line search that places the GeoPG iterate on `Line(x⁺_{k−1}, c_{k−1})`.
//!
//! With anchor `x`, second point `c` and step `t`,
//! `φ̄(s) = ⟨z⁺ − z, x − c⟩` at `z = x + s(c − x)` is continuous and strictly
//! increasing whenever `t ≤ 1/β`, with slope at least `(αt/2)‖x − c‖²`.
//! A point with `φ̄(0) ≥ 0`, `φ̄(1) ≤ 0`, or `φ̄(s) = 0` gives the iterate.
//!
//! Tolerances are relative to `αt‖x − c‖²`.

use alloc::vec::Vec;

use thiserror::Error;

use crate::problem::{prox_grad_step, CompositeProblem, Iterate, ProblemError};
use crate::sparse::EvalCounters;
use crate::vecops;

pub const DEFAULT_ROOT_TOL: f64 = 1e-10;

const BRENT_MAX_ITER: usize = 200;
const NEWTON_MAX_ITER: usize = 200;
const MAX_DOUBLINGS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootFindError {
    #[error("line endpoints coincide")]
    Degenerate,
    #[error("{method} exceeded its iteration budget of {budget}")]
    Budget { method: &'static str, budget: usize },
    #[error("could not bracket a root on [0, ∞) after {0} doublings")]
    NoBracket(usize),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// `φ̄` for one anchor / direction / step.
pub struct LineProbe<'a, P: ?Sized> {
    problem: &'a P,
    x: &'a [f64],
    c: &'a [f64],
    t: f64,
    direction: Vec<f64>,
    dir_norm_sq: f64,
    anchor: Option<Iterate>,
}

impl<'a, P: CompositeProblem + ?Sized> LineProbe<'a, P> {
    /// Fails with [`RootFindError::Degenerate`] when
    /// `‖x − c‖ ≤ 1e−14·(1 + ‖x‖)`.
    pub fn new(problem: &'a P, x: &'a [f64], c: &'a [f64], t: f64) -> Result<Self, RootFindError> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(ProblemError::InvalidStep(t).into());
        }
        let direction = vecops::sub(c, x);
        let dir_norm_sq = vecops::norm_sq(&direction);
        let dn = libm::sqrt(dir_norm_sq);
        if !(dn > 1e-14 * (1.0 + vecops::norm(x))) {
            return Err(RootFindError::Degenerate);
        }
        Ok(Self {
            problem,
            x,
            c,
            t,
            direction,
            dir_norm_sq,
            anchor: None,
        })
    }

    /// Reuses an already computed step at the anchor (same point, same `t`).
    pub fn with_anchor(mut self, anchor: Iterate) -> Self {
        if anchor.t == self.t && anchor.x.as_slice() == self.x {
            self.anchor = Some(anchor);
        }
        self
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `αt‖x − c‖²`, the certified slope of `φ̄`.
    pub fn scale(&self) -> f64 {
        self.problem.alpha() * self.t * self.dir_norm_sq
    }

    pub fn point(&self, s: f64) -> Vec<f64> {
        if s == 1.0 {
            return self.c.to_vec();
        }
        vecops::add_scaled(self.x, s, &self.direction)
    }

    fn eval(&self, s: f64, counters: &mut EvalCounters) -> Result<(f64, Iterate), RootFindError> {
        let it = match (&self.anchor, s == 0.0) {
            (Some(a), true) => a.clone(),
            _ => prox_grad_step(self.problem, &self.point(s), self.t, counters)?,
        };
        // ⟨z⁺ − z, x − c⟩
        let phi = -it
            .x_plus
            .iter()
            .zip(&it.x)
            .zip(&self.direction)
            .map(|((zp, z), d)| (zp - z) * d)
            .sum::<f64>();
        Ok((phi, it))
    }

    /// `φ̄′(s) = ⟨(D(I − t∇²f(z)) − I)(c − x), x − c⟩`, or `None` without
    /// Hessian-vector products.
    fn derivative(&self, it: &Iterate, counters: &mut EvalCounters) -> Option<f64> {
        let hd = self.problem.hess_vec(&it.x, &self.direction, counters)?;
        let jac = self.problem.prox_jacobian_diag(&it.prox_input(), self.t);
        let inner: f64 = self
            .direction
            .iter()
            .zip(&hd)
            .zip(&jac)
            .map(|((d, h), j)| j * (d - self.t * h) * d)
            .sum();
        Some(self.dir_norm_sq - inner)
    }
}

/// `φ̄(s)`; costs one proximal gradient step unless `s = 0` hits a cached
/// anchor step.
pub fn phi_bar<P: CompositeProblem + ?Sized>(
    probe: &LineProbe<'_, P>,
    s: f64,
    counters: &mut EvalCounters,
) -> Result<f64, RootFindError> {
    Ok(probe.eval(s, counters)?.0)
}

/// Which branch produced the iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootCase {
    /// `φ̄(0) ≥ 0`: keep the anchor.
    Anchor,
    /// `φ̄(1) ≤ 0`: take the second point.
    Far,
    /// `φ̄(s) ≈ 0` for some located `s`.
    Root,
}

/// Output of the line search, with the proximal step at the chosen point.
#[derive(Debug, Clone)]
pub struct LineRoot {
    pub s: f64,
    pub phi: f64,
    pub case: RootCase,
    pub iterate: Iterate,
    /// Newton steps taken (zero for Brent–Dekker).
    pub newton_steps: usize,
}

struct Best {
    s: f64,
    phi: f64,
    it: Option<Iterate>,
}

impl Best {
    fn new() -> Self {
        Self {
            s: 0.0,
            phi: f64::INFINITY,
            it: None,
        }
    }

    fn offer(&mut self, s: f64, phi: f64, it: &Iterate) {
        if phi.abs() < self.phi.abs() {
            self.s = s;
            self.phi = phi;
            self.it = Some(it.clone());
        }
    }

    fn into_root(self, newton_steps: usize) -> LineRoot {
        LineRoot {
            s: self.s,
            phi: self.phi,
            case: RootCase::Root,
            iterate: self.it.expect("at least one evaluation"),
            newton_steps,
        }
    }
}

/// Brent–Dekker zero finder on a bracket `[a, b]` with `f(a)·f(b) ≤ 0`.
///
/// Stops when `|f| ≤ ftol` or the bracket shrinks to machine precision.
/// Returns the final estimate and its value.
pub fn brent_dekker<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<Option<(f64, f64)>, E> {
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if (fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + f64::MIN_POSITIVE;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= ftol {
            return Ok(Some((b, fb)));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                // secant
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                // inverse quadratic interpolation
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Ok(None)
}

fn anchor_case<P: CompositeProblem + ?Sized>(
    probe: &LineProbe<'_, P>,
    counters: &mut EvalCounters,
) -> Result<Result<LineRoot, (f64, Iterate)>, RootFindError> {
    let (phi0, it0) = probe.eval(0.0, counters)?;
    if phi0 >= 0.0 {
        return Ok(Ok(LineRoot {
            s: 0.0,
            phi: phi0,
            case: RootCase::Anchor,
            iterate: it0,
            newton_steps: 0,
        }));
    }
    Ok(Err((phi0, it0)))
}

fn brent_on<P: CompositeProblem + ?Sized>(
    probe: &LineProbe<'_, P>,
    lo: (f64, f64, &Iterate),
    hi: (f64, f64, &Iterate),
    ftol: f64,
    counters: &mut EvalCounters,
) -> Result<LineRoot, RootFindError> {
    let mut best = Best::new();
    best.offer(lo.0, lo.1, lo.2);
    best.offer(hi.0, hi.1, hi.2);
    let found = brent_dekker(
        |s| {
            let (phi, it) = probe.eval(s, counters)?;
            best.offer(s, phi, &it);
            Ok::<f64, RootFindError>(phi)
        },
        lo.0,
        hi.0,
        lo.1,
        hi.1,
        ftol,
        BRENT_MAX_ITER,
    )?;
    match found {
        Some(_) => Ok(best.into_root(0)),
        None => Err(RootFindError::Budget {
            method: "Brent-Dekker",
            budget: BRENT_MAX_ITER,
        }),
    }
}

/// Three-way dispatch on `[0, 1]`: anchor, second point, or a Brent–Dekker
/// root of `φ̄`.
pub fn find_xk_brent<P: CompositeProblem + ?Sized>(
    probe: &LineProbe<'_, P>,
    tol: f64,
    counters: &mut EvalCounters,
) -> Result<LineRoot, RootFindError> {
    let (phi0, it0) = match anchor_case(probe, counters)? {
        Ok(root) => return Ok(root),
        Err(v) => v,
    };
    let (phi1, it1) = probe.eval(1.0, counters)?;
    if phi1 <= 0.0 {
        return Ok(LineRoot {
            s: 1.0,
            phi: phi1,
            case: RootCase::Far,
            iterate: it1,
            newton_steps: 0,
        });
    }
    let ftol = tol * probe.scale();
    brent_on(probe, (0.0, phi0, &it0), (1.0, phi1, &it1), ftol, counters)
}

/// Root of `φ̄` on `[0, ∞)`: bracket by doubling, then Newton steps with the
/// generalized derivative of the prox, safeguarded by bisection.
///
/// Problems without Hessian-vector products fall back to Brent–Dekker on
/// the bracket.
pub fn find_xk_ssn<P: CompositeProblem + ?Sized>(
    probe: &LineProbe<'_, P>,
    tol: f64,
    counters: &mut EvalCounters,
) -> Result<LineRoot, RootFindError> {
    let (phi0, it0) = match anchor_case(probe, counters)? {
        Ok(root) => return Ok(root),
        Err(v) => v,
    };
    let ftol = tol * probe.scale();
    let (mut lo, mut phi_lo, mut it_lo) = (0.0, phi0, it0);
    let mut hi = 1.0;
    let (mut phi_hi, mut it_hi) = probe.eval(hi, counters)?;
    let mut doublings = 0;
    while phi_hi <= 0.0 {
        if phi_hi.abs() <= ftol {
            return Ok(LineRoot {
                s: hi,
                phi: phi_hi,
                case: RootCase::Root,
                iterate: it_hi,
                newton_steps: 0,
            });
        }
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(RootFindError::NoBracket(MAX_DOUBLINGS));
        }
        lo = hi;
        phi_lo = phi_hi;
        it_lo = it_hi;
        hi *= 2.0;
        (phi_hi, it_hi) = probe.eval(hi, counters)?;
    }

    let mut best = Best::new();
    best.offer(lo, phi_lo, &it_lo);
    best.offer(hi, phi_hi, &it_hi);
    if best.phi.abs() <= ftol {
        return Ok(best.into_root(0));
    }

    let (mut s, mut phi, mut it) = (lo, phi_lo, it_lo);
    let (mut a, mut b) = (lo, hi);
    let mut bisect_next = false;
    let mut steps = 0;
    while steps < NEWTON_MAX_ITER {
        let slope = if bisect_next {
            None
        } else {
            match probe.derivative(&it, counters) {
                Some(v) => Some(v),
                None => {
                    let lo_it = prox_grad_step(probe.problem, &probe.point(a), probe.t, counters)?;
                    let hi_it = prox_grad_step(probe.problem, &probe.point(b), probe.t, counters)?;
                    let (pa, pb) = (phi_of(probe, &lo_it), phi_of(probe, &hi_it));
                    return brent_on(probe, (a, pa, &lo_it), (b, pb, &hi_it), ftol, counters);
                }
            }
        };
        let newton = slope.filter(|d| *d > 0.0).map(|d| s - phi / d);
        let candidate = match newton {
            Some(c) if c > a && c < b => c,
            _ => 0.5 * (a + b),
        };
        steps += 1;
        let (phi_c, it_c) = probe.eval(candidate, counters)?;
        best.offer(candidate, phi_c, &it_c);
        if phi_c.abs() <= ftol || phi_c == 0.0 {
            break;
        }
        if phi_c < 0.0 {
            a = candidate;
        } else {
            b = candidate;
        }
        bisect_next = phi_c.abs() > 0.5 * phi.abs();
        s = candidate;
        phi = phi_c;
        it = it_c;
        if b - a <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
            break;
        }
    }
    if steps >= NEWTON_MAX_ITER && best.phi.abs() > ftol {
        return Err(RootFindError::Budget {
            method: "semi-smooth Newton",
            budget: NEWTON_MAX_ITER,
        });
    }
    Ok(best.into_root(steps))
}

fn phi_of<P: CompositeProblem + ?Sized>(probe: &LineProbe<'_, P>, it: &Iterate) -> f64 {
    -it.x_plus
        .iter()
        .zip(&it.x)
        .zip(&probe.direction)
        .map(|((zp, z), d)| (zp - z) * d)
        .sum::<f64>()
}
