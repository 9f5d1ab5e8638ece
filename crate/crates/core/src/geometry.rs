//! Balls, the enclosing ball of a two-ball lens, and the relaxed Chebyshev
//! center of an intersection of many balls.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::vecops;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("balls are disjoint: center distance {distance} exceeds radius sum {radius_sum}")]
    Disjoint { distance: f64, radius_sum: f64 },
    #[error("ball has negative squared radius {0}")]
    NegativeRadius(f64),
    #[error("ball centers have different dimensions")]
    Dimension,
    #[error("relaxed Chebyshev center needs at least one ball")]
    NoBalls,
    #[error("simplex QP did not converge in {iterations} iterations (gap {gap:e})")]
    QpNotConverged { iterations: usize, gap: f64 },
}

/// `B(c, r²) = { x : ‖x − c‖² ≤ r² }`.
///
/// `r_sq ≤ 0` is allowed and means the ball has collapsed.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub r_sq: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, r_sq: f64) -> Self {
        Self { center, r_sq }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `‖x − c‖² ≤ r² + slack`
    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        vecops::dist_sq(x, &self.center) <= self.r_sq + slack
    }
}

/// Minimum enclosing ball of `A ∩ B`.
///
/// The lens is symmetric about the axis through both centers, so the
/// optimal center sits on that axis at `x_A + λ(x_B − x_A)`. With
/// `λ = ½(1 + (r_A² − r_B²)/d²)`:
///
/// * `λ ∈ (0, 1)`: the rim circle where the spheres meet bounds the lens and
///   the answer is the rim ball, `R² = r_A² − λ²d²`;
/// * `λ ≥ 1` (resp. `≤ 0`): the lens keeps more than a hemisphere of `B`
///   (resp. `A`), so `B` (resp. `A`) is already minimal.
///
/// This is the exact minimum in two or more dimensions. On the real line
/// the lens is an interval and the returned ball can be larger than it; it
/// still encloses the intersection. Either way the radius satisfies
/// `‖x − c‖² − R² = (1−λ)(‖x − x_A‖² − r_A²) + λ(‖x − x_B‖² − r_B²)`, so
/// shrinking both input radii by the same amount shrinks the output by it too.
///
/// Coincident centers return the smaller ball. Centers farther apart than
/// `r_A + r_B` (with a relative slack of `1e−9`) are rejected.
pub fn min_enclosing_two_balls(a: &Ball, b: &Ball) -> Result<Ball, GeometryError> {
    if a.dim() != b.dim() {
        return Err(GeometryError::Dimension);
    }
    for ball in [a, b] {
        if ball.r_sq < 0.0 {
            return Err(GeometryError::NegativeRadius(ball.r_sq));
        }
    }
    let d_sq = vecops::dist_sq(&a.center, &b.center);
    let d = libm::sqrt(d_sq);
    let (ra, rb) = (libm::sqrt(a.r_sq), libm::sqrt(b.r_sq));
    let radius_sum = ra + rb;
    if d > radius_sum + 1e-9 * radius_sum {
        return Err(GeometryError::Disjoint {
            distance: d,
            radius_sum,
        });
    }
    if d <= 1e-15 * ra.max(rb) || d_sq == 0.0 {
        return Ok(if a.r_sq <= b.r_sq { a.clone() } else { b.clone() });
    }
    let lambda = 0.5 * (1.0 + (a.r_sq - b.r_sq) / d_sq);
    if lambda >= 1.0 {
        return Ok(b.clone());
    }
    if lambda <= 0.0 {
        return Ok(a.clone());
    }
    let center = a
        .center
        .iter()
        .zip(&b.center)
        .map(|(xa, xb)| xa + lambda * (xb - xa))
        .collect();
    // squared distance from the rim plane to x_A, written to avoid squaring λ
    let offset = 0.5 * (d_sq + a.r_sq - b.r_sq) / d;
    Ok(Ball::new(center, a.r_sq - offset * offset))
}

/// Weights on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    /// Validates `λᵢ ≥ 0` and `Σλᵢ = 1` to `1e−10`.
    pub fn new(weights: Vec<f64>) -> Option<Self> {
        let sum: f64 = weights.iter().sum();
        if weights.iter().all(|w| *w >= 0.0) && (sum - 1.0).abs() <= 1e-10 && !weights.is_empty() {
            Some(Self(weights))
        } else {
            None
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Euclidean projection onto `{λ ≥ 0, Σλ = 1}`.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if uj - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Result of [`rcc_dual_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct RccSolution {
    pub weights: SimplexWeights,
    /// Center `Cλ*` and squared radius equal to the optimal dual value.
    pub ball: Ball,
    /// Frank–Wolfe gap at the returned weights; bounds the objective error.
    pub gap: f64,
    pub iterations: usize,
    /// `m < n`: the relaxation is then tight and the ball is the true
    /// minimum enclosing ball of the intersection. Otherwise it is still an
    /// enclosing ball.
    pub tight: bool,
}

const QP_MAX_ITER: usize = 100_000;

/// Relaxed Chebyshev center of `∩ B(cᵢ, rᵢ²)` via the simplex dual
/// `min ‖Cλ‖² − Σλᵢ‖cᵢ‖² + Σλᵢrᵢ²`.
///
/// Any feasible `λ` gives a valid enclosing ball `B(Cλ, D(λ))`. The QP is
/// solved by accelerated projected gradient with adaptive restart and stops
/// once the Frank–Wolfe gap drops below `1e−12` of the problem scale.
pub fn rcc_dual_solve(centers: &[Vec<f64>], radii_sq: &[f64]) -> Result<RccSolution, GeometryError> {
    let (sol, converged) = rcc_dual_solve_warm(centers, radii_sq, None)?;
    if converged {
        Ok(sol)
    } else {
        Err(GeometryError::QpNotConverged {
            iterations: sol.iterations,
            gap: sol.gap,
        })
    }
}

/// [`rcc_dual_solve`] with an optional starting point; returns the best
/// weights found together with a convergence flag instead of failing.
pub fn rcc_dual_solve_warm(
    centers: &[Vec<f64>],
    radii_sq: &[f64],
    warm: Option<&[f64]>,
) -> Result<(RccSolution, bool), GeometryError> {
    let m = centers.len();
    if m == 0 || radii_sq.len() != m {
        return Err(GeometryError::NoBalls);
    }
    let n = centers[0].len();
    if centers.iter().any(|c| c.len() != n) {
        return Err(GeometryError::Dimension);
    }
    if m == 1 {
        return Ok((
            RccSolution {
                weights: SimplexWeights(vec![1.0]),
                ball: Ball::new(centers[0].clone(), radii_sq[0]),
                gap: 0.0,
                iterations: 0,
                tight: 1 < n,
            },
            true,
        ));
    }

    // The objective is translation invariant; work relative to the first
    // center so the Gram matrix has the scale of the configuration.
    let origin = &centers[0];
    let shifted: Vec<Vec<f64>> = centers.iter().map(|c| vecops::sub(c, origin)).collect();
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let g = vecops::dot(&shifted[i], &shifted[j]);
            gram[i * m + j] = g;
            gram[j * m + i] = g;
        }
    }
    let linear: Vec<f64> = (0..m).map(|i| radii_sq[i] - gram[i * m + i]).collect();

    let gram_times = |lam: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|i| vecops::dot(&gram[i * m..(i + 1) * m], lam))
            .collect()
    };
    let gradient = |lam: &[f64]| -> Vec<f64> {
        gram_times(lam)
            .into_iter()
            .zip(&linear)
            .map(|(g, q)| 2.0 * g + q)
            .collect()
    };
    let value = |lam: &[f64]| -> f64 { vecops::dot(lam, &gram_times(lam)) + vecops::dot(&linear, lam) };
    let fw_gap = |lam: &[f64], grad: &[f64]| -> f64 {
        let min_g = grad.iter().copied().fold(f64::INFINITY, f64::min);
        (vecops::dot(grad, lam) - min_g).max(0.0)
    };

    let trace: f64 = (0..m).map(|i| gram[i * m + i]).sum();
    let gershgorin = (0..m)
        .map(|i| gram[i * m..(i + 1) * m].iter().map(|g| g.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let lipschitz = 2.0 * trace.min(gershgorin);
    let scale = radii_sq
        .iter()
        .map(|r| r.abs())
        .chain((0..m).map(|i| gram[i * m + i]))
        .fold(0.0, f64::max);
    let tol = 1e-12 * scale;

    let mut lam = match warm {
        Some(w) if w.len() == m => project_simplex(w),
        _ => vec![1.0 / m as f64; m],
    };
    let mut grad = gradient(&lam);
    let mut gap = fw_gap(&lam, &grad);
    let mut iterations = 0;
    if lipschitz > 0.0 {
        let mut y = lam.clone();
        let mut momentum = 1.0_f64;
        while gap > tol && iterations < QP_MAX_ITER {
            iterations += 1;
            let gy = gradient(&y);
            let step: Vec<f64> = y.iter().zip(&gy).map(|(yi, gi)| yi - gi / lipschitz).collect();
            let next = project_simplex(&step);
            let next_momentum = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * momentum * momentum));
            let delta = vecops::sub(&next, &lam);
            if vecops::dot(&gy, &delta) > 0.0 {
                // restart: the extrapolated direction points uphill
                momentum = 1.0;
                y = next.clone();
            } else {
                let coef = (momentum - 1.0) / next_momentum;
                y = vecops::add_scaled(&next, coef, &delta);
                momentum = next_momentum;
            }
            lam = next;
            grad = gradient(&lam);
            gap = fw_gap(&lam, &grad);
        }
    } else {
        // all centers coincide: the smallest ball wins
        let best = (0..m)
            .min_by(|&i, &j| radii_sq[i].total_cmp(&radii_sq[j]))
            .expect("m >= 2");
        lam = vec![0.0; m];
        lam[best] = 1.0;
        gap = 0.0;
    }

    let mut center = origin.clone();
    for (w, p) in lam.iter().zip(&shifted) {
        if *w != 0.0 {
            center.iter_mut().zip(p).for_each(|(c, pi)| *c += w * pi);
        }
    }
    let r_sq = value(&lam);
    let converged = gap <= tol;
    Ok((
        RccSolution {
            weights: SimplexWeights(lam),
            ball: Ball::new(center, r_sq),
            gap,
            iterations,
            tight: m < n,
        },
        converged,
    ))
}
