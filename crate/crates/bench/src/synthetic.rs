//! Seeded synthetic elastic-net instances.
//!
//! `A` has i.i.d. standard Gaussian entries and the planted `x̄` has
//! `⌈density·n⌉` nonzeros at uniformly sampled positions with values
//! `3·N(0,1)`. Everything is drawn from a ChaCha8 stream seeded with
//! `seed`, in the order `A`, support, values, noise, labels.

use geopg_core::SparseDesign;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const NOISE_LEVEL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub p: usize,
    pub n: usize,
    pub seed: u64,
    /// Fraction of nonzero entries in the planted solution.
    pub density: f64,
}

impl SyntheticSpec {
    pub fn new(p: usize, n: usize, seed: u64) -> Self {
        Self {
            p,
            n,
            seed,
            density: 0.1,
        }
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    pub fn support_size(&self) -> usize {
        let k = self.density * self.n as f64;
        // 0.1·n can land a hair above an integer
        let k = (k * 1e9).round() / 1e9;
        (k.ceil() as usize).min(self.n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub design: SparseDesign,
    pub x_bar: Vec<f64>,
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Dense `A` in row-major order and the planted solution.
fn draw_base(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    assert!(spec.p >= 1 && spec.n >= 1, "synthetic sizes must be positive");
    let a: Vec<f64> = (0..spec.p * spec.n).map(|_| gaussian(rng)).collect();
    let mut x_bar = vec![0.0; spec.n];
    let support = index::sample(rng, spec.n, spec.support_size()).into_vec();
    for j in support {
        x_bar[j] = 3.0 * gaussian(rng);
    }
    (a, x_bar)
}

fn dense_matvec(a: &[f64], cols: usize, x: &[f64]) -> Vec<f64> {
    a.chunks(cols)
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

/// Projects the rows of `A` off the eigenvector of the smallest eigenvalue
/// of `AᵀA`, so that eigenvalue becomes 0 and the others are untouched.
fn truncate_smallest_eigenvalue(a: &mut [f64], p: usize, n: usize) {
    let m = DMatrix::from_row_slice(p, n, a);
    let gram = m.transpose() * &m;
    let eig = SymmetricEigen::new(gram);
    let (idx, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("n >= 1");
    let v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
    for row in a.chunks_mut(n) {
        let av: f64 = row.iter().zip(&v).map(|(r, vi)| r * vi).sum();
        row.iter_mut().zip(&v).for_each(|(r, vi)| *r -= av * vi);
    }
}

/// Least-squares instance: `b = A x̄ + 0.01·N(0,1)`, with the smallest
/// eigenvalue of `AᵀA` truncated to zero when `p > n`.
pub fn generate_ls(spec: &SyntheticSpec) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (mut a, x_bar) = draw_base(spec, &mut rng);
    if spec.p > spec.n {
        truncate_smallest_eigenvalue(&mut a, spec.p, spec.n);
    }
    let b: Vec<f64> = dense_matvec(&a, spec.n, &x_bar)
        .into_iter()
        .map(|v| v + NOISE_LEVEL * gaussian(&mut rng))
        .collect();
    let design = SparseDesign::from_dense(spec.p, spec.n, &a, b).expect("shape is consistent");
    Synthetic { design, x_bar }
}

/// Logistic instance: with `ℓ = A x̄ + 0.01·N(0,1)`, label `bᵢ = +1` with
/// probability `1/(1 + exp ℓᵢ)` and `−1` otherwise.
pub fn generate_logistic(spec: &SyntheticSpec) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (a, x_bar) = draw_base(spec, &mut rng);
    let ell: Vec<f64> = dense_matvec(&a, spec.n, &x_bar)
        .into_iter()
        .map(|v| v + NOISE_LEVEL * gaussian(&mut rng))
        .collect();
    let b: Vec<f64> = ell
        .iter()
        .map(|&l| {
            let prob = 1.0 / (1.0 + l.exp());
            if rng.random::<f64>() < prob {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let design = SparseDesign::from_dense(spec.p, spec.n, &a, b).expect("shape is consistent");
    Synthetic { design, x_bar }
}

pub fn gen_synthetic_ls(p: usize, n: usize, seed: u64) -> (SparseDesign, Vec<f64>) {
    let s = generate_ls(&SyntheticSpec::new(p, n, seed));
    (s.design, s.x_bar)
}

pub fn gen_synthetic_logistic(p: usize, n: usize, seed: u64) -> SparseDesign {
    generate_logistic(&SyntheticSpec::new(p, n, seed)).design
}
