//! Geometric proximal gradient methods for strongly convex composite
//! minimization `F(x) = f(x) + h(x)`.
//!
//! The crate is `no_std` and only needs an allocator. It contains
//!
//! * [`sparse`]: a row-compressed design matrix with counted products,
//! * [`problem`]: the composite problem contract, the elastic-net losses and
//!   the proximal gradient step,
//! * [`geometry`]: balls, the enclosing ball of a two-ball lens and the
//!   relaxed Chebyshev center over many balls,
//! * [`rootfind`]: the line search along `Line(x⁺, c)` that places each
//!   GeoPG iterate,
//! * [`solver`]: GeoPG, GeoPG with backtracking, the limited-memory variants
//!   and an accelerated proximal gradient baseline.
//!
//! File formats, synthetic data and the command line harness live in the
//! `geopg-bench` crate.

#![no_std]

extern crate alloc;

pub mod geometry;
pub mod problem;
pub mod rootfind;
pub mod solver;
pub mod sparse;
pub mod vecops;

pub use geometry::{min_enclosing_two_balls, rcc_dual_solve, Ball, GeometryError, SimplexWeights};
pub use problem::{
    prox_grad_step, soft_threshold, sufficient_decrease_holds, CompositeProblem, ElasticNetLogistic,
    ElasticNetLs, Iterate, ProblemError, SeparableQuadratic,
};
pub use rootfind::{find_xk_brent, find_xk_ssn, phi_bar, LineProbe, LineRoot, RootFindError};
pub use solver::{
    apg_b_run, geopg_b_run, geopg_run, lgeopg_run, solve, Monitor, RootFinder, Snapshot, SolverConfig,
    SolverError, Status, Termination, Trace, TraceRecord, Variant,
};
pub use sparse::{EvalCounters, SparseDesign, SparseError};
