//! LIBSVM IO, synthetic elastic-net instances, CSV traces and the
//! experiment driver behind the `geopg-bench` command.

pub mod experiment;
pub mod libsvm;
pub mod synthetic;
pub mod trace_csv;

pub use experiment::{
    compute_reference_fstar, run_experiment, Criterion, DataSource, ExperimentReport, ExperimentSpec, MuRule,
    Problem, ProblemKind, Reference, ReferenceBudget,
};
pub use libsvm::{parse_libsvm, parse_libsvm_str, write_libsvm, LibsvmError};
pub use synthetic::{gen_synthetic_logistic, gen_synthetic_ls, generate_logistic, generate_ls, Synthetic, SyntheticSpec};
pub use trace_csv::{read_trace, write_trace, HEADER};
