//! Experiment orchestration: convergence studies of `I(Z_n||Z)` against
//! the coefficient prediction, the inequality suite, and cf-decay
//! diagnostics.

mod cf_decay;
mod config;
mod inequalities;
mod study;

pub use cf_decay::{
    run_cf_decay_diagnostics, CfDecayReport, TvVerdict, WeightedVerdict, DECAY_CUTOFF, DECAY_GRID_DT,
    DECAY_GRID_POINTS, NU_GRID, TV_N,
};
pub use config::{parse_n_list, OutputFormat, Rho, StudyConfig};
pub use inequalities::{builtin_families, run_inequality_suite, InequalityCheck, InequalityReport};
pub use study::{
    expansion_coefficients, run_convergence_study, split_point, sum_density, tail_split, write_study_csv,
    write_study_json, ConvergenceRow, Measurement, RowOutcome, CSV_HEADER,
};
