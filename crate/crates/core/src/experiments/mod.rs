//! Replicated finite-λ experiments: runs, power-law fits and the checks
//! built on them.

mod config;
mod diagnostics;
mod fit;
mod plot;
mod table;

pub use config::{known_limit, Centering, ExperimentConfig, FitRequest, Moment, OutputSpec};
pub use diagnostics::{
    clt_diagnostic, clt_from_samples, gamma_of, geometric_sum, invariance_test, iterated_from_samples,
    iterated_prediction_test, ks_to_normal, mean_content, prefactor_invariance, CltReport, InvarianceReport, IteratedEntry,
    IteratedReport, CLT_MIN_REPLICATES, ITERATED_MIN_REPLICATES,
};
pub use fit::{
    fit_prefactor, fit_prefactor_samples, fit_samples, fit_scaling, ols, percentile_ci, quantile, FitOptions,
    PrefactorFit, ScalingFit,
};
pub use plot::loglog_svg;
pub use table::{
    mean_var, run_experiment, summarize, ColumnSummary, LambdaSummary, ReplicateRow, ReplicateTable,
    TableMeta, TableSummary, TAINT_THRESHOLD,
};
