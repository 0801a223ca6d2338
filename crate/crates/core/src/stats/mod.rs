//! Empirical measurement: degree histograms, replicated ensembles,
//! discrete power-law fitting and theory-versus-simulation diagnostics.

mod diagnostics;
mod ensemble;
mod histogram;
mod powerlaw;
pub mod zeta;

pub use diagnostics::{
    compare_to_theory, qs_diagnostics, variance_growth_fit, Comparison, ComparisonRow, DiagnosticError, QsReport,
    QsRow, VarianceGrowth,
};
pub use ensemble::{
    run_ensemble, CheckpointSummary, DegreeMoment, EnsembleAccumulator, EnsembleError, EnsembleSummary, Moment,
};
pub use histogram::{degree_histogram, DegreeHistogram};
pub use powerlaw::{fit_power_law, FitError, PowerLawFit};
