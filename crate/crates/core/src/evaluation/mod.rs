//! Fold allocation, metrics and the cross-validation driver.

mod cv;
mod folds;
mod metrics;

pub use cv::{run_cv, run_single_split, CvOptions, FoldReport, MetricsReport};
pub use folds::{
    fold_balance_report, make_folds, patient_wise_folds, seizure_wise_folds, BalanceReport, CvMode,
    FoldAssignment, SeedBalance,
};
pub use metrics::{weighted_f1, ClassMetrics, ConfusionMatrix};
