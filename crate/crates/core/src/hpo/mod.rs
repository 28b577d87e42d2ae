//! Hyperparameter search: the fixed preprocessing grid and a seeded,
//! budgeted random search over classifier hyperparameters.

mod search;
mod space;
mod sweep;

pub use search::{random_search, SearchResult, Trial, TrialStatus};
pub use space::{
    config_from_params, default_space, Dimension, ParamValue, SearchSpace, TrialParams,
};
pub use sweep::{
    preproc_grid, select_top_configs, sweep_csv, sweep_preproc_grid, GridPoint, SweepRow,
    SweepTrial, GRID_F_MAX, GRID_O_FRAC, GRID_W_L,
};
