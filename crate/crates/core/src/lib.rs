//! Partition Sort laboratory.
//!
//! * [`sortcore`]: Partition Sort with exact half splits, a quicksort
//!   baseline, comparison and swap counters.
//! * [`distgen`]: seeded negative binomial, binomial and uniform inputs.
//! * [`harness`]: trial-averaged timing and comparison counts over grids,
//!   persisted as CSV.
//! * [`statmodel`]: least-squares fits over basis functions and empirical-O
//!   model selection.
//! * [`anova`]: balanced full-factorial ANOVA with F tests.

pub mod anova;
pub mod distgen;
pub mod harness;
pub mod reference;
pub mod rng;
pub mod sortcore;
pub mod special;
pub mod statmodel;

pub use anova::{anova_full_factorial, AnovaError, AnovaRow, AnovaTable, Factor, FactorialDesign, Observation, Source};
pub use distgen::{
    binomial_sample, generate_dataset, geometric_sample, nb_sample, DistError, DistributionSpec, NbMethod,
};
pub use harness::{
    run_cell, run_grid, run_plan, summarize_table, Axis, Cell, CellSummary, ExperimentPlan, HarnessError, Measure,
    RunOptions, SortAlgorithm, Sorter, TrialRecord,
};
pub use rng::{derive_seed, RngStream};
pub use sortcore::{
    partition, partition_sort, partition_sort_in_place, quicksort_baseline, select_kth, Key, KeyArray,
    PartitionStrategy, Partitioner, SortError, SortStats,
};
pub use special::{f_pvalue, reg_inc_beta};
pub use statmodel::{least_squares_fit, predict, select_model, BasisFn, BasisSpec, FitError, ModelFit, Predictors};
