//! Experiment plan files.
//!
//! A plan is a TOML document with two tables:
//!
//! ```toml
//! [grid]
//! n = [10000, 20000, 30000]   # one value or a list
//! k = 1000                     # NB successes (binomial: trials)
//! p = [0.2, 0.5, 0.8]
//! dist = "nb"                  # "nb" (default) or "binomial"
//!
//! [run]                        # every key optional
//! trials = 100
//! seed = 2012
//! measure = "comparisons"      # "time" | "comparisons" | "both"
//! algorithm = "partition"      # "partition" | "quick"
//! strategy = "det"             # "det" | "rand"
//! warmup = 0
//! reuse_dataset = false
//! ```
//!
//! The grid is the full cross product of `n`, `k` and `p`.

use std::path::Path;

use partlab::harness::DEFAULT_TRIALS;
use partlab::{DistributionSpec, ExperimentPlan, Measure, RunOptions, SortAlgorithm};
use serde::Deserialize;
use thiserror::Error;

pub const DEFAULT_SEED: u64 = 2012;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("cannot read plan {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("plan syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid plan field '{field}': {message}")]
    Semantic { field: String, message: String },
}

fn semantic(field: &str, message: impl Into<String>) -> PlanError {
    PlanError::Semantic {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    grid: GridSection,
    #[serde(default)]
    run: RunSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    n: OneOrMany<i64>,
    k: OneOrMany<i64>,
    p: OneOrMany<f64>,
    #[serde(default)]
    dist: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    trials: Option<i64>,
    seed: Option<u64>,
    measure: Option<String>,
    algorithm: Option<String>,
    strategy: Option<String>,
    warmup: Option<u32>,
    reuse_dataset: Option<bool>,
}

pub fn parse_measure(s: &str) -> Option<Measure> {
    match s {
        "time" | "wall" | "walltime" => Some(Measure::WallTime),
        "comparisons" | "counts" => Some(Measure::Comparisons),
        "both" => Some(Measure::Both),
        _ => None,
    }
}

/// `algorithm` is "partition" or "quick"; `strategy` only matters for
/// partition sort.
pub fn parse_algorithm(algorithm: &str, strategy: &str) -> Option<SortAlgorithm> {
    match (algorithm, strategy) {
        ("partition", "det") => Some(SortAlgorithm::PartitionDeterministic),
        ("partition", "rand") => Some(SortAlgorithm::PartitionRandomized),
        ("quick", "det" | "rand") => Some(SortAlgorithm::Quicksort),
        _ => None,
    }
}

pub fn load_plan(path: &Path) -> Result<ExperimentPlan, PlanError> {
    let text = std::fs::read_to_string(path).map_err(|source| PlanError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_plan(&text)
}

pub fn parse_plan(text: &str) -> Result<ExperimentPlan, PlanError> {
    let file: PlanFile = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map_or(0, |s| text[..s.start.min(text.len())].lines().count().max(1));
        PlanError::Syntax {
            line,
            message: e.message().to_string(),
        }
    })?;

    let n_levels = file
        .grid
        .n
        .into_vec()
        .into_iter()
        .map(|n| usize::try_from(n).map_err(|_| semantic("n", format!("size {n} must be nonnegative"))))
        .collect::<Result<Vec<_>, _>>()?;
    let ks = file.grid.k.into_vec();
    let ps = file.grid.p.into_vec();
    if n_levels.is_empty() || ks.is_empty() || ps.is_empty() {
        return Err(semantic("grid", "n, k and p each need at least one value"));
    }
    let binomial = match file.grid.dist.as_deref() {
        None | Some("nb") => false,
        Some("binomial") => true,
        Some(other) => {
            return Err(semantic(
                "dist",
                format!("unknown law '{other}' (expected nb or binomial)"),
            ))
        }
    };
    let mut dist_grid = Vec::new();
    for &k in &ks {
        if k < 1 {
            return Err(semantic("k", format!("{k} must be at least 1")));
        }
        for &p in &ps {
            let spec = if binomial {
                DistributionSpec::Binomial { m: k as u64, p }
            } else {
                DistributionSpec::NegBinomial { k: k as u64, p }
            };
            spec.validate().map_err(|e| semantic("p", e.to_string()))?;
            dist_grid.push(spec);
        }
    }

    let run = file.run;
    let trials = match run.trials {
        None => DEFAULT_TRIALS,
        Some(t) if t >= 1 => u32::try_from(t).map_err(|_| semantic("trials", "too large"))?,
        Some(t) => return Err(semantic("trials", format!("{t} must be at least 1"))),
    };
    let measure = match run.measure.as_deref() {
        None => Measure::default(),
        Some(m) => parse_measure(m).ok_or_else(|| semantic("measure", format!("unknown measure '{m}'")))?,
    };
    let algorithm_name = run.algorithm.as_deref().unwrap_or("partition");
    let strategy_name = run.strategy.as_deref().unwrap_or("det");
    let algorithm = parse_algorithm(algorithm_name, strategy_name).ok_or_else(|| {
        semantic(
            if matches!(algorithm_name, "partition" | "quick") {
                "strategy"
            } else {
                "algorithm"
            },
            format!("unsupported combination '{algorithm_name}' / '{strategy_name}'"),
        )
    })?;

    Ok(ExperimentPlan {
        n_levels,
        dist_grid,
        trials_per_cell: trials,
        master_seed: run.seed.unwrap_or(DEFAULT_SEED),
        algorithm,
        options: RunOptions {
            measure,
            warmup: run.warmup.unwrap_or(0),
            reuse_dataset: run.reuse_dataset.unwrap_or(false),
        },
    })
}
