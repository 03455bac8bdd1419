//! Timed and counted sorting experiments over parameter grids.
//!
//! Every trial draws a fresh dataset from a seed derived from the master
//! seed, the cell index and the trial index; only the sort call itself sits
//! inside the timed region. In comparison-count mode the elapsed column is
//! written as zero and trials run in parallel, so the output is a pure
//! function of the plan. Wall-time measurements always run one sort at a
//! time.

use std::fmt;
use std::fs::{self, File};
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::distgen::{generate_dataset, DistError, DistributionSpec};
use crate::rng::derive_seed;
use crate::sortcore::{partition_sort_in_place, quicksort_in_place, Key, PartitionStrategy, SortStats};

/// Exact CSV header of the per-trial record file.
pub const RECORD_HEADER: [&str; 8] = ["n", "k", "p", "trial", "seed", "elapsed_s", "comparisons", "swaps"];
pub const SUMMARY_HEADER: [&str; 7] = ["n", "k", "p", "trials", "mean_time_s", "sd_time_s", "mean_comparisons"];
pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const DEFAULT_TRIALS: u32 = 100;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("writing results failed ({source}); partial results left at {partial}")]
    Partial { partial: PathBuf, source: io::Error },
    #[error("{path}, line {line}: {message}")]
    Csv { path: PathBuf, line: u64, message: String },
    #[error("grid is incomplete; missing (n, k, p) cells: {}", fmt_cells(.0))]
    MissingCells(Vec<(f64, f64, f64)>),
    #[error("{0}")]
    Trend(String),
}

fn fmt_cells(cells: &[(f64, f64, f64)]) -> String {
    cells
        .iter()
        .map(|(n, k, p)| format!("({n}, {k}, {p})"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Measure {
    WallTime,
    #[default]
    Comparisons,
    Both,
}

impl Measure {
    pub fn times(self) -> bool {
        matches!(self, Measure::WallTime | Measure::Both)
    }
}

/// Something that sorts a key slice in place and reports its counters.
///
/// `seed` is the trial seed; randomized algorithms derive their pivot
/// stream from it.
pub trait Sorter: Sync {
    fn sort(&self, keys: &mut [Key], seed: u64) -> SortStats;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SortAlgorithm {
    #[default]
    PartitionDeterministic,
    PartitionRandomized,
    Quicksort,
}

/// Pivot streams are keyed off the trial seed but never equal to it, so
/// they are not correlated with the dataset stream.
const PIVOT_STREAM_TWEAK: u64 = 0xA5A5_5A5A_C3C3_3C3C;

impl Sorter for SortAlgorithm {
    fn sort(&self, keys: &mut [Key], seed: u64) -> SortStats {
        match self {
            SortAlgorithm::PartitionDeterministic => {
                partition_sort_in_place(keys, PartitionStrategy::DeterministicSelect)
            }
            SortAlgorithm::PartitionRandomized => partition_sort_in_place(
                keys,
                PartitionStrategy::RandomizedSelect {
                    seed: seed ^ PIVOT_STREAM_TWEAK,
                },
            ),
            SortAlgorithm::Quicksort => quicksort_in_place(keys, seed ^ PIVOT_STREAM_TWEAK),
        }
    }
}

/// One grid point. `index` feeds seed derivation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub index: u64,
    pub n: usize,
    pub dist: DistributionSpec,
}

impl Cell {
    /// The `(k, p)` pair written to the CSV. For binomial inputs `k` holds
    /// the number of trials `m`.
    pub fn key_params(&self) -> Result<(u64, f64), HarnessError> {
        match self.dist {
            DistributionSpec::NegBinomial { k, p } => Ok((k, p)),
            DistributionSpec::Binomial { m, p } => Ok((m, p)),
            DistributionSpec::UniformInt { .. } => Err(HarnessError::InvalidPlan(
                "uniform inputs have no (k, p) identity and cannot be recorded".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub k: u64,
    pub p: f64,
    pub trial: u32,
    pub seed: u64,
    pub elapsed_s: f64,
    pub comparisons: u64,
    pub swaps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub n: usize,
    pub k: u64,
    pub p: f64,
    pub trials: u32,
    /// T: arithmetic mean of the trial times, in seconds.
    pub mean_time: f64,
    pub sd_time: f64,
    pub mean_comparisons: f64,
}

impl CellSummary {
    /// Exact aggregate of a non-empty set of records from one cell.
    pub fn from_records(records: &[TrialRecord]) -> Self {
        assert!(!records.is_empty(), "summary of zero records");
        let first = records[0];
        let count = records.len() as f64;
        let mean_time = records.iter().map(|r| r.elapsed_s).sum::<f64>() / count;
        let sd_time = if records.len() > 1 {
            let ss: f64 = records.iter().map(|r| (r.elapsed_s - mean_time).powi(2)).sum();
            (ss / (count - 1.0)).sqrt()
        } else {
            0.0
        };
        let mean_comparisons = records.iter().map(|r| r.comparisons as f64).sum::<f64>() / count;
        Self {
            n: first.n,
            k: first.k,
            p: first.p,
            trials: records.len() as u32,
            mean_time,
            sd_time,
            mean_comparisons,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub measure: Measure,
    /// Untimed sorts of the first dataset before the timed trials.
    pub warmup: u32,
    /// Sort copies of one dataset in every trial instead of drawing a fresh one.
    pub reuse_dataset: bool,
}

pub fn run_cell<S: Sorter>(
    cell: &Cell,
    trials: u32,
    master_seed: u64,
    options: &RunOptions,
    sorter: &S,
) -> Result<(CellSummary, Vec<TrialRecord>), HarnessError> {
    if trials == 0 {
        return Err(HarnessError::InvalidPlan("trials must be at least 1".into()));
    }
    let (k, p) = cell.key_params()?;
    cell.dist.validate()?;

    let seed_of = |trial: u32| {
        let t = if options.reuse_dataset { 0 } else { trial };
        derive_seed(master_seed, cell.index, u64::from(t))
    };
    let shared = if options.reuse_dataset {
        Some(generate_dataset(&cell.dist, cell.n, seed_of(0))?)
    } else {
        None
    };
    let dataset = |trial: u32| -> Result<Vec<Key>, HarnessError> {
        match &shared {
            Some(keys) => Ok(keys.clone()),
            None => Ok(generate_dataset(&cell.dist, cell.n, seed_of(trial))?),
        }
    };

    let one_trial = |trial: u32, timed: bool| -> Result<TrialRecord, HarnessError> {
        let seed = seed_of(trial);
        let mut keys = dataset(trial)?;
        let (stats, elapsed_s) = if timed {
            let start = Instant::now();
            let stats = sorter.sort(&mut keys, seed);
            (stats, start.elapsed().as_secs_f64())
        } else {
            (sorter.sort(&mut keys, seed), 0.0)
        };
        Ok(TrialRecord {
            n: cell.n,
            k,
            p,
            trial,
            seed,
            elapsed_s,
            comparisons: stats.comparisons,
            swaps: stats.swaps,
        })
    };

    let records = if options.measure.times() {
        for _ in 0..options.warmup {
            let mut keys = dataset(0)?;
            sorter.sort(&mut keys, seed_of(0));
        }
        (0..trials).map(|t| one_trial(t, true)).collect::<Result<Vec<_>, _>>()?
    } else {
        (0..trials)
            .into_par_iter()
            .map(|t| one_trial(t, false))
            .collect::<Result<Vec<_>, _>>()?
    };
    Ok((CellSummary::from_records(&records), records))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub n_levels: Vec<usize>,
    pub dist_grid: Vec<DistributionSpec>,
    pub trials_per_cell: u32,
    pub master_seed: u64,
    pub algorithm: SortAlgorithm,
    pub options: RunOptions,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials_per_cell < 1 {
            return Err(HarnessError::InvalidPlan("trials must be at least 1".into()));
        }
        if self.n_levels.is_empty() || self.dist_grid.is_empty() {
            return Err(HarnessError::InvalidPlan("grid has no cells".into()));
        }
        for cell in self.cells() {
            cell.dist.validate()?;
            cell.key_params()?;
        }
        Ok(())
    }

    /// Cells in grid order: sizes outermost, then distributions.
    pub fn cells(&self) -> Vec<Cell> {
        self.n_levels
            .iter()
            .flat_map(|&n| self.dist_grid.iter().map(move |&dist| (n, dist)))
            .enumerate()
            .map(|(i, (n, dist))| Cell {
                index: i as u64,
                n,
                dist,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub summaries: Vec<CellSummary>,
    pub records: Vec<TrialRecord>,
}

/// Runs every cell of `plan` in memory.
pub fn run_plan(plan: &ExperimentPlan) -> Result<GridResult, HarnessError> {
    plan.validate()?;
    let mut result = GridResult {
        summaries: Vec::new(),
        records: Vec::new(),
    };
    for cell in plan.cells() {
        let (summary, records) = run_cell(
            &cell,
            plan.trials_per_cell,
            plan.master_seed,
            &plan.options,
            &plan.algorithm,
        )?;
        result.summaries.push(summary);
        result.records.extend(records);
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutput {
    pub records_path: PathBuf,
    pub summary_path: PathBuf,
    pub summaries: Vec<CellSummary>,
}

fn partial_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

/// Runs `plan` and persists `records.csv` and `summary.csv` into `out_dir`.
///
/// Records are appended to `records.csv.partial` cell by cell and the file
/// is renamed once the grid completes, so a failure leaves the finished cells
/// on disk under the `.partial` name.
pub fn run_grid(plan: &ExperimentPlan, out_dir: &Path) -> Result<GridOutput, HarnessError> {
    plan.validate()?;
    fs::create_dir_all(out_dir).map_err(|source| HarnessError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let records_path = out_dir.join(RECORDS_FILE);
    let summary_path = out_dir.join(SUMMARY_FILE);
    let partial = partial_path(&records_path);
    let fail = |source: io::Error| HarnessError::Partial {
        partial: partial.clone(),
        source,
    };

    let mut writer = RecordWriter::create(&partial).map_err(fail)?;
    let mut summaries = Vec::new();
    for cell in plan.cells() {
        let (summary, records) = run_cell(
            &cell,
            plan.trials_per_cell,
            plan.master_seed,
            &plan.options,
            &plan.algorithm,
        )?;
        for r in &records {
            writer.write(r).map_err(fail)?;
        }
        writer.flush().map_err(fail)?;
        summaries.push(summary);
    }
    drop(writer);
    fs::rename(&partial, &records_path).map_err(fail)?;
    write_summaries(&summary_path, &summaries)?;
    Ok(GridOutput {
        records_path,
        summary_path,
        summaries,
    })
}

fn csv_io(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

/// Streaming writer for the per-trial CSV.
pub struct RecordWriter<W: io::Write> {
    inner: csv::Writer<W>,
}

impl RecordWriter<File> {
    pub fn create(path: &Path) -> io::Result<Self> {
        Self::new(File::create(path)?)
    }
}

impl<W: io::Write> RecordWriter<W> {
    pub fn new(sink: W) -> io::Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
        inner.write_record(RECORD_HEADER).map_err(csv_io)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, r: &TrialRecord) -> io::Result<()> {
        self.inner
            .write_record([
                r.n.to_string(),
                r.k.to_string(),
                r.p.to_string(),
                r.trial.to_string(),
                r.seed.to_string(),
                format!("{:.9}", r.elapsed_s),
                r.comparisons.to_string(),
                r.swaps.to_string(),
            ])
            .map_err(csv_io)
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }

    pub fn into_inner(self) -> io::Result<W> {
        self.inner.into_inner().map_err(|e| io::Error::other(e.to_string()))
    }
}

pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut w = RecordWriter::new(Vec::new()).expect("in-memory write");
    for r in records {
        w.write(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("ascii csv")
}

pub fn write_summaries(path: &Path, summaries: &[CellSummary]) -> Result<(), HarnessError> {
    let io_err = |source: io::Error| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(csv_io(e)))?;
    w.write_record(SUMMARY_HEADER).map_err(|e| io_err(csv_io(e)))?;
    for s in summaries {
        w.write_record([
            s.n.to_string(),
            s.k.to_string(),
            s.p.to_string(),
            s.trials.to_string(),
            format!("{:.9}", s.mean_time),
            format!("{:.9}", s.sd_time),
            s.mean_comparisons.to_string(),
        ])
        .map_err(|e| io_err(csv_io(e)))?;
    }
    w.flush().map_err(io_err)
}

/// Reads a per-trial CSV. The header must match [`RECORD_HEADER`] exactly.
pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>, HarnessError> {
    let file = File::open(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_records(file, path)
}

pub fn parse_records<R: io::Read>(input: R, path: &Path) -> Result<Vec<TrialRecord>, HarnessError> {
    let err = |line: u64, message: String| HarnessError::Csv {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.iter().ne(RECORD_HEADER) {
        return Err(err(1, format!("expected header {}", RECORD_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| row.get(i).unwrap_or("");
        macro_rules! parse {
            ($i:expr) => {
                field($i)
                    .trim()
                    .parse()
                    .map_err(|_| err(line, format!("bad {} value '{}'", RECORD_HEADER[$i], field($i))))?
            };
        }
        out.push(TrialRecord {
            n: parse!(0),
            k: parse!(1),
            p: parse!(2),
            trial: parse!(3),
            seed: parse!(4),
            elapsed_s: parse!(5),
            comparisons: parse!(6),
            swaps: parse!(7),
        });
    }
    Ok(out)
}

/// Groups records by `(n, k, p)` in first-seen order and summarizes each group.
pub fn summarize_records(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut groups: Vec<((usize, u64, u64), Vec<TrialRecord>)> = Vec::new();
    for r in records {
        let key = (r.n, r.k, r.p.to_bits());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, g)) => g.push(*r),
            None => groups.push((key, vec![*r])),
        }
    }
    groups.iter().map(|(_, g)| CellSummary::from_records(g)).collect()
}

/// Writes `x y` pairs, one per line, for plotting.
pub fn write_plot_data(path: &Path, points: &[(f64, f64)]) -> Result<(), HarnessError> {
    let body: String = points.iter().map(|(x, y)| format!("{x} {y}\n")).collect();
    fs::write(path, body).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    N,
    K,
    P,
}

impl Axis {
    pub fn of(self, r: &TrialRecord) -> f64 {
        match self {
            Axis::N => r.n as f64,
            Axis::K => r.k as f64,
            Axis::P => r.p,
        }
    }

    fn of_summary(self, s: &CellSummary) -> f64 {
        match self {
            Axis::N => s.n as f64,
            Axis::K => s.k as f64,
            Axis::P => s.p,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::N => "n",
            Axis::K => "k",
            Axis::P => "p",
        }
    }

    fn remaining(a: Axis, b: Axis) -> Axis {
        [Axis::N, Axis::K, Axis::P]
            .into_iter()
            .find(|&x| x != a && x != b)
            .expect("three axes")
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

/// Mean-time table laid out as `cells[slab][row][col]`, where the slab axis
/// is whichever of n, k, p is neither the row nor the column axis.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTable {
    pub row_axis: Axis,
    pub col_axis: Axis,
    pub slab_axis: Axis,
    pub row_levels: Vec<f64>,
    pub col_levels: Vec<f64>,
    pub slab_levels: Vec<f64>,
    pub cells: Vec<Vec<Vec<f64>>>,
}

fn levels(records: &[TrialRecord], axis: Axis) -> Vec<f64> {
    let mut v: Vec<f64> = records.iter().map(|r| axis.of(r)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

pub fn summarize_table(records: &[TrialRecord], row_axis: Axis, col_axis: Axis) -> Result<MeanTable, HarnessError> {
    if row_axis == col_axis {
        return Err(HarnessError::InvalidPlan("row and column axes must differ".into()));
    }
    let slab_axis = Axis::remaining(row_axis, col_axis);
    let (rows, cols, slabs) = (
        levels(records, row_axis),
        levels(records, col_axis),
        levels(records, slab_axis),
    );
    let mut sums = vec![vec![vec![(0.0, 0u32); cols.len()]; rows.len()]; slabs.len()];
    let index = |lv: &[f64], x: f64| lv.iter().position(|&l| l == x).expect("level present");
    for r in records {
        let cell =
            &mut sums[index(&slabs, slab_axis.of(r))][index(&rows, row_axis.of(r))][index(&cols, col_axis.of(r))];
        cell.0 += r.elapsed_s;
        cell.1 += 1;
    }

    let mut missing = Vec::new();
    for (si, &s) in slabs.iter().enumerate() {
        for (ri, &rv) in rows.iter().enumerate() {
            for (ci, &cv) in cols.iter().enumerate() {
                if sums[si][ri][ci].1 == 0 {
                    let mut nkp = [0.0; 3];
                    for (axis, v) in [(row_axis, rv), (col_axis, cv), (slab_axis, s)] {
                        nkp[axis as usize] = v;
                    }
                    missing.push((nkp[0], nkp[1], nkp[2]));
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(HarnessError::MissingCells(missing));
    }
    let cells = sums
        .into_iter()
        .map(|slab| {
            slab.into_iter()
                .map(|row| row.into_iter().map(|(sum, c)| sum / f64::from(c)).collect())
                .collect()
        })
        .collect();
    Ok(MeanTable {
        row_axis,
        col_axis,
        slab_axis,
        row_levels: rows,
        col_levels: cols,
        slab_levels: slabs,
        cells,
    })
}

impl fmt::Display for MeanTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (si, slab) in self.cells.iter().enumerate() {
            writeln!(f, "{}={}", self.slab_axis, self.slab_levels[si])?;
            write!(f, "{:<10}", self.row_axis)?;
            for c in &self.col_levels {
                write!(f, "{:>14}", format!("{}={}", self.col_axis, c))?;
            }
            writeln!(f)?;
            for (ri, row) in slab.iter().enumerate() {
                write!(f, "{:<10}", self.row_levels[ri])?;
                for v in row {
                    write!(f, "{:>14.6}", v)?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// Whether the cell means fall as one grid axis increases.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendReport {
    pub axis: Axis,
    /// `(axis value, mean time, mean comparisons)`, sorted by axis value.
    pub points: Vec<(f64, f64, f64)>,
    pub time_decreasing: bool,
    pub comparisons_decreasing: bool,
}

/// The summaries must differ only along `axis`.
pub fn trend_report(summaries: &[CellSummary], axis: Axis) -> Result<TrendReport, HarnessError> {
    let others: Vec<Axis> = [Axis::N, Axis::K, Axis::P].into_iter().filter(|&a| a != axis).collect();
    if let Some(first) = summaries.first() {
        for o in &others {
            if summaries.iter().any(|s| o.of_summary(s) != o.of_summary(first)) {
                return Err(HarnessError::Trend(format!(
                    "summaries vary along {o} as well as {axis}; fix {o} to report a trend"
                )));
            }
        }
    }
    let mut points: Vec<(f64, f64, f64)> = summaries
        .iter()
        .map(|s| (axis.of_summary(s), s.mean_time, s.mean_comparisons))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let decreasing = |f: fn(&(f64, f64, f64)) -> f64| points.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    Ok(TrendReport {
        axis,
        time_decreasing: decreasing(|t| t.1),
        comparisons_decreasing: decreasing(|t| t.2),
        points,
    })
}

impl fmt::Display for TrendReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = |b: bool| {
            if b {
                "decreasing"
            } else {
                "NOT monotonically decreasing"
            }
        };
        writeln!(f, "trend along {}:", self.axis)?;
        for (x, t, c) in &self.points {
            writeln!(
                f,
                "  {}={:<8} mean_time={:.9} mean_comparisons={:.1}",
                self.axis, x, t, c
            )?;
        }
        writeln!(f, "  mean time: {}", verdict(self.time_decreasing))?;
        write!(f, "  mean comparisons: {}", verdict(self.comparisons_decreasing))
    }
}
