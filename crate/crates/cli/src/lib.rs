//! Command-line workflows for the Partition Sort laboratory.

pub mod plan;
pub mod repro;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use partlab::anova::design_from_labeled;
use partlab::harness::{parse_records, summarize_records, trend_report, write_plot_data, RECORD_HEADER};
use partlab::{
    anova_full_factorial, generate_dataset, partition_sort_in_place, run_grid, select_model, Axis, BasisSpec,
    DistributionSpec, Key, Measure, PartitionStrategy, Predictors, SortStats,
};

pub use plan::{load_plan, parse_plan, PlanError, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(name = "partlab", version, about = "Partition Sort benchmark laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Det,
    Rand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Partition,
    Quick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Time,
    Comparisons,
    Both,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::Time => Measure::WallTime,
            MeasureArg::Comparisons => Measure::Comparisons,
            MeasureArg::Both => Measure::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResponseArg {
    /// Mean elapsed seconds.
    Time,
    /// Mean comparison count.
    Comparisons,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    N,
    K,
    P,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::N => Axis::N,
            AxisArg::K => Axis::K,
            AxisArg::P => Axis::P,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReproTarget {
    Table1,
    Table2,
    Table3,
    Anova,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate keys from an input law.
    Gen {
        /// nb:K:P, binomial:M:P or uniform:LO:HI
        #[arg(long)]
        dist: DistributionSpec,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Little-endian 64-bit binary instead of one decimal key per line.
        #[arg(long)]
        binary: bool,
    },
    /// Sort a key file and report the counters.
    Sort {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        binary: bool,
        #[arg(long, value_enum, default_value_t = AlgorithmArg::Partition)]
        algorithm: AlgorithmArg,
        #[arg(long, value_enum, default_value_t = StrategyArg::Det)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment plan and write records.csv / summary.csv.
    Bench {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        measure: Option<MeasureArg>,
        #[arg(long, value_enum)]
        algorithm: Option<AlgorithmArg>,
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        #[arg(long)]
        warmup: Option<u32>,
        /// Sort copies of one dataset per cell instead of a fresh draw per trial.
        #[arg(long)]
        reuse_dataset: bool,
    },
    /// Fit candidate growth models to measured data.
    Fit {
        /// Harness records CSV, or a two-column `x,y` CSV.
        #[arg(long)]
        data: PathBuf,
        /// Predictor axis (inferred from a two-column header when omitted).
        #[arg(long, value_enum)]
        x: Option<AxisArg>,
        /// Comma-separated candidates: linear-n, nlogn, poly1, poly2, poly3.
        #[arg(long, value_delimiter = ',')]
        candidates: Vec<String>,
        #[arg(long, value_enum, default_value_t = ResponseArg::Time)]
        response: ResponseArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full-factorial ANOVA of measured data.
    Anova {
        /// Harness records CSV, or long format `factor1,...,y`.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = ResponseArg::Time)]
        response: ResponseArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the analyses on the bundled published data.
    Repro {
        #[arg(value_enum)]
        target: ReproTarget,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Gen {
            dist,
            n,
            seed,
            out,
            binary,
        } => cmd_gen(&dist, n, seed, out.as_deref(), binary, stdout),
        Command::Sort {
            input,
            binary,
            algorithm,
            strategy,
            seed,
            out,
        } => cmd_sort(&input, binary, algorithm, strategy, seed, out.as_deref(), stdout),
        Command::Bench {
            plan,
            out,
            trials,
            seed,
            measure,
            algorithm,
            strategy,
            warmup,
            reuse_dataset,
        } => {
            let mut plan = load_plan(&plan)?;
            if let Some(t) = trials {
                if t == 0 {
                    bail!("--trials must be at least 1");
                }
                plan.trials_per_cell = t;
            }
            if let Some(s) = seed {
                plan.master_seed = s;
            }
            if let Some(m) = measure {
                plan.options.measure = m.into();
            }
            if algorithm.is_some() || strategy.is_some() {
                let a = match algorithm.unwrap_or(AlgorithmArg::Partition) {
                    AlgorithmArg::Partition => "partition",
                    AlgorithmArg::Quick => "quick",
                };
                let s = match strategy.unwrap_or(StrategyArg::Det) {
                    StrategyArg::Det => "det",
                    StrategyArg::Rand => "rand",
                };
                plan.algorithm = plan::parse_algorithm(a, s).expect("all flag combinations are valid");
            }
            if let Some(w) = warmup {
                plan.options.warmup = w;
            }
            plan.options.reuse_dataset |= reuse_dataset;
            cmd_bench(&plan, &out, stdout)
        }
        Command::Fit {
            data,
            x,
            candidates,
            response,
            out,
        } => cmd_fit(&data, x.map(Axis::from), &candidates, response, out.as_deref(), stdout),
        Command::Anova { data, response, out } => cmd_anova(&data, response, out.as_deref(), stdout),
        Command::Repro { target, out } => repro::run(target, out.as_deref(), stdout),
    }
}

/// Writes `bytes` to `path` through a `.partial` file renamed on success.
pub fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut partial = path.as_os_str().to_owned();
    partial.push(".partial");
    let partial = PathBuf::from(partial);
    fs::write(&partial, bytes).with_context(|| format!("writing {} (partial output kept)", partial.display()))?;
    fs::rename(&partial, path).with_context(|| format!("renaming {} to {}", partial.display(), path.display()))
}

pub fn encode_keys(keys: &[Key], binary: bool) -> Vec<u8> {
    if binary {
        keys.iter().flat_map(|k| k.to_le_bytes()).collect()
    } else {
        keys.iter().map(|k| format!("{k}\n")).collect::<String>().into_bytes()
    }
}

pub fn decode_keys(bytes: &[u8], binary: bool) -> Result<Vec<Key>> {
    if binary {
        if !bytes.len().is_multiple_of(8) {
            bail!("binary key file length {} is not a multiple of 8", bytes.len());
        }
        return Ok(bytes
            .chunks_exact(8)
            .map(|c| Key::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect());
    }
    let text = std::str::from_utf8(bytes).context("key file is not UTF-8 text")?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<Key>()
                .with_context(|| format!("line {}: '{}' is not a 64-bit integer", i + 1, l.trim()))
        })
        .collect()
}

fn cmd_gen(
    dist: &DistributionSpec,
    n: usize,
    seed: u64,
    out: Option<&Path>,
    binary: bool,
    stdout: &mut dyn Write,
) -> Result<()> {
    let keys = generate_dataset(dist, n, seed)?;
    let bytes = encode_keys(&keys, binary);
    match out {
        Some(path) => write_atomically(path, &bytes),
        None => stdout.write_all(&bytes).map_err(Into::into),
    }
}

fn cmd_sort(
    input: &Path,
    binary: bool,
    algorithm: AlgorithmArg,
    strategy: StrategyArg,
    seed: u64,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let mut keys = decode_keys(&bytes, binary)?;
    let stats: SortStats = match (algorithm, strategy) {
        (AlgorithmArg::Quick, _) => partlab::sortcore::quicksort_in_place(&mut keys, seed),
        (AlgorithmArg::Partition, StrategyArg::Det) => {
            partition_sort_in_place(&mut keys, PartitionStrategy::DeterministicSelect)
        }
        (AlgorithmArg::Partition, StrategyArg::Rand) => {
            partition_sort_in_place(&mut keys, PartitionStrategy::RandomizedSelect { seed })
        }
    };
    writeln!(
        stdout,
        "n={} comparisons={} swaps={} max_depth={} max_select_depth={}",
        keys.len(),
        stats.comparisons,
        stats.swaps,
        stats.max_depth,
        stats.max_select_depth
    )?;
    if let Some(path) = out {
        write_atomically(path, &encode_keys(&keys, binary))?;
    }
    Ok(())
}

fn cmd_bench(plan: &partlab::ExperimentPlan, out: &Path, stdout: &mut dyn Write) -> Result<()> {
    let output = run_grid(plan, out)?;
    writeln!(
        stdout,
        "{} cells x {} trials -> {}",
        output.summaries.len(),
        plan.trials_per_cell,
        output.records_path.display()
    )?;
    writeln!(
        stdout,
        "{:>8} {:>6} {:>5} {:>14} {:>14} {:>16}",
        "n", "k", "p", "T (s)", "sd (s)", "comparisons"
    )?;
    for s in &output.summaries {
        writeln!(
            stdout,
            "{:>8} {:>6} {:>5} {:>14.9} {:>14.9} {:>16.1}",
            s.n, s.k, s.p, s.mean_time, s.sd_time, s.mean_comparisons
        )?;
    }
    // A one-dimensional sweep gets a trend line and plot files.
    for axis in [Axis::N, Axis::K, Axis::P] {
        if let Ok(report) = trend_report(&output.summaries, axis) {
            if report.points.len() < 2 {
                continue;
            }
            writeln!(stdout, "{report}")?;
            let time: Vec<(f64, f64)> = report.points.iter().map(|p| (p.0, p.1)).collect();
            let cmp: Vec<(f64, f64)> = report.points.iter().map(|p| (p.0, p.2)).collect();
            write_plot_data(&out.join(format!("plot_time_vs_{axis}.dat")), &time)?;
            write_plot_data(&out.join(format!("plot_comparisons_vs_{axis}.dat")), &cmp)?;
        }
    }
    Ok(())
}

/// Points loaded for fitting, with the axis they vary along.
struct FitData {
    axis: Axis,
    points: Vec<(Predictors, f64)>,
}

fn predictors(axis: Axis, x: f64) -> Predictors {
    match axis {
        Axis::N => Predictors::n(x),
        Axis::K => Predictors::k(x),
        Axis::P => Predictors::p(x),
    }
}

fn load_fit_data(path: &Path, axis: Option<Axis>, response: ResponseArg) -> Result<FitData> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let body: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let header: Vec<&str> = body.lines().next().unwrap_or("").split(',').map(str::trim).collect();
    if header == RECORD_HEADER {
        let records = parse_records(body.as_bytes(), path)?;
        let summaries = summarize_records(&records);
        let axis = match axis {
            Some(a) => a,
            None => [Axis::N, Axis::K, Axis::P]
                .into_iter()
                .find(|&a| trend_report(&summaries, a).is_ok() && summaries.len() > 1)
                .context("records vary along more than one of n, k, p; pass --x")?,
        };
        let points = summaries
            .iter()
            .map(|s| {
                let x = match axis {
                    Axis::N => s.n as f64,
                    Axis::K => s.k as f64,
                    Axis::P => s.p,
                };
                let y = match response {
                    ResponseArg::Time => s.mean_time,
                    ResponseArg::Comparisons => s.mean_comparisons,
                };
                (predictors(axis, x), y)
            })
            .collect();
        return Ok(FitData { axis, points });
    }
    if header.len() != 2 {
        bail!(
            "{}: expected the harness record header or two columns x,y",
            path.display()
        );
    }
    let axis = match axis {
        Some(a) => a,
        None => match header[0].to_ascii_lowercase().as_str() {
            "n" => Axis::N,
            "k" => Axis::K,
            "p" => Axis::P,
            other => bail!("cannot infer the predictor from column '{other}'; pass --x"),
        },
    };
    let mut points = Vec::new();
    for (i, line) in body.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (x, y) = line
            .split_once(',')
            .with_context(|| format!("line {}: expected x,y", i + 1))?;
        let x: f64 = x.trim().parse().with_context(|| format!("line {}: bad x", i + 1))?;
        let y: f64 = y.trim().parse().with_context(|| format!("line {}: bad y", i + 1))?;
        points.push((predictors(axis, x), y));
    }
    Ok(FitData { axis, points })
}

pub fn default_candidates(axis: Axis) -> Vec<BasisSpec> {
    match axis {
        Axis::N => vec![BasisSpec::linear_n(), BasisSpec::n_log_n()],
        Axis::P => vec![BasisSpec::poly_p(1), BasisSpec::poly_p(2)],
        Axis::K => vec![BasisSpec::poly_k(1), BasisSpec::poly_k(2), BasisSpec::poly_k(3)],
    }
}

fn candidate_by_name(axis: Axis, name: &str) -> Result<BasisSpec> {
    let poly = |d: usize| match axis {
        Axis::P => Ok(BasisSpec::poly_p(d)),
        Axis::K => Ok(BasisSpec::poly_k(d)),
        Axis::N => bail!("polynomials in n are not in the basis library; use linear-n or nlogn"),
    };
    match name {
        "linear-n" => Ok(BasisSpec::linear_n()),
        "nlogn" => Ok(BasisSpec::n_log_n()),
        "poly1" => poly(1),
        "poly2" => poly(2),
        "poly3" => poly(3),
        other => bail!("unknown candidate '{other}' (linear-n, nlogn, poly1, poly2, poly3)"),
    }
}

/// Evenly spaced predicted curve over the data range.
pub fn predicted_curve(fit: &partlab::ModelFit, axis: Axis, points: &[(Predictors, f64)]) -> Vec<(f64, f64)> {
    let xs: Vec<f64> = points
        .iter()
        .map(|(p, _)| match axis {
            Axis::N => p.n,
            Axis::K => p.k,
            Axis::P => p.p,
        })
        .collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    const STEPS: usize = 100;
    (0..=STEPS)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / STEPS as f64;
            (x, fit.predict(&predictors(axis, x)))
        })
        .collect()
}

fn cmd_fit(
    data: &Path,
    axis: Option<Axis>,
    candidates: &[String],
    response: ResponseArg,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let data = load_fit_data(data, axis, response)?;
    let specs = if candidates.is_empty() {
        default_candidates(data.axis)
    } else {
        candidates
            .iter()
            .map(|c| candidate_by_name(data.axis, c.trim()))
            .collect::<Result<Vec<_>>>()?
    };
    let report = select_model(&data.points, &specs)?;
    writeln!(stdout, "{report}")?;
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_atomically(&dir.join("fit_report.csv"), report.to_csv().as_bytes())?;
        let curve = predicted_curve(report.chosen_fit(), data.axis, &data.points);
        write_plot_data(&dir.join("fit_curve.dat"), &curve)?;
    }
    Ok(())
}

fn cmd_anova(data: &Path, response: ResponseArg, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let text = fs::read_to_string(data).with_context(|| format!("reading {}", data.display()))?;
    let body: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let header: Vec<String> = body
        .lines()
        .next()
        .unwrap_or("")
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();

    let (names, rows): (Vec<String>, Vec<(Vec<String>, f64)>) = if header == RECORD_HEADER {
        let records = parse_records(body.as_bytes(), data)?;
        let rows = records
            .iter()
            .map(|r| {
                let y = match response {
                    ResponseArg::Time => r.elapsed_s,
                    ResponseArg::Comparisons => r.comparisons as f64,
                };
                (vec![r.n.to_string(), r.p.to_string(), r.k.to_string()], y)
            })
            .collect();
        (vec!["n".into(), "p".into(), "k".into()], rows)
    } else {
        if header.len() < 2 {
            bail!(
                "{}: long format needs at least one factor column and a response column",
                data.display()
            );
        }
        let mut rows = Vec::new();
        for (i, line) in body.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != header.len() {
                bail!(
                    "line {}: expected {} fields, found {}",
                    i + 1,
                    header.len(),
                    fields.len()
                );
            }
            let (y, levels) = fields.split_last().expect("non-empty");
            let y: f64 = y
                .parse()
                .with_context(|| format!("line {}: bad response '{y}'", i + 1))?;
            rows.push((levels.iter().map(|s| s.to_string()).collect(), y));
        }
        (header[..header.len() - 1].to_vec(), rows)
    };

    // Factors held at a single level carry no effect; leave them out.
    let keep: Vec<usize> = (0..names.len())
        .filter(|&i| {
            let first = rows.first().map(|r| &r.0[i]);
            rows.iter().any(|r| Some(&r.0[i]) != first)
        })
        .collect();
    if keep.is_empty() {
        bail!("no factor takes more than one level");
    }
    let names: Vec<String> = keep.iter().map(|&i| names[i].clone()).collect();
    let rows: Vec<(Vec<String>, f64)> = rows
        .into_iter()
        .map(|(l, y)| (keep.iter().map(|&i| l[i].clone()).collect(), y))
        .collect();

    let (design, observations) = design_from_labeled(&names, &rows)?;
    let table = anova_full_factorial(&design, &observations)?;
    writeln!(
        stdout,
        "Multilevel Factorial Design: {} factors, {} replicates, {} runs",
        design.factors.len(),
        design.replicates,
        design.runs()
    )?;
    writeln!(stdout)?;
    writeln!(stdout, "{table}")?;
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_atomically(&dir.join("anova.csv"), table.to_csv().as_bytes())?;
    }
    Ok(())
}

pub fn run_with_io(args: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
