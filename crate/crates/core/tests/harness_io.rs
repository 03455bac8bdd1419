use std::fs;

use partlab::harness::{
    parse_records, read_records, records_to_csv, summarize_records, trend_report, HarnessError, RECORD_HEADER,
};
use partlab::reference;
use partlab::{
    run_cell, run_grid, run_plan, summarize_table, Axis, Cell, CellSummary, DistributionSpec, ExperimentPlan, Key,
    Measure, RunOptions, SortAlgorithm, SortStats, Sorter,
};

fn plan(n_levels: Vec<usize>, dist_grid: Vec<DistributionSpec>, trials: u32) -> ExperimentPlan {
    ExperimentPlan {
        n_levels,
        dist_grid,
        trials_per_cell: trials,
        master_seed: 2012,
        algorithm: SortAlgorithm::PartitionDeterministic,
        options: RunOptions::default(),
    }
}

fn nb(k: u64, p: f64) -> DistributionSpec {
    DistributionSpec::NegBinomial { k, p }
}

#[test]
fn grid_writes_one_row_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_grid(&plan(vec![500, 1000], vec![nb(10, 0.5)], 5), dir.path()).unwrap();
    let text = fs::read_to_string(&out.records_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(RECORD_HEADER.join(",").as_str()));
    assert_eq!(lines.count(), 10);
    assert_eq!(out.summaries.len(), 2);
    assert!(!dir.path().join("records.csv.partial").exists());
    assert!(out.summary_path.exists());
}

#[test]
fn comparison_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut p = plan(vec![300, 700], vec![nb(5, 0.3), nb(50, 0.8)], 4);
    p.algorithm = SortAlgorithm::PartitionRandomized;
    let ra = run_grid(&p, a.path()).unwrap();
    let rb = run_grid(&p, b.path()).unwrap();
    assert_eq!(fs::read(ra.records_path).unwrap(), fs::read(rb.records_path).unwrap());
    assert_eq!(fs::read(ra.summary_path).unwrap(), fs::read(rb.summary_path).unwrap());
}

#[test]
fn summaries_rebuild_exactly_from_csv() {
    let mut p = plan(vec![200, 400], vec![nb(3, 0.2), nb(3, 0.6)], 6);
    p.options.measure = Measure::Both;
    let result = run_plan(&p).unwrap();
    let csv = records_to_csv(&result.records);
    let back = parse_records(csv.as_bytes(), "mem.csv".as_ref()).unwrap();
    assert_eq!(back, result.records);
    assert_eq!(summarize_records(&back), result.summaries);
    for (s, chunk) in result.summaries.iter().zip(result.records.chunks(6)) {
        let mean = chunk.iter().map(|r| r.elapsed_s).sum::<f64>() / 6.0;
        let comps = chunk.iter().map(|r| r.comparisons as f64).sum::<f64>() / 6.0;
        assert_eq!(s.mean_time, mean);
        assert_eq!(s.mean_comparisons, comps);
    }
}

#[test]
fn malformed_csv_reports_the_line() {
    let text = format!("{}\n10,1,0.5,0,1,0,5,0\n10,1,zero,1,1,0,5,0\n", RECORD_HEADER.join(","));
    match parse_records(text.as_bytes(), "bad.csv".as_ref()) {
        Err(HarnessError::Csv { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

struct NoopSorter;

impl Sorter for NoopSorter {
    fn sort(&self, _keys: &mut [Key], _seed: u64) -> SortStats {
        SortStats::default()
    }
}

/// Dataset generation sits outside the timed region.
#[test]
fn timing_excludes_generation() {
    let cell = Cell {
        index: 0,
        n: 2000,
        dist: nb(20_000, 0.5),
    };
    let opts = RunOptions {
        measure: Measure::WallTime,
        ..RunOptions::default()
    };
    let started = std::time::Instant::now();
    let (summary, _) = run_cell(&cell, 3, 1, &opts, &NoopSorter).unwrap();
    let total = started.elapsed().as_secs_f64();
    assert!(
        total > 0.01,
        "generation was expected to take measurable time ({total} s)"
    );
    assert!(
        summary.mean_time < total / 100.0,
        "timed {} of {total} s",
        summary.mean_time
    );
}

#[test]
fn failed_grid_keeps_partial_records() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("records.csv")).unwrap();
    fs::write(dir.path().join("records.csv").join("blocker"), b"x").unwrap();
    match run_grid(&plan(vec![100, 200], vec![nb(2, 0.5)], 3), dir.path()) {
        Err(HarnessError::Partial { partial, .. }) => {
            let kept = read_records(&partial).unwrap();
            assert_eq!(kept.len(), 6);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn factorial_table_layout() {
    let t = summarize_table(&reference::table4_records(), Axis::N, Axis::K).unwrap();
    assert_eq!((t.row_levels.len(), t.col_levels.len(), t.slab_levels.len()), (3, 3, 3));
    assert_eq!(t.slab_axis, Axis::P);
    for &(n, k, p, time) in &reference::table4() {
        let si = t.slab_levels.iter().position(|&x| x == p).unwrap();
        let ri = t.row_levels.iter().position(|&x| x == n as f64).unwrap();
        let ci = t.col_levels.iter().position(|&x| x == k as f64).unwrap();
        assert_eq!(t.cells[si][ri][ci], time);
    }
    let mut partial = reference::table4_records();
    partial.retain(|r| !(r.n == 10000 && r.k == 3000 && r.p == 0.2));
    match summarize_table(&partial, Axis::N, Axis::K) {
        Err(HarnessError::MissingCells(m)) => assert_eq!(m, vec![(10000.0, 3000.0, 0.2)]),
        other => panic!("{other:?}"),
    }
}

/// Mean comparisons per n log2 n for NB(1000, 0.5) inputs at n = 10^4.
#[test]
fn negative_binomial_comparison_window() {
    const A: f64 = 2.0;
    const B: f64 = 4.0;
    let cell = Cell {
        index: 0,
        n: 10_000,
        dist: nb(1000, 0.5),
    };
    let (s, _) = run_cell(
        &cell,
        10,
        2012,
        &RunOptions::default(),
        &SortAlgorithm::PartitionDeterministic,
    )
    .unwrap();
    let n = 10_000f64;
    let ratio = s.mean_comparisons / (n * n.log2());
    assert!((A..=B).contains(&ratio), "ratio {ratio}");
}

#[test]
fn size_sweep_grid_has_ten_cells() {
    let sizes: Vec<usize> = (1..=10).map(|i| i * 1000).collect();
    let result = run_plan(&plan(sizes, vec![nb(1000, 0.5)], 2)).unwrap();
    assert_eq!(result.summaries.len(), 10);
    let means: Vec<f64> = result.summaries.iter().map(|s| s.mean_comparisons).collect();
    assert!(means.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn trend_report_needs_a_single_axis() {
    let s = |n: usize, p: f64, t: f64| CellSummary {
        n,
        k: 10,
        p,
        trials: 1,
        mean_time: t,
        sd_time: 0.0,
        mean_comparisons: t * 1e6,
    };
    let r = trend_report(&[s(100, 0.5, 2.0), s(100, 0.1, 3.0), s(100, 0.9, 1.0)], Axis::P).unwrap();
    assert!(r.time_decreasing && r.comparisons_decreasing);
    assert_eq!(r.points.iter().map(|x| x.0).collect::<Vec<_>>(), vec![0.1, 0.5, 0.9]);
    let r = trend_report(&[s(100, 0.1, 1.0), s(100, 0.9, 2.0)], Axis::P).unwrap();
    assert!(!r.time_decreasing);
    assert!(matches!(
        trend_report(&[s(100, 0.1, 1.0), s(200, 0.9, 2.0)], Axis::P),
        Err(HarnessError::Trend(_))
    ));
}

#[test]
fn uniform_cells_are_rejected() {
    let p = plan(vec![10], vec![DistributionSpec::UniformInt { lo: 0, hi: 9 }], 1);
    assert!(matches!(run_plan(&p), Err(HarnessError::InvalidPlan(_))));
}
