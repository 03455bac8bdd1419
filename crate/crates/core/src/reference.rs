//! Published measurements bundled with the crate.
//!
//! The CSV files under `data/` hold the mean Partition Sort times reported
//! for negative binomial inputs on the original hardware (a 1600 MHz
//! Pentium), plus the published ANOVA for the 3^3 factorial. They back the
//! `repro` workflows and the fixture tests; none of them can be regenerated
//! on other machines.

use crate::anova::{design_from_labeled, AnovaError, FactorialDesign, Observation};
use crate::harness::TrialRecord;

pub const TABLE1_CSV: &str = include_str!("../data/table1.csv");
pub const TABLE2_CSV: &str = include_str!("../data/table2.csv");
pub const TABLE3_CSV: &str = include_str!("../data/table3.csv");
pub const TABLE4_CSV: &str = include_str!("../data/table4.csv");
pub const ANOVA_REFERENCE_CSV: &str = include_str!("../data/anova_reference.csv");

/// Replicates per cell in the published factorial analysis.
pub const FACTORIAL_REPLICATES: usize = 3;

fn rows(text: &str) -> impl Iterator<Item = Vec<&str>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').collect())
}

fn pairs(text: &str) -> Vec<(f64, f64)> {
    rows(text)
        .map(|r| (r[0].parse().expect("bundled data"), r[1].parse().expect("bundled data")))
        .collect()
}

/// `(n, T)` for NB(1000, 0.5).
pub fn table1() -> Vec<(f64, f64)> {
    pairs(TABLE1_CSV)
}

/// `(p, T)` for n = 50000, k = 1000.
pub fn table2() -> Vec<(f64, f64)> {
    pairs(TABLE2_CSV)
}

/// `(k, T)` for n = 50000, p = 0.5.
pub fn table3() -> Vec<(f64, f64)> {
    pairs(TABLE3_CSV)
}

/// The 27 factorial cell means as `(n, k, p, T)`.
pub fn table4() -> Vec<(u64, u64, f64, f64)> {
    rows(TABLE4_CSV)
        .map(|r| {
            (
                r[0].parse().expect("bundled data"),
                r[1].parse().expect("bundled data"),
                r[2].parse().expect("bundled data"),
                r[3].parse().expect("bundled data"),
            )
        })
        .collect()
}

/// Table 4 as one trial record per cell, with the mean time as `elapsed_s`.
pub fn table4_records() -> Vec<TrialRecord> {
    table4()
        .into_iter()
        .map(|(n, k, p, t)| TrialRecord {
            n: n as usize,
            k,
            p,
            trial: 0,
            seed: 0,
            elapsed_s: t,
            comparisons: 0,
            swaps: 0,
        })
        .collect()
}

/// The factorial design with factors in the published order (n, p, k) and
/// every cell mean repeated `replicates` times.
pub fn table4_design(replicates: usize) -> Result<(FactorialDesign, Vec<Observation>), AnovaError> {
    let names = ["n", "p", "k"].map(String::from);
    let labeled: Vec<(Vec<String>, f64)> = table4()
        .into_iter()
        .flat_map(|(n, k, p, t)| {
            std::iter::repeat_n((vec![n.to_string(), p.to_string(), k.to_string()], t), replicates)
        })
        .collect();
    design_from_labeled(&names, &labeled)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PublishedAnovaRow {
    pub source: String,
    pub df: usize,
    pub ss: f64,
    pub f: Option<f64>,
}

pub fn published_anova() -> Vec<PublishedAnovaRow> {
    rows(ANOVA_REFERENCE_CSV)
        .map(|r| PublishedAnovaRow {
            source: r[0].to_string(),
            df: r[1].parse().expect("bundled data"),
            ss: r[2].parse().expect("bundled data"),
            f: r.get(3)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().expect("bundled data")),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shapes() {
        assert_eq!(table1().len(), 10);
        assert_eq!(table2().len(), 9);
        assert_eq!(table3().len(), 7);
        assert_eq!(table4().len(), 27);
        assert_eq!(published_anova().len(), 9);
        assert_eq!(table1()[4], (50000.0, 0.11876));
    }

    #[test]
    fn overlapping_cells_agree_across_tables() {
        // n=50000, k=1000, p=0.5 appears in tables 1, 3 and 4.
        let t4 = table4();
        let cell = t4.iter().find(|r| r.0 == 50000 && r.1 == 1000 && r.2 == 0.5).unwrap();
        assert_eq!(cell.3, 0.11876);
        assert_eq!(table3()[2].1, 0.11876);
    }
}
