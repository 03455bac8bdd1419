//! Offline re-analysis of the bundled published measurements.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use partlab::harness::{summarize_table, write_plot_data, MeanTable};
use partlab::reference::{self, PublishedAnovaRow, FACTORIAL_REPLICATES};
use partlab::statmodel::SelectionReport;
use partlab::{anova_full_factorial, select_model, AnovaTable, Axis, BasisSpec, Predictors};

use crate::{predicted_curve, write_atomically, ReproTarget};

#[derive(Debug, Clone)]
pub struct FitRepro {
    pub name: &'static str,
    pub title: &'static str,
    pub axis: Axis,
    pub points: Vec<(Predictors, f64)>,
    pub report: SelectionReport,
    /// Name of the candidate the published analysis settled on.
    pub published_choice: String,
}

impl FitRepro {
    pub fn rule_concurs(&self) -> bool {
        self.report.chosen_fit().basis.name == self.published_choice
    }

    pub fn fit_named(&self, name: &str) -> Option<&partlab::ModelFit> {
        self.report.fits.iter().find(|f| f.basis.name == name)
    }
}

impl fmt::Display for FitRepro {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "== {}: {} ==", self.name, self.title)?;
        writeln!(f, "{self_report}", self_report = self.report)?;
        write!(
            f,
            "published choice: {}; selection rule concurs: {}",
            self.published_choice,
            if self.rule_concurs() { "yes" } else { "no" }
        )
    }
}

fn points(axis: Axis, data: Vec<(f64, f64)>) -> Vec<(Predictors, f64)> {
    data.into_iter()
        .map(|(x, y)| {
            let p = match axis {
                Axis::N => Predictors::n(x),
                Axis::K => Predictors::k(x),
                Axis::P => Predictors::p(x),
            };
            (p, y)
        })
        .collect()
}

fn fit_repro(
    name: &'static str,
    title: &'static str,
    axis: Axis,
    data: Vec<(f64, f64)>,
    candidates: Vec<BasisSpec>,
    published: BasisSpec,
) -> Result<FitRepro> {
    let points = points(axis, data);
    let report = select_model(&points, &candidates)?;
    Ok(FitRepro {
        name,
        title,
        axis,
        points,
        report,
        published_choice: published.name,
    })
}

/// Mean time against n for NB(1000, 0.5); linear versus n log2 n.
pub fn table1() -> Result<FitRepro> {
    fit_repro(
        "table1",
        "mean time vs n, NB(k=1000, p=0.5)",
        Axis::N,
        reference::table1(),
        vec![BasisSpec::linear_n(), BasisSpec::n_log_n()],
        BasisSpec::n_log_n(),
    )
}

/// Mean time against p for n = 50000, k = 1000; degrees 1 and 2 in p.
pub fn table2() -> Result<FitRepro> {
    fit_repro(
        "table2",
        "mean time vs p, n=50000, k=1000",
        Axis::P,
        reference::table2(),
        vec![BasisSpec::poly_p(1), BasisSpec::poly_p(2)],
        BasisSpec::poly_p(2),
    )
}

/// Mean time against k for n = 50000, p = 0.5; degrees 1 to 3 in k.
pub fn table3() -> Result<FitRepro> {
    fit_repro(
        "table3",
        "mean time vs k, n=50000, p=0.5",
        Axis::K,
        reference::table3(),
        vec![BasisSpec::poly_k(1), BasisSpec::poly_k(2), BasisSpec::poly_k(3)],
        BasisSpec::poly_k(3),
    )
}

#[derive(Debug, Clone)]
pub struct AnovaRepro {
    pub layout: MeanTable,
    pub table: AnovaTable,
    pub published: Vec<PublishedAnovaRow>,
}

/// ANOVA of the 27 factorial cell means, each repeated three times.
pub fn anova() -> Result<AnovaRepro> {
    let layout = summarize_table(&reference::table4_records(), Axis::N, Axis::K)?;
    let (design, observations) = reference::table4_design(FACTORIAL_REPLICATES)?;
    let table = anova_full_factorial(&design, &observations)?;
    Ok(AnovaRepro {
        layout,
        table,
        published: reference::published_anova(),
    })
}

impl fmt::Display for AnovaRepro {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "== anova: 3^3 factorial, cell means (s) ==")?;
        writeln!(f, "{}", self.layout)?;
        let d = &self.table.design;
        writeln!(f, "Multilevel Factorial Design")?;
        writeln!(f)?;
        writeln!(f, "Factors: {}   Replicates: {}", d.factors.len(), d.replicates)?;
        writeln!(f, "Base runs: {}   Total runs: {}", d.cells(), d.runs())?;
        let levels: Vec<String> = d.factors.iter().map(|x| x.levels.len().to_string()).collect();
        writeln!(f, "Number of levels: {}", levels.join(", "))?;
        writeln!(f)?;
        writeln!(f, "{}", self.table)?;
        writeln!(f)?;
        writeln!(f, "Comparison with the published sums of squares:")?;
        writeln!(
            f,
            "{:<8}{:>4}{:>14}{:>14}{:>12}",
            "Source", "DF", "computed", "published", "abs diff"
        )?;
        for p in &self.published {
            if let Some(row) = self.table.row(&p.source) {
                writeln!(
                    f,
                    "{:<8}{:>4}{:>14.7}{:>14.7}{:>12.1e}",
                    p.source,
                    row.df,
                    row.seq_ss,
                    p.ss,
                    (row.seq_ss - p.ss).abs()
                )?;
            }
        }
        write!(
            f,
            "Note: replicating cell means carries no within-cell variation, so Error SS is zero and F/P are undefined (*)."
        )
    }
}

fn write_fit_outputs(r: &FitRepro, dir: &Path) -> Result<()> {
    write_atomically(&dir.join(format!("{}_fit.csv", r.name)), r.report.to_csv().as_bytes())?;
    let curve = predicted_curve(r.report.chosen_fit(), r.axis, &r.points);
    write_plot_data(&dir.join(format!("{}_curve.dat", r.name)), &curve)?;
    let data: Vec<(f64, f64)> = r
        .points
        .iter()
        .map(|(p, y)| {
            let x = match r.axis {
                Axis::N => p.n,
                Axis::K => p.k,
                Axis::P => p.p,
            };
            (x, *y)
        })
        .collect();
    write_plot_data(&dir.join(format!("{}_data.dat", r.name)), &data)?;
    Ok(())
}

pub fn run(target: ReproTarget, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let fits: Vec<fn() -> Result<FitRepro>> = match target {
        ReproTarget::Table1 => vec![table1],
        ReproTarget::Table2 => vec![table2],
        ReproTarget::Table3 => vec![table3],
        ReproTarget::Anova => vec![],
        ReproTarget::All => vec![table1, table2, table3],
    };
    for make in fits {
        let r = make()?;
        writeln!(stdout, "{r}")?;
        if r.name == "table1" {
            let fit = r
                .fit_named(&BasisSpec::n_log_n().name)
                .expect("n log n candidate present");
            writeln!(
                stdout,
                "n log n fit at n=50000: {:.6} s",
                fit.predict(&Predictors::n(50000.0))
            )?;
        }
        writeln!(stdout)?;
        if let Some(dir) = out {
            write_fit_outputs(&r, dir)?;
        }
    }
    if matches!(target, ReproTarget::Anova | ReproTarget::All) {
        let a = anova()?;
        writeln!(stdout, "{a}")?;
        if let Some(dir) = out {
            write_atomically(&dir.join("anova.csv"), a.table.to_csv().as_bytes())?;
        }
    }
    Ok(())
}
