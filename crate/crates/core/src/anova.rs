//! Balanced full-factorial analysis of variance.
//!
//! Every main effect and every interaction is estimated from centered
//! marginal means: the effect of a factor set S at one of its level
//! combinations is the inclusion-exclusion sum over subsets T of S of
//! `(-1)^(|S|-|T|) * mean_T`, and `SS_S` is the sum of squared effects over
//! all observations. In a balanced design the sequential and adjusted sums of
//! squares coincide, so both columns carry the same value.

use std::fmt;

use thiserror::Error;

use crate::special::f_pvalue;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnovaError {
    #[error("invalid design: {0}")]
    Design(String),
    #[error("observation {index} has level indices {levels:?} outside the design")]
    LevelOutOfRange { index: usize, levels: Vec<usize> },
    #[error("design is unbalanced; deficient cells (levels: count): {}", fmt_deficient(.0))]
    Unbalanced(Vec<(Vec<String>, usize)>),
}

fn fmt_deficient(cells: &[(Vec<String>, usize)]) -> String {
    cells
        .iter()
        .map(|(l, c)| format!("({}): {c}", l.join(", ")))
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub name: String,
    pub levels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorialDesign {
    pub factors: Vec<Factor>,
    pub replicates: usize,
}

impl FactorialDesign {
    pub fn cells(&self) -> usize {
        self.factors.iter().map(|f| f.levels.len()).product()
    }

    pub fn runs(&self) -> usize {
        self.cells() * self.replicates
    }

    fn validate(&self) -> Result<(), AnovaError> {
        if self.factors.is_empty() {
            return Err(AnovaError::Design("no factors".into()));
        }
        if self.replicates == 0 {
            return Err(AnovaError::Design("replicates must be at least 1".into()));
        }
        if let Some(f) = self.factors.iter().find(|f| f.levels.len() < 2) {
            return Err(AnovaError::Design(format!("factor {} needs at least 2 levels", f.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Level index per factor, in design order.
    pub levels: Vec<usize>,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    /// Main effect or interaction of the listed factor indices.
    Effect(Vec<usize>),
    Error,
    Total,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaRow {
    pub source: Source,
    pub label: String,
    pub df: usize,
    pub seq_ss: f64,
    pub adj_ss: f64,
    /// `None` on the Total row.
    pub adj_ms: Option<f64>,
    /// `None` when undefined (no error degrees of freedom or no error variation).
    pub f: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaTable {
    pub design: FactorialDesign,
    pub response: String,
    pub rows: Vec<AnovaRow>,
    /// Root mean square error.
    pub s: Option<f64>,
    pub r_sq: Option<f64>,
    pub r_sq_adj: Option<f64>,
}

impl AnovaTable {
    pub fn row(&self, label: &str) -> Option<&AnovaRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn effects(&self) -> impl Iterator<Item = &AnovaRow> {
        self.rows.iter().filter(|r| matches!(r.source, Source::Effect(_)))
    }

    pub fn error(&self) -> &AnovaRow {
        self.rows.iter().find(|r| r.source == Source::Error).expect("error row")
    }

    pub fn total(&self) -> &AnovaRow {
        self.rows.iter().find(|r| r.source == Source::Total).expect("total row")
    }
}

/// Factor subsets ordered by size, then lexicographically by factor index.
fn effect_subsets(factors: usize) -> Vec<Vec<usize>> {
    fn combos(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            combos(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for size in 1..=factors {
        combos(0, factors, size, &mut Vec::new(), &mut out);
    }
    out
}

fn mask_of(set: &[usize]) -> usize {
    set.iter().fold(0, |m, &i| m | (1 << i))
}

/// Cell means aggregated onto the factors in `mask`, indexed in mixed radix
/// over those factors (lowest factor index varies slowest).
struct Marginals {
    sizes: Vec<usize>,
    by_mask: Vec<Vec<f64>>,
}

impl Marginals {
    fn new(sizes: &[usize], cell_means: &[f64]) -> Self {
        let f = sizes.len();
        let mut by_mask = Vec::with_capacity(1 << f);
        for mask in 0..(1usize << f) {
            let len: usize = (0..f).filter(|i| mask & (1 << i) != 0).map(|i| sizes[i]).product();
            let mut sums = vec![0.0; len];
            for (cell, &mean) in cell_means.iter().enumerate() {
                sums[Self::project(sizes, mask, &Self::unravel(sizes, cell))] += mean;
            }
            let per = (cell_means.len() / len) as f64;
            by_mask.push(sums.into_iter().map(|s| s / per).collect());
        }
        Self {
            sizes: sizes.to_vec(),
            by_mask,
        }
    }

    fn unravel(sizes: &[usize], mut cell: usize) -> Vec<usize> {
        let mut idx = vec![0; sizes.len()];
        for i in (0..sizes.len()).rev() {
            idx[i] = cell % sizes[i];
            cell /= sizes[i];
        }
        idx
    }

    fn project(sizes: &[usize], mask: usize, idx: &[usize]) -> usize {
        (0..sizes.len())
            .filter(|i| mask & (1 << i) != 0)
            .fold(0, |acc, i| acc * sizes[i] + idx[i])
    }

    fn get(&self, mask: usize, idx: &[usize]) -> f64 {
        self.by_mask[mask][Self::project(&self.sizes, mask, idx)]
    }

    /// Interaction effect of factor set `mask` at full cell index `idx`.
    fn effect(&self, mask: usize, idx: &[usize]) -> f64 {
        let size = mask.count_ones();
        // enumerate submasks of `mask`, including 0
        let mut sub = mask;
        let mut total = 0.0;
        loop {
            let sign = if (size - sub.count_ones()).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            total += sign * self.get(sub, idx);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & mask;
        }
        total
    }
}

fn cell_index(sizes: &[usize], levels: &[usize]) -> usize {
    levels.iter().zip(sizes).fold(0, |acc, (&l, &s)| acc * s + l)
}

/// Full-factorial ANOVA with every interaction term.
pub fn anova_full_factorial(design: &FactorialDesign, observations: &[Observation]) -> Result<AnovaTable, AnovaError> {
    design.validate()?;
    let sizes: Vec<usize> = design.factors.iter().map(|f| f.levels.len()).collect();
    let n_cells = design.cells();

    let mut sums = vec![0.0; n_cells];
    let mut counts = vec![0usize; n_cells];
    for (i, obs) in observations.iter().enumerate() {
        if obs.levels.len() != sizes.len() || obs.levels.iter().zip(&sizes).any(|(l, s)| l >= s) {
            return Err(AnovaError::LevelOutOfRange {
                index: i,
                levels: obs.levels.clone(),
            });
        }
        let c = cell_index(&sizes, &obs.levels);
        sums[c] += obs.y;
        counts[c] += 1;
    }
    let deficient: Vec<(Vec<String>, usize)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != design.replicates)
        .map(|(cell, &c)| {
            let idx = Marginals::unravel(&sizes, cell);
            let labels = idx
                .iter()
                .zip(&design.factors)
                .map(|(&l, f)| format!("{}={}", f.name, f.levels[l]))
                .collect();
            (labels, c)
        })
        .collect();
    if !deficient.is_empty() {
        return Err(AnovaError::Unbalanced(deficient));
    }

    let cell_means: Vec<f64> = sums.iter().map(|s| s / design.replicates as f64).collect();
    let n_obs = observations.len();
    let grand = observations.iter().map(|o| o.y).sum::<f64>() / n_obs as f64;
    let marginals = Marginals::new(&sizes, &cell_means);

    let mut rows = Vec::new();
    for set in effect_subsets(sizes.len()) {
        let mask = mask_of(&set);
        let df: usize = set.iter().map(|&i| sizes[i] - 1).product();
        let ss: f64 = (0..n_cells)
            .map(|cell| marginals.effect(mask, &Marginals::unravel(&sizes, cell)).powi(2))
            .sum::<f64>()
            * design.replicates as f64;
        let label = set
            .iter()
            .map(|&i| design.factors[i].name.as_str())
            .collect::<Vec<_>>()
            .join("*");
        rows.push(AnovaRow {
            source: Source::Effect(set),
            label,
            df,
            seq_ss: ss,
            adj_ss: ss,
            adj_ms: Some(ss / df as f64),
            f: None,
            p: None,
        });
    }

    let ss_error: f64 = observations
        .iter()
        .map(|o| (o.y - cell_means[cell_index(&sizes, &o.levels)]).powi(2))
        .sum();
    let ss_total: f64 = observations.iter().map(|o| (o.y - grand).powi(2)).sum();
    let df_error = n_obs - n_cells;
    let df_total = n_obs - 1;
    let ms_error = (df_error > 0).then(|| ss_error / df_error as f64);

    // Rounding in the cell means leaves residuals of a few ulps even when
    // replicates are identical; treat anything at that floor as zero.
    let y_max = observations.iter().map(|o| o.y.abs()).fold(0.0, f64::max);
    let noise_floor = n_obs as f64 * (8.0 * f64::EPSILON * y_max).powi(2);
    let testable = ms_error.filter(|_| ss_error > noise_floor);
    for row in &mut rows {
        if let Some(mse) = testable {
            let f = row.adj_ms.expect("effect rows have MS") / mse;
            row.f = Some(f);
            row.p = Some(f_pvalue(f, row.df as f64, df_error as f64).expect("valid F test arguments"));
        }
    }
    rows.push(AnovaRow {
        source: Source::Error,
        label: "Error".into(),
        df: df_error,
        seq_ss: ss_error,
        adj_ss: ss_error,
        adj_ms: ms_error,
        f: None,
        p: None,
    });
    rows.push(AnovaRow {
        source: Source::Total,
        label: "Total".into(),
        df: df_total,
        seq_ss: ss_total,
        adj_ss: ss_total,
        adj_ms: None,
        f: None,
        p: None,
    });

    let r_sq = (ss_total > 0.0).then(|| 1.0 - ss_error / ss_total);
    let r_sq_adj = match ms_error {
        Some(mse) if ss_total > 0.0 => Some(1.0 - mse / (ss_total / df_total as f64)),
        _ => None,
    };
    Ok(AnovaTable {
        design: design.clone(),
        response: "y".into(),
        rows,
        s: ms_error.map(f64::sqrt),
        r_sq,
        r_sq_adj,
    })
}

/// Builds a design from labeled rows (`levels per factor`, `y`).
///
/// Level labels are ordered numerically when every label of a factor parses
/// as a number, lexicographically otherwise. The replicate count is taken
/// from the first cell; imbalance is reported by [`anova_full_factorial`].
pub fn design_from_labeled(
    factor_names: &[String],
    rows: &[(Vec<String>, f64)],
) -> Result<(FactorialDesign, Vec<Observation>), AnovaError> {
    if rows.is_empty() {
        return Err(AnovaError::Design("no observations".into()));
    }
    let mut factors = Vec::new();
    for (i, name) in factor_names.iter().enumerate() {
        let mut levels: Vec<String> = rows.iter().map(|(l, _)| l[i].clone()).collect();
        let numeric: Option<Vec<f64>> = levels.iter().map(|l| l.parse::<f64>().ok()).collect();
        match numeric {
            Some(_) => levels.sort_by(|a, b| a.parse::<f64>().unwrap().total_cmp(&b.parse::<f64>().unwrap())),
            None => levels.sort(),
        }
        levels.dedup();
        factors.push(Factor {
            name: name.clone(),
            levels,
        });
    }
    let observations: Vec<Observation> = rows
        .iter()
        .map(|(labels, y)| Observation {
            levels: labels
                .iter()
                .zip(&factors)
                .map(|(l, f)| f.levels.iter().position(|x| x == l).expect("level collected above"))
                .collect(),
            y: *y,
        })
        .collect();
    let first = &observations[0].levels;
    let replicates = observations.iter().filter(|o| &o.levels == first).count();
    Ok((FactorialDesign { factors, replicates }, observations))
}

fn fmt_f(f: Option<f64>) -> String {
    match f {
        None => "*".into(),
        Some(v) if v >= 1e8 => {
            // 1.77367E+08 style
            let s = format!("{v:.5E}");
            let (mant, exp) = s.split_once('E').expect("exponent");
            let e: i32 = exp.parse().expect("exponent digits");
            format!("{mant}E{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
        }
        Some(v) => format!("{v:.2}"),
    }
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or("*".into(), |v| format!("{v:.digits$}"))
}

fn fmt_pct(v: Option<f64>) -> String {
    v.map_or("*".into(), |v| format!("{:.2}%", 100.0 * v))
}

impl AnovaTable {
    /// `source,df,seq_ss,adj_ss,adj_ms,f,p`; undefined entries are `*`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("source,df,seq_ss,adj_ss,adj_ms,f,p\n");
        for r in &self.rows {
            let num = |v: Option<f64>| v.map_or("*".to_string(), |v| format!("{v:e}"));
            out.push_str(&format!(
                "{},{},{:e},{:e},{},{},{}\n",
                r.label,
                r.df,
                r.seq_ss,
                r.adj_ss,
                num(r.adj_ms),
                num(r.f),
                num(r.p)
            ));
        }
        out
    }
}

impl fmt::Display for AnovaTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.design.factors.iter().map(|x| x.name.as_str()).collect();
        writeln!(f, "General Linear Model: {} versus {}", self.response, names.join(", "))?;
        writeln!(f)?;
        writeln!(f, "{:<8}{:<7}{:>7}  Values", "Factor", "Type", "Levels")?;
        for fac in &self.design.factors {
            writeln!(
                f,
                "{:<8}{:<7}{:>7}  {}",
                fac.name,
                "fixed",
                fac.levels.len(),
                fac.levels.join(", ")
            )?;
        }
        writeln!(f)?;
        writeln!(
            f,
            "Analysis of Variance for {}, using Adjusted SS for Tests",
            self.response
        )?;
        writeln!(f)?;
        writeln!(
            f,
            "{:<8}{:>4}{:>12}{:>12}{:>12}{:>14}{:>7}",
            "Source", "DF", "Seq SS", "Adj SS", "Adj MS", "F", "P"
        )?;
        for r in &self.rows {
            if r.source == Source::Total {
                writeln!(f, "{:<8}{:>4}{:>12.7}", r.label, r.df, r.seq_ss)?;
                continue;
            }
            let (fs, ps) = match r.source {
                Source::Effect(_) => (fmt_f(r.f), fmt_opt(r.p, 3)),
                _ => (String::new(), String::new()),
            };
            writeln!(
                f,
                "{:<8}{:>4}{:>12.7}{:>12.7}{:>12}{:>14}{:>7}",
                r.label,
                r.df,
                r.seq_ss,
                r.adj_ss,
                fmt_opt(r.adj_ms, 7),
                fs,
                ps
            )?;
        }
        writeln!(f)?;
        let s = self.s.map_or("*".into(), |s| format!("{s:.10}"));
        write!(
            f,
            "S = {s}   R-Sq = {}   R-Sq(adj) = {}",
            fmt_pct(self.r_sq),
            fmt_pct(self.r_sq_adj)
        )
    }
}
