//! Least-squares fits over named basis functions and empirical-O model
//! selection.
//!
//! Design columns are scaled to unit max-abs before a Householder QR solve
//! and the coefficients are unscaled afterwards, so `n log2 n` columns with
//! `n` around 1e5 stay well conditioned.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Base of the logarithm in the `n log n` basis.
pub const LOG_BASE: f64 = 2.0;

/// Adjusted-R² band inside which the smaller model wins.
pub const PARSIMONY_EPS: f64 = 1e-3;

/// Relative size of an R diagonal entry below which its column is treated
/// as dependent on the earlier ones.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("{points} points cannot determine {params} coefficients")]
    Underdetermined { points: usize, params: usize },
    #[error("design matrix is rank deficient; dependent column(s): {}", .0.join(", "))]
    Singular(Vec<String>),
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("no candidate models given")]
    NoCandidates,
    #[error("non-finite value in data")]
    NonFinite,
}

/// Predictor tuple of one observation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Predictors {
    pub n: f64,
    pub k: f64,
    pub p: f64,
}

impl Predictors {
    pub fn n(n: f64) -> Self {
        Self { n, ..Self::default() }
    }
    pub fn k(k: f64) -> Self {
        Self { k, ..Self::default() }
    }
    pub fn p(p: f64) -> Self {
        Self { p, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum BasisFn {
    One,
    N,
    NLogN,
    P,
    P2,
    P3,
    K,
    K2,
    K3,
    Custom {
        name: &'static str,
        f: fn(&Predictors) -> f64,
    },
}

impl BasisFn {
    pub fn name(&self) -> &'static str {
        match self {
            BasisFn::One => "1",
            BasisFn::N => "n",
            BasisFn::NLogN => "n*log2(n)",
            BasisFn::P => "p",
            BasisFn::P2 => "p^2",
            BasisFn::P3 => "p^3",
            BasisFn::K => "k",
            BasisFn::K2 => "k^2",
            BasisFn::K3 => "k^3",
            BasisFn::Custom { name, .. } => name,
        }
    }

    pub fn eval(&self, x: &Predictors) -> f64 {
        match self {
            BasisFn::One => 1.0,
            BasisFn::N => x.n,
            BasisFn::NLogN => x.n * x.n.log(LOG_BASE),
            BasisFn::P => x.p,
            BasisFn::P2 => x.p * x.p,
            BasisFn::P3 => x.p * x.p * x.p,
            BasisFn::K => x.k,
            BasisFn::K2 => x.k * x.k,
            BasisFn::K3 => x.k * x.k * x.k,
            BasisFn::Custom { f, .. } => f(x),
        }
    }
}

/// A named model: the response is a linear combination of `functions`.
#[derive(Debug, Clone)]
pub struct BasisSpec {
    pub name: String,
    pub functions: Vec<BasisFn>,
}

impl BasisSpec {
    pub fn new(name: impl Into<String>, functions: Vec<BasisFn>) -> Result<Self, FitError> {
        let spec = Self {
            name: name.into(),
            functions,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), FitError> {
        if self.functions.is_empty() {
            return Err(FitError::InvalidBasis(format!(
                "model '{}' has no basis functions",
                self.name
            )));
        }
        for (i, f) in self.functions.iter().enumerate() {
            if self.functions[..i].iter().any(|g| g.name() == f.name()) {
                return Err(FitError::InvalidBasis(format!(
                    "duplicate basis function '{}'",
                    f.name()
                )));
            }
        }
        Ok(())
    }

    pub fn has_intercept(&self) -> bool {
        self.functions.iter().any(|f| matches!(f, BasisFn::One))
    }

    /// `a + b*n*log2(n)`
    pub fn n_log_n() -> Self {
        Self::new("n log n", vec![BasisFn::One, BasisFn::NLogN]).expect("valid")
    }

    /// `a + b*n`
    pub fn linear_n() -> Self {
        Self::new("linear in n", vec![BasisFn::One, BasisFn::N]).expect("valid")
    }

    /// Polynomial in p of degree 1 to 3, with intercept.
    pub fn poly_p(degree: usize) -> Self {
        let all = [BasisFn::P, BasisFn::P2, BasisFn::P3];
        Self::polynomial("p", degree, &all)
    }

    /// Polynomial in k of degree 1 to 3, with intercept.
    pub fn poly_k(degree: usize) -> Self {
        let all = [BasisFn::K, BasisFn::K2, BasisFn::K3];
        Self::polynomial("k", degree, &all)
    }

    fn polynomial(var: &str, degree: usize, powers: &[BasisFn; 3]) -> Self {
        assert!((1..=3).contains(&degree), "degree must be 1..=3");
        let mut functions = vec![BasisFn::One];
        functions.extend_from_slice(&powers[..degree]);
        Self::new(format!("degree-{degree} in {var}"), functions).expect("valid")
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.functions.iter().map(BasisFn::name).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ModelFit {
    pub basis: BasisSpec,
    pub coefficients: Vec<f64>,
    pub r2: f64,
    /// NaN when the model has as many coefficients as points.
    pub adj_r2: f64,
    pub residuals: Vec<f64>,
    pub sse: f64,
}

impl ModelFit {
    pub fn predict(&self, x: &Predictors) -> f64 {
        self.basis
            .functions
            .iter()
            .zip(&self.coefficients)
            .map(|(f, c)| c * f.eval(x))
            .sum()
    }

    /// Human-readable equation, e.g. `y = 0.1 + 2e-6*n*log2(n)`.
    pub fn equation(&self) -> String {
        let terms: Vec<String> = self
            .basis
            .functions
            .iter()
            .zip(&self.coefficients)
            .map(|(f, c)| match f {
                BasisFn::One => format!("{c:.6e}"),
                _ => format!("{c:.6e}*{}", f.name()),
            })
            .collect();
        format!("y = {}", terms.join(" + "))
    }
}

pub fn predict(fit: &ModelFit, x: &Predictors) -> f64 {
    fit.predict(x)
}

pub fn least_squares_fit(points: &[(Predictors, f64)], basis: &BasisSpec) -> Result<ModelFit, FitError> {
    basis.validate()?;
    let (m, q) = (points.len(), basis.functions.len());
    if m < q {
        return Err(FitError::Underdetermined { points: m, params: q });
    }

    let mut x = DMatrix::from_fn(m, q, |i, j| basis.functions[j].eval(&points[i].0));
    let y = DVector::from_iterator(m, points.iter().map(|(_, y)| *y));
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(FitError::NonFinite);
    }

    let mut scale = vec![1.0; q];
    let mut zero_cols = Vec::new();
    for (j, s) in scale.iter_mut().enumerate() {
        let max = x.column(j).amax();
        if max == 0.0 {
            zero_cols.push(basis.functions[j].name().to_string());
        } else {
            *s = max;
            x.column_mut(j).scale_mut(1.0 / max);
        }
    }
    if !zero_cols.is_empty() {
        return Err(FitError::Singular(zero_cols));
    }

    let qr = x.clone().qr();
    let r = qr.r();
    let diag_max = (0..q).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    let dependent: Vec<String> = (0..q)
        .filter(|&j| r[(j, j)].abs() <= RANK_TOL * diag_max)
        .map(|j| basis.functions[j].name().to_string())
        .collect();
    if !dependent.is_empty() {
        return Err(FitError::Singular(dependent));
    }
    let qty = qr.q().transpose() * &y;
    let scaled = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| FitError::Singular(basis.names().iter().map(|s| s.to_string()).collect()))?;

    let fitted = &x * &scaled;
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let coefficients: Vec<f64> = scaled.iter().zip(&scale).map(|(c, s)| c / s).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let mean = y.mean();
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r2 = if sst > 0.0 {
        1.0 - sse / sst
    } else if sse == 0.0 {
        1.0
    } else {
        0.0
    };
    let adj_r2 = if m > q {
        1.0 - (1.0 - r2) * (m as f64 - 1.0) / (m - q) as f64
    } else {
        f64::NAN
    };
    Ok(ModelFit {
        basis: basis.clone(),
        coefficients,
        r2,
        adj_r2,
        residuals,
        sse,
    })
}

#[derive(Debug, Clone)]
pub struct SelectionReport {
    pub fits: Vec<ModelFit>,
    /// Index into `fits` of the selected model.
    pub chosen: usize,
}

impl SelectionReport {
    pub fn chosen_fit(&self) -> &ModelFit {
        &self.fits[self.chosen]
    }

    /// `model,r2,adj_r2,sse,coeffs...` with one row per candidate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model,r2,adj_r2,sse,coeffs...\n");
        for fit in &self.fits {
            let coeffs: Vec<String> = fit.coefficients.iter().map(|c| format!("{c:e}")).collect();
            out.push_str(&format!(
                "{},{},{},{:e},{}\n",
                fit.basis.name,
                fit.r2,
                fit.adj_r2,
                fit.sse,
                coeffs.join(",")
            ));
        }
        out
    }
}

impl fmt::Display for SelectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<3}{:<16}{:>14}{:>14}{:>16}  equation",
            "", "model", "R^2", "adj R^2", "SSE"
        )?;
        for (i, fit) in self.fits.iter().enumerate() {
            let mark = if i == self.chosen { "*" } else { "" };
            writeln!(
                f,
                "{:<3}{:<16}{:>14.10}{:>14.10}{:>16.6e}  {}",
                mark,
                fit.basis.name,
                fit.r2,
                fit.adj_r2,
                fit.sse,
                fit.equation()
            )?;
        }
        write!(
            f,
            "selected: {} (highest adjusted R^2, ties within {PARSIMONY_EPS} go to fewer terms)",
            self.chosen_fit().basis.name
        )
    }
}

/// Fits every candidate and picks the highest adjusted R². Candidates within
/// [`PARSIMONY_EPS`] of the best are resolved toward fewer basis functions,
/// then toward the earlier candidate.
pub fn select_model(points: &[(Predictors, f64)], candidates: &[BasisSpec]) -> Result<SelectionReport, FitError> {
    if candidates.is_empty() {
        return Err(FitError::NoCandidates);
    }
    let fits = candidates
        .iter()
        .map(|b| least_squares_fit(points, b))
        .collect::<Result<Vec<_>, _>>()?;
    let score = |f: &ModelFit| if f.adj_r2.is_nan() { f64::NEG_INFINITY } else { f.adj_r2 };
    let best = fits.iter().map(score).fold(f64::NEG_INFINITY, f64::max);
    let chosen = fits
        .iter()
        .enumerate()
        .filter(|(_, f)| score(f) >= best - PARSIMONY_EPS)
        .min_by_key(|(i, f)| (f.basis.functions.len(), *i))
        .map(|(i, _)| i)
        .expect("at least one candidate within the band");
    Ok(SelectionReport { fits, chosen })
}
