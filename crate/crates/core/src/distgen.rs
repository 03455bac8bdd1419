//! Input laws for the sorting experiments.
//!
//! The negative binomial variate NB(k, p) is the number of Bernoulli(p)
//! trials needed to collect `k` successes, so its support starts at `k`
//! (mean `k/p`, variance `k(1-p)/p^2`). It is drawn either by simulating the
//! trials one by one or as a sum of `k` geometric variates obtained by
//! inverse transform; the two are equal in distribution.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::rng::RngStream;
use crate::sortcore::{Key, KeyArray};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        reason: &'static str,
    },
    #[error("cannot parse distribution '{0}' (expected nb:K:P, binomial:M:P or uniform:LO:HI)")]
    Syntax(String),
}

fn invalid(name: &'static str, value: impl fmt::Display, reason: &'static str) -> DistError {
    DistError::InvalidParameter {
        name,
        value: value.to_string(),
        reason,
    }
}

fn check_success_probability(p: f64) -> Result<(), DistError> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(invalid("p", p, "must lie in (0, 1]"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    NegBinomial { k: u64, p: f64 },
    Binomial { m: u64, p: f64 },
    UniformInt { lo: i64, hi: i64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum NbMethod {
    /// Run Bernoulli trials until `k` successes.
    BernoulliSim,
    /// Sum `k` inverse-transform geometric draws.
    #[default]
    GeometricSum,
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<(), DistError> {
        match *self {
            DistributionSpec::NegBinomial { k, p } => {
                if k < 1 {
                    return Err(invalid("k", k, "must be at least 1"));
                }
                check_success_probability(p)
            }
            DistributionSpec::Binomial { m, p } => {
                if m < 1 {
                    return Err(invalid("m", m, "must be at least 1"));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid("p", p, "must lie in [0, 1]"));
                }
                Ok(())
            }
            DistributionSpec::UniformInt { lo, hi } => {
                if lo > hi {
                    return Err(invalid("lo", lo, "must not exceed hi"));
                }
                Ok(())
            }
        }
    }

    /// Draws one key. Parameters are assumed valid.
    fn draw(&self, rng: &mut RngStream) -> Key {
        match *self {
            DistributionSpec::NegBinomial { k, p } => saturating_key(nb_unchecked(k, p, rng, NbMethod::GeometricSum)),
            DistributionSpec::Binomial { m, p } => saturating_key(binomial_unchecked(m, p, rng)),
            DistributionSpec::UniformInt { lo, hi } => {
                let span = hi.wrapping_sub(lo) as u64;
                let offset = if span == u64::MAX {
                    rng.next_u64()
                } else {
                    rng.below(span + 1)
                };
                lo.wrapping_add(offset as i64)
            }
        }
    }
}

fn saturating_key(v: u64) -> Key {
    Key::try_from(v).unwrap_or(Key::MAX)
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionSpec::NegBinomial { k, p } => write!(f, "nb:{k}:{p}"),
            DistributionSpec::Binomial { m, p } => write!(f, "binomial:{m}:{p}"),
            DistributionSpec::UniformInt { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = DistError;

    /// Parses `nb:K:P`, `binomial:M:P` or `uniform:LO:HI` and validates it.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || DistError::Syntax(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [law, a, b] = parts.as_slice() else {
            return Err(syntax());
        };
        let spec = match law.to_ascii_lowercase().as_str() {
            "nb" | "negbinomial" => DistributionSpec::NegBinomial {
                k: a.parse().map_err(|_| syntax())?,
                p: b.parse().map_err(|_| syntax())?,
            },
            "binomial" | "bin" => DistributionSpec::Binomial {
                m: a.parse().map_err(|_| syntax())?,
                p: b.parse().map_err(|_| syntax())?,
            },
            "uniform" => DistributionSpec::UniformInt {
                lo: a.parse().map_err(|_| syntax())?,
                hi: b.parse().map_err(|_| syntax())?,
            },
            _ => return Err(syntax()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Inverse transform for the geometric law on {1, 2, ...}:
/// `ceil(ln(1 - u) / ln(1 - p))` for `u` in (0, 1).
pub fn geometric_from_uniform(u: f64, p: f64) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    geometric_with_log(u, (-p).ln_1p())
}

/// `ln_q` is `ln(1 - p)` for `p` in (0, 1).
fn geometric_with_log(u: f64, ln_q: f64) -> u64 {
    let x = ((-u).ln_1p() / ln_q).ceil();
    // `as` saturates; the max guards the u -> 0 rounding corner.
    (x as u64).max(1)
}

/// Trials up to and including the first success.
pub fn geometric_sample(p: f64, rng: &mut RngStream) -> Result<u64, DistError> {
    check_success_probability(p)?;
    Ok(geometric_from_uniform(rng.next_open01(), p))
}

pub fn nb_sample(k: u64, p: f64, rng: &mut RngStream, method: NbMethod) -> Result<u64, DistError> {
    DistributionSpec::NegBinomial { k, p }.validate()?;
    Ok(nb_unchecked(k, p, rng, method))
}

fn nb_unchecked(k: u64, p: f64, rng: &mut RngStream, method: NbMethod) -> u64 {
    match method {
        NbMethod::GeometricSum if p >= 1.0 => k,
        NbMethod::GeometricSum => {
            let ln_q = (-p).ln_1p();
            (0..k).fold(0u64, |acc, _| {
                acc.saturating_add(geometric_with_log(rng.next_open01(), ln_q))
            })
        }
        NbMethod::BernoulliSim => {
            let (mut trials, mut successes) = (0u64, 0u64);
            while successes < k {
                trials += 1;
                if rng.next_open01() < p {
                    successes += 1;
                }
            }
            trials
        }
    }
}

/// Successes in `m` Bernoulli(p) trials.
pub fn binomial_sample(m: u64, p: f64, rng: &mut RngStream) -> Result<u64, DistError> {
    DistributionSpec::Binomial { m, p }.validate()?;
    Ok(binomial_unchecked(m, p, rng))
}

fn binomial_unchecked(m: u64, p: f64, rng: &mut RngStream) -> u64 {
    (0..m).filter(|_| rng.next_open01() < p).count() as u64
}

/// `n` i.i.d. keys from `spec`, reproducible from `seed`.
pub fn generate_dataset(spec: &DistributionSpec, n: usize, seed: u64) -> Result<KeyArray, DistError> {
    spec.validate()?;
    let mut rng = RngStream::new(seed);
    Ok((0..n).map(|_| spec.draw(&mut rng)).collect())
}
