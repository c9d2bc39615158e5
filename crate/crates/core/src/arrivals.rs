//! Energy-arrival distributions on `[0, c]`.
//!
//! Three families are supported, each carrying an atom at the capacity `c`
//! for the mass that would overflow the battery:
//!
//! * Bernoulli `(1−p)δ₀ + pδ_c`,
//! * capacity-limited uniform: `U[0, b]` with the mass above `c` moved to `c`,
//! * capacity-limited exponential: `Exp(λ)` with the tail above `c` moved to `c`.
//!
//! The mean-to-capacity ratio (MCR) is the effective mean `E[min(X, c)]`
//! divided by `c`; the nominal MCR (NMCR) uses the untruncated mean.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::numeric::bisect_increasing;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Bernoulli,
    #[serde(rename = "uniform")]
    LimitedUniform,
    #[serde(rename = "exponential")]
    LimitedExponential,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Family::Bernoulli => "bernoulli",
            Family::LimitedUniform => "uniform",
            Family::LimitedExponential => "exponential",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bernoulli" => Ok(Family::Bernoulli),
            "uniform" | "limited_uniform" => Ok(Family::LimitedUniform),
            "exponential" | "limited_exponential" => Ok(Family::LimitedExponential),
            other => Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }
}

/// Anything that can produce i.i.d. arrivals for a battery of capacity `c`.
pub trait ArrivalSource: Send + Sync {
    fn capacity(&self) -> f64;
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArrivalDistribution {
    Bernoulli { c: f64, p: f64 },
    LimitedUniform { c: f64, b: f64 },
    LimitedExponential { c: f64, lambda: f64 },
}

fn check_positive(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(what, v, "(0, inf)"))
    }
}

fn check_ratio(what: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(what, p, "(0, 1)"))
    }
}

/// `p̃(1 − e^{−1/p̃})`, the MCR of a limited exponential with NMCR `p̃`.
fn exponential_mcr_of_nmcr(nmcr: f64) -> f64 {
    -nmcr * (-1.0 / nmcr).exp_m1()
}

impl ArrivalDistribution {
    pub fn bernoulli(c: f64, p: f64) -> Result<Self> {
        check_positive("c", c)?;
        check_ratio("p", p)?;
        Ok(ArrivalDistribution::Bernoulli { c, p })
    }

    pub fn limited_uniform(c: f64, b: f64) -> Result<Self> {
        check_positive("c", c)?;
        check_positive("b", b)?;
        Ok(ArrivalDistribution::LimitedUniform { c, b })
    }

    pub fn limited_exponential(c: f64, lambda: f64) -> Result<Self> {
        check_positive("c", c)?;
        check_positive("lambda", lambda)?;
        Ok(ArrivalDistribution::LimitedExponential { c, lambda })
    }

    /// Member of `family` whose nominal MCR is `nmcr`: `b = 2·nmcr·c` for the
    /// uniform, `λ = 1/(nmcr·c)` for the exponential. Bernoulli has no
    /// nominal parameterization distinct from its MCR and is rejected.
    pub fn with_nmcr(family: Family, c: f64, nmcr: f64) -> Result<Self> {
        check_positive("nmcr", nmcr)?;
        match family {
            Family::Bernoulli => Err(Error::Unsupported {
                operation: "nmcr parameterization",
                subject: family.to_string(),
            }),
            Family::LimitedUniform => Self::limited_uniform(c, 2.0 * nmcr * c),
            Family::LimitedExponential => Self::limited_exponential(c, 1.0 / (nmcr * c)),
        }
    }

    /// Member of `family` whose actual MCR is `p`.
    pub fn with_mcr(family: Family, c: f64, p: f64) -> Result<Self> {
        check_ratio("p", p)?;
        match family {
            Family::Bernoulli => Self::bernoulli(c, p),
            Family::LimitedUniform => {
                let nmcr = if p <= 0.5 { p } else { 1.0 / (4.0 * (1.0 - p)) };
                Self::with_nmcr(family, c, nmcr)
            }
            Family::LimitedExponential => {
                // mcr(p̃) < p̃ and mcr(p̃) ≥ 1 − 1/(2p̃), so [p, 1/(1−p)] brackets the root
                let nmcr = bisect_increasing(exponential_mcr_of_nmcr, p, p, 1.0 / (1.0 - p), 1e-15);
                Self::with_nmcr(family, c, nmcr)
            }
        }
    }

    pub fn family(&self) -> Family {
        match self {
            ArrivalDistribution::Bernoulli { .. } => Family::Bernoulli,
            ArrivalDistribution::LimitedUniform { .. } => Family::LimitedUniform,
            ArrivalDistribution::LimitedExponential { .. } => Family::LimitedExponential,
        }
    }

    pub fn c(&self) -> f64 {
        match *self {
            ArrivalDistribution::Bernoulli { c, .. }
            | ArrivalDistribution::LimitedUniform { c, .. }
            | ArrivalDistribution::LimitedExponential { c, .. } => c,
        }
    }

    /// `μ_c = E[min(X, c)]`.
    pub fn effective_mean(&self) -> f64 {
        match *self {
            ArrivalDistribution::Bernoulli { c, p } => p * c,
            ArrivalDistribution::LimitedUniform { c, b } => {
                if b <= c {
                    0.5 * b
                } else {
                    c - c * c / (2.0 * b)
                }
            }
            ArrivalDistribution::LimitedExponential { c, lambda } => {
                -(-lambda * c).exp_m1() / lambda
            }
        }
    }

    pub fn mcr(&self) -> f64 {
        match *self {
            ArrivalDistribution::Bernoulli { p, .. } => p,
            _ => self.effective_mean() / self.c(),
        }
    }

    /// Nominal MCR: `b/(2c)` or `1/(λc)`.
    pub fn nmcr(&self) -> Result<f64> {
        match *self {
            ArrivalDistribution::LimitedUniform { c, b } => Ok(b / (2.0 * c)),
            ArrivalDistribution::LimitedExponential { c, lambda } => Ok(1.0 / (lambda * c)),
            ArrivalDistribution::Bernoulli { .. } => Err(Error::Unsupported {
                operation: "nmcr",
                subject: self.family().to_string(),
            }),
        }
    }

    /// `P(X ≤ x)` of the truncated law, for `0 ≤ x < c`. The atom at `c` is
    /// excluded.
    fn cdf_below_capacity(&self, x: f64) -> f64 {
        match *self {
            ArrivalDistribution::Bernoulli { p, .. } => 1.0 - p,
            ArrivalDistribution::LimitedUniform { b, .. } => (x / b).min(1.0),
            ArrivalDistribution::LimitedExponential { lambda, .. } => -(-lambda * x).exp_m1(),
        }
    }

    /// Mass of the atom at exactly `c`.
    pub fn atom_at_capacity(&self) -> f64 {
        match *self {
            ArrivalDistribution::Bernoulli { p, .. } => p,
            ArrivalDistribution::LimitedUniform { c, b } => (1.0 - c / b).max(0.0),
            ArrivalDistribution::LimitedExponential { c, lambda } => (-lambda * c).exp(),
        }
    }

    /// Probability mass on the `N + 1` grid points `k·c/N`.
    ///
    /// Grid point `k` collects the mass of the cell `[x_k − h/2, x_k + h/2)`
    /// clipped to `[0, c)`, where `h = c/N`; the atom at `c` goes to the last
    /// point. Bernoulli atoms are already on the grid and are copied as is.
    pub fn discretize(&self, n: usize) -> Result<DiscretizedPmf> {
        if n < 1 {
            return Err(Error::InvalidParameter(
                "discretization needs N >= 1".into(),
            ));
        }
        let c = self.c();
        let mut mass = vec![0.0; n + 1];
        if let ArrivalDistribution::Bernoulli { p, .. } = *self {
            mass[0] = 1.0 - p;
            mass[n] = p;
            return DiscretizedPmf::new(c, mass);
        }
        let h = c / n as f64;
        let mut lower = 0.0;
        for (k, m) in mass.iter_mut().enumerate().take(n) {
            let upper = self.cdf_below_capacity((k as f64 + 0.5) * h);
            *m = upper - lower;
            lower = upper;
        }
        // last half cell [c − h/2, c) plus the atom
        mass[n] = 1.0 - lower;
        DiscretizedPmf::new(c, mass)
    }
}

impl ArrivalSource for ArrivalDistribution {
    fn capacity(&self) -> f64 {
        self.c()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ArrivalDistribution::Bernoulli { c, p } => {
                if rng.random::<f64>() < p {
                    c
                } else {
                    0.0
                }
            }
            ArrivalDistribution::LimitedUniform { c, b } => (rng.random::<f64>() * b).min(c),
            ArrivalDistribution::LimitedExponential { c, lambda } => {
                let exp = Exp::new(lambda).expect("lambda validated at construction");
                exp.sample(rng).min(c)
            }
        }
    }
}

/// Arrival law on the grid `{k·c/N : 0 ≤ k ≤ N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedPmf {
    c: f64,
    mass: Vec<f64>,
}

impl DiscretizedPmf {
    /// Wraps a mass vector; it must be nonnegative and sum to one within `1e-12`.
    pub fn new(c: f64, mass: Vec<f64>) -> Result<Self> {
        check_positive("c", c)?;
        if mass.len() < 2 {
            return Err(Error::InvalidParameter(
                "pmf needs at least two grid points".into(),
            ));
        }
        if mass.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::InvalidParameter("pmf has a negative mass".into()));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("pmf sums to {total}")));
        }
        Ok(Self { c, mass })
    }

    /// All mass on grid point `index` of an `n`-cell grid.
    pub fn point_mass(c: f64, n: usize, index: usize) -> Result<Self> {
        if index > n {
            return Err(Error::InvalidParameter(format!(
                "index {index} outside grid of {n} cells"
            )));
        }
        let mut mass = vec![0.0; n + 1];
        mass[index] = 1.0;
        Self::new(c, mass)
    }

    /// Number of cells `N`.
    pub fn cells(&self) -> usize {
        self.mass.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.c / self.cells() as f64
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.mass.len()).map(move |k| k as f64 * h)
    }

    pub fn mean(&self) -> f64 {
        self.grid().zip(&self.mass).map(|(x, m)| x * m).sum()
    }

    /// Nonzero `(index, mass)` pairs.
    pub fn support(&self) -> Vec<(usize, f64)> {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(k, &m)| (k, m))
            .collect()
    }
}

impl ArrivalSource for DiscretizedPmf {
    fn capacity(&self) -> f64 {
        self.c
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (k, &m) in self.mass.iter().enumerate() {
            acc += m;
            if u < acc {
                return k as f64 * self.step();
            }
        }
        self.c
    }
}
