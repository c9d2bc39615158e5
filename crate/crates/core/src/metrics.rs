//! Additive gaps, multiplicative factors and worst-case bounds.
//!
//! For a policy `π` and arrival law `Q`, the additive gap is
//! `G = T* − T(π)` and the multiplicative factor is `F = T(π)/T*`, where
//! `T*` is the best achievable average reward. Here `T*` is the exact
//! Bernoulli series of the maximin policy for Bernoulli arrivals, and the
//! value-iteration optimum of the discretised model otherwise.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrivals::{ArrivalDistribution, Family};
use crate::evaluation::{build_mdp, series::bernoulli_reward, EvaluationResult};
use crate::policy::StationaryPolicy;
use crate::reward::RewardFunction;
use crate::{Error, Result};

/// Tolerance floor applied to every cell, covering floating-point noise in
/// evaluators that report a zero error budget.
pub const CELL_TOLERANCE_FLOOR: f64 = 1e-12;

/// `(G, F) = (optimal − policy, policy/optimal)`.
pub fn gap_and_factor(policy_gain: f64, optimal_gain: f64) -> Result<(f64, f64)> {
    if !(optimal_gain > 0.0) {
        return Err(Error::Degenerate(format!(
            "optimal gain {optimal_gain} is not positive"
        )));
    }
    Ok((optimal_gain - policy_gain, policy_gain / optimal_gain))
}

/// `r(pc)`, an upper bound on the average reward of any policy under any
/// arrival law on `[0, c]` with mean-to-capacity ratio `p`.
pub fn universal_upper_bound(reward: &RewardFunction, c: f64, p: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::domain("c", c, "(0, inf)"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain("p", p, "(0, 1]"));
    }
    reward.value(p * c)
}

/// `F₀(p) = 1 − p·M₀·(1−p)^{M₀}` with `M₀ = ⌊1/p⌋`: the AWGN lower bound on
/// `T_ω(c)/r(pc)` over all `c`.
pub fn f0(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("p", p, "(0, 1)"));
    }
    let m0 = (1.0 / p).floor();
    Ok(1.0 - p * m0 * (1.0 - p).powf(m0))
}

/// `1/(2−p)`, the limit of the fixed-fraction factor under Bernoulli
/// arrivals as `c → 0`.
pub fn phi_small_c_factor_limit(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("p", p, "(0, 1)"));
    }
    Ok(1.0 / (2.0 - p))
}

/// `T_ω(c)/r(pc)` under Bernoulli arrivals: the factor the maximin policy is
/// guaranteed against every arrival law with ratio `p`.
pub fn worst_case_ratio(reward: &RewardFunction, c: f64, p: f64) -> Result<f64> {
    let omega = StationaryPolicy::maximin(reward, p)?;
    let t = bernoulli_reward(&omega, reward, c, p, 1e-15)?.value;
    Ok(t / universal_upper_bound(reward, c, p)?)
}

/// Policies a sweep can compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyChoice {
    Maximin,
    FixedFraction,
    Greedy,
}

impl PolicyChoice {
    pub fn build(self, reward: &RewardFunction, p: f64) -> Result<StationaryPolicy> {
        match self {
            PolicyChoice::Maximin => StationaryPolicy::maximin(reward, p),
            PolicyChoice::FixedFraction => StationaryPolicy::fixed_fraction(p),
            PolicyChoice::Greedy => Ok(StationaryPolicy::greedy()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyChoice::Maximin => "maximin",
            PolicyChoice::FixedFraction => "fixed_fraction",
            PolicyChoice::Greedy => "greedy",
        }
    }
}

impl std::str::FromStr for PolicyChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "maximin" | "omega" => Ok(PolicyChoice::Maximin),
            "fixed_fraction" | "fixed-fraction" | "phi" => Ok(PolicyChoice::FixedFraction),
            "greedy" => Ok(PolicyChoice::Greedy),
            other => Err(Error::InvalidParameter(format!("unknown policy `{other}`"))),
        }
    }
}

/// How the arrival law of a cell is pinned down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    /// Actual mean-to-capacity ratio.
    Mcr(f64),
    /// Nominal ratio of the untruncated law.
    Nmcr(f64),
}

impl Ratio {
    pub fn distribution(self, family: Family, c: f64) -> Result<ArrivalDistribution> {
        match self {
            Ratio::Mcr(p) => ArrivalDistribution::with_mcr(family, c, p),
            Ratio::Nmcr(p) => ArrivalDistribution::with_nmcr(family, c, p),
        }
    }
}

/// Value-iteration knobs used for non-Bernoulli cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViSettings {
    pub grid_n: usize,
    pub eps: f64,
}

impl Default for ViSettings {
    fn default() -> Self {
        Self {
            grid_n: 2000,
            eps: 1e-9,
        }
    }
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub family: Family,
    pub c: f64,
    /// Ratio the policies were built with (the actual MCR of the cell).
    pub p: f64,
    pub nmcr: Option<f64>,
    pub mcr: f64,
    pub policy: String,
    pub policy_gain: f64,
    pub optimal_gain: f64,
    pub additive_gap: f64,
    pub multiplicative_factor: f64,
    /// Sum of the error budgets of the two evaluations.
    pub tolerance: f64,
}

impl GapReport {
    pub fn new(
        arrivals: &ArrivalDistribution,
        policy: &str,
        policy_gain: &EvaluationResult,
        optimal_gain: &EvaluationResult,
    ) -> Result<Self> {
        let (g, f) = gap_and_factor(policy_gain.value, optimal_gain.value)?;
        Ok(Self {
            family: arrivals.family(),
            c: arrivals.c(),
            p: arrivals.mcr(),
            nmcr: arrivals.nmcr().ok(),
            mcr: arrivals.mcr(),
            policy: policy.to_owned(),
            policy_gain: policy_gain.value,
            optimal_gain: optimal_gain.value,
            additive_gap: g,
            multiplicative_factor: f,
            tolerance: policy_gain.tolerance + optimal_gain.tolerance + CELL_TOLERANCE_FLOOR,
        })
    }

    /// Checks `G ≥ −tol`, `F ∈ [0, 1 + tol/T*]` and `T* ≥ T(π) − tol`.
    pub fn check(&self) -> std::result::Result<(), String> {
        let tol = self.tolerance;
        if self.additive_gap < -tol {
            return Err(format!(
                "negative additive gap {:e} beyond tolerance {tol:e}",
                self.additive_gap
            ));
        }
        let f_max = 1.0 + tol / self.optimal_gain;
        if !(self.multiplicative_factor >= 0.0 && self.multiplicative_factor <= f_max) {
            return Err(format!(
                "multiplicative factor {} outside [0, {f_max}]",
                self.multiplicative_factor
            ));
        }
        if self.optimal_gain < self.policy_gain - tol {
            return Err(format!(
                "optimal gain {} below policy gain {}",
                self.optimal_gain, self.policy_gain
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub reward: RewardFunction,
    pub family: Family,
    pub c_grid: Vec<f64>,
    pub ratios: Vec<Ratio>,
    pub policies: Vec<PolicyChoice>,
    pub vi: ViSettings,
    /// Truncation tolerance of the Bernoulli series.
    pub series_tol: f64,
}

impl SweepConfig {
    pub fn new(
        reward: RewardFunction,
        family: Family,
        c_grid: Vec<f64>,
        ratios: Vec<Ratio>,
    ) -> Self {
        Self {
            reward,
            family,
            c_grid,
            ratios,
            policies: vec![PolicyChoice::Maximin, PolicyChoice::FixedFraction],
            vi: ViSettings::default(),
            series_tol: 1e-14,
        }
    }
}

/// Gap reports for every policy in every `(ratio, c)` cell, in grid order
/// (ratios outer, capacities inner, policies innermost).
pub fn sweep(config: &SweepConfig) -> Result<Vec<GapReport>> {
    if config.c_grid.is_empty() || config.ratios.is_empty() || config.policies.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep grids must be nonempty".into(),
        ));
    }
    let cells: Vec<(Ratio, f64)> = config
        .ratios
        .iter()
        .flat_map(|&r| config.c_grid.iter().map(move |&c| (r, c)))
        .collect();
    let per_cell = cells
        .par_iter()
        .map(|&(ratio, c)| sweep_cell(config, &ratio.distribution(config.family, c)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}

/// Gap reports for each configured policy under `arrivals`.
pub fn sweep_cell(config: &SweepConfig, arrivals: &ArrivalDistribution) -> Result<Vec<GapReport>> {
    let reward = &config.reward;
    let (c, p) = (arrivals.c(), arrivals.mcr());
    let policies = config
        .policies
        .iter()
        .map(|choice| Ok((choice.name(), choice.build(reward, p)?)))
        .collect::<Result<Vec<_>>>()?;
    match arrivals {
        ArrivalDistribution::Bernoulli { .. } => {
            let omega = StationaryPolicy::maximin(reward, p)?;
            let optimal = bernoulli_reward(&omega, reward, c, p, config.series_tol)?;
            policies
                .iter()
                .map(|(name, pol)| {
                    let gain = bernoulli_reward(pol, reward, c, p, config.series_tol)?;
                    GapReport::new(arrivals, name, &gain, &optimal)
                })
                .collect()
        }
        _ => {
            let model = build_mdp(reward, arrivals, config.vi.grid_n)?;
            let optimal = model.optimal_gain(config.vi.eps)?.result;
            policies
                .iter()
                .map(|(name, pol)| {
                    let gain = model.policy_gain(pol, config.vi.eps)?;
                    GapReport::new(arrivals, name, &gain, &optimal)
                })
                .collect()
        }
    }
}

/// Grid approximations of the upper additive gap and lower multiplicative
/// factor of one policy: the largest gap and smallest factor over the
/// swept cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridExtremes {
    pub max_additive_gap: f64,
    pub min_multiplicative_factor: f64,
    pub cells: usize,
}

pub fn grid_extremes(reports: &[GapReport], policy: &str) -> Option<GridExtremes> {
    let rows: Vec<&GapReport> = reports.iter().filter(|r| r.policy == policy).collect();
    if rows.is_empty() {
        return None;
    }
    Some(GridExtremes {
        max_additive_gap: rows
            .iter()
            .map(|r| r.additive_gap)
            .fold(f64::NEG_INFINITY, f64::max),
        min_multiplicative_factor: rows
            .iter()
            .map(|r| r.multiplicative_factor)
            .fold(f64::INFINITY, f64::min),
        cells: rows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn awgn() -> RewardFunction {
        RewardFunction::awgn(1.0).unwrap()
    }

    #[test]
    fn gap_examples() {
        assert_eq!(gap_and_factor(0.0, 0.3).unwrap(), (0.3, 0.0));
        assert!(matches!(
            gap_and_factor(0.1, 0.0),
            Err(Error::Degenerate(_))
        ));
        let (g, f) = gap_and_factor(0.139157, 0.173287).unwrap();
        assert!((g - 0.03413).abs() < 1e-9);
        assert!((f - 0.803).abs() < 1e-3);
    }

    #[test]
    fn upper_bound_examples() {
        let r = awgn();
        assert!((universal_upper_bound(&r, 1.0, 0.5).unwrap() - 0.5 * 1.5f64.ln()).abs() < 1e-15);
        assert!(
            (universal_upper_bound(&r, 2.0, 1.0).unwrap() - r.value(2.0).unwrap()).abs() < 1e-15
        );
        assert!(0.25 * 2f64.ln() <= universal_upper_bound(&r, 1.0, 0.5).unwrap());
    }

    #[test]
    fn f0_examples() {
        assert!((f0(0.5).unwrap() - 0.75).abs() < 1e-15);
        assert!((f0(1.0 / 3.0).unwrap() - (1.0 - 8.0 / 27.0)).abs() < 1e-15);
        let floor = 1.0 - (-1f64).exp();
        for k in 1..2000 {
            let p = k as f64 / 2000.0;
            assert!(f0(p).unwrap() >= floor);
        }
    }

    #[test]
    fn phi_limit_examples() {
        assert!((phi_small_c_factor_limit(0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((phi_small_c_factor_limit(1.0 - 1e-9).unwrap() - 1.0).abs() < 1e-8);
        assert!(phi_small_c_factor_limit(1e-9).unwrap() > 0.5);
    }

    #[test]
    fn bernoulli_cell_reports() {
        let config = SweepConfig::new(awgn(), Family::Bernoulli, vec![1.0], vec![Ratio::Mcr(0.5)]);
        let reports = sweep(&config).unwrap();
        assert_eq!(reports.len(), 2);
        let omega = &reports[0];
        assert_eq!(omega.policy, "maximin");
        assert_eq!(omega.additive_gap, 0.0);
        assert_eq!(omega.multiplicative_factor, 1.0);
        let phi = &reports[1];
        assert!((phi.multiplicative_factor - 0.8031).abs() < 1e-3);
        for r in &reports {
            r.check().unwrap();
        }
    }

    #[test]
    fn report_check_flags_bad_rows() {
        let mut row = GapReport {
            family: Family::Bernoulli,
            c: 1.0,
            p: 0.5,
            nmcr: None,
            mcr: 0.5,
            policy: "x".into(),
            policy_gain: 0.2,
            optimal_gain: 0.1,
            additive_gap: -0.1,
            multiplicative_factor: 2.0,
            tolerance: 1e-6,
        };
        assert!(row.check().is_err());
        row.policy_gain = 0.05;
        row.additive_gap = 0.05;
        row.multiplicative_factor = 0.5;
        row.check().unwrap();
    }

    #[test]
    fn nmcr_cells_carry_the_actual_ratio() {
        let mut config = SweepConfig::new(
            awgn(),
            Family::LimitedUniform,
            vec![1.0],
            vec![Ratio::Nmcr(0.9)],
        );
        config.vi.grid_n = 100;
        let reports = sweep(&config).unwrap();
        assert!((reports[0].mcr - 0.7222).abs() < 5e-5);
        assert_eq!(reports[0].nmcr, Some(0.9));
        assert!(sweep(&SweepConfig::new(
            awgn(),
            Family::Bernoulli,
            vec![],
            vec![Ratio::Mcr(0.5)]
        ))
        .is_err());
    }

    #[test]
    fn extremes() {
        let config = SweepConfig::new(
            awgn(),
            Family::Bernoulli,
            vec![0.5, 1.0, 4.0],
            vec![Ratio::Mcr(0.5)],
        );
        let reports = sweep(&config).unwrap();
        let phi = grid_extremes(&reports, "fixed_fraction").unwrap();
        assert_eq!(phi.cells, 3);
        assert!(phi.min_multiplicative_factor < 1.0 && phi.max_additive_gap > 0.0);
        assert!(grid_extremes(&reports, "nothing").is_none());
    }
}
