//! Average-reward value iteration on a discretised battery.
//!
//! States are the post-arrival battery levels `k·h`, `h = c/N`, and the
//! actions available in state `k` are the grid consumptions `a·h` with
//! `a ≤ k`. After consuming, `k − a` units remain and an arrival of `j`
//! units (drawn from the discretised arrival law) moves the battery to
//! `min(k − a + j, N)`. Every level stays on the grid, so no snapping is
//! needed inside the model.
//!
//! Gains are computed with relative value iteration: each sweep applies the
//! Bellman operator, measures the span of the change, and renormalises the
//! value vector so that state 0 reads zero. Iteration stops once the span
//! drops below `eps`; the gain then lies within `eps/2` of the midpoint of
//! the last change.

use rayon::prelude::*;

use super::{EvaluationResult, Method};
use crate::arrivals::{ArrivalDistribution, ArrivalSource, DiscretizedPmf};
use crate::policy::Policy;
use crate::reward::RewardFunction;
use crate::{Error, Result};

/// Default bound on the number of sweeps.
pub const VALUE_ITERATION_CAP: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct MdpModel {
    pmf: DiscretizedPmf,
    support: Vec<(usize, f64)>,
    /// `r(a·h)` for `a = 0..=N`.
    rewards: Vec<f64>,
    /// One-grid-step allowance `r′(0)·h` for discretisation error.
    grid_tolerance: f64,
}

/// Optimal gain together with a maximising action table.
#[derive(Debug, Clone)]
pub struct OptimalSolution {
    pub result: EvaluationResult,
    /// Grid index of the consumption chosen in each state.
    pub actions: Vec<usize>,
}

/// Discretises `arrivals` on `N + 1` levels of `[0, c]` and tabulates the
/// reward on the same grid.
pub fn build_mdp(
    reward: &RewardFunction,
    arrivals: &ArrivalDistribution,
    n: usize,
) -> Result<MdpModel> {
    MdpModel::from_pmf(reward, arrivals.discretize(n)?)
}

impl MdpModel {
    /// Builds a model from an arbitrary arrival pmf on the grid.
    pub fn from_pmf(reward: &RewardFunction, pmf: DiscretizedPmf) -> Result<Self> {
        let h = pmf.step();
        let rewards = (0..=pmf.cells())
            .map(|a| reward.value_unchecked(a as f64 * h))
            .collect();
        Ok(Self {
            support: pmf.support(),
            grid_tolerance: reward.marginal_at_zero() * h,
            rewards,
            pmf,
        })
    }

    pub fn cells(&self) -> usize {
        self.pmf.cells()
    }

    pub fn capacity(&self) -> f64 {
        self.pmf.capacity()
    }

    pub fn step(&self) -> f64 {
        self.pmf.step()
    }

    pub fn level(&self, k: usize) -> f64 {
        k as f64 * self.step()
    }

    pub fn pmf(&self) -> &DiscretizedPmf {
        &self.pmf
    }

    pub fn grid_tolerance(&self) -> f64 {
        self.grid_tolerance
    }

    /// Reward of consuming `a` grid units.
    pub fn reward(&self, a: usize) -> f64 {
        self.rewards[a]
    }

    /// Distribution of the next state when `remaining` grid units are kept,
    /// as `(state, probability)` pairs.
    pub fn transition(&self, remaining: usize) -> Vec<(usize, f64)> {
        let n = self.cells();
        let mut row = vec![0.0; n + 1];
        for &(j, m) in &self.support {
            row[(remaining + j).min(n)] += m;
        }
        row.into_iter()
            .enumerate()
            .filter(|(_, m)| *m > 0.0)
            .collect()
    }

    /// `E[v(min(k + X, N))]` for `k = remaining`.
    #[inline]
    fn expected_value(&self, v: &[f64], remaining: usize) -> f64 {
        let n = self.cells();
        self.support
            .iter()
            .map(|&(j, m)| m * v[(remaining + j).min(n)])
            .sum()
    }

    /// Grid action of `policy` in each state: `σ(x_k)` rounded down to the
    /// grid (with `1e-9` slack so that `σ(x) = x` maps to `k`) and capped at
    /// `k`.
    pub fn policy_actions<P: Policy + ?Sized>(&self, policy: &P) -> Vec<usize> {
        let h = self.step();
        (0..=self.cells())
            .map(|k| {
                let u = policy.consumption(self.level(k));
                let a = (u / h + 1e-9).floor().max(0.0) as usize;
                a.min(k)
            })
            .collect()
    }

    /// Relative value iteration for the optimal average reward.
    pub fn optimal_gain(&self, eps: f64) -> Result<OptimalSolution> {
        self.optimal_gain_capped(eps, VALUE_ITERATION_CAP)
    }

    pub fn optimal_gain_capped(&self, eps: f64, max_sweeps: usize) -> Result<OptimalSolution> {
        check_eps(eps)?;
        let n = self.cells();
        let mut v = vec![0.0; n + 1];
        let mut span = f64::INFINITY;
        for _ in 0..max_sweeps {
            let w: Vec<f64> = (0..=n)
                .into_par_iter()
                .map(|k| self.expected_value(&v, k))
                .collect();
            let sweep: Vec<(f64, usize)> = (0..=n)
                .into_par_iter()
                .map(|k| {
                    let mut best = (f64::NEG_INFINITY, 0);
                    for a in 0..=k {
                        let q = self.rewards[a] + w[k - a];
                        if q > best.0 {
                            best = (q, a);
                        }
                    }
                    best
                })
                .collect();
            let (lo, hi) = diff_range(sweep.iter().map(|s| s.0), &v);
            span = hi - lo;
            let base = sweep[0].0;
            v.iter_mut()
                .zip(&sweep)
                .for_each(|(vk, s)| *vk = s.0 - base);
            if span < eps {
                return Ok(OptimalSolution {
                    result: self.result(0.5 * (lo + hi), span),
                    actions: sweep.into_iter().map(|s| s.1).collect(),
                });
            }
        }
        Err(Error::NonConvergence {
            iterations: max_sweeps,
            span,
        })
    }

    /// Gain of the grid policy induced by `policy` (see
    /// [`MdpModel::policy_actions`]).
    pub fn policy_gain<P: Policy + ?Sized>(
        &self,
        policy: &P,
        eps: f64,
    ) -> Result<EvaluationResult> {
        self.table_gain(&self.policy_actions(policy), eps, VALUE_ITERATION_CAP)
    }

    /// Gain of a fixed action table.
    pub fn table_gain(
        &self,
        actions: &[usize],
        eps: f64,
        max_sweeps: usize,
    ) -> Result<EvaluationResult> {
        check_eps(eps)?;
        let n = self.cells();
        if actions.len() != n + 1 || actions.iter().enumerate().any(|(k, &a)| a > k) {
            return Err(Error::InvalidParameter(
                "action table is not admissible on this grid".into(),
            ));
        }
        let mut v = vec![0.0; n + 1];
        let mut span = f64::INFINITY;
        for _ in 0..max_sweeps {
            let next: Vec<f64> = (0..=n)
                .into_par_iter()
                .map(|k| {
                    let a = actions[k];
                    self.rewards[a] + self.expected_value(&v, k - a)
                })
                .collect();
            let (lo, hi) = diff_range(next.iter().copied(), &v);
            span = hi - lo;
            let base = next[0];
            v.iter_mut().zip(&next).for_each(|(vk, x)| *vk = x - base);
            if span < eps {
                return Ok(self.result(0.5 * (lo + hi), span));
            }
        }
        Err(Error::NonConvergence {
            iterations: max_sweeps,
            span,
        })
    }

    fn result(&self, gain: f64, span: f64) -> EvaluationResult {
        EvaluationResult {
            method: Method::ValueIteration,
            value: gain,
            stderr: None,
            residual: Some(span),
            tolerance: span + self.grid_tolerance,
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 {
        Ok(())
    } else {
        Err(Error::domain("eps", eps, "(0, inf)"))
    }
}

/// Minimum and maximum of `new − old`.
fn diff_range(new: impl Iterator<Item = f64>, old: &[f64]) -> (f64, f64) {
    new.zip(old)
        .map(|(a, b)| a - b)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
            (lo.min(d), hi.max(d))
        })
}
