//! Long-run average reward of a stationary policy, computed three ways.
//!
//! * [`series`]: the exact series for Bernoulli arrivals.
//! * [`montecarlo`]: direct simulation of the battery recursion.
//! * [`mdp`]: relative value iteration on a discretised Markov decision
//!   process, giving both the optimal gain and the gain of a fixed policy.
//!
//! The three routes share nothing beyond the reward and policy definitions,
//! so agreement between them is a meaningful check.

use std::fmt;

use serde::{Deserialize, Serialize};

pub mod dynamics;
pub mod mdp;
pub mod montecarlo;
pub mod series;

pub use dynamics::{step, BatteryState, StepOutcome};
pub use mdp::{build_mdp, MdpModel, OptimalSolution, VALUE_ITERATION_CAP};
pub use montecarlo::simulate;
pub use series::{bernoulli_derivative_check, bernoulli_reward, DerivativeCheck};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BernoulliSeries,
    MonteCarlo,
    ValueIteration,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Method::BernoulliSeries => "bernoulli_series",
            Method::MonteCarlo => "monte_carlo",
            Method::ValueIteration => "value_iteration",
        })
    }
}

/// A long-run expected average reward together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub method: Method,
    pub value: f64,
    /// Standard error across paths (Monte Carlo only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    /// Final span of successive value differences (value iteration only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    /// Error budget attached to `value`: the series tail bound, three
    /// standard errors, or the span plus a one-grid-step discretisation
    /// allowance.
    pub tolerance: f64,
}
