//! Maximin optimal online power control for energy-harvesting transmitters
//! with a finite battery.
//!
//! The crate is organised around a handful of building blocks:
//!
//! * [`reward`]: concave reward functions and the marginal-utility calculus
//!   (`κ_s`, `κ̄_s`, `τ_s`, `M_s`, `η_s`) that the optimal policy is built from.
//! * [`policy`]: stationary policies (greedy, fixed fraction, maximin optimal)
//!   together with reserve composition, ergodic sets, segment endpoints,
//!   the greed index and normality checks.
//! * [`arrivals`]: the Bernoulli, capacity-limited uniform and
//!   capacity-limited exponential arrival families.
//! * [`evaluation`]: three independent ways of computing the long-run
//!   average reward of a policy: the exact Bernoulli series, Monte Carlo
//!   simulation of the battery, and relative value iteration on a
//!   discretised Markov decision process.
//! * [`metrics`]: additive gaps, multiplicative factors and worst-case bounds.
//! * [`verify`]: the invariant suite run by `maximin-power verify`.
//!
//! ```
//! use maximin_power::{policy::StationaryPolicy, reward::RewardFunction};
//! use maximin_power::evaluation::series::bernoulli_reward;
//!
//! let reward = RewardFunction::awgn(1.0).unwrap();
//! let omega = StationaryPolicy::maximin_awgn(1.0, 0.5).unwrap();
//! let gain = bernoulli_reward(&omega, &reward, 1.0, 0.5, 1e-15).unwrap();
//! assert!((gain.value - 0.25 * 2f64.ln()).abs() < 1e-12);
//! ```

// `!(x > 0.0)` guards are deliberate: they reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arrivals;
pub mod cli;
mod error;
pub mod evaluation;
pub mod metrics;
mod numeric;
pub mod policy;
pub mod reward;
pub mod verify;

pub use error::{Error, Result};
