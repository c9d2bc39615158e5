//! Stationary power control policies.
//!
//! A stationary policy consumes `σ(x) ∈ [0, x]` when the battery holds `x`
//! after the arrival, and keeps the reserve `σ̄(x) = x − σ(x)`. Policies are
//! defined on all of `[0, ∞)`; clamping to the capacity is the job of the
//! battery dynamics.
//!
//! The maximin optimal policy for mean-to-capacity ratio `p` is
//! `ω = η_s⁻¹` with `s = 1/(1−p)`. For a generic regular reward it is
//! evaluated by bisection on `η_s`; for the AWGN reward `½ ln(1 + γu)` it has
//! a piecewise linear closed form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::numeric::bisect_increasing;
use crate::reward::{RewardFunction, RewardKind};
use crate::{Error, Result};

/// Default absolute tolerance on the `η` residual for generic inversion.
pub const DEFAULT_INVERSION_TOL: f64 = 1e-12;

/// Anything that maps a post-arrival battery level to a consumption.
pub trait Policy: Send + Sync {
    /// `σ(x)` for `x ≥ 0`. Must satisfy `0 ≤ σ(x) ≤ x`.
    fn consumption(&self, x: f64) -> f64;

    /// `σ̄(x) = x − σ(x)`.
    fn reserve_of(&self, x: f64) -> f64 {
        x - self.consumption(x)
    }

    fn label(&self) -> String;
}

impl<P: Policy + ?Sized> Policy for &P {
    fn consumption(&self, x: f64) -> f64 {
        (**self).consumption(x)
    }

    fn label(&self) -> String {
        (**self).label()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Greedy,
    FixedFraction,
    MaximinGeneric,
    MaximinAwgn,
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            PolicyKind::Greedy => "greedy",
            PolicyKind::FixedFraction => "fixed_fraction",
            PolicyKind::MaximinGeneric => "maximin_generic",
            PolicyKind::MaximinAwgn => "maximin_awgn",
        })
    }
}

#[derive(Debug, Clone)]
pub enum StationaryPolicy {
    /// `σ(x) = x`.
    Greedy,
    /// `φ(x) = px`.
    FixedFraction { p: f64 },
    /// `ω = η_{1/(1−p)}⁻¹` by bracketed bisection.
    MaximinGeneric {
        p: f64,
        reward: RewardFunction,
        inversion_tol: f64,
    },
    /// Closed-form `ω` for the AWGN reward with channel coefficient `gamma`.
    MaximinAwgn { p: f64, gamma: f64 },
}

fn check_ratio(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("p", p, "(0, 1)"))
    }
}

impl StationaryPolicy {
    pub fn greedy() -> Self {
        StationaryPolicy::Greedy
    }

    pub fn fixed_fraction(p: f64) -> Result<Self> {
        check_ratio(p)?;
        Ok(StationaryPolicy::FixedFraction { p })
    }

    pub fn maximin_generic(reward: RewardFunction, p: f64, inversion_tol: f64) -> Result<Self> {
        check_ratio(p)?;
        if !(inversion_tol > 0.0) {
            return Err(Error::domain("inversion_tol", inversion_tol, "(0, inf)"));
        }
        Ok(StationaryPolicy::MaximinGeneric {
            p,
            reward,
            inversion_tol,
        })
    }

    pub fn maximin_awgn(gamma: f64, p: f64) -> Result<Self> {
        check_ratio(p)?;
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::domain("gamma", gamma, "(0, inf)"));
        }
        Ok(StationaryPolicy::MaximinAwgn { p, gamma })
    }

    /// The maximin optimal policy for `reward`, using the closed form when
    /// one is available.
    pub fn maximin(reward: &RewardFunction, p: f64) -> Result<Self> {
        match reward.kind() {
            RewardKind::Awgn { gamma } => Self::maximin_awgn(*gamma, p),
            _ => Self::maximin_generic(reward.clone(), p, DEFAULT_INVERSION_TOL),
        }
    }

    pub fn kind(&self) -> PolicyKind {
        match self {
            StationaryPolicy::Greedy => PolicyKind::Greedy,
            StationaryPolicy::FixedFraction { .. } => PolicyKind::FixedFraction,
            StationaryPolicy::MaximinGeneric { .. } => PolicyKind::MaximinGeneric,
            StationaryPolicy::MaximinAwgn { .. } => PolicyKind::MaximinAwgn,
        }
    }

    pub fn p(&self) -> Option<f64> {
        match self {
            StationaryPolicy::Greedy => None,
            StationaryPolicy::FixedFraction { p }
            | StationaryPolicy::MaximinGeneric { p, .. }
            | StationaryPolicy::MaximinAwgn { p, .. } => Some(*p),
        }
    }

    pub fn is_maximin(&self) -> bool {
        matches!(
            self,
            StationaryPolicy::MaximinGeneric { .. } | StationaryPolicy::MaximinAwgn { .. }
        )
    }

    /// Reward the maximin policy was built for.
    pub fn reward(&self) -> Option<RewardFunction> {
        match self {
            StationaryPolicy::MaximinGeneric { reward, .. } => Some(reward.clone()),
            StationaryPolicy::MaximinAwgn { gamma, .. } => RewardFunction::awgn(*gamma).ok(),
            _ => None,
        }
    }

    /// `σ(x)`; errors on negative `x`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::domain("x", x, "[0, inf)"));
        }
        Ok(self.consumption(x))
    }

    pub fn reserve(&self, x: f64) -> Result<f64> {
        Ok(x - self.evaluate(x)?)
    }

    /// `σ̄^(i)(x)`.
    pub fn reserve_iter(&self, i: u32, x: f64) -> Result<f64> {
        let mut y = x;
        for _ in 0..i {
            y = self.reserve(y)?;
        }
        Ok(y)
    }

    /// Battery levels visited in steady state under Bernoulli arrivals,
    /// `{σ̄^(i)(c) : 0 ≤ i ≤ M(ω(c))}`, from `c` down to `0`.
    ///
    /// The reserves are formed as tail sums of `κ̄^(j)(ω(c))`, so the last
    /// element is exactly zero.
    pub fn ergodic_set(&self, c: f64) -> Result<Vec<f64>> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain("c", c, "(0, inf)"));
        }
        let (reward, p) = match (self.reward(), self.p()) {
            (Some(r), Some(p)) if self.is_maximin() => (r, p),
            _ => {
                return Err(Error::Unsupported {
                    operation: "ergodic_set",
                    subject: self.kind().to_string(),
                })
            }
        };
        let s = 1.0 / (1.0 - p);
        let w = self.consumption(c);
        let m = reward.m_steps_unchecked(s, w);
        let mut terms = Vec::with_capacity(m as usize);
        let mut scale = 1.0;
        for _ in 0..m {
            terms.push(reward.kappa(scale, w).max(0.0));
            scale *= s;
        }
        let mut levels = vec![0.0; m as usize + 1];
        for i in (1..m as usize).rev() {
            levels[i] = levels[i + 1] + terms[i];
        }
        levels[0] = c;
        Ok(levels)
    }
}

impl Policy for StationaryPolicy {
    #[inline]
    fn consumption(&self, x: f64) -> f64 {
        match self {
            StationaryPolicy::Greedy => x,
            StationaryPolicy::FixedFraction { p } => p * x,
            StationaryPolicy::MaximinAwgn { p, gamma } => omega_awgn(*gamma, *p, x),
            StationaryPolicy::MaximinGeneric {
                p,
                reward,
                inversion_tol,
            } => {
                let s = 1.0 / (1.0 - p);
                // η_s is the identity on [0, τ_s]
                if x <= reward.tau_unchecked(s) {
                    return x;
                }
                bisect_increasing(|y| reward.eta_unchecked(s, y), x, 0.0, x, *inversion_tol)
            }
        }
    }

    fn label(&self) -> String {
        match self.p() {
            Some(p) => format!("{}(p={p})", self.kind()),
            None => self.kind().to_string(),
        }
    }
}

/// Least integer `M̃ ≥ 1` with `[1 + p(γx + M̃)](1 − p)^M̃ < 1`.
///
/// The left side is strictly decreasing in `M̃`, so a forward scan finds it.
/// At equality the scan moves on.
pub fn awgn_m_tilde(gamma: f64, p: f64, x: f64) -> u32 {
    let y = gamma * x;
    let q = 1.0 - p;
    let mut m = 1u32;
    let mut qm = q;
    while (1.0 + p * (y + m as f64)) * qm >= 1.0 {
        m += 1;
        qm *= q;
    }
    m
}

#[inline]
fn omega_awgn(gamma: f64, p: f64, x: f64) -> f64 {
    let m = awgn_m_tilde(gamma, p, x);
    if m == 1 {
        return x;
    }
    let y = gamma * x;
    let denom = -(m as f64 * (-p).ln_1p()).exp_m1();
    let w = (p * (y + m as f64) / denom - 1.0) / gamma;
    w.clamp(0.0, x)
}

/// Corner of the piecewise linear AWGN policy: `ω(x) = y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    pub k: u32,
    pub x: f64,
    pub y: f64,
}

/// `E_k = (1/γ)(((1−p)^{−k} − 1)/p − k, (1−p)^{−k} − 1)` for `k = 0..=k_max`.
pub fn endpoints(gamma: f64, p: f64, k_max: u32) -> Result<Vec<Endpoint>> {
    check_ratio(p)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::domain("gamma", gamma, "(0, inf)"));
    }
    Ok((0..=k_max)
        .map(|k| {
            let grow = (-(k as f64) * (-p).ln_1p()).exp_m1();
            Endpoint {
                k,
                x: (grow / p - k as f64) / gamma,
                y: grow / gamma,
            }
        })
        .collect())
}

/// `ι_c(σ) = 1 − min_x r′(σ(x)) / r′(σ(σ̄(x)))` over `grid_n` evenly spaced
/// points of `[0, c]`.
///
/// The grid minimum stands in for the essential infimum, which is exact for
/// continuous policies up to grid resolution.
pub fn greed_index<P: Policy + ?Sized>(
    policy: &P,
    reward: &RewardFunction,
    c: f64,
    grid_n: usize,
) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::domain("c", c, "(0, inf)"));
    }
    if grid_n < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid_n = {grid_n}, need at least 2"
        )));
    }
    let h = c / (grid_n - 1) as f64;
    let min_ratio = (0..grid_n)
        .map(|k| {
            let x = k as f64 * h;
            let now = policy.consumption(x);
            let next = policy.consumption(x - now);
            reward.marginal_unchecked(now) / reward.marginal_unchecked(next)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(1.0 - min_ratio)
}

/// Outcome of [`normality_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityReport {
    pub nondecreasing: bool,
    pub concave: bool,
    /// Largest drop `σ(x_k) − σ(x_{k+1})` seen.
    pub max_decrease: f64,
    /// Largest second difference seen.
    pub max_second_difference: f64,
}

impl NormalityReport {
    pub fn is_normal(&self) -> bool {
        self.nondecreasing && self.concave
    }
}

/// Checks that `σ` is nondecreasing with nonpositive second differences on
/// `grid_n` points of `[0, c]`, allowing `1e-9` slack.
pub fn normality_check<P: Policy + ?Sized>(
    policy: &P,
    c: f64,
    grid_n: usize,
) -> Result<NormalityReport> {
    if grid_n < 3 {
        return Err(Error::InvalidParameter(format!(
            "grid_n = {grid_n}, need at least 3"
        )));
    }
    const SLACK: f64 = 1e-9;
    let h = c / (grid_n - 1) as f64;
    let values: Vec<f64> = (0..grid_n)
        .map(|k| policy.consumption(k as f64 * h))
        .collect();
    let max_decrease = values
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::NEG_INFINITY, f64::max);
    let max_second_difference = values
        .windows(3)
        .map(|w| w[0] - 2.0 * w[1] + w[2])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(NormalityReport {
        nondecreasing: max_decrease <= SLACK,
        concave: max_second_difference <= SLACK,
        max_decrease,
        max_second_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn omega() -> StationaryPolicy {
        StationaryPolicy::maximin_awgn(1.0, 0.5).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let phi = StationaryPolicy::fixed_fraction(0.5).unwrap();
        assert_eq!(phi.evaluate(2.0).unwrap(), 1.0);
        assert_eq!(omega().evaluate(1.0).unwrap(), 1.0);
        assert!(close(omega().evaluate(2.0).unwrap(), 5.0 / 3.0, 1e-15));
        assert!(close(omega().evaluate(4.0).unwrap(), 3.0, 1e-15));
        assert!(omega().evaluate(-0.1).is_err());
        assert!(StationaryPolicy::fixed_fraction(1.0).is_err());
        assert!(StationaryPolicy::fixed_fraction(0.0).is_err());
    }

    #[test]
    fn m_tilde_examples() {
        assert_eq!(awgn_m_tilde(1.0, 0.5, 2.0), 2);
        assert_eq!(awgn_m_tilde(1.0, 0.5, 1.0), 2);
        assert_eq!(awgn_m_tilde(1.0, 0.5, 4.0), 3);
        assert_eq!(awgn_m_tilde(1.0, 0.5, 0.0), 1);
    }

    #[test]
    fn omega_is_continuous_across_the_tie() {
        // the (x = 4, p = 0.5) tie sits on E_2; both neighbouring formulas give 3
        let m2 = 0.5 * 6.0 / 0.75 - 1.0;
        let m3 = 0.5 * 7.0 / 0.875 - 1.0;
        assert_eq!(m2, 3.0);
        assert_eq!(m3, 3.0);
        let below = omega().evaluate(4.0 - 1e-9).unwrap();
        let above = omega().evaluate(4.0 + 1e-9).unwrap();
        assert!(close(below, 3.0, 1e-8) && close(above, 3.0, 1e-8));
    }

    #[test]
    fn generic_inversion_agrees_with_closed_form() {
        let generic =
            StationaryPolicy::maximin_generic(RewardFunction::awgn(1.0).unwrap(), 0.5, 1e-13)
                .unwrap();
        for &x in &[0.0, 0.5, 1.0, 2.0, 4.0, 7.3, 25.0] {
            assert!(close(
                generic.evaluate(x).unwrap(),
                omega().evaluate(x).unwrap(),
                1e-10
            ));
        }
    }

    #[test]
    fn reserves() {
        assert_eq!(StationaryPolicy::greedy().reserve(3.0).unwrap(), 0.0);
        let phi = StationaryPolicy::fixed_fraction(0.5).unwrap();
        assert_eq!(phi.reserve_iter(3, 8.0).unwrap(), 1.0);
        assert!(close(omega().reserve_iter(1, 4.0).unwrap(), 1.0, 1e-15));
        assert_eq!(omega().reserve_iter(0, 4.0).unwrap(), 4.0);
    }

    #[test]
    fn ergodic_sets() {
        assert_eq!(omega().ergodic_set(1.0).unwrap(), vec![1.0, 0.0]);
        let set = omega().ergodic_set(4.0).unwrap();
        assert_eq!(set.len(), 3);
        assert!(close(set[1], 1.0, 1e-15));
        assert_eq!(set[2], 0.0);
        assert!(StationaryPolicy::greedy().ergodic_set(1.0).is_err());
        let sqrt = StationaryPolicy::maximin(&RewardFunction::sqrt(), 0.3).unwrap();
        let set = sqrt.ergodic_set(5.0).unwrap();
        assert_eq!(*set.last().unwrap(), 0.0);
        assert!(set.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn endpoint_examples() {
        let e = endpoints(1.0, 0.5, 2).unwrap();
        assert_eq!(
            e[0],
            Endpoint {
                k: 0,
                x: 0.0,
                y: 0.0
            }
        );
        assert!(close(e[1].x, 1.0, 1e-15) && close(e[1].y, 1.0, 1e-15));
        assert!(close(e[2].x, 4.0, 1e-14) && close(e[2].y, 3.0, 1e-14));
        let e = endpoints(2.0, 0.5, 2).unwrap();
        assert!(close(e[2].x, 2.0, 1e-14) && close(e[2].y, 1.5, 1e-14));
    }

    #[test]
    fn greed_index_examples() {
        let r = RewardFunction::awgn(1.0).unwrap();
        let g = greed_index(&StationaryPolicy::greedy(), &r, 1.0, 1001).unwrap();
        assert!(close(g, 0.5, 1e-12));
        let phi = StationaryPolicy::fixed_fraction(0.5).unwrap();
        let g = greed_index(&phi, &r, 1.0, 1001).unwrap();
        assert!(close(g, 1.0 / 6.0, 1e-12));
        let g = greed_index(&omega(), &r, 200.0, 10_001).unwrap();
        assert!(g <= 0.5 + 1e-6);
        assert!(greed_index(&phi, &r, 1.0, 1).is_err());
    }

    #[test]
    fn normality_examples() {
        let phi = StationaryPolicy::fixed_fraction(0.3).unwrap();
        assert!(normality_check(&phi, 10.0, 101).unwrap().is_normal());
        assert!(normality_check(&omega(), 20.0, 2001).unwrap().is_normal());
        assert!(normality_check(&StationaryPolicy::greedy(), 5.0, 11)
            .unwrap()
            .is_normal());

        struct Convex;
        impl Policy for Convex {
            fn consumption(&self, x: f64) -> f64 {
                x * x / (1.0 + x)
            }
            fn label(&self) -> String {
                "convex".into()
            }
        }
        let report = normality_check(&Convex, 2.0, 11).unwrap();
        assert!(report.nondecreasing && !report.concave);
    }
}
