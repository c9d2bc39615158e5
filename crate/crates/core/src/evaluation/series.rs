//! Exact average reward under Bernoulli arrivals.
//!
//! With arrivals `(1−p)δ₀ + pδ_c` the battery is full right after every
//! nonzero arrival, so a stationary policy walks down the fixed ladder
//! `c, σ̄(c), σ̄(σ̄(c)), …` until the next arrival resets it. The average
//! reward is therefore
//!
//! `T_σ(c) = Σ_{i≥1} p(1−p)^{i−1} r(σ(σ̄^(i−1)(c)))`.

use super::{EvaluationResult, Method};
use crate::policy::{Policy, StationaryPolicy};
use crate::reward::RewardFunction;
use crate::{Error, Result};

fn check_cell(c: f64, p: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::domain("c", c, "(0, inf)"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("p", p, "(0, 1)"));
    }
    Ok(())
}

/// Terms `p(1−p)^{i−1} r(σ(σ̄^(i−1)(c)))` of the Bernoulli series, stopping
/// when the ladder reaches zero or once `(1−p)^N·r(c) < tol`. Also returns
/// the bound on the omitted tail (zero when the ladder hit zero).
pub fn bernoulli_series_terms<P: Policy + ?Sized>(
    policy: &P,
    reward: &RewardFunction,
    c: f64,
    p: f64,
    tol: f64,
) -> Result<(Vec<f64>, f64)> {
    check_cell(c, p)?;
    if !(tol > 0.0) {
        return Err(Error::domain("tol", tol, "(0, inf)"));
    }
    let top = reward.value_unchecked(c);
    let mut terms = Vec::new();
    let mut weight = p;
    let mut survive = 1.0;
    let mut x = c;
    loop {
        let u = policy.consumption(x);
        terms.push(weight * reward.value_unchecked(u));
        x -= u;
        survive *= 1.0 - p;
        weight *= 1.0 - p;
        if x <= 0.0 {
            return Ok((terms, 0.0));
        }
        let tail = survive * top;
        if tail < tol {
            return Ok((terms, tail));
        }
    }
}

/// `T_σ(c)` under Bernoulli arrivals with mean-to-capacity ratio `p`.
pub fn bernoulli_reward<P: Policy + ?Sized>(
    policy: &P,
    reward: &RewardFunction,
    c: f64,
    p: f64,
    tol: f64,
) -> Result<EvaluationResult> {
    let (terms, tail) = bernoulli_series_terms(policy, reward, c, p, tol)?;
    Ok(EvaluationResult {
        method: Method::BernoulliSeries,
        value: terms.iter().sum(),
        stderr: None,
        residual: None,
        tolerance: tail,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeCheck {
    Compared {
        /// `(T(c+h) − T(c−h)) / 2h`.
        slope: f64,
        /// `p·r′(ω(c))`.
        expected: f64,
    },
    /// `c` lies within `h` of a corner of `ω`, where `T_ω` is not twice
    /// differentiable; no comparison is made.
    NearKink { kink: f64 },
}

impl DerivativeCheck {
    pub fn error(&self) -> Option<f64> {
        match *self {
            DerivativeCheck::Compared { slope, expected } => Some((slope - expected).abs()),
            DerivativeCheck::NearKink { .. } => None,
        }
    }
}

/// Battery levels at which the maximin policy changes segment:
/// `η_s(τ_{s^k})` for `k ≥ 1`, up to `limit`.
pub fn maximin_kinks(reward: &RewardFunction, p: f64, limit: f64) -> Result<Vec<f64>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("p", p, "(0, 1)"));
    }
    let s = 1.0 / (1.0 - p);
    let mut kinks = Vec::new();
    let mut sk = s;
    loop {
        let x = reward.eta_unchecked(s, reward.tau(sk)?);
        if x > limit || !x.is_finite() {
            return Ok(kinks);
        }
        kinks.push(x);
        sk *= s;
    }
}

/// Compares a central difference of `T_ω` at `c` with `p·r′(ω(c))`.
pub fn bernoulli_derivative_check(
    reward: &RewardFunction,
    p: f64,
    c: f64,
    h: f64,
) -> Result<DerivativeCheck> {
    check_cell(c, p)?;
    if !(h > 0.0 && h < c) {
        return Err(Error::domain("h", h, "(0, c)"));
    }
    if let Some(&kink) = maximin_kinks(reward, p, c + h)?
        .iter()
        .find(|&&k| (k - c).abs() <= h)
    {
        return Ok(DerivativeCheck::NearKink { kink });
    }
    let omega = StationaryPolicy::maximin(reward, p)?;
    let tol = 1e-16;
    let upper = bernoulli_reward(&omega, reward, c + h, p, tol)?.value;
    let lower = bernoulli_reward(&omega, reward, c - h, p, tol)?.value;
    Ok(DerivativeCheck::Compared {
        slope: (upper - lower) / (2.0 * h),
        expected: p * reward.marginal_unchecked(omega.consumption(c)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn awgn() -> RewardFunction {
        RewardFunction::awgn(1.0).unwrap()
    }

    /// Plain summation of the fixed-fraction series, written out directly:
    /// `σ̄^(i−1)(c) = (1−p)^{i−1}c` so the `i`-th term is
    /// `p(1−p)^{i−1}·½ln(1 + p(1−p)^{i−1}c)`.
    fn fixed_fraction_oracle(p: f64, c: f64) -> f64 {
        (0..2000)
            .map(|i| {
                let q = (1.0 - p).powi(i);
                p * q * 0.5 * (1.0 + p * q * c).ln()
            })
            .sum()
    }

    #[test]
    fn maximin_single_term() {
        let omega = StationaryPolicy::maximin_awgn(1.0, 0.5).unwrap();
        let res = bernoulli_reward(&omega, &awgn(), 1.0, 0.5, 1e-15).unwrap();
        assert!((res.value - 0.25 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(res.tolerance, 0.0);
        assert_eq!(res.method, Method::BernoulliSeries);
    }

    #[test]
    fn greedy_is_one_term() {
        for &(c, p) in &[(0.3, 0.2), (1.0, 0.5), (5.0, 0.9)] {
            let res = bernoulli_reward(&StationaryPolicy::greedy(), &awgn(), c, p, 1e-15).unwrap();
            assert_eq!(res.value, p * awgn().value(c).unwrap());
        }
    }

    #[test]
    fn fixed_fraction_matches_oracle() {
        let oracle = fixed_fraction_oracle(0.5, 1.0);
        assert!((oracle - 0.13916).abs() < 5e-6);
        let phi = StationaryPolicy::fixed_fraction(0.5).unwrap();
        let res = bernoulli_reward(&phi, &awgn(), 1.0, 0.5, 1e-16).unwrap();
        assert!((res.value - oracle).abs() < 1e-15);
        assert!(res.tolerance < 1e-16);
    }

    #[test]
    fn maximin_series_stops_after_m_terms() {
        let r = awgn();
        for &(c, p) in &[(2.5, 0.5), (7.0, 0.3), (0.4, 0.1), (13.0, 0.2)] {
            let omega = StationaryPolicy::maximin_awgn(1.0, p).unwrap();
            let (terms, tail) = bernoulli_series_terms(&omega, &r, c, p, 1e-300).unwrap();
            let m = r.m_steps(1.0 / (1.0 - p), omega.consumption(c)).unwrap();
            assert_eq!(terms.len(), m as usize, "c={c} p={p}");
            assert_eq!(tail, 0.0);
        }
    }

    #[test]
    fn derivative_examples() {
        match bernoulli_derivative_check(&awgn(), 0.5, 0.5, 1e-4).unwrap() {
            DerivativeCheck::Compared { slope, expected } => {
                assert!((expected - 1.0 / 6.0).abs() < 1e-15);
                assert!((slope - expected).abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
        match bernoulli_derivative_check(&awgn(), 0.5, 2.0, 1e-4).unwrap() {
            DerivativeCheck::Compared { slope, expected } => {
                assert!((expected - 3.0 / 32.0).abs() < 1e-15);
                assert!((slope - expected).abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            bernoulli_derivative_check(&awgn(), 0.5, 4.0, 1e-3).unwrap(),
            DerivativeCheck::NearKink { .. }
        ));
    }

    #[test]
    fn kinks_match_awgn_endpoints() {
        let kinks = maximin_kinks(&awgn(), 0.5, 30.0).unwrap();
        let ends = crate::policy::endpoints(1.0, 0.5, 4).unwrap();
        assert_eq!(kinks.len(), 4);
        for (k, e) in kinks.iter().zip(&ends[1..]) {
            assert!((k - e.x).abs() < 1e-12);
        }
    }

    #[test]
    fn second_order_central_difference() {
        // inside the second segment, T_ω is smooth, so halving h quarters the error
        let r = awgn();
        let err = |h: f64| {
            bernoulli_derivative_check(&r, 0.5, 2.0, h)
                .unwrap()
                .error()
                .unwrap()
        };
        let ratio = err(0.2) / err(0.1);
        assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
    }
}
