//! Reward functions and the marginal-utility calculus built on them.
//!
//! A reward `r` maps consumed energy to utility. For a regular reward the
//! marginal `r′` is continuous and strictly decreasing, so it has an inverse
//! on `(0, r′(0)]`, and every construction in this crate reduces to
//! compositions of
//!
//! * `κ_s(x) = r′⁻¹(s·r′(x))`, the level whose marginal utility is `s` times
//!   that of `x`,
//! * `τ_s = r′⁻¹(r′(0)/s)`, the smallest `x` for which `κ_s(x) ≥ 0`,
//! * `κ̄_s(x) = κ_s(max(x, τ_s))`, which is zero below `τ_s`,
//! * `M_s(x)`, the number of `κ̄_s` steps needed to reach zero, and
//! * `η_s(x) = Σ_{i≥1} κ̄_s^(i−1)(x)`, whose inverse at `s = 1/(1−p)` is the
//!   maximin optimal policy.
//!
//! The two shipped rewards use hard-coded closed forms for `κ_s`; custom
//! rewards supply `r`, `r′` and `r′⁻¹` and `κ_s` is evaluated through them.
//! Nothing in the calculus differentiates numerically.

use std::fmt;
use std::sync::Arc;

use crate::numeric::snap_integer;
use crate::{Error, Result};

/// Scalar callable used by custom rewards.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User supplied reward given by its value, marginal and inverse marginal.
#[derive(Clone)]
pub struct CustomReward {
    name: String,
    value: ScalarFn,
    marginal: ScalarFn,
    marginal_inverse: ScalarFn,
}

impl fmt::Debug for CustomReward {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomReward")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
pub enum RewardKind {
    /// `½ ln(1 + γu)` nats, the throughput of an AWGN channel.
    Awgn {
        gamma: f64,
    },
    /// `(1 + u)^{1/2} − 1`.
    Sqrt,
    Custom(CustomReward),
}

#[derive(Clone, Debug)]
pub struct RewardFunction {
    kind: RewardKind,
}

impl RewardFunction {
    pub fn awgn(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::domain("gamma", gamma, "(0, inf)"));
        }
        Ok(Self {
            kind: RewardKind::Awgn { gamma },
        })
    }

    pub fn sqrt() -> Self {
        Self {
            kind: RewardKind::Sqrt,
        }
    }

    /// Builds a reward from its value, marginal and inverse marginal.
    ///
    /// The caller is responsible for regularity: `r(0) = 0`, `r′` continuous
    /// and strictly decreasing to zero, and `κ_s` convex. Use
    /// [`RewardFunction::audit_regularity`] for a sampled check.
    pub fn custom<R, D, I>(
        name: impl Into<String>,
        value: R,
        marginal: D,
        marginal_inverse: I,
    ) -> Self
    where
        R: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        I: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: RewardKind::Custom(CustomReward {
                name: name.into(),
                value: Arc::new(value),
                marginal: Arc::new(marginal),
                marginal_inverse: Arc::new(marginal_inverse),
            }),
        }
    }

    pub fn kind(&self) -> &RewardKind {
        &self.kind
    }

    /// Channel coefficient of the AWGN reward.
    pub fn gamma(&self) -> Option<f64> {
        match self.kind {
            RewardKind::Awgn { gamma } => Some(gamma),
            _ => None,
        }
    }

    /// Short label such as `awgn:1` or `sqrt`, matching the CLI syntax.
    pub fn label(&self) -> String {
        match &self.kind {
            RewardKind::Awgn { gamma } => format!("awgn:{gamma}"),
            RewardKind::Sqrt => "sqrt".to_owned(),
            RewardKind::Custom(c) => c.name.clone(),
        }
    }

    /// Returns the same reward multiplied by `alpha > 0`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::domain("alpha", alpha, "(0, inf)"));
        }
        let base = self.clone();
        let d = self.clone();
        let inv = self.clone();
        Ok(Self::custom(
            format!("{alpha}*{}", self.label()),
            move |u| alpha * base.value_unchecked(u),
            move |u| alpha * d.marginal_unchecked(u),
            move |y| inv.marginal_inverse_unchecked(y / alpha),
        ))
    }

    pub fn value(&self, u: f64) -> Result<f64> {
        check_energy("u", u)?;
        Ok(self.value_unchecked(u))
    }

    pub fn marginal(&self, u: f64) -> Result<f64> {
        check_energy("u", u)?;
        Ok(self.marginal_unchecked(u))
    }

    /// `r′⁻¹(y)` for `y ∈ (0, r′(0)]`.
    pub fn marginal_inverse(&self, y: f64) -> Result<f64> {
        if !(y > 0.0 && y <= self.marginal_at_zero()) {
            return Err(Error::domain("y", y, "(0, r'(0)]"));
        }
        Ok(self.marginal_inverse_unchecked(y))
    }

    /// `r(u)` without the `u ≥ 0` check.
    #[inline]
    pub fn value_unchecked(&self, u: f64) -> f64 {
        match &self.kind {
            RewardKind::Awgn { gamma } => 0.5 * (gamma * u).ln_1p(),
            RewardKind::Sqrt => (1.0 + u).sqrt() - 1.0,
            RewardKind::Custom(c) => (c.value)(u),
        }
    }

    #[inline]
    pub fn marginal_unchecked(&self, u: f64) -> f64 {
        match &self.kind {
            RewardKind::Awgn { gamma } => gamma / (2.0 * (1.0 + gamma * u)),
            RewardKind::Sqrt => 0.5 / (1.0 + u).sqrt(),
            RewardKind::Custom(c) => (c.marginal)(u),
        }
    }

    #[inline]
    pub fn marginal_inverse_unchecked(&self, y: f64) -> f64 {
        match &self.kind {
            RewardKind::Awgn { gamma } => 1.0 / (2.0 * y) - 1.0 / gamma,
            RewardKind::Sqrt => 1.0 / (4.0 * y * y) - 1.0,
            RewardKind::Custom(c) => (c.marginal_inverse)(y),
        }
    }

    pub fn marginal_at_zero(&self) -> f64 {
        self.marginal_unchecked(0.0)
    }

    /// `ln(r′(0)/r′(x))`, computed without cancellation for the shipped rewards.
    fn log_marginal_ratio(&self, x: f64) -> f64 {
        match &self.kind {
            RewardKind::Awgn { gamma } => (gamma * x).ln_1p(),
            RewardKind::Sqrt => 0.5 * x.ln_1p(),
            RewardKind::Custom(_) => (self.marginal_at_zero() / self.marginal_unchecked(x)).ln(),
        }
    }

    /// `κ_s(x) = r′⁻¹(s·r′(x))` for any `s > 0`, where it is defined.
    ///
    /// For `s > 1` the result is only meaningful when `x ≥ τ_s`; below that
    /// the closed forms go negative.
    #[inline]
    pub fn kappa(&self, s: f64, x: f64) -> f64 {
        match &self.kind {
            RewardKind::Awgn { gamma } => ((1.0 + gamma * x) / s - 1.0) / gamma,
            RewardKind::Sqrt => (1.0 + x) / (s * s) - 1.0,
            RewardKind::Custom(_) => {
                self.marginal_inverse_unchecked(s * self.marginal_unchecked(x))
            }
        }
    }

    /// Threshold `τ_s = r′⁻¹(r′(0)/s)`.
    pub fn tau(&self, s: f64) -> Result<f64> {
        check_scale(s)?;
        Ok(self.tau_unchecked(s))
    }

    #[inline]
    pub(crate) fn tau_unchecked(&self, s: f64) -> f64 {
        match &self.kind {
            RewardKind::Awgn { gamma } => (s - 1.0) / gamma,
            RewardKind::Sqrt => s * s - 1.0,
            RewardKind::Custom(_) => self.marginal_inverse_unchecked(self.marginal_at_zero() / s),
        }
    }

    /// `κ̄_s(x) = κ_s(max(x, τ_s))`.
    pub fn kappa_bar(&self, s: f64, x: f64) -> Result<f64> {
        check_scale(s)?;
        check_energy("x", x)?;
        Ok(self.kappa_bar_unchecked(s, x))
    }

    #[inline]
    pub(crate) fn kappa_bar_unchecked(&self, s: f64, x: f64) -> f64 {
        if x <= self.tau_unchecked(s) {
            0.0
        } else {
            self.kappa(s, x).max(0.0)
        }
    }

    /// `i`-fold composition of `κ̄_s`; the identity for `i = 0`.
    pub fn kappa_bar_iter(&self, s: f64, i: u32, x: f64) -> Result<f64> {
        check_scale(s)?;
        check_energy("x", x)?;
        let mut y = x;
        for _ in 0..i {
            if y == 0.0 {
                break;
            }
            y = self.kappa_bar_unchecked(s, y);
        }
        Ok(y)
    }

    /// `κ_{s^i}(max(x, τ_s^(i)))` with `τ_s^(i) = τ_{s^i}`: the closed-form
    /// counterpart of [`RewardFunction::kappa_bar_iter`].
    pub fn kappa_power(&self, s: f64, i: u32, x: f64) -> Result<f64> {
        check_scale(s)?;
        check_energy("x", x)?;
        if i == 0 {
            return Ok(x);
        }
        let si = s.powi(i as i32);
        let threshold = self.tau_unchecked(si);
        Ok(self.kappa(si, x.max(threshold)).max(0.0))
    }

    fn log_ratio_steps(&self, s: f64, x: f64) -> f64 {
        snap_integer(self.log_marginal_ratio(x) / s.ln())
    }

    /// `M_s(x)`: the least `i ≥ 0` with `κ̄_s^(i)(x) = 0`, i.e.
    /// `⌈ln(r′(0)/r′(x)) / ln s⌉`.
    pub fn m_steps(&self, s: f64, x: f64) -> Result<u32> {
        check_scale(s)?;
        check_energy("x", x)?;
        Ok(self.m_steps_unchecked(s, x))
    }

    #[inline]
    pub(crate) fn m_steps_unchecked(&self, s: f64, x: f64) -> u32 {
        self.log_ratio_steps(s, x).ceil().max(0.0) as u32
    }

    /// `M̃_s(x) = ⌊ln(r′(0)/r′(x)) / ln s⌋ + 1`.
    pub fn m_tilde_steps(&self, s: f64, x: f64) -> Result<u32> {
        check_scale(s)?;
        check_energy("x", x)?;
        Ok(self.log_ratio_steps(s, x).floor().max(0.0) as u32 + 1)
    }

    /// `η_s(x) = Σ_{i=1}^{M_s(x)} κ_{s^{i−1}}(x)`.
    pub fn eta(&self, s: f64, x: f64) -> Result<f64> {
        check_scale(s)?;
        check_energy("x", x)?;
        Ok(self.eta_unchecked(s, x))
    }

    #[inline]
    pub(crate) fn eta_unchecked(&self, s: f64, x: f64) -> f64 {
        let m = self.m_steps_unchecked(s, x);
        self.eta_truncated(s, x, m)
    }

    /// `η_s(x)` truncated at `M̃_s(x)` terms; agrees with [`RewardFunction::eta`].
    pub fn eta_m_tilde(&self, s: f64, x: f64) -> Result<f64> {
        let m = self.m_tilde_steps(s, x)?;
        Ok(self.eta_truncated(s, x, m))
    }

    #[inline]
    pub(crate) fn eta_truncated(&self, s: f64, x: f64, terms: u32) -> f64 {
        let mut scale = 1.0;
        let mut sum = 0.0;
        for _ in 0..terms {
            sum += self.kappa(scale, x).max(0.0);
            scale *= s;
        }
        sum
    }

    /// Sampled regularity check: `r′` strictly decreasing on `[0, x_max]` and
    /// the second difference of `κ_s` nonnegative (to `-1e-9`) on
    /// `[τ_s, τ_s + x_max]` for each scale in `scales`.
    pub fn audit_regularity(
        &self,
        scales: &[f64],
        x_max: f64,
        points: usize,
    ) -> Result<(), RegularityViolation> {
        let points = points.max(3);
        let h = x_max / (points - 1) as f64;
        if self.value_unchecked(0.0).abs() > 1e-12 {
            return Err(RegularityViolation::NonzeroAtOrigin(
                self.value_unchecked(0.0),
            ));
        }
        let mut prev = self.marginal_unchecked(0.0);
        for k in 1..points {
            let x = k as f64 * h;
            let d = self.marginal_unchecked(x);
            if !(d < prev) {
                return Err(RegularityViolation::MarginalNotDecreasing { x });
            }
            prev = d;
        }
        for &s in scales {
            let t = self.tau_unchecked(s);
            for k in 1..points - 1 {
                let x = t + k as f64 * h;
                let dd = self.kappa(s, x - h) - 2.0 * self.kappa(s, x) + self.kappa(s, x + h);
                if dd < -1e-9 {
                    return Err(RegularityViolation::KappaNotConvex {
                        s,
                        x,
                        second_difference: dd,
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegularityViolation {
    #[error("r(0) = {0}, expected 0")]
    NonzeroAtOrigin(f64),
    #[error("r' is not strictly decreasing at x = {x}")]
    MarginalNotDecreasing { x: f64 },
    #[error("kappa_{s} has second difference {second_difference:e} at x = {x}")]
    KappaNotConvex {
        s: f64,
        x: f64,
        second_difference: f64,
    },
}

fn check_energy(what: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(what, x, "[0, inf)"))
    }
}

fn check_scale(s: f64) -> Result<()> {
    if s > 1.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("s", s, "(1, inf)"))
    }
}
