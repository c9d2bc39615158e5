//! One slot of the battery recursion.

use crate::{Error, Result};

/// Requests above the stored energy by at most this much are clamped silently.
pub const ADMISSIBILITY_SLACK: f64 = 1e-9;

/// Battery content before (`b_minus`) and after (`b`) the arrival of a slot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BatteryState {
    pub b_minus: f64,
    pub b: f64,
}

impl BatteryState {
    /// Empty battery, the initial condition of every run.
    pub fn empty() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// State after the arrival and the consumption; `next.b_minus` is the
    /// carry-over into the next slot.
    pub next: BatteryState,
    /// Energy actually consumed.
    pub consumed: f64,
}

/// Charges `x` into a battery holding `state.b_minus` (saturating at `c`),
/// then consumes `u`.
pub fn step(state: BatteryState, x: f64, u: f64, c: f64) -> Result<StepOutcome> {
    if !(x >= 0.0) {
        return Err(Error::domain("x", x, "[0, inf)"));
    }
    if !(u >= 0.0) {
        return Err(Error::domain("u", u, "[0, inf)"));
    }
    let b = (state.b_minus + x).min(c);
    if u > b + ADMISSIBILITY_SLACK {
        return Err(Error::Admissibility {
            requested: u,
            available: b,
        });
    }
    let consumed = u.min(b);
    Ok(StepOutcome {
        next: BatteryState {
            b_minus: b - consumed,
            b,
        },
        consumed,
    })
}
