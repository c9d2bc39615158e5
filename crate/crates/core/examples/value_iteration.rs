//! Optimal and policy gains by relative value iteration on the discretised
//! battery, for the three arrival families at a common MCR.
//!
//! cargo run --release --example value_iteration

use maximin_power::arrivals::{ArrivalDistribution, Family};
use maximin_power::evaluation::build_mdp;
use maximin_power::policy::StationaryPolicy;
use maximin_power::reward::RewardFunction;

fn main() -> maximin_power::Result<()> {
    let r = RewardFunction::awgn(1.0)?;
    let (c, p, n) = (2.0, 0.3, 1000);
    for family in [
        Family::Bernoulli,
        Family::LimitedUniform,
        Family::LimitedExponential,
    ] {
        let q = ArrivalDistribution::with_mcr(family, c, p)?;
        let model = build_mdp(&r, &q, n)?;
        let best = model.optimal_gain(1e-10)?;
        let omega = model.policy_gain(&StationaryPolicy::maximin(&r, p)?, 1e-10)?;
        let phi = model.policy_gain(&StationaryPolicy::fixed_fraction(p)?, 1e-10)?;
        println!(
            "{family:<12} optimal {:.6}  maximin {:.6}  fixed fraction {:.6}  (grid tolerance {:.1e})",
            best.result.value,
            omega.value,
            phi.value,
            model.grid_tolerance()
        );
    }
    Ok(())
}
