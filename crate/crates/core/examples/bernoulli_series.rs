//! Exact average reward under Bernoulli arrivals, and the slope identity
//! T'(c) = p r'(ω(c)).
//!
//! cargo run --example bernoulli_series

use maximin_power::evaluation::{
    bernoulli_derivative_check, bernoulli_reward, series::bernoulli_series_terms,
};
use maximin_power::policy::{Policy, StationaryPolicy};
use maximin_power::reward::RewardFunction;

fn main() -> maximin_power::Result<()> {
    let r = RewardFunction::awgn(1.0)?;
    let (c, p) = (3.0, 0.4);
    for pol in [
        StationaryPolicy::maximin(&r, p)?,
        StationaryPolicy::fixed_fraction(p)?,
        StationaryPolicy::greedy(),
    ] {
        let (terms, tail) = bernoulli_series_terms(&pol, &r, c, p, 1e-14)?;
        let t = bernoulli_reward(&pol, &r, c, p, 1e-14)?;
        println!(
            "{:<24} T = {:.10}  ({} terms, tail <= {tail:.1e})",
            pol.label(),
            t.value,
            terms.len()
        );
    }
    let omega = StationaryPolicy::maximin(&r, p)?;
    println!("ergodic set from c = {c}: {:?}", omega.ergodic_set(c)?);
    for c in [0.5, 1.7, 3.2] {
        println!("c = {c}: {:?}", bernoulli_derivative_check(&r, p, c, 1e-5)?);
    }
    println!("omega(3) = {}", omega.consumption(3.0));
    Ok(())
}
