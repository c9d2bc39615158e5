//! Seeded parallel simulation of the battery recursion. The estimate does
//! not depend on the number of worker threads.
//!
//! cargo run --release --example monte_carlo

use maximin_power::arrivals::{ArrivalDistribution, Family};
use maximin_power::evaluation::{bernoulli_reward, simulate};
use maximin_power::policy::StationaryPolicy;
use maximin_power::reward::RewardFunction;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let r = RewardFunction::sqrt();
    let (c, p) = (2.0, 0.5);
    let omega = StationaryPolicy::maximin(&r, p)?;
    let q = ArrivalDistribution::bernoulli(c, p)?;
    let exact = bernoulli_reward(&omega, &r, c, p, 1e-15)?.value;
    let mc = simulate(&omega, &q, &r, 100_000, 64, 7)?;
    println!(
        "Bernoulli: exact {exact:.6}, simulated {:.6} +- {:.1e}",
        mc.value,
        mc.stderr.unwrap()
    );

    let q = ArrivalDistribution::with_mcr(Family::LimitedExponential, c, p)?;
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build()?;
    let a = simulate(&omega, &q, &r, 20_000, 16, 7)?;
    let b = single.install(|| simulate(&omega, &q, &r, 20_000, 16, 7))?;
    println!(
        "exponential: {:.9} (all threads) vs {:.9} (one thread)",
        a.value, b.value
    );
    Ok(())
}
