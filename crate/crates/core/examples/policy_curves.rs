//! ω, φ and the greedy policy on [0, 8] for p = 0.1 and 0.5, together with
//! the corners of the piecewise linear AWGN maximin policy.
//!
//! cargo run --example policy_curves

use maximin_power::policy::{endpoints, normality_check, Policy, StationaryPolicy};
use maximin_power::reward::RewardFunction;

fn main() -> maximin_power::Result<()> {
    let gamma = 1.0;
    let reward = RewardFunction::awgn(gamma)?;
    for p in [0.1, 0.5] {
        let omega = StationaryPolicy::maximin(&reward, p)?;
        let phi = StationaryPolicy::fixed_fraction(p)?;
        println!("p = {p}");
        println!("{:>5} {:>9} {:>9} {:>7}", "x", "omega", "phi", "greedy");
        for k in 0..=8 {
            let x = k as f64;
            println!(
                "{x:>5} {:>9.5} {:>9.5} {x:>7}",
                omega.consumption(x),
                phi.consumption(x)
            );
        }
        let corners: Vec<String> = endpoints(gamma, p, 20)?
            .iter()
            .take_while(|e| e.x <= 8.0)
            .map(|e| format!("({:.4}, {:.4})", e.x, e.y))
            .collect();
        println!("corners: {}", corners.join(" "));
        println!(
            "normal on [0, 8]: {}\n",
            normality_check(&omega, 8.0, 2001)?.is_normal()
        );
    }
    Ok(())
}
