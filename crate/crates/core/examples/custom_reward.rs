//! Plugging in a reward the library does not ship: r(u) = 1 − e^{−u}.
//! Only r, r′ and r′⁻¹ are needed; the policy is found by inverting η.
//!
//! cargo run --example custom_reward

use maximin_power::evaluation::bernoulli_reward;
use maximin_power::policy::{greed_index, normality_check, Policy, StationaryPolicy};
use maximin_power::reward::RewardFunction;

fn main() -> maximin_power::Result<()> {
    let r = RewardFunction::custom(
        "saturating",
        |u| -(-u).exp_m1(),
        |u| (-u).exp(),
        |y| -y.ln(),
    );
    if let Err(v) = r.audit_regularity(&[1.1, 2.0, 5.0], 20.0, 2001) {
        println!("regularity audit failed: {v}");
        return Ok(());
    }
    let p = 0.3;
    let omega = StationaryPolicy::maximin(&r, p)?;
    for x in [0.1, 0.5, 1.0, 2.0, 5.0] {
        println!("omega({x}) = {:.6}", omega.consumption(x));
    }
    println!(
        "normal: {}",
        normality_check(&omega, 5.0, 1001)?.is_normal()
    );
    println!(
        "greed index at c = 5: {:.6} (p = {p})",
        greed_index(&omega, &r, 5.0, 1001)?
    );
    let t = bernoulli_reward(&omega, &r, 5.0, p, 1e-14)?;
    println!("T_omega(5) = {:.6}", t.value);
    Ok(())
}
