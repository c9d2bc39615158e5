//! Guaranteed fraction of r(pc) achieved by the maximin policy, against the
//! closed-form floor F₀(p) ≥ 1 − 1/e, and the fixed-fraction factor as c → 0.
//!
//! cargo run --example worst_case_factors

use maximin_power::evaluation::bernoulli_reward;
use maximin_power::metrics::{f0, phi_small_c_factor_limit, worst_case_ratio};
use maximin_power::policy::StationaryPolicy;
use maximin_power::reward::RewardFunction;

fn main() -> maximin_power::Result<()> {
    let r = RewardFunction::awgn(1.0)?;
    println!(
        "{:>5} {:>8} {:>22} {:>10} {:>10}",
        "p", "F0(p)", "min_c T_omega/r(pc)", "F(phi)", "1/(2-p)"
    );
    for p in [0.05, 0.1, 0.2, 0.25, 1.0 / 3.0, 0.5, 0.75, 0.9] {
        let worst = (0..60)
            .map(|k| worst_case_ratio(&r, 1e-2 * 1.2f64.powi(k), p))
            .collect::<maximin_power::Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let c = 1e-3;
        let phi = bernoulli_reward(&StationaryPolicy::fixed_fraction(p)?, &r, c, p, 1e-15)?.value;
        let omega = bernoulli_reward(&StationaryPolicy::maximin(&r, p)?, &r, c, p, 1e-15)?.value;
        println!(
            "{p:>5.3} {:>8.5} {worst:>22.5} {:>10.5} {:>10.5}",
            f0(p)?,
            phi / omega,
            phi_small_c_factor_limit(p)?
        );
    }
    println!("1 - 1/e = {:.5}", 1.0 - (-1.0f64).exp());
    Ok(())
}
