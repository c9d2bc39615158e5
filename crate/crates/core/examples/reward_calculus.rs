//! The marginal-utility calculus behind the maximin policy: κ_s, τ_s,
//! the step counts M_s and M̃_s, and η_s.
//!
//! cargo run --example reward_calculus

use maximin_power::reward::RewardFunction;

fn main() -> maximin_power::Result<()> {
    let p: f64 = 0.5;
    let s = 1.0 / (1.0 - p);
    for r in [RewardFunction::awgn(1.0)?, RewardFunction::sqrt()] {
        println!("{}  (s = {s}, tau_s = {})", r.label(), r.tau(s)?);
        println!(
            "{:>6} {:>10} {:>10} {:>4} {:>4} {:>10}",
            "x", "r(x)", "kbar_s(x)", "M", "M~", "eta_s(x)"
        );
        for x in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
            println!(
                "{x:>6} {:>10.6} {:>10.6} {:>4} {:>4} {:>10.6}",
                r.value(x)?,
                r.kappa_bar(s, x)?,
                r.m_steps(s, x)?,
                r.m_tilde_steps(s, x)?,
                r.eta(s, x)?
            );
        }
        // i-fold composition against its closed form
        let (a, b) = (r.kappa_bar_iter(s, 3, 20.0)?, r.kappa_power(s, 3, 20.0)?);
        println!("kbar^(3)(20) = {a:.12} (iterated), {b:.12} (closed form)\n");
    }
    Ok(())
}
