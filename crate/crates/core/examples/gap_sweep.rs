//! Additive gaps and multiplicative factors over a capacity sweep, for
//! limited uniform arrivals at nominal MCR 0.9 and the square-root reward.
//! Writes CSV to stdout in the same format as `maximin-power sweep`.
//!
//! cargo run --release --example gap_sweep > gaps.csv

use maximin_power::arrivals::Family;
use maximin_power::metrics::{grid_extremes, sweep, Ratio, SweepConfig, ViSettings};
use maximin_power::reward::RewardFunction;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c_grid: Vec<f64> = (0..12).map(|k| 0.25 * 1.5f64.powi(k)).collect();
    let mut config = SweepConfig::new(
        RewardFunction::sqrt(),
        Family::LimitedUniform,
        c_grid,
        vec![Ratio::Nmcr(0.9)],
    );
    config.vi = ViSettings {
        grid_n: 500,
        eps: 1e-9,
    };
    let reports = sweep(&config)?;
    let mut w = csv::Writer::from_writer(std::io::stdout());
    for r in &reports {
        r.check()?;
        w.serialize(r)?;
    }
    w.flush()?;
    for policy in ["maximin", "fixed_fraction"] {
        if let Some(e) = grid_extremes(&reports, policy) {
            eprintln!(
                "{policy}: largest gap {:.4}, smallest factor {:.4} over {} cells",
                e.max_additive_gap, e.min_multiplicative_factor, e.cells
            );
        }
    }
    Ok(())
}
