//! Monte Carlo evaluation of the battery recursion.
//!
//! Every path starts from an empty battery and runs `n` slots. Path `k`
//! draws from a ChaCha8 stream selected by `k` under the master seed, so
//! the result does not depend on how rayon schedules the paths; the
//! per-path averages are reduced in path order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dynamics::{step, BatteryState};
use super::{EvaluationResult, Method};
use crate::arrivals::ArrivalSource;
use crate::policy::Policy;
use crate::reward::RewardFunction;
use crate::{Error, Result};

/// Generator for path `path` under `seed`.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Average reward of one `n`-slot path.
pub fn simulate_path<P, Q>(
    policy: &P,
    source: &Q,
    reward: &RewardFunction,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64>
where
    P: Policy + ?Sized,
    Q: ArrivalSource + ?Sized,
{
    let c = source.capacity();
    let mut state = BatteryState::empty();
    let mut total = 0.0;
    for _ in 0..n {
        let x = source.sample(rng);
        let b = (state.b_minus + x).min(c);
        let out = step(state, x, policy.consumption(b), c)?;
        total += reward.value_unchecked(out.consumed);
        state = out.next;
    }
    Ok(total / n as f64)
}

/// Mean over `paths` independent paths of the `n`-slot average reward.
pub fn simulate<P, Q>(
    policy: &P,
    source: &Q,
    reward: &RewardFunction,
    n: usize,
    paths: usize,
    seed: u64,
) -> Result<EvaluationResult>
where
    P: Policy + ?Sized,
    Q: ArrivalSource + ?Sized,
{
    if n == 0 || paths == 0 {
        return Err(Error::InvalidParameter(format!(
            "simulation needs n >= 1 and paths >= 1 (got n = {n}, paths = {paths})"
        )));
    }
    let averages = (0..paths)
        .into_par_iter()
        .map(|k| simulate_path(policy, source, reward, n, &mut path_rng(seed, k as u64)))
        .collect::<Result<Vec<f64>>>()?;
    let mean = averages.iter().sum::<f64>() / paths as f64;
    let stderr = if paths > 1 {
        let var = averages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (paths - 1) as f64;
        Some((var / paths as f64).sqrt())
    } else {
        None
    };
    Ok(EvaluationResult {
        method: Method::MonteCarlo,
        value: mean,
        stderr,
        residual: None,
        tolerance: stderr.map_or(f64::INFINITY, |s| 3.0 * s),
    })
}
