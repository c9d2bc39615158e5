//! Invariant and property suites for every module, runnable as one batch.
//!
//! Each check scans its grid or sample and stops at the first
//! counterexample, which it reports verbatim. Sampled checks draw from a
//! ChaCha8 generator keyed by [`VerifySettings::seed`], so a run is
//! reproducible.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arrivals::{ArrivalDistribution, ArrivalSource, Family};
use crate::evaluation::{
    bernoulli_derivative_check, bernoulli_reward, build_mdp, simulate, step, BatteryState,
    DerivativeCheck,
};
use crate::metrics::{
    f0, gap_and_factor, phi_small_c_factor_limit, sweep, universal_upper_bound, PolicyChoice,
    Ratio, SweepConfig, ViSettings,
};
use crate::policy::{
    endpoints, greed_index, normality_check, Policy, StationaryPolicy, DEFAULT_INVERSION_TOL,
};
use crate::reward::RewardFunction;
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySettings {
    pub seed: u64,
    /// Run only checks whose `module/name` contains this string.
    pub filter: Option<String>,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            seed: 20_170_601,
            filter: None,
        }
    }
}

/// Why a check did not pass.
#[derive(Debug)]
pub enum Failure {
    /// The property is violated; the string names the offending input.
    Counterexample(String),
    /// A library call failed while the check was running.
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Counterexample(s) => write!(f, "counterexample: {s}"),
            Failure::Error(e) => write!(f, "error: {e}"),
        }
    }
}

type Outcome = std::result::Result<String, Failure>;

#[derive(Debug)]
pub struct CheckResult {
    pub module: &'static str,
    pub name: &'static str,
    pub outcome: Outcome,
    pub elapsed: Duration,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.outcome.is_ok()
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ms = self.elapsed.as_secs_f64() * 1e3;
        match &self.outcome {
            Ok(s) => write!(f, "PASS {}/{} ({ms:.0} ms): {s}", self.module, self.name),
            Err(e) => write!(f, "FAIL {}/{} ({ms:.0} ms): {e}", self.module, self.name),
        }
    }
}

#[derive(Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed())
    }

    pub fn find(&self, module: &str, name: &str) -> Option<&CheckResult> {
        self.checks
            .iter()
            .find(|c| c.module == module && c.name == name)
    }
}

type CheckFn = fn(&mut ChaCha8Rng) -> Outcome;

/// Every check as `(module, name, body)`, in execution order.
pub fn catalogue() -> Vec<(&'static str, &'static str, CheckFn)> {
    vec![
        ("reward", "kappa_bar_bounds", kappa_bar_bounds as CheckFn),
        ("reward", "kappa_composition", kappa_composition),
        ("reward", "eta_convex_increasing", eta_convex_increasing),
        (
            "reward",
            "eta_truncation_agreement",
            eta_truncation_agreement,
        ),
        (
            "reward",
            "marginal_inverse_roundtrip",
            marginal_inverse_roundtrip,
        ),
        ("reward", "regularity_audit", regularity_audit),
        (
            "policy",
            "closed_form_vs_inversion",
            closed_form_vs_inversion,
        ),
        ("policy", "greedy_region", greedy_region),
        ("policy", "reserve_composition", reserve_composition),
        ("policy", "eta_of_omega", eta_of_omega),
        ("policy", "piecewise_linear", piecewise_linear),
        ("policy", "greed_index", greed_index_bound),
        ("policy", "normality", normality),
        ("arrivals", "pmf_mass_and_mean", pmf_mass_and_mean),
        ("arrivals", "bernoulli_mcr", bernoulli_mcr),
        ("arrivals", "sampling_moments", sampling_moments),
        ("evaluation", "step_invariants", step_invariants),
        ("evaluation", "series_oracles", series_oracles),
        ("evaluation", "derivative_identity", derivative_identity),
        ("evaluation", "universal_bound", universal_bound),
        ("evaluation", "cross_method", cross_method),
        (
            "evaluation",
            "snapped_actions_admissible",
            snapped_actions_admissible,
        ),
        (
            "evaluation",
            "optimal_gain_monotone_in_c",
            optimal_gain_monotone_in_c,
        ),
        ("metrics", "worst_case_chain", worst_case_chain),
        ("metrics", "fixed_fraction_factor", fixed_fraction_factor),
        (
            "metrics",
            "gap_reports_and_dominance",
            gap_reports_and_dominance,
        ),
    ]
}

/// Runs the selected checks in order.
pub fn run(settings: &VerifySettings) -> VerifyReport {
    run_with(settings, |_| {})
}

/// Like [`run`], calling `on_result` as each check finishes.
pub fn run_with(
    settings: &VerifySettings,
    mut on_result: impl FnMut(&CheckResult),
) -> VerifyReport {
    let mut report = VerifyReport::default();
    for (i, (module, name, body)) in catalogue().into_iter().enumerate() {
        if let Some(f) = &settings.filter {
            if !format!("{module}/{name}").contains(f.as_str()) {
                continue;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        rng.set_stream(i as u64);
        let start = Instant::now();
        let outcome = body(&mut rng);
        let result = CheckResult {
            module,
            name,
            outcome,
            elapsed: start.elapsed(),
        };
        on_result(&result);
        report.checks.push(result);
    }
    report
}

fn fail<T>(msg: String) -> std::result::Result<T, Failure> {
    Err(Failure::Counterexample(msg))
}

fn shipped_rewards() -> Vec<RewardFunction> {
    let mut v: Vec<RewardFunction> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&g| RewardFunction::awgn(g).expect("positive gamma"))
        .collect();
    v.push(RewardFunction::sqrt());
    v
}

/// The generic bisection route for `reward`, independent of any closed form.
fn omega_by_inversion(reward: &RewardFunction, p: f64) -> Result<StationaryPolicy, Error> {
    StationaryPolicy::maximin_generic(reward.clone(), p, DEFAULT_INVERSION_TOL)
}

const P_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

fn kappa_bar_bounds(rng: &mut ChaCha8Rng) -> Outcome {
    let samples = 20_000;
    for r in shipped_rewards() {
        for _ in 0..samples {
            let s = 1.0 + rng.random::<f64>() * 4.0 + 1e-9;
            let x = rng.random::<f64>() * 50.0 + 1e-12;
            let k = r.kappa_bar(s, x)?;
            if !(k >= 0.0 && k < x) {
                return fail(format!("{}: kappa_bar({s}, {x}) = {k}", r.label()));
            }
        }
    }
    Ok(format!(
        "0 <= kappa_bar_s(x) < x on {samples} samples per reward"
    ))
}

fn kappa_composition(_: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for r in shipped_rewards() {
        for &s in &[1.1, 1.5, 2.0, 4.0] {
            for i in 0..8 {
                for k in 0..=400 {
                    let x = k as f64 * 0.125;
                    let a = r.kappa_bar_iter(s, i, x)?;
                    let b = r.kappa_power(s, i, x)?;
                    let err = (a - b).abs() / (1.0 + x);
                    worst = worst.max(err);
                    if err > 1e-10 {
                        return fail(format!(
                            "{}: s={s}, i={i}, x={x}: iterate {a} vs closed {b}",
                            r.label()
                        ));
                    }
                }
            }
        }
    }
    Ok(format!("max scaled error {worst:.1e}"))
}

fn eta_convex_increasing(_: &mut ChaCha8Rng) -> Outcome {
    let n = 5000;
    for r in shipped_rewards() {
        for &s in &[1.05, 1.5, 2.0, 10.0] {
            let h = 50.0 / n as f64;
            let eta: Vec<f64> = (0..=n)
                .map(|k| r.eta(s, k as f64 * h))
                .collect::<Result<_, _>>()?;
            for k in 1..=n {
                if !(eta[k] > eta[k - 1]) {
                    return fail(format!(
                        "{}: eta_{s} not increasing at x={}",
                        r.label(),
                        k as f64 * h
                    ));
                }
            }
            for k in 1..n {
                let dd = eta[k - 1] - 2.0 * eta[k] + eta[k + 1];
                if dd < -1e-9 * (1.0 + eta[k]) {
                    return fail(format!(
                        "{}: eta_{s} midpoint concave at x={} ({dd:e})",
                        r.label(),
                        k as f64 * h
                    ));
                }
            }
        }
    }
    Ok(format!("{} grid points per (reward, s)", n + 1))
}

fn eta_truncation_agreement(_: &mut ChaCha8Rng) -> Outcome {
    let mut count = 0;
    for r in shipped_rewards() {
        for &s in &[1.1f64, 1.5, 2.0, 4.0] {
            // boundary points, where ln(r'(0)/r'(x))/ln s is an integer
            let mut xs: Vec<f64> = (1..12)
                .map(|k| r.tau(s.powi(k)))
                .collect::<Result<_, _>>()?;
            xs.extend((0..=500).map(|k| k as f64 * 0.1));
            for x in xs {
                let a = r.eta(s, x)?;
                let b = r.eta_m_tilde(s, x)?;
                count += 1;
                if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                    return fail(format!(
                        "{}: s={s}, x={x}: M-truncation {a} vs M~-truncation {b}",
                        r.label()
                    ));
                }
            }
        }
    }
    Ok(format!("{count} points incl. integer boundaries"))
}

fn marginal_inverse_roundtrip(_: &mut ChaCha8Rng) -> Outcome {
    for r in shipped_rewards() {
        for k in 0..=10_000 {
            let x = k as f64 * 0.01;
            let back = r.marginal_inverse(r.marginal(x)?)?;
            if (back - x).abs() > 1e-10 * (1.0 + x) {
                return fail(format!("{}: r'^-1(r'({x})) = {back}", r.label()));
            }
        }
    }
    Ok("x in [0, 100], 10001 points".into())
}

fn regularity_audit(_: &mut ChaCha8Rng) -> Outcome {
    for r in shipped_rewards() {
        if let Err(v) = r.audit_regularity(&[1.01, 1.1, 1.5, 2.0, 5.0, 10.0], 50.0, 2001) {
            return fail(format!("{}: {v}", r.label()));
        }
    }
    Ok("awgn(0.5, 1, 2) and sqrt".into())
}

fn closed_form_vs_inversion(_: &mut ChaCha8Rng) -> Outcome {
    let n = 10_000;
    let mut worst = 0.0f64;
    for &gamma in &[0.5, 1.0, 2.0] {
        let r = RewardFunction::awgn(gamma)?;
        for &p in &P_GRID {
            let closed = StationaryPolicy::maximin_awgn(gamma, p)?;
            let generic = omega_by_inversion(&r, p)?;
            for k in 0..n {
                let x = 100.0 * k as f64 / (n - 1) as f64;
                let (a, b) = (closed.consumption(x), generic.consumption(x));
                worst = worst.max((a - b).abs());
                if (a - b).abs() > 1e-8 {
                    return fail(format!(
                        "gamma={gamma}, p={p}, x={x}: closed {a} vs inversion {b}"
                    ));
                }
            }
        }
    }
    Ok(format!("max |difference| {worst:.1e}"))
}

fn greedy_region(_: &mut ChaCha8Rng) -> Outcome {
    for &p in &P_GRID {
        let omega = StationaryPolicy::maximin_awgn(1.0, p)?;
        let edge = p / (1.0 - p);
        for k in 0..=1000 {
            let x = edge * k as f64 / 1000.0;
            let w = omega.consumption(x);
            if w != x {
                return fail(format!("p={p}, x={x}: omega = {w}"));
            }
        }
    }
    Ok("omega(x) = x bit-exactly on [0, p/(1-p)]".into())
}

fn reserve_composition(_: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for r in [RewardFunction::awgn(1.0)?, RewardFunction::sqrt()] {
        for &p in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let s = 1.0 / (1.0 - p);
            let omega = StationaryPolicy::maximin(&r, p)?;
            for k in 1..=200 {
                let x = k as f64 * 0.1;
                let w = omega.consumption(x);
                let mut level = x;
                for i in 1..=12u32 {
                    let lhs = omega.consumption(level);
                    let rhs = r.kappa_bar_iter(s, i - 1, w)?;
                    worst = worst.max((lhs - rhs).abs());
                    if (lhs - rhs).abs() > 1e-8 {
                        return fail(format!(
                            "{}: p={p}, x={x}, i={i}: {lhs} vs {rhs}",
                            r.label()
                        ));
                    }
                    level -= lhs;
                    if level <= 0.0 {
                        break;
                    }
                }
            }
        }
    }
    Ok(format!("max |difference| {worst:.1e}"))
}

fn eta_of_omega(_: &mut ChaCha8Rng) -> Outcome {
    for r in shipped_rewards() {
        for &p in &[0.1, 0.5, 0.9] {
            let s = 1.0 / (1.0 - p);
            let omega = omega_by_inversion(&r, p)?;
            for k in 0..=1000 {
                let x = k as f64 * 0.05;
                let back = r.eta(s, omega.consumption(x))?;
                // bisection may also stop when the bracket is one ulp wide
                let slack = DEFAULT_INVERSION_TOL.max(4.0 * f64::EPSILON * x);
                if (back - x).abs() > slack {
                    return fail(format!("{}: p={p}: eta(omega({x})) = {back}", r.label()));
                }
            }
        }
    }
    Ok(format!("residual within {DEFAULT_INVERSION_TOL:e}"))
}

fn piecewise_linear(_: &mut ChaCha8Rng) -> Outcome {
    for &gamma in &[0.5, 1.0, 2.0] {
        for &p in &P_GRID {
            let omega = StationaryPolicy::maximin_awgn(gamma, p)?;
            let e = endpoints(gamma, p, 12)?;
            for w in e.windows(2) {
                let (a, b) = (w[0].x, w[1].x);
                if (omega.consumption(b) - w[1].y).abs() > 1e-9 * (1.0 + w[1].y) {
                    return fail(format!(
                        "gamma={gamma}, p={p}: omega(E_{}) != {}",
                        w[1].k, w[1].y
                    ));
                }
                let h = (b - a) / 40.0;
                for j in 1..39 {
                    let x = a + j as f64 * h;
                    let dd = omega.consumption(x - h) - 2.0 * omega.consumption(x)
                        + omega.consumption(x + h);
                    if dd.abs() > 1e-9 * (1.0 + x) {
                        return fail(format!(
                            "gamma={gamma}, p={p}, x={x} in segment {}: second difference {dd:e}",
                            w[0].k
                        ));
                    }
                }
            }
        }
    }
    Ok("segments E_0..E_12 linear, corners on the policy".into())
}

fn greed_index_bound(_: &mut ChaCha8Rng) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for r in [RewardFunction::awgn(1.0)?, RewardFunction::sqrt()] {
        for &p in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let omega = StationaryPolicy::maximin(&r, p)?;
            for &c in &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
                let iota = greed_index(&omega, &r, c, 2001)?;
                worst = worst.max(iota - p);
                if iota > p + 1e-6 {
                    return fail(format!("{}: p={p}, c={c}: greed index {iota}", r.label()));
                }
            }
        }
    }
    Ok(format!("max (index - p) = {worst:.1e}"))
}

fn normality(_: &mut ChaCha8Rng) -> Outcome {
    for r in [RewardFunction::awgn(1.0)?, RewardFunction::sqrt()] {
        for &p in &[0.1, 0.5, 0.9] {
            let pols = [
                StationaryPolicy::maximin(&r, p)?,
                StationaryPolicy::fixed_fraction(p)?,
            ];
            for pol in &pols {
                for &c in &[1.0, 10.0, 50.0] {
                    let rep = normality_check(pol, c, 5001)?;
                    if !rep.is_normal() {
                        return fail(format!(
                            "{} with {}, c={c}: {rep:?}",
                            pol.label(),
                            r.label()
                        ));
                    }
                }
            }
        }
    }
    Ok("maximin and fixed fraction nondecreasing and concave".into())
}

fn matched_laws(c: f64, p: f64) -> Result<Vec<ArrivalDistribution>, Error> {
    [
        Family::Bernoulli,
        Family::LimitedUniform,
        Family::LimitedExponential,
    ]
    .iter()
    .map(|&f| ArrivalDistribution::with_mcr(f, c, p))
    .collect()
}

fn pmf_mass_and_mean(_: &mut ChaCha8Rng) -> Outcome {
    for &c in &[0.5, 1.0, 4.0] {
        for &p in &[0.1, 0.5, 0.9] {
            for q in matched_laws(c, p)? {
                let mut prev_err = f64::INFINITY;
                for &n in &[50usize, 500, 5000] {
                    let pmf = q.discretize(n)?;
                    let total: f64 = pmf.masses().iter().sum();
                    if (total - 1.0).abs() > 1e-12 || pmf.masses().iter().any(|&m| m < 0.0) {
                        return fail(format!("{q:?}, N={n}: total mass {total}"));
                    }
                    let err = (pmf.mean() - q.effective_mean()).abs();
                    if err > c / n as f64 + 1e-12 {
                        return fail(format!("{q:?}, N={n}: mean error {err:e} exceeds c/N"));
                    }
                    if err > prev_err + 1e-15 {
                        return fail(format!("{q:?}: mean error grew to {err:e} at N={n}"));
                    }
                    prev_err = err;
                }
            }
        }
    }
    Ok("mass 1 within 1e-12, mean error <= c/N".into())
}

fn bernoulli_mcr(_: &mut ChaCha8Rng) -> Outcome {
    for &c in &[0.3, 1.0, 7.0] {
        for &p in &P_GRID {
            for q in matched_laws(c, p)? {
                let m = q.mcr();
                let exact = q.family() == Family::Bernoulli;
                if (exact && m != p) || (m - p).abs() > 1e-12 {
                    return fail(format!("{q:?}: mcr {m}, target {p}"));
                }
            }
        }
    }
    Ok("mcr(Bernoulli) = p exactly; matched families within 1e-12".into())
}

fn sampling_moments(rng: &mut ChaCha8Rng) -> Outcome {
    let n = 1_000_000;
    for q in matched_laws(1.0, 0.4)? {
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = q.sample(rng);
            if !(0.0..=q.c()).contains(&x) {
                return fail(format!("{q:?}: sample {x} outside [0, c]"));
            }
            s += x;
            s2 += x * x;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        if (mean - q.effective_mean()).abs() > 3.0 * se {
            return fail(format!(
                "{q:?}: sample mean {mean}, expected {} (stderr {se:e})",
                q.effective_mean()
            ));
        }
    }
    Ok(format!("{n} samples per family within 3 standard errors"))
}

fn step_invariants(rng: &mut ChaCha8Rng) -> Outcome {
    for _ in 0..100_000 {
        let c = 0.1 + 10.0 * rng.random::<f64>();
        let b_minus = c * rng.random::<f64>();
        let x = 2.0 * c * rng.random::<f64>();
        let b = (b_minus + x).min(c);
        let u = b * rng.random::<f64>();
        let out = step(BatteryState { b_minus, b: 0.0 }, x, u, c)?;
        let next = out.next;
        if !(0.0 <= next.b_minus && next.b_minus <= next.b && next.b <= c && out.consumed == u) {
            return fail(format!("c={c}, b-={b_minus}, x={x}, u={u}: {out:?}"));
        }
        if step(BatteryState { b_minus, b: 0.0 }, x, b + 1e-6, c).is_ok() {
            return fail(format!(
                "c={c}, b-={b_minus}, x={x}: overdraw by 1e-6 accepted"
            ));
        }
    }
    Ok("0 <= b- <= b <= c; overdraws rejected".into())
}

fn series_oracles(rng: &mut ChaCha8Rng) -> Outcome {
    let r = RewardFunction::awgn(1.0)?;
    let omega = StationaryPolicy::maximin(&r, 0.5)?;
    let t = bernoulli_reward(&omega, &r, 1.0, 0.5, 1e-15)?.value;
    let exact = 0.25 * 2f64.ln();
    if (t - exact).abs() > 1e-12 {
        return fail(format!("T_omega(1) = {t}, expected {exact}"));
    }
    for rw in [r, RewardFunction::sqrt()] {
        for _ in 0..200 {
            let c = 0.01 + 20.0 * rng.random::<f64>();
            let p = 0.01 + 0.98 * rng.random::<f64>();
            let g = bernoulli_reward(&StationaryPolicy::greedy(), &rw, c, p, 1e-15)?.value;
            if g != p * rw.value(c)? {
                return fail(format!(
                    "{}: greedy at c={c}, p={p}: {g} vs {}",
                    rw.label(),
                    p * rw.value(c)?
                ));
            }
        }
    }
    Ok("T_omega = ln2/4 within 1e-12; greedy = p r(c) exactly".into())
}

fn derivative_identity(_: &mut ChaCha8Rng) -> Outcome {
    let mut compared = 0;
    let mut worst = 0.0f64;
    for r in [RewardFunction::awgn(1.0)?, RewardFunction::sqrt()] {
        for &p in &[0.2, 0.5, 0.8] {
            for k in 1..=20 {
                let c = 0.37 * k as f64;
                if let DerivativeCheck::Compared { slope, expected } =
                    bernoulli_derivative_check(&r, p, c, 1e-5)?
                {
                    compared += 1;
                    worst = worst.max((slope - expected).abs());
                    if (slope - expected).abs() > 1e-4 {
                        return fail(format!(
                            "{}: p={p}, c={c}: slope {slope} vs p r'(omega(c)) {expected}",
                            r.label()
                        ));
                    }
                }
            }
        }
    }
    Ok(format!("{compared} non-kink points, max error {worst:.1e}"))
}

fn universal_bound(rng: &mut ChaCha8Rng) -> Outcome {
    for r in shipped_rewards() {
        for _ in 0..300 {
            let c = 0.01 + 30.0 * rng.random::<f64>();
            let p = 0.01 + 0.98 * rng.random::<f64>();
            let bound = universal_upper_bound(&r, c, p)?;
            for pol in [
                StationaryPolicy::maximin(&r, p)?,
                StationaryPolicy::fixed_fraction(p)?,
                StationaryPolicy::greedy(),
            ] {
                let t = bernoulli_reward(&pol, &r, c, p, 1e-14)?;
                if t.value < 0.0 || t.value > bound + t.tolerance + 1e-14 {
                    return fail(format!(
                        "{} with {}, c={c}, p={p}: {} > r(pc) = {bound}",
                        pol.label(),
                        r.label(),
                        t.value
                    ));
                }
            }
        }
    }
    Ok("0 <= T <= r(pc) on 300 cells per reward".into())
}

fn cross_method(_: &mut ChaCha8Rng) -> Outcome {
    let r = RewardFunction::awgn(1.0)?;
    let (n, paths, horizon, seed) = (400, 32, 20_000, 7);
    for family in [
        Family::Bernoulli,
        Family::LimitedUniform,
        Family::LimitedExponential,
    ] {
        let q = ArrivalDistribution::with_mcr(family, 1.0, 0.3)?;
        let omega = StationaryPolicy::maximin(&r, 0.3)?;
        let model = build_mdp(&r, &q, n)?;
        let vi = model.policy_gain(&omega, 1e-10)?;
        let mc = simulate(&omega, &q, &r, horizon, paths, seed)?;
        if (mc.value - vi.value).abs() > mc.tolerance + vi.tolerance {
            return fail(format!(
                "{family}: MC {} vs VI {} (budget {:e})",
                mc.value,
                vi.value,
                mc.tolerance + vi.tolerance
            ));
        }
        if family == Family::Bernoulli {
            let exact = bernoulli_reward(&omega, &r, 1.0, 0.3, 1e-15)?;
            if (vi.value - exact.value).abs() > vi.tolerance
                || (mc.value - exact.value).abs() > mc.tolerance
            {
                return fail(format!(
                    "Bernoulli: series {} vs VI {} vs MC {}",
                    exact.value, vi.value, mc.value
                ));
            }
        }
    }
    Ok("Monte Carlo, value iteration and series agree within budgets".into())
}

fn snapped_actions_admissible(_: &mut ChaCha8Rng) -> Outcome {
    for r in [RewardFunction::awgn(1.0)?, RewardFunction::sqrt()] {
        for &c in &[0.3, 1.0, 5.0] {
            let q = ArrivalDistribution::with_mcr(Family::LimitedUniform, c, 0.5)?;
            let model = build_mdp(&r, &q, 500)?;
            for pol in [
                StationaryPolicy::maximin(&r, 0.5)?,
                StationaryPolicy::fixed_fraction(0.5)?,
                StationaryPolicy::greedy(),
            ] {
                for (k, &a) in model.policy_actions(&pol).iter().enumerate() {
                    if a > k || model.level(a) > pol.consumption(model.level(k)) + 1e-9 {
                        return fail(format!("{}: state {k} takes action {a}", pol.label()));
                    }
                }
            }
        }
    }
    Ok("every snapped action <= state and <= policy consumption".into())
}

fn optimal_gain_monotone_in_c(_: &mut ChaCha8Rng) -> Outcome {
    let r = RewardFunction::awgn(1.0)?;
    let mut prev: Option<(f64, f64, f64)> = None;
    for &c in &[0.25, 0.5, 1.0, 2.0, 4.0] {
        let q = ArrivalDistribution::limited_exponential(c, 1.0)?;
        let g = build_mdp(&r, &q, 400)?.optimal_gain(1e-10)?.result;
        if let Some((pc, pv, pt)) = prev {
            if g.value < pv - pt - g.tolerance {
                return fail(format!(
                    "optimal gain {pv} at c={pc} drops to {} at c={c}",
                    g.value
                ));
            }
        }
        prev = Some((c, g.value, g.tolerance));
    }
    Ok("exponential(1) arrivals, c = 0.25..4".into())
}

fn worst_case_chain(_: &mut ChaCha8Rng) -> Outcome {
    let r = RewardFunction::awgn(1.0)?;
    let floor = 1.0 - (-1.0f64).exp();
    for k in 2..=60 {
        let p = 1.0 / k as f64 + 1e-3;
        if p >= 1.0 {
            continue;
        }
        let f0p = f0(p)?;
        if f0p < floor - 1e-12 {
            return fail(format!("F0({p}) = {f0p} < 1 - 1/e"));
        }
        let omega = StationaryPolicy::maximin(&r, p)?;
        for j in 0..30 {
            let c = 0.01 * 1.35f64.powi(j);
            let t = bernoulli_reward(&omega, &r, c, p, 1e-15)?;
            let ratio = t.value / universal_upper_bound(&r, c, p)?;
            if ratio < f0p - 1e-9 {
                return fail(format!(
                    "p={p}, c={c}: T_omega/r(pc) = {ratio} < F0 = {f0p}"
                ));
            }
        }
    }
    Ok("T_omega/r(pc) >= F0(p) >= 1 - 1/e".into())
}

fn fixed_fraction_factor(_: &mut ChaCha8Rng) -> Outcome {
    let r = RewardFunction::awgn(1.0)?;
    for &p in &P_GRID {
        let omega = StationaryPolicy::maximin(&r, p)?;
        let phi = StationaryPolicy::fixed_fraction(p)?;
        let factor = |c: f64| -> Result<f64, Error> {
            let (_, f) = gap_and_factor(
                bernoulli_reward(&phi, &r, c, p, 1e-15)?.value,
                bernoulli_reward(&omega, &r, c, p, 1e-15)?.value,
            )?;
            Ok(f)
        };
        for j in 0..30 {
            let c = 0.001 * 1.5f64.powi(j);
            let f = factor(c)?;
            if f < 0.5 - 1e-12 {
                return fail(format!("p={p}, c={c}: fixed-fraction factor {f} < 1/2"));
            }
        }
        let limit = phi_small_c_factor_limit(p)?;
        let f = factor(1e-3)?;
        if (f - limit).abs() > 0.02 * limit {
            return fail(format!(
                "p={p}: factor at c=1e-3 is {f}, limit 1/(2-p) = {limit}"
            ));
        }
    }
    Ok("F(phi) >= 1/2 and within 2% of 1/(2-p) at c = 1e-3".into())
}

fn gap_reports_and_dominance(_: &mut ChaCha8Rng) -> Outcome {
    let mut rows = 0;
    for r in [RewardFunction::awgn(1.0)?, RewardFunction::sqrt()] {
        for family in [
            Family::Bernoulli,
            Family::LimitedUniform,
            Family::LimitedExponential,
        ] {
            let mut cfg = SweepConfig::new(
                r.clone(),
                family,
                vec![0.5, 2.0, 8.0],
                vec![Ratio::Mcr(0.1), Ratio::Mcr(0.5)],
            );
            cfg.policies = vec![PolicyChoice::Maximin, PolicyChoice::FixedFraction];
            cfg.vi = ViSettings {
                grid_n: 300,
                eps: 1e-9,
            };
            let reports = sweep(&cfg)?;
            for pair in reports.chunks(2) {
                for rep in pair {
                    rows += 1;
                    if let Err(e) = rep.check() {
                        return fail(format!(
                            "{} {family} c={} p={} {}: {e}",
                            r.label(),
                            rep.c,
                            rep.p,
                            rep.policy
                        ));
                    }
                }
                let (w, f) = (&pair[0], &pair[1]);
                if w.policy_gain < f.policy_gain - (w.tolerance + f.tolerance) {
                    return fail(format!(
                        "{} {family} c={} p={}: maximin {} below fixed fraction {}",
                        r.label(),
                        w.c,
                        w.p,
                        w.policy_gain,
                        f.policy_gain
                    ));
                }
            }
        }
    }
    Ok(format!(
        "{rows} gap reports valid; maximin dominates fixed fraction"
    ))
}
