//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines are
//! always shown.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use maximin_power::arrivals::{ArrivalDistribution, Family};
use maximin_power::evaluation::{
    bernoulli_derivative_check, bernoulli_reward, build_mdp, simulate, DerivativeCheck,
    EvaluationResult,
};
use maximin_power::metrics::{f0, phi_small_c_factor_limit, universal_upper_bound, ViSettings};
use maximin_power::policy::{Policy, StationaryPolicy, DEFAULT_INVERSION_TOL};
use maximin_power::reward::RewardFunction;
use maximin_power::verify::{self, VerifySettings};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn awgn1() -> RewardFunction {
    RewardFunction::awgn(1.0).unwrap()
}

fn series(pol: &StationaryPolicy, r: &RewardFunction, c: f64, p: f64) -> EvaluationResult {
    bernoulli_reward(pol, r, c, p, 1e-15).unwrap()
}

fn within_time(start: Instant, limit: Duration, detail: String) -> Verdict {
    let t = start.elapsed();
    if t <= limit {
        Ok(format!("{detail}; {:.2} s", t.as_secs_f64()))
    } else {
        Err(format!(
            "{detail}; took {:.2} s, limit {} s",
            t.as_secs_f64(),
            limit.as_secs()
        ))
    }
}

fn closed_form_consistency() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for gamma in [0.5, 1.0, 2.0] {
        let r = RewardFunction::awgn(gamma).unwrap();
        for j in 1..=9 {
            let p = j as f64 / 10.0;
            let closed = StationaryPolicy::maximin_awgn(gamma, p).unwrap();
            let inverse =
                StationaryPolicy::maximin_generic(r.clone(), p, DEFAULT_INVERSION_TOL).unwrap();
            for k in 0..10_000 {
                let x = 100.0 * k as f64 / 9_999.0;
                worst = worst.max((closed.consumption(x) - inverse.consumption(x)).abs());
            }
        }
    }
    if worst > 1e-8 {
        return Err(format!("max |omega_awgn - eta^-1| = {worst:e}"));
    }
    within_time(
        start,
        Duration::from_secs(10),
        format!("max |omega_awgn - eta^-1| = {worst:.1e}"),
    )
}

fn bernoulli_exact_value() -> Verdict {
    let r = awgn1();
    let t = series(&StationaryPolicy::maximin(&r, 0.5).unwrap(), &r, 1.0, 0.5).value;
    let exact = 0.25 * 2f64.ln();
    if (t - exact).abs() > 1e-12 {
        return Err(format!("T_omega = {t}, expected {exact}"));
    }
    for rw in [awgn1(), RewardFunction::sqrt()] {
        for c in [0.01, 0.3, 1.0, 2.5, 10.0, 100.0] {
            for j in 1..=9 {
                let p = j as f64 / 10.0;
                let g = series(&StationaryPolicy::greedy(), &rw, c, p).value;
                if g != p * rw.value(c).unwrap() {
                    return Err(format!("greedy at {} c={c} p={p}: {g}", rw.label()));
                }
            }
        }
    }
    Ok(format!(
        "|T_omega - ln2/4| = {:.1e}; greedy = p r(c) on 108 cells",
        (t - exact).abs()
    ))
}

fn value_iteration_cross_check() -> Verdict {
    let start = Instant::now();
    let r = awgn1();
    let mut worst = 0.0f64;
    for c in [0.5, 1.0, 2.0, 4.0] {
        for p in [0.1, 0.5, 0.9] {
            let exact = series(&StationaryPolicy::maximin(&r, p).unwrap(), &r, c, p).value;
            let q = ArrivalDistribution::bernoulli(c, p).unwrap();
            let vi = build_mdp(&r, &q, 2000)
                .unwrap()
                .optimal_gain(1e-9)
                .map_err(|e| e.to_string())?;
            let rel = (vi.result.value - exact).abs() / exact;
            worst = worst.max(rel);
            if rel > 1e-3 {
                return Err(format!(
                    "c={c} p={p}: VI {} vs series {exact} (rel {rel:e})",
                    vi.result.value
                ));
            }
        }
    }
    within_time(
        start,
        Duration::from_secs(120),
        format!("max relative error {worst:.1e} on 12 cells"),
    )
}

fn derivative_identity() -> Verdict {
    let r = awgn1();
    let mut compared = 0;
    let mut worst = 0.0f64;
    let mut k = 0;
    while compared < 20 {
        k += 1;
        let p = [0.2, 0.5, 0.8][k % 3];
        let c = 0.05 + 0.29 * k as f64;
        match bernoulli_derivative_check(&r, p, c, 1e-5).map_err(|e| e.to_string())? {
            DerivativeCheck::Compared { slope, expected } => {
                compared += 1;
                worst = worst.max((slope - expected).abs());
            }
            DerivativeCheck::NearKink { .. } => continue,
        }
    }
    if worst > 1e-4 {
        return Err(format!("max |T' - p r'(omega)| = {worst:e}"));
    }
    Ok(format!("max |T' - p r'(omega)| = {worst:.1e} at 20 points"))
}

fn c_sweep() -> Vec<f64> {
    (0..20).map(|k| 0.1 * 1.35f64.powi(k)).collect()
}

fn least_favorable_ordering() -> Verdict {
    let r = awgn1();
    let vi = ViSettings::default();
    let mut cells = 0;
    let mut closest = f64::INFINITY;
    for p in [0.1, 0.5] {
        for c in c_sweep() {
            let pols = [
                StationaryPolicy::maximin(&r, p).unwrap(),
                StationaryPolicy::fixed_fraction(p).unwrap(),
            ];
            let models: Vec<_> = [Family::LimitedUniform, Family::LimitedExponential]
                .iter()
                .map(|&f| {
                    build_mdp(
                        &r,
                        &ArrivalDistribution::with_mcr(f, c, p).unwrap(),
                        vi.grid_n,
                    )
                    .unwrap()
                })
                .collect();
            for pol in &pols {
                let b = series(pol, &r, c, p);
                for m in &models {
                    let g = m.policy_gain(pol, vi.eps).map_err(|e| e.to_string())?;
                    let slack = g.value - b.value + g.tolerance + b.tolerance;
                    closest = closest.min(slack);
                    cells += 1;
                    if slack < 0.0 {
                        return Err(format!(
                            "{} at c={c} p={p}: Bernoulli {} above {} (budget {:e})",
                            pol.label(),
                            b.value,
                            g.value,
                            g.tolerance + b.tolerance
                        ));
                    }
                }
            }
        }
    }
    Ok(format!(
        "{cells} comparisons, smallest margin {closest:.1e}"
    ))
}

fn worst_case_factor_chain() -> Verdict {
    let r = awgn1();
    let mut worst = f64::INFINITY;
    for j in 1..=19 {
        let p = j as f64 / 20.0;
        let omega = StationaryPolicy::maximin(&r, p).unwrap();
        let floor = f0(p).unwrap();
        for c in c_sweep() {
            let ratio = series(&omega, &r, c, p).value / universal_upper_bound(&r, c, p).unwrap();
            worst = worst.min(ratio - floor);
            if ratio < floor - 1e-3 {
                return Err(format!(
                    "p={p} c={c}: T_omega/r(pc) = {ratio} < F0 = {floor}"
                ));
            }
        }
    }
    let target = 1.0 - (-1.0f64).exp();
    let min_f0 = (2..=1000)
        .map(|k| f0(1.0 / k as f64).unwrap())
        .fold(f64::INFINITY, f64::min);
    if (min_f0 - target).abs() > 1e-3 {
        return Err(format!("min F0 = {min_f0}, 1 - 1/e = {target}"));
    }
    for j in 1..=9 {
        let p = j as f64 / 10.0;
        let phi = series(&StationaryPolicy::fixed_fraction(p).unwrap(), &r, 1e-3, p).value;
        let opt = series(&StationaryPolicy::maximin(&r, p).unwrap(), &r, 1e-3, p).value;
        let limit = phi_small_c_factor_limit(p).unwrap();
        if ((phi / opt) - limit).abs() > 0.02 * limit {
            return Err(format!(
                "p={p}: F(phi, c=1e-3) = {}, 1/(2-p) = {limit}",
                phi / opt
            ));
        }
    }
    Ok(format!(
        "min (T/r(pc) - F0) = {worst:.1e}; min F0 = {min_f0:.6} vs {target:.6}; F(phi) near 1/(2-p)"
    ))
}

fn dominance() -> Verdict {
    let vi = ViSettings::default();
    let mut cells = 0;
    for r in [awgn1(), RewardFunction::sqrt()] {
        for family in [
            Family::Bernoulli,
            Family::LimitedUniform,
            Family::LimitedExponential,
        ] {
            for p in [0.1, 0.5, 0.9] {
                for c in [0.25, 1.0, 4.0, 16.0] {
                    let omega = StationaryPolicy::maximin(&r, p).unwrap();
                    let phi = StationaryPolicy::fixed_fraction(p).unwrap();
                    let (a, b) = if family == Family::Bernoulli {
                        (series(&omega, &r, c, p), series(&phi, &r, c, p))
                    } else {
                        let m = build_mdp(
                            &r,
                            &ArrivalDistribution::with_mcr(family, c, p).unwrap(),
                            vi.grid_n,
                        )
                        .unwrap();
                        (
                            m.policy_gain(&omega, vi.eps).map_err(|e| e.to_string())?,
                            m.policy_gain(&phi, vi.eps).map_err(|e| e.to_string())?,
                        )
                    };
                    cells += 1;
                    if a.value < b.value - (a.tolerance + b.tolerance) {
                        return Err(format!(
                            "{} {family} c={c} p={p}: omega {} < phi {}",
                            r.label(),
                            a.value,
                            b.value
                        ));
                    }
                }
            }
        }
    }
    Ok(format!("gain(omega) >= gain(phi) on {cells} cells"))
}

fn mcr_constants() -> Verdict {
    let u = ArrivalDistribution::with_nmcr(Family::LimitedUniform, 1.0, 0.9)
        .unwrap()
        .mcr();
    if (u - 0.7222).abs() > 5e-5 {
        return Err(format!("uniform mcr {u}"));
    }
    let mut got = Vec::new();
    for (nmcr, want) in [(0.1, 0.1000), (0.5, 0.4323), (0.9, 0.6037)] {
        let m = ArrivalDistribution::with_nmcr(Family::LimitedExponential, 1.0, nmcr)
            .unwrap()
            .mcr();
        if (m - want).abs() > 5e-5 {
            return Err(format!("exponential nmcr {nmcr}: mcr {m}, expected {want}"));
        }
        got.push(format!("{m:.4}"));
    }
    Ok(format!("uniform {u:.4}; exponential {}", got.join(", ")))
}

fn monte_carlo_consistency() -> Verdict {
    let (n, paths, seed) = (100_000, 64, 2024);
    let cells = [
        (awgn1(), Family::Bernoulli, 1.0, 0.5, true),
        (RewardFunction::sqrt(), Family::Bernoulli, 3.0, 0.2, false),
        (awgn1(), Family::LimitedUniform, 1.0, 0.3, true),
        (
            RewardFunction::sqrt(),
            Family::LimitedUniform,
            2.0,
            0.7,
            false,
        ),
        (awgn1(), Family::LimitedExponential, 2.0, 0.5, false),
        (
            RewardFunction::sqrt(),
            Family::LimitedExponential,
            0.5,
            0.1,
            true,
        ),
    ];
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let mut worst: f64 = 0.0;
    for (r, family, c, p, use_omega) in cells {
        let q = ArrivalDistribution::with_mcr(family, c, p).unwrap();
        let pol = if use_omega {
            StationaryPolicy::maximin(&r, p).unwrap()
        } else {
            StationaryPolicy::fixed_fraction(p).unwrap()
        };
        let mc = four
            .install(|| simulate(&pol, &q, &r, n, paths, seed))
            .map_err(|e| e.to_string())?;
        let serial = one
            .install(|| simulate(&pol, &q, &r, n, paths, seed))
            .map_err(|e| e.to_string())?;
        if mc.value.to_bits() != serial.value.to_bits()
            || mc.stderr.map(f64::to_bits) != serial.stderr.map(f64::to_bits)
        {
            return Err(format!(
                "{family} c={c}: 4 threads {} vs 1 thread {}",
                mc.value, serial.value
            ));
        }
        let reference = if family == Family::Bernoulli {
            series(&pol, &r, c, p)
        } else {
            build_mdp(&r, &q, 2000)
                .unwrap()
                .policy_gain(&pol, 1e-10)
                .map_err(|e| e.to_string())?
        };
        let se = mc.stderr.unwrap();
        let budget = 3.0 * se;
        let z = (mc.value - reference.value).abs() / se;
        worst = worst.max(z);
        if (mc.value - reference.value).abs() > budget {
            return Err(format!(
                "{} {family} c={c} p={p}: MC {} +- {se:.1e} vs {} {} (tol {:.1e})",
                r.label(),
                mc.value,
                reference.method,
                reference.value,
                reference.tolerance
            ));
        }
    }
    Ok(format!(
        "6 cells, max |MC - ref|/stderr = {worst:.2}; identical with 1 and 4 threads"
    ))
}

fn property_suites() -> Verdict {
    let start = Instant::now();
    let report = verify::run(&VerifySettings::default());
    if let Some(f) = report.first_failure() {
        return Err(f.to_string());
    }
    within_time(
        start,
        Duration::from_secs(60),
        format!("{} checks passed", report.checks.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("closed-form consistency", closed_form_consistency),
        ("Bernoulli exact value", bernoulli_exact_value),
        ("value-iteration cross-check", value_iteration_cross_check),
        ("derivative identity", derivative_identity),
        ("least-favorable ordering", least_favorable_ordering),
        ("worst-case factor chain", worst_case_factor_chain),
        ("dominance", dominance),
        ("MCR constants", mcr_constants),
        ("Monte Carlo consistency", monte_carlo_consistency),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, body)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = body();
        let t = start.elapsed().as_secs_f64();
        match verdict {
            Ok(s) => println!("criterion {:>2} PASS {name} ({t:.1} s): {s}", i + 1),
            Err(s) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({t:.1} s): {s}", i + 1);
            }
        }
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
