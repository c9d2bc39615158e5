use maximin_power::arrivals::{ArrivalDistribution, Family};
use maximin_power::evaluation::{bernoulli_reward, step, BatteryState};
use maximin_power::metrics::{f0, universal_upper_bound};
use maximin_power::policy::{Policy, StationaryPolicy};
use maximin_power::reward::RewardFunction;
use proptest::prelude::*;

fn reward() -> impl Strategy<Value = RewardFunction> {
    prop_oneof![
        (0.1f64..5.0).prop_map(|g| RewardFunction::awgn(g).unwrap()),
        Just(RewardFunction::sqrt()),
    ]
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::Bernoulli),
        Just(Family::LimitedUniform),
        Just(Family::LimitedExponential)
    ]
}

proptest! {
    #[test]
    fn kappa_bar_shrinks(r in reward(), s in 1.0001f64..20.0, x in 1e-6f64..200.0) {
        let k = r.kappa_bar(s, x).unwrap();
        prop_assert!(k >= 0.0 && k < x);
    }

    #[test]
    fn m_truncations_agree(r in reward(), s in 1.01f64..10.0, x in 0.0f64..100.0) {
        let a = r.eta(s, x).unwrap();
        let b = r.eta_m_tilde(s, x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn maximin_is_admissible_and_inverts_eta(r in reward(), p in 0.02f64..0.98, x in 0.0f64..100.0) {
        let omega = StationaryPolicy::maximin(&r, p).unwrap();
        let w = omega.consumption(x);
        prop_assert!((0.0..=x).contains(&w));
        let back = r.eta(1.0 / (1.0 - p), w).unwrap();
        prop_assert!((back - x).abs() <= 1e-8 * (1.0 + x), "eta(omega({})) = {}", x, back);
    }

    #[test]
    fn maximin_is_monotone(r in reward(), p in 0.02f64..0.98, x in 0.0f64..50.0, dx in 0.0f64..5.0) {
        let omega = StationaryPolicy::maximin(&r, p).unwrap();
        prop_assert!(omega.consumption(x + dx) >= omega.consumption(x) - 1e-12);
        prop_assert!(omega.reserve_of(x + dx) >= omega.reserve_of(x) - 1e-9);
    }

    #[test]
    fn step_keeps_battery_in_range(c in 0.01f64..10.0, f in 0.0f64..1.0, x in 0.0f64..20.0, g in 0.0f64..1.0) {
        let b_minus = f * c;
        let b = (b_minus + x).min(c);
        let out = step(BatteryState { b_minus, b: 0.0 }, x, g * b, c).unwrap();
        prop_assert!(0.0 <= out.next.b_minus && out.next.b_minus <= out.next.b && out.next.b <= c);
        prop_assert!((out.next.b_minus + out.consumed - out.next.b).abs() < 1e-12);
    }

    #[test]
    fn matched_mcr_and_pmf_mass(fam in family(), c in 0.05f64..20.0, p in 0.01f64..0.99, n in 1usize..3000) {
        let q = ArrivalDistribution::with_mcr(fam, c, p).unwrap();
        prop_assert!((q.mcr() - p).abs() < 1e-12);
        let pmf = q.discretize(n).unwrap();
        let total: f64 = pmf.masses().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!((pmf.mean() - q.effective_mean()).abs() <= c / n as f64);
    }

    #[test]
    fn series_respects_universal_bound(r in reward(), c in 0.01f64..50.0, p in 0.01f64..0.99) {
        let bound = universal_upper_bound(&r, c, p).unwrap();
        for pol in [StationaryPolicy::maximin(&r, p).unwrap(), StationaryPolicy::fixed_fraction(p).unwrap(), StationaryPolicy::greedy()] {
            let t = bernoulli_reward(&pol, &r, c, p, 1e-14).unwrap();
            prop_assert!(t.value >= 0.0 && t.value <= bound + t.tolerance + 1e-14);
        }
    }

    #[test]
    fn maximin_worst_case_factor(c in 0.01f64..100.0, p in 0.01f64..0.99) {
        let r = RewardFunction::awgn(1.0).unwrap();
        let omega = StationaryPolicy::maximin(&r, p).unwrap();
        let ratio = bernoulli_reward(&omega, &r, c, p, 1e-15).unwrap().value / r.value(p * c).unwrap();
        let floor = f0(p).unwrap();
        prop_assert!(ratio >= floor - 1e-9 && floor >= 1.0 - (-1.0f64).exp() - 1e-12);
    }
}
