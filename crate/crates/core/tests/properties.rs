use okishio_lab::equilibrium::{max_profit_rate, uniform_profit_rate, RESIDUAL_TOLERANCE};
use okishio_lab::linalg::{dot, Matrix};
use okishio_lab::linear_economy::{
    check_productive_indecomposable, exploitation_rate, labor_values, leontief_values, Technology,
    ValueSystem, WageBundle,
};
use okishio_lab::synthesis::{
    build_region, sample_constant_exploitation, synthesize_culs_change, SamplingStrategy,
};
use okishio_lab::technical_change::{
    apply, classify, classify_at_prices, CapitalUsing, TechChange, TechChangeSpec,
};
use okishio_lab::verify::{
    random_economy, run_scenario, value_price_chain, GeneratorConfig, Verdict,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn economy(seed: u64, n: usize) -> (Technology, WageBundle) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_economy(&mut rng, n, &GeneratorConfig::default()).expect("generator")
}

fn economies() -> impl Strategy<Value = (Technology, WageBundle)> {
    (any::<u64>(), 2usize..=8).prop_map(|(seed, n)| economy(seed, n))
}

/// Largest real root of `det(μI − A)` for a 3×3 matrix: scan down from an
/// upper bound to the first sign change, then bisect.
fn cubic_perron_root(a: &Matrix) -> f64 {
    let tr = a[(0, 0)] + a[(1, 1)] + a[(2, 2)];
    let minors = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)] + a[(0, 0)] * a[(2, 2)]
        - a[(0, 2)] * a[(2, 0)]
        + a[(1, 1)] * a[(2, 2)]
        - a[(1, 2)] * a[(2, 1)];
    let det = a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
        - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
        + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)]);
    let p = |m: f64| ((m - tr) * m + minors) * m - det;
    let mut hi = a.norm_inf() + 1e-3;
    let step = 1e-4;
    let mut lo = hi - step;
    while p(lo) > 0.0 {
        hi = lo;
        lo -= step;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Random change in `sector` built by scaling the old recipe and labor.
fn scaled_change(
    tech: &Technology,
    sector: usize,
    factors: &[f64],
    labor_factor: f64,
) -> Option<TechChange> {
    let recipe: Vec<f64> = tech
        .recipe(sector)
        .iter()
        .zip(factors)
        .map(|(a, f)| a * f)
        .collect();
    TechChange::new(tech, sector, recipe, tech.labor()[sector] * labor_factor).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn values_satisfy_accounting_identity((tech, _b) in economies()) {
        let values = labor_values(&tech).unwrap();
        let embodied = tech.inputs().vec_mul(&values);
        for ((v, e), l) in values.iter().zip(&embodied).zip(tech.labor()) {
            prop_assert!((v - e - l).abs() <= 1e-10 * v.max(1.0));
        }
    }

    #[test]
    fn values_match_truncated_series(
        entries in prop::collection::vec(0.0f64..1.0, 9..=9),
        labor in prop::collection::vec(0.05f64..1.0, 3..=3),
        rho in 0.05f64..0.9,
    ) {
        let raw = Matrix::from_fn(3, |r, c| entries[3 * r + c] + 0.01);
        let current = check_productive_indecomposable(&raw).unwrap().spectral_radius;
        let a = raw.scale(rho / current);
        let mut term = labor.clone();
        let mut series = labor.clone();
        for _ in 0..200 {
            term = a.vec_mul(&term);
            series.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
        }
        let lu = leontief_values(&a, &labor).unwrap();
        for (s, v) in series.iter().zip(&lu) {
            prop_assert!((s - v).abs() <= 1e-8 * v.max(1.0), "{series:?} vs {lu:?}");
        }
    }

    #[test]
    fn exploitation_falls_as_any_bundle_component_grows(
        (tech, b) in economies(),
        pick in any::<prop::sample::Index>(),
        delta in 1e-3f64..0.1,
    ) {
        let values = labor_values(&tech).unwrap();
        let j = pick.index(tech.sectors());
        let mut bigger = b.as_slice().to_vec();
        bigger[j] += delta;
        let e0 = exploitation_rate(dot(&values, b.as_slice())).unwrap();
        let e1 = exploitation_rate(dot(&values, &bigger)).unwrap();
        prop_assert!(e1 < e0);
    }

    #[test]
    fn price_system_residual_is_small((tech, b) in economies()) {
        let eq = uniform_profit_rate(&tech, &b).unwrap();
        prop_assert!(eq.residual <= RESIDUAL_TOLERANCE);
        prop_assert!((dot(&eq.prices, b.as_slice()) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn power_iteration_matches_cubic_root(seed in any::<u64>()) {
        let (tech, _) = economy(seed, 3);
        let rho = check_productive_indecomposable(tech.inputs()).unwrap().spectral_radius;
        let root = cubic_perron_root(tech.inputs());
        prop_assert!((rho - root).abs() <= 1e-10, "{rho} vs {root}");
    }

    #[test]
    fn prices_strictly_exceed_values((tech, b) in economies()) {
        let eq = uniform_profit_rate(&tech, &b).unwrap();
        let values = labor_values(&tech).unwrap();
        prop_assert!(eq.prices.iter().zip(&values).all(|(p, v)| p > v));
    }

    #[test]
    fn profit_rate_is_positive_and_below_maximum((tech, b) in economies()) {
        let eq = uniform_profit_rate(&tech, &b).unwrap();
        let vs = ValueSystem::new(&tech, &b).unwrap();
        prop_assert!(vs.exploitation > 0.0);
        prop_assert!(eq.profit_rate > 0.0);
        prop_assert!(eq.profit_rate < max_profit_rate(&tech).unwrap());
    }

    #[test]
    fn synthesized_changes_lower_every_value(
        (tech, b) in economies(),
        pick in any::<prop::sample::Index>(),
        eps in 0.05f64..0.95,
        lab in 0.05f64..0.95,
    ) {
        let eq = uniform_profit_rate(&tech, &b).unwrap();
        let synth = synthesize_culs_change(&tech, &b, &eq, pick.index(tech.sectors()), eps, lab).unwrap();
        let cls = classify(&tech, &eq, &synth.change).unwrap();
        prop_assert!(cls.viable && cls.culs);
        let before = labor_values(&tech).unwrap();
        let after = labor_values(&apply(&tech, &synth.change).unwrap()).unwrap();
        prop_assert!(value_price_chain(&eq.prices, &before, &after));
    }

    #[test]
    fn constant_exploitation_bundles_lower_profit(
        (tech, b) in economies(),
        pick in any::<prop::sample::Index>(),
        seed in any::<u64>(),
    ) {
        let eq = uniform_profit_rate(&tech, &b).unwrap();
        let synth = synthesize_culs_change(&tech, &b, &eq, pick.index(tech.sectors()), 0.5, 0.5).unwrap();
        let before = labor_values(&tech).unwrap();
        let after = labor_values(&apply(&tech, &synth.change).unwrap()).unwrap();
        let cls = classify(&tech, &eq, &synth.change).unwrap();
        let region = build_region(&eq, &after, dot(&before, b.as_slice()), &cls).unwrap();
        let new_b = sample_constant_exploitation(&region, seed, &SamplingStrategy::EqualRest).unwrap();
        let report = run_scenario(&tech, &b, &synth.change, &new_b).unwrap();
        prop_assert_eq!(report.verdict, Verdict::ProfitFellExploitationConstant);
    }

    #[test]
    fn classification_is_scale_invariant(
        (tech, b) in economies(),
        pick in any::<prop::sample::Index>(),
        factors in prop::collection::vec(0.5f64..1.5, 8),
        labor_factor in 0.5f64..1.5,
        scale in 0.01f64..100.0,
    ) {
        let eq = uniform_profit_rate(&tech, &b).unwrap();
        let sector = pick.index(tech.sectors());
        if let Some(change) = scaled_change(&tech, sector, &factors[..tech.sectors()], labor_factor) {
            let base = classify_at_prices(&tech, &eq.prices, 1.0, &change, CapitalUsing::Strict).unwrap();
            let scaled_prices: Vec<f64> = eq.prices.iter().map(|p| p * scale).collect();
            let scaled = classify_at_prices(&tech, &scaled_prices, scale, &change, CapitalUsing::Strict).unwrap();
            prop_assert_eq!(base.culs, scaled.culs);
            if base.cost_drop.abs() > 1e-9 * base.cost_before {
                prop_assert_eq!(base.viable, scaled.viable);
            }
            prop_assert!((base.g - scaled.g).abs() <= 1e-9 * base.g.abs().max(1.0));
        }
    }

    #[test]
    fn change_spec_round_trips_through_json(
        (tech, _b) in economies(),
        pick in any::<prop::sample::Index>(),
        factors in prop::collection::vec(0.5f64..1.5, 8),
        labor_factor in 0.5f64..1.5,
    ) {
        let sector = pick.index(tech.sectors());
        if let Some(change) = scaled_change(&tech, sector, &factors[..tech.sectors()], labor_factor) {
            let text = serde_json::to_string(&change.to_spec()).unwrap();
            let back = serde_json::from_str::<TechChangeSpec>(&text).unwrap().into_change(&tech).unwrap();
            prop_assert_eq!(back, change);
        }
    }

    #[test]
    fn economy_round_trips_through_json((tech, b) in economies()) {
        let text = serde_json::to_string(&okishio_lab::cli::EconomyFile::from_economy(&tech, &b)).unwrap();
        let file: okishio_lab::cli::EconomyFile = serde_json::from_str(&text).unwrap();
        let (tech2, b2) = file.into_economy().unwrap();
        prop_assert_eq!(tech2.inputs(), tech.inputs());
        prop_assert_eq!(tech2.labor(), tech.labor());
        prop_assert_eq!(b2, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    /// A cost-reducing change with the real wage held fixed never lowers the
    /// profit rate.
    #[test]
    fn viable_change_with_fixed_wage_never_lowers_profit(
        (tech, b) in economies(),
        pick in any::<prop::sample::Index>(),
        factors in prop::collection::vec(0.6f64..1.4, 8),
        labor_factor in 0.5f64..1.2,
    ) {
        let eq = uniform_profit_rate(&tech, &b).unwrap();
        let sector = pick.index(tech.sectors());
        let change = scaled_change(&tech, sector, &factors[..tech.sectors()], labor_factor);
        prop_assume!(change.is_some());
        let change = change.unwrap();
        let cls = classify(&tech, &eq, &change).unwrap();
        prop_assume!(cls.viable);
        let after = uniform_profit_rate(&apply(&tech, &change).unwrap(), &b).unwrap();
        prop_assert!(after.profit_rate >= eq.profit_rate - 1e-9, "{} -> {}", eq.profit_rate, after.profit_rate);
    }
}
