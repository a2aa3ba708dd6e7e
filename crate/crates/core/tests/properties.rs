use hermquad::gauss_hermite::gh_rule;
use hermquad::study::{corpus_entry, default_grid, fit_rate, run_sweep, RuleFamily, SweepConfig};
use hermquad::wce::{bump_certificate, bump_value, wce_series};
use hermquad::QuadratureRule;
use proptest::prelude::*;

#[test]
fn best_error_keeps_falling() {
    let cfg = SweepConfig::default();
    let ns: Vec<usize> = (4..=11).map(|k| 1usize << k).collect();
    for p in [1, 3, 5] {
        let f = corpus_entry(&format!("abs{p}")).unwrap();
        for fam in [RuleFamily::GaussHermite, RuleFamily::Trapezoid] {
            let recs = run_sweep(fam, &f, &ns, &cfg).unwrap();
            let best = |lo: usize, hi: usize| {
                recs.iter()
                    .filter(|r| r.n + 1 >= lo && r.n <= hi)
                    .map(|r| r.abs_error)
                    .fold(f64::INFINITY, f64::min)
            };
            for big_n in [64usize, 128, 256, 512] {
                let later = best(big_n, 4 * big_n);
                let earlier = best(big_n / 4, big_n);
                // Once both windows sit on the rounding floor there is nothing left to compare.
                if earlier > 1e-15 {
                    assert!(later < earlier, "p={p} {fam:?} N={big_n}: {later} vs {earlier}");
                }
            }
        }
    }
}

#[test]
fn trapezoid_separates_from_gauss_hermite() {
    let cfg = SweepConfig::default();
    for p in [1, 3] {
        let f = corpus_entry(&format!("abs{p}")).unwrap();
        let gh = fit_rate(&run_sweep(RuleFamily::GaussHermite, &f, &default_grid(), &cfg).unwrap()).unwrap();
        let tr = fit_rate(&run_sweep(RuleFamily::Trapezoid, &f, &default_grid(), &cfg).unwrap()).unwrap();
        assert!(tr.slope - gh.slope <= -(p as f64) / 2.0 + 0.4, "p={p}: {} vs {}", tr.slope, gh.slope);
        assert!(gh.r_squared > 0.99 && tr.r_squared > 0.99);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bump_vanishes_at_nodes(mut nodes in proptest::collection::vec(-6.0f64..6.0, 2..20), alpha in 1u32..4) {
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        prop_assume!(nodes.len() >= 2);
        for &x in &nodes {
            prop_assert_eq!(bump_value(&nodes, alpha, x).unwrap(), 0.0);
        }
        let c = bump_certificate(&nodes, alpha).unwrap();
        prop_assert!(c.i_h > 0.0 && c.norm_h > 0.0);
        // Any weights give Q(h) = 0.
        let w: Vec<f64> = (0..nodes.len()).map(|j| 1.0 + j as f64).collect();
        let rule = QuadratureRule::custom(nodes.clone(), w).unwrap();
        prop_assert_eq!(rule.apply(|x| bump_value(&nodes, alpha, x).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn wce_monotone_in_truncation(n in 2usize..40, alpha in 1u32..4, k1 in 1usize..400, extra in 0usize..400) {
        let r = gh_rule(n).unwrap();
        let a = wce_series(&r, alpha, k1).unwrap().value;
        let b = wce_series(&r, alpha, k1 + extra).unwrap().value;
        prop_assert!(a >= 0.0);
        prop_assert!(b >= a);
    }

    #[test]
    fn bump_is_a_lower_bound_for_any_weights(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let base = gh_rule(12).unwrap();
        let w: Vec<f64> = (0..12).map(|_| rng.random_range(-0.2..0.6)).collect();
        let rule = base.with_weights(w).unwrap();
        let bump = bump_certificate(base.nodes(), 1).unwrap().ratio;
        let wce = wce_series(&rule, 1, 20_000).unwrap().value;
        prop_assert!(wce >= 0.9 * bump, "{} < {}", wce, bump);
    }
}
