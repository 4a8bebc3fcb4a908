use proptest::prelude::*;
use sgpid_experiments::*;

fn evaluator(seed: u64, coef: Vec<f64>) -> PolicyEvaluator {
    let (net, _) = generate_network(&NetworkSpec { generator: Generator::ErdosRenyi { p: 0.5 }, n_units: 5, seed }).unwrap();
    let data = simulate(&net, &DgpParams::policy(), 40, 3, seed).unwrap();
    let model = |c: &[f64]| Model { keep: vec![true; c.len()], fit: LogisticFit { coef: c.to_vec(), converged: true, iterations: 0 } };
    let models = NuisanceModels { marginal: model(&coef[..7]), conditional: model(&coef[7..]) };
    PolicyEvaluator::new(&models, &data, (seed % 5) as usize, None, 0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn optimum_dominates_every_grid_point_and_the_matching_status_quo(
        seed in any::<u64>(),
        coef in prop::collection::vec(-2.0f64..2.0, 15),
    ) {
        let ev = evaluator(seed, coef);
        let class = PolicyClass::uniform(-1.0, 1.0, 0.5);
        let (k, best) = optimize_policy(&ev, &class).unwrap();
        prop_assert_eq!(ev.value(&k), best);
        for p in class.points() {
            let v = ev.value(&p);
            prop_assert!(v <= best);
            // Ties resolve to the lexicographically first maximizer.
            if v == best {
                prop_assert!(k <= p);
            }
        }
        prop_assert!(optimize_policy(&ev, &class.refined()).unwrap().1 >= best);
        prop_assert!((0.0..=1.0).contains(&best));
    }

    #[test]
    fn policy_probabilities_are_clipped(k in prop::array::uniform3(-5.0f64..5.0), c in prop::array::uniform3(0.0f64..1.0)) {
        let p = policy_probability(&k, &c);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn intervals_are_ordered(draws in prop::collection::vec(prop::option::weighted(0.9, -1.0f64..1.0), 1..60)) {
        let iv = percentile_interval(0.0, &draws);
        prop_assert_eq!(iv.n_ok + iv.n_failed, draws.len());
        if iv.n_ok > 0 {
            prop_assert!(iv.lo <= iv.boot_mean && iv.boot_mean <= iv.hi);
        }
    }
}
