use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgpid_estimand::{id_sg, IdResult, NodeAssignment};
use sgpid_evaluation::*;
use sgpid_graph::random::random_block_safe_lvcg;
use sgpid_graph::VSet;
use sgpid_projection::latent_project;

fn positive_table(seed: u64, vars: &[&str]) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scope = vars.iter().map(|v| (v.to_string(), rng.random_range(2..=3))).collect();
    Table::from_fn(scope, |_| rng.random_range(0.05..1.0)).unwrap().normalized().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn conditionals_normalize_and_chain(seed in any::<u64>()) {
        let p = positive_table(seed, &["A", "B", "C"]);
        let given: VSet = ["A".to_string()].into();
        let c = p.conditional(&given).unwrap();
        prop_assert!(c.marginal(&given).data().iter().all(|x| (x - 1.0).abs() < 1e-12));
        let back = c.multiply(&p.marginal(&given)).unwrap();
        prop_assert!(back.max_abs_diff(&p).unwrap() < 1e-15);
    }

    #[test]
    fn identified_node_effects_are_normalized_kernels(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(3..=5);
        let lv = random_block_safe_lvcg(&mut rng, n, 0.45, 0.45, 2);
        let sm = StructuralModel::random(&mut rng, &lv, 1.0).unwrap();
        let sg = latent_project(&lv).unwrap();
        let names: Vec<String> = sg.names().into_iter().collect();
        let a = names[rng.random_range(0..names.len())].clone();
        let y: VSet = names.iter().filter(|v| **v != a).take(2).cloned().collect();
        let assign: NodeAssignment = [(a.clone(), None)].into();
        if let IdResult::Identified(e) = id_sg(&sg, &y, &assign).unwrap() {
            let t = evaluate_estimand(&e, &observed_joint(&sm).unwrap()).unwrap();
            let per_a = t.marginal(&e.symbolic);
            prop_assert!(per_a.data().iter().all(|x| (x - 1.0).abs() < 1e-10));
        }
    }

    #[test]
    fn equilibria_are_fixed_points(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lv = random_block_safe_lvcg(&mut rng, 5, 0.4, 0.7, 0);
        let sm = StructuralModel::random(&mut rng, &lv, 1.5).unwrap();
        let sys = sm.system().unwrap();
        for block in sys.blocks() {
            let mut outside = VSet::new();
            for v in &block {
                outside.extend(sm.graph.pa(v).unwrap().iter().cloned());
            }
            let state = outside.iter().map(|v| (v.clone(), rng.random_range(0..2))).collect();
            let eq = sys.block_equilibrium(&block, &state).unwrap();
            prop_assert!(sys.equilibrium_residual(&block, &state, &eq).unwrap() <= EQUILIBRIUM_TOL);
        }
    }
}
