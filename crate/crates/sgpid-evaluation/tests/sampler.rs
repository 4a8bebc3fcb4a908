use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sgpid_evaluation::*;
use sgpid_graph::{MixedGraph, VSet};
use std::collections::BTreeMap;
use std::path::PathBuf;

fn fixed_models() -> Vec<(&'static str, StructuralModel)> {
    let fig1b = MixedGraph::load(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/graphs/fig1b.json")).unwrap();
    let triangle = MixedGraph::parse("W->X, X--Y, Y--Z, Z--X, W->Z").unwrap().with_cardinality("Y", 3).unwrap();
    let chain = MixedGraph::parse("A->B, B--C, C--D, A->D, H->A, H->D").unwrap().with_latent(["H"]).unwrap();
    [("fig1b", fig1b), ("triangle", triangle), ("chain", chain)]
        .into_iter()
        .enumerate()
        .map(|(i, (name, g))| {
            let lv = explicit_latents(&g).unwrap();
            (name, StructuralModel::random(&mut ChaCha8Rng::seed_from_u64(100 + i as u64), &lv, 1.0).unwrap())
        })
        .collect()
}

/// Every state of the listed variables.
fn states(vars: &[(String, usize)]) -> Vec<BTreeMap<String, usize>> {
    let mut out = Vec::new();
    Table::from_fn(vars.to_vec(), |s| {
        out.push(vars.iter().map(|(v, _)| v.clone()).zip(s.iter().copied()).collect());
        0.0
    })
    .unwrap();
    out
}

#[test]
fn equilibria_are_fixed_points_of_the_scan() {
    for (name, sm) in fixed_models() {
        let sys = sm.system().unwrap();
        for block in sys.blocks().into_iter().filter(|b| b.len() > 1) {
            let mut outside: VSet = VSet::new();
            for v in &block {
                outside.extend(sm.graph.pa(v).unwrap().iter().cloned());
            }
            let scope: Vec<(String, usize)> = outside.iter().map(|v| (v.clone(), sm.graph.cardinality(v).unwrap())).collect();
            for s in states(&scope) {
                let eq = block_equilibrium_exact(&sm, &block, &s).unwrap();
                assert!((eq.total() - 1.0).abs() < 1e-12);
                let r = sys.equilibrium_residual(&block, &s, &eq).unwrap();
                assert!(r <= EQUILIBRIUM_TOL, "{name} {block:?}: residual {r:e}");
            }
        }
    }
}

#[test]
fn compatible_block_mechanisms_equilibrate_to_the_block_conditional() {
    // Pairwise log-linear mechanisms are conditionals of one joint, so the
    // exact joint's block conditional reproduces every mechanism.
    for (_, sm) in fixed_models() {
        let joint = cg_joint_exact(&sm).unwrap();
        assert!((joint.total() - 1.0).abs() < 1e-12);
        for (v, cpd) in &sm.mechanisms {
            let mut scope = cpd.args();
            scope.insert(v.clone());
            let c = joint.marginal(&scope).conditional(&cpd.args()).unwrap();
            assert!(c.max_abs_diff(&cpd.table).unwrap() < 1e-10, "{v}");
        }
    }
}

#[test]
fn sampler_matches_the_exact_joint() {
    for (name, sm) in fixed_models() {
        let exact = observed_joint(&sm).unwrap();
        let data = cg_sample(&sm, 100_000, 100, 7).unwrap();
        let tv = data.empirical().unwrap().total_variation(&exact).unwrap();
        println!("{name}: TV {tv:.4}");
        assert!(tv <= 0.02, "{name}: {tv}");
    }
}

#[test]
fn trivial_block_sampler_converges_tightly() {
    let g = MixedGraph::parse("A->B, A->C, B->C").unwrap();
    let sm = StructuralModel::random(&mut ChaCha8Rng::seed_from_u64(8), &g, 1.0).unwrap();
    let data = cg_sample(&sm, 100_000, 1, 3).unwrap();
    let tv = data.empirical().unwrap().total_variation(&observed_joint(&sm).unwrap()).unwrap();
    assert!(tv <= 0.01, "{tv}");
}
