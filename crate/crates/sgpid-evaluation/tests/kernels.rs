use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sgpid_estimand::{all_fixing_sequences, district_kernel, district_kernel_ordered, reachable, Expr};
use sgpid_evaluation::*;
use sgpid_graph::random::{random_admg, random_block_safe_lvcg};
use sgpid_graph::{MixedGraph, Relation, VSet};
use sgpid_projection::{decompose, latent_project};
use std::collections::BTreeMap;

/// Every subset of `items`.
fn subsets(items: &[String]) -> Vec<VSet> {
    (0u32..1 << items.len())
        .map(|mask| items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| v.clone()).collect())
        .collect()
}

/// `t` broadcast to the scope of `like`.
fn broadcast(t: &Table, like: &Table) -> Table {
    Table::from_fn(like.scope(), |_| 1.0).unwrap().multiply(t).unwrap()
}

fn admg_model(seed: u64) -> (MixedGraph, Table) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=6);
    let g = random_admg(&mut rng, n, 0.4, 0.35);
    let sm = StructuralModel::random(&mut rng, &explicit_latents(&g).unwrap(), 1.0).unwrap();
    (g, observed_joint(&sm).unwrap())
}

/// Numeric fixing along `seq`, returning the final graph and kernel.
fn fix_along(g: &MixedGraph, p: &Table, seq: &[String]) -> (MixedGraph, Table) {
    let mut cur = g.clone();
    let mut q = p.clone();
    for v in seq {
        q = fix_table(&q, v, &cur).unwrap();
        cur = cur.fix(v).unwrap();
    }
    (cur, q)
}

struct Check {
    sets: usize,
    sequences: usize,
    worst: f64,
    graphs_agree: bool,
}

fn invariance(seed: u64) -> Check {
    let (g, p) = admg_model(seed);
    let names: Vec<String> = g.names().into_iter().collect();
    let mut check = Check { sets: 0, sequences: 0, worst: 0.0, graphs_agree: true };
    for s in subsets(&names) {
        if reachable(&s, &g).is_none() {
            continue;
        }
        let seqs = all_fixing_sequences(&s, &g, 1000);
        let (g0, q0) = fix_along(&g, &p, &seqs[0]);
        check.sets += 1;
        check.sequences += seqs.len();
        for seq in &seqs[1..] {
            let (gi, qi) = fix_along(&g, &p, seq);
            check.graphs_agree &= gi == g0;
            check.worst = check.worst.max(qi.max_abs_diff(&q0).expect("same scope"));
        }
    }
    check
}

#[test]
fn fixing_order_does_not_change_graphs_or_kernels() {
    let checks: Vec<Check> = (0..200u64).into_par_iter().map(invariance).collect();
    let worst = checks.iter().map(|c| c.worst).fold(0.0, f64::max);
    let sets: usize = checks.iter().map(|c| c.sets).sum();
    let seqs: usize = checks.iter().map(|c| c.sequences).sum();
    println!("{sets} reachable sets, {seqs} sequences, worst kernel difference {worst:e}");
    assert!(checks.iter().all(|c| c.graphs_agree));
    assert!(worst <= 1e-10);
}

#[test]
fn symbolic_district_kernels_match_numeric_fixing() {
    for seed in 0..60u64 {
        let (g, p) = admg_model(seed);
        for d in g.districts() {
            let Some(seq) = reachable(&d, &g) else {
                assert!(district_kernel(&g, &d).unwrap().is_none());
                continue;
            };
            let (_, numeric) = fix_along(&g, &p, &seq);
            let expr = district_kernel(&g, &d).unwrap().expect("reachable district");
            let symbolic = evaluate(&expr, &p).unwrap();
            let diff = numeric.max_abs_diff(&broadcast(&symbolic, &numeric)).unwrap();
            assert!(diff < 1e-10, "seed {seed}, district {d:?}: {diff}");
        }
    }
}

#[test]
fn segregated_factorization_reconstructs_the_observed_joint() {
    for seed in 0..60u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(3..=6);
        let lv = random_block_safe_lvcg(&mut rng, n, 0.45, 0.45, 2);
        let sm = StructuralModel::random(&mut rng, &lv, 1.0).unwrap();
        let p = observed_joint(&sm).unwrap();
        let sg = latent_project(&lv).unwrap();
        let dec = decompose(&sg).unwrap();
        let mut factors = Vec::new();
        for b in sg.nontrivial_blocks() {
            let given: VSet = sg.relatives(&b, Relation::Parents).unwrap().difference(&b).cloned().collect();
            factors.push(Expr::prob(b, given));
        }
        let order: BTreeMap<String, usize> =
            sg.vertex_order().unwrap().into_iter().enumerate().map(|(i, v)| (v, i)).collect();
        for d in dec.cadmg.districts() {
            factors.push(district_kernel_ordered(&dec.cadmg, &d, &order).unwrap().expect("districts of the CADMG are reachable"));
        }
        let rebuilt = evaluate(&Expr::Product { factors }, &p).unwrap();
        let diff = p.max_abs_diff(&broadcast(&rebuilt, &p)).unwrap();
        assert!(diff < 1e-12, "seed {seed}: {diff}");
    }
}
