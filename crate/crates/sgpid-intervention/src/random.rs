//! Seeded random segregation-preserving policy sets.

use crate::{check_segregation_preserving, Policy, PolicySet};
use rand::Rng;
use sgpid_graph::{MixedGraph, VSet};

/// Knobs for [`random_policy_set`].
#[derive(Debug, Clone, Copy)]
pub struct PolicyDraw {
    /// Probability that an observed random vertex becomes a target.
    pub p_target: f64,
    /// Probability that an admissible vertex joins a target's inputs.
    pub p_input: f64,
    /// Probability of a constant mechanism.
    pub p_const: f64,
    /// Probability of a deterministic table mechanism.
    pub p_deterministic: f64,
}

impl Default for PolicyDraw {
    fn default() -> Self {
        PolicyDraw { p_target: 0.3, p_input: 0.4, p_const: 0.15, p_deterministic: 0.15 }
    }
}

/// A strictly positive random table with `rows` rows of `card` entries.
pub fn random_positive_table<R: Rng + ?Sized>(rng: &mut R, rows: usize, card: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(rows * card);
    for _ in 0..rows {
        let row: Vec<f64> = (0..card).map(|_| rng.random_range(0.1..1.0)).collect();
        let s: f64 = row.iter().sum();
        t.extend(row.into_iter().map(|x| x / s));
    }
    t
}

fn random_policy<R: Rng + ?Sized>(rng: &mut R, g: &MixedGraph, target: &str, inputs: VSet, d: &PolicyDraw) -> Policy {
    let card = g.cardinality(target).expect("known target");
    let u: f64 = rng.random();
    if u < d.p_const {
        return Policy::constant(target, rng.random_range(0..card));
    }
    let rows: usize = inputs.iter().map(|z| g.cardinality(z).expect("known input")).product();
    let table = if u < d.p_const + d.p_deterministic {
        let mut t = vec![0.0; rows * card];
        for r in 0..rows {
            t[r * card + rng.random_range(0..card)] = 1.0;
        }
        t
    } else {
        random_positive_table(rng, rows, card)
    };
    Policy::cpt(g, target, inputs, &table).expect("shape matches")
}

/// Draws policy sets until one passes the segregation-preservation check
/// (at most 100 attempts), falling back to a single input-free policy.
/// Inputs are drawn from observed vertices outside the target's strict
/// exterior. Table mechanisms are used throughout so that every draw can be
/// evaluated numerically.
pub fn random_policy_set<R: Rng + ?Sized>(rng: &mut R, g: &MixedGraph, d: &PolicyDraw) -> PolicySet {
    let candidates: Vec<String> = g.observed().difference(g.fixed()).cloned().collect();
    if candidates.is_empty() {
        return PolicySet::empty();
    }
    let observed = g.observed();
    for _ in 0..100 {
        let mut policies = Vec::new();
        for a in &candidates {
            if !rng.random_bool(d.p_target) {
                continue;
            }
            let sext = g.strict_exterior(&VSet::from([a.clone()]));
            let inputs: VSet = observed
                .iter()
                .filter(|z| *z != a && !sext.contains(*z))
                .filter(|_| rng.random_bool(d.p_input))
                .cloned()
                .collect();
            policies.push(random_policy(rng, g, a, inputs, d));
        }
        let ps = PolicySet::new(policies).expect("distinct targets");
        if matches!(check_segregation_preserving(&ps, g), Ok(Ok(()))) {
            return ps;
        }
    }
    let a = &candidates[rng.random_range(0..candidates.len())];
    PolicySet::new(vec![random_policy(rng, g, a, VSet::new(), d)]).expect("single policy")
}
