//! Numeric semantics of estimand expressions against an observed joint.

use crate::model::{Cpd, System};
use crate::table::Table;
use crate::{EvalError, Result};
use sgpid_estimand::{Assignment, BlockMechanism, Estimand, Expr};
use sgpid_graph::{MixedGraph, VSet};
use sgpid_intervention::Policy;
use std::collections::BTreeMap;

/// Tolerance for the check that an estimand does not vary with an inert variable.
pub const INERT_TOL: f64 = 1e-9;

/// Evaluates `e` to a table over its free variables, reading observed
/// margins from `p`. Symbolic substitutions stay as free table dimensions.
pub fn evaluate(e: &Expr, p: &Table) -> Result<Table> {
    match e {
        Expr::ObservedJoint { vars } => {
            if let Some(v) = vars.iter().find(|v| !p.contains(v)) {
                return Err(EvalError::Unbound(v.clone()));
            }
            Ok(p.marginal(vars))
        }
        Expr::Conditional { child, given } => evaluate(child, p)?.conditional(given),
        Expr::Marginal { child, keep } => Ok(evaluate(child, p)?.marginal(keep)),
        Expr::Product { factors } => {
            factors.iter().try_fold(Table::scalar(1.0), |acc, f| acc.multiply(&evaluate(f, p)?))
        }
        Expr::SumOver { vars, child } => Ok(evaluate(child, p)?.sum_out(vars)),
        Expr::Fix { child, vertex, graph } => fix_table(&evaluate(child, p)?, vertex, graph),
        Expr::Substitute { child, assignments } => substitute(&evaluate(child, p)?, assignments, &cards_of(p)),
        Expr::PolicyFactor { policy } => Ok(Cpd::from_policy(policy, &cards_of(p))?.table),
        Expr::BlockEquilibrium { block, given, mechanisms } => block_equilibrium(block, given, mechanisms, p),
    }
}

/// Evaluates an estimand and drops its inert variables after checking that
/// the table is constant along each of them.
pub fn evaluate_estimand(e: &Estimand, p: &Table) -> Result<Table> {
    let mut t = evaluate(&e.expr, p)?;
    for v in &e.inert {
        if !t.is_constant_along(v, INERT_TOL)? {
            return Err(EvalError::InertVaries(v.clone()));
        }
        t = t.slice(v, 0)?;
    }
    Ok(t)
}

fn cards_of(p: &Table) -> BTreeMap<String, usize> {
    p.scope().into_iter().collect()
}

/// The fixing operation on a kernel table: `q / q(v | mb(v))`, where the
/// Markov blanket is taken in `g` and the kernel's random variables are the
/// random vertices of `g`.
pub fn fix_table(q: &Table, v: &str, g: &MixedGraph) -> Result<Table> {
    let random = g.random();
    let dis = g.district_of(&VSet::from([v.to_string()]));
    let mut mb: VSet = g.relatives(&dis, sgpid_graph::Relation::Parents)?;
    mb.extend(dis);
    mb.remove(v);
    let drop: VSet = q.var_set().into_iter().filter(|x| random.contains(x) && !mb.contains(x) && x != v).collect();
    let num = q.sum_out(&drop);
    let den = num.sum_out(&VSet::from([v.to_string()]));
    q.divide(&num.divide(&den)?)
}

/// Replaces variables per the assignments: values slice, symbolic values
/// stay free, policies compose with the child.
fn substitute(t: &Table, assignments: &BTreeMap<String, Assignment>, cards: &BTreeMap<String, usize>) -> Result<Table> {
    let mut rules: BTreeMap<String, Rule> = BTreeMap::new();
    for (k, a) in assignments {
        match a {
            Assignment::Symbolic => {}
            Assignment::Value { value } => {
                rules.insert(k.clone(), Rule::Value(*value));
            }
            Assignment::Policy { policy } => {
                rules.insert(k.clone(), Rule::Map(deterministic_map(policy, cards)?));
            }
        }
    }
    let mut scope: BTreeMap<String, usize> = t.scope().into_iter().filter(|(v, _)| !rules.contains_key(v)).collect();
    for r in rules.values() {
        if let Rule::Map(m) = r {
            for z in &m.inputs {
                if !rules.contains_key(z) {
                    let c = *cards.get(z).ok_or_else(|| EvalError::Unbound(z.clone()))?;
                    scope.insert(z.clone(), c);
                }
            }
        }
    }
    let scope: Vec<(String, usize)> = scope.into_iter().collect();
    let names: Vec<String> = scope.iter().map(|(v, _)| v.clone()).collect();
    let mut err = None;
    let out = Table::from_fn(scope, |s| {
        let mut state: BTreeMap<String, usize> = names.iter().cloned().zip(s.iter().copied()).collect();
        for k in rules.keys() {
            if let Err(e) = resolve(k, &rules, &mut state, 0) {
                err.get_or_insert(e);
                return 0.0;
            }
        }
        t.get(&state).unwrap_or_else(|e| {
            err.get_or_insert(e);
            0.0
        })
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

enum Rule {
    Value(usize),
    Map(DeterministicMap),
}

struct DeterministicMap {
    inputs: Vec<String>,
    cpd: Cpd,
    card: usize,
}

fn deterministic_map(policy: &Policy, cards: &BTreeMap<String, usize>) -> Result<DeterministicMap> {
    let cpd = Cpd::from_policy(policy, cards)?;
    let card = cards[&policy.target];
    Ok(DeterministicMap { inputs: policy.inputs.iter().cloned().collect(), cpd, card })
}

fn resolve(k: &str, rules: &BTreeMap<String, Rule>, state: &mut BTreeMap<String, usize>, depth: usize) -> Result<usize> {
    if let Some(x) = state.get(k) {
        return Ok(*x);
    }
    if depth > rules.len() {
        return Err(EvalError::Cyclic);
    }
    let x = match &rules[k] {
        Rule::Value(v) => *v,
        Rule::Map(m) => {
            for z in &m.inputs {
                if rules.contains_key(z) {
                    resolve(z, rules, state, depth + 1)?;
                }
            }
            let mut best = (0, f64::NEG_INFINITY);
            for a in 0..m.card {
                state.insert(m.cpd.target.clone(), a);
                let w = m.cpd.table.get(state)?;
                if w > best.1 {
                    best = (a, w);
                }
            }
            state.remove(&m.cpd.target);
            best.0
        }
    };
    state.insert(k.to_string(), x);
    Ok(x)
}

fn block_equilibrium(
    block: &VSet,
    given: &VSet,
    mechanisms: &BTreeMap<String, BlockMechanism>,
    p: &Table,
) -> Result<Table> {
    let cards = cards_of(p);
    let mut mechs = BTreeMap::new();
    for v in block {
        let m = mechanisms.get(v).ok_or_else(|| EvalError::Unbound(v.clone()))?;
        let cpd = match m {
            BlockMechanism::Observed { given: args } => {
                let mut scope = args.clone();
                scope.insert(v.clone());
                let t = evaluate(&Expr::ObservedJoint { vars: scope }, p)?.conditional(args)?;
                Cpd::new(v.clone(), t)?
            }
            BlockMechanism::Policy { policy } => Cpd::from_policy(policy, &cards)?,
        };
        mechs.insert(v.clone(), cpd);
    }
    let sys = System::new(&mechs)?;
    if let Some(x) = sys.exogenous().iter().find(|x| !given.contains(*x)) {
        return Err(EvalError::Unbound(x.clone()));
    }
    sys.joint()
}
