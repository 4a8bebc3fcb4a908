//! Kernel operations: conditioning, marginalization, fixing and reachability.

use crate::canon::canonicalize;
use crate::expr::Expr;
use crate::{EstimandError, Result};
use sgpid_graph::{GraphError, MixedGraph, Relation, VSet};
use std::collections::BTreeMap;

fn single(v: &str) -> VSet {
    VSet::from([v.to_string()])
}

fn check_scope(e: &Expr, vars: &VSet) -> Result<()> {
    let heads = e.heads();
    let out: Vec<String> = vars.difference(&heads).cloned().collect();
    if out.is_empty() {
        Ok(())
    } else {
        Err(EstimandError::OutOfScope(out))
    }
}

/// Sums the kernel `e` over `vars`, which must be among its random variables.
pub fn kernel_marginalize(e: &Expr, vars: &VSet) -> Result<Expr> {
    check_scope(e, vars)?;
    let keep = e.free_vars().difference(vars).cloned().collect();
    Ok(canonicalize(&Expr::Marginal {
        child: Box::new(e.clone()),
        keep,
    }))
}

/// Conditions the kernel `e` on `vars`, which must be among its random variables.
pub fn kernel_condition(e: &Expr, vars: &VSet) -> Result<Expr> {
    check_scope(e, vars)?;
    let fixed: VSet = e.free_vars().difference(&e.heads()).cloned().collect();
    let given = vars.union(&fixed).cloned().collect();
    Ok(canonicalize(&Expr::Conditional {
        child: Box::new(e.clone()),
        given,
    }))
}

/// True when no other member of `v`'s district is a descendant of `v`.
pub fn fixable(v: &str, g: &MixedGraph) -> Result<bool> {
    if !g.contains(v) {
        return Err(GraphError::UnknownVertex(v.to_string()).into());
    }
    if g.is_fixed(v) {
        return Err(GraphError::NotRandom(v.to_string()).into());
    }
    let s = single(v);
    let de = g.descendants(&s);
    Ok(g.district_of(&s).intersection(&de).count() == 1)
}

/// Applies the fixing operation for `v` to the kernel `q` of `g`.
///
/// When `v` is alone in its district with only fixed parents and `q` is an
/// observed conditional over `v`, the division reduces to moving `v` behind
/// the bar. Otherwise the operation is recorded as a `Fix` node.
pub fn fix_vertex(q: &Expr, v: &str, g: &MixedGraph) -> Result<(Expr, MixedGraph)> {
    if !fixable(v, g)? {
        return Err(EstimandError::NotFixable {
            vertex: v.to_string(),
        });
    }
    let next = g.fix(v)?;
    let s = single(v);
    let isolated = g.district_of(&s).len() == 1 && g.pa(v)?.is_subset(g.fixed());
    if isolated {
        if let Some((h, given)) = q.as_prob() {
            if h.contains(v) {
                let heads = h.difference(&s).cloned().collect();
                return Ok((Expr::prob(heads, given.union(&s).cloned().collect()), next));
            }
        }
    }
    Ok((
        Expr::Fix {
            child: Box::new(q.clone()),
            vertex: v.to_string(),
            graph: g.clone(),
        },
        next,
    ))
}

/// The lexicographically first fixable vertex of `random(g) \ s`.
fn first_fixable(s: &VSet, g: &MixedGraph) -> Result<Option<String>> {
    for v in g.random().difference(s) {
        if fixable(v, g)? {
            return Ok(Some(v.clone()));
        }
    }
    Ok(None)
}

/// A fixing sequence for `random(g) \ s`, found greedily, or `None` when `s`
/// is not reachable.
pub fn reachable(s: &VSet, g: &MixedGraph) -> Option<Vec<String>> {
    let mut cur = g.clone();
    let mut seq = Vec::new();
    while !cur.random().difference(s).next().is_none() {
        let v = first_fixable(s, &cur).ok()??;
        cur = cur.fix(&v).ok()?;
        seq.push(v);
    }
    Some(seq)
}

/// Every valid fixing sequence for `random(g) \ s`, stopping after `cap`.
pub fn all_fixing_sequences(s: &VSet, g: &MixedGraph, cap: usize) -> Vec<Vec<String>> {
    fn go(
        s: &VSet,
        g: &MixedGraph,
        prefix: &mut Vec<String>,
        out: &mut Vec<Vec<String>>,
        cap: usize,
    ) {
        if out.len() >= cap {
            return;
        }
        let todo: Vec<String> = g.random().difference(s).cloned().collect();
        if todo.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for v in todo {
            if fixable(&v, g).unwrap_or(false) {
                let next = g.fix(&v).expect("fixable vertices are random");
                prefix.push(v);
                go(s, &next, prefix, out, cap);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(s, g, &mut Vec::new(), &mut out, cap);
    out
}

/// The conditioning set of `v` in the district factorization: its district
/// among the vertices up to `v` in `order`, with their parents, minus `v`.
/// Fixed vertices missing from `order` count as earlier than every vertex.
pub fn markov_pillow(g: &MixedGraph, v: &str, order: &[String]) -> Result<VSet> {
    let pos = order
        .iter()
        .position(|w| w == v)
        .ok_or_else(|| GraphError::UnknownVertex(v.to_string()))?;
    let names = g.names();
    let mut keep: VSet = order[..=pos].iter().filter(|w| names.contains(*w)).cloned().collect();
    keep.extend(g.fixed().iter().filter(|f| !order.contains(f)).cloned());
    let sub = g.induced_subgraph(&keep)?;
    let dis = sub.district_of(&single(v));
    let mut mp = sub.relatives(&dis, Relation::Parents)?;
    mp.extend(dis);
    mp.remove(v);
    Ok(mp)
}

/// The observed factors `p(V | mp(V))` of every random vertex, in block order.
pub fn initial_factors(g: &MixedGraph) -> Result<Vec<Expr>> {
    initial_factors_in(g, &g.vertex_order()?)
}

/// As [`initial_factors`], with pillows taken along `order`, which may also
/// place fixed vertices.
pub fn initial_factors_in(g: &MixedGraph, order: &[String]) -> Result<Vec<Expr>> {
    let random = g.random();
    order
        .iter()
        .filter(|v| random.contains(*v))
        .map(|v| Ok(Expr::prob(single(v), markov_pillow(g, v, order)?)))
        .collect()
}

struct Group {
    district: VSet,
    factors: Vec<Expr>,
}

/// The kernel of district `d` obtained by fixing `random(g) \ d` in greedy
/// order, or `None` when `d` is not reachable.
///
/// Factors are tracked per district of the current graph, so fixing a vertex
/// only touches the factors of its own district. When a fix leaves factors
/// that cannot be attributed to a single new district, the result falls back
/// to an explicit chain of `Fix` nodes over the full factorization.
pub fn district_kernel(g: &MixedGraph, d: &VSet) -> Result<Option<Expr>> {
    district_kernel_ordered(g, d, &BTreeMap::new())
}

/// As [`district_kernel`], with `order` giving positions in a topological
/// order of the full graph the district graph was taken from. The order
/// decides which conditioning vertices count as earlier than a district when
/// factors are split after a fix. An empty map uses the district graph's own
/// order.
pub fn district_kernel_ordered(
    g: &MixedGraph,
    d: &VSet,
    order: &BTreeMap<String, usize>,
) -> Result<Option<Expr>> {
    let pos: BTreeMap<String, usize> = if order.is_empty() {
        g.vertex_order()?
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect()
    } else {
        order.clone()
    };
    let mut sequence: Vec<(usize, String)> = pos.iter().map(|(v, i)| (*i, v.clone())).collect();
    sequence.sort();
    let sequence: Vec<String> = sequence.into_iter().map(|(_, v)| v).collect();
    let initial = initial_factors_in(g, &sequence)?;
    let mut groups: Vec<Group> = g
        .districts()
        .into_iter()
        .map(|district| {
            let factors = initial
                .iter()
                .filter(|f| f.heads().is_subset(&district))
                .cloned()
                .collect();
            Group {
                district,
                factors,
            }
        })
        .collect();
    let mut cur = g.clone();
    let mut history: Vec<(String, MixedGraph)> = Vec::new();
    let mut grouped = true;
    while let Some(v) = first_fixable(d, &cur)? {
        let next = cur.fix(&v)?;
        history.push((v.clone(), cur.clone()));
        if grouped {
            grouped = fix_in_groups(&mut groups, &v, &next, &pos)?;
        }
        cur = next;
    }
    if cur.random().difference(d).next().is_some() {
        return Ok(None);
    }
    if grouped {
        let factors = groups
            .into_iter()
            .filter(|gr| gr.district.is_subset(d))
            .flat_map(|gr| gr.factors)
            .collect();
        return Ok(Some(Expr::product(factors)));
    }
    let mut e = Expr::product(initial);
    for (v, snapshot) in history {
        e = Expr::Fix {
            child: Box::new(e),
            vertex: v,
            graph: snapshot,
        };
    }
    Ok(Some(e))
}

/// Fixes `v` inside its group and splits the group along the districts of
/// `next`. Returns false when the split is not clean: a factor's heads span
/// several new districts, or a factor conditions on a random vertex that is
/// neither in its district, a parent of it, nor earlier than all of it.
fn fix_in_groups(
    groups: &mut Vec<Group>,
    v: &str,
    next: &MixedGraph,
    pos: &BTreeMap<String, usize>,
) -> Result<bool> {
    let gi = groups
        .iter()
        .position(|gr| gr.district.contains(v))
        .expect("every random vertex has a group");
    let Group { district, factors } = groups.remove(gi);
    let (mention, mut rest): (Vec<Expr>, Vec<Expr>) =
        factors.into_iter().partition(|f| f.free_vars().contains(v));
    let lone = match mention.as_slice() {
        [f] => f.as_prob().filter(|(h, _)| h.contains(v)),
        _ => None,
    };
    match lone {
        Some((h, given)) => {
            let heads: VSet = h.iter().filter(|w| *w != v).cloned().collect();
            if !heads.is_empty() {
                rest.push(Expr::prob(heads, given));
            }
        }
        None => rest.push(Expr::sum(single(v), Expr::product(mention))),
    }
    let remaining: VSet = district.iter().filter(|w| *w != v).cloned().collect();
    if remaining.is_empty() {
        return Ok(true);
    }
    let mut parts: Vec<VSet> = Vec::new();
    for u in &remaining {
        if !parts.iter().any(|p| p.contains(u)) {
            parts.push(next.district_of(&single(u)));
        }
    }
    let random = next.random();
    let mut split: Vec<Group> = parts
        .into_iter()
        .map(|district| Group {
            district,
            factors: Vec::new(),
        })
        .collect();
    for f in rest {
        let heads = f.heads();
        let Some(target) = split
            .iter_mut()
            .find(|gr| !heads.is_empty() && heads.is_subset(&gr.district))
        else {
            return Ok(false);
        };
        target.factors.push(f);
    }
    for gr in &split {
        let mut allowed = next.relatives(&gr.district, Relation::Parents)?;
        allowed.extend(gr.district.iter().cloned());
        let free: VSet = gr.factors.iter().flat_map(Expr::free_vars).collect();
        let first = gr.district.iter().filter_map(|m| pos.get(m)).min().copied().unwrap_or(0);
        let earlier = |w: &String| pos.get(w).is_some_and(|p| *p < first);
        if free.intersection(&random).any(|w| !allowed.contains(w) && !earlier(w)) {
            return Ok(false);
        }
    }
    groups.extend(split);
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sgpid_graph::vset;

    fn frontdoor() -> MixedGraph {
        MixedGraph::parse("A->M, M->Y, A<->Y").unwrap()
    }

    #[test]
    fn fixability_in_the_front_door_graph() {
        let g = frontdoor();
        assert!(!fixable("A", &g).unwrap());
        assert!(fixable("M", &g).unwrap());
        assert!(fixable("Y", &g).unwrap());
        assert!(fixable("X", &MixedGraph::parse("X").unwrap()).unwrap());
        assert!(fixable("Q", &g).is_err());
    }

    #[test]
    fn fixing_an_isolated_parentless_vertex_conditions() {
        let g = MixedGraph::parse("V, W").unwrap();
        let q = Expr::prob(vset(["V", "W"]), VSet::new());
        let (e, next) = fix_vertex(&q, "V", &g).unwrap();
        assert_eq!(e, Expr::prob(vset(["W"]), vset(["V"])));
        assert!(next.is_fixed("V"));
    }

    #[test]
    fn reachability() {
        let g = frontdoor();
        assert_eq!(
            reachable(&vset(["Y"]), &g),
            Some(vec!["M".to_string(), "A".to_string()])
        );
        assert_eq!(reachable(&g.random(), &g), Some(vec![]));
        let bow = MixedGraph::parse("A->Y, A<->Y").unwrap();
        assert_eq!(reachable(&vset(["Y"]), &bow), None);
        assert_eq!(reachable(&vset(["A"]), &bow), Some(vec!["Y".to_string()]));
    }

    #[test]
    fn marginalize_and_condition() {
        let p = Expr::prob(vset(["A", "B"]), VSet::new());
        assert_eq!(
            kernel_marginalize(&p, &vset(["B"])).unwrap(),
            Expr::prob(vset(["A"]), VSet::new())
        );
        assert_eq!(
            kernel_condition(&p, &vset(["A"])).unwrap(),
            Expr::prob(vset(["B"]), vset(["A"]))
        );
        assert!(kernel_marginalize(&p, &vset(["C"])).is_err());
        let chain = Expr::product(vec![
            kernel_marginalize(&p, &vset(["B"])).unwrap(),
            kernel_condition(&p, &vset(["A"])).unwrap(),
        ]);
        assert_eq!(canonicalize(&chain), p);
    }

    #[test]
    fn front_door_district_kernel() {
        let g = frontdoor();
        let k = district_kernel(&g, &vset(["Y"])).unwrap().unwrap();
        assert_eq!(
            crate::render::plain(&canonicalize(&k)),
            "Σ_{A} p(A) p(Y|A,M)"
        );
    }
}
