//! Structural models with finite-state mechanisms, their block equilibria,
//! exact joints and a seeded sampler.

use crate::table::{advance, Table};
use crate::{Dataset, EvalError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sgpid_graph::{Edge, EdgeKind, MixedGraph, VSet, VertexInfo};
use sgpid_intervention::{Mechanism, Policy, PolicySet};
use std::collections::{BTreeMap, HashMap};

/// Fixed-point tolerance of the equilibrium solver.
pub const EQUILIBRIUM_TOL: f64 = 1e-12;
/// Iteration cap of the equilibrium solver.
pub const EQUILIBRIUM_MAX_ITER: usize = 1_000_000;

/// A conditional table `p(target | args)` stored over `args ∪ {target}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpd {
    pub target: String,
    pub table: Table,
}

impl Cpd {
    /// Checks that the table contains the target and that every row sums to one.
    pub fn new(target: impl Into<String>, table: Table) -> Result<Cpd> {
        let target = target.into();
        if !table.contains(&target) {
            return Err(EvalError::BadTable(format!("mechanism table lacks `{target}`")));
        }
        let cpd = Cpd { target, table };
        let sums = cpd.table.marginal(&cpd.args());
        if let Some(bad) = sums.data().iter().find(|s| (*s - 1.0).abs() > 1e-9) {
            return Err(EvalError::BadTable(format!("a row of the `{}` mechanism sums to {bad}", cpd.target)));
        }
        if cpd.table.data().iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(EvalError::BadTable(format!("the `{}` mechanism has a negative entry", cpd.target)));
        }
        Ok(cpd)
    }

    pub fn args(&self) -> VSet {
        self.table.vars().iter().filter(|v| **v != self.target).cloned().collect()
    }

    pub fn is_positive(&self) -> bool {
        self.table.data().iter().all(|x| *x > 0.0)
    }

    /// The table of a policy, with cardinalities from `cards`.
    pub fn from_policy(p: &Policy, cards: &BTreeMap<String, usize>) -> Result<Cpd> {
        let card = |v: &String| cards.get(v).copied().ok_or_else(|| EvalError::Unbound(v.clone()));
        let mut scope = vec![(p.target.clone(), card(&p.target)?)];
        for z in &p.inputs {
            scope.push((z.clone(), card(z)?));
        }
        let shape: Vec<usize> = p.inputs.iter().map(card).chain([card(&p.target)]).collect::<Result<_>>()?;
        let flat = match &p.mechanism {
            Mechanism::Param { .. } => return Err(EvalError::UnresolvedPolicy(p.target.clone())),
            Mechanism::Const { value } => {
                let c = shape[shape.len() - 1];
                if *value >= c {
                    return Err(EvalError::BadTable(format!("constant {value} outside 0..{c}")));
                }
                let rows: usize = shape[..shape.len() - 1].iter().product();
                (0..rows * c).map(|i| if i % c == *value { 1.0 } else { 0.0 }).collect::<Vec<f64>>()
            }
            Mechanism::Cpt { table } => table.flatten(&shape).map_err(EvalError::BadTable)?,
        };
        // `flat` is ordered (sorted inputs, target); reorder into sorted scope order.
        let inputs: Vec<&String> = p.inputs.iter().collect();
        let mut vars: Vec<String> = scope.iter().map(|(v, _)| v.clone()).collect();
        vars.sort();
        let table = Table::from_fn(scope, |s| {
            let mut idx = 0;
            for (k, z) in inputs.iter().enumerate() {
                let pos = vars.iter().position(|v| v == *z).expect("input in scope");
                idx = idx * shape[k] + s[pos];
            }
            let pos = vars.iter().position(|v| *v == p.target).expect("target in scope");
            flat[idx * shape[shape.len() - 1] + s[pos]]
        })?;
        Cpd::new(p.target.clone(), table)
    }
}

/// A set of mechanisms compiled against one global variable order. Variables
/// that appear only as arguments are exogenous and must be supplied.
#[derive(Debug, Clone)]
pub struct System {
    names: Vec<String>,
    cards: Vec<usize>,
    /// Per variable: (global index, stride) for each table variable, or `None` when exogenous.
    units: Vec<Option<Vec<(usize, usize)>>>,
    tables: Vec<Option<Vec<f64>>>,
    /// Blocks in topological order, members in name order.
    blocks: Vec<Vec<usize>>,
    /// Variables outside each block that its members read.
    parents: Vec<Vec<usize>>,
}

impl System {
    /// Compiles the mechanisms. Blocks are the connected components of mutual
    /// dependence; any other dependence must run from an earlier block.
    pub fn new(mechanisms: &BTreeMap<String, Cpd>) -> Result<System> {
        let mut scope: BTreeMap<String, usize> = BTreeMap::new();
        for cpd in mechanisms.values() {
            for (v, c) in cpd.table.scope() {
                if let Some(old) = scope.insert(v.clone(), c) {
                    if old != c {
                        return Err(EvalError::BadTable(format!("`{v}` has cardinalities {old} and {c}")));
                    }
                }
            }
        }
        let (names, cards): (Vec<String>, Vec<usize>) = scope.into_iter().unzip();
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let n = names.len();
        let mut units = vec![None; n];
        let mut tables = vec![None; n];
        let mut args = vec![Vec::new(); n];
        for (name, cpd) in mechanisms {
            if *name != cpd.target {
                return Err(EvalError::BadTable(format!("mechanism keyed `{name}` targets `{}`", cpd.target)));
            }
            let i = index[name.as_str()];
            let mut strides = Vec::new();
            let mut s = 1;
            for (v, c) in cpd.table.vars().iter().zip(cpd.table.cards()).rev() {
                strides.push((index[v.as_str()], s));
                s *= c;
            }
            units[i] = Some(strides);
            tables[i] = Some(cpd.table.data().to_vec());
            args[i] = cpd.args().iter().map(|a| index[a.as_str()]).collect();
        }
        let endo: Vec<usize> = (0..n).filter(|i| units[*i].is_some()).collect();
        // Union-find over mutual dependence.
        let mut root: Vec<usize> = (0..n).collect();
        fn find(root: &mut [usize], x: usize) -> usize {
            let mut x = x;
            while root[x] != x {
                root[x] = root[root[x]];
                x = root[x];
            }
            x
        }
        for &v in &endo {
            for &a in &args[v] {
                if args[a].contains(&v) {
                    let (ra, rv) = (find(&mut root, a), find(&mut root, v));
                    root[ra.max(rv)] = ra.min(rv);
                }
            }
        }
        let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &v in &endo {
            let r = find(&mut root, v);
            comps.entry(r).or_default().push(v);
        }
        let comps: Vec<Vec<usize>> = comps.into_values().collect();
        let mut comp_of = vec![usize::MAX; n];
        for (k, c) in comps.iter().enumerate() {
            for &v in c {
                comp_of[v] = k;
            }
        }
        let mut needs: Vec<Vec<usize>> = vec![Vec::new(); comps.len()];
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); comps.len()];
        for (k, c) in comps.iter().enumerate() {
            let mut ps: Vec<usize> = c.iter().flat_map(|v| args[*v].iter().copied()).filter(|a| comp_of[*a] != k).collect();
            ps.sort_unstable();
            ps.dedup();
            needs[k] = ps.iter().filter(|a| comp_of[**a] != usize::MAX).map(|a| comp_of[*a]).collect();
            parents[k] = ps;
        }
        // Kahn's algorithm, smallest component first for determinism.
        let mut indeg: Vec<usize> = needs.iter().map(|d| d.iter().collect::<std::collections::BTreeSet<_>>().len()).collect();
        let mut users: Vec<Vec<usize>> = vec![Vec::new(); comps.len()];
        for (k, d) in needs.iter().enumerate() {
            let uniq: std::collections::BTreeSet<usize> = d.iter().copied().collect();
            for j in uniq {
                users[j].push(k);
            }
        }
        let mut ready: std::collections::BTreeSet<usize> = (0..comps.len()).filter(|k| indeg[*k] == 0).collect();
        let mut order = Vec::new();
        while let Some(k) = ready.pop_first() {
            order.push(k);
            for &u in &users[k] {
                indeg[u] -= 1;
                if indeg[u] == 0 {
                    ready.insert(u);
                }
            }
        }
        if order.len() != comps.len() {
            return Err(EvalError::Cyclic);
        }
        let blocks = order.iter().map(|k| comps[*k].clone()).collect();
        let parents = order.iter().map(|k| parents[*k].clone()).collect();
        Ok(System { names, cards, units, tables, blocks, parents })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Blocks in topological order.
    pub fn blocks(&self) -> Vec<VSet> {
        self.blocks.iter().map(|b| b.iter().map(|i| self.names[*i].clone()).collect()).collect()
    }

    /// Exogenous variables (read but never generated).
    pub fn exogenous(&self) -> VSet {
        (0..self.names.len()).filter(|i| self.units[*i].is_none()).map(|i| self.names[i].clone()).collect()
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.names.binary_search_by(|v| v.as_str().cmp(name)).map_err(|_| EvalError::Unbound(name.to_string()))
    }

    /// `p(x_v | x_args)` at the global state `x`.
    fn prob(&self, v: usize, x: &[usize]) -> f64 {
        let strides = self.units[v].as_ref().expect("endogenous");
        let idx: usize = strides.iter().map(|(g, s)| x[*g] * s).sum();
        self.tables[v].as_ref().expect("endogenous")[idx]
    }

    fn block_index(&self, block: &VSet) -> Result<usize> {
        let ids: Vec<usize> = block.iter().map(|v| self.index(v)).collect::<Result<_>>()?;
        self.blocks.iter().position(|b| *b == ids).ok_or_else(|| EvalError::NotABlock(block.clone()))
    }

    /// Stationary law of the systematic-scan Gibbs chain on block `k`, with
    /// outside variables read from `x`. Members are updated in name order.
    fn equilibrium(&self, k: usize, x: &[usize]) -> Result<Vec<f64>> {
        let members = &self.blocks[k];
        let cards: Vec<usize> = members.iter().map(|m| self.cards[*m]).collect();
        let size: usize = cards.iter().product();
        let mut state = x.to_vec();
        // cond[j][s] = p(member j takes its value in s | rest of s).
        let mut cond = vec![vec![0.0; size]; members.len()];
        let mut digits = vec![0; members.len()];
        for s in 0..size {
            for (j, m) in members.iter().enumerate() {
                state[*m] = digits[j];
            }
            for (j, m) in members.iter().enumerate() {
                cond[j][s] = self.prob(*m, &state);
            }
            advance(&mut digits, &cards);
        }
        if members.len() == 1 {
            return Ok(cond.pop().expect("one member"));
        }
        let mut strides = vec![1; members.len()];
        for j in (0..members.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * cards[j + 1];
        }
        let mut pi = vec![1.0 / size as f64; size];
        let mut next = vec![0.0; size];
        for _ in 0..EQUILIBRIUM_MAX_ITER {
            let prev = pi.clone();
            for j in 0..members.len() {
                sweep_site(&pi, &mut next, &cond[j], cards[j], strides[j]);
                std::mem::swap(&mut pi, &mut next);
            }
            let diff = pi.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if diff <= EQUILIBRIUM_TOL * 0.01 {
                return Ok(pi);
            }
        }
        Err(EvalError::NoConvergence(self.blocks()[k].clone()))
    }

    /// The block law `p*(block | outside state)` as a table over the block.
    pub fn block_equilibrium(&self, block: &VSet, outside: &BTreeMap<String, usize>) -> Result<Table> {
        let k = self.block_index(block)?;
        let x = self.state_from(outside, &self.parents[k])?;
        let pi = self.equilibrium(k, &x)?;
        Table::new(self.blocks[k].iter().map(|m| (self.names[*m].clone(), self.cards[*m])).collect(), pi)
    }

    /// Largest change of `dist` under one further sweep of the block chain.
    pub fn equilibrium_residual(&self, block: &VSet, outside: &BTreeMap<String, usize>, dist: &Table) -> Result<f64> {
        let k = self.block_index(block)?;
        let members = &self.blocks[k];
        let mut x = self.state_from(outside, &self.parents[k])?;
        let cards: Vec<usize> = members.iter().map(|m| self.cards[*m]).collect();
        let size: usize = cards.iter().product();
        let mut strides = vec![1; members.len()];
        for j in (0..members.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * cards[j + 1];
        }
        let mut pi = dist.data().to_vec();
        let start = pi.clone();
        let mut next = vec![0.0; size];
        for (j, m) in members.iter().enumerate() {
            let mut digits = vec![0; members.len()];
            let mut cond = vec![0.0; size];
            for c in cond.iter_mut() {
                for (i, mm) in members.iter().enumerate() {
                    x[*mm] = digits[i];
                }
                *c = self.prob(*m, &x);
                advance(&mut digits, &cards);
            }
            sweep_site(&pi, &mut next, &cond, cards[j], strides[j]);
            std::mem::swap(&mut pi, &mut next);
        }
        Ok(pi.iter().zip(&start).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    fn state_from(&self, given: &BTreeMap<String, usize>, needed: &[usize]) -> Result<Vec<usize>> {
        let mut x = vec![0; self.names.len()];
        for &i in needed {
            x[i] = *given.get(&self.names[i]).ok_or_else(|| EvalError::Unbound(self.names[i].clone()))?;
        }
        Ok(x)
    }

    /// Exact joint over every variable, chaining block equilibria in
    /// topological order. Exogenous variables stay as conditioning arguments.
    pub fn joint(&self) -> Result<Table> {
        let scope: Vec<(String, usize)> = self.names.iter().cloned().zip(self.cards.iter().copied()).collect();
        let mut cache: Vec<HashMap<Vec<usize>, Vec<f64>>> = vec![HashMap::new(); self.blocks.len()];
        let mut err = None;
        let t = Table::from_fn(scope, |x| {
            if err.is_some() {
                return 0.0;
            }
            let mut p = 1.0;
            for (k, members) in self.blocks.iter().enumerate() {
                let key: Vec<usize> = self.parents[k].iter().map(|i| x[*i]).collect();
                let pi = match cache[k].get(&key) {
                    Some(pi) => pi,
                    None => match self.equilibrium(k, x) {
                        Ok(pi) => cache[k].entry(key).or_insert(pi),
                        Err(e) => {
                            err = Some(e);
                            return 0.0;
                        }
                    },
                };
                let mut idx = 0;
                for m in members {
                    idx = idx * self.cards[*m] + x[*m];
                }
                p *= pi[idx];
            }
            p
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(t),
        }
    }

    /// One draw: blocks in order, each nontrivial block started uniformly and
    /// run for `sweeps` systematic Gibbs sweeps.
    fn draw<R: Rng>(&self, rng: &mut R, sweeps: usize, x: &mut [usize]) {
        for members in &self.blocks {
            if members.len() > 1 {
                for m in members {
                    x[*m] = rng.random_range(0..self.cards[*m]);
                }
            }
            let rounds = if members.len() == 1 { 1 } else { sweeps };
            for _ in 0..rounds {
                for m in members {
                    let c = self.cards[*m];
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut pick = c - 1;
                    for val in 0..c {
                        x[*m] = val;
                        acc += self.prob(*m, x);
                        if u < acc {
                            pick = val;
                            break;
                        }
                    }
                    x[*m] = pick;
                }
            }
        }
    }
}

/// One site update: `next(s) = cond(s) * Σ_k pi(s with site = k)`.
fn sweep_site(pi: &[f64], next: &mut [f64], cond: &[f64], card: usize, stride: usize) {
    for (s, slot) in next.iter_mut().enumerate() {
        let own = (s / stride) % card;
        let base = s - own * stride;
        let mass: f64 = (0..card).map(|k| pi[base + k * stride]).sum();
        *slot = cond[s] * mass;
    }
}

/// A latent-variable chain graph with one mechanism per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralModel {
    pub graph: MixedGraph,
    pub mechanisms: BTreeMap<String, Cpd>,
}

impl StructuralModel {
    /// Checks that every vertex has a strictly positive mechanism whose
    /// arguments are exactly its parents and neighbours.
    pub fn new(graph: MixedGraph, mechanisms: BTreeMap<String, Cpd>) -> Result<StructuralModel> {
        if let Some(e) = graph.edges_of(EdgeKind::Bidirected).next() {
            return Err(EvalError::Bidirected(e.clone()));
        }
        if !graph.fixed().is_empty() {
            return Err(EvalError::BadTable("structural models have no fixed vertices".into()));
        }
        for v in graph.names() {
            let cpd = mechanisms.get(&v).ok_or_else(|| EvalError::Unbound(v.clone()))?;
            let mut expected: VSet = graph.pa(&v)?.clone();
            expected.extend(graph.nb(&v)?.iter().cloned());
            if cpd.args() != expected {
                return Err(EvalError::MechanismMismatch { vertex: v.clone(), expected, found: cpd.args() });
            }
            for (a, c) in cpd.table.scope() {
                if graph.cardinality(&a)? != c {
                    return Err(EvalError::BadTable(format!("`{a}` has cardinality {c} in the `{v}` mechanism")));
                }
            }
            if !cpd.is_positive() {
                return Err(EvalError::NonPositive(v.clone()));
            }
        }
        if mechanisms.len() != graph.names().len() {
            return Err(EvalError::BadTable("mechanism for a vertex outside the graph".into()));
        }
        Ok(StructuralModel { graph, mechanisms })
    }

    /// Random pairwise log-linear mechanisms: each vertex has a potential over
    /// itself and its parents, each undirected edge a potential over its
    /// endpoints, and `p(V | pa, nb)` is proportional to the exponentiated
    /// sum of the potentials touching V. Potentials are Normal(0, scale).
    pub fn random<R: Rng + ?Sized>(rng: &mut R, graph: &MixedGraph, scale: f64) -> Result<StructuralModel> {
        let normal = Normal::new(0.0, scale).map_err(|e| EvalError::BadTable(e.to_string()))?;
        let card = |v: &str| graph.cardinality(v);
        let mut node: BTreeMap<String, Table> = BTreeMap::new();
        for v in graph.names() {
            let mut scope = vec![(v.clone(), card(&v)?)];
            for p in graph.pa(&v)? {
                scope.push((p.clone(), card(p)?));
            }
            node.insert(v.clone(), Table::from_fn(scope, |_| normal.sample(&mut *rng))?);
        }
        let mut pair: BTreeMap<(String, String), Table> = BTreeMap::new();
        for e in graph.edges_of(EdgeKind::Undirected) {
            let scope = vec![(e.tail.clone(), card(&e.tail)?), (e.head.clone(), card(&e.head)?)];
            pair.insert((e.tail.clone(), e.head.clone()), Table::from_fn(scope, |_| normal.sample(&mut *rng))?);
        }
        let mut mechanisms = BTreeMap::new();
        for v in graph.names() {
            let mut energy = node[&v].clone();
            for ((a, b), t) in &pair {
                if *a == v || *b == v {
                    energy = energy.add(t)?;
                }
            }
            let weights = Table::new(energy.scope(), energy.data().iter().map(|x| x.exp()).collect())?;
            let args: VSet = weights.vars().iter().filter(|x| **x != v).cloned().collect();
            let table = weights.conditional(&args)?;
            mechanisms.insert(v.clone(), Cpd::new(v.clone(), table)?);
        }
        StructuralModel::new(graph.clone(), mechanisms)
    }

    pub fn cards(&self) -> BTreeMap<String, usize> {
        self.graph.vertices().map(|v| (v.name.clone(), v.cardinality)).collect()
    }

    /// The compiled observational system.
    pub fn system(&self) -> Result<System> {
        System::new(&self.mechanisms)
    }

    /// The system with each target's mechanism replaced by its policy.
    pub fn intervened_system(&self, ps: &PolicySet) -> Result<System> {
        let cards = self.cards();
        let mut mechs = self.mechanisms.clone();
        for p in ps.iter() {
            if !mechs.contains_key(&p.target) {
                return Err(EvalError::Unbound(p.target.clone()));
            }
            mechs.insert(p.target.clone(), Cpd::from_policy(p, &cards)?);
        }
        System::new(&mechs)
    }

    pub fn observed(&self) -> VSet {
        self.graph.observed()
    }
}

/// Replaces every bidirected edge `A <-> B` by a latent parent `U_A_B` of both.
pub fn explicit_latents(g: &MixedGraph) -> Result<MixedGraph> {
    let bi: Vec<Edge> = g.edges_of(EdgeKind::Bidirected).cloned().collect();
    let mut out = g.without_edges(&bi);
    for e in &bi {
        let u = format!("U_{}_{}", e.tail, e.head);
        out = out.with_vertex(VertexInfo::latent(u.clone()))?;
        out = out.with_edges([Edge::directed(u.clone(), e.tail.clone()), Edge::directed(u, e.head.clone())])?;
    }
    Ok(out)
}

/// Exact stationary law of `block` given its outside state, using the
/// model's observational mechanisms.
pub fn block_equilibrium_exact(sm: &StructuralModel, block: &VSet, outside: &BTreeMap<String, usize>) -> Result<Table> {
    sm.system()?.block_equilibrium(block, outside)
}

/// Exact joint over every vertex, latents included.
pub fn cg_joint_exact(sm: &StructuralModel) -> Result<Table> {
    sm.system()?.joint()
}

/// Exact joint over the observed vertices.
pub fn observed_joint(sm: &StructuralModel) -> Result<Table> {
    Ok(cg_joint_exact(sm)?.marginal(&sm.observed()))
}

/// Exact joint of the observed vertices after replacing each target's
/// mechanism by its policy.
pub fn intervened_joint_exact(sm: &StructuralModel, ps: &PolicySet) -> Result<Table> {
    Ok(sm.intervened_system(ps)?.joint()?.marginal(&sm.observed()))
}

/// `n` seeded draws of the observed vertices.
pub fn cg_sample(sm: &StructuralModel, n: usize, sweeps: usize, seed: u64) -> Result<Dataset> {
    let sys = sm.system()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let observed = sm.observed();
    let cols: Vec<usize> = sys.names.iter().enumerate().filter(|(_, v)| observed.contains(*v)).map(|(i, _)| i).collect();
    let columns: Vec<(String, usize)> = cols.iter().map(|i| (sys.names[*i].clone(), sys.cards[*i])).collect();
    let mut x = vec![0; sys.names.len()];
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        sys.draw(&mut rng, sweeps, &mut x);
        rows.push(cols.iter().map(|i| x[*i]).collect());
    }
    Dataset::new(columns, rows)
}
