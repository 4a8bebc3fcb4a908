//! Dense nonnegative tables over named finite variables.

use crate::{EvalError, Result};
use serde::{Deserialize, Serialize};
use sgpid_graph::VSet;
use std::collections::BTreeMap;

/// A table over variables sorted by name, stored row-major with the first
/// variable most significant (lexicographic state order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    vars: Vec<String>,
    cards: Vec<usize>,
    data: Vec<f64>,
}

/// A normalized table.
pub type DiscreteDistribution = Table;

fn sorted_pairs(mut vars: Vec<(String, usize)>) -> Result<Vec<(String, usize)>> {
    vars.sort();
    if vars.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(EvalError::BadTable("duplicate variable".into()));
    }
    if vars.iter().any(|(_, c)| *c == 0) {
        return Err(EvalError::BadTable("zero cardinality".into()));
    }
    Ok(vars)
}

impl Table {
    /// A table from entries in lexicographic state order of the sorted variables.
    pub fn new(vars: Vec<(String, usize)>, data: Vec<f64>) -> Result<Table> {
        let vars = sorted_pairs(vars)?;
        let size: usize = vars.iter().map(|(_, c)| c).product();
        if data.len() != size {
            return Err(EvalError::BadTable(format!("{} entries for {} states", data.len(), size)));
        }
        let (vars, cards) = vars.into_iter().unzip();
        Ok(Table { vars, cards, data })
    }

    /// A table whose entry at each state is `f(state)`, the state listed in
    /// sorted variable order.
    pub fn from_fn(vars: Vec<(String, usize)>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Table> {
        let vars = sorted_pairs(vars)?;
        let (vars, cards): (Vec<String>, Vec<usize>) = vars.into_iter().unzip();
        let size: usize = cards.iter().product();
        let mut state = vec![0; cards.len()];
        let mut data = Vec::with_capacity(size);
        for _ in 0..size {
            data.push(f(&state));
            advance(&mut state, &cards);
        }
        Ok(Table { vars, cards, data })
    }

    /// The constant table over no variables.
    pub fn scalar(x: f64) -> Table {
        Table { vars: Vec::new(), cards: Vec::new(), data: vec![x] }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn var_set(&self) -> VSet {
        self.vars.iter().cloned().collect()
    }

    /// Variable and cardinality pairs.
    pub fn scope(&self) -> Vec<(String, usize)> {
        self.vars.iter().cloned().zip(self.cards.iter().copied()).collect()
    }

    pub fn card(&self, var: &str) -> Option<usize> {
        self.position(var).map(|i| self.cards[i])
    }

    pub fn contains(&self, var: &str) -> bool {
        self.position(var).is_some()
    }

    fn position(&self, var: &str) -> Option<usize> {
        self.vars.binary_search_by(|v| v.as_str().cmp(var)).ok()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Entry at a state given as a name to value map; extra names are ignored.
    pub fn get(&self, state: &BTreeMap<String, usize>) -> Result<f64> {
        let mut idx = 0;
        for (v, c) in self.vars.iter().zip(&self.cards) {
            let x = *state.get(v).ok_or_else(|| EvalError::Unbound(v.clone()))?;
            if x >= *c {
                return Err(EvalError::BadTable(format!("state {x} of `{v}` outside 0..{c}")));
            }
            idx = idx * c + x;
        }
        Ok(self.data[idx])
    }

    /// Strides of this table aligned to `scope`; zero for variables this table lacks.
    fn strides_in(&self, scope: &[String]) -> Vec<usize> {
        let mut own = vec![0; self.vars.len()];
        let mut s = 1;
        for i in (0..self.vars.len()).rev() {
            own[i] = s;
            s *= self.cards[i];
        }
        scope.iter().map(|v| self.position(v).map_or(0, |i| own[i])).collect()
    }

    fn combine(&self, other: &Table, f: impl Fn(f64, f64) -> Result<f64>) -> Result<Table> {
        let mut scope: BTreeMap<String, usize> = self.scope().into_iter().collect();
        for (v, c) in other.scope() {
            if let Some(old) = scope.insert(v.clone(), c) {
                if old != c {
                    return Err(EvalError::BadTable(format!("`{v}` has cardinalities {old} and {c}")));
                }
            }
        }
        let (vars, cards): (Vec<String>, Vec<usize>) = scope.into_iter().unzip();
        let sa = self.strides_in(&vars);
        let sb = other.strides_in(&vars);
        let size: usize = cards.iter().product();
        let mut state = vec![0; cards.len()];
        let mut data = Vec::with_capacity(size);
        for _ in 0..size {
            let ia: usize = state.iter().zip(&sa).map(|(x, s)| x * s).sum();
            let ib: usize = state.iter().zip(&sb).map(|(x, s)| x * s).sum();
            data.push(f(self.data[ia], other.data[ib])?);
            advance(&mut state, &cards);
        }
        Ok(Table { vars, cards, data })
    }

    /// Pointwise product over the union of the scopes.
    pub fn multiply(&self, other: &Table) -> Result<Table> {
        self.combine(other, |a, b| Ok(a * b))
    }

    /// Pointwise sum over the union of the scopes.
    pub fn add(&self, other: &Table) -> Result<Table> {
        self.combine(other, |a, b| Ok(a + b))
    }

    /// Pointwise quotient; `0 / 0` is 0 and a positive numerator over 0 is an error.
    pub fn divide(&self, other: &Table) -> Result<Table> {
        self.combine(other, |a, b| {
            if b != 0.0 {
                Ok(a / b)
            } else if a == 0.0 {
                Ok(0.0)
            } else {
                Err(EvalError::ZeroDivision)
            }
        })
    }

    /// Sums out every variable not in `keep`.
    pub fn marginal(&self, keep: &VSet) -> Table {
        let vars: Vec<String> = self.vars.iter().filter(|v| keep.contains(*v)).cloned().collect();
        let cards: Vec<usize> = vars.iter().map(|v| self.card(v).expect("own variable")).collect();
        let target = Table { vars: vars.clone(), cards, data: Vec::new() };
        let st = target.strides_in(&self.vars);
        let mut data = vec![0.0; target.cards.iter().product()];
        let mut state = vec![0; self.cards.len()];
        for x in &self.data {
            let i: usize = state.iter().zip(&st).map(|(a, s)| a * s).sum();
            data[i] += x;
            advance(&mut state, &self.cards);
        }
        Table { data, ..target }
    }

    /// Sums out the listed variables.
    pub fn sum_out(&self, vars: &VSet) -> Table {
        let keep: VSet = self.vars.iter().filter(|v| !vars.contains(*v)).cloned().collect();
        self.marginal(&keep)
    }

    /// Restricts `var` to one state and drops it; absent variables are ignored.
    pub fn slice(&self, var: &str, value: usize) -> Result<Table> {
        let Some(pos) = self.position(var) else {
            return Ok(self.clone());
        };
        if value >= self.cards[pos] {
            return Err(EvalError::BadTable(format!("state {value} of `{var}` outside 0..{}", self.cards[pos])));
        }
        let keep: Vec<(String, usize)> = self.scope().into_iter().filter(|(v, _)| v != var).collect();
        let mut full = vec![0; self.vars.len()];
        Table::from_fn(keep, |s| {
            let mut k = 0;
            for (i, slot) in full.iter_mut().enumerate() {
                if i == pos {
                    *slot = value;
                } else {
                    *slot = s[k];
                    k += 1;
                }
            }
            self.at(&full)
        })
    }

    /// Entry at a state listed in sorted variable order.
    pub fn at(&self, state: &[usize]) -> f64 {
        let mut idx = 0;
        for (x, c) in state.iter().zip(&self.cards) {
            idx = idx * c + x;
        }
        self.data[idx]
    }

    /// The table divided by its marginal over `given`.
    pub fn conditional(&self, given: &VSet) -> Result<Table> {
        self.divide(&self.marginal(given))
    }

    /// Divides by the total.
    pub fn normalized(&self) -> Result<Table> {
        let t = self.total();
        if t <= 0.0 {
            return Err(EvalError::ZeroDivision);
        }
        Ok(Table { data: self.data.iter().map(|x| x / t).collect(), ..self.clone() })
    }

    /// Largest absolute entry difference; `None` when the scopes differ.
    pub fn max_abs_diff(&self, other: &Table) -> Option<f64> {
        if self.vars != other.vars || self.cards != other.cards {
            return None;
        }
        Some(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// Total variation distance between two tables over the same scope.
    pub fn total_variation(&self, other: &Table) -> Option<f64> {
        if self.vars != other.vars || self.cards != other.cards {
            return None;
        }
        Some(0.5 * self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    /// True when every slice along `var` agrees within `tol`.
    pub fn is_constant_along(&self, var: &str, tol: f64) -> Result<bool> {
        let Some(c) = self.card(var) else {
            return Ok(true);
        };
        let first = self.slice(var, 0)?;
        for x in 1..c {
            let d = self.slice(var, x)?.max_abs_diff(&first).expect("same scope");
            if d > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    pub fn from_json(text: &str) -> Result<Table> {
        let t: Table = serde_json::from_str(text).map_err(|e| EvalError::BadTable(e.to_string()))?;
        Table::new(t.scope(), t.data)
    }
}

/// Advances a row-major odometer.
pub(crate) fn advance(state: &mut [usize], cards: &[usize]) {
    for i in (0..state.len()).rev() {
        state[i] += 1;
        if state[i] < cards[i] {
            return;
        }
        state[i] = 0;
    }
}
