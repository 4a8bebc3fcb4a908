//! Deterministic text and LaTeX rendering.
//!
//! Text grammar:
//! - `p(H|G)` observed conditional, `p*(B|G)` block equilibrium,
//!   `f_{A}(A|Z)` stochastic policy factor, `φ_{V}(e)` fixing,
//!   `cond_{G}(e)` and `marg_{K}(e)` for the general kernel operations;
//! - `Σ_{X,Y} e` sums, with a bracketed `[Σ ...]` when another factor follows;
//! - factors are separated by single spaces;
//! - a variable held at a symbolic value prints in lower case (`a2`), a
//!   constant as `A2=1`, a policy as `f_{A}(Z)`;
//! - a bound variable whose name is already in use gets a prime (`A2'`).
//!
//! Variables are listed deepest first in the block order, ties broken by
//! name, with primed variables last.

use crate::expr::{Assignment, Estimand, Expr};
use sgpid_graph::VSet;
use std::cmp::Reverse;
use std::collections::BTreeMap;

/// Output syntax.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Latex,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "text" => Ok(Format::Text),
            "latex" => Ok(Format::Latex),
            other => Err(format!("unknown format {other}")),
        }
    }
}

#[derive(Clone)]
enum Display {
    Var { name: String, primes: usize },
    Text(String),
}

#[derive(Clone, Default)]
struct Scope {
    shown: BTreeMap<String, Display>,
    taken: VSet,
}

struct Renderer<'a> {
    order: &'a BTreeMap<String, usize>,
    fmt: Format,
}

/// Renders an estimand.
pub fn render(est: &Estimand, fmt: Format) -> String {
    render_expr(&est.expr, &est.order, fmt)
}

/// Renders an expression with the given depth order.
pub fn render_expr(e: &Expr, order: &BTreeMap<String, usize>, fmt: Format) -> String {
    let r = Renderer { order, fmt };
    let scope = Scope {
        shown: BTreeMap::new(),
        taken: e.free_vars(),
    };
    r.expr(e, &scope)
}

/// Text rendering with no depth information, used as a sort key.
pub fn plain(e: &Expr) -> String {
    render_expr(e, &BTreeMap::new(), Format::Text)
}

fn lower_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}

impl Renderer<'_> {
    fn latex_name(&self, s: &str) -> String {
        if self.fmt == Format::Text {
            return s.to_string();
        }
        if let Some((base, sub)) = s.split_once('_') {
            return format!("{base}_{{{sub}}}");
        }
        let split = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        if split == 0 || split == s.len() {
            s.to_string()
        } else {
            format!("{}_{{{}}}", &s[..split], &s[split..])
        }
    }

    fn var(&self, scope: &Scope, v: &str) -> String {
        match scope.shown.get(v) {
            None => self.latex_name(v),
            Some(Display::Var { name, primes }) => {
                format!("{}{}", self.latex_name(name), "'".repeat(*primes))
            }
            Some(Display::Text(t)) => t.clone(),
        }
    }

    fn key(&self, scope: &Scope, v: &str) -> (bool, Reverse<usize>, String) {
        let primed = matches!(scope.shown.get(v), Some(Display::Var { primes, .. }) if *primes > 0);
        (
            primed,
            Reverse(self.order.get(v).copied().unwrap_or(0)),
            v.to_string(),
        )
    }

    fn sorted(&self, scope: &Scope, vs: &VSet) -> Vec<String> {
        let mut v: Vec<&String> = vs.iter().collect();
        v.sort_by_key(|x| self.key(scope, x));
        v.into_iter().map(|x| self.var(scope, x)).collect()
    }

    fn list(&self, scope: &Scope, vs: &VSet) -> String {
        self.sorted(scope, vs).join(",")
    }

    fn dist(&self, name: &str, scope: &Scope, h: &VSet, g: &VSet) -> String {
        if g.is_empty() {
            format!("{name}({})", self.list(scope, h))
        } else {
            format!("{name}({}|{})", self.list(scope, h), self.list(scope, g))
        }
    }

    fn sub(&self, s: &str) -> String {
        format!("_{{{s}}}")
    }

    fn expr(&self, e: &Expr, scope: &Scope) -> String {
        if let Some((h, g)) = e.as_prob() {
            return self.dist("p", scope, &h, &g);
        }
        match e {
            Expr::ObservedJoint { .. } => unreachable!("handled as a conditional"),
            Expr::Conditional { child, given } => {
                format!(
                    "cond{}({})",
                    self.sub(&self.list(scope, given)),
                    self.expr(child, scope)
                )
            }
            Expr::Marginal { child, keep } => {
                format!(
                    "marg{}({})",
                    self.sub(&self.list(scope, keep)),
                    self.expr(child, scope)
                )
            }
            Expr::Product { factors } => self.product(factors, scope),
            Expr::SumOver { vars, child } => {
                let mut inner = scope.clone();
                for v in vars {
                    let mut primes = 0;
                    while inner.taken.contains(&format!("{v}{}", "'".repeat(primes))) {
                        primes += 1;
                    }
                    inner.taken.insert(format!("{v}{}", "'".repeat(primes)));
                    inner.shown.insert(
                        v.clone(),
                        Display::Var {
                            name: v.clone(),
                            primes,
                        },
                    );
                }
                let sigma = if self.fmt == Format::Latex {
                    "\\sum"
                } else {
                    "Σ"
                };
                format!(
                    "{sigma}{} {}",
                    self.sub(&self.list(&inner, vars)),
                    self.expr(child, &inner)
                )
            }
            Expr::Fix { child, vertex, .. } => {
                let phi = if self.fmt == Format::Latex {
                    "\\phi"
                } else {
                    "φ"
                };
                format!(
                    "{phi}{}({})",
                    self.sub(&self.var(scope, vertex)),
                    self.expr(child, scope)
                )
            }
            Expr::Substitute { child, assignments } => {
                let mut inner = scope.clone();
                for (a, asg) in assignments {
                    let shown = match asg {
                        Assignment::Symbolic => self.latex_name(&lower_first(a)),
                        Assignment::Value { value } => format!("{}={value}", self.var(scope, a)),
                        Assignment::Policy { policy } => {
                            format!(
                                "f{}({})",
                                self.sub(&self.var(scope, a)),
                                self.list(scope, &policy.inputs)
                            )
                        }
                    };
                    inner.shown.insert(a.clone(), Display::Text(shown));
                    inner.taken.insert(a.clone());
                }
                self.expr(child, &inner)
            }
            Expr::PolicyFactor { policy } => {
                let name = format!("f{}", self.sub(&self.var(scope, &policy.target)));
                self.dist(
                    &name,
                    scope,
                    &VSet::from([policy.target.clone()]),
                    &policy.inputs,
                )
            }
            Expr::BlockEquilibrium { block, given, .. } => {
                let name = if self.fmt == Format::Latex {
                    "p^{\\star}"
                } else {
                    "p*"
                };
                self.dist(name, scope, block, given)
            }
        }
    }

    fn product(&self, factors: &[Expr], scope: &Scope) -> String {
        if factors.is_empty() {
            return "1".to_string();
        }
        let mut keyed: Vec<((bool, (bool, Reverse<usize>, String), String), &Expr)> = factors
            .iter()
            .map(|f| {
                let is_sum = matches!(f, Expr::SumOver { .. });
                let heads = f.heads();
                let first = heads.iter().map(|v| self.key(scope, v)).min().unwrap_or((
                    true,
                    Reverse(0),
                    String::new(),
                ));
                ((is_sum, first, self.expr(f, scope)), f)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let n = keyed.len();
        keyed
            .into_iter()
            .enumerate()
            .map(|(i, ((is_sum, _, text), _))| {
                if is_sum && i + 1 < n {
                    format!("[{text}]")
                } else {
                    text
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}
