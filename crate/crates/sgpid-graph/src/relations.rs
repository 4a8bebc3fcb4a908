//! Genealogical relations over vertex sets.

use crate::{GraphError, MixedGraph, Result, VSet};
use std::collections::VecDeque;
use std::str::FromStr;

/// Relation kinds accepted by [`MixedGraph::relatives`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Parents,
    Children,
    Siblings,
    Neighbors,
    Ancestors,
    Descendants,
    NonDescendants,
    District,
    Anterior,
    Exterior,
    StrictExterior,
}

impl Relation {
    pub const ALL: [Relation; 11] = [
        Relation::Parents,
        Relation::Children,
        Relation::Siblings,
        Relation::Neighbors,
        Relation::Ancestors,
        Relation::Descendants,
        Relation::NonDescendants,
        Relation::District,
        Relation::Anterior,
        Relation::Exterior,
        Relation::StrictExterior,
    ];
}

impl FromStr for Relation {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Relation> {
        Ok(match s.to_ascii_lowercase().replace(['_', ' '], "-").as_str() {
            "parents" | "pa" => Relation::Parents,
            "children" | "ch" => Relation::Children,
            "siblings" | "sib" => Relation::Siblings,
            "neighbors" | "neighbours" | "nb" => Relation::Neighbors,
            "ancestors" | "an" => Relation::Ancestors,
            "descendants" | "de" => Relation::Descendants,
            "non-descendants" | "nd" => Relation::NonDescendants,
            "district" | "dis" => Relation::District,
            "anterior" | "ant" => Relation::Anterior,
            "exterior" | "ext" => Relation::Exterior,
            "strict-exterior" => Relation::StrictExterior,
            _ => return Err(GraphError::UnknownRelation(s.to_string())),
        })
    }
}

impl MixedGraph {
    /// The set-extension of a relation: the union of the relation over members
    /// of `s`. Ancestors, descendants, district, anterior and exterior are
    /// reflexive; the strict exterior excludes `s` and its undirected
    /// component.
    pub fn relatives(&self, s: &VSet, kind: Relation) -> Result<VSet> {
        self.check_names(s)?;
        Ok(match kind {
            Relation::Parents => self.union_of(s, |v| self.pa(v)),
            Relation::Children => self.union_of(s, |v| self.ch(v)),
            Relation::Siblings => self.union_of(s, |v| self.sib(v)),
            Relation::Neighbors => self.union_of(s, |v| self.nb(v)),
            Relation::Ancestors => self.ancestors(s),
            Relation::Descendants => self.descendants(s),
            Relation::NonDescendants => {
                let all = self.names();
                let mut out = VSet::new();
                for v in s {
                    let de = self.descendants(&VSet::from([v.clone()]));
                    out.extend(all.difference(&de).cloned());
                }
                out
            }
            Relation::District => self.district_of(s),
            Relation::Anterior => self.anterior(s),
            Relation::Exterior => self.exterior(s),
            Relation::StrictExterior => {
                s.iter().flat_map(|v| self.strict_exterior(&VSet::from([v.clone()]))).collect()
            }
        })
    }

    fn union_of<'a, F>(&'a self, s: &VSet, f: F) -> VSet
    where
        F: Fn(&str) -> Result<&'a VSet>,
    {
        s.iter().flat_map(|v| f(v).expect("names checked").iter().cloned()).collect()
    }

    fn closure<F>(&self, s: &VSet, step: F) -> VSet
    where
        F: Fn(&str, &mut dyn FnMut(&str)),
    {
        let mut seen: VSet = s.clone();
        let mut queue: VecDeque<String> = s.iter().cloned().collect();
        while let Some(v) = queue.pop_front() {
            step(&v, &mut |w: &str| {
                if !seen.contains(w) {
                    seen.insert(w.to_string());
                    queue.push_back(w.to_string());
                }
            });
        }
        seen
    }

    /// Reflexive ancestors.
    pub fn ancestors(&self, s: &VSet) -> VSet {
        self.closure(s, |v, push| {
            for p in &self.adj[v].parents {
                push(p);
            }
        })
    }

    /// Reflexive descendants.
    pub fn descendants(&self, s: &VSet) -> VSet {
        self.closure(s, |v, push| {
            for c in &self.adj[v].children {
                push(c);
            }
        })
    }

    /// Reflexive anterior: vertices with a partially directed path into `s`,
    /// following directed edges backwards and undirected edges either way.
    pub fn anterior(&self, s: &VSet) -> VSet {
        self.closure(s, |v, push| {
            let a = &self.adj[v];
            for w in a.parents.iter().chain(&a.neighbors) {
                push(w);
            }
        })
    }

    /// Reflexive exterior: vertices reached from `s` by partially directed
    /// paths, following directed edges forwards and undirected edges either way.
    pub fn exterior(&self, s: &VSet) -> VSet {
        self.closure(s, |v, push| {
            let a = &self.adj[v];
            for w in a.children.iter().chain(&a.neighbors) {
                push(w);
            }
        })
    }

    /// The undirected connected component (block) containing `s`.
    pub fn undirected_component(&self, s: &VSet) -> VSet {
        self.closure(s, |v, push| {
            for w in &self.adj[v].neighbors {
                push(w);
            }
        })
    }

    /// Exterior minus `s` and its undirected component.
    pub fn strict_exterior(&self, s: &VSet) -> VSet {
        let ext = self.exterior(s);
        let comp = self.undirected_component(s);
        ext.difference(&comp).cloned().collect()
    }

    /// Reflexive district: bidirected connected component among random
    /// vertices. A fixed member of `s` contributes only itself.
    pub fn district_of(&self, s: &VSet) -> VSet {
        let start: VSet = s.iter().filter(|v| !self.fixed.contains(*v)).cloned().collect();
        let mut out = self.closure(&start, |v, push| {
            for w in &self.adj[v].siblings {
                if !self.fixed.contains(w) {
                    push(w);
                }
            }
        });
        out.extend(s.iter().cloned());
        out
    }
}
