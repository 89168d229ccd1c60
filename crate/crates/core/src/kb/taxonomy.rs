//! The concept taxonomy: `isa` edges from terms to concepts, `genls` edges
//! between concepts, and a stored generality estimate per term.
//!
//! The reflexive-transitive `genls` closure is precomputed on the SCC
//! condensation of the concept graph, so cycles collapse into a single
//! component and every closure query is a lookup.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::symbol::Symbol;

#[derive(Clone, Debug, Default)]
pub struct Taxonomy {
    isa: BTreeMap<Symbol, BTreeSet<Symbol>>,
    genls: BTreeMap<Symbol, BTreeSet<Symbol>>,
    generality: BTreeMap<Symbol, u64>,
    concepts: BTreeSet<Symbol>,
    component: HashMap<Symbol, usize>,
    // closure[c] = sorted concepts reachable from component c, itself included
    closure: Vec<Vec<Symbol>>,
}

impl Taxonomy {
    pub(crate) fn new(
        isa: BTreeMap<Symbol, BTreeSet<Symbol>>,
        genls: BTreeMap<Symbol, BTreeSet<Symbol>>,
        generality: BTreeMap<Symbol, u64>,
        concepts: BTreeSet<Symbol>,
    ) -> Taxonomy {
        let mut t = Taxonomy { isa, genls, generality, concepts, ..Default::default() };
        t.build_closure();
        t
    }

    fn build_closure(&mut self) {
        let nodes: Vec<Symbol> = self.concepts.iter().copied().collect();
        let index: HashMap<Symbol, usize> = nodes.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let succ: Vec<Vec<usize>> = nodes
            .iter()
            .map(|c| {
                self.genls.get(c).map_or_else(Vec::new, |s| s.iter().map(|d| index[d]).collect())
            })
            .collect();
        let (comp_of, comps) = tarjan(&succ);
        // Tarjan emits components in reverse topological order: every
        // successor component is finished before its predecessors.
        let mut closure: Vec<BTreeSet<Symbol>> = vec![BTreeSet::new(); comps.len()];
        for (ci, members) in comps.iter().enumerate() {
            let mut set: BTreeSet<Symbol> = members.iter().map(|&i| nodes[i]).collect();
            for &m in members {
                for &s in &succ[m] {
                    let sc = comp_of[s];
                    if sc != ci {
                        set.extend(closure[sc].iter().copied());
                    }
                }
            }
            closure[ci] = set;
        }
        self.component = nodes.iter().enumerate().map(|(i, c)| (*c, comp_of[i])).collect();
        self.closure = closure.into_iter().map(|s| s.into_iter().collect()).collect();
    }

    pub fn concepts(&self) -> &BTreeSet<Symbol> {
        &self.concepts
    }

    pub fn is_concept(&self, c: Symbol) -> bool {
        self.concepts.contains(&c)
    }

    /// Direct `isa` edges as (term, concept) pairs, in name order.
    pub fn isa_edges(&self) -> impl Iterator<Item = (Symbol, Symbol)> + '_ {
        self.isa.iter().flat_map(|(t, cs)| cs.iter().map(move |c| (*t, *c)))
    }

    pub fn genls_edges(&self) -> impl Iterator<Item = (Symbol, Symbol)> + '_ {
        self.genls.iter().flat_map(|(a, bs)| bs.iter().map(move |b| (*a, *b)))
    }

    pub fn stored_generality(&self) -> &BTreeMap<Symbol, u64> {
        &self.generality
    }

    /// Concepts reachable from `c` through zero or more `genls` edges.
    pub fn supers(&self, c: Symbol) -> &[Symbol] {
        match self.component.get(&c) {
            Some(&ci) => &self.closure[ci],
            None => &[],
        }
    }

    /// True if `c` reaches `d` via the reflexive-transitive `genls` closure.
    pub fn genls_closure(&self, c: Symbol, d: Symbol) -> bool {
        self.supers(c).binary_search(&d).is_ok()
    }

    pub fn holds_isa(&self, t: Symbol, c: Symbol) -> bool {
        self.isa.get(&t).is_some_and(|direct| direct.iter().any(|&d| self.genls_closure(d, c)))
    }

    /// Every concept `c` with `holds_isa(t, c)`, sorted by name.
    pub fn generalizations(&self, t: Symbol) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        if let Some(direct) = self.isa.get(&t) {
            for &d in direct {
                out.extend(self.supers(d).iter().copied());
            }
        }
        out
    }

    pub fn term_generality(&self, t: Symbol) -> u64 {
        self.generality.get(&t).copied().unwrap_or(0)
    }

    /// Number of terms that are (transitively) instances of each concept.
    pub fn instance_counts(&self) -> BTreeMap<Symbol, u64> {
        let mut counts: BTreeMap<Symbol, u64> = self.concepts.iter().map(|c| (*c, 0)).collect();
        for t in self.isa.keys() {
            for c in self.generalizations(*t) {
                *counts.entry(c).or_default() += 1;
            }
        }
        counts
    }
}

/// Iterative Tarjan SCC. Returns (component of each node, members of each
/// component) with components in reverse topological order.
fn tarjan(succ: &[Vec<usize>]) -> (Vec<usize>, Vec<Vec<usize>>) {
    const UNSEEN: usize = usize::MAX;
    let n = succ.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp_of = vec![UNSEEN; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut edge)) = work.last_mut() {
            if *edge < succ[v].len() {
                let w = succ[v][*edge];
                *edge += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut members = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp_of[w] = comps.len();
                        members.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(members);
                }
            }
        }
    }
    (comp_of, comps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> Symbol {
        Symbol::intern(s)
    }

    fn taxonomy(genls: &[(&str, &str)], isa: &[(&str, &str)]) -> Taxonomy {
        let mut g: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
        let mut concepts = BTreeSet::new();
        for (a, b) in genls {
            g.entry(sym(a)).or_default().insert(sym(b));
            concepts.insert(sym(a));
            concepts.insert(sym(b));
        }
        let mut i: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
        for (t, c) in isa {
            i.entry(sym(t)).or_default().insert(sym(c));
            concepts.insert(sym(c));
        }
        Taxonomy::new(i, g, BTreeMap::new(), concepts)
    }

    #[test]
    fn chain_closure() {
        let t = taxonomy(&[("C1", "C2"), ("C2", "C3")], &[("A", "C1")]);
        assert!(t.holds_isa(sym("A"), sym("C3")));
        assert!(t.holds_isa(sym("A"), sym("C1")));
        assert!(!t.holds_isa(sym("C1"), sym("C2")));
        let g: Vec<_> = t.generalizations(sym("A")).into_iter().map(Symbol::as_str).collect();
        assert_eq!(g, vec!["C1", "C2", "C3"]);
    }

    #[test]
    fn cycles_terminate_and_share_closure() {
        let t = taxonomy(&[("X", "Y"), ("Y", "Z"), ("Z", "X"), ("Z", "Top")], &[("a", "Y")]);
        for c in ["X", "Y", "Z", "Top"] {
            assert!(t.holds_isa(sym("a"), sym(c)), "{c}");
        }
        assert_eq!(t.supers(sym("X")), t.supers(sym("Y")));
    }

    #[test]
    fn instance_counts_are_transitive() {
        let t = taxonomy(&[("Leaf", "Mid"), ("Mid", "Top")], &[("a", "Leaf"), ("b", "Mid"), ("c", "Top")]);
        let counts = t.instance_counts();
        assert_eq!(counts[&sym("Leaf")], 1);
        assert_eq!(counts[&sym("Mid")], 2);
        assert_eq!(counts[&sym("Top")], 3);
    }
}
