//! Naive forward-chaining evaluator. It derives every ground consequence of
//! the facts, rules and transitivity declarations, then answers a query by
//! joining over the derived set. Used as a reference for the backward
//! engine and to label generated queries.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::kb::KnowledgeBase;
use crate::symbol::Symbol;
use crate::term::{Clause, Literal, Term, Var};

#[derive(Clone, Debug)]
pub struct BottomUp {
    derived: HashSet<Literal>,
    by_pred: HashMap<Symbol, Vec<Literal>>,
}

type Env = Vec<(Var, Symbol)>;

fn lookup(env: &Env, v: Var) -> Option<Symbol> {
    env.iter().rev().find(|(w, _)| *w == v).map(|(_, s)| *s)
}

/// Extends `env` so that `pattern` matches ground `fact`, returning how
/// many bindings were pushed, or `None` (with `env` restored).
fn match_into(pattern: &Literal, fact: &Literal, env: &mut Env) -> Option<usize> {
    if pattern.predicate != fact.predicate || pattern.args.len() != fact.args.len() {
        return None;
    }
    let mark = env.len();
    for (p, f) in pattern.args.iter().zip(&fact.args) {
        let Term::Const(fv) = f else { unreachable!("facts are ground") };
        let ok = match p {
            Term::Const(c) => c == fv,
            Term::Var(v) => match lookup(env, *v) {
                Some(b) => b == *fv,
                None => {
                    env.push((*v, *fv));
                    true
                }
            },
        };
        if !ok {
            env.truncate(mark);
            return None;
        }
    }
    Some(env.len() - mark)
}

fn ground(l: &Literal, env: &Env) -> Option<Literal> {
    let args = l
        .args
        .iter()
        .map(|t| match t {
            Term::Const(_) => Some(*t),
            Term::Var(v) => lookup(env, *v).map(Term::Const),
        })
        .collect::<Option<Vec<_>>>()?;
    Some(Literal { predicate: l.predicate, args, positive: true })
}

impl BottomUp {
    pub fn new(kb: &KnowledgeBase) -> BottomUp {
        let mut bu = BottomUp { derived: HashSet::new(), by_pred: HashMap::new() };
        let mut delta: Vec<Literal> = Vec::new();
        for f in kb.facts() {
            if bu.add(f.clone()) {
                delta.push(f.clone());
            }
        }
        while !delta.is_empty() {
            let delta_set: HashMap<Symbol, Vec<&Literal>> = delta.iter().fold(HashMap::new(), |mut m, l| {
                m.entry(l.predicate).or_default().push(l);
                m
            });
            let mut fresh: Vec<Literal> = Vec::new();
            for rule in kb.rules() {
                for (i, ante) in rule.antecedent.iter().enumerate() {
                    let Some(seeds) = delta_set.get(&ante.predicate) else { continue };
                    for seed in seeds {
                        let mut env = Env::new();
                        if match_into(ante, seed, &mut env).is_none() {
                            continue;
                        }
                        let rest: Vec<&Literal> =
                            rule.antecedent.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, l)| l).collect();
                        bu.join(&rest, &mut env, &mut |env| {
                            if let Some(g) = ground(&rule.consequent, env) {
                                fresh.push(g);
                            }
                        });
                    }
                }
            }
            for &(p, k) in kb.transitive_declarations() {
                let Some(seeds) = delta_set.get(&p) else { continue };
                let open = k - 1;
                let anchor = 1 - open;
                // new derived p(.., y) joined with a stored p whose open
                // position is y
                for seed in seeds {
                    let y = seed.args[anchor];
                    let mut pattern = Literal { predicate: p, args: vec![y, y], positive: true };
                    pattern.args[anchor] = Term::Var(Var::new("z"));
                    for &fi in kb.candidate_facts(&pattern) {
                        let f = kb.fact(fi);
                        if f.args[open] == y {
                            let mut out = (*seed).clone();
                            out.args[anchor] = f.args[anchor];
                            fresh.push(out);
                        }
                    }
                }
                // stored facts of p arriving in delta extend derived p
                for seed in seeds.iter().filter(|s| kb.contains_fact(s)) {
                    let y = seed.args[open];
                    if let Some(all) = bu.by_pred.get(&p) {
                        for d in all {
                            if d.args[anchor] == y {
                                let mut out = d.clone();
                                out.args[anchor] = seed.args[anchor];
                                fresh.push(out);
                            }
                        }
                    }
                }
            }
            delta.clear();
            for f in fresh {
                if bu.add(f.clone()) {
                    delta.push(f);
                }
            }
        }
        bu
    }

    fn add(&mut self, l: Literal) -> bool {
        if self.derived.insert(l.clone()) {
            self.by_pred.entry(l.predicate).or_default().push(l);
            true
        } else {
            false
        }
    }

    fn join(&self, lits: &[&Literal], env: &mut Env, emit: &mut dyn FnMut(&Env)) {
        let Some((first, rest)) = lits.split_first() else {
            emit(env);
            return;
        };
        let Some(cands) = self.by_pred.get(&first.predicate) else { return };
        for f in cands {
            if let Some(n) = match_into(first, f, env) {
                self.join(rest, env, emit);
                env.truncate(env.len() - n);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.derived.len()
    }

    pub fn is_empty(&self) -> bool {
        self.derived.is_empty()
    }

    pub fn holds(&self, l: &Literal) -> bool {
        self.derived.contains(l)
    }

    /// Ground answers to `query`, as the values of `query.vars()` in order.
    /// Negative literals succeed when ground and absent from the stored
    /// facts, matching the engine's negation as failure.
    pub fn answers(&self, kb: &KnowledgeBase, query: &Clause) -> BTreeSet<Vec<Symbol>> {
        let vars = query.vars();
        let positives: Vec<&Literal> = query.literals().iter().filter(|l| l.positive).collect();
        let negatives: Vec<&Literal> = query.literals().iter().filter(|l| !l.positive).collect();
        let mut out = BTreeSet::new();
        let mut env = Env::new();
        self.join(&positives, &mut env, &mut |env| {
            for n in &negatives {
                match ground(n, env) {
                    Some(g) if !kb.contains_fact(&g) => {}
                    _ => return,
                }
            }
            if let Some(tuple) = vars.iter().map(|v| lookup(env, *v)).collect::<Option<Vec<_>>>() {
                out.insert(tuple);
            }
        });
        out
    }
}
