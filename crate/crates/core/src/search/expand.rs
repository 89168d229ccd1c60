//! Child generation for one clause: literal selection, fact resolution,
//! rule back-chaining and transitive closure hops. Nothing here touches a
//! graph, so probes can walk the same space without committing nodes.

use crate::kb::KnowledgeBase;
use crate::term::{Clause, Literal, Term};
use crate::unify::{rename_literal, unify, Substitution};

use super::graph::{LinkKind, Step};

#[derive(Clone, Debug)]
pub struct Child {
    pub clause: Clause,
    pub answer_terms: Vec<Term>,
    pub kind: LinkKind,
}

impl Child {
    pub fn is_transformation(&self) -> bool {
        matches!(self.kind, LinkKind::Transformation { .. })
    }
}

/// True if ground `fact` is an instance of `pattern`.
pub(crate) fn matches_fact(pattern: &Literal, fact: &Literal) -> bool {
    if pattern.predicate != fact.predicate || pattern.args.len() != fact.args.len() {
        return false;
    }
    for (i, (p, f)) in pattern.args.iter().zip(&fact.args).enumerate() {
        match p {
            Term::Const(_) => {
                if p != f {
                    return false;
                }
            }
            Term::Var(v) => {
                for j in 0..i {
                    if pattern.args[j] == Term::Var(*v) && fact.args[j] != *f {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Number of stored facts matching `l`.
pub fn matching_fact_count(kb: &KnowledgeBase, l: &Literal) -> usize {
    kb.candidate_facts(l).iter().filter(|&&i| matches_fact(l, kb.fact(i))).count()
}

/// Fail-first selection: the positive literal with the fewest matching
/// facts plus applicable rules and transitive declarations (first on
/// ties). A clause with only negative literals selects its first ground
/// one. `None` means the clause cannot be expanded.
pub fn select_literal(kb: &KnowledgeBase, clause: &Clause) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for (i, l) in clause.literals().iter().enumerate() {
        if !l.positive {
            continue;
        }
        let cost = matching_fact_count(kb, l) + kb.num_rules(l.predicate) + kb.transitive_positions(l.predicate).count();
        if best.is_none_or(|(_, c)| cost < c) {
            best = Some((i, cost));
        }
    }
    best.map(|(i, _)| i).or_else(|| clause.literals().iter().position(|l| !l.positive && l.is_ground()))
}

fn remainder(clause: &Clause, skip: usize, theta: &Substitution) -> Vec<Literal> {
    clause
        .literals()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != skip)
        .map(|(_, l)| theta.apply_literal(l))
        .collect()
}

fn finish(mut lits: Vec<Literal>, answer_terms: &[Term], theta: &Substitution, kind: LinkKind) -> Child {
    let mut clause = Clause(std::mem::take(&mut lits));
    clause.dedup();
    Child { clause, answer_terms: answer_terms.iter().map(|t| theta.apply_term(*t)).collect(), kind }
}

/// All children of `clause`. Rule variables are renamed into `scope`.
pub fn children(kb: &KnowledgeBase, clause: &Clause, answer_terms: &[Term], scope: u32) -> Vec<Child> {
    let Some(sel) = select_literal(kb, clause) else {
        return Vec::new();
    };
    let lit = &clause.literals()[sel];
    let mut out = Vec::new();

    if !lit.positive {
        let mut positive = lit.clone();
        positive.positive = true;
        if !kb.contains_fact(&positive) {
            let lits = remainder(clause, sel, &Substitution::new());
            out.push(finish(
                lits,
                answer_terms,
                &Substitution::new(),
                LinkKind::Restriction { fact: lit.clone(), substitution: Substitution::new() },
            ));
        }
        return out;
    }

    for &fi in kb.candidate_facts(lit) {
        let fact = kb.fact(fi);
        if !matches_fact(lit, fact) {
            continue;
        }
        let mut theta = Substitution::new();
        for (p, f) in lit.args.iter().zip(&fact.args) {
            if let Term::Var(v) = p {
                theta.insert(*v, *f);
            }
        }
        let lits = remainder(clause, sel, &theta);
        out.push(finish(
            lits,
            answer_terms,
            &theta,
            LinkKind::Restriction { fact: fact.clone(), substitution: theta.clone() },
        ));
    }

    for &ri in kb.rules_for(lit.predicate) {
        let rule = kb.rule_at(ri);
        let head = rename_literal(&rule.consequent, scope);
        let Some(theta) = unify(lit, &head) else { continue };
        let mut bindings = Substitution::new();
        for v in rule.vars() {
            if let t @ Term::Const(_) = theta.apply_term(Term::Var(v.scoped(scope))) {
                bindings.insert(*v, t);
            }
        }
        let mut lits: Vec<Literal> =
            rule.antecedent.iter().map(|a| theta.apply_literal(&rename_literal(a, scope))).collect();
        lits.extend(remainder(clause, sel, &theta));
        out.push(finish(
            lits,
            answer_terms,
            &theta,
            LinkKind::Transformation { step: Step::Rule(rule.id), substitution: bindings },
        ));
    }

    if lit.args.len() == 2 {
        for k in kb.transitive_positions(lit.predicate) {
            // position k stays open; the other position is matched against
            // a fact and the literal hops to the fact's value at k
            let open = k - 1;
            let anchor = 1 - open;
            let mut pattern = lit.clone();
            pattern.args[open] = Term::Var(crate::term::Var::new("hop").scoped(u32::MAX));
            for &fi in kb.candidate_facts(&pattern) {
                let fact = kb.fact(fi);
                if !matches_fact(&pattern, fact) {
                    continue;
                }
                let mut theta = Substitution::new();
                if let Term::Var(v) = lit.args[anchor] {
                    theta.insert(v, fact.args[anchor]);
                }
                let mut hop = theta.apply_literal(lit);
                hop.args[anchor] = fact.args[open];
                let mut lits = vec![hop];
                lits.extend(remainder(clause, sel, &theta));
                out.push(finish(
                    lits,
                    answer_terms,
                    &theta,
                    LinkKind::Transformation {
                        step: Step::Transitive { predicate: lit.predicate, position: k },
                        substitution: theta.clone(),
                    },
                ));
            }
        }
    }
    out
}
