//! Knowledge base: ground facts, rules, the concept taxonomy, transitivity
//! and procedural-support declarations, plus the per-predicate statistics
//! that the node-ordering heuristics read.
//!
//! A [`KnowledgeBase`] is immutable once built and is shared read-only by
//! any number of concurrent searches.

mod parse;
mod taxonomy;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

pub use parse::{load_kb, load_kb_file};
pub use taxonomy::Taxonomy;

use crate::symbol::Symbol;
use crate::term::{Literal, Term, Var};

pub const ISA: &str = "isa";
pub const GENLS: &str = "genls";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KbError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: arity conflict for {predicate}: {expected} vs {found}")]
    Arity { line: usize, predicate: String, expected: usize, found: usize },
    #[error("line {line}: isa edge from {term} to undeclared concept {concept}")]
    UndeclaredConcept { line: usize, term: String, concept: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("io: {0}")]
    Io(String),
}

/// A definite rule `antecedent -> consequent`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub id: Symbol,
    pub antecedent: Vec<Literal>,
    pub consequent: Literal,
    /// False for rules standing in for a non-Horn derivation step.
    pub horn: bool,
    vars: Vec<Var>,
}

impl Rule {
    /// Builds a rule, checking that the antecedent is a non-empty
    /// conjunction of positive literals and that every consequent variable
    /// occurs in it.
    pub fn new(id: &str, antecedent: Vec<Literal>, consequent: Literal, horn: bool) -> Result<Rule, String> {
        if antecedent.is_empty() {
            return Err(format!("rule {id} has an empty antecedent"));
        }
        if antecedent.iter().any(|l| !l.positive) || !consequent.positive {
            return Err(format!("rule {id}: negative literals are not allowed in rules"));
        }
        let mut vars = Vec::new();
        let mut seen = HashSet::new();
        for v in antecedent.iter().flat_map(Literal::vars) {
            if seen.insert(v) {
                vars.push(v);
            }
        }
        if let Some(v) = consequent.vars().find(|v| !seen.contains(v)) {
            return Err(format!("rule {id}: consequent variable {v} does not occur in the antecedent"));
        }
        Ok(Rule { id: Symbol::intern(id), antecedent, consequent, horn, vars })
    }

    /// Distinct variables of the rule in order of first occurrence.
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("(rule {} (ante", self.id);
        for l in &self.antecedent {
            let _ = write!(s, " {l}");
        }
        let _ = write!(s, ") (conseq {})", self.consequent);
        if !self.horn {
            s.push_str(" nonhorn");
        }
        s.push(')');
        s
    }
}

/// Accumulates statements; [`KbBuilder::build`] validates and indexes them.
/// Statement order never affects the result.
#[derive(Default, Clone)]
pub struct KbBuilder {
    facts: Vec<(usize, Literal)>,
    rules: Vec<(usize, Rule)>,
    concepts: BTreeSet<Symbol>,
    generality: BTreeMap<Symbol, u64>,
    transitive: Vec<(usize, Symbol, usize)>,
    procedural: BTreeSet<Symbol>,
    arities: Vec<(usize, Symbol, usize)>,
    instance_count_generality: bool,
}

impl KbBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fact(&mut self, l: Literal) -> &mut Self {
        self.fact_at(0, l)
    }

    pub(crate) fn fact_at(&mut self, line: usize, l: Literal) -> &mut Self {
        self.facts.push((line, l));
        self
    }

    pub fn isa(&mut self, term: &str, concept: &str) -> &mut Self {
        self.fact(Literal::new(ISA, vec![Term::constant(term), Term::constant(concept)]))
    }

    pub fn genls(&mut self, sub: &str, sup: &str) -> &mut Self {
        self.fact(Literal::new(GENLS, vec![Term::constant(sub), Term::constant(sup)]))
    }

    pub fn concept(&mut self, c: &str) -> &mut Self {
        self.concepts.insert(Symbol::intern(c));
        self
    }

    pub fn rule(&mut self, r: Rule) -> &mut Self {
        self.rule_at(0, r)
    }

    pub(crate) fn rule_at(&mut self, line: usize, r: Rule) -> &mut Self {
        self.rules.push((line, r));
        self
    }

    pub fn generality(&mut self, term: &str, value: u64) -> &mut Self {
        self.generality.insert(Symbol::intern(term), value);
        self
    }

    pub fn transitive(&mut self, pred: &str, position: usize) -> &mut Self {
        self.transitive_at(0, Symbol::intern(pred), position)
    }

    pub(crate) fn transitive_at(&mut self, line: usize, pred: Symbol, position: usize) -> &mut Self {
        self.transitive.push((line, pred, position));
        self
    }

    pub fn procedural(&mut self, pred: &str) -> &mut Self {
        self.procedural.insert(Symbol::intern(pred));
        self
    }

    pub fn arity(&mut self, pred: &str, n: usize) -> &mut Self {
        self.arities.push((0, Symbol::intern(pred), n));
        self
    }

    pub(crate) fn arity_at(&mut self, line: usize, pred: Symbol, n: usize) -> &mut Self {
        self.arities.push((line, pred, n));
        self
    }

    /// Sets every concept's generality to its transitive instance count,
    /// overriding stored values for concepts.
    pub fn instance_count_generality(&mut self) -> &mut Self {
        self.instance_count_generality = true;
        self
    }

    pub fn build(&self) -> Result<KnowledgeBase, KbError> {
        let isa_sym = Symbol::intern(ISA);
        let genls_sym = Symbol::intern(GENLS);

        // Arity: declarations and every use must agree.
        let mut arity: BTreeMap<Symbol, (usize, usize)> = BTreeMap::new();
        arity.insert(isa_sym, (2, 0));
        arity.insert(genls_sym, (2, 0));
        let mut uses: Vec<(usize, Symbol, usize)> = self.arities.clone();
        for (line, f) in &self.facts {
            uses.push((*line, f.predicate, f.arity()));
        }
        for (line, r) in &self.rules {
            for l in r.antecedent.iter().chain(std::iter::once(&r.consequent)) {
                uses.push((*line, l.predicate, l.arity()));
            }
        }
        uses.sort_by_key(|u| (u.0, u.1, u.2));
        for (line, pred, n) in uses {
            match arity.get(&pred) {
                Some(&(expected, _)) if expected != n => {
                    return Err(KbError::Arity { line, predicate: pred.to_string(), expected, found: n })
                }
                Some(_) => {}
                None => {
                    arity.insert(pred, (n, line));
                }
            }
        }

        for (line, f) in &self.facts {
            if !f.is_ground() || !f.positive {
                return Err(KbError::Invalid { line: *line, message: format!("fact {f} must be a ground positive literal") });
            }
        }

        let mut facts: Vec<Literal> = self.facts.iter().map(|(_, f)| f.clone()).collect();
        facts.sort();
        facts.dedup();

        // Taxonomy from isa/genls facts.
        let mut concepts = self.concepts.clone();
        let mut genls: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
        let mut isa: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
        for f in &facts {
            if f.predicate == genls_sym {
                let (a, b) = (f.args[0].as_const().unwrap(), f.args[1].as_const().unwrap());
                concepts.insert(a);
                concepts.insert(b);
                genls.entry(a).or_default().insert(b);
            }
        }
        let mut isa_lines: Vec<&(usize, Literal)> = self.facts.iter().filter(|(_, f)| f.predicate == isa_sym).collect();
        isa_lines.sort_by_key(|(line, _)| *line);
        for (line, f) in isa_lines {
            let (t, c) = (f.args[0].as_const().unwrap(), f.args[1].as_const().unwrap());
            if !concepts.contains(&c) {
                return Err(KbError::UndeclaredConcept { line: *line, term: t.to_string(), concept: c.to_string() });
            }
            isa.entry(t).or_default().insert(c);
        }
        let mut taxonomy = Taxonomy::new(isa.clone(), genls.clone(), self.generality.clone(), concepts.clone());
        if self.instance_count_generality {
            let mut generality = self.generality.clone();
            generality.extend(taxonomy.instance_counts());
            taxonomy = Taxonomy::new(isa, genls, generality, concepts);
        }

        let mut transitive = BTreeSet::new();
        for (line, pred, pos) in &self.transitive {
            let n = arity.get(pred).map(|a| a.0);
            if n.is_some_and(|n| n != 2) || !(1..=2).contains(pos) {
                return Err(KbError::Invalid {
                    line: *line,
                    message: format!("transitive declaration ({pred} {pos}) needs a binary predicate and position 1 or 2"),
                });
            }
            transitive.insert((*pred, *pos));
        }

        let mut rules: Vec<Rule> = self.rules.iter().map(|(_, r)| r.clone()).collect();
        rules.sort_by_key(|r| r.id);
        for w in rules.windows(2) {
            if w[0].id == w[1].id {
                let line = self.rules.iter().filter(|(_, r)| r.id == w[0].id).map(|(l, _)| *l).max().unwrap_or(0);
                return Err(KbError::Invalid { line, message: format!("duplicate rule id {}", w[0].id) });
            }
        }

        Ok(KnowledgeBase::index(facts, rules, taxonomy, transitive, self.procedural.clone(), arity))
    }
}

/// An indexed, immutable knowledge base.
#[derive(Clone, Debug)]
pub struct KnowledgeBase {
    facts: Vec<Literal>,
    fact_set: HashSet<Literal>,
    facts_by_pred: HashMap<Symbol, Vec<u32>>,
    facts_by_arg: HashMap<(Symbol, u32, Symbol), Vec<u32>>,
    rules: Vec<Rule>,
    rules_by_pred: HashMap<Symbol, Vec<u32>>,
    rule_index: HashMap<Symbol, u32>,
    taxonomy: Taxonomy,
    transitive: BTreeSet<(Symbol, usize)>,
    procedural: BTreeSet<Symbol>,
    arity: BTreeMap<Symbol, (usize, usize)>,
}

static EMPTY: [u32; 0] = [];

impl KnowledgeBase {
    pub fn empty() -> KnowledgeBase {
        KbBuilder::new().build().expect("empty KB is valid")
    }

    fn index(
        facts: Vec<Literal>,
        rules: Vec<Rule>,
        taxonomy: Taxonomy,
        transitive: BTreeSet<(Symbol, usize)>,
        procedural: BTreeSet<Symbol>,
        arity: BTreeMap<Symbol, (usize, usize)>,
    ) -> KnowledgeBase {
        let mut facts_by_pred: HashMap<Symbol, Vec<u32>> = HashMap::new();
        let mut facts_by_arg: HashMap<(Symbol, u32, Symbol), Vec<u32>> = HashMap::new();
        for (i, f) in facts.iter().enumerate() {
            facts_by_pred.entry(f.predicate).or_default().push(i as u32);
            for (pos, a) in f.args.iter().enumerate() {
                if let Term::Const(c) = a {
                    facts_by_arg.entry((f.predicate, pos as u32, *c)).or_default().push(i as u32);
                }
            }
        }
        let mut rules_by_pred: HashMap<Symbol, Vec<u32>> = HashMap::new();
        let mut rule_index = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            rules_by_pred.entry(r.consequent.predicate).or_default().push(i as u32);
            rule_index.insert(r.id, i as u32);
        }
        let fact_set = facts.iter().cloned().collect();
        KnowledgeBase {
            facts,
            fact_set,
            facts_by_pred,
            facts_by_arg,
            rules,
            rules_by_pred,
            rule_index,
            taxonomy,
            transitive,
            procedural,
            arity,
        }
    }

    pub fn facts(&self) -> &[Literal] {
        &self.facts
    }

    pub fn fact(&self, i: u32) -> &Literal {
        &self.facts[i as usize]
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: Symbol) -> Option<&Rule> {
        self.rule_index.get(&id).map(|&i| &self.rules[i as usize])
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn contains_fact(&self, l: &Literal) -> bool {
        l.positive && self.fact_set.contains(l)
    }

    /// Facts that could unify with `l`: the smallest index bucket among the
    /// literal's constant arguments, or every fact of the predicate.
    pub fn candidate_facts(&self, l: &Literal) -> &[u32] {
        let mut best: Option<&[u32]> = None;
        for (pos, a) in l.args.iter().enumerate() {
            if let Term::Const(c) = a {
                let bucket = self.facts_by_arg.get(&(l.predicate, pos as u32, *c)).map_or(&EMPTY[..], |v| &v[..]);
                if best.is_none_or(|b| bucket.len() < b.len()) {
                    best = Some(bucket);
                }
            }
        }
        best.unwrap_or_else(|| self.facts_by_pred.get(&l.predicate).map_or(&EMPTY[..], |v| &v[..]))
    }

    /// Indices of rules whose consequent has predicate `p`, in rule-id order.
    pub fn rules_for(&self, p: Symbol) -> &[u32] {
        self.rules_by_pred.get(&p).map_or(&EMPTY[..], |v| &v[..])
    }

    pub fn rule_at(&self, i: u32) -> &Rule {
        &self.rules[i as usize]
    }

    pub fn num_gafs(&self, p: Symbol) -> usize {
        self.facts_by_pred.get(&p).map_or(0, Vec::len)
    }

    pub fn num_rules(&self, p: Symbol) -> usize {
        self.rules_by_pred.get(&p).map_or(0, Vec::len)
    }

    pub fn is_transitive(&self, p: Symbol, position: usize) -> bool {
        self.transitive.contains(&(p, position))
    }

    /// Declared transitive argument positions of `p` (1-based).
    pub fn transitive_positions(&self, p: Symbol) -> impl Iterator<Item = usize> + '_ {
        self.transitive.range((p, 0)..=(p, usize::MAX)).map(|(_, k)| *k)
    }

    pub fn transitive_declarations(&self) -> &BTreeSet<(Symbol, usize)> {
        &self.transitive
    }

    pub fn is_procedural(&self, p: Symbol) -> bool {
        self.procedural.contains(&p)
    }

    pub fn arity(&self, p: Symbol) -> Option<usize> {
        self.arity.get(&p).map(|a| a.0)
    }

    /// Every predicate mentioned anywhere, sorted by name.
    pub fn predicates(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.arity.keys().copied()
    }

    pub fn holds_isa(&self, t: Symbol, c: Symbol) -> bool {
        self.taxonomy.holds_isa(t, c)
    }

    pub fn generalizations(&self, t: Symbol) -> BTreeSet<Symbol> {
        self.taxonomy.generalizations(t)
    }

    pub fn term_generality(&self, t: Symbol) -> u64 {
        self.taxonomy.term_generality(t)
    }

    /// Canonical text form. Loading the output reproduces this KB, and two
    /// equal KBs always serialize to identical bytes.
    pub fn to_text(&self) -> String {
        let isa_sym = Symbol::intern(ISA);
        let genls_sym = Symbol::intern(GENLS);
        let mut out = String::new();
        for (p, (n, _)) in &self.arity {
            if *p != isa_sym && *p != genls_sym {
                let _ = writeln!(out, "(arity {p} {n})");
            }
        }
        let referenced: BTreeSet<Symbol> = self.taxonomy.genls_edges().flat_map(|(a, b)| [a, b]).collect();
        for c in self.taxonomy.concepts() {
            if !referenced.contains(c) {
                let _ = writeln!(out, "(concept {c})");
            }
        }
        for (a, b) in self.taxonomy.genls_edges() {
            let _ = writeln!(out, "(genls {a} {b})");
        }
        for (t, c) in self.taxonomy.isa_edges() {
            let _ = writeln!(out, "(isa {t} {c})");
        }
        for (t, g) in self.taxonomy.stored_generality() {
            let _ = writeln!(out, "(generality {t} {g})");
        }
        for (p, k) in &self.transitive {
            let _ = writeln!(out, "(transitive {p} {k})");
        }
        for p in &self.procedural {
            let _ = writeln!(out, "(procedural {p})");
        }
        for f in &self.facts {
            if f.predicate != isa_sym && f.predicate != genls_sym {
                let _ = writeln!(out, "(fact {f})");
            }
        }
        for r in &self.rules {
            let _ = writeln!(out, "{}", r.to_text());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse_clause;

    fn lit(s: &str) -> Literal {
        parse_clause(s).unwrap().0.remove(0)
    }

    #[test]
    fn rule_validation() {
        assert!(Rule::new("r", vec![], lit("(q ?x)"), true).is_err());
        assert!(Rule::new("r", vec![lit("(p ?x)")], lit("(q ?y)"), true).is_err());
        assert!(Rule::new("r", vec![lit("(not (p ?x))")], lit("(q ?x)"), true).is_err());
        let r = Rule::new("r", vec![lit("(p ?x ?y)"), lit("(s ?y ?x)")], lit("(q ?x)"), true).unwrap();
        assert_eq!(r.vars().len(), 2);
    }

    #[test]
    fn statistics() {
        let mut b = KbBuilder::new();
        b.fact(lit("(p a b)")).fact(lit("(p b c)")).fact(lit("(p a b)"));
        b.rule(Rule::new("r1", vec![lit("(p ?x ?y)")], lit("(q ?x ?y)"), true).unwrap());
        b.rule(Rule::new("r2", vec![lit("(q ?x ?y)")], lit("(q ?y ?x)"), true).unwrap());
        let kb = b.build().unwrap();
        assert_eq!(kb.num_gafs(Symbol::intern("p")), 2);
        assert_eq!(kb.num_rules(Symbol::intern("q")), 2);
        assert_eq!(kb.num_rules(Symbol::intern("p")), 0);
        assert_eq!(kb.candidate_facts(&lit("(p ?x c)")).len(), 1);
        assert_eq!(kb.candidate_facts(&lit("(p zz ?y)")).len(), 0);
    }

    #[test]
    fn transitive_needs_binary_predicate() {
        let mut b = KbBuilder::new();
        b.fact(lit("(t a b c)")).transitive("t", 1);
        assert!(b.build().is_err());
    }

    #[test]
    fn duplicate_rule_ids_rejected() {
        let mut b = KbBuilder::new();
        b.rule(Rule::new("r", vec![lit("(p ?x)")], lit("(q ?x)"), true).unwrap());
        b.rule(Rule::new("r", vec![lit("(s ?x)")], lit("(q ?x)"), true).unwrap());
        assert!(b.build().is_err());
    }
}
