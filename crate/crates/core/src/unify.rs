//! Syntactic unification over function-free literals.
//!
//! Terms are constants or variables, so the occurs check reduces to refusing
//! a binding of a variable to itself; it is still performed explicitly in
//! [`Substitution::bind`].

use std::collections::BTreeMap;
use std::fmt;

use crate::term::{Clause, Literal, Term, Var};

/// A finite map from variables to terms. Substitutions returned by
/// [`unify`] are idempotent: no bound variable occurs in the range.
#[derive(Clone, Default, PartialEq, Eq, Hash, Debug)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, v: Var) -> Option<Term> {
        self.map.get(&v).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, Term)> + '_ {
        self.map.iter().map(|(v, t)| (*v, *t))
    }

    /// Inserts `v -> t` without any checks. Used to build substitutions
    /// from known-good parts (answers, link bindings).
    pub fn insert(&mut self, v: Var, t: Term) {
        self.map.insert(v, t);
    }

    /// Follows variable bindings until reaching a constant or an unbound
    /// variable.
    pub fn resolve(&self, mut t: Term) -> Term {
        // Chains are bounded by the number of bindings; a cycle cannot
        // form because bind() rejects self-reference after resolution.
        for _ in 0..=self.map.len() {
            match t {
                Term::Var(v) => match self.map.get(&v) {
                    Some(next) => t = *next,
                    None => return t,
                },
                Term::Const(_) => return t,
            }
        }
        t
    }

    fn bind(&mut self, v: Var, t: Term) -> bool {
        let t = self.resolve(t);
        if t == Term::Var(v) {
            // occurs check: v := v is the only self-reference possible
            return true;
        }
        self.map.insert(v, t);
        true
    }

    /// Single-step application. For idempotent substitutions (every MGU)
    /// this equals [`Substitution::resolve`].
    pub fn apply_term(&self, t: Term) -> Term {
        match t {
            Term::Var(v) => self.map.get(&v).copied().unwrap_or(t),
            c => c,
        }
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        Literal {
            predicate: l.predicate,
            args: l.args.iter().map(|t| self.apply_term(*t)).collect(),
            positive: l.positive,
        }
    }

    pub fn apply_clause(&self, c: &Clause) -> Clause {
        Clause(c.0.iter().map(|l| self.apply_literal(l)).collect())
    }

    /// Returns the substitution equivalent to applying `self` and then
    /// `other`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut map: BTreeMap<Var, Term> =
            self.map.iter().map(|(v, t)| (*v, other.apply_term(*t))).collect();
        for (v, t) in &other.map {
            map.entry(*v).or_insert(*t);
        }
        map.retain(|v, t| *t != Term::Var(*v));
        Substitution { map }
    }

    /// Fully resolves every binding so the substitution is idempotent.
    fn normalize(&mut self) {
        let keys: Vec<Var> = self.map.keys().copied().collect();
        for k in keys {
            let t = self.resolve(Term::Var(k));
            self.map.insert(k, t);
        }
        self.map.retain(|v, t| *t != Term::Var(*v));
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}->{t}")?;
        }
        f.write_str("}")
    }
}

fn unify_terms(a: Term, b: Term, s: &mut Substitution) -> bool {
    let a = s.resolve(a);
    let b = s.resolve(b);
    match (a, b) {
        (Term::Const(x), Term::Const(y)) => x == y,
        (Term::Var(v), t) => s.bind(v, t),
        (t, Term::Var(v)) => s.bind(v, t),
    }
}

/// Extends `s` to unify `a` and `b`. On failure `s` may be partially
/// extended; callers clone first when they need to back out.
pub fn unify_with(a: &Literal, b: &Literal, s: &mut Substitution) -> bool {
    if a.predicate != b.predicate || a.positive != b.positive || a.args.len() != b.args.len() {
        return false;
    }
    a.args.iter().zip(&b.args).all(|(x, y)| unify_terms(*x, *y, s))
}

/// Most general unifier of two literals, or `None`.
pub fn unify(a: &Literal, b: &Literal) -> Option<Substitution> {
    let mut s = Substitution::new();
    if unify_with(a, b, &mut s) {
        s.normalize();
        Some(s)
    } else {
        None
    }
}

/// Copies a literal with every variable moved into `scope`.
pub fn rename_literal(l: &Literal, scope: u32) -> Literal {
    Literal {
        predicate: l.predicate,
        args: l
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Var(v.scoped(scope)),
                c => *c,
            })
            .collect(),
        positive: l.positive,
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
    fn binds_variable_to_constant() {
        let s = unify(&lit("(P ?x a)"), &lit("(P b a)")).unwrap();
        assert_eq!(s.get(Var::new("x")), Some(Term::constant("b")));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn predicate_arity_and_polarity_mismatch_fail() {
        assert!(unify(&lit("(P ?x)"), &lit("(Q ?x)")).is_none());
        assert!(unify(&lit("(P ?x)"), &lit("(P ?x ?y)")).is_none());
        assert!(unify(&lit("(P ?x)"), &lit("(not (P ?x))")).is_none());
    }

    #[test]
    fn shared_variable() {
        let s = unify(&lit("(P ?x f-term)"), &lit("(P ?x ?y)")).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(Var::new("y")), Some(Term::constant("f-term")));
    }

    #[test]
    fn repeated_variable_conflict() {
        assert!(unify(&lit("(P ?x ?x)"), &lit("(P a b)")).is_none());
        assert!(unify(&lit("(P ?x ?x)"), &lit("(P a a)")).is_some());
        assert!(unify(&lit("(P ?x ?x)"), &lit("(P ?y ?y)")).is_some());
    }

    #[test]
    fn apply_identity_and_partial() {
        let c = parse_clause("(and (P ?x ?y) (Q ?y))").unwrap();
        assert_eq!(Substitution::new().apply_clause(&c), c);
        let mut s = Substitution::new();
        s.insert(Var::new("x"), Term::constant("a"));
        assert_eq!(s.apply_literal(&c.0[0]).to_string(), "(P a ?y)");
    }

    #[test]
    fn chains_resolve_after_unification() {
        // ?x -> ?y, then ?y -> c: the MGU must be idempotent.
        let s = unify(&lit("(P ?x ?y ?y)"), &lit("(P ?y ?x c)")).unwrap();
        assert_eq!(s.apply_term(Term::var("x")), Term::constant("c"));
        assert_eq!(s.apply_term(Term::var("y")), Term::constant("c"));
        for (_, t) in s.iter() {
            assert_eq!(s.apply_term(t), t);
        }
    }

    #[test]
    fn renaming_moves_scope() {
        let r = rename_literal(&lit("(P ?x a)"), 7);
        assert_eq!(r.args[0], Term::Var(Var::new("x").scoped(7)));
        assert_eq!(r.args[1], Term::constant("a"));
    }
}
