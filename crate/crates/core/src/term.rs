//! Terms, literals and clauses.

use std::collections::BTreeSet;
use std::fmt;

use crate::symbol::Symbol;

/// A logic variable. `scope` is 0 for variables as written in a query or
/// rule; rule copies made during search get a fresh non-zero scope.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var {
    pub name: Symbol,
    pub scope: u32,
}

impl Var {
    pub fn new(name: &str) -> Var {
        Var { name: Symbol::intern(name.trim_start_matches('?')), scope: 0 }
    }

    pub fn scoped(self, scope: u32) -> Var {
        Var { scope, ..self }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scope == 0 {
            write!(f, "?{}", self.name)
        } else {
            write!(f, "?{}_{}", self.name, self.scope)
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Const(Symbol),
    Var(Var),
}

impl Term {
    pub fn constant(name: &str) -> Term {
        Term::Const(Symbol::intern(name))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_const(&self) -> Option<Symbol> {
        match self {
            Term::Const(c) => Some(*c),
            Term::Var(_) => None,
        }
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            Term::Const(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Literal {
    pub predicate: Symbol,
    pub args: Vec<Term>,
    pub positive: bool,
}

impl Literal {
    pub fn new(predicate: &str, args: Vec<Term>) -> Literal {
        Literal { predicate: Symbol::intern(predicate), args, positive: true }
    }

    pub fn negated(mut self) -> Literal {
        self.positive = !self.positive;
        self
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn is_fully_unbound(&self) -> bool {
        !self.args.is_empty() && self.args.iter().all(Term::is_var)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.args.iter().filter_map(Term::as_var)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("(not ")?;
        }
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")?;
        if !self.positive {
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// A conjunction of literals.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Clause(pub Vec<Literal>);

impl Clause {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    /// Distinct variables in order of first occurrence.
    pub fn vars(&self) -> Vec<Var> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in self.0.iter().flat_map(Literal::vars) {
            if seen.insert(v) {
                out.push(v);
            }
        }
        out
    }

    /// Distinct constants mentioned in argument positions.
    pub fn constants(&self) -> BTreeSet<Symbol> {
        self.0.iter().flat_map(|l| l.args.iter().filter_map(Term::as_const)).collect()
    }

    /// Drops repeated literals, keeping first occurrences.
    pub fn dedup(&mut self) {
        let mut kept: Vec<Literal> = Vec::with_capacity(self.0.len());
        for l in self.0.drain(..) {
            if !kept.contains(&l) {
                kept.push(l);
            }
        }
        self.0 = kept;
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [] => f.write_str("(and)"),
            [single] => write!(f, "{single}"),
            lits => {
                f.write_str("(and")?;
                for l in lits {
                    write!(f, " {l}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl From<Vec<Literal>> for Clause {
    fn from(v: Vec<Literal>) -> Self {
        Clause(v)
    }
}
