//! Minimal S-expression reader shared by the KB, query, tree and suite
//! formats. Atoms are whitespace/paren delimited; `;` starts a comment.

use std::fmt;

use crate::term::{Clause, Literal, Term};

#[derive(Clone, Debug, PartialEq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct SexpError {
    pub message: String,
}

fn err<T>(message: impl Into<String>) -> Result<T, SexpError> {
    Err(SexpError { message: message.into() })
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s) => Some(s),
            Sexp::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items) => Some(items),
            Sexp::Atom(_) => None,
        }
    }

    /// The head atom of a list, e.g. `fact` in `(fact ...)`.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexp::atom)
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(items) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parses every top-level expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut chars = text.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        match c {
            ';' => {
                for (_, c) in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '(' => stack.push(Vec::new()),
            ')' => {
                if stack.len() < 2 {
                    return err("unbalanced ')'");
                }
                let done = stack.pop().unwrap();
                stack.last_mut().unwrap().push(Sexp::List(done));
            }
            c if c.is_whitespace() => {}
            _ => {
                let mut end = start + c.len_utf8();
                while let Some(&(i, c)) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    end = i + c.len_utf8();
                    chars.next();
                }
                stack.last_mut().unwrap().push(Sexp::Atom(text[start..end].to_owned()));
            }
        }
    }
    if stack.len() != 1 {
        return err("unbalanced '('");
    }
    Ok(stack.pop().unwrap())
}

/// Parses exactly one expression.
pub fn parse_one(text: &str) -> Result<Sexp, SexpError> {
    let mut all = parse_all(text)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        0 => err("empty input"),
        n => err(format!("expected one expression, found {n}")),
    }
}

pub fn to_term(s: &Sexp) -> Result<Term, SexpError> {
    match s {
        Sexp::Atom(a) if a.len() > 1 && a.starts_with('?') => Ok(Term::var(a)),
        Sexp::Atom(a) if a == "?" => err("bare '?' is not a variable name"),
        Sexp::Atom(a) => Ok(Term::constant(a)),
        Sexp::List(_) => err(format!("nested term {s} is not supported")),
    }
}

/// `(pred t1 ... tn)` or `(not (pred ...))`.
pub fn to_literal(s: &Sexp) -> Result<Literal, SexpError> {
    let items = match s.list() {
        Some(items) if !items.is_empty() => items,
        _ => return err(format!("expected a literal, found {s}")),
    };
    if items[0].atom() == Some("not") {
        if items.len() != 2 {
            return err(format!("malformed negation {s}"));
        }
        return Ok(to_literal(&items[1])?.negated());
    }
    let pred = match items[0].atom() {
        Some(p) if !p.starts_with('?') => p,
        _ => return err(format!("bad predicate in {s}")),
    };
    let args = items[1..].iter().map(to_term).collect::<Result<Vec<_>, _>>()?;
    Ok(Literal::new(pred, args))
}

/// A single literal or `(and lit ...)`.
pub fn to_clause(s: &Sexp) -> Result<Clause, SexpError> {
    if s.head() == Some("and") {
        let items = s.list().unwrap();
        Ok(Clause(items[1..].iter().map(to_literal).collect::<Result<_, _>>()?))
    } else {
        Ok(Clause(vec![to_literal(s)?]))
    }
}

/// Parses query text such as `(p ?x a)` or `(and (p ?x) (q ?x))`.
pub fn parse_clause(text: &str) -> Result<Clause, SexpError> {
    to_clause(&parse_one(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_nesting() {
        let v = parse_all("; header\n(a (b c)) ; trailing\n(d)").unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].to_string(), "(a (b c))");
        assert_eq!(v[1].head(), Some("d"));
    }

    #[test]
    fn unbalanced_is_an_error() {
        assert!(parse_all("(a (b)").is_err());
        assert!(parse_all("a)").is_err());
    }

    #[test]
    fn clause_forms() {
        let c = parse_clause("(and (p ?x a) (not (q ?x)))").unwrap();
        assert_eq!(c.len(), 2);
        assert!(!c.0[1].positive);
        assert_eq!(c.to_string(), "(and (p ?x a) (not (q ?x)))");
        let single = parse_clause("(p ?x)").unwrap();
        assert_eq!(single.len(), 1);
    }
}
