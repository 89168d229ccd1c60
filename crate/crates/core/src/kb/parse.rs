//! Line-oriented KB reader.
//!
//! ```text
//! ; comment
//! (arity locatedIn 2)
//! (genls USCity City)
//! (isa CityOfAnaheimCA USCity)
//! (fact (locatedIn AngelStadium CityOfAnaheimCA))
//! (rule r1 (ante (p ?x ?y) (q ?y)) (conseq (s ?x)))
//! ```

use std::io::Read;
use std::path::Path;

use super::{KbBuilder, KbError, KnowledgeBase, Rule};
use crate::sexpr::{parse_all, to_literal, Sexp};
use crate::symbol::Symbol;

fn syntax(line: usize, message: impl Into<String>) -> KbError {
    KbError::Syntax { line, message: message.into() }
}

fn atom(line: usize, s: &Sexp, what: &str) -> Result<String, KbError> {
    s.atom().map(str::to_owned).ok_or_else(|| syntax(line, format!("expected {what}, found {s}")))
}

fn number(line: usize, s: &Sexp, what: &str) -> Result<u64, KbError> {
    atom(line, s, what)?.parse().map_err(|_| syntax(line, format!("expected {what}, found {s}")))
}

fn statement(b: &mut KbBuilder, line: usize, s: &Sexp) -> Result<(), KbError> {
    let items = s.list().ok_or_else(|| syntax(line, format!("expected a statement, found {s}")))?;
    let head = items.first().and_then(Sexp::atom).ok_or_else(|| syntax(line, "statement without a head"))?;
    let arg_count = items.len() - 1;
    let expect = |n: usize| {
        if arg_count == n {
            Ok(())
        } else {
            Err(syntax(line, format!("({head} ...) takes {n} argument(s), found {arg_count}")))
        }
    };
    match head {
        "fact" => {
            expect(1)?;
            let l = to_literal(&items[1]).map_err(|e| syntax(line, e.message))?;
            b.fact_at(line, l);
        }
        "isa" | "genls" => {
            expect(2)?;
            let l = to_literal(s).map_err(|e| syntax(line, e.message))?;
            b.fact_at(line, l);
        }
        "concept" => {
            expect(1)?;
            b.concept(&atom(line, &items[1], "a concept")?);
        }
        "generality" => {
            expect(2)?;
            let t = atom(line, &items[1], "a term")?;
            let n = number(line, &items[2], "a non-negative integer")?;
            b.generality(&t, n);
        }
        "transitive" => {
            expect(2)?;
            let p = atom(line, &items[1], "a predicate")?;
            let k = number(line, &items[2], "an argument position")? as usize;
            b.transitive_at(line, Symbol::intern(&p), k);
        }
        "procedural" => {
            expect(1)?;
            b.procedural(&atom(line, &items[1], "a predicate")?);
        }
        "arity" => {
            expect(2)?;
            let p = atom(line, &items[1], "a predicate")?;
            let n = number(line, &items[2], "an arity")? as usize;
            b.arity_at(line, Symbol::intern(&p), n);
        }
        "rule" => {
            if !(3..=4).contains(&arg_count) {
                return Err(syntax(line, "expected (rule ID (ante ...) (conseq ...) [nonhorn])"));
            }
            let id = atom(line, &items[1], "a rule id")?;
            let ante = items[2].list().filter(|_| items[2].head() == Some("ante"));
            let conseq = items[3].list().filter(|_| items[3].head() == Some("conseq"));
            let (Some(ante), Some(conseq)) = (ante, conseq) else {
                return Err(syntax(line, "expected (ante ...) then (conseq ...)"));
            };
            if conseq.len() != 2 {
                return Err(syntax(line, "conseq takes exactly one literal"));
            }
            let horn = match items.get(4).map(|s| s.atom()) {
                None => true,
                Some(Some("nonhorn")) => false,
                Some(_) => return Err(syntax(line, "the only rule flag is 'nonhorn'")),
            };
            let antecedent = ante[1..]
                .iter()
                .map(to_literal)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| syntax(line, e.message))?;
            let consequent = to_literal(&conseq[1]).map_err(|e| syntax(line, e.message))?;
            let rule = Rule::new(&id, antecedent, consequent, horn).map_err(|message| KbError::Invalid { line, message })?;
            b.rule_at(line, rule);
        }
        other => return Err(syntax(line, format!("unknown statement '{other}'"))),
    }
    Ok(())
}

/// Parses a KB from text.
pub fn load_kb(mut source: impl Read) -> Result<KnowledgeBase, KbError> {
    let mut text = String::new();
    source.read_to_string(&mut text).map_err(|e| KbError::Io(e.to_string()))?;
    let mut b = KbBuilder::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let exprs = parse_all(raw).map_err(|e| syntax(line, e.message))?;
        for s in &exprs {
            statement(&mut b, line, s)?;
        }
    }
    b.build()
}

pub fn load_kb_file(path: impl AsRef<Path>) -> Result<KnowledgeBase, KbError> {
    let f = std::fs::File::open(path.as_ref()).map_err(|e| KbError::Io(format!("{}: {e}", path.as_ref().display())))?;
    load_kb(std::io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kb(text: &str) -> Result<KnowledgeBase, KbError> {
        load_kb(text.as_bytes())
    }

    #[test]
    fn empty_stream() {
        let k = kb("").unwrap();
        assert_eq!(k.facts().len(), 0);
        assert_eq!(k.rules().len(), 0);
        assert_eq!(k.taxonomy().concepts().len(), 0);
    }

    #[test]
    fn fact_form_isa_feeds_taxonomy() {
        let k = kb("(fact (isa A C1))\n(genls C1 C2)\n").unwrap();
        assert!(k.holds_isa(Symbol::intern("A"), Symbol::intern("C2")));
    }

    #[test]
    fn syntax_error_reports_line() {
        let e = kb("(genls A B)\n(fact (p a)\n").unwrap_err();
        assert!(matches!(e, KbError::Syntax { line: 2, .. }), "{e}");
        let e = kb("(bogus a)").unwrap_err();
        assert!(matches!(e, KbError::Syntax { line: 1, .. }));
    }

    #[test]
    fn arity_conflict() {
        let e = kb("(fact (p a b))\n(fact (p a))\n").unwrap_err();
        assert!(matches!(e, KbError::Arity { .. }), "{e}");
        let e = kb("(arity p 3)\n(fact (p a b))\n").unwrap_err();
        assert!(matches!(e, KbError::Arity { .. }), "{e}");
    }

    #[test]
    fn undeclared_concept() {
        let e = kb("(isa A Nowhere)").unwrap_err();
        assert!(matches!(e, KbError::UndeclaredConcept { line: 1, .. }), "{e}");
        assert!(kb("(concept Somewhere)\n(isa A Somewhere)").is_ok());
    }

    #[test]
    fn order_independent() {
        let a = "(genls C1 C2)\n(isa A C1)\n(fact (p a b))\n(rule r (ante (p ?x ?y)) (conseq (q ?y)))\n(generality C2 7)\n(transitive genls 1)\n";
        let mut lines: Vec<&str> = a.lines().collect();
        lines.reverse();
        let b = lines.join("\n");
        assert_eq!(kb(a).unwrap().to_text(), kb(&b).unwrap().to_text());
    }

    #[test]
    fn round_trip_text() {
        let src = "(arity q 1)\n(concept Lone)\n(genls C1 C2)\n(isa A C1)\n(generality A 99)\n(procedural p)\n(fact (p a b))\n(rule r (ante (p ?x ?y)) (conseq (q ?y)) nonhorn)\n";
        let k = kb(src).unwrap();
        let again = kb(&k.to_text()).unwrap();
        assert_eq!(k.to_text(), again.to_text());
        assert_eq!(again.term_generality(Symbol::intern("A")), 99);
        assert!(!again.rules()[0].horn);
        assert!(again.is_procedural(Symbol::intern("p")));
    }

    #[test]
    fn generality_defaults_to_zero() {
        let k = kb("(generality T 99)").unwrap();
        assert_eq!(k.term_generality(Symbol::intern("T")), 99);
        assert_eq!(k.term_generality(Symbol::intern("never-declared")), 0);
    }
}
