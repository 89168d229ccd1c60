//! Property tests for unification and the clause text form.

use proptest::prelude::*;

use kbsearch::sexpr::parse_clause;
use kbsearch::{unify, Clause, Literal, Term};

fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        prop::sample::select(vec!["a", "b", "c"]).prop_map(Term::constant),
        prop::sample::select(vec!["x", "y", "z", "w"]).prop_map(Term::var),
    ]
}

fn literal() -> impl Strategy<Value = Literal> {
    (prop::sample::select(vec!["p", "q"]), prop::collection::vec(term(), 2)).prop_map(|(p, args)| Literal::new(p, args))
}

proptest! {
    #[test]
    fn unifier_equates_both_sides(a in literal(), b in literal()) {
        if let Some(s) = unify(&a, &b) {
            prop_assert_eq!(s.apply_literal(&a), s.apply_literal(&b));
        }
    }

    #[test]
    fn unification_is_symmetric(a in literal(), b in literal()) {
        prop_assert_eq!(unify(&a, &b).is_some(), unify(&b, &a).is_some());
    }

    #[test]
    fn applying_a_unifier_twice_changes_nothing(a in literal(), b in literal()) {
        if let Some(s) = unify(&a, &b) {
            let once = s.apply_literal(&a);
            prop_assert_eq!(s.apply_literal(&once), once);
        }
    }

    #[test]
    fn ground_literals_unify_only_with_themselves(
        a in prop::collection::vec(prop::sample::select(vec!["a", "b"]), 2),
        b in prop::collection::vec(prop::sample::select(vec!["a", "b"]), 2),
    ) {
        let la = Literal::new("p", a.iter().map(|c| Term::constant(c)).collect());
        let lb = Literal::new("p", b.iter().map(|c| Term::constant(c)).collect());
        prop_assert_eq!(unify(&la, &lb).is_some(), la == lb);
    }

    #[test]
    fn clause_text_round_trips(lits in prop::collection::vec(literal(), 1..4)) {
        let c = Clause(lits);
        prop_assert_eq!(parse_clause(&c.to_string()).unwrap(), c);
    }
}

#[test]
fn occurs_through_shared_variable() {
    let a = parse_clause("(p ?x ?x)").unwrap();
    let b = parse_clause("(p a b)").unwrap();
    assert!(unify(&a.0[0], &b.0[0]).is_none());
    let c = parse_clause("(p ?y b)").unwrap();
    let s = unify(&a.0[0], &c.0[0]).unwrap();
    assert_eq!(s.apply_literal(&a.0[0]).to_string(), "(p b b)");
}
