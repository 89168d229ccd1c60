//! The taxonomy's isa closure against a breadth-first oracle.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use proptest::prelude::*;

use kbsearch::{KbBuilder, Symbol};

/// Concepts reachable from `start` over genls edges, including itself.
fn reachable(genls: &BTreeMap<usize, Vec<usize>>, start: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for &d in genls.get(&c).into_iter().flatten() {
            if seen.insert(d) {
                queue.push_back(d);
            }
        }
    }
    seen
}

proptest! {
    #[test]
    fn isa_matches_closure(
        edges in prop::collection::vec((1usize..8, 0usize..8), 0..14),
        members in prop::collection::vec((0usize..6, 0usize..8), 1..12),
    ) {
        // keep genls acyclic by pointing edges at lower-numbered concepts
        let edges: Vec<(usize, usize)> = edges.into_iter().filter(|(a, b)| b < a).collect();
        let mut b = KbBuilder::new();
        let mut genls: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for c in 0..8 {
            b.concept(&format!("C{c}"));
        }
        for &(sub, sup) in &edges {
            b.genls(&format!("C{sub}"), &format!("C{sup}"));
            genls.entry(sub).or_default().push(sup);
        }
        for &(t, c) in &members {
            b.isa(&format!("t{t}"), &format!("C{c}"));
        }
        let kb = b.build().unwrap();
        for t in 0..6 {
            let mut want = BTreeSet::new();
            for &(_, c) in members.iter().filter(|(m, _)| *m == t) {
                want.extend(reachable(&genls, c));
            }
            let term = Symbol::intern(&format!("t{t}"));
            for c in 0..8 {
                let concept = Symbol::intern(&format!("C{c}"));
                prop_assert_eq!(kb.holds_isa(term, concept), want.contains(&c));
            }
            let got: BTreeSet<String> = kb.generalizations(term).iter().map(|s| s.as_str().to_string()).collect();
            let want: BTreeSet<String> = want.iter().map(|c| format!("C{c}")).collect();
            prop_assert_eq!(got, want);
        }
    }
}
