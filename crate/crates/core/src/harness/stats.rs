//! Success rates of search nodes and transformation links.

use std::collections::BTreeMap;

use crate::search::SearchGraph;

/// A node succeeds when at least one answer lies below it; a
/// transformation link succeeds when its target node does.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuccessStats {
    /// depth -> (successful nodes, nodes)
    pub by_depth: BTreeMap<u32, (usize, usize)>,
    /// literal count -> (successful nodes, nodes)
    pub by_literals: BTreeMap<usize, (usize, usize)>,
    pub bucket_width: u32,
    /// Successful transformation links per id range
    /// `[i * bucket_width, (i + 1) * bucket_width)`.
    pub link_buckets: Vec<usize>,
}

fn ratio((s, n): (usize, usize)) -> f64 {
    if n == 0 {
        0.0
    } else {
        s as f64 / n as f64
    }
}

impl SuccessStats {
    /// P(success | depth = d); 0 when no node has depth `d`.
    pub fn p_depth(&self, d: u32) -> f64 {
        self.by_depth.get(&d).copied().map_or(0.0, ratio)
    }

    /// P(success | literals = n); 0 when no node has `n` literals.
    pub fn p_literals(&self, n: usize) -> f64 {
        self.by_literals.get(&n).copied().map_or(0.0, ratio)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("depth,successes,nodes,p_success\n");
        for (d, c) in &self.by_depth {
            s += &format!("{d},{},{},{:.6}\n", c.0, c.1, ratio(*c));
        }
        s += "\nliterals,successes,nodes,p_success\n";
        for (n, c) in &self.by_literals {
            s += &format!("{n},{},{},{:.6}\n", c.0, c.1, ratio(*c));
        }
        s += "\nlink_id_from,link_id_to,successful_transformation_links\n";
        for (i, c) in self.link_buckets.iter().enumerate() {
            let lo = i as u64 * u64::from(self.bucket_width);
            s += &format!("{lo},{},{c}\n", lo + u64::from(self.bucket_width) - 1);
        }
        s
    }
}

/// Aggregates success tables over every node and link of `graphs`.
pub fn success_stats<'a>(graphs: impl IntoIterator<Item = &'a SearchGraph>, bucket_width: u32) -> SuccessStats {
    let width = bucket_width.max(1);
    let mut st = SuccessStats { bucket_width: width, ..Default::default() };
    for g in graphs {
        for n in g.nodes() {
            let ok = usize::from(n.answers_below > 0);
            let d = st.by_depth.entry(n.depth).or_default();
            d.0 += ok;
            d.1 += 1;
            let l = st.by_literals.entry(n.clause.len()).or_default();
            l.0 += ok;
            l.1 += 1;
        }
        for link in g.links() {
            let bucket = (link.id.0 / width) as usize;
            if st.link_buckets.len() <= bucket {
                st.link_buckets.resize(bucket + 1, 0);
            }
            if link.is_transformation() && g.node(link.to).answers_below > 0 {
                st.link_buckets[bucket] += 1;
            }
        }
    }
    st
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse_clause;

    #[test]
    fn unanswered_graph_is_all_zero() {
        let g = SearchGraph::new(parse_clause("(p ?x)").unwrap());
        let st = success_stats([&g], 10);
        assert_eq!(st.p_depth(0), 0.0);
        assert_eq!(st.by_depth[&0], (0, 1));
    }
}
