//! Dependency ordering of binding groups.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

/// A strongly connected component of a binding group, dependencies first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    /// Member indices in their original order.
    pub members: Vec<usize>,
    /// True when some member refers to a member of the same component.
    pub recursive: bool,
}

/// Orders `n` bindings into components such that every component comes
/// after the components it refers to. `refs(i)` lists the bindings that
/// binding `i` mentions. The order is deterministic.
pub fn components(n: usize, refs: impl Fn(usize) -> Vec<usize>) -> Vec<Component> {
    let mut g = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..n).map(|i| g.add_node(i)).collect();
    let mut edges = vec![Vec::new(); n];
    for i in 0..n {
        let mut rs = refs(i);
        rs.sort_unstable();
        rs.dedup();
        for j in rs {
            g.add_edge(nodes[i], nodes[j], ());
            edges[i].push(j);
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|scc| {
            let mut members: Vec<usize> = scc.into_iter().map(|ix| g[ix]).collect();
            members.sort_unstable();
            let recursive = members.len() > 1 || edges[members[0]].contains(&members[0]);
            Component { members, recursive }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dependencies_come_first() {
        // 0 -> 1 -> 2, 2 -> 1 (cycle), 3 isolated self loop
        let refs = |i: usize| match i {
            0 => vec![1],
            1 => vec![2],
            2 => vec![1],
            3 => vec![3],
            _ => vec![],
        };
        let cs = components(4, refs);
        let pos = |m: usize| cs.iter().position(|c| c.members.contains(&m)).unwrap();
        assert!(pos(1) < pos(0));
        assert_eq!(cs[pos(1)].members, vec![1, 2]);
        assert!(cs[pos(1)].recursive);
        assert!(cs[pos(3)].recursive);
        assert!(!cs[pos(0)].recursive);
    }
}
