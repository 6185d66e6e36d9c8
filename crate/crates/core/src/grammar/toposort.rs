//! Bottom-up topological ordering of a (possibly cyclic) clause graph.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

fn find_reachable(clause: usize, children: &[Vec<usize>], visited: &mut [bool], out: &mut Vec<usize>) {
    if visited[clause] {
        return;
    }
    visited[clause] = true;
    for &sub in &children[clause] {
        find_reachable(sub, children, visited, out);
    }
    out.push(clause);
}

fn find_cycle_heads(
    clause: usize,
    children: &[Vec<usize>],
    discovered: &mut [bool],
    finished: &mut [bool],
    heads: &mut Vec<usize>,
) {
    discovered[clause] = true;
    for &sub in &children[clause] {
        if discovered[sub] {
            if !heads.contains(&sub) {
                heads.push(sub);
            }
        } else if !finished[sub] {
            find_cycle_heads(sub, children, discovered, finished, heads);
        }
    }
    discovered[clause] = false;
    finished[clause] = true;
}

/// Deduplicated postorder DFS from, in turn: toplevel clauses, the lowest
/// precedence clause of each precedence hierarchy, and cycle heads. Roots
/// within each class follow rule declaration order.
pub(super) fn listing_order(children: &[Vec<usize>], rules: &[usize], lowest: &[usize]) -> Vec<usize> {
    let n = children.len();
    let mut unordered = Vec::new();
    let mut visited = vec![false; n];
    for &r in rules {
        find_reachable(r, children, &mut visited, &mut unordered);
    }
    let mut is_sub = vec![false; n];
    for &c in &unordered {
        for &s in &children[c] {
            is_sub[s] = true;
        }
    }
    let toplevel: Vec<usize> = unordered.iter().copied().filter(|&c| !is_sub[c]).collect();

    let mut roots = toplevel.clone();
    roots.extend_from_slice(lowest);

    let mut discovered = vec![false; n];
    let mut finished = vec![false; n];
    let mut heads = Vec::new();
    for &c in toplevel.iter().chain(rules) {
        if !finished[c] {
            find_cycle_heads(c, children, &mut discovered, &mut finished, &mut heads);
        }
    }
    roots.extend(heads);

    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    for r in roots {
        find_reachable(r, children, &mut visited, &mut order);
    }
    order
}

pub(super) struct Refined {
    pub order: Vec<usize>,
    pub left_recursion_head: Option<usize>,
}

fn sccs(edges: &[Vec<usize>]) -> (Vec<usize>, Vec<bool>) {
    let mut graph: DiGraph<(), ()> = DiGraph::new();
    let nodes: Vec<NodeIndex> = (0..edges.len()).map(|_| graph.add_node(())).collect();
    for (p, subs) in edges.iter().enumerate() {
        for &s in subs {
            graph.add_edge(nodes[p], nodes[s], ());
        }
    }
    let mut comp = vec![0; edges.len()];
    let mut cyclic = vec![false; edges.len()];
    for (ci, members) in tarjan_scc(&graph).into_iter().enumerate() {
        let on_cycle = members.len() > 1 || edges[members[0].index()].contains(&members[0].index());
        for m in members {
            comp[m.index()] = ci;
            cyclic[m.index()] = on_cycle;
        }
    }
    (comp, cyclic)
}

/// Reorder `initial` so that every same-position dependency that is not
/// part of a same-position cycle points to an earlier clause. Edges between
/// different strongly connected components keep their bottom-up order;
/// inside a component only same-position edges constrain the order, and
/// same-position cycles are broken where `initial` broke them. Ties are
/// resolved by position in `initial`, so an order that already satisfies
/// the constraints comes back unchanged.
pub(super) fn refine_same_position(
    initial: &[usize],
    children: &[Vec<usize>],
    same_pos: &[Vec<usize>],
) -> Refined {
    let n = initial.len();
    let mut rank = vec![0; n];
    for (i, &c) in initial.iter().enumerate() {
        rank[c] = i;
    }
    let (comp, _) = sccs(children);
    let (sp_comp, sp_cyclic) = sccs(same_pos);

    // deps[p] = clauses that must come before p
    let mut deps: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    for p in 0..n {
        for &s in &children[p] {
            if s != p && comp[s] != comp[p] {
                deps[p].insert(s);
            }
        }
        for &s in &same_pos[p] {
            if s != p && (sp_comp[s] != sp_comp[p] || rank[s] < rank[p]) {
                deps[p].insert(s);
            }
        }
    }
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pending = vec![0; n];
    for p in 0..n {
        pending[p] = deps[p].len();
        for &s in &deps[p] {
            dependents[s].push(p);
        }
    }
    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = (0..n)
        .filter(|&c| pending[c] == 0)
        .map(|c| Reverse((rank[c], c)))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((_, c))) = ready.pop() {
        order.push(c);
        for &d in &dependents[c] {
            pending[d] -= 1;
            if pending[d] == 0 {
                ready.push(Reverse((rank[d], d)));
            }
        }
    }
    debug_assert_eq!(order.len(), n, "constraint graph must be acyclic");

    let left_recursion_head = order.iter().rev().copied().find(|&c| sp_cyclic[c]);
    Refined {
        order,
        left_recursion_head,
    }
}
