//! Digraphs of states-and-cliques, strongly connected components, node
//! classification and execution counting.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::monoid::Clique;
use crate::system::{ConcurrentSystem, State};

/// Plain digraph on `0..n` with sorted, deduplicated adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Digraph {
    adj: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Self {
        let mut g = Digraph::new(n);
        for &(u, v) in arcs {
            g.add_arc(u, v);
        }
        g
    }

    pub fn add_arc(&mut self, u: usize, v: usize) {
        if let Err(pos) = self.adj[u].binary_search(&v) {
            self.adj[u].insert(pos, v);
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn successors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn num_arcs(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    pub fn reverse(&self) -> Digraph {
        let mut r = Digraph::new(self.len());
        for (u, v) in self.arcs() {
            r.adj[v].push(u);
        }
        for l in &mut r.adj {
            l.sort_unstable();
        }
        r
    }

    /// Nodes reachable from any of `sources` by paths of length ≥ 0.
    pub fn reachable(&self, sources: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = Vec::new();
        for s in sources {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Subgraph induced by `keep`; returns it with the kept original
    /// indices in increasing order.
    pub fn induced(&self, keep: &[bool]) -> (Digraph, Vec<usize>) {
        let kept: Vec<usize> = (0..self.len()).filter(|&i| keep[i]).collect();
        let mut new_index = vec![usize::MAX; self.len()];
        for (j, &i) in kept.iter().enumerate() {
            new_index[i] = j;
        }
        let mut g = Digraph::new(kept.len());
        for (j, &i) in kept.iter().enumerate() {
            g.adj[j] = self.adj[i]
                .iter()
                .filter(|&&v| keep[v])
                .map(|&v| new_index[v])
                .collect();
        }
        (g, kept)
    }

    /// Tarjan's algorithm, iterative.
    pub fn condensation(&self) -> Condensation {
        let n = self.len();
        const UNSEEN: usize = usize::MAX;
        let mut index = vec![UNSEEN; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut raw_comp = vec![UNSEEN; n];
        let mut raw_count = 0;
        let mut next = 0;
        for root in 0..n {
            if index[root] != UNSEEN {
                continue;
            }
            let mut call: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (u, ref mut i)) = call.last_mut() {
                if let Some(&v) = self.adj[u].get(*i) {
                    *i += 1;
                    if index[v] == UNSEEN {
                        index[v] = next;
                        low[v] = next;
                        next += 1;
                        stack.push(v);
                        on_stack[v] = true;
                        call.push((v, 0));
                    } else if on_stack[v] {
                        low[u] = low[u].min(index[v]);
                    }
                } else {
                    call.pop();
                    if let Some(&(p, _)) = call.last() {
                        low[p] = low[p].min(low[u]);
                    }
                    if low[u] == index[u] {
                        loop {
                            let w = stack.pop().expect("tarjan stack");
                            on_stack[w] = false;
                            raw_comp[w] = raw_count;
                            if w == u {
                                break;
                            }
                        }
                        raw_count += 1;
                    }
                }
            }
        }
        // Renumber by smallest member.
        let mut renumber = vec![UNSEEN; raw_count];
        let mut count = 0;
        for v in 0..n {
            if renumber[raw_comp[v]] == UNSEEN {
                renumber[raw_comp[v]] = count;
                count += 1;
            }
        }
        let component: Vec<usize> = raw_comp.iter().map(|&c| renumber[c]).collect();
        let mut members = vec![Vec::new(); count];
        for (v, &c) in component.iter().enumerate() {
            members[c].push(v);
        }
        let mut dag = Digraph::new(count);
        let mut cyclic = vec![false; count];
        for (u, v) in self.arcs() {
            let (cu, cv) = (component[u], component[v]);
            if cu == cv {
                cyclic[cu] = true;
            } else {
                dag.add_arc(cu, cv);
            }
        }
        let terminal = (0..count).map(|c| dag.successors(c).is_empty()).collect();
        Condensation {
            component,
            members,
            dag,
            terminal,
            cyclic,
        }
    }
}

/// Strongly connected components, numbered by smallest member node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condensation {
    pub component: Vec<usize>,
    pub members: Vec<Vec<usize>>,
    /// Arcs between distinct components.
    pub dag: Digraph,
    /// Maximal in the reachability order: no arc leaves the component.
    pub terminal: Vec<bool>,
    /// Contains at least one arc, i.e. some closed path.
    pub cyclic: Vec<bool>,
}

impl Condensation {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn terminal_components(&self) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.terminal[c]).collect()
    }

    /// `precedes(i, j)`: component `j` is reachable from `i` (reflexive).
    pub fn precedes(&self, i: usize, j: usize) -> bool {
        self.dag.reachable([i])[j]
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum GraphKind {
    Dsc,
    Adsc,
}

/// A node `(state, clique, pos)`; `pos` is 1 for every DSC node and runs
/// over `1..=|clique|` in the ADSC.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct SCNode {
    pub state: State,
    pub clique: Clique,
    pub pos: usize,
    /// State reached after the clique.
    pub target: State,
    /// Index of the underlying DSC node.
    pub dsc: usize,
}

#[derive(Clone, Debug)]
pub struct StateCliqueGraph {
    pub kind: GraphKind,
    pub nodes: Vec<SCNode>,
    pub graph: Digraph,
}

impl StateCliqueGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn condensation(&self) -> Condensation {
        self.graph.condensation()
    }

    /// Position of the DSC node `(state, clique)`.
    pub fn find(&self, state: State, clique: Clique) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| n.state == state && n.clique == clique && n.pos == 1)
    }

    pub fn node_name(&self, sys: &ConcurrentSystem, i: usize) -> String {
        let n = &self.nodes[i];
        let (s, c) = (sys.state_name(n.state), sys.monoid().clique_name(n.clique));
        match self.kind {
            GraphKind::Dsc => format!("({s},{c})"),
            GraphKind::Adsc => format!("({s},{c},{})", n.pos),
        }
    }

    /// Subgraph on the nodes whose flag in `keep` is set, with node data
    /// carried over (the `dsc` field still indexes the full DSC).
    pub fn restrict_to(&self, keep: &[bool]) -> (StateCliqueGraph, Vec<usize>) {
        let (graph, kept) = self.graph.induced(keep);
        let nodes = kept.iter().map(|&i| self.nodes[i]).collect();
        (
            StateCliqueGraph {
                kind: self.kind,
                nodes,
                graph,
            },
            kept,
        )
    }
}

/// Nodes `(α,c)` for `c ∈ 𝔠_α`, ordered by state then clique; arc
/// `(α,c) → (β,d)` iff `β = α·c` and `c → d`.
pub fn build_dsc(sys: &ConcurrentSystem) -> StateCliqueGraph {
    let m = sys.monoid();
    let mut nodes = Vec::new();
    let mut index: HashMap<(State, Clique), usize> = HashMap::new();
    for s in 0..sys.num_states() {
        for c in sys.enabled_cliques(s) {
            let target = sys.act_clique(s, c).expect("enabled clique");
            index.insert((s, c), nodes.len());
            nodes.push(SCNode {
                state: s,
                clique: c,
                pos: 1,
                target,
                dsc: nodes.len(),
            });
        }
    }
    let mut graph = Digraph::new(nodes.len());
    for (i, n) in nodes.iter().enumerate() {
        for d in sys.enabled_cliques(n.target) {
            if m.is_normal_pair(n.clique, d) {
                graph.add_arc(i, index[&(n.target, d)]);
            }
        }
    }
    StateCliqueGraph {
        kind: GraphKind::Dsc,
        nodes,
        graph,
    }
}

/// Expands each DSC node `(α,c)` into the chain `(α,c,1) → … → (α,c,|c|)`;
/// the chain end links to the chain start of every DSC successor.
pub fn build_adsc(dsc: &StateCliqueGraph) -> StateCliqueGraph {
    assert_eq!(dsc.kind, GraphKind::Dsc);
    let mut first = Vec::with_capacity(dsc.len());
    let mut nodes = Vec::new();
    for (i, n) in dsc.nodes.iter().enumerate() {
        first.push(nodes.len());
        for pos in 1..=n.clique.len() {
            nodes.push(SCNode { pos, dsc: i, ..*n });
        }
    }
    let mut graph = Digraph::new(nodes.len());
    for (i, n) in dsc.nodes.iter().enumerate() {
        let start = first[i];
        let end = start + n.clique.len() - 1;
        for k in start..end {
            graph.add_arc(k, k + 1);
        }
        for &j in dsc.graph.successors(i) {
            graph.add_arc(end, first[j]);
        }
    }
    StateCliqueGraph {
        kind: GraphKind::Adsc,
        nodes,
        graph,
    }
}

/// Positive DSC nodes: those reaching (reflexively) a node `(β,d)` with `d`
/// maximal for inclusion in `𝔠_β`.
pub fn classify_nodes(sys: &ConcurrentSystem, dsc: &StateCliqueGraph) -> Vec<bool> {
    assert_eq!(dsc.kind, GraphKind::Dsc);
    let maximal: Vec<usize> = (0..dsc.len())
        .filter(|&i| {
            let n = &dsc.nodes[i];
            sys.enabled_cliques(n.state)
                .iter()
                .all(|&d| d == n.clique || !n.clique.is_subset(d))
        })
        .collect();
    dsc.graph.reverse().reachable(maximal)
}

/// The DSC and ADSC of a system, with positive labels.
#[derive(Clone, Debug)]
pub struct Graphs {
    pub dsc: StateCliqueGraph,
    pub adsc: StateCliqueGraph,
    /// Per DSC node.
    pub positive: Vec<bool>,
}

impl Graphs {
    pub fn new(sys: &ConcurrentSystem) -> Self {
        let dsc = build_dsc(sys);
        let adsc = build_adsc(&dsc);
        let positive = classify_nodes(sys, &dsc);
        Graphs { dsc, adsc, positive }
    }

    pub fn null_nodes(&self) -> Vec<usize> {
        (0..self.dsc.len()).filter(|&i| !self.positive[i]).collect()
    }

    /// DSC⁺ with the kept DSC indices.
    pub fn dsc_plus(&self) -> (StateCliqueGraph, Vec<usize>) {
        self.dsc.restrict_to(&self.positive)
    }

    /// ADSC⁺ with the kept ADSC indices.
    pub fn adsc_plus(&self) -> (StateCliqueGraph, Vec<usize>) {
        let keep: Vec<bool> = self.adsc.nodes.iter().map(|n| self.positive[n.dsc]).collect();
        self.adsc.restrict_to(&keep)
    }
}

/// Counts executions of every length up to `max_n` by dynamic programming
/// over the ADSC.
///
/// Paths of length `n − 1` from `(α,c,1)` to `(γ,d,|d|)` are in bijection
/// with executions of length `n ≥ 1` from `α` to `γ·d`.
#[derive(Clone, Debug)]
pub struct PathCounter<'a> {
    adsc: &'a StateCliqueGraph,
    num_states: usize,
}

impl<'a> PathCounter<'a> {
    pub fn new(adsc: &'a StateCliqueGraph, num_states: usize) -> Self {
        assert_eq!(adsc.kind, GraphKind::Adsc);
        PathCounter { adsc, num_states }
    }

    fn is_end(&self, i: usize) -> bool {
        let n = &self.adsc.nodes[i];
        n.pos == n.clique.len()
    }

    /// `counts[n][β] = #ℳ_{α,β}(n)` for `n ≤ max_n`.
    pub fn counts_from(&self, alpha: State, max_n: usize) -> Vec<Vec<BigUint>> {
        let mut out = Vec::with_capacity(max_n + 1);
        let mut row0 = vec![BigUint::zero(); self.num_states];
        row0[alpha] = BigUint::one();
        out.push(row0);
        if max_n == 0 {
            return out;
        }
        let mut v: Vec<BigUint> = self
            .adsc
            .nodes
            .iter()
            .map(|n| {
                if n.state == alpha && n.pos == 1 {
                    BigUint::one()
                } else {
                    BigUint::zero()
                }
            })
            .collect();
        for n in 1..=max_n {
            if n > 1 {
                let mut w = vec![BigUint::zero(); v.len()];
                for (u, x) in v.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    for &t in self.adsc.graph.successors(u) {
                        w[t] += x;
                    }
                }
                v = w;
            }
            let mut row = vec![BigUint::zero(); self.num_states];
            for (i, x) in v.iter().enumerate() {
                if self.is_end(i) {
                    row[self.adsc.nodes[i].target] += x;
                }
            }
            out.push(row);
        }
        out
    }

    /// `table[n][α][β] = #ℳ_{α,β}(n)` for `n ≤ max_n`.
    pub fn table(&self, max_n: usize) -> Vec<Vec<Vec<BigUint>>> {
        let per_state: Vec<Vec<Vec<BigUint>>> = (0..self.num_states).map(|a| self.counts_from(a, max_n)).collect();
        (0..=max_n)
            .map(|n| per_state.iter().map(|rows| rows[n].clone()).collect())
            .collect()
    }
}

/// `#ℳ_{α,β}(n)`, or `#ℳ_α(n)` when `beta` is `None`.
pub fn count_paths(
    sys: &ConcurrentSystem,
    adsc: &StateCliqueGraph,
    alpha: State,
    beta: Option<State>,
    n: usize,
) -> BigUint {
    let counts = PathCounter::new(adsc, sys.num_states()).counts_from(alpha, n);
    match beta {
        Some(b) => counts[n][b].clone(),
        None => counts[n].iter().sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn names(sys: &ConcurrentSystem, g: &StateCliqueGraph, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|&i| g.node_name(sys, i)).collect()
    }

    #[test]
    fn tarjan_on_small_graphs() {
        let g = Digraph::from_arcs(5, &[(0, 1), (1, 0), (1, 2), (2, 3), (3, 2), (4, 4)]);
        let c = g.condensation();
        assert_eq!(c.members, vec![vec![0, 1], vec![2, 3], vec![4]]);
        assert_eq!(c.terminal, [false, true, true]);
        assert_eq!(c.cyclic, [true, true, true]);
        assert!(c.precedes(0, 1) && !c.precedes(1, 0));

        let chain = Digraph::from_arcs(3, &[(0, 1), (1, 2)]);
        let c = chain.condensation();
        assert_eq!(c.len(), 3);
        assert_eq!(c.cyclic, [false, false, false]);
        assert_eq!(c.terminal_components(), [2]);
    }

    #[test]
    fn e1_dsc() {
        let sys = fixtures::e1();
        let dsc = build_dsc(&sys);
        let all: Vec<usize> = (0..dsc.len()).collect();
        assert_eq!(
            names(&sys, &dsc, &all),
            ["(α0,a)", "(α0,b)", "(α0,d)", "(α0,ad)", "(α0,bd)", "(α1,c)", "(α1,d)"]
        );
        // d commutes with a, so (α0,a) cannot precede (α0,ad).
        assert_eq!(dsc.graph.successors(0), [0, 1]);
        assert_eq!(dsc.graph.successors(3), [0, 1, 2, 3, 4]);
        assert_eq!(dsc.graph.successors(2), [2]);
        assert_eq!(dsc.graph.successors(1), [5]);
        assert_eq!(dsc.graph.successors(6), [5, 6]);
        let adsc = build_adsc(&dsc);
        assert_eq!(adsc.len(), 9);
        for (i, n) in adsc.nodes.iter().enumerate() {
            if n.pos < n.clique.len() {
                assert_eq!(adsc.graph.successors(i), [i + 1]);
            }
        }
    }

    #[test]
    fn null_nodes() {
        let sys = fixtures::e1();
        let g = Graphs::new(&sys);
        assert_eq!(names(&sys, &g.dsc, &g.null_nodes()), ["(α0,d)"]);

        let sys = fixtures::aztec();
        let g = Graphs::new(&sys);
        assert_eq!(g.dsc.len(), 26);
        assert_eq!(g.adsc.len(), 34);
        let mut null = names(&sys, &g.dsc, &g.null_nodes());
        null.sort();
        let mut expected = [
            "(0,a)", "(0,b)", "(1,a)", "(2,b)", "(0',d)", "(0',e)", "(1',e)", "(2',d)",
        ];
        expected.sort();
        assert_eq!(null, expected);

        let sys = fixtures::tm1();
        let g = Graphs::new(&sys);
        assert_eq!(g.dsc.len(), 4);
        assert!(g.positive.iter().all(|&p| p));
    }

    #[test]
    fn aztec_positive_part_components() {
        let g = Graphs::new(&fixtures::aztec());
        let (plus, _) = g.dsc_plus();
        let c = plus.condensation();
        assert_eq!(c.len(), 3);
        assert_eq!(c.terminal_components().len(), 1);
    }

    #[test]
    fn twelve_state_terminal_components() {
        let sys = fixtures::twelve();
        let g = Graphs::new(&sys);
        let (plus, _) = g.dsc_plus();
        let c = plus.condensation();
        let mut terminal: Vec<Vec<String>> = c
            .terminal_components()
            .into_iter()
            .map(|k| {
                let mut v = names(&sys, &plus, &c.members[k]);
                v.sort();
                v
            })
            .collect();
        terminal.sort();
        assert_eq!(
            terminal,
            [["(0,ab)", "(4,cd)", "(8,ef)"], ["(1,ad)", "(5,ce)", "(9,bf)"]]
        );
    }

    #[test]
    fn path_counts_in_e1() {
        let sys = fixtures::e1();
        let g = Graphs::new(&sys);
        assert_eq!(count_paths(&sys, &g.adsc, 0, Some(0), 2), BigUint::from(4u32));
        assert_eq!(count_paths(&sys, &g.adsc, 0, Some(0), 0), BigUint::one());
        assert_eq!(count_paths(&sys, &g.adsc, 0, Some(1), 0), BigUint::zero());
        assert_eq!(count_paths(&sys, &g.adsc, 0, None, 1), BigUint::from(3u32));
        // ab, bd: two traces from α0 to α1 of length 2.
        assert_eq!(count_paths(&sys, &g.adsc, 0, Some(1), 2), BigUint::from(2u32));
    }

    #[test]
    fn path_counts_in_canonical_tm1_follow_series() {
        let sys = fixtures::tm1();
        let g = Graphs::new(&sys);
        let counts = PathCounter::new(&g.adsc, 1).counts_from(0, 6);
        let got: Vec<u64> = counts
            .iter()
            .map(|r| r[0].to_u64_digits().first().copied().unwrap_or(0))
            .collect();
        assert_eq!(got, [1, 3, 8, 21, 55, 144, 377]);
    }
}
