//! Directed acyclic graphs linking groups.
//!
//! Nodes are addressed by 0-based indices throughout the library. The
//! [`Dag::from_one_based`] constructor accepts the 1-based edge lists used in
//! configuration files and figures.
//!
//! A [`LayeredDag`] is a single-root, graded DAG: every path from the root to
//! a node has the same length, so each node sits in a well defined layer. On
//! top of it we compute generation-`l` ancestor multisets (counted with path
//! multiplicity) and the hypernode chains that drive the prior and the
//! sampler.

use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::cmp::Reverse;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DagError {
    #[error("edge set contains a directed cycle")]
    CycleDetected,
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(usize, usize),
    #[error("node {node} out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("graph has no nodes")]
    Empty,
    #[error("graph has {0} roots; a unique root is required")]
    MultipleRoots(usize),
    #[error("node {0} is reachable by root paths of different lengths")]
    NonGradedDag(usize),
    #[error("node {0} is not reachable from the root")]
    UnreachableNode(usize),
    #[error("generation {generation} out of range for node {node} in layer {layer}")]
    GenerationOutOfRange {
        node: usize,
        generation: usize,
        layer: usize,
    },
    #[error("the root node has no hypernode chain")]
    RootHasNoChain,
}

/// Edges (1-based) of the 8-group experimental design: one root, three
/// layer-1 nodes, three layer-2 nodes and a single layer-3 node.
pub const EXPERIMENTAL_EDGES: [(usize, usize); 12] = [
    (1, 2),
    (1, 3),
    (1, 4),
    (2, 5),
    (2, 6),
    (3, 6),
    (3, 7),
    (4, 5),
    (4, 7),
    (5, 8),
    (6, 8),
    (7, 8),
];

/// A validated directed acyclic graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    node_count: usize,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl Dag {
    /// Builds a DAG over nodes `0..node_count` from `(parent, child)` pairs.
    pub fn new(node_count: usize, edges: &[(usize, usize)]) -> Result<Self, DagError> {
        if node_count == 0 {
            return Err(DagError::Empty);
        }
        let mut parents = vec![Vec::new(); node_count];
        let mut children = vec![Vec::new(); node_count];
        for &(p, c) in edges {
            for node in [p, c] {
                if node >= node_count {
                    return Err(DagError::NodeOutOfRange { node, node_count });
                }
            }
            if p == c {
                return Err(DagError::SelfLoop(p));
            }
            if children[p].contains(&c) {
                return Err(DagError::DuplicateEdge(p, c));
            }
            children[p].push(c);
            parents[c].push(p);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        let topo = kahn_order(&parents, &children).ok_or(DagError::CycleDetected)?;
        Ok(Self {
            node_count,
            parents,
            children,
            topo,
        })
    }

    /// Same as [`Dag::new`] but with 1-based node ids, as used in figures
    /// and the CLI configuration.
    pub fn from_one_based(node_count: usize, edges: &[(usize, usize)]) -> Result<Self, DagError> {
        let mut shifted = Vec::with_capacity(edges.len());
        for &(p, c) in edges {
            for node in [p, c] {
                if node == 0 || node > node_count {
                    return Err(DagError::NodeOutOfRange {
                        node,
                        node_count,
                    });
                }
            }
            shifted.push((p - 1, c - 1));
        }
        Self::new(node_count, &shifted)
    }

    /// The 8-group experimental design DAG.
    pub fn experimental() -> Self {
        Self::from_one_based(8, &EXPERIMENTAL_EDGES).expect("experimental design is a DAG")
    }

    /// A fork: one root (node 0) with `children` child nodes.
    pub fn fork(children: usize) -> Self {
        let edges: Vec<_> = (1..=children).map(|c| (0, c)).collect();
        Self::new(children + 1, &edges).expect("fork graphs are acyclic")
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    /// Nodes in a topological order; ties are broken by smallest index.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.node_count)
            .flat_map(|p| self.children[p].iter().map(move |&c| (p, c)))
            .collect()
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.node_count)
            .filter(|&n| self.parents[n].is_empty())
            .collect()
    }

    /// Adds a hidden common parent of all roots when there is more than one.
    ///
    /// The new node gets index `node_count` (1-based id `node_count + 1`).
    /// Returns the (possibly unchanged) graph and whether a node was added.
    pub fn augment_unique_root(&self) -> (Dag, bool) {
        let roots = self.roots();
        if roots.len() == 1 {
            return (self.clone(), false);
        }
        let hidden = self.node_count;
        let mut edges = self.edges();
        edges.extend(roots.into_iter().map(|r| (hidden, r)));
        let dag = Dag::new(self.node_count + 1, &edges).expect("augmentation keeps the graph acyclic");
        (dag, true)
    }
}

fn kahn_order(parents: &[Vec<usize>], children: &[Vec<usize>]) -> Option<Vec<usize>> {
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<usize>> = indegree
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(n, _)| Reverse(n))
        .collect();
    let mut order = Vec::with_capacity(parents.len());
    while let Some(Reverse(n)) = ready.pop() {
        order.push(n);
        for &c in &children[n] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    (order.len() == parents.len()).then_some(order)
}

/// Generation-`l` ancestors of a node, each with the number of distinct
/// directed paths of length `l` that connect it to the node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AncestorMultiset {
    entries: BTreeMap<usize, u64>,
}

impl AncestorMultiset {
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.entries.iter().map(|(&a, &m)| (a, m))
    }

    pub fn multiplicity(&self, node: usize) -> u64 {
        self.entries.get(&node).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Total number of paths, i.e. the sum of multiplicities.
    pub fn path_count(&self) -> u64 {
        self.entries.values().sum()
    }

    /// `Σ multiplicity(a) · value(a)`; with `value = α` this is the
    /// concentration of the corresponding hypernode.
    pub fn weighted_sum(&self, value: impl Fn(usize) -> f64) -> f64 {
        self.entries
            .iter()
            .map(|(&a, &m)| m as f64 * value(a))
            .sum()
    }
}

impl FromIterator<(usize, u64)> for AncestorMultiset {
    fn from_iter<I: IntoIterator<Item = (usize, u64)>>(iter: I) -> Self {
        Self {
            entries: iter.into_iter().collect(),
        }
    }
}

/// One level of a hypernode chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypernodeLevel {
    pub generation: usize,
    pub ancestors: AncestorMultiset,
}

impl HypernodeLevel {
    pub fn concentration(&self, alpha: &[f64]) -> f64 {
        self.ancestors.weighted_sum(|a| alpha[a])
    }
}

/// Hidden levels linking a node in layer `k` to the root: entry `m - 1`
/// holds the generation-`m` ancestors, `m = 1..k-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypernodeChain {
    pub node: usize,
    pub levels: Vec<HypernodeLevel>,
}

impl HypernodeChain {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Level holding the generation-`generation` ancestors (1-based).
    pub fn generation(&self, generation: usize) -> &HypernodeLevel {
        &self.levels[generation - 1]
    }
}

/// A single-root graded DAG with per-node layers.
#[derive(Debug, Clone)]
pub struct LayeredDag {
    dag: Dag,
    root: usize,
    layer: Vec<usize>,
    hidden_root_added: bool,
    chains: Vec<HypernodeChain>,
}

impl LayeredDag {
    /// Layers a DAG that already has a unique root.
    pub fn new(dag: Dag) -> Result<Self, DagError> {
        Self::with_hidden_flag(dag, false)
    }

    /// Augments with a hidden root if needed, then layers.
    pub fn from_dag(dag: &Dag) -> Result<Self, DagError> {
        let (augmented, added) = dag.augment_unique_root();
        Self::with_hidden_flag(augmented, added)
    }

    fn with_hidden_flag(dag: Dag, hidden_root_added: bool) -> Result<Self, DagError> {
        let roots = dag.roots();
        if roots.len() != 1 {
            return Err(DagError::MultipleRoots(roots.len()));
        }
        let root = roots[0];
        let n = dag.node_count();
        let mut layer = vec![usize::MAX; n];
        layer[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(p) = queue.pop_front() {
            for &c in dag.children(p) {
                if layer[c] == usize::MAX {
                    layer[c] = layer[p] + 1;
                    queue.push_back(c);
                }
            }
        }
        if let Some(node) = layer.iter().position(|&l| l == usize::MAX) {
            return Err(DagError::UnreachableNode(node));
        }
        for (p, c) in dag.edges() {
            if layer[c] != layer[p] + 1 {
                return Err(DagError::NonGradedDag(c));
            }
        }
        let mut ldag = Self {
            dag,
            root,
            layer,
            hidden_root_added,
            chains: Vec::new(),
        };
        ldag.chains = (0..n)
            .map(|j| {
                let levels = (1..ldag.layer[j].max(1))
                    .map(|g| HypernodeLevel {
                        generation: g,
                        ancestors: ldag.ancestor_multiset(j, g).expect("generation in range"),
                    })
                    .collect();
                HypernodeChain { node: j, levels }
            })
            .collect();
        Ok(ldag)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.dag.node_count()
    }

    pub fn layer(&self, node: usize) -> usize {
        self.layer[node]
    }

    pub fn layers(&self) -> &[usize] {
        &self.layer
    }

    /// Number of layers below the root (`K`).
    pub fn depth(&self) -> usize {
        self.layer.iter().copied().max().unwrap_or(0)
    }

    pub fn hidden_root_added(&self) -> bool {
        self.hidden_root_added
    }

    /// The synthetic root, if one was added. It never carries data.
    pub fn hidden_root(&self) -> Option<usize> {
        self.hidden_root_added.then_some(self.root)
    }

    /// Number of nodes that can carry observations.
    pub fn observed_node_count(&self) -> usize {
        self.node_count() - usize::from(self.hidden_root_added)
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        self.dag.parents(node)
    }

    pub fn children(&self, node: usize) -> &[usize] {
        self.dag.children(node)
    }

    pub fn topological_order(&self) -> &[usize] {
        self.dag.topological_order()
    }

    /// Generation-`generation` ancestors of `node`, with path multiplicities.
    pub fn ancestor_multiset(
        &self,
        node: usize,
        generation: usize,
    ) -> Result<AncestorMultiset, DagError> {
        let layer = self.layer[node];
        if generation == 0 || generation > layer {
            return Err(DagError::GenerationOutOfRange {
                node,
                generation,
                layer,
            });
        }
        let mut frontier: BTreeMap<usize, u64> = BTreeMap::from([(node, 1)]);
        for _ in 0..generation {
            let mut next = BTreeMap::new();
            for (&n, &count) in &frontier {
                for &p in self.parents(n) {
                    *next.entry(p).or_insert(0) += count;
                }
            }
            frontier = next;
        }
        Ok(AncestorMultiset { entries: frontier })
    }

    /// The hypernode chain of a non-root node; empty for layer-1 nodes.
    pub fn hypernode_chain(&self, node: usize) -> Result<&HypernodeChain, DagError> {
        if node == self.root {
            return Err(DagError::RootHasNoChain);
        }
        Ok(&self.chains[node])
    }
}
