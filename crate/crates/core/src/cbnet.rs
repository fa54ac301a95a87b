//! Discrete Bayesian networks: graph structure, conditional probability
//! tables, and exact inference by enumeration.
//!
//! A network is a DAG over nodes `0..n_nodes()`. Each node carries a
//! [`Cpt`] giving `P(state | parent configuration)`. Parent configurations
//! are indexed row-major with the *first listed parent as the most
//! significant digit*; within a row, the node state is the fastest-varying
//! index. The same layout is used by the on-disk JSON format.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posterior::PosteriorTable;

/// Default cap on the number of joint states exact enumeration will visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 24;

/// Dense index of a node within its network.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(pub usize);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Conditional probability table of one node.
///
/// `entries[pc * node_cardinality + state]` holds `P(state | pc)` where
/// `pc` is the parent-configuration index.
#[derive(Clone, Debug, PartialEq)]
pub struct Cpt {
    node_cardinality: usize,
    parent_cardinalities: Vec<usize>,
    entries: Vec<f64>,
}

/// Tolerance for a CPT row to count as normalized.
pub const CPT_ROW_TOL: f64 = 1e-12;

impl Cpt {
    pub fn new(
        node_cardinality: usize,
        parent_cardinalities: Vec<usize>,
        entries: Vec<f64>,
    ) -> std::result::Result<Self, String> {
        if node_cardinality == 0 {
            return Err("node cardinality must be >= 1".into());
        }
        if parent_cardinalities.contains(&0) {
            return Err("parent cardinality must be >= 1".into());
        }
        let configs: usize = parent_cardinalities.iter().product();
        if entries.len() != configs * node_cardinality {
            return Err(format!(
                "expected {} entries ({} parent configurations x {} states), got {}",
                configs * node_cardinality,
                configs,
                node_cardinality,
                entries.len()
            ));
        }
        if let Some(e) = entries.iter().find(|e| !e.is_finite() || **e < 0.0) {
            return Err(format!("entry {e} is negative or not finite"));
        }
        for pc in 0..configs {
            let row = &entries[pc * node_cardinality..(pc + 1) * node_cardinality];
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > CPT_ROW_TOL {
                return Err(format!(
                    "row for parent configuration {pc} sums to {sum}, not 1"
                ));
            }
        }
        Ok(Cpt {
            node_cardinality,
            parent_cardinalities,
            entries,
        })
    }

    pub fn node_cardinality(&self) -> usize {
        self.node_cardinality
    }

    pub fn parent_cardinalities(&self) -> &[usize] {
        &self.parent_cardinalities
    }

    pub fn n_parent_configs(&self) -> usize {
        self.parent_cardinalities.iter().product()
    }

    /// Row of probabilities for one parent configuration.
    pub fn row(&self, parent_config: usize) -> &[f64] {
        let c = self.node_cardinality;
        &self.entries[parent_config * c..(parent_config + 1) * c]
    }

    pub fn prob(&self, state: usize, parent_config: usize) -> f64 {
        self.entries[parent_config * self.node_cardinality + state]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Parent-configuration index of a tuple of parent values, first parent
    /// most significant.
    pub fn parent_config_index(&self, values: &[usize]) -> usize {
        debug_assert_eq!(values.len(), self.parent_cardinalities.len());
        let mut idx = 0;
        for (v, c) in values.iter().zip(&self.parent_cardinalities) {
            debug_assert!(v < c);
            idx = idx * c + v;
        }
        idx
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub name: String,
    pub cardinality: usize,
    pub parents: Vec<NodeId>,
    pub cpt: Cpt,
}

/// A full assignment of one state index per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    pub fn value(&self, i: NodeId) -> usize {
        self.0[i.0]
    }
}

/// Evidence set `E` (clamped values) and ordered hypothesis set `H`.
#[derive(Clone, Debug, Default)]
pub struct Query {
    pub evidence: BTreeMap<NodeId, usize>,
    pub hypotheses: Vec<NodeId>,
}

impl Query {
    pub fn new(evidence: BTreeMap<NodeId, usize>, hypotheses: Vec<NodeId>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &h in &hypotheses {
            if evidence.contains_key(&h) {
                return Err(Error::Parse(format!(
                    "node {h} appears in both evidence and hypotheses"
                )));
            }
            if !seen.insert(h) {
                return Err(Error::Parse(format!("node {h} repeated in hypotheses")));
            }
        }
        Ok(Query {
            evidence,
            hypotheses,
        })
    }

    pub fn is_evidence(&self, i: NodeId) -> bool {
        self.evidence.contains_key(&i)
    }

    /// Hypothesis-tuple key of an assignment, in hypothesis declaration order.
    pub fn key_of(&self, x: &Assignment) -> Vec<usize> {
        self.hypotheses.iter().map(|&h| x.value(h)).collect()
    }
}

/// Immutable Bayesian network. Construction validates acyclicity and CPT
/// shapes and caches a topological order.
#[derive(Clone, Debug)]
pub struct BayesNet {
    nodes: Vec<Node>,
    children: Vec<Vec<NodeId>>,
    topo: Vec<NodeId>,
}

impl BayesNet {
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::Parse("network must have at least one node".into()));
        }
        for node in &nodes {
            if let Some(p) = node.parents.iter().find(|p| p.0 >= n) {
                return Err(Error::Index(format!(
                    "node `{}` lists parent {} out of range",
                    node.name, p
                )));
            }
            let expected: Vec<usize> = node
                .parents
                .iter()
                .map(|p| nodes[p.0].cardinality)
                .collect();
            if node.cpt.parent_cardinalities() != expected.as_slice() {
                return Err(Error::InvalidCpt {
                    node: node.name.clone(),
                    reason: format!(
                        "parent cardinalities {:?} do not match declared parents {:?}",
                        node.cpt.parent_cardinalities(),
                        expected
                    ),
                });
            }
            if node.cpt.node_cardinality() != node.cardinality {
                return Err(Error::InvalidCpt {
                    node: node.name.clone(),
                    reason: format!(
                        "CPT cardinality {} does not match node cardinality {}",
                        node.cpt.node_cardinality(),
                        node.cardinality
                    ),
                });
            }
        }
        let mut children = vec![Vec::new(); n];
        for (i, node) in nodes.iter().enumerate() {
            for &p in &node.parents {
                children[p.0].push(NodeId(i));
            }
        }
        let topo = toposort(&nodes).map_err(|i| Error::Cycle(nodes[i.0].name.clone()))?;
        Ok(BayesNet {
            nodes,
            children,
            topo,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, i: NodeId) -> &Node {
        &self.nodes[i.0]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn cardinality(&self, i: NodeId) -> usize {
        self.nodes[i.0].cardinality
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.cardinality).collect()
    }

    pub fn parents(&self, i: NodeId) -> &[NodeId] {
        &self.nodes[i.0].parents
    }

    pub fn children(&self, i: NodeId) -> &[NodeId] {
        &self.children[i.0]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(NodeId)
    }

    /// Cached topological order: every node appears after all its parents,
    /// ties broken by ascending node index.
    pub fn topological_order(&self) -> &[NodeId] {
        &self.topo
    }

    /// Markov blanket: parents, children and parents of children, minus the
    /// node itself.
    pub fn markov_blanket(&self, i: NodeId) -> BTreeSet<NodeId> {
        let mut mb = BTreeSet::new();
        mb.extend(self.parents(i).iter().copied());
        for &c in self.children(i) {
            mb.insert(c);
            mb.extend(self.parents(c).iter().copied());
        }
        mb.remove(&i);
        mb
    }

    /// Parent-configuration index of node `i` under assignment `x`.
    pub fn parent_config_of(&self, i: NodeId, x: &Assignment) -> usize {
        let values: Vec<usize> = self.parents(i).iter().map(|&p| x.value(p)).collect();
        self.nodes[i.0].cpt.parent_config_index(&values)
    }

    /// Joint probability of a full assignment: the product of one CPT entry
    /// per node.
    pub fn joint_probability(&self, x: &Assignment) -> f64 {
        assert_eq!(x.0.len(), self.n_nodes());
        let mut p = 1.0;
        for &i in &self.topo {
            let pc = self.parent_config_of(i, x);
            p *= self.nodes[i.0].cpt.prob(x.value(i), pc);
        }
        p
    }

    pub fn joint_state_count(&self) -> u128 {
        self.nodes
            .iter()
            .map(|n| n.cardinality as u128)
            .product()
    }

    /// Exact posterior `P((x)_H | (x)_E)` by full enumeration, with the
    /// default state-space cap.
    pub fn exact_posterior(&self, q: &Query) -> Result<PosteriorTable> {
        self.exact_posterior_capped(q, DEFAULT_ENUMERATION_CAP)
    }

    pub fn exact_posterior_capped(&self, q: &Query, cap: u128) -> Result<PosteriorTable> {
        let states = self.joint_state_count();
        if states > cap {
            return Err(Error::TooLarge { states, cap });
        }
        let cards = self.cardinalities();
        let hyp_cards: Vec<usize> = q.hypotheses.iter().map(|&h| self.cardinality(h)).collect();
        let mut table = PosteriorTable::zeroed(&hyp_cards);
        let mut total = 0.0;
        for_each_assignment(&cards, |vals| {
            if q.evidence.iter().any(|(&e, &v)| vals[e.0] != v) {
                return;
            }
            let x = Assignment(vals.to_vec());
            let p = self.joint_probability(&x);
            total += p;
            table.add(q.key_of(&x), p);
        });
        if total == 0.0 {
            return Err(Error::ZeroEvidence);
        }
        Ok(table)
    }

    /// Distribution of node `i` given the values its Markov blanket takes in
    /// `x`, proportional to `P(x_i | pa(i)) * prod_{c in ch(i)} P(x_c | pa(c))`.
    pub fn conditional_given_blanket(&self, i: NodeId, x: &Assignment) -> Result<Vec<f64>> {
        let card = self.cardinality(i);
        let mut w = vec![0.0; card];
        let mut local = x.clone();
        for (v, slot) in w.iter_mut().enumerate() {
            local.0[i.0] = v;
            let pc = self.parent_config_of(i, &local);
            let mut p = self.nodes[i.0].cpt.prob(v, pc);
            for &c in self.children(i) {
                let cc = self.parent_config_of(c, &local);
                p *= self.nodes[c.0].cpt.prob(local.value(c), cc);
            }
            *slot = p;
        }
        let sum: f64 = w.iter().sum();
        if sum == 0.0 {
            return Err(Error::Degenerate(self.nodes[i.0].name.clone()));
        }
        for v in &mut w {
            *v /= sum;
        }
        Ok(w)
    }
}

/// Deterministic Kahn topological sort; on a cycle, returns a node on it.
fn toposort(nodes: &[Node]) -> std::result::Result<Vec<NodeId>, NodeId> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let n = nodes.len();
    let mut indegree = vec![0usize; n];
    let mut children = vec![Vec::new(); n];
    for (i, node) in nodes.iter().enumerate() {
        indegree[i] = node.parents.len();
        for &p in &node.parents {
            children[p.0].push(i);
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n)
        .filter(|&i| indegree[i] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(NodeId(i));
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap();
        Err(NodeId(stuck))
    }
}

/// Mixed-radix index of a value tuple, first entry most significant.
pub fn index_of_assignment(cards: &[usize], vals: &[usize]) -> usize {
    let mut idx = 0;
    for (v, c) in vals.iter().zip(cards) {
        debug_assert!(v < c);
        idx = idx * c + v;
    }
    idx
}

/// Inverse of [`index_of_assignment`].
pub fn assignment_from_index(cards: &[usize], mut idx: usize) -> Vec<usize> {
    let mut vals = vec![0; cards.len()];
    for k in (0..cards.len()).rev() {
        vals[k] = idx % cards[k];
        idx /= cards[k];
    }
    vals
}

/// Calls `f` once for every tuple in the mixed-radix space of `cards`.
pub fn for_each_assignment(cards: &[usize], mut f: impl FnMut(&[usize])) {
    let mut vals = vec![0usize; cards.len()];
    loop {
        f(&vals);
        let mut k = cards.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            vals[k] += 1;
            if vals[k] < cards[k] {
                break;
            }
            vals[k] = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct NetFile {
    nodes: Vec<NetFileNode>,
}

#[derive(Serialize, Deserialize)]
struct NetFileNode {
    name: String,
    cardinality: usize,
    #[serde(default)]
    parents: Vec<String>,
    cpt: Vec<f64>,
}

impl BayesNet {
    /// Parses the JSON net format:
    /// `{"nodes":[{"name","cardinality","parents":[names],"cpt":[...]}, ...]}`
    /// where `cpt` is flattened with the node state as the fastest-varying
    /// index and the first listed parent as the most significant digit of the
    /// parent configuration.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("net file: {e}")))?;
        let mut ids = BTreeMap::new();
        for (i, node) in file.nodes.iter().enumerate() {
            if ids.insert(node.name.clone(), NodeId(i)).is_some() {
                return Err(Error::Parse(format!("duplicate node name `{}`", node.name)));
            }
        }
        let mut nodes = Vec::with_capacity(file.nodes.len());
        for fnode in &file.nodes {
            let parents: Vec<NodeId> = fnode
                .parents
                .iter()
                .map(|p| {
                    ids.get(p).copied().ok_or_else(|| {
                        Error::Parse(format!(
                            "node `{}` lists unknown parent `{p}`",
                            fnode.name
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            let parent_cards: Vec<usize> = parents
                .iter()
                .map(|p| file.nodes[p.0].cardinality)
                .collect();
            let cpt = Cpt::new(fnode.cardinality, parent_cards, fnode.cpt.clone()).map_err(
                |reason| Error::InvalidCpt {
                    node: fnode.name.clone(),
                    reason,
                },
            )?;
            nodes.push(Node {
                name: fnode.name.clone(),
                cardinality: fnode.cardinality,
                parents,
                cpt,
            });
        }
        BayesNet::new(nodes)
    }

    pub fn to_json(&self) -> String {
        let file = NetFile {
            nodes: self
                .nodes
                .iter()
                .map(|n| NetFileNode {
                    name: n.name.clone(),
                    cardinality: n.cardinality,
                    parents: n.parents.iter().map(|p| self.nodes[p.0].name.clone()).collect(),
                    cpt: n.cpt.entries().to_vec(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("net serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct QueryFile {
    #[serde(default)]
    evidence: BTreeMap<String, usize>,
    #[serde(default)]
    hypotheses: Vec<String>,
}

impl Query {
    /// Parses `{"evidence": {"name": state, ...}, "hypotheses": ["name", ...]}`
    /// against a network.
    pub fn from_json(text: &str, net: &BayesNet) -> Result<Self> {
        let file: QueryFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("query file: {e}")))?;
        let mut evidence = BTreeMap::new();
        for (name, &state) in &file.evidence {
            let id = net
                .node_id(name)
                .ok_or_else(|| Error::Parse(format!("evidence names unknown node `{name}`")))?;
            if state >= net.cardinality(id) {
                return Err(Error::Parse(format!(
                    "evidence state {state} out of range for node `{name}`"
                )));
            }
            evidence.insert(id, state);
        }
        let hypotheses = file
            .hypotheses
            .iter()
            .map(|name| {
                net.node_id(name)
                    .ok_or_else(|| Error::Parse(format!("hypotheses name unknown node `{name}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Query::new(evidence, hypotheses)
    }
}

// ---------------------------------------------------------------------------
// Builder
// ---------------------------------------------------------------------------

/// Convenience builder used heavily by tests and fixtures.
#[derive(Default)]
pub struct NetBuilder {
    nodes: Vec<(String, usize, Vec<String>, Vec<f64>)>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(
        mut self,
        name: &str,
        cardinality: usize,
        parents: &[&str],
        cpt: Vec<f64>,
    ) -> Self {
        self.nodes.push((
            name.to_string(),
            cardinality,
            parents.iter().map(|s| s.to_string()).collect(),
            cpt,
        ));
        self
    }

    pub fn build(self) -> Result<BayesNet> {
        let ids: BTreeMap<String, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, (name, ..))| (name.clone(), i))
            .collect();
        let mut nodes = Vec::new();
        for (name, card, parents, entries) in &self.nodes {
            let parent_ids: Vec<NodeId> = parents
                .iter()
                .map(|p| {
                    ids.get(p)
                        .map(|&i| NodeId(i))
                        .ok_or_else(|| Error::Parse(format!("unknown parent `{p}` of `{name}`")))
                })
                .collect::<Result<_>>()?;
            let parent_cards: Vec<usize> =
                parent_ids.iter().map(|p| self.nodes[p.0].1).collect();
            let cpt = Cpt::new(*card, parent_cards, entries.clone()).map_err(|reason| {
                Error::InvalidCpt {
                    node: name.clone(),
                    reason,
                }
            })?;
            nodes.push(Node {
                name: name.clone(),
                cardinality: *card,
                parents: parent_ids,
                cpt,
            });
        }
        BayesNet::new(nodes)
    }
}
