//! Compilation of probability tables and whole networks into circuits whose
//! squared amplitudes reproduce the classical distributions, plus the
//! sweep-transition network behind the quantum Gibbs sampler.
//!
//! A table `P(y|x)` over a focus variable `y` and a (possibly composite)
//! parent `x` compiles to a register `[parent bits | focus bits]` and one
//! multiplexed y-rotation per focus bit: bit `k` of the focus is rotated by
//! chain-rule angles, controlled by the parent bits and the focus bits below
//! `k`. Fed `|y~ = 0> (x) |x>`, the circuit emits
//! `sum_y sqrt(P(y|x)) |y> (x) |x>`; the parent register doubles as the
//! parent-image (sink) index, and summing it out recovers `P(y|x)` exactly.
//!
//! Cardinalities that are not powers of two are padded with zero-probability
//! states, which keep amplitude 0 throughout and are asserted unreachable in
//! tests. Evidence nodes are contracted to cardinality one before padding
//! and own no qubits.

use std::collections::BTreeMap;

use crate::cbnet::{
    assignment_from_index, for_each_assignment, index_of_assignment, Assignment, BayesNet, Cpt,
    NodeId, Query,
};
use crate::circuit::{max_qubits, Circuit, Gate, StateVector};
use crate::classical::{mh_row, MhProposal};
use crate::error::{Error, Result};
use crate::muxor::{chain_angles, AngleTree};

/// Bits of the padded register for a cardinality: `ceil(log2(card))`.
pub fn padded_bits(cardinality: usize) -> usize {
    assert!(cardinality >= 1);
    (usize::BITS - (cardinality - 1).leading_zeros()) as usize
}

/// Maps every padded control pattern to the original mixed-radix
/// configuration it encodes, or `None` for padding. `cards` lists the
/// original cardinalities with the first entry most significant, matching
/// CPT parent-configuration indexing; pattern bit 0 is the least significant
/// bit of the *last* entry.
pub(crate) fn padded_pattern_configs(cards: &[usize]) -> Vec<Option<usize>> {
    let bits: Vec<usize> = cards.iter().map(|&c| padded_bits(c)).collect();
    let total: usize = bits.iter().sum();
    let mut out = Vec::with_capacity(1 << total);
    for p in 0..1usize << total {
        let mut vals = Vec::with_capacity(cards.len());
        let mut offset = 0;
        let mut ok = true;
        for k in (0..cards.len()).rev() {
            let v = (p >> offset) & ((1 << bits[k]) - 1);
            if v >= cards[k] {
                ok = false;
                break;
            }
            vals.push(v);
            offset += bits[k];
        }
        if ok {
            vals.reverse();
            out.push(Some(index_of_assignment(cards, &vals)));
        } else {
            out.push(None);
        }
    }
    out
}

/// Flattens per-group qubit lists (first group most significant) into a
/// single least-significant-first control list whose pattern value matches
/// [`padded_pattern_configs`].
fn flatten_controls(groups_ms_first: &[&[usize]]) -> Vec<usize> {
    let mut controls = Vec::new();
    for group in groups_ms_first.iter().rev() {
        controls.extend_from_slice(group);
    }
    controls
}

/// Emits the multiplexor chain preparing `sqrt(row)` on `target_group`
/// (least significant bit first), selected by `control_qubits` whose padded
/// pattern `p` carries `trees[p]` (`None` = unreachable padding, angle 0).
fn conditional_prep_gates(
    target_group: &[usize],
    control_qubits: &[usize],
    trees: &[Option<AngleTree>],
) -> Vec<Gate> {
    let p_count = trees.len();
    debug_assert_eq!(p_count, 1 << control_qubits.len());
    let mut gates = Vec::with_capacity(target_group.len());
    for k in 0..target_group.len() {
        let mut controls: Vec<usize> = target_group[..k].to_vec();
        controls.extend_from_slice(control_qubits);
        let mut angles = vec![0.0; p_count << k];
        for (p, tree) in trees.iter().enumerate() {
            if let Some(tree) = tree {
                for (v, &a) in tree.level(k).iter().enumerate() {
                    angles[(p << k) | v] = a;
                }
            }
        }
        if controls.is_empty() {
            gates.push(Gate::roty(angles[0], target_group[k]));
        } else {
            gates.push(Gate::mux_roty(target_group[k], controls, angles));
        }
    }
    gates
}

fn padded_row(row: &[f64], n_bits: usize) -> Vec<f64> {
    let mut padded = vec![0.0; 1 << n_bits];
    padded[..row.len()].copy_from_slice(row);
    padded
}

// ---------------------------------------------------------------------------
// Q-embedding of a single probability table
// ---------------------------------------------------------------------------

/// Compiled embedding of one probability table. The circuit acts on
/// `n_parent_bits + n_focus_bits` qubits, parent register low, focus
/// register high; applied to `|0> (x) |x>` it prepares
/// `sum_y sqrt(P(y|x)) |y> (x) |x>`.
#[derive(Clone, Debug)]
pub struct QEmbedding {
    pub n_parent_bits: usize,
    pub n_focus_bits: usize,
    pub circuit: Circuit,
    /// Parent qubits, least significant first (bit 0 of the padded parent
    /// pattern); the first listed parent owns the most significant bits.
    pub parent_qubits: Vec<usize>,
    /// Focus qubits, least significant first.
    pub focus_qubits: Vec<usize>,
}

/// Compiles a probability table into its multiplexor-chain embedding.
/// Table validity is enforced when the [`Cpt`] is constructed.
pub fn embed_cpt(cpt: &Cpt) -> QEmbedding {
    let foc_bits = padded_bits(cpt.node_cardinality());
    let m: usize = cpt
        .parent_cardinalities()
        .iter()
        .map(|&c| padded_bits(c))
        .sum();
    let parent_qubits: Vec<usize> = (0..m).collect();
    let focus_qubits: Vec<usize> = (m..m + foc_bits).collect();
    let mut circuit = Circuit::new(m + foc_bits);
    if foc_bits > 0 {
        let trees: Vec<Option<AngleTree>> = padded_pattern_configs(cpt.parent_cardinalities())
            .into_iter()
            .map(|config| {
                config.map(|pc| {
                    chain_angles(&padded_row(cpt.row(pc), foc_bits))
                        .expect("validated CPT row embeds")
                })
            })
            .collect();
        for gate in conditional_prep_gates(&focus_qubits, &parent_qubits, &trees) {
            circuit.push(gate).expect("indices in range");
        }
    }
    QEmbedding {
        n_parent_bits: m,
        n_focus_bits: foc_bits,
        circuit,
        parent_qubits,
        focus_qubits,
    }
}

impl QEmbedding {
    /// Exact `sum_{x~} |A(y, x~ | x, y~=0)|^2` for one padded parent
    /// pattern: the focus marginal after driving the circuit with the parent
    /// basis state. Entries past the original cardinality are padding.
    pub fn focus_marginal(&self, parent_pattern: usize) -> Result<Vec<f64>> {
        let mut state = StateVector::basis(self.circuit.n_qubits(), parent_pattern)?;
        state.apply_circuit(&self.circuit)?;
        Ok(state.marginal_distribution(&self.focus_qubits))
    }
}

/// Padded parent pattern encoding a tuple of original parent values.
pub fn padded_parent_pattern(parent_cards: &[usize], values: &[usize]) -> usize {
    let mut pattern = 0usize;
    let mut offset = 0;
    for k in (0..parent_cards.len()).rev() {
        pattern |= values[k] << offset;
        offset += padded_bits(parent_cards[k]);
    }
    pattern
}

// ---------------------------------------------------------------------------
// Q-embedding of a whole network
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Worldline {
    pub name: String,
    pub node: NodeId,
    pub n_bits: usize,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum QbNodeKind {
    /// A focus register starting at |0>.
    SourceAncilla,
    /// A table replaced by its q-embedding; the only kind that emits gates.
    CptEmbedding,
    /// Projection of one coordinate of a composite parent: a coordinate
    /// selection of an existing worldline, so no gates.
    Marginalizer,
    /// The parent-image copy left behind on the parent register.
    SinkAncilla,
    /// Delta child appended to childless nodes so every original node value
    /// reaches a leaf.
    AddedChild,
}

#[derive(Clone, Debug)]
pub struct QbNode {
    pub label: String,
    pub kind: QbNodeKind,
    /// Worldline the node lives on.
    pub worldline: usize,
    /// For `CptEmbedding`: the network node whose table is embedded.
    pub embeds: Option<NodeId>,
}

/// Layered quantum-network form of a classical network: one worldline per
/// original node, marginalizers on every edge, each table replaced by its
/// embedding, and source/sink ancillas recorded.
#[derive(Clone, Debug)]
pub struct QbNet {
    net: BayesNet,
    pub worldlines: Vec<Worldline>,
    pub nodes: Vec<QbNode>,
}

/// Builds the q-embedding of a network: marginalizer nodes go on every edge
/// (childless nodes get a delta child), then every table is replaced by its
/// embedding with source and sink ancillas recorded.
pub fn embed_net(net: &BayesNet) -> QbNet {
    let worldlines: Vec<Worldline> = net
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| Worldline {
            name: n.name.clone(),
            node: NodeId(i),
            n_bits: padded_bits(n.cardinality),
        })
        .collect();
    let mut nodes = Vec::new();
    for &i in net.topological_order() {
        let name = &net.node(i).name;
        for &p in net.parents(i) {
            nodes.push(QbNode {
                label: format!("mar({}->{})", net.node(p).name, name),
                kind: QbNodeKind::Marginalizer,
                worldline: p.0,
                embeds: None,
            });
        }
        nodes.push(QbNode {
            label: format!("src({name})"),
            kind: QbNodeKind::SourceAncilla,
            worldline: i.0,
            embeds: None,
        });
        nodes.push(QbNode {
            label: format!("emb({name})"),
            kind: QbNodeKind::CptEmbedding,
            worldline: i.0,
            embeds: Some(i),
        });
        for &p in net.parents(i) {
            nodes.push(QbNode {
                label: format!("sink({}~{})", net.node(p).name, name),
                kind: QbNodeKind::SinkAncilla,
                worldline: p.0,
                embeds: None,
            });
        }
    }
    for i in 0..net.n_nodes() {
        if net.children(NodeId(i)).is_empty() {
            nodes.push(QbNode {
                label: format!("child({})", net.node(NodeId(i)).name),
                kind: QbNodeKind::AddedChild,
                worldline: i,
                embeds: None,
            });
        }
    }
    QbNet {
        net: net.clone(),
        worldlines,
        nodes,
    }
}

impl QbNet {
    pub fn net(&self) -> &BayesNet {
        &self.net
    }
}

/// Converts a quantum network to a circuit: one qubit group per worldline,
/// embedding gates emitted in layer order; marginalizers, sinks, added
/// children and other identity extensions emit nothing. Also returns the
/// worldline-to-qubits map.
pub fn qbnet_to_circuit(qb: &QbNet) -> Result<(Circuit, BTreeMap<String, Vec<usize>>)> {
    let mut base = 0usize;
    let mut groups: Vec<Vec<usize>> = Vec::with_capacity(qb.worldlines.len());
    let mut map = BTreeMap::new();
    for wl in &qb.worldlines {
        let group: Vec<usize> = (base..base + wl.n_bits).collect();
        base += wl.n_bits;
        map.insert(wl.name.clone(), group.clone());
        groups.push(group);
    }
    let cap = max_qubits();
    if base > cap {
        return Err(Error::Width { needed: base, cap });
    }
    let mut circuit = Circuit::new(base);
    for qbnode in &qb.nodes {
        if qbnode.kind != QbNodeKind::CptEmbedding {
            continue;
        }
        let i = qbnode.embeds.expect("embedding records its node");
        let emb = embed_cpt(&qb.net.node(i).cpt);
        // Local layout: parent bits low (last parent least significant),
        // focus bits high. Map onto the worldline groups.
        let mut local_to_global = vec![0usize; emb.circuit.n_qubits()];
        let mut offset = 0;
        for &p in qb.net.parents(i).iter().rev() {
            for &g in &groups[p.0] {
                local_to_global[offset] = g;
                offset += 1;
            }
        }
        for &g in &groups[i.0] {
            local_to_global[offset] = g;
            offset += 1;
        }
        for gate in emb.circuit.gates() {
            circuit.push(gate.remap(|q| local_to_global[q]))?;
        }
    }
    Ok((circuit, map))
}

/// Exact distribution over the original joint space read off the final
/// state of the network circuit. Padding patterns must carry nothing.
pub fn embedded_joint_distribution(qb: &QbNet) -> Result<Vec<f64>> {
    let (circuit, map) = qbnet_to_circuit(qb)?;
    let mut state = StateVector::zero(circuit.n_qubits())?;
    state.apply_circuit(&circuit)?;
    let qubits: Vec<usize> = qb
        .worldlines
        .iter()
        .flat_map(|wl| map[&wl.name].clone())
        .collect();
    let padded = state.marginal_distribution(&qubits);
    let cards = qb.net.cardinalities();
    let mut out = vec![0.0; qb.net.joint_state_count() as usize];
    let mut leak = 0.0;
    for (pattern, &p) in padded.iter().enumerate() {
        let mut vals = Vec::with_capacity(cards.len());
        let mut offset = 0;
        let mut ok = true;
        for wl in &qb.worldlines {
            let v = (pattern >> offset) & ((1 << wl.n_bits) - 1);
            offset += wl.n_bits;
            if v >= qb.net.cardinality(wl.node) {
                ok = false;
                break;
            }
            vals.push(v);
        }
        if ok {
            out[index_of_assignment(&cards, &vals)] += p;
        } else {
            leak += p;
        }
    }
    debug_assert!(leak < 1e-12, "padding states carry probability {leak}");
    Ok(out)
}

// ---------------------------------------------------------------------------
// Gibbs transition network
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum SliceKind {
    /// Evidence node: every per-slice table is a delta, nothing to do.
    Identity,
    /// Resample the node from a table over its reduced control set.
    Resample {
        /// Control nodes in ascending order, evidence contracted away. For
        /// Metropolis-Hastings slices this includes the node itself.
        controls: Vec<NodeId>,
        /// `table[config]` is the next-value distribution of the node,
        /// `config` indexed over `controls` first-most-significant.
        table: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug)]
pub struct SliceSpec {
    pub step: usize,
    pub node: NodeId,
    pub kind: SliceKind,
}

/// Time-sliced transition network of `beta` deterministic sweeps starting
/// from `x_prev`: slice `j` resamples node `j mod n` while every other node
/// carries a delta.
#[derive(Clone, Debug)]
pub struct GibbsNet {
    net: BayesNet,
    pub query: Query,
    pub beta: u32,
    pub x_prev: Assignment,
    pub slices: Vec<SliceSpec>,
}

fn check_prev(net: &BayesNet, q: &Query, x_prev: &Assignment) -> Result<()> {
    if x_prev.0.len() != net.n_nodes() {
        return Err(Error::Parse("previous state has wrong length".into()));
    }
    for (i, &v) in x_prev.0.iter().enumerate() {
        if v >= net.cardinality(NodeId(i)) {
            return Err(Error::Parse(format!(
                "previous state {v} out of range for node `{}`",
                net.node(NodeId(i)).name
            )));
        }
    }
    if let Some((&i, &e)) = q.evidence.iter().find(|&(&i, &e)| x_prev.value(i) != e) {
        return Err(Error::Parse(format!(
            "previous state disagrees with evidence on node `{}` ({} vs {})",
            net.node(i).name,
            x_prev.value(i),
            e
        )));
    }
    Ok(())
}

/// Distribution table of one resampling slice: for every configuration of
/// the reduced control set, the next-value distribution produced by `row_fn`
/// on a full assignment carrying that configuration plus the evidence.
fn slice_table(
    net: &BayesNet,
    q: &Query,
    controls: &[NodeId],
    node_card: usize,
    mut row_fn: impl FnMut(&Assignment) -> Result<Vec<f64>>,
) -> Vec<Vec<f64>> {
    let cards: Vec<usize> = controls.iter().map(|&c| net.cardinality(c)).collect();
    let mut table = Vec::new();
    for_each_assignment(&cards, |vals| {
        let mut x = Assignment(vec![0; net.n_nodes()]);
        for (&e, &v) in &q.evidence {
            x.0[e.0] = v;
        }
        for (&c, &v) in controls.iter().zip(vals) {
            x.0[c.0] = v;
        }
        match row_fn(&x) {
            Ok(row) => table.push(row),
            Err(_) => {
                // Unreachable configuration; park on an arbitrary state.
                let mut row = vec![0.0; node_card];
                row[0] = 1.0;
                table.push(row);
            }
        }
    });
    table
}

/// Builds the Gibbs transition network for `beta` sweeps: each slice's table
/// is the blanket conditional of the resampled node, with evidence members
/// contracted and nodes outside the Markov blanket dropped.
pub fn build_gibbs_net(
    net: &BayesNet,
    q: &Query,
    beta: u32,
    x_prev: &Assignment,
) -> Result<GibbsNet> {
    check_prev(net, q, x_prev)?;
    if beta == 0 {
        return Err(Error::Parse("beta must be >= 1".into()));
    }
    let n = net.n_nodes();
    let mut slices = Vec::with_capacity(beta as usize * n);
    for j in 0..beta as usize * n {
        let f = NodeId(j % n);
        let kind = if q.is_evidence(f) {
            SliceKind::Identity
        } else {
            let controls: Vec<NodeId> = net
                .markov_blanket(f)
                .into_iter()
                .filter(|b| !q.is_evidence(*b))
                .collect();
            let table = slice_table(net, q, &controls, net.cardinality(f), |x| {
                net.conditional_given_blanket(f, x)
            });
            SliceKind::Resample { controls, table }
        };
        slices.push(SliceSpec {
            step: j,
            node: f,
            kind,
        });
    }
    Ok(GibbsNet {
        net: net.clone(),
        query: q.clone(),
        beta,
        x_prev: x_prev.clone(),
        slices,
    })
}

/// Same slice structure with the Metropolis-Hastings single-node transition
/// in place of the blanket conditional; the node's own previous value joins
/// the control set.
pub fn build_mh_gibbs_net(
    net: &BayesNet,
    q: &Query,
    proposal: &MhProposal,
    beta: u32,
    x_prev: &Assignment,
) -> Result<GibbsNet> {
    check_prev(net, q, x_prev)?;
    if beta == 0 {
        return Err(Error::Parse("beta must be >= 1".into()));
    }
    let n = net.n_nodes();
    let mut slices = Vec::with_capacity(beta as usize * n);
    for j in 0..beta as usize * n {
        let f = NodeId(j % n);
        let kind = if q.is_evidence(f) {
            SliceKind::Identity
        } else {
            let mut controls: Vec<NodeId> = net
                .markov_blanket(f)
                .into_iter()
                .filter(|b| !q.is_evidence(*b))
                .collect();
            controls.push(f);
            controls.sort();
            let table = slice_table(net, q, &controls, net.cardinality(f), |x| {
                mh_row(net, proposal, f, x)
            });
            SliceKind::Resample { controls, table }
        };
        slices.push(SliceSpec {
            step: j,
            node: f,
            kind,
        });
    }
    Ok(GibbsNet {
        net: net.clone(),
        query: q.clone(),
        beta,
        x_prev: x_prev.clone(),
        slices,
    })
}

impl GibbsNet {
    pub fn net(&self) -> &BayesNet {
        &self.net
    }

    /// Exact distribution over the final slice, eliminating all intermediate
    /// slices: the point mass at `x_prev` pushed through each per-slice
    /// resampling in turn.
    pub fn transition_distribution(&self) -> Vec<f64> {
        let cards = self.net.cardinalities();
        let dim = self.net.joint_state_count() as usize;
        let mut dist = vec![0.0; dim];
        dist[index_of_assignment(&cards, &self.x_prev.0)] = 1.0;
        for slice in &self.slices {
            let SliceKind::Resample { controls, table } = &slice.kind else {
                continue;
            };
            let control_cards: Vec<usize> =
                controls.iter().map(|&c| self.net.cardinality(c)).collect();
            let f = slice.node;
            let mut next = vec![0.0; dim];
            for (idx, &mass) in dist.iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                let vals = assignment_from_index(&cards, idx);
                let cvals: Vec<usize> = controls.iter().map(|&c| vals[c.0]).collect();
                let row = &table[index_of_assignment(&control_cards, &cvals)];
                let mut new_vals = vals;
                for (v, &p) in row.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    new_vals[f.0] = v;
                    next[index_of_assignment(&cards, &new_vals)] += mass * p;
                }
            }
            dist = next;
        }
        dist
    }
}

// ---------------------------------------------------------------------------
// Gibbs circuit with qubit recycling
// ---------------------------------------------------------------------------

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RecycleEvent {
    /// Carrier returned to |0> by re-applying its copy CNOT; reusable after
    /// the gate at `gate_index` has run.
    CarrierUncomputed { qubit: usize, gate_index: usize },
    /// Register moved to the next slice and its source zeroed; reusable.
    MoveZeroed { qubit: usize, gate_index: usize },
    /// Register still in a known basis state, cleared with X gates where its
    /// bits were 1; reusable.
    KnownStateReset { qubit: usize, gate_index: usize },
    /// Pre-resample value of a revisited node; not provably |0>, kept.
    Garbage { qubit: usize },
}

/// Compiled sweep-transition circuit. Run it from
/// `StateVector::basis(width, initial_state)` and measure `final_qubits`.
#[derive(Clone, Debug)]
pub struct GibbsCircuit {
    pub circuit: Circuit,
    /// Basis index putting `x_prev` on the first-slice registers and
    /// carriers.
    pub initial_state: usize,
    /// Final register group of each non-evidence node, least significant
    /// bit first.
    pub final_qubits: BTreeMap<NodeId, Vec<usize>>,
    pub recycle_plan: Vec<RecycleEvent>,
    /// Registers ever allocated; equals the circuit width.
    pub peak_width: usize,
}

/// Slice-granular qubit allocator: registers freed during a slice re-enter
/// the pool at the next slice boundary, the circuit-level form of recycling
/// the previous time slice once the mid-slice copies are done.
struct Allocator {
    free_now: Vec<usize>,
    free_next: Vec<usize>,
    next_fresh: usize,
}

impl Allocator {
    fn new() -> Self {
        Allocator {
            free_now: Vec::new(),
            free_next: Vec::new(),
            next_fresh: 0,
        }
    }

    fn take(&mut self) -> usize {
        self.free_now.pop().unwrap_or_else(|| {
            let q = self.next_fresh;
            self.next_fresh += 1;
            q
        })
    }

    fn take_group(&mut self, n: usize) -> Vec<usize> {
        (0..n).map(|_| self.take()).collect()
    }

    fn release(&mut self, qubits: &[usize]) {
        self.free_next.extend_from_slice(qubits);
    }

    fn advance(&mut self) {
        self.free_now.append(&mut self.free_next);
        // Low indices first, so reuse is deterministic and compact.
        self.free_now.sort_unstable_by(|a, b| b.cmp(a));
    }
}

struct Carrier {
    group: Vec<usize>,
    source: Vec<usize>,
}

/// Compiles a transition network into a circuit. Per resampling slice:
/// a multiplexed rotation writes the node's next value onto fresh qubits,
/// controlled by carrier copies of the current control values; copy-CNOT
/// delta chains move carriers and registers into the next slice; used
/// carriers are uncomputed against their sources and registers still in a
/// known basis state are cleared, so freed qubits are provably |0> when
/// reused. The value a resample replaces cannot be uncomputed and stays as
/// garbage, so width grows past two slice blocks only when a node is
/// revisited after its first resample.
pub fn gibbs_net_circuit(g: &GibbsNet) -> Result<GibbsCircuit> {
    let net = &g.net;
    let q = &g.query;
    let mut alloc = Allocator::new();
    let mut gates: Vec<Gate> = Vec::new();
    let mut plan: Vec<RecycleEvent> = Vec::new();

    // Current register of each non-evidence node, plus the still-known basis
    // value of registers that have not been resampled yet.
    let mut slots: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    let mut known: BTreeMap<NodeId, usize> = BTreeMap::new();
    let mut initial_state = 0usize;
    for i in 0..net.n_nodes() {
        let i = NodeId(i);
        if q.is_evidence(i) {
            continue;
        }
        let group = alloc.take_group(padded_bits(net.cardinality(i)));
        for (b, &qb) in group.iter().enumerate() {
            if (g.x_prev.value(i) >> b) & 1 == 1 {
                initial_state |= 1 << qb;
            }
        }
        slots.insert(i, group);
        known.insert(i, g.x_prev.value(i));
    }

    let controls_of = |j: usize| -> Option<&[NodeId]> {
        g.slices[j..].iter().find_map(|s| match &s.kind {
            SliceKind::Resample { controls, .. } => Some(controls.as_slice()),
            SliceKind::Identity => None,
        })
    };

    // Carriers for the first resampling slice are basis-initialized like the
    // first-slice registers themselves.
    let mut carriers: BTreeMap<NodeId, Carrier> = BTreeMap::new();
    if let Some(controls) = controls_of(0) {
        for &k in controls {
            let group = alloc.take_group(padded_bits(net.cardinality(k)));
            for (b, &qb) in group.iter().enumerate() {
                if (g.x_prev.value(k) >> b) & 1 == 1 {
                    initial_state |= 1 << qb;
                }
            }
            carriers.insert(
                k,
                Carrier {
                    source: slots[&k].clone(),
                    group,
                },
            );
        }
    }
    alloc.advance();

    for (j, slice) in g.slices.iter().enumerate() {
        let SliceKind::Resample { controls, table } = &slice.kind else {
            continue;
        };
        let f = slice.node;
        let next_controls: Vec<NodeId> = controls_of(j + 1).unwrap_or(&[]).to_vec();
        let last = controls_of(j + 1).is_none();

        // (a) Multiplexed rotation of the fresh target, selected by the
        // carriers of the current control values.
        let target = alloc.take_group(padded_bits(net.cardinality(f)));
        let control_cards: Vec<usize> = controls.iter().map(|&c| net.cardinality(c)).collect();
        let control_groups: Vec<&[usize]> = controls
            .iter()
            .map(|k| carriers[k].group.as_slice())
            .collect();
        let flat = flatten_controls(&control_groups);
        let foc_bits = target.len();
        let trees: Vec<Option<AngleTree>> = padded_pattern_configs(&control_cards)
            .into_iter()
            .map(|config| {
                config.map(|pc| {
                    chain_angles(&padded_row(&table[pc], foc_bits)).expect("valid slice row")
                })
            })
            .collect();
        gates.extend(conditional_prep_gates(&target, &flat, &trees));

        // (b) Copy-CNOT delta chains into the next slice: the fresh value's
        // carrier first, then moves plus carriers for the other next
        // controls.
        let mut new_carriers: BTreeMap<NodeId, Carrier> = BTreeMap::new();
        if next_controls.contains(&f) {
            let group = alloc.take_group(target.len());
            for (&src, &dst) in target.iter().zip(&group) {
                gates.push(Gate::cnot(src, dst));
            }
            new_carriers.insert(
                f,
                Carrier {
                    source: target.clone(),
                    group,
                },
            );
        }

        // (c) Uncompute this slice's carriers against their sources and
        // release them.
        for &k in controls {
            let carrier = carriers.remove(&k).expect("carrier exists");
            for (&src, &dst) in carrier.source.iter().zip(&carrier.group) {
                gates.push(Gate::cnot(src, dst));
                plan.push(RecycleEvent::CarrierUncomputed {
                    qubit: dst,
                    gate_index: gates.len() - 1,
                });
            }
            alloc.release(&carrier.group);
        }
        carriers.clear();

        for &k in &next_controls {
            if k == f {
                continue;
            }
            // Move the register into the next slice, zeroing the source.
            let old = slots[&k].clone();
            let moved = alloc.take_group(old.len());
            for (&src, &dst) in old.iter().zip(&moved) {
                gates.push(Gate::cnot(src, dst));
            }
            for (&src, &dst) in old.iter().zip(&moved) {
                gates.push(Gate::cnot(dst, src));
                plan.push(RecycleEvent::MoveZeroed {
                    qubit: src,
                    gate_index: gates.len() - 1,
                });
            }
            alloc.release(&old);
            slots.insert(k, moved.clone());
            // Fresh carrier for the next slice.
            let group = alloc.take_group(moved.len());
            for (&src, &dst) in moved.iter().zip(&group) {
                gates.push(Gate::cnot(src, dst));
            }
            new_carriers.insert(
                k,
                Carrier {
                    source: moved,
                    group,
                },
            );
        }
        carriers = new_carriers;

        // (d) The replaced value: clear it if it is still a known basis
        // state, otherwise it stays as garbage.
        let old_f = slots.insert(f, target).expect("slot exists");
        match known.remove(&f) {
            Some(value) if !last => {
                for (b, &qb) in old_f.iter().enumerate() {
                    if (value >> b) & 1 == 1 {
                        gates.push(Gate::x(qb));
                    }
                    plan.push(RecycleEvent::KnownStateReset {
                        qubit: qb,
                        gate_index: gates.len().saturating_sub(1),
                    });
                }
                alloc.release(&old_f);
            }
            Some(_) => {}
            None => {
                for &qb in &old_f {
                    plan.push(RecycleEvent::Garbage { qubit: qb });
                }
            }
        }

        alloc.advance();
    }

    let width = alloc.next_fresh;
    let cap = max_qubits();
    if width > cap {
        return Err(Error::Width { needed: width, cap });
    }
    let mut circuit = Circuit::new(width);
    for gate in gates {
        circuit.push(gate)?;
    }
    Ok(GibbsCircuit {
        circuit,
        initial_state,
        final_qubits: slots,
        recycle_plan: plan,
        peak_width: width,
    })
}

impl GibbsCircuit {
    /// Exact final-slice distribution over the original joint space,
    /// evidence dimensions clamped to their observed values.
    pub fn final_distribution(&self, g: &GibbsNet) -> Result<Vec<f64>> {
        let mut state = StateVector::basis(self.circuit.n_qubits(), self.initial_state)?;
        state.apply_circuit(&self.circuit)?;
        let qubits: Vec<usize> = self.final_qubits.values().flatten().copied().collect();
        let padded = state.marginal_distribution(&qubits);
        let net = g.net();
        let cards = net.cardinalities();
        let mut out = vec![0.0; net.joint_state_count() as usize];
        let mut leak = 0.0;
        for (pattern, &p) in padded.iter().enumerate() {
            let mut vals: Vec<usize> = vec![0; net.n_nodes()];
            for (&e, &v) in &g.query.evidence {
                vals[e.0] = v;
            }
            let mut offset = 0;
            let mut ok = true;
            for (&i, group) in &self.final_qubits {
                let v = (pattern >> offset) & ((1 << group.len()) - 1);
                offset += group.len();
                if v >= net.cardinality(i) {
                    ok = false;
                    break;
                }
                vals[i.0] = v;
            }
            if ok {
                out[index_of_assignment(&cards, &vals)] += p;
            } else {
                leak += p;
            }
        }
        debug_assert!(leak < 1e-12, "padding states carry probability {leak}");
        Ok(out)
    }
}
