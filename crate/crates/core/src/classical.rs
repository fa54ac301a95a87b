//! Classical samplers: importance sampling (rejection and likelihood
//! weighting as special cases), Gibbs with random or deterministic sweeps,
//! and Metropolis-Hastings, plus the per-node transition matrices their
//! stationarity proofs are stated in terms of.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cbnet::{
    assignment_from_index as decode_index, index_of_assignment as index_of, Assignment, BayesNet,
    Cpt, NodeId, Query, DEFAULT_ENUMERATION_CAP,
};
use crate::error::{Error, Result};
use crate::posterior::PosteriorTable;
use crate::rng::{draw_categorical, stream, Purpose};

// ---------------------------------------------------------------------------
// Sampling policies (importance sampling)
// ---------------------------------------------------------------------------

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum PolicyKind {
    General,
    Rejection,
    LikelihoodWeighted,
}

/// Per-node sampling tables `Q(x_i | parents)`. On non-evidence nodes `Q`
/// must equal the network's `P`; the two named special cases fix the
/// evidence rows too: rejection keeps `Q = P` everywhere, likelihood
/// weighting clamps evidence nodes to their observed value.
#[derive(Clone, Debug)]
pub struct SamplingPolicy {
    kind: PolicyKind,
    tables: Vec<Cpt>,
}

impl SamplingPolicy {
    pub fn rejection(net: &BayesNet) -> Self {
        SamplingPolicy {
            kind: PolicyKind::Rejection,
            tables: net.nodes().iter().map(|n| n.cpt.clone()).collect(),
        }
    }

    pub fn likelihood_weighted(net: &BayesNet, q: &Query) -> Self {
        let tables = net
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, node)| match q.evidence.get(&NodeId(i)) {
                None => node.cpt.clone(),
                Some(&e) => {
                    let card = node.cardinality;
                    let configs = node.cpt.n_parent_configs();
                    let mut entries = vec![0.0; configs * card];
                    for pc in 0..configs {
                        entries[pc * card + e] = 1.0;
                    }
                    Cpt::new(card, node.cpt.parent_cardinalities().to_vec(), entries)
                        .expect("delta rows are valid")
                }
            })
            .collect();
        SamplingPolicy {
            kind: PolicyKind::LikelihoodWeighted,
            tables,
        }
    }

    /// Arbitrary per-node tables; rejected unless `Q = P` on all non-evidence
    /// nodes.
    pub fn general(net: &BayesNet, q: &Query, tables: Vec<Cpt>) -> Result<Self> {
        if tables.len() != net.n_nodes() {
            return Err(Error::Parse(format!(
                "policy has {} tables for {} nodes",
                tables.len(),
                net.n_nodes()
            )));
        }
        for (i, (table, node)) in tables.iter().zip(net.nodes()).enumerate() {
            if table.node_cardinality() != node.cardinality
                || table.parent_cardinalities() != node.cpt.parent_cardinalities()
            {
                return Err(Error::InvalidCpt {
                    node: node.name.clone(),
                    reason: "policy table shape does not match node CPT".into(),
                });
            }
            if !q.is_evidence(NodeId(i)) {
                let same = table
                    .entries()
                    .iter()
                    .zip(node.cpt.entries())
                    .all(|(a, b)| (a - b).abs() <= 1e-12);
                if !same {
                    return Err(Error::InvalidCpt {
                        node: node.name.clone(),
                        reason: "policy must equal the CPT on non-evidence nodes".into(),
                    });
                }
            }
        }
        Ok(SamplingPolicy {
            kind: PolicyKind::General,
            tables,
        })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn row(&self, i: NodeId, parent_config: usize) -> &[f64] {
        self.tables[i.0].row(parent_config)
    }
}

// ---------------------------------------------------------------------------
// Importance sampling
// ---------------------------------------------------------------------------

/// Source of per-node draws for the importance sampler. The classical and
/// quantum samplers share the weight bookkeeping and differ only here.
pub trait NodeDrawer {
    fn begin_sample(&mut self, k: u64);
    /// Draws a state of node `i` from the given sampling row.
    fn draw(&mut self, i: NodeId, parent_config: usize, q_row: &[f64]) -> Result<usize>;
}

/// Inverse-CDF draws from a per-sample RNG stream.
pub struct ClassicalDrawer {
    seed: u64,
    chain: u64,
    rng: ChaCha8Rng,
}

impl ClassicalDrawer {
    pub fn new(seed: u64, chain: u64) -> Self {
        ClassicalDrawer {
            seed,
            chain,
            rng: stream(seed, chain, Purpose::Sample, 0),
        }
    }
}

impl NodeDrawer for ClassicalDrawer {
    fn begin_sample(&mut self, k: u64) {
        self.rng = stream(self.seed, self.chain, Purpose::Sample, k);
    }

    fn draw(&mut self, _i: NodeId, _parent_config: usize, q_row: &[f64]) -> Result<usize> {
        Ok(draw_categorical(&mut self.rng, q_row))
    }
}

/// Importance sampling with an explicit draw source. Nodes are visited in
/// topological order; on an evidence node the likelihood is multiplied by
/// `P/Q` when the draw hits the evidence and the whole sample is rejected
/// when it misses (likelihood weighting never misses).
pub fn importance_sample_with_drawer(
    net: &BayesNet,
    q: &Query,
    policy: &SamplingPolicy,
    n_sam: u64,
    drawer: &mut dyn NodeDrawer,
) -> Result<PosteriorTable> {
    let hyp_cards: Vec<usize> = q.hypotheses.iter().map(|&h| net.cardinality(h)).collect();
    let mut table = PosteriorTable::zeroed(&hyp_cards);
    let mut x = Assignment(vec![0; net.n_nodes()]);
    'samples: for k in 0..n_sam {
        drawer.begin_sample(k);
        let mut weight = 1.0;
        for &i in net.topological_order() {
            let pc = net.parent_config_of(i, &x);
            let q_row = policy.row(i, pc);
            let v = drawer.draw(i, pc, q_row)?;
            x.0[i.0] = v;
            if let Some(&e) = q.evidence.get(&i) {
                if v == e {
                    weight *= net.node(i).cpt.prob(v, pc) / q_row[v];
                } else {
                    continue 'samples;
                }
            }
        }
        table.add(q.key_of(&x), weight);
    }
    if table.w_tot() == 0.0 {
        return Err(Error::AllRejected(n_sam));
    }
    Ok(table)
}

pub fn importance_sample(
    net: &BayesNet,
    q: &Query,
    policy: &SamplingPolicy,
    n_sam: u64,
    seed: u64,
) -> Result<PosteriorTable> {
    importance_sample_on_chain(net, q, policy, n_sam, seed, 0)
}

pub fn importance_sample_on_chain(
    net: &BayesNet,
    q: &Query,
    policy: &SamplingPolicy,
    n_sam: u64,
    seed: u64,
    chain: u64,
) -> Result<PosteriorTable> {
    let mut drawer = ClassicalDrawer::new(seed, chain);
    importance_sample_with_drawer(net, q, policy, n_sam, &mut drawer)
}

// ---------------------------------------------------------------------------
// Markov chains
// ---------------------------------------------------------------------------

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum SweepOrder {
    Random,
    Deterministic,
}

/// Chain length, burn-in and sweep layout. `total_steps` counts node visits.
#[derive(Copy, Clone, Debug)]
pub struct ChainConfig {
    pub total_steps: u64,
    pub t_burn: u64,
    pub sweep: SweepOrder,
    pub sweeps_per_measure: u32,
    pub seed: u64,
    pub chain: u64,
}

impl ChainConfig {
    /// Burn-in defaults to a tenth of the run.
    pub fn new(total_steps: u64, seed: u64) -> Self {
        ChainConfig {
            total_steps,
            t_burn: total_steps / 10,
            sweep: SweepOrder::Random,
            sweeps_per_measure: 1,
            seed,
            chain: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_burn >= self.total_steps {
            return Err(Error::Parse(format!(
                "burn-in {} must be below total steps {}",
                self.t_burn, self.total_steps
            )));
        }
        if self.sweeps_per_measure == 0 {
            return Err(Error::Parse("sweeps per measure must be >= 1".into()));
        }
        Ok(())
    }
}

/// Forward-samples an initial state: evidence clamped, every other node
/// drawn from its CPT given already-initialized parents.
pub fn initial_state(net: &BayesNet, q: &Query, rng: &mut impl Rng) -> Assignment {
    let mut x = Assignment(vec![0; net.n_nodes()]);
    for &i in net.topological_order() {
        let pc = net.parent_config_of(i, &x);
        x.0[i.0] = match q.evidence.get(&i) {
            Some(&e) => e,
            None => draw_categorical(rng, net.node(i).cpt.row(pc)),
        };
    }
    x
}

/// One deterministic all-nodes pass.
pub(crate) fn sweep_nodes(n_nodes: usize) -> impl Iterator<Item = NodeId> {
    (0..n_nodes).map(NodeId)
}

fn gibbs_visit(
    net: &BayesNet,
    q: &Query,
    x: &mut Assignment,
    i: NodeId,
    value_rng: &mut impl Rng,
) -> Result<()> {
    if !q.is_evidence(i) {
        let row = net.conditional_given_blanket(i, x)?;
        x.0[i.0] = draw_categorical(value_rng, &row);
    }
    Ok(())
}

/// Gibbs sampling visiting nodes uniformly at random.
pub fn gibbs_sample_random(net: &BayesNet, q: &Query, cfg: &ChainConfig) -> Result<PosteriorTable> {
    cfg.validate()?;
    let mut node_rng = stream(cfg.seed, cfg.chain, Purpose::NodeChoice, 0);
    let mut value_rng = stream(cfg.seed, cfg.chain, Purpose::Value, 0);
    let mut init_rng = stream(cfg.seed, cfg.chain, Purpose::Init, 0);
    let mut x = initial_state(net, q, &mut init_rng);
    let hyp_cards: Vec<usize> = q.hypotheses.iter().map(|&h| net.cardinality(h)).collect();
    let mut table = PosteriorTable::zeroed(&hyp_cards);
    for t in 0..cfg.total_steps {
        let i = NodeId(node_rng.gen_range(0..net.n_nodes()));
        gibbs_visit(net, q, &mut x, i, &mut value_rng)?;
        if t > cfg.t_burn {
            table.add(q.key_of(&x), 1.0);
        }
    }
    ensure_recorded(&table)?;
    Ok(table)
}

/// Gibbs sampling in a fixed deterministic node order, recording once per
/// `sweeps_per_measure` sweeps. The chain is only time invariant at whole
/// sweep boundaries, so measurements land there.
pub fn gibbs_sample_sweep(net: &BayesNet, q: &Query, cfg: &ChainConfig) -> Result<PosteriorTable> {
    cfg.validate()?;
    let n = net.n_nodes() as u64;
    let mut value_rng = stream(cfg.seed, cfg.chain, Purpose::Value, 0);
    let mut init_rng = stream(cfg.seed, cfg.chain, Purpose::Init, 0);
    let mut x = initial_state(net, q, &mut init_rng);
    let hyp_cards: Vec<usize> = q.hypotheses.iter().map(|&h| net.cardinality(h)).collect();
    let mut table = PosteriorTable::zeroed(&hyp_cards);
    let n_sweeps = cfg.total_steps / n;
    let mut t = 0u64;
    for g in 1..=n_sweeps {
        for i in sweep_nodes(net.n_nodes()) {
            gibbs_visit(net, q, &mut x, i, &mut value_rng)?;
            t += 1;
        }
        if g % cfg.sweeps_per_measure as u64 == 0 && t > cfg.t_burn {
            table.add(q.key_of(&x), 1.0);
        }
    }
    ensure_recorded(&table)?;
    Ok(table)
}

// ---------------------------------------------------------------------------
// Metropolis-Hastings
// ---------------------------------------------------------------------------

/// Per-node proposal distributions `Q_i(y | x_i, blanket values)`.
///
/// Blanket configurations are indexed over the blanket nodes in ascending
/// node order, first node most significant (same digit convention as CPTs).
#[derive(Clone, Debug)]
pub struct MhProposal {
    /// Per node: blanket member ids (ascending) and the flattened rows,
    /// indexed by `((x_i * n_blanket_configs) + bc) * card + y`.
    tables: Vec<ProposalTable>,
}

#[derive(Clone, Debug)]
struct ProposalTable {
    blanket: Vec<NodeId>,
    blanket_cards: Vec<usize>,
    card: usize,
    rows: Vec<f64>,
}

impl MhProposal {
    fn build(net: &BayesNet, mut row_fn: impl FnMut(NodeId, usize, usize) -> Vec<f64>) -> Self {
        let tables = (0..net.n_nodes())
            .map(|i| {
                let i = NodeId(i);
                let blanket: Vec<NodeId> = net.markov_blanket(i).into_iter().collect();
                let blanket_cards: Vec<usize> =
                    blanket.iter().map(|&b| net.cardinality(b)).collect();
                let card = net.cardinality(i);
                let configs: usize = blanket_cards.iter().product();
                let mut rows = Vec::with_capacity(card * configs * card);
                for xi in 0..card {
                    for bc in 0..configs {
                        let row = row_fn(i, xi, bc);
                        debug_assert_eq!(row.len(), card);
                        rows.extend(row);
                    }
                }
                ProposalTable {
                    blanket,
                    blanket_cards,
                    card,
                    rows,
                }
            })
            .collect();
        MhProposal { tables }
    }

    /// Uniform over all states, independent of the current value.
    pub fn uniform(net: &BayesNet) -> Self {
        Self::build(net, |i, _, _| {
            let card = net.cardinality(i);
            vec![1.0 / card as f64; card]
        })
    }

    /// Always proposes the current value; the chain never moves.
    pub fn identity(net: &BayesNet) -> Self {
        Self::build(net, |i, xi, _| {
            let mut row = vec![0.0; net.cardinality(i)];
            row[xi] = 1.0;
            row
        })
    }

    /// The blanket conditional itself: `Q_i(y | x_i, mb) = P(y | mb)`, the
    /// choice under which Metropolis-Hastings reduces to Gibbs.
    pub fn blanket_conditional(net: &BayesNet) -> Self {
        Self::build(net, |i, _, bc| {
            let blanket: Vec<NodeId> = net.markov_blanket(i).into_iter().collect();
            let cards: Vec<usize> = blanket.iter().map(|&b| net.cardinality(b)).collect();
            let mut x = Assignment(vec![0; net.n_nodes()]);
            let mut rem = bc;
            for (k, &b) in blanket.iter().enumerate().rev() {
                x.0[b.0] = rem % cards[k];
                rem /= cards[k];
            }
            match net.conditional_given_blanket(i, &x) {
                Ok(row) => row,
                // Unreachable blanket configuration; any distribution works.
                Err(_) => vec![1.0 / net.cardinality(i) as f64; net.cardinality(i)],
            }
        })
    }

    /// Proposal tables supplied directly; every row must be a distribution.
    pub fn general(net: &BayesNet, rows: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        // rows[i][xi * configs + bc] is the row for node i.
        for (i, node_rows) in rows.iter().enumerate() {
            let i = NodeId(i);
            let configs: usize = net
                .markov_blanket(i)
                .iter()
                .map(|&b| net.cardinality(b))
                .product();
            if node_rows.len() != net.cardinality(i) * configs {
                return Err(Error::Parse(format!(
                    "proposal for node {i} has {} rows, expected {}",
                    node_rows.len(),
                    net.cardinality(i) * configs
                )));
            }
            for row in node_rows {
                let sum: f64 = row.iter().sum();
                if row.len() != net.cardinality(i)
                    || (sum - 1.0).abs() > 1e-12
                    || row.iter().any(|p| *p < 0.0)
                {
                    return Err(Error::Parse(format!(
                        "proposal row for node {i} is not a distribution"
                    )));
                }
            }
        }
        let mut iter_rows = rows;
        Ok(Self::build(net, |i, xi, bc| {
            let configs: usize = net
                .markov_blanket(i)
                .iter()
                .map(|&b| net.cardinality(b))
                .product();
            std::mem::take(&mut iter_rows[i.0][xi * configs + bc])
        }))
    }

    pub fn blanket_config(&self, i: NodeId, x: &Assignment) -> usize {
        let t = &self.tables[i.0];
        let mut idx = 0;
        for (&b, &c) in t.blanket.iter().zip(&t.blanket_cards) {
            idx = idx * c + x.value(b);
        }
        idx
    }

    pub fn row(&self, i: NodeId, xi: usize, blanket_config: usize) -> &[f64] {
        let t = &self.tables[i.0];
        let configs: usize = t.blanket_cards.iter().product();
        let start = (xi * configs + blanket_config) * t.card;
        &t.rows[start..start + t.card]
    }
}

/// Metropolis-Hastings with random node visits: propose `y` from `Q_i`,
/// accept with probability
/// `min(1, Q_i(x_i|y,mb) P(y|mb) / (Q_i(y|x_i,mb) P(x_i|mb)))`.
/// Evidence nodes never change.
pub fn metropolis_hastings_sample(
    net: &BayesNet,
    q: &Query,
    proposal: &MhProposal,
    cfg: &ChainConfig,
) -> Result<PosteriorTable> {
    cfg.validate()?;
    let mut node_rng = stream(cfg.seed, cfg.chain, Purpose::NodeChoice, 0);
    let mut value_rng = stream(cfg.seed, cfg.chain, Purpose::Value, 0);
    let mut u_rng = stream(cfg.seed, cfg.chain, Purpose::Uniform, 0);
    let mut init_rng = stream(cfg.seed, cfg.chain, Purpose::Init, 0);
    let mut x = initial_state(net, q, &mut init_rng);
    let hyp_cards: Vec<usize> = q.hypotheses.iter().map(|&h| net.cardinality(h)).collect();
    let mut table = PosteriorTable::zeroed(&hyp_cards);
    for t in 0..cfg.total_steps {
        let i = NodeId(node_rng.gen_range(0..net.n_nodes()));
        if !q.is_evidence(i) {
            let bc = proposal.blanket_config(i, &x);
            let q_row = proposal.row(i, x.value(i), bc);
            let y = draw_categorical(&mut value_rng, q_row);
            if q_row[y] == 0.0 {
                return Err(Error::ZeroProposal {
                    node: net.node(i).name.clone(),
                    value: y,
                });
            }
            let u: f64 = u_rng.gen();
            let p_cond = net.conditional_given_blanket(i, &x)?;
            let alpha = acceptance(proposal.row(i, y, bc)[x.value(i)], p_cond[y], q_row[y], p_cond[x.value(i)]);
            if u < alpha {
                x.0[i.0] = y;
            }
        }
        if t > cfg.t_burn {
            table.add(q.key_of(&x), 1.0);
        }
    }
    ensure_recorded(&table)?;
    Ok(table)
}

/// A chain whose burn-in swallowed every step has no estimates to report.
fn ensure_recorded(table: &PosteriorTable) -> Result<()> {
    if table.n_samples() == 0 {
        return Err(Error::Parse(
            "no samples recorded; raise the step budget or lower the burn-in".into(),
        ));
    }
    Ok(())
}

/// `min(1, (q_back * p_new) / (q_fwd * p_old))`, with a zero denominator
/// treated as certain acceptance (the current state carries no posterior
/// mass, so any move is an improvement).
fn acceptance(q_back: f64, p_new: f64, q_fwd: f64, p_old: f64) -> f64 {
    let den = q_fwd * p_old;
    if den == 0.0 {
        1.0
    } else {
        (q_back * p_new / den).min(1.0)
    }
}

// ---------------------------------------------------------------------------
// Transition matrices
// ---------------------------------------------------------------------------

fn joint_dims(net: &BayesNet, cap: u128) -> Result<usize> {
    let states = net.joint_state_count();
    if states > cap {
        return Err(Error::TooLarge { states, cap });
    }
    Ok(states as usize)
}

/// Column-stochastic matrix of one Gibbs node visit over the full joint
/// space: entry `(x', x)` is the probability of moving to `x'` from `x` when
/// node `i` is visited. Evidence nodes give the identity.
pub fn gibbs_transition_matrix(net: &BayesNet, q: &Query, i: NodeId) -> Result<DMatrix<f64>> {
    gibbs_transition_matrix_capped(net, q, i, DEFAULT_ENUMERATION_CAP)
}

pub fn gibbs_transition_matrix_capped(
    net: &BayesNet,
    q: &Query,
    i: NodeId,
    cap: u128,
) -> Result<DMatrix<f64>> {
    let dim = joint_dims(net, cap)?;
    let cards = net.cardinalities();
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let vals = decode_index(&cards, col);
        if q.is_evidence(i) {
            m[(col, col)] = 1.0;
            continue;
        }
        let x = Assignment(vals.clone());
        match net.conditional_given_blanket(i, &x) {
            Ok(row) => {
                let mut new_vals = vals.clone();
                for (v, p) in row.iter().enumerate() {
                    new_vals[i.0] = v;
                    m[(index_of(&cards, &new_vals), col)] += p;
                }
            }
            // Unreachable column (zero blanket probability): stay put.
            Err(_) => m[(col, col)] = 1.0,
        }
    }
    Ok(m)
}

/// The sub-distribution `qbar_i(y | x) = alpha_i(y, x) Q_i(y | x_i, mb)` plus
/// the stay-put surplus, as one stochastic row over values of node `i`.
pub(crate) fn mh_row(
    net: &BayesNet,
    proposal: &MhProposal,
    i: NodeId,
    x: &Assignment,
) -> Result<Vec<f64>> {
    let card = net.cardinality(i);
    let xi = x.value(i);
    let bc = proposal.blanket_config(i, x);
    let p_cond = net.conditional_given_blanket(i, x)?;
    let fwd = proposal.row(i, xi, bc);
    let mut row = vec![0.0; card];
    let mut total_qbar = 0.0;
    for y in 0..card {
        if fwd[y] == 0.0 {
            continue;
        }
        let alpha = if y == xi {
            1.0
        } else {
            acceptance(proposal.row(i, y, bc)[xi], p_cond[y], fwd[y], p_cond[xi])
        };
        let qbar = alpha * fwd[y];
        row[y] += qbar;
        total_qbar += qbar;
    }
    row[xi] += 1.0 - total_qbar;
    Ok(row)
}

/// Column-stochastic matrix of one Metropolis-Hastings node visit over the
/// full joint space.
pub fn mh_transition_matrix(
    net: &BayesNet,
    q: &Query,
    proposal: &MhProposal,
    i: NodeId,
) -> Result<DMatrix<f64>> {
    mh_transition_matrix_capped(net, q, proposal, i, DEFAULT_ENUMERATION_CAP)
}

pub fn mh_transition_matrix_capped(
    net: &BayesNet,
    q: &Query,
    proposal: &MhProposal,
    i: NodeId,
    cap: u128,
) -> Result<DMatrix<f64>> {
    let dim = joint_dims(net, cap)?;
    let cards = net.cardinalities();
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let vals = decode_index(&cards, col);
        if q.is_evidence(i) {
            m[(col, col)] = 1.0;
            continue;
        }
        let x = Assignment(vals.clone());
        match mh_row(net, proposal, i, &x) {
            Ok(row) => {
                let mut new_vals = vals.clone();
                for (v, p) in row.iter().enumerate() {
                    new_vals[i.0] = v;
                    m[(index_of(&cards, &new_vals), col)] += p;
                }
            }
            Err(_) => m[(col, col)] = 1.0,
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbnet::NetBuilder;
    use std::collections::BTreeMap;

    fn query(ev: &[(usize, usize)], hyp: &[usize]) -> Query {
        Query::new(
            ev.iter().map(|&(i, v)| (NodeId(i), v)).collect::<BTreeMap<_, _>>(),
            hyp.iter().map(|&i| NodeId(i)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn sweep_visits_each_node_once() {
        let mut counts = [0usize; 5];
        for i in sweep_nodes(5) {
            counts[i.0] += 1;
        }
        assert!(counts.iter().all(|&c| c == 1));
    }

    #[test]
    fn lws_with_no_evidence_has_unit_weights() {
        let net = NetBuilder::new()
            .node("a", 2, &[], vec![0.3, 0.7])
            .node("b", 2, &["a"], vec![0.9, 0.1, 0.4, 0.6])
            .build()
            .unwrap();
        let q = query(&[], &[1]);
        let policy = SamplingPolicy::likelihood_weighted(&net, &q);
        let n = 5000;
        let table = importance_sample(&net, &q, &policy, n, 3).unwrap();
        // Every sample accepted with weight exactly 1.
        assert_eq!(table.w_tot(), n as f64);
    }

    #[test]
    fn rejection_with_certain_evidence_accepts_everything() {
        let net = NetBuilder::new()
            .node("a", 2, &[], vec![0.0, 1.0])
            .node("b", 2, &["a"], vec![0.5, 0.5, 0.2, 0.8])
            .build()
            .unwrap();
        let q = query(&[(0, 1)], &[1]);
        let policy = SamplingPolicy::rejection(&net);
        let n = 2000;
        let table = importance_sample(&net, &q, &policy, n, 9).unwrap();
        assert_eq!(table.n_samples(), n);
        assert_eq!(table.w_tot(), n as f64);
    }

    #[test]
    fn all_rejected_is_an_error() {
        let net = NetBuilder::new()
            .node("a", 2, &[], vec![1.0, 0.0])
            .build()
            .unwrap();
        let q = query(&[(0, 1)], &[]);
        let policy = SamplingPolicy::rejection(&net);
        let err = importance_sample(&net, &q, &policy, 100, 0).unwrap_err();
        assert!(matches!(err, Error::AllRejected(100)));
    }

    #[test]
    fn gibbs_all_evidence_is_constant_chain() {
        let net = NetBuilder::new()
            .node("a", 2, &[], vec![0.3, 0.7])
            .node("b", 2, &["a"], vec![0.9, 0.1, 0.4, 0.6])
            .build()
            .unwrap();
        let q = query(&[(0, 1), (1, 0)], &[]);
        let mut cfg = ChainConfig::new(500, 4);
        cfg.t_burn = 10;
        let table = gibbs_sample_random(&net, &q, &cfg).unwrap();
        // All recorded states are the single clamped one.
        assert_eq!(table.weights().len(), 1);
    }

    #[test]
    fn gibbs_transition_on_evidence_node_is_identity() {
        let net = NetBuilder::new()
            .node("a", 2, &[], vec![0.3, 0.7])
            .node("b", 2, &["a"], vec![0.9, 0.1, 0.4, 0.6])
            .build()
            .unwrap();
        let q = query(&[(0, 1)], &[]);
        let m = gibbs_transition_matrix(&net, &q, NodeId(0)).unwrap();
        assert_eq!(m, DMatrix::identity(4, 4));
    }

    #[test]
    fn gibbs_transition_rows_constant_for_independent_nodes() {
        let net = NetBuilder::new()
            .node("a", 2, &[], vec![0.3, 0.7])
            .node("b", 2, &[], vec![0.9, 0.1])
            .build()
            .unwrap();
        let q = query(&[], &[0]);
        let m = gibbs_transition_matrix(&net, &q, NodeId(0)).unwrap();
        // Resampling node a: the new a-value distribution ignores the old a.
        // Joint index = a * 2 + b.
        for b in 0..2 {
            for a_old in 0..2 {
                let col = a_old * 2 + b;
                assert!((m[(b, col)] - 0.3).abs() < 1e-15);
                assert!((m[(2 + b, col)] - 0.7).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn columns_are_stochastic() {
        let net = NetBuilder::new()
            .node("a", 2, &[], vec![0.3, 0.7])
            .node("b", 3, &["a"], vec![0.5, 0.25, 0.25, 0.1, 0.2, 0.7])
            .node("c", 2, &["b"], vec![0.9, 0.1, 0.4, 0.6, 0.5, 0.5])
            .build()
            .unwrap();
        let q = query(&[(2, 1)], &[0]);
        let proposal = MhProposal::uniform(&net);
        for i in 0..3 {
            let g = gibbs_transition_matrix(&net, &q, NodeId(i)).unwrap();
            let m = mh_transition_matrix(&net, &q, &proposal, NodeId(i)).unwrap();
            for col in 0..g.ncols() {
                assert!((g.column(col).sum() - 1.0).abs() < 1e-12);
                assert!((m.column(col).sum() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_proposal_gives_identity_transition() {
        let net = NetBuilder::new()
            .node("a", 2, &[], vec![0.3, 0.7])
            .node("b", 2, &["a"], vec![0.9, 0.1, 0.4, 0.6])
            .build()
            .unwrap();
        let q = query(&[], &[0]);
        let proposal = MhProposal::identity(&net);
        for i in 0..2 {
            let m = mh_transition_matrix(&net, &q, &proposal, NodeId(i)).unwrap();
            assert_eq!(m, DMatrix::identity(4, 4));
        }
    }

    #[test]
    fn blanket_proposal_reduces_mh_to_gibbs() {
        let net = NetBuilder::new()
            .node("a", 2, &[], vec![0.3, 0.7])
            .node("b", 2, &["a"], vec![0.9, 0.1, 0.4, 0.6])
            .node("c", 2, &["a", "b"], vec![0.2, 0.8, 0.6, 0.4, 0.25, 0.75, 0.5, 0.5])
            .build()
            .unwrap();
        let q = query(&[(1, 1)], &[0]);
        let proposal = MhProposal::blanket_conditional(&net);
        for i in 0..3 {
            let g = gibbs_transition_matrix(&net, &q, NodeId(i)).unwrap();
            let m = mh_transition_matrix(&net, &q, &proposal, NodeId(i)).unwrap();
            let err = (&g - &m).iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(err < 1e-12, "node {i}: max diff {err}");
        }
    }

    #[test]
    fn gibbs_and_blanket_mh_share_trajectories() {
        // With the blanket-conditional proposal the acceptance is always 1,
        // and the shared RNG streams make the two chains identical.
        let net = NetBuilder::new()
            .node("a", 2, &[], vec![0.3, 0.7])
            .node("b", 2, &["a"], vec![0.9, 0.1, 0.4, 0.6])
            .node("c", 2, &["b"], vec![0.2, 0.8, 0.6, 0.4])
            .build()
            .unwrap();
        let q = query(&[(2, 1)], &[0, 1]);
        let proposal = MhProposal::blanket_conditional(&net);
        let mut cfg = ChainConfig::new(4000, 77);
        cfg.t_burn = 100;
        let gibbs = gibbs_sample_random(&net, &q, &cfg).unwrap();
        let mh = metropolis_hastings_sample(&net, &q, &proposal, &cfg).unwrap();
        for (k, w) in gibbs.weights() {
            assert_eq!(w, &mh.weights()[k], "weight mismatch at {k:?}");
        }
    }
}
