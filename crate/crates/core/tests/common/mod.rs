//! Shared fixtures: random networks and independently coded oracles the
//! library is checked against.
//!
//! Each integration test binary compiles this module separately and uses a
//! different subset of it.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qbnets::cbnet::{for_each_assignment, index_of_assignment, Node, NodeId};
use qbnets::{Assignment, BayesNet, Cpt, Query};

/// Random DAG with edges only from lower to higher indices; `edge_prob`
/// controls density.
pub fn random_parents(rng: &mut ChaCha8Rng, n: usize, edge_prob: f64) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| (0..i).filter(|_| rng.gen::<f64>() < edge_prob).collect())
        .collect()
}

pub fn random_row(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() + 0.05).collect();
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= sum);
    // Make the row sum exactly one in floating arithmetic.
    let fixed: f64 = row[..len - 1].iter().sum();
    row[len - 1] = 1.0 - fixed;
    row
}

/// Random network with the given per-node cardinalities and structure.
pub fn random_net_with(
    rng: &mut ChaCha8Rng,
    cards: &[usize],
    parents: &[Vec<usize>],
) -> BayesNet {
    let nodes = cards
        .iter()
        .enumerate()
        .map(|(i, &card)| {
            let parent_ids: Vec<NodeId> = parents[i].iter().map(|&p| NodeId(p)).collect();
            let parent_cards: Vec<usize> = parents[i].iter().map(|&p| cards[p]).collect();
            let configs: usize = parent_cards.iter().product();
            let mut entries = Vec::with_capacity(configs * card);
            for _ in 0..configs {
                entries.extend(random_row(rng, card));
            }
            Node {
                name: format!("n{i}"),
                cardinality: card,
                parents: parent_ids,
                cpt: Cpt::new(card, parent_cards, entries).unwrap(),
            }
        })
        .collect();
    BayesNet::new(nodes).unwrap()
}

pub fn random_binary_net(rng: &mut ChaCha8Rng, n: usize, edge_prob: f64) -> BayesNet {
    let parents = random_parents(rng, n, edge_prob);
    random_net_with(rng, &vec![2; n], &parents)
}

pub fn random_query(rng: &mut ChaCha8Rng, net: &BayesNet, n_evidence: usize) -> Query {
    let mut ids: Vec<usize> = (0..net.n_nodes()).collect();
    for i in (1..ids.len()).rev() {
        ids.swap(i, rng.gen_range(0..=i));
    }
    let evidence: BTreeMap<NodeId, usize> = ids[..n_evidence]
        .iter()
        .map(|&i| (NodeId(i), rng.gen_range(0..net.cardinality(NodeId(i)))))
        .collect();
    let hypotheses = vec![NodeId(ids[n_evidence])];
    Query::new(evidence, hypotheses).unwrap()
}

/// Independent joint-distribution oracle: extends the distribution node by
/// node along the topological order, reading CPT entries directly. No call
/// into `joint_probability`.
pub fn oracle_joint_vector(net: &BayesNet) -> Vec<f64> {
    let cards = net.cardinalities();
    let dim: usize = cards.iter().product();
    let mut dist = vec![1.0; 1];
    let mut done: Vec<usize> = Vec::new();
    for &i in net.topological_order() {
        let mut next = vec![0.0; dist.len() * net.cardinality(i)];
        let done_cards: Vec<usize> = done.iter().map(|&d| cards[d]).collect();
        let mut idx = 0;
        for_each_assignment(&done_cards, |vals| {
            let by_node: BTreeMap<usize, usize> =
                done.iter().copied().zip(vals.iter().copied()).collect();
            let pvals: Vec<usize> = net.parents(i).iter().map(|p| by_node[&p.0]).collect();
            let pc = net.node(i).cpt.parent_config_index(&pvals);
            for v in 0..net.cardinality(i) {
                next[idx * net.cardinality(i) + v] = dist[idx] * net.node(i).cpt.prob(v, pc);
            }
            idx += 1;
        });
        dist = next;
        done.push(i.0);
    }
    // Reorder from topological-extension order to plain node order.
    let done_cards: Vec<usize> = done.iter().map(|&d| cards[d]).collect();
    let mut out = vec![0.0; dim];
    let mut idx = 0;
    for_each_assignment(&done_cards, |vals| {
        let mut full = vec![0usize; net.n_nodes()];
        for (&node, &v) in done.iter().zip(vals) {
            full[node] = v;
        }
        out[index_of_assignment(&cards, &full)] = dist[idx];
        idx += 1;
    });
    out
}

/// Exact evidence-conditioned joint over the full state space, built from
/// the oracle joint vector.
pub fn oracle_conditioned_joint(net: &BayesNet, q: &Query) -> Vec<f64> {
    let cards = net.cardinalities();
    let mut joint = oracle_joint_vector(net);
    let mut total = 0.0;
    let mut idx = 0;
    for_each_assignment(&cards, |vals| {
        let consistent = q.evidence.iter().all(|(&e, &v)| vals[e.0] == v);
        if !consistent {
            joint[idx] = 0.0;
        }
        total += joint[idx];
        idx += 1;
    });
    joint.iter_mut().for_each(|p| *p /= total);
    joint
}

/// Independent posterior oracle by recursive enumeration over node values.
pub fn oracle_posterior(net: &BayesNet, q: &Query) -> BTreeMap<Vec<usize>, f64> {
    fn recurse(
        net: &BayesNet,
        q: &Query,
        order: &[NodeId],
        depth: usize,
        x: &mut Assignment,
        p: f64,
        acc: &mut BTreeMap<Vec<usize>, f64>,
        total: &mut f64,
    ) {
        if depth == order.len() {
            let key = q.key_of(x);
            *acc.entry(key).or_insert(0.0) += p;
            *total += p;
            return;
        }
        let i = order[depth];
        let pc = net.parent_config_of(i, x);
        for v in 0..net.cardinality(i) {
            if let Some(&e) = q.evidence.get(&i) {
                if v != e {
                    continue;
                }
            }
            x.0[i.0] = v;
            recurse(
                net,
                q,
                order,
                depth + 1,
                x,
                p * net.node(i).cpt.prob(v, pc),
                acc,
                total,
            );
        }
    }
    let order: Vec<NodeId> = net.topological_order().to_vec();
    let mut acc = BTreeMap::new();
    let mut total = 0.0;
    let mut x = Assignment(vec![0; net.n_nodes()]);
    recurse(net, q, &order, 0, &mut x, 1.0, &mut acc, &mut total);
    acc.iter_mut().for_each(|(_, w)| *w /= total);
    acc
}

/// Fixed dense three-node network: every Markov blanket is the other two
/// nodes.
pub fn dense3() -> BayesNet {
    qbnets::NetBuilder::new()
        .node("a", 2, &[], vec![0.3, 0.7])
        .node("b", 2, &["a"], vec![0.9, 0.1, 0.4, 0.6])
        .node(
            "c",
            2,
            &["a", "b"],
            vec![0.2, 0.8, 0.6, 0.4, 0.25, 0.75, 0.5, 0.5],
        )
        .build()
        .unwrap()
}

pub fn query_of(ev: &[(usize, usize)], hyp: &[usize]) -> Query {
    Query::new(
        ev.iter().map(|&(i, v)| (NodeId(i), v)).collect(),
        hyp.iter().map(|&i| NodeId(i)).collect(),
    )
    .unwrap()
}
