//! Quantum samplers against the classical ones and the exact oracles:
//! per-draw equivalence, macro-transition fidelity, shared weight
//! bookkeeping, and end-to-end posterior accuracy.

mod common;

use common::*;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qbnets::cbnet::{index_of_assignment, NodeId};
use qbnets::circuit::StateVector;
use qbnets::classical::{
    gibbs_transition_matrix, importance_sample_with_drawer, ClassicalDrawer, MhProposal,
    NodeDrawer, SamplingPolicy,
};
use qbnets::qembed::{build_gibbs_net, build_mh_gibbs_net, gibbs_net_circuit, SliceKind};
use qbnets::qsampling::{
    draw_distribution_exact, q_gibbs_sample, q_importance_sample, q_metropolis_hastings_sample,
    Budget, QuantumSamplerConfig,
};
use qbnets::{Assignment, Result};

fn max_abs_diff(
    est: &std::collections::BTreeMap<Vec<usize>, f64>,
    exact: &std::collections::BTreeMap<Vec<usize>, f64>,
) -> f64 {
    exact
        .iter()
        .map(|(k, p)| (est.get(k).copied().unwrap_or(0.0) - p).abs())
        .fold(0.0, f64::max)
}

#[test]
fn per_draw_distribution_equals_policy_row() {
    // The algorithm-level form of the embedding law: for every node and
    // parent configuration of small nets, the exact distribution the
    // quantum draw produces is the sampling row itself.
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    for _ in 0..6 {
        let n = rng.gen_range(2..=4);
        let net = random_binary_net(&mut rng, n, 0.5);
        let q = random_query(&mut rng, &net, 1);
        for policy in [
            SamplingPolicy::rejection(&net),
            SamplingPolicy::likelihood_weighted(&net, &q),
        ] {
            for node in 0..n {
                let i = NodeId(node);
                for pc in 0..net.node(i).cpt.n_parent_configs() {
                    let row = policy.row(i, pc);
                    let exact = draw_distribution_exact(row).unwrap();
                    for (a, b) in exact.iter().zip(row) {
                        assert!((a - b).abs() < 1e-10);
                    }
                }
            }
        }
    }
}

#[test]
fn macro_transition_distribution_is_exact() {
    // No shots: the final-slice marginal equals the product of per-node
    // transition matrices applied to the current point mass.
    let mut rng = ChaCha8Rng::seed_from_u64(502);
    for _ in 0..10 {
        let density = rng.gen_range(0.3..0.9);
        let net = random_binary_net(&mut rng, 3, density);
        let q = random_query(&mut rng, &net, 1);
        let mut vals: Vec<usize> = (0..3).map(|_| rng.gen_range(0..2)).collect();
        for (&e, &v) in &q.evidence {
            vals[e.0] = v;
        }
        let x_prev = Assignment(vals);
        let beta = rng.gen_range(1..=2);
        let g = build_gibbs_net(&net, &q, beta, &x_prev).unwrap();
        let gc = gibbs_net_circuit(&g).unwrap();
        let sim = gc.final_distribution(&g).unwrap();
        let cards = net.cardinalities();
        let mut dist = DVector::from_element(cards.iter().product(), 0.0);
        dist[index_of_assignment(&cards, &x_prev.0)] = 1.0;
        for _ in 0..beta {
            for i in 0..3 {
                dist = gibbs_transition_matrix(&net, &q, NodeId(i)).unwrap() * dist;
            }
        }
        for (a, b) in sim.iter().zip(dist.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

struct Recording<'a> {
    inner: &'a mut ClassicalDrawer,
    log: Vec<usize>,
}

impl NodeDrawer for Recording<'_> {
    fn begin_sample(&mut self, k: u64) {
        self.inner.begin_sample(k);
    }
    fn draw(&mut self, i: NodeId, pc: usize, q_row: &[f64]) -> Result<usize> {
        let v = self.inner.draw(i, pc, q_row)?;
        self.log.push(v);
        Ok(v)
    }
}

struct Replay {
    values: std::collections::VecDeque<usize>,
}

impl NodeDrawer for Replay {
    fn begin_sample(&mut self, _k: u64) {}
    fn draw(&mut self, _i: NodeId, _pc: usize, _q_row: &[f64]) -> Result<usize> {
        Ok(self.values.pop_front().expect("enough recorded draws"))
    }
}

#[test]
fn weight_bookkeeping_is_bitwise_identical_given_same_draws() {
    // The quantum and classical importance samplers share one engine; given
    // the same sequence of drawn node values the accumulated weights are
    // bit-for-bit equal.
    let mut rng = ChaCha8Rng::seed_from_u64(503);
    let net = random_binary_net(&mut rng, 5, 0.5);
    let q = random_query(&mut rng, &net, 2);
    let policy = SamplingPolicy::rejection(&net);
    let mut classical = ClassicalDrawer::new(17, 0);
    let mut recording = Recording {
        inner: &mut classical,
        log: Vec::new(),
    };
    let reference =
        importance_sample_with_drawer(&net, &q, &policy, 2_000, &mut recording).unwrap();
    let mut replay = Replay {
        values: recording.log.into(),
    };
    let replayed = importance_sample_with_drawer(&net, &q, &policy, 2_000, &mut replay).unwrap();
    assert_eq!(reference.w_tot().to_bits(), replayed.w_tot().to_bits());
    for (k, w) in reference.weights() {
        assert_eq!(w.to_bits(), replayed.weights()[k].to_bits());
    }
}

#[test]
fn empirical_macro_transitions_match_elimination_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(504);
    let net = dense3();
    let q = query_of(&[], &[0]);
    let x_prev = Assignment(vec![1, 0, 1]);
    let g = build_gibbs_net(&net, &q, 2, &x_prev).unwrap();
    let gc = gibbs_net_circuit(&g).unwrap();
    let oracle = g.transition_distribution();
    let mut state = StateVector::basis(gc.circuit.n_qubits(), gc.initial_state).unwrap();
    state.apply_circuit(&gc.circuit).unwrap();
    let qubits: Vec<usize> = gc.final_qubits.values().flatten().copied().collect();
    let shots = 40_000;
    let mut counts = vec![0usize; oracle.len()];
    let cards = net.cardinalities();
    for _ in 0..shots {
        let outcome = state.clone().measure_subset(&qubits, &mut rng);
        let mut vals = vec![0usize; 3];
        let mut offset = 0;
        for (&i, group) in &gc.final_qubits {
            vals[i.0] = (outcome >> offset) & ((1 << group.len()) - 1);
            offset += group.len();
        }
        counts[index_of_assignment(&cards, &vals)] += 1;
    }
    for (s, &p) in oracle.iter().enumerate() {
        let freq = counts[s] as f64 / shots as f64;
        assert!((freq - p).abs() < 0.02, "state {s}: {freq} vs {p}");
    }
}

#[test]
fn quantum_gibbs_posterior_accuracy() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let net = random_binary_net(&mut rng, 3, 0.7);
    let q = random_query(&mut rng, &net, 1);
    let exact = net.exact_posterior(&q).unwrap().estimates();
    let mut cfg = QuantumSamplerConfig::chain(90_000, 2, 3);
    if let Budget::Chain { t_burn, .. } = &mut cfg.budget {
        *t_burn = 3_000;
    }
    let est = q_gibbs_sample(&net, &q, &cfg).unwrap().estimates();
    let err = max_abs_diff(&est, &exact);
    assert!(err < 0.02, "max error {err}");
}

#[test]
fn quantum_mh_posterior_accuracy_with_uniform_proposal() {
    let mut rng = ChaCha8Rng::seed_from_u64(506);
    let net = random_binary_net(&mut rng, 3, 0.6);
    let q = random_query(&mut rng, &net, 1);
    let exact = net.exact_posterior(&q).unwrap().estimates();
    let proposal = MhProposal::uniform(&net);
    let mut cfg = QuantumSamplerConfig::chain(200_000 * 3, 1, 4);
    if let Budget::Chain { t_burn, .. } = &mut cfg.budget {
        *t_burn = 9_000;
    }
    let est = q_metropolis_hastings_sample(&net, &q, &proposal, &cfg)
        .unwrap()
        .estimates();
    let err = max_abs_diff(&est, &exact);
    assert!(err < 0.02, "max error {err}");
}

#[test]
fn quantum_is_with_rejection_policy_accuracy() {
    let mut rng = ChaCha8Rng::seed_from_u64(507);
    let net = random_binary_net(&mut rng, 5, 0.5);
    let q = random_query(&mut rng, &net, 2);
    let exact = net.exact_posterior(&q).unwrap().estimates();
    let policy = SamplingPolicy::rejection(&net);
    let cfg = QuantumSamplerConfig::samples(200_000, 5);
    let est = q_importance_sample(&net, &q, &policy, &cfg).unwrap().estimates();
    let err = max_abs_diff(&est, &exact);
    assert!(err < 0.02, "max error {err}");
}

#[test]
fn blanket_proposal_gives_gibbs_slice_tables() {
    // Angle-level agreement: every Metropolis-Hastings slice table with the
    // blanket-conditional proposal matches the Gibbs table for each value of
    // the node's own carrier.
    let mut rng = ChaCha8Rng::seed_from_u64(508);
    let net = random_binary_net(&mut rng, 3, 0.8);
    let q = query_of(&[], &[0]);
    let x_prev = Assignment(vec![0, 1, 0]);
    let proposal = MhProposal::blanket_conditional(&net);
    let mh = build_mh_gibbs_net(&net, &q, &proposal, 1, &x_prev).unwrap();
    let gibbs = build_gibbs_net(&net, &q, 1, &x_prev).unwrap();
    for (ms, gs) in mh.slices.iter().zip(&gibbs.slices) {
        let SliceKind::Resample {
            controls: mc,
            table: mt,
        } = &ms.kind
        else {
            panic!("no evidence, all slices resample");
        };
        let SliceKind::Resample {
            controls: gc,
            table: gt,
        } = &gs.kind
        else {
            panic!()
        };
        // The MH control set adds the node itself.
        assert_eq!(mc.len(), gc.len() + 1);
        let own_pos = mc.iter().position(|&c| c == ms.node).unwrap();
        let mc_cards: Vec<usize> = mc.iter().map(|&c| net.cardinality(c)).collect();
        for (config, row) in mt.iter().enumerate() {
            let vals = qbnets::cbnet::assignment_from_index(&mc_cards, config);
            let gvals: Vec<usize> = vals
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != own_pos)
                .map(|(_, &v)| v)
                .collect();
            let gc_cards: Vec<usize> = gc.iter().map(|&c| net.cardinality(c)).collect();
            let grow = &gt[index_of_assignment(&gc_cards, &gvals)];
            for (a, b) in row.iter().zip(grow) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn lws_quantum_and_classical_agree_without_evidence() {
    let mut rng = ChaCha8Rng::seed_from_u64(509);
    let net = random_binary_net(&mut rng, 4, 0.5);
    let q = random_query(&mut rng, &net, 0);
    let policy = SamplingPolicy::likelihood_weighted(&net, &q);
    let n = 150_000;
    let quantum = q_importance_sample(&net, &q, &policy, &QuantumSamplerConfig::samples(n, 8))
        .unwrap()
        .estimates();
    let classical = qbnets::classical::importance_sample(&net, &q, &policy, n, 8)
        .unwrap()
        .estimates();
    let exact = net.exact_posterior(&q).unwrap().estimates();
    assert!(max_abs_diff(&quantum, &exact) < 0.02);
    assert!(max_abs_diff(&classical, &exact) < 0.02);
    assert!(max_abs_diff(&quantum, &classical) < 0.02);
}
