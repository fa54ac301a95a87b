//! Quantum versions of the three samplers: per-node draws and whole-sweep
//! transitions are executed by preparing and measuring compiled circuits on
//! the statevector simulator instead of inverting a CDF.
//!
//! The importance sampler shares its weight bookkeeping with the classical
//! one through [`NodeDrawer`]; only the draw differs. Because the parents of
//! a node are in a known basis state when it is drawn, the parent controls
//! collapse away and each draw runs just the rotation path those parent
//! values select: a chain of at most `log2(card)` rotations on the focus
//! register, then one measurement of that register.

use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;

use crate::cbnet::{Assignment, BayesNet, NodeId, Query};
use crate::circuit::{SparseState, StateVector};
use crate::classical::{
    importance_sample_with_drawer, initial_state, MhProposal, NodeDrawer, SamplingPolicy,
};
use crate::error::{Error, Result};
use crate::muxor::{chain_angles, state_prepare_circuit, AngleTree};
use crate::posterior::PosteriorTable;
use crate::qembed::{build_gibbs_net, build_mh_gibbs_net, gibbs_net_circuit, padded_bits, GibbsNet};
use crate::rng::{stream, Purpose};

/// Sample or chain budget of a quantum sampler run.
#[derive(Copy, Clone, Debug)]
pub enum Budget {
    /// Independent samples (importance sampling).
    Samples(u64),
    /// Markov-chain node steps; one circuit is run and measured every
    /// `beta * n_nodes` steps.
    Chain { total_steps: u64, t_burn: u64, beta: u32 },
}

#[derive(Copy, Clone, Debug)]
pub struct QuantumSamplerConfig {
    pub budget: Budget,
    pub seed: u64,
    pub chain: u64,
    /// Measurements per circuit invocation. The samplers need exactly one
    /// outcome per invocation; a larger budget re-prepares and re-measures,
    /// keeping only the last outcome.
    pub shots_per_draw: u32,
}

impl QuantumSamplerConfig {
    pub fn samples(n_sam: u64, seed: u64) -> Self {
        QuantumSamplerConfig {
            budget: Budget::Samples(n_sam),
            seed,
            chain: 0,
            shots_per_draw: 1,
        }
    }

    /// Chain budget with burn-in defaulting to a tenth of the run.
    pub fn chain(total_steps: u64, beta: u32, seed: u64) -> Self {
        QuantumSamplerConfig {
            budget: Budget::Chain {
                total_steps,
                t_burn: total_steps / 10,
                beta,
            },
            seed,
            chain: 0,
            shots_per_draw: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.shots_per_draw == 0 {
            return Err(Error::Parse("shot budget must be >= 1".into()));
        }
        if let Budget::Chain {
            total_steps,
            t_burn,
            beta,
        } = self.budget
        {
            if beta == 0 {
                return Err(Error::Parse("beta must be >= 1".into()));
            }
            if t_burn >= total_steps {
                return Err(Error::Parse(format!(
                    "burn-in {t_burn} must be below total steps {total_steps}"
                )));
            }
        }
        Ok(())
    }
}

/// Exact distribution of one quantum node draw from a sampling row: the
/// focus-register marginal of the prepared state, truncated to the original
/// cardinality. Padding states must carry nothing.
pub fn draw_distribution_exact(q_row: &[f64]) -> Result<Vec<f64>> {
    let card = q_row.len();
    let n_bits = padded_bits(card);
    if n_bits == 0 {
        return Ok(vec![1.0]);
    }
    let mut padded = vec![0.0; 1 << n_bits];
    padded[..card].copy_from_slice(q_row);
    let tree = chain_angles(&padded)?;
    let circuit = state_prepare_circuit(&tree);
    let mut state = StateVector::zero(n_bits)?;
    state.apply_circuit(&circuit)?;
    let marginal = state.marginal_distribution(&(0..n_bits).collect::<Vec<_>>());
    let leak: f64 = marginal[card..].iter().sum();
    debug_assert!(leak < 1e-12, "padding states carry probability {leak}");
    Ok(marginal[..card].to_vec())
}

/// Draws node values by preparing and measuring the rotation path selected
/// by the (basis-state) parents. Angle trees are cached per node and parent
/// configuration; across samples only the measurement stream advances.
struct QuantumDrawer {
    seed: u64,
    chain: u64,
    shots: u32,
    cache: HashMap<(usize, usize), AngleTree>,
    rng: ChaCha8Rng,
}

impl QuantumDrawer {
    fn new(seed: u64, chain: u64, shots: u32) -> Self {
        QuantumDrawer {
            seed,
            chain,
            shots,
            cache: HashMap::new(),
            rng: stream(seed, chain, Purpose::Measure, 0),
        }
    }
}

impl NodeDrawer for QuantumDrawer {
    fn begin_sample(&mut self, k: u64) {
        self.rng = stream(self.seed, self.chain, Purpose::Measure, k);
    }

    fn draw(&mut self, i: NodeId, parent_config: usize, q_row: &[f64]) -> Result<usize> {
        let card = q_row.len();
        let n_bits = padded_bits(card);
        if n_bits == 0 {
            return Ok(0);
        }
        let tree = match self.cache.entry((i.0, parent_config)) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => {
                let mut padded = vec![0.0; 1 << n_bits];
                padded[..card].copy_from_slice(q_row);
                e.insert(chain_angles(&padded)?)
            }
        };
        let circuit = state_prepare_circuit(tree);
        let qubits: Vec<usize> = (0..n_bits).collect();
        let mut outcome = 0;
        for _ in 0..self.shots {
            let mut state = StateVector::zero(n_bits)?;
            state.apply_circuit(&circuit)?;
            outcome = state.measure_subset(&qubits, &mut self.rng);
        }
        debug_assert!(outcome < card, "measured a padding state");
        Ok(outcome)
    }
}

/// Importance sampling with quantum node draws; control flow and weight
/// bookkeeping are shared with the classical sampler.
pub fn q_importance_sample(
    net: &BayesNet,
    q: &Query,
    policy: &SamplingPolicy,
    cfg: &QuantumSamplerConfig,
) -> Result<PosteriorTable> {
    cfg.validate()?;
    let Budget::Samples(n_sam) = cfg.budget else {
        return Err(Error::Parse(
            "importance sampling takes a sample budget, not a chain budget".into(),
        ));
    };
    let mut drawer = QuantumDrawer::new(cfg.seed, cfg.chain, cfg.shots_per_draw);
    importance_sample_with_drawer(net, q, policy, n_sam, &mut drawer)
}

fn run_chain(
    net: &BayesNet,
    q: &Query,
    cfg: &QuantumSamplerConfig,
    build: impl Fn(&Assignment) -> Result<GibbsNet>,
) -> Result<PosteriorTable> {
    cfg.validate()?;
    let Budget::Chain {
        total_steps,
        t_burn,
        beta,
    } = cfg.budget
    else {
        return Err(Error::Parse(
            "chain samplers take a chain budget, not a sample budget".into(),
        ));
    };
    let mut init_rng = stream(cfg.seed, cfg.chain, Purpose::Init, 0);
    let mut x = initial_state(net, q, &mut init_rng);
    let hyp_cards: Vec<usize> = q.hypotheses.iter().map(|&h| net.cardinality(h)).collect();
    let mut table = PosteriorTable::zeroed(&hyp_cards);
    let macro_len = beta as u64 * net.n_nodes() as u64;
    let mut t = 0u64;
    let mut macro_idx = 0u64;
    while t + macro_len <= total_steps {
        let g = build(&x)?;
        let gc = gibbs_net_circuit(&g)?;
        // The state stays sparse (one branch per resample), so the run uses
        // the sparse engine; it is pinned to `StateVector` by tests.
        let mut state = SparseState::basis(gc.circuit.n_qubits(), gc.initial_state);
        state.apply_circuit(&gc.circuit)?;
        let qubits: Vec<usize> = gc.final_qubits.values().flatten().copied().collect();
        let mut rng = stream(cfg.seed, cfg.chain, Purpose::Measure, macro_idx);
        let mut outcome = 0;
        for _ in 0..cfg.shots_per_draw {
            outcome = state.measure_subset(&qubits, &mut rng);
        }
        let mut offset = 0;
        for (&i, group) in &gc.final_qubits {
            let v = (outcome >> offset) & ((1 << group.len()) - 1);
            offset += group.len();
            debug_assert!(v < net.cardinality(i), "measured a padding state");
            x.0[i.0] = v;
        }
        t += macro_len;
        macro_idx += 1;
        if t > t_burn {
            table.add(q.key_of(&x), 1.0);
        }
    }
    if table.n_samples() == 0 {
        return Err(Error::Parse(
            "no samples recorded; raise the step budget or lower the burn-in".into(),
        ));
    }
    Ok(table)
}

/// Gibbs sampling by whole-sweep transition circuits: per macro step the
/// sweep network for the current state is compiled, run, and its final
/// slice measured; the chain advances `beta * n_nodes` node steps at once.
pub fn q_gibbs_sample(net: &BayesNet, q: &Query, cfg: &QuantumSamplerConfig) -> Result<PosteriorTable> {
    let beta = match cfg.budget {
        Budget::Chain { beta, .. } => beta,
        _ => 1,
    };
    run_chain(net, q, cfg, |x| build_gibbs_net(net, q, beta, x))
}

/// Metropolis-Hastings through the same pipeline: each slice's resampling
/// table is the classical single-node transition row (acceptance folded in)
/// before being embedded.
pub fn q_metropolis_hastings_sample(
    net: &BayesNet,
    q: &Query,
    proposal: &MhProposal,
    cfg: &QuantumSamplerConfig,
) -> Result<PosteriorTable> {
    let beta = match cfg.budget {
        Budget::Chain { beta, .. } => beta,
        _ => 1,
    };
    run_chain(net, q, cfg, |x| {
        build_mh_gibbs_net(net, q, proposal, beta, x)
    })
}
