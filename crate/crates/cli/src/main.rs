//! Command-line front end: load a network and a query, run any of the six
//! samplers or the exact oracle, and export compiled circuits.
//!
//! Exit codes: 0 success, 2 argument or file parse errors, 3 numeric
//! failures (all samples rejected, circuit too wide, zero-probability
//! evidence, and the like).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use qbnets::cbnet::Assignment;
use qbnets::classical::{
    gibbs_sample_random, gibbs_sample_sweep, importance_sample_on_chain,
    metropolis_hastings_sample, ChainConfig, MhProposal, SamplingPolicy, SweepOrder,
};
use qbnets::qembed::{build_gibbs_net, embed_cpt, embed_net, gibbs_net_circuit, qbnet_to_circuit};
use qbnets::qsampling::{
    q_gibbs_sample, q_importance_sample, q_metropolis_hastings_sample, Budget,
    QuantumSamplerConfig,
};
use qbnets::{BayesNet, Cpt, Error, PosteriorTable, Query};

#[derive(Parser)]
#[command(name = "qbnets", version, about = "Bayesian-network samplers, classical and quantum")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
enum Method {
    /// Importance sampling (likelihood-weighting policy).
    Is,
    /// Rejection sampling.
    Rs,
    /// Likelihood-weighted sampling.
    Lws,
    /// Gibbs sampling, nodes visited at random.
    Gibbs,
    /// Gibbs sampling, deterministic sweeps.
    GibbsSweep,
    /// Metropolis-Hastings.
    Mh,
    /// Importance sampling with quantum node draws.
    QIs,
    /// Gibbs sampling by sweep-transition circuits.
    QGibbs,
    /// Metropolis-Hastings by sweep-transition circuits.
    QMh,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
enum ProposalKind {
    /// Uniform over the node's states.
    Uniform,
    /// The blanket conditional (recovers Gibbs).
    Blanket,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact posterior by full enumeration.
    Exact {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        query: PathBuf,
    },
    /// Run a sampler and print the posterior as JSON.
    Sample {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        method: Method,
        /// Independent samples, or total node steps for chain methods.
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Burn-in node steps; defaults to a tenth of the run.
        #[arg(long)]
        burn: Option<u64>,
        /// Sweeps per measurement for gibbs-sweep / q-gibbs / q-mh.
        #[arg(long, default_value_t = 1)]
        beta: u32,
        /// Proposal family for mh / q-mh.
        #[arg(long, value_enum, default_value_t = ProposalKind::Uniform)]
        proposal: ProposalKind,
        /// Independent chains run concurrently; samples are split evenly.
        #[arg(long, default_value_t = 1)]
        chains: u32,
    },
    /// Compile a network (or its Gibbs sweep transition) to a circuit.
    Compile {
        #[arg(long)]
        net: PathBuf,
        /// Compile the sweep-transition circuit instead of the network
        /// embedding.
        #[arg(long)]
        gibbs: bool,
        #[arg(long, default_value_t = 1)]
        beta: u32,
        /// Comma-separated previous state for --gibbs (default all zeros).
        #[arg(long)]
        state: Option<String>,
        /// Write the circuit here instead of stdout.
        #[arg(long)]
        out_circuit: Option<PathBuf>,
        /// Write the qubit map here instead of stderr.
        #[arg(long)]
        out_map: Option<PathBuf>,
    },
    /// Compile a single conditional probability table to its embedding.
    Embed {
        #[arg(long)]
        cpt: PathBuf,
    },
}

/// `{"cardinality": k, "parent_cardinalities": [...], "entries": [...]}`,
/// entries flattened with the node state fastest-varying.
#[derive(Deserialize)]
struct CptFile {
    cardinality: usize,
    #[serde(default)]
    parent_cardinalities: Vec<usize>,
    entries: Vec<f64>,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) | Error::Cycle(_) | Error::InvalidCpt { .. } | Error::Index(_) => 2,
        Error::TooLarge { .. }
        | Error::ZeroEvidence
        | Error::Degenerate(_)
        | Error::AllRejected(_)
        | Error::ZeroProposal { .. }
        | Error::NotUnitary { .. }
        | Error::Width { .. } => 3,
    }
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_net(path: &Path) -> Result<BayesNet, Error> {
    BayesNet::from_json(&read_file(path)?)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Exact { net, query } => {
            let net = load_net(&net)?;
            let q = Query::from_json(&read_file(&query)?, &net)?;
            let table = net.exact_posterior(&q)?;
            println!("{}", table.to_json());
            Ok(())
        }
        Cmd::Sample {
            net,
            query,
            method,
            samples,
            seed,
            burn,
            beta,
            proposal,
            chains,
        } => {
            let net = load_net(&net)?;
            let q = Query::from_json(&read_file(&query)?, &net)?;
            if chains == 0 {
                return Err(Error::Parse("chains must be >= 1".into()));
            }
            let table = run_sampler(
                &net, &q, method, samples, seed, burn, beta, proposal, chains,
            )?;
            eprintln!(
                "{} samples recorded, total weight {}",
                table.n_samples(),
                table.w_tot()
            );
            println!("{}", table.to_json());
            Ok(())
        }
        Cmd::Compile {
            net,
            gibbs,
            beta,
            state,
            out_circuit,
            out_map,
        } => {
            let net = load_net(&net)?;
            let (circuit_text, map_json) = if gibbs {
                let x_prev = parse_state(&net, state.as_deref())?;
                let q = Query::new(BTreeMap::new(), vec![])?;
                let g = build_gibbs_net(&net, &q, beta, &x_prev)?;
                let gc = gibbs_net_circuit(&g)?;
                let map: BTreeMap<String, Vec<usize>> = gc
                    .final_qubits
                    .iter()
                    .map(|(&i, qs)| (net.node(i).name.clone(), qs.clone()))
                    .collect();
                (gc.circuit.to_text(), serde_json::to_string(&map).unwrap())
            } else {
                let qb = embed_net(&net);
                let (circuit, map) = qbnet_to_circuit(&qb)?;
                (circuit.to_text(), serde_json::to_string(&map).unwrap())
            };
            match out_circuit {
                Some(path) => std::fs::write(&path, &circuit_text)
                    .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?,
                None => print!("{circuit_text}"),
            }
            match out_map {
                Some(path) => std::fs::write(&path, &map_json)
                    .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?,
                None => eprintln!("qubit map: {map_json}"),
            }
            Ok(())
        }
        Cmd::Embed { cpt } => {
            let file: CptFile = serde_json::from_str(&read_file(&cpt)?)
                .map_err(|e| Error::Parse(format!("cpt file: {e}")))?;
            let table = Cpt::new(file.cardinality, file.parent_cardinalities, file.entries)
                .map_err(|reason| Error::InvalidCpt {
                    node: cpt.display().to_string(),
                    reason,
                })?;
            let emb = embed_cpt(&table);
            print!("{}", emb.circuit.to_text());
            eprintln!(
                "parent qubits: {:?}, focus qubits: {:?}",
                emb.parent_qubits, emb.focus_qubits
            );
            Ok(())
        }
    }
}

fn parse_state(net: &BayesNet, text: Option<&str>) -> Result<Assignment, Error> {
    match text {
        None => Ok(Assignment(vec![0; net.n_nodes()])),
        Some(text) => {
            let vals: Result<Vec<usize>, _> =
                text.split(',').map(|v| v.trim().parse::<usize>()).collect();
            let vals =
                vals.map_err(|e| Error::Parse(format!("state `{text}`: {e} (field --state)")))?;
            if vals.len() != net.n_nodes() {
                return Err(Error::Parse(format!(
                    "state has {} entries for {} nodes (field --state)",
                    vals.len(),
                    net.n_nodes()
                )));
            }
            Ok(Assignment(vals))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_sampler(
    net: &BayesNet,
    q: &Query,
    method: Method,
    samples: u64,
    seed: u64,
    burn: Option<u64>,
    beta: u32,
    proposal: ProposalKind,
    chains: u32,
) -> Result<PosteriorTable, Error> {
    let per_chain = split_samples(samples, chains);
    let results: Vec<Result<PosteriorTable, Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = per_chain
            .iter()
            .enumerate()
            .map(|(c, &n)| {
                scope.spawn(move || {
                    run_one_chain(net, q, method, n, seed, burn, beta, proposal, c as u64)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut merged: Option<PosteriorTable> = None;
    for (c, result) in results.into_iter().enumerate() {
        let table = result?;
        eprintln!("chain {c}: {} samples recorded", table.n_samples());
        merged = Some(match merged {
            None => table,
            Some(mut m) => {
                m.merge(table);
                m
            }
        });
    }
    Ok(merged.expect("at least one chain"))
}

fn split_samples(total: u64, chains: u32) -> Vec<u64> {
    let chains = chains as u64;
    (0..chains)
        .map(|c| total / chains + u64::from(c < total % chains))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn run_one_chain(
    net: &BayesNet,
    q: &Query,
    method: Method,
    samples: u64,
    seed: u64,
    burn: Option<u64>,
    beta: u32,
    proposal: ProposalKind,
    chain: u64,
) -> Result<PosteriorTable, Error> {
    let chain_cfg = || {
        let mut cfg = ChainConfig::new(samples, seed);
        cfg.chain = chain;
        cfg.sweeps_per_measure = beta;
        if let Some(b) = burn {
            cfg.t_burn = b;
        }
        cfg
    };
    let quantum_cfg = |budget: Budget| QuantumSamplerConfig {
        budget,
        seed,
        chain,
        shots_per_draw: 1,
    };
    let chain_budget = || Budget::Chain {
        total_steps: samples,
        t_burn: burn.unwrap_or(samples / 10),
        beta,
    };
    let mh_proposal = || match proposal {
        ProposalKind::Uniform => MhProposal::uniform(net),
        ProposalKind::Blanket => MhProposal::blanket_conditional(net),
    };
    match method {
        Method::Is | Method::Lws => {
            let policy = SamplingPolicy::likelihood_weighted(net, q);
            importance_sample_on_chain(net, q, &policy, samples, seed, chain)
        }
        Method::Rs => {
            let policy = SamplingPolicy::rejection(net);
            importance_sample_on_chain(net, q, &policy, samples, seed, chain)
        }
        Method::Gibbs => gibbs_sample_random(net, q, &chain_cfg()),
        Method::GibbsSweep => {
            let mut cfg = chain_cfg();
            cfg.sweep = SweepOrder::Deterministic;
            gibbs_sample_sweep(net, q, &cfg)
        }
        Method::Mh => metropolis_hastings_sample(net, q, &mh_proposal(), &chain_cfg()),
        Method::QIs => {
            let policy = SamplingPolicy::likelihood_weighted(net, q);
            q_importance_sample(net, q, &policy, &quantum_cfg(Budget::Samples(samples)))
        }
        Method::QGibbs => q_gibbs_sample(net, q, &quantum_cfg(chain_budget())),
        Method::QMh => {
            q_metropolis_hastings_sample(net, q, &mh_proposal(), &quantum_cfg(chain_budget()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_split_covers_total() {
        assert_eq!(split_samples(10, 3), vec![4, 3, 3]);
        assert_eq!(split_samples(9, 3), vec![3, 3, 3]);
        assert_eq!(split_samples(2, 4), vec![1, 1, 0, 0]);
    }
}
