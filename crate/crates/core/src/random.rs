//! Seeded random problem instances for property sweeps.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::CommGraph;
use crate::linops::{sym_eig_extremes, Mat, Vector};
use crate::mdp::{MultiAgentProblem, PolicyEvalCore};

/// Shape of the random instances.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomSpec {
    pub agents: (usize, usize),
    pub states: (usize, usize),
    pub gammas: Vec<f64>,
    /// Probability of each non-tree edge being added.
    pub extra_edge_prob: f64,
    /// Features are resampled until `λ_min(ΦᵀΦ)` exceeds this.
    pub min_feature_gram: f64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            agents: (2, 6),
            states: (2, 5),
            gammas: alloc::vec![0.5, 0.9, 0.99],
            extra_edge_prob: 0.3,
            min_feature_gram: 0.05,
        }
    }
}

fn uniform_vec(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

/// A connected graph: a random spanning tree plus independent extra edges.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, extra_edge_prob: f64) -> CommGraph {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        edges.push((parent.min(order[k]), parent.max(order[k])));
    }
    for i in 1..=n {
        for j in i + 1..=n {
            if !edges.contains(&(i, j)) && rng.gen_bool(extra_edge_prob) {
                edges.push((i, j));
            }
        }
    }
    CommGraph::new(n, &edges).expect("generated edges are valid")
}

/// Problem `seed` of the sweep described by `spec`.
///
/// Transition rows are strictly positive (so the chain is irreducible and
/// the stationary weights are positive), features and rewards are uniform
/// on `[-1, 1]`, and `1 ≤ q < |S|`.
pub fn random_problem(spec: &RandomSpec, seed: u64) -> MultiAgentProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_agents = rng.gen_range(spec.agents.0..=spec.agents.1);
    let n_states = rng.gen_range(spec.states.0.max(2)..=spec.states.1.max(2));
    let q = rng.gen_range(1..n_states);
    let gamma = *spec.gammas.choose(&mut rng).expect("at least one discount");

    let mut p = Mat::zeros(n_states, n_states);
    for i in 0..n_states {
        let row: Vec<f64> = (0..n_states).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = row.iter().sum();
        for (j, x) in row.into_iter().enumerate() {
            p[(i, j)] = x / s;
        }
    }
    let phi = loop {
        let data = uniform_vec(&mut rng, n_states * q).into_inner();
        let phi = Mat::from_row_major(n_states, q, data).expect("finite entries");
        let (lo, _) = sym_eig_extremes(&phi.transpose().matmul(&phi)).expect("gram is symmetric");
        if lo > spec.min_feature_gram {
            break phi;
        }
    };
    let core = PolicyEvalCore::new(p, phi, None, gamma).expect("random core is valid");
    let rewards = (0..n_agents)
        .map(|_| uniform_vec(&mut rng, n_states))
        .collect();
    let graph = random_connected_graph(&mut rng, n_agents, spec.extra_edge_prob);
    MultiAgentProblem::new(core, rewards, graph).expect("random problem is valid")
}

/// Uniform `[-1, 1]` initial state of length `n`.
pub fn random_state(n: usize, seed: u64) -> Vector {
    uniform_vec(&mut ChaCha8Rng::seed_from_u64(seed), n)
}
