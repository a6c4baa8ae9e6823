//! The three continuous-time dynamic-programming flows as affine ODEs
//! `ẋ = A x + b`, plus integration, equilibria and convergence monitors.
//!
//! With `M̄ = Φ̄ᵀ D̄ (γP̄ − I) Φ̄`, `L̄ = L ⊗ I_q` and `R̄` the stacked rewards:
//!
//! * centralized: `θ̇ = M̄ θ + Φ̄ᵀ D̄ (1 ⊗ R_c)`
//! * version 1:   `θ̇ = M̄ θ + Φ̄ᵀ D̄ R̄ − L̄ θ − L̄ w`, `ẇ = L̄ θ`
//! * version 2:   `θ̇ = M̄ θ + Φ̄ᵀ D̄ R̄ − L̄ θ`, `ẇ = θ − w − L̄ w − L̄ v`, `v̇ = L̄ w`
//!
//! Every block is stored agent-major: agent `i` (0-based) owns
//! `offset + i·q .. offset + (i+1)·q`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::linops::{Mat, Vector};
use crate::mdp::{MultiAgentProblem, Stacked};
use crate::{Error, Result};

mod equilibrium;
mod integrate;
mod monitor;

pub use equilibrium::{
    equilibrium, equilibrium_centralized, equilibrium_v1, equilibrium_v2, EquilibriumComponent,
    EquilibriumReport,
};
pub use integrate::{
    integrate, integrate_with, propagate, settle, Method, Propagator, Settled, Trajectory,
};
pub use monitor::{
    consensus_error, lyapunov_series, max_increase, tracking_error, MonitorSeries, Series,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlowKind {
    Centralized,
    Version1,
    Version2,
}

impl FlowKind {
    pub const ALL: [FlowKind; 3] = [
        FlowKind::Centralized,
        FlowKind::Version1,
        FlowKind::Version2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FlowKind::Centralized => "central",
            FlowKind::Version1 => "v1",
            FlowKind::Version2 => "v2",
        }
    }

    /// The block whose agent copies are expected to reach `θ_c`.
    pub fn consensus_block(self) -> &'static str {
        match self {
            FlowKind::Centralized | FlowKind::Version1 => "theta",
            FlowKind::Version2 => "w",
        }
    }
}

/// A named slice of the flow state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

/// `ẋ = A x + b` with named state blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFlow {
    a: Mat,
    b: Vector,
    blocks: Vec<Block>,
    kind: FlowKind,
    agents: usize,
    agent_dim: usize,
}

impl LinearFlow {
    /// Assembles a flow. The blocks must tile `0..a.rows()` in order, carry
    /// unique names and each hold `agents · agent_dim` entries.
    pub fn new(
        a: Mat,
        b: Vector,
        blocks: Vec<Block>,
        kind: FlowKind,
        agents: usize,
        agent_dim: usize,
    ) -> Result<Self> {
        if !a.is_square() || b.len() != a.rows() {
            return Err(Error::DimensionMismatch(format!(
                "drift is {}x{} and offset has length {}",
                a.rows(),
                a.cols(),
                b.len()
            )));
        }
        let mut next = 0;
        for (k, blk) in blocks.iter().enumerate() {
            if blk.offset != next || blk.len != agents * agent_dim {
                return Err(Error::Invalid {
                    field: "blocks",
                    reason: format!("block `{}` does not tile the state", blk.name),
                });
            }
            if blocks[..k].iter().any(|o| o.name == blk.name) {
                return Err(Error::Invalid {
                    field: "blocks",
                    reason: format!("duplicate block `{}`", blk.name),
                });
            }
            next += blk.len;
        }
        if next != a.rows() {
            return Err(Error::Invalid {
                field: "blocks",
                reason: format!("blocks cover {next} of {} coordinates", a.rows()),
            });
        }
        Ok(LinearFlow {
            a,
            b,
            blocks,
            kind,
            agents,
            agent_dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn kind(&self) -> FlowKind {
        self.kind
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn agent_dim(&self) -> usize {
        self.agent_dim
    }

    pub fn block(&self, name: &str) -> Result<&Block> {
        self.blocks
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| Error::UnknownBlock(name.to_string()))
    }

    /// `A x + b`.
    pub fn rhs(&self, x: &[f64]) -> Vector {
        let mut out = self.a.matvec(x);
        for (o, b) in out.iter_mut().zip(self.b.iter()) {
            *o += b;
        }
        out
    }

    /// The named block of a state vector.
    pub fn slice<'x>(&self, x: &'x [f64], name: &str) -> Result<&'x [f64]> {
        let b = self.block(name)?;
        Ok(&x[b.offset..b.offset + b.len])
    }

    /// Agent `i`'s (0-based) copy inside a block slice.
    pub fn agent<'x>(&self, block: &'x [f64], i: usize) -> &'x [f64] {
        &block[i * self.agent_dim..(i + 1) * self.agent_dim]
    }

    /// Largest `|A|` entry coupling agent `i`'s rows to agent `j`'s columns
    /// (any blocks) over all pairs `j ∉ N_i ∪ {i}` of `graph`. Zero for a
    /// flow where every agent only reads its neighbours.
    pub fn locality_violation(&self, graph: &crate::CommGraph) -> Result<f64> {
        let q = self.agent_dim;
        let mut worst: f64 = 0.0;
        for i in 0..self.agents {
            let mut allowed = vec![false; self.agents];
            allowed[i] = true;
            for j in graph.neighbor_set(i + 1)? {
                allowed[j - 1] = true;
            }
            for rb in &self.blocks {
                for cb in &self.blocks {
                    for j in (0..self.agents).filter(|&j| !allowed[j]) {
                        let blk = self.a.block(rb.offset + i * q, cb.offset + j * q, q, q);
                        worst = worst.max(blk.max_abs());
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// `M̄ = Φ̄ᵀ D̄ (−I + γ P̄) Φ̄`.
fn stacked_drift(st: &Stacked, gamma: f64) -> Mat {
    let n = st.p_bar.rows();
    let inner = st.p_bar.scale(gamma).sub(&Mat::identity(n));
    st.phi_bar
        .transpose()
        .matmul(&st.d_bar)
        .matmul(&inner)
        .matmul(&st.phi_bar)
}

/// `Φ̄ᵀ D̄ r` for a stacked reward `r`.
fn stacked_offset(st: &Stacked, r: &[f64]) -> Vector {
    st.phi_bar.transpose().matmul(&st.d_bar).matvec(r)
}

fn blocks(names: &[&str], len: usize) -> Vec<Block> {
    names
        .iter()
        .enumerate()
        .map(|(k, n)| Block {
            name: n.to_string(),
            offset: k * len,
            len,
        })
        .collect()
}

/// Drift of the version-2 `θ` subsystem, `M̄ − L̄`.
pub fn v2_theta_drift(prob: &MultiAgentProblem) -> Mat {
    let st = prob.stack();
    stacked_drift(&st, prob.core().gamma()).sub(&st.l_bar)
}

/// Centralized flow: every agent is given the averaged reward.
pub fn build_centralized(prob: &MultiAgentProblem) -> LinearFlow {
    let st = prob.stack();
    let (n, q) = (prob.n_agents(), prob.n_features());
    let a = stacked_drift(&st, prob.core().gamma());
    let b = stacked_offset(&st, &prob.centralized_reward().repeat(n));
    LinearFlow::new(a, b, blocks(&["theta"], n * q), FlowKind::Centralized, n, q)
        .expect("centralized flow shape")
}

/// Distributed flow with an auxiliary integral-consensus state `w`.
pub fn build_v1(prob: &MultiAgentProblem) -> LinearFlow {
    let st = prob.stack();
    let (n, q) = (prob.n_agents(), prob.n_features());
    let m = n * q;
    let drift = stacked_drift(&st, prob.core().gamma());
    let mut a = Mat::zeros(2 * m, 2 * m);
    a.set_block(0, 0, &drift.sub(&st.l_bar));
    a.set_block(0, m, &st.l_bar.scale(-1.0));
    a.set_block(m, 0, &st.l_bar);
    let mut b = Vector::zeros(2 * m);
    b[..m].copy_from_slice(&stacked_offset(&st, &st.r_bar));
    LinearFlow::new(a, b, blocks(&["theta", "w"], m), FlowKind::Version1, n, q)
        .expect("v1 flow shape")
}

/// Distributed flow whose local value estimation (`θ`) is decoupled from
/// parameter mixing (`w`, `v`).
pub fn build_v2(prob: &MultiAgentProblem) -> LinearFlow {
    let st = prob.stack();
    let (n, q) = (prob.n_agents(), prob.n_features());
    let m = n * q;
    let drift = stacked_drift(&st, prob.core().gamma());
    let eye = Mat::identity(m);
    let mut a = Mat::zeros(3 * m, 3 * m);
    a.set_block(0, 0, &drift.sub(&st.l_bar));
    a.set_block(m, 0, &eye);
    a.set_block(m, m, &eye.scale(-1.0).sub(&st.l_bar));
    a.set_block(m, 2 * m, &st.l_bar.scale(-1.0));
    a.set_block(2 * m, m, &st.l_bar);
    let mut b = Vector::zeros(3 * m);
    b[..m].copy_from_slice(&stacked_offset(&st, &st.r_bar));
    LinearFlow::new(
        a,
        b,
        blocks(&["theta", "w", "v"], m),
        FlowKind::Version2,
        n,
        q,
    )
    .expect("v2 flow shape")
}

pub fn build(prob: &MultiAgentProblem, kind: FlowKind) -> LinearFlow {
    match kind {
        FlowKind::Centralized => build_centralized(prob),
        FlowKind::Version1 => build_v1(prob),
        FlowKind::Version2 => build_v2(prob),
    }
}
