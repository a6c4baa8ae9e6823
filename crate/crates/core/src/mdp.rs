//! Policy evaluation with linear features, single agent and networked.
//!
//! A [`PolicyEvalCore`] holds the environment shared by all agents: the
//! transition matrix `P` of the evaluated policy, the feature matrix `Φ`,
//! the state weights `d` (diagonal of `D`) and the discount `γ`. A
//! [`MultiAgentProblem`] adds one expected-reward vector per agent and the
//! communication graph.

use alloc::format;
use alloc::vec::Vec;

use crate::graph::CommGraph;
use crate::linops::{
    check_row_stochastic, kron, left_fixed_point, power_stationary, solve, sym_eig_extremes, Lu,
    Mat, Vector,
};
use crate::tolerances::{FULL_RANK, WEIGHT_SUM};
use crate::{Error, Result};

/// How strictly the transition matrix is validated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TransitionCheck {
    /// Nonnegative with unit row sums.
    #[default]
    RowStochastic,
    /// Use the matrix as given; only shape and finiteness are checked.
    Verbatim,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyEvalCore {
    p: Mat,
    phi: Mat,
    d: Vector,
    gamma: f64,
}

impl PolicyEvalCore {
    /// Validates and assembles a core. When `weights` is `None` the
    /// stationary distribution of `p` is used.
    pub fn new(p: Mat, phi: Mat, weights: Option<Vector>, gamma: f64) -> Result<Self> {
        Self::with_check(p, phi, weights, gamma, TransitionCheck::RowStochastic)
    }

    pub fn with_check(
        p: Mat,
        phi: Mat,
        weights: Option<Vector>,
        gamma: f64,
        check: TransitionCheck,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(invalid("gamma", format!("{gamma} is not in (0, 1)")));
        }
        if !p.is_square() || p.rows() == 0 {
            return Err(invalid(
                "transition",
                format!(
                    "{}x{} matrix is not square and non-empty",
                    p.rows(),
                    p.cols()
                ),
            ));
        }
        if !p.is_finite() || !phi.is_finite() {
            return Err(Error::NonFinite("transition or feature matrix".into()));
        }
        let n = p.rows();
        match check {
            TransitionCheck::RowStochastic => {
                check_row_stochastic(&p).map_err(|e| invalid("transition", format!("{e}")))?
            }
            TransitionCheck::Verbatim => {}
        }
        if phi.rows() != n {
            return Err(invalid(
                "features",
                format!("{} rows but there are {n} states", phi.rows()),
            ));
        }
        if phi.cols() == 0 || phi.cols() > n {
            return Err(invalid(
                "features",
                format!(
                    "{} columns for {n} states cannot have full column rank",
                    phi.cols()
                ),
            ));
        }
        let (gram_min, _) = sym_eig_extremes(&phi.transpose().matmul(&phi))?;
        if !(gram_min > FULL_RANK) {
            return Err(invalid(
                "features",
                format!("not full column rank (smallest eigenvalue of ΦᵀΦ is {gram_min:e})"),
            ));
        }
        let d = match weights {
            Some(d) => d,
            None => match check {
                TransitionCheck::RowStochastic => power_stationary(&p),
                TransitionCheck::Verbatim => left_fixed_point(&p),
            }
            .map_err(|e| invalid("state_weights", format!("stationary distribution: {e}")))?,
        };
        if d.len() != n {
            return Err(invalid(
                "state_weights",
                format!("length {} but there are {n} states", d.len()),
            ));
        }
        if let Some(i) = d.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(invalid(
                "state_weights",
                format!("entry {} = {} is not positive", i + 1, d[i]),
            ));
        }
        if (d.sum() - 1.0).abs() > WEIGHT_SUM {
            return Err(invalid(
                "state_weights",
                format!("sum to {} instead of 1", d.sum()),
            ));
        }
        Ok(PolicyEvalCore { p, phi, d, gamma })
    }

    pub fn p(&self) -> &Mat {
        &self.p
    }

    pub fn phi(&self) -> &Mat {
        &self.phi
    }

    pub fn d(&self) -> &Vector {
        &self.d
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_states(&self) -> usize {
        self.p.rows()
    }

    pub fn n_features(&self) -> usize {
        self.phi.cols()
    }

    pub fn d_mat(&self) -> Mat {
        Mat::from_diag(&self.d)
    }

    /// `Φᵀ D`.
    pub fn phi_t_d(&self) -> Mat {
        let mut out = self.phi.transpose();
        for i in 0..out.rows() {
            for j in 0..out.cols() {
                out[(i, j)] *= self.d[j];
            }
        }
        out
    }

    /// `M = Φᵀ D (γP − I) Φ`, the drift of the single-agent flow.
    pub fn bellman_drift(&self) -> Mat {
        let n = self.n_states();
        let gp_minus_i = self.p.scale(self.gamma).sub(&Mat::identity(n));
        self.phi_t_d().matmul(&gp_minus_i).matmul(&self.phi)
    }

    /// `Φᵀ D r`.
    pub fn reward_offset(&self, r: &[f64]) -> Result<Vector> {
        self.check_reward(r)?;
        Ok(self.phi_t_d().matvec(r))
    }

    fn check_reward(&self, r: &[f64]) -> Result<()> {
        if r.len() != self.n_states() {
            return Err(Error::DimensionMismatch(format!(
                "reward has length {}, expected {}",
                r.len(),
                self.n_states()
            )));
        }
        Ok(())
    }
}

fn invalid(field: &'static str, reason: alloc::string::String) -> Error {
    Error::Invalid { field, reason }
}

/// `Π = Φ (Φᵀ D Φ)⁻¹ Φᵀ D`, the `D`-orthogonal projection onto the range of `Φ`.
pub fn projection_matrix(core: &PolicyEvalCore) -> Result<Mat> {
    let ptd = core.phi_t_d();
    let gram = ptd.matmul(core.phi());
    let x = Lu::factor(&gram)?.solve_mat(&ptd)?;
    Ok(core.phi().matmul(&x))
}

/// `½ ‖Π(r + γ P Φ θ) − Φ θ‖²_D`.
pub fn mspbe(core: &PolicyEvalCore, r: &[f64], theta: &[f64]) -> Result<f64> {
    core.check_reward(r)?;
    if theta.len() != core.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "theta has length {}, expected {}",
            theta.len(),
            core.n_features()
        )));
    }
    let pi = projection_matrix(core)?;
    let v = core.phi().matvec(theta);
    let target = Vector::from(r).add(&core.p().matvec(&v).scale(core.gamma()));
    let err = pi.matvec(&target).sub(&v);
    Ok(0.5
        * err
            .iter()
            .zip(core.d().iter())
            .map(|(e, w)| w * e * e)
            .sum::<f64>())
}

/// The unique solution of the projected Bellman equation,
/// `θ* = −(Φᵀ D (γP − I) Φ)⁻¹ Φᵀ D r`.
pub fn solve_mspbe(core: &PolicyEvalCore, r: &[f64]) -> Result<Vector> {
    let rhs = core.reward_offset(r)?.scale(-1.0);
    solve(&core.bellman_drift(), &rhs)
}

/// N agents sharing one environment, each with a private reward vector,
/// linked by a connected communication graph.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiAgentProblem {
    core: PolicyEvalCore,
    rewards: Vec<Vector>,
    graph: CommGraph,
}

/// Kronecker-lifted system matrices describing all agents jointly.
#[derive(Clone, Debug, PartialEq)]
pub struct Stacked {
    /// `I_N ⊗ Φ`
    pub phi_bar: Mat,
    /// `I_N ⊗ D`
    pub d_bar: Mat,
    /// `I_N ⊗ P`
    pub p_bar: Mat,
    /// `L ⊗ I_q`
    pub l_bar: Mat,
    /// `[R_1; …; R_N]`
    pub r_bar: Vector,
}

impl MultiAgentProblem {
    pub fn new(core: PolicyEvalCore, rewards: Vec<Vector>, graph: CommGraph) -> Result<Self> {
        if rewards.is_empty() {
            return Err(invalid("rewards", "at least one agent is required".into()));
        }
        if let Some(i) = rewards.iter().position(|r| r.len() != core.n_states()) {
            return Err(invalid(
                "rewards",
                format!(
                    "agent {} has {} entries, expected {}",
                    i + 1,
                    rewards[i].len(),
                    core.n_states()
                ),
            ));
        }
        if rewards.iter().any(|r| !r.is_finite()) {
            return Err(Error::NonFinite("reward vector".into()));
        }
        if graph.n() != rewards.len() {
            return Err(invalid(
                "graph",
                format!("{} nodes for {} agents", graph.n(), rewards.len()),
            ));
        }
        if !graph.is_connected() {
            return Err(invalid("graph", "not connected".into()));
        }
        Ok(MultiAgentProblem {
            core,
            rewards,
            graph,
        })
    }

    pub fn core(&self) -> &PolicyEvalCore {
        &self.core
    }

    pub fn rewards(&self) -> &[Vector] {
        &self.rewards
    }

    pub fn graph(&self) -> &CommGraph {
        &self.graph
    }

    pub fn n_agents(&self) -> usize {
        self.rewards.len()
    }

    pub fn n_features(&self) -> usize {
        self.core.n_features()
    }

    /// `R_c = (R_1 + … + R_N) / N`.
    ///
    /// Each state's rewards are summed in sorted order so the result does not
    /// depend on how agents are numbered.
    pub fn centralized_reward(&self) -> Vector {
        let n = self.n_agents() as f64;
        (0..self.core.n_states())
            .map(|s| {
                let mut col: Vec<f64> = self.rewards.iter().map(|r| r[s]).collect();
                col.sort_by(f64::total_cmp);
                col.iter().sum::<f64>() / n
            })
            .collect()
    }

    /// `θ_c`, the MSPBE solution for the averaged reward.
    pub fn centralized_solution(&self) -> Result<Vector> {
        solve_mspbe(&self.core, &self.centralized_reward())
    }

    pub fn stack(&self) -> Stacked {
        let n = self.n_agents();
        let i_n = Mat::identity(n);
        Stacked {
            phi_bar: kron(&i_n, self.core.phi()),
            d_bar: kron(&i_n, &self.core.d_mat()),
            p_bar: kron(&i_n, self.core.p()),
            l_bar: kron(&self.graph.laplacian(), &Mat::identity(self.n_features())),
            r_bar: self
                .rewards
                .iter()
                .flat_map(|r| r.iter().copied())
                .collect(),
        }
    }

    /// Right-hand side of the version-1 auxiliary equilibrium equation,
    /// `[Φᵀ D (R_i − R_c)]_i`.
    pub fn disagreement_offset(&self) -> Vector {
        let rc = self.centralized_reward();
        let ptd = self.core.phi_t_d();
        self.rewards
            .iter()
            .flat_map(|r| ptd.matvec(&r.sub(&rc)).into_inner())
            .collect()
    }
}
