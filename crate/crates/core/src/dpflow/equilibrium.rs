use alloc::vec::Vec;

use super::{stacked_drift, stacked_offset, FlowKind};
use crate::linops::{lstsq_min_norm, norm_inf, solve, Mat, Vector};
use crate::mdp::MultiAgentProblem;
use crate::tolerances::{AVERAGED_THETA, EQUILIBRIUM_CONSISTENCY};
use crate::{Error, Result};

/// An equilibrium component: a single point, or the solution set of a
/// consistent singular system `operator · x = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub enum EquilibriumComponent {
    Point(Vector),
    AffineSet {
        /// Minimum-norm solution.
        representative: Vector,
        operator: Mat,
        rhs: Vector,
    },
}

impl EquilibriumComponent {
    pub fn representative(&self) -> &Vector {
        match self {
            EquilibriumComponent::Point(p) => p,
            EquilibriumComponent::AffineSet { representative, .. } => representative,
        }
    }

    pub fn is_affine_set(&self) -> bool {
        matches!(self, EquilibriumComponent::AffineSet { .. })
    }

    /// The element of the set nearest to `x` (Euclidean projection).
    pub fn closest_to(&self, x: &[f64]) -> Vector {
        match self {
            EquilibriumComponent::Point(p) => p.clone(),
            EquilibriumComponent::AffineSet { operator, rhs, .. } => {
                let defect = operator.matvec(x).sub(rhs);
                Vector::from(x).sub(&lstsq_min_norm(operator, &defect))
            }
        }
    }

    /// `‖operator · x − rhs‖∞`, or the distance to the point.
    pub fn residual(&self, x: &[f64]) -> f64 {
        match self {
            EquilibriumComponent::Point(p) => norm_inf(&p.sub(x)),
            EquilibriumComponent::AffineSet { operator, rhs, .. } => {
                norm_inf(&operator.matvec(x).sub(rhs))
            }
        }
    }
}

/// Closed-form equilibrium of one flow with the residual of each defining
/// equation.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumReport {
    pub kind: FlowKind,
    /// `θ̄_∞`. For the centralized flow and version 1 this is `1 ⊗ θ_c`.
    pub theta_star: Vector,
    pub w_star: Option<EquilibriumComponent>,
    pub v_star: Option<EquilibriumComponent>,
    /// `θ_c`.
    pub theta_c: Vector,
    pub residuals: Vec<(&'static str, f64)>,
}

impl EquilibriumReport {
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals
            .iter()
            .find(|(n, _)| *n == name)
            .map(|&(_, v)| v)
    }
}

fn ensure_consistent(equation: &'static str, residual: f64, tol: f64) -> Result<()> {
    if residual > tol || !residual.is_finite() {
        Err(Error::Inconsistent { equation, residual })
    } else {
        Ok(())
    }
}

pub fn equilibrium_centralized(prob: &MultiAgentProblem) -> Result<EquilibriumReport> {
    let st = prob.stack();
    let n = prob.n_agents();
    let theta_c = prob.centralized_solution()?;
    let theta_star = theta_c.repeat(n);
    let drift = stacked_drift(&st, prob.core().gamma());
    let b = stacked_offset(&st, &prob.centralized_reward().repeat(n));
    let stationarity = norm_inf(&drift.matvec(&theta_star).add(&b));
    Ok(EquilibriumReport {
        kind: FlowKind::Centralized,
        theta_star,
        w_star: None,
        v_star: None,
        theta_c,
        residuals: alloc::vec![("theta_stationarity", stationarity)],
    })
}

/// Version-1 equilibrium: `θ̄_∞ = 1 ⊗ θ_c`, and `w̄_∞` is any solution of
/// `L̄ w̄ = [Φᵀ D (R_i − R_c)]_i`.
pub fn equilibrium_v1(prob: &MultiAgentProblem) -> Result<EquilibriumReport> {
    let st = prob.stack();
    let n = prob.n_agents();
    let theta_c = prob.centralized_solution()?;
    let theta_star = theta_c.repeat(n);
    let rhs = prob.disagreement_offset();
    let w_rep = lstsq_min_norm(&st.l_bar, &rhs);
    let w_residual = norm_inf(&st.l_bar.matvec(&w_rep).sub(&rhs));
    ensure_consistent(
        "L̄ w = Φᵀ D (R_i − R_c)",
        w_residual,
        EQUILIBRIUM_CONSISTENCY,
    )?;

    let drift = stacked_drift(&st, prob.core().gamma());
    let b = stacked_offset(&st, &st.r_bar);
    let stationarity = norm_inf(
        &drift
            .matvec(&theta_star)
            .add(&b)
            .sub(&st.l_bar.matvec(&theta_star))
            .sub(&st.l_bar.matvec(&w_rep)),
    );
    let consensus = norm_inf(&st.l_bar.matvec(&theta_star));
    Ok(EquilibriumReport {
        kind: FlowKind::Version1,
        theta_star,
        w_star: Some(EquilibriumComponent::AffineSet {
            representative: w_rep,
            operator: st.l_bar,
            rhs,
        }),
        v_star: None,
        theta_c,
        residuals: alloc::vec![
            ("theta_stationarity", stationarity),
            ("theta_consensus", consensus),
            ("w_linear_equation", w_residual),
        ],
    })
}

/// Version-2 equilibrium: `w̄_∞ = 1 ⊗ θ_c`; `θ̄_∞` solves
/// `(M̄ − L̄) θ̄ = −Φ̄ᵀ D̄ R̄` and averages to `θ_c`; `v̄_∞` is any solution of
/// `L̄ v̄ = θ̄_∞ − w̄_∞`.
pub fn equilibrium_v2(prob: &MultiAgentProblem) -> Result<EquilibriumReport> {
    let st = prob.stack();
    let (n, q) = (prob.n_agents(), prob.n_features());
    let theta_c = prob.centralized_solution()?;
    let w_star = theta_c.repeat(n);

    let theta_drift = stacked_drift(&st, prob.core().gamma()).sub(&st.l_bar);
    let b = stacked_offset(&st, &st.r_bar);
    let theta_star = solve(&theta_drift, &b.scale(-1.0))?;
    let stationarity = norm_inf(&theta_drift.matvec(&theta_star).add(&b));

    let mut mean = Vector::zeros(q);
    for i in 0..n {
        for k in 0..q {
            mean[k] += theta_star[i * q + k];
        }
    }
    let averaged = norm_inf(&mean.scale(1.0 / n as f64).sub(&theta_c));
    ensure_consistent("mean θ_∞ = θ_c", averaged, AVERAGED_THETA)?;

    let rhs = theta_star.sub(&w_star);
    let v_rep = lstsq_min_norm(&st.l_bar, &rhs);
    let v_residual = norm_inf(&st.l_bar.matvec(&v_rep).sub(&rhs));
    ensure_consistent("L̄ v = θ_∞ − w_∞", v_residual, EQUILIBRIUM_CONSISTENCY)?;
    let w_consensus = norm_inf(&st.l_bar.matvec(&w_star));

    Ok(EquilibriumReport {
        kind: FlowKind::Version2,
        theta_star,
        w_star: Some(EquilibriumComponent::Point(w_star)),
        v_star: Some(EquilibriumComponent::AffineSet {
            representative: v_rep,
            operator: st.l_bar,
            rhs,
        }),
        theta_c,
        residuals: alloc::vec![
            ("theta_stationarity", stationarity),
            ("averaged_theta", averaged),
            ("w_consensus", w_consensus),
            ("v_linear_equation", v_residual),
        ],
    })
}

pub fn equilibrium(prob: &MultiAgentProblem, kind: FlowKind) -> Result<EquilibriumReport> {
    match kind {
        FlowKind::Centralized => equilibrium_centralized(prob),
        FlowKind::Version1 => equilibrium_v1(prob),
        FlowKind::Version2 => equilibrium_v2(prob),
    }
}
