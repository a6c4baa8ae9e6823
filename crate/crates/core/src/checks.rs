//! Checkable consequences of the flows' equilibrium and stability results,
//! shared by the CLI `verify` command and the test suites.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::dpflow::{
    build, consensus_error, equilibrium, integrate_with, lyapunov_series, max_increase, propagate,
    settle, tracking_error, v2_theta_drift, EquilibriumReport, FlowKind, LinearFlow, Method,
    Trajectory,
};
use crate::linops::{
    max_abs_diff, norm_inf, spectral_abscissa, spectral_radius, sym_eig_extremes, Mat, Vector,
};
use crate::mdp::{MultiAgentProblem, PolicyEvalCore};
use crate::tolerances::*;
use crate::Result;

/// One measured quantity compared against its threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    /// `measured < threshold` rather than `≤`.
    pub strict: bool,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            threshold,
            strict: false,
            passed: measured <= threshold,
        }
    }

    pub fn below(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            threshold,
            strict: true,
            passed: measured < threshold,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {:.3e} {} {:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            if self.strict { "<" } else { "<=" },
            self.threshold
        )
    }
}

/// Checks plus informational measurements of one flow run.
#[derive(Clone, Debug)]
pub struct Verification {
    pub kind: FlowKind,
    pub checks: Vec<Check>,
    /// Logged values that are not asserted.
    pub notes: Vec<(String, f64)>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Largest eigenvalue of `M + Mᵀ − 2(γ − 1) ΦᵀDΦ` with `M = ΦᵀD(γP − I)Φ`.
pub fn spectral_margin(core: &PolicyEvalCore) -> Result<f64> {
    let m = core.bellman_drift();
    let gram = core.phi_t_d().matmul(core.phi());
    let s = m
        .plus_transpose()
        .sub(&gram.scale(2.0 * (core.gamma() - 1.0)));
    Ok(sym_eig_extremes(&s)?.1)
}

/// Largest eigenvalue of `D(γP − I) + (γP − I)ᵀD − 2(γ − 1)D`, the same
/// inequality before projection onto the features.
pub fn state_spectral_margin(core: &PolicyEvalCore) -> Result<f64> {
    let n = core.n_states();
    let d = core.d_mat();
    let k = d.matmul(&core.p().scale(core.gamma()).sub(&Mat::identity(n)));
    let s = k.plus_transpose().sub(&d.scale(2.0 * (core.gamma() - 1.0)));
    Ok(sym_eig_extremes(&s)?.1)
}

/// Spectral inequality and Hurwitz checks that hold for every valid problem.
pub fn spectral_checks(prob: &MultiAgentProblem) -> Result<Vec<Check>> {
    let core = prob.core();
    Ok(alloc::vec![
        Check::at_most(
            "spectral_inequality",
            spectral_margin(core)?,
            SPECTRAL_INEQUALITY
        ),
        Check::at_most(
            "state_spectral_inequality",
            state_spectral_margin(core)?,
            SPECTRAL_INEQUALITY
        ),
        Check::below(
            "central_drift_hurwitz",
            spectral_abscissa(build(prob, FlowKind::Centralized).a())?,
            0.0
        ),
        Check::below(
            "v2_theta_drift_hurwitz",
            spectral_abscissa(&v2_theta_drift(prob))?,
            0.0
        ),
    ])
}

/// `dt · ρ(A)`; above [`DT_STABILITY_WARN`] the fixed step is suspect.
pub fn step_stiffness(flow: &LinearFlow, dt: f64) -> Result<f64> {
    Ok(dt * spectral_radius(flow.a())?)
}

fn block_vs_target(flow: &LinearFlow, x: &[f64], block: &str, target: &[f64]) -> Result<f64> {
    let blk = flow.slice(x, block)?;
    Ok((0..flow.agents())
        .map(|i| max_abs_diff(flow.agent(blk, i), target))
        .fold(0.0, f64::max))
}

fn pairwise_spread(flow: &LinearFlow, x: &[f64], block: &str) -> Result<f64> {
    let blk = flow.slice(x, block)?;
    let n = flow.agents();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max(max_abs_diff(flow.agent(blk, i), flow.agent(blk, j)));
        }
    }
    Ok(worst)
}

fn limit_checks(
    prob: &MultiAgentProblem,
    flow: &LinearFlow,
    report: &EquilibriumReport,
    x: &[f64],
    out: &mut Verification,
) -> Result<()> {
    let theta_c = &report.theta_c;
    let l_bar = prob.stack().l_bar;
    match report.kind {
        FlowKind::Centralized => {
            let err = max_abs_diff(flow.slice(x, "theta")?, &report.theta_star);
            out.checks
                .push(Check::at_most("theta_limit", err, CENTRAL_LIMIT));
        }
        FlowKind::Version1 => {
            out.checks.push(Check::at_most(
                "theta_pairwise_agreement",
                pairwise_spread(flow, x, "theta")?,
                CONSENSUS_LIMIT,
            ));
            out.checks.push(Check::at_most(
                "theta_limit",
                block_vs_target(flow, x, "theta", theta_c)?,
                CONSENSUS_LIMIT,
            ));
            let w_set = report.w_star.as_ref().expect("v1 report has w");
            let w = flow.slice(x, "w")?;
            out.checks.push(Check::at_most(
                "w_linear_equation",
                w_set.residual(w),
                AFFINE_RESIDUAL,
            ));
            out.notes
                .push((String::from("lim_Lw_norm_inf"), norm_inf(&l_bar.matvec(w))));
        }
        FlowKind::Version2 => {
            out.checks.push(Check::at_most(
                "w_limit",
                block_vs_target(flow, x, "w", theta_c)?,
                CONSENSUS_LIMIT,
            ));
            let theta = flow.slice(x, "theta")?;
            out.checks.push(Check::at_most(
                "theta_equilibrium",
                max_abs_diff(theta, &report.theta_star),
                CONSENSUS_LIMIT,
            ));
            out.checks.push(Check::below(
                "averaged_theta_equation",
                report.residual("averaged_theta").expect("v2 residual"),
                AVERAGED_THETA,
            ));
            // L̄ v_T against θ̄_∞ − w̄_∞, the equation defining the v limit set.
            let v_set = report.v_star.as_ref().expect("v2 report has v");
            out.checks.push(Check::at_most(
                "v_linear_equation",
                v_set.residual(flow.slice(x, "v")?),
                AFFINE_RESIDUAL,
            ));
        }
    }
    Ok(())
}

/// Integrates `kind` on `prob` from `x0` and checks its limit, Lyapunov
/// monitors, locality, equilibrium residuals and integrator agreement.
pub fn verify_flow(
    prob: &MultiAgentProblem,
    kind: FlowKind,
    x0: &[f64],
    dt: f64,
    t_final: f64,
    method: Method,
    decimation: usize,
) -> Result<Verification> {
    let flow = build(prob, kind);
    let traj = integrate_with(&flow, x0, dt, t_final, method, decimation)?;
    verify_trajectory(prob, &traj, dt)
}

/// As [`verify_flow`] for an already integrated trajectory with step `dt`.
pub fn verify_trajectory(
    prob: &MultiAgentProblem,
    traj: &Trajectory,
    dt: f64,
) -> Result<Verification> {
    let flow = traj.flow();
    let kind = flow.kind();
    let report = equilibrium(prob, kind)?;
    let mut out = Verification {
        kind,
        checks: Vec::new(),
        notes: Vec::new(),
    };
    let worst_residual = report.residuals.iter().map(|&(_, r)| r).fold(0.0, f64::max);
    out.checks.push(Check::at_most(
        "equilibrium_residuals",
        worst_residual,
        EQUILIBRIUM_RESIDUAL,
    ));

    limit_checks(prob, flow, &report, traj.final_state(), &mut out)?;

    let half = traj.len() / 2;
    for m in lyapunov_series(traj, &report)? {
        let from = if m.name == "V_wv" { half } else { 0 };
        out.checks.push(Check::at_most(
            format!("lyapunov_{}", m.name),
            max_increase(&m.values, from).max(0.0),
            LYAPUNOV_SLACK,
        ));
    }

    if kind == FlowKind::Version2 {
        let e = tracking_error(traj, "w", &report.theta_c)?;
        let (e0, et) = (e[0].1, e[e.len() - 1].1);
        out.checks.push(Check::at_most(
            "tracking_error_ratio",
            et,
            TRACKING_RATIO * e0,
        ));
        out.checks.push(Check::at_most(
            "tracking_error_final_half",
            max_increase(&e, half).max(0.0),
            LYAPUNOV_SLACK,
        ));
        let c = consensus_error(traj, "w")?;
        out.checks.push(Check::below(
            "w_consensus_error",
            c[c.len() - 1].1,
            FINAL_CONSENSUS_ERROR,
        ));
        out.notes.push((String::from("e_0"), e0));
        out.notes.push((String::from("e_T"), et));
    }

    if kind != FlowKind::Centralized {
        out.checks.push(Check::at_most(
            "locality",
            flow.locality_violation(prob.graph())?,
            0.0,
        ));
    }

    let (x0, t_final) = (&traj.states()[0], traj.final_time());
    let rk4 = propagate(flow, x0, dt, t_final, Method::Rk4)?;
    let euler = propagate(flow, x0, dt / 10.0, t_final, Method::Euler)?;
    out.checks.push(Check::at_most(
        "rk4_euler_agreement",
        max_abs_diff(&rk4, &euler),
        RK4_EULER_AGREEMENT,
    ));

    out.checks.extend(spectral_checks(prob)?);
    out.notes.push((
        String::from("dt_spectral_radius"),
        step_stiffness(flow, dt)?,
    ));
    Ok(out)
}

/// Upper bound on simulated time when settling random instances.
pub const SETTLE_MAX_TIME: f64 = 1e9;

/// Settles every flow of `prob` from zero and compares the consensus
/// limits with the centralized solution; adds the spectral checks.
pub fn verify_settled(prob: &MultiAgentProblem, dt: f64) -> Result<Vec<Check>> {
    let theta_c = prob.centralized_solution()?;
    let mut checks = Vec::new();
    for kind in FlowKind::ALL {
        let flow = build(prob, kind);
        let s = settle(
            &flow,
            &Vector::zeros(flow.dim()),
            dt,
            Method::Rk4,
            SETTLE_MAX_TIME,
        )?;
        let block = kind.consensus_block();
        let err = block_vs_target(&flow, &s.state, block, &theta_c)?;
        let tol = if kind == FlowKind::Centralized {
            CENTRAL_LIMIT
        } else {
            RANDOM_LIMIT
        };
        checks.push(Check::at_most(
            format!("{}_{}_limit", kind.name(), block),
            err,
            tol,
        ));
    }
    checks.extend(spectral_checks(prob)?);
    Ok(checks)
}
