use alloc::format;
use alloc::vec::Vec;

use super::{EquilibriumReport, FlowKind, Trajectory};
use crate::linops::Vector;
use crate::{Error, Result};

/// `(t, value)` samples.
pub type Series = Vec<(f64, f64)>;

/// A named Lyapunov monitor along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct MonitorSeries {
    pub name: &'static str,
    pub values: Series,
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Quadratic Lyapunov monitors of `traj` about the equilibrium in `report`.
///
/// * centralized: `V = ‖θ̄ − θ̄*‖²`
/// * version 1: `V = ‖θ̄ − θ̄_∞‖² + ‖w̄ − w̄_∞‖²`
/// * version 2: `V_theta = ‖θ̄ − θ̄_∞‖²` and `V_wv = ‖w̄ − w̄_∞‖² + ‖v̄ − v̄_∞‖²`
///
/// Where an equilibrium component is an affine set, the element nearest to
/// the trajectory's final state is used.
pub fn lyapunov_series(
    traj: &Trajectory,
    report: &EquilibriumReport,
) -> Result<Vec<MonitorSeries>> {
    let flow = traj.flow();
    if flow.kind() != report.kind {
        return Err(Error::KindMismatch {
            flow: flow.kind().name(),
            report: report.kind.name(),
        });
    }
    let last = traj.final_state();
    let target = |name: &str, comp: &Option<super::EquilibriumComponent>| -> Result<Vector> {
        let comp = comp.as_ref().ok_or_else(|| {
            Error::UnknownBlock(format!("{name} (missing from equilibrium report)"))
        })?;
        Ok(comp.closest_to(flow.slice(last, name)?))
    };
    let theta_blk = flow.block("theta")?.clone();
    fn part<'a>(x: &'a Vector, b: &super::Block) -> &'a [f64] {
        &x[b.offset..b.offset + b.len]
    }
    let theta = |x: &Vector| -> f64 { dist_sq(part(x, &theta_blk), &report.theta_star) };
    let series =
        |f: &dyn Fn(&Vector) -> f64| traj.iter().map(|(t, x)| (t, f(x))).collect::<Series>();

    Ok(match report.kind {
        FlowKind::Centralized => alloc::vec![MonitorSeries {
            name: "V",
            values: series(&|x| theta(x)),
        }],
        FlowKind::Version1 => {
            let w_inf = target("w", &report.w_star)?;
            let w_blk = flow.block("w")?.clone();
            alloc::vec![MonitorSeries {
                name: "V",
                values: series(&|x| { theta(x) + dist_sq(part(x, &w_blk), &w_inf) }),
            }]
        }
        FlowKind::Version2 => {
            let w_inf = target("w", &report.w_star)?;
            let v_inf = target("v", &report.v_star)?;
            let w_blk = flow.block("w")?.clone();
            let v_blk = flow.block("v")?.clone();
            alloc::vec![
                MonitorSeries {
                    name: "V_theta",
                    values: series(&|x| theta(x)),
                },
                MonitorSeries {
                    name: "V_wv",
                    values: series(&|x| {
                        dist_sq(part(x, &w_blk), &w_inf) + dist_sq(part(x, &v_blk), &v_inf)
                    }),
                },
            ]
        }
    })
}

/// Largest normalized increase `(V_{k+1} − V_k) / (1 + V_k)` over
/// consecutive samples, starting at index `from`. Non-positive means the
/// series never increased.
pub fn max_increase(values: &[(f64, f64)], from: usize) -> f64 {
    values[from.min(values.len())..]
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (1.0 + w[0].1))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest pairwise distance `max_{i,j} ‖x^i − x^j‖₂` between the agents'
/// copies of `block`, at every recorded time.
pub fn consensus_error(traj: &Trajectory, block: &str) -> Result<Series> {
    let flow = traj.flow();
    flow.block(block)?;
    let n = flow.agents();
    Ok(traj
        .iter()
        .map(|(t, x)| {
            let blk = flow.slice(x, block).expect("block checked above");
            let mut worst: f64 = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    worst = worst.max(dist_sq(flow.agent(blk, i), flow.agent(blk, j)));
                }
            }
            (t, libm::sqrt(worst))
        })
        .collect())
}

/// `e_t = Σ_i ‖target − x_t^i‖²` over the agents' copies of `block`.
pub fn tracking_error(traj: &Trajectory, block: &str, target: &[f64]) -> Result<Series> {
    let flow = traj.flow();
    flow.block(block)?;
    if target.len() != flow.agent_dim() {
        return Err(Error::DimensionMismatch(format!(
            "target has length {}, agents hold {} coordinates",
            target.len(),
            flow.agent_dim()
        )));
    }
    Ok(traj
        .iter()
        .map(|(t, x)| {
            let blk = flow.slice(x, block).expect("block checked above");
            let e = (0..flow.agents())
                .map(|i| dist_sq(flow.agent(blk, i), target))
                .sum::<f64>();
            (t, e)
        })
        .collect())
}
