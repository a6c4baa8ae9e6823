#![allow(dead_code)]

use distdp_core::{CommGraph, Mat, MultiAgentProblem, PolicyEvalCore, Vector};

/// The transition matrix as printed (columns sum to one).
pub fn printed_transition() -> Mat {
    Mat::from_rows(&[
        [1.0 / 2.0, 1.0 / 3.0, 1.0 / 5.0],
        [1.0 / 4.0, 1.0 / 3.0, 2.0 / 5.0],
        [1.0 / 4.0, 1.0 / 3.0, 2.0 / 5.0],
    ])
    .unwrap()
}

pub fn features() -> Mat {
    Mat::from_rows(&[[0.42, -0.38], [-0.58, 0.75], [0.32, -0.52]]).unwrap()
}

pub fn printed_laplacian() -> Mat {
    Mat::from_rows(&[
        [1.0, -1.0, 0.0, 0.0, 0.0],
        [-1.0, 2.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0, -1.0],
        [0.0, 0.0, 0.0, 1.0, -1.0],
        [0.0, -1.0, -1.0, -1.0, 3.0],
    ])
    .unwrap()
}

pub fn rewards() -> Vec<Vector> {
    [
        [0.85, 0.28, -0.59],
        [-0.39, 0.72, 0.66],
        [0.0, -0.55, -0.5],
        [0.45, 0.71, -0.81],
        [-0.45, -0.71, 0.81],
    ]
    .iter()
    .map(|r| Vector::from(&r[..]))
    .collect()
}

pub const GAMMA: f64 = 0.99;

pub fn five_agent_core() -> PolicyEvalCore {
    PolicyEvalCore::new(printed_transition().transpose(), features(), None, GAMMA).unwrap()
}

pub fn five_agent() -> MultiAgentProblem {
    let graph = CommGraph::from_laplacian(&printed_laplacian()).unwrap();
    MultiAgentProblem::new(five_agent_core(), rewards(), graph).unwrap()
}

pub fn to_na(m: &Mat) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}
