//! Library results compared against independent computations.

mod common;

use common::*;
use distdp_core::dpflow::{equilibrium_v1, equilibrium_v2, v2_theta_drift};
use distdp_core::linops::{
    eigenvalues, kron, lstsq_min_norm, max_abs_diff, power_stationary, singular_values, solve,
    spectral_abscissa, spectral_radius, sym_eig_extremes,
};
use distdp_core::mdp::{mspbe, projection_matrix, solve_mspbe};
use distdp_core::{dpflow, CommGraph, Mat, Vector};
use nalgebra::{DMatrix, DVector};

fn stationary_by_direct_solve(p: &Mat) -> DVector<f64> {
    let n = p.rows();
    let mut a = to_na(p).transpose() - DMatrix::identity(n, n);
    a.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    a.lu().solve(&rhs).unwrap()
}

/// `θ ← θ + α ΦᵀD(R + γPΦθ − Φθ)` until it stops moving.
fn projected_bellman_fixed_point(r: &[f64]) -> DVector<f64> {
    let core = five_agent_core();
    let phi = to_na(core.phi());
    let p = to_na(core.p());
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(core.d()));
    let r = DVector::from_column_slice(r);
    let mut theta = DVector::zeros(phi.ncols());
    for _ in 0..20_000_000 {
        let td = &r + GAMMA * &p * &phi * &theta - &phi * &theta;
        let step = phi.transpose() * &d * td;
        theta += &step;
        if step.amax() < 1e-15 {
            return theta;
        }
    }
    panic!("fixed-point iteration did not settle");
}

#[test]
fn stationary_distribution_matches_direct_solve() {
    let p = printed_transition().transpose();
    let d = power_stationary(&p).unwrap();
    let oracle = stationary_by_direct_solve(&p);
    assert!(max_abs_diff(&d, oracle.as_slice()) < 1e-10);
    assert!((d.sum() - 1.0).abs() < 1e-12);
    assert_eq!(five_agent_core().d(), &d);
}

#[test]
fn centralized_solution_matches_fixed_point_iteration() {
    let prob = five_agent();
    let theta_c = prob.centralized_solution().unwrap();
    let oracle = projected_bellman_fixed_point(&prob.centralized_reward());
    assert!(
        max_abs_diff(&theta_c, oracle.as_slice()) < 1e-8,
        "{theta_c:?} vs {oracle}"
    );

    let core = prob.core();
    let a = core.bellman_drift().scale(-1.0);
    let b = core.phi_t_d().matvec(&prob.centralized_reward());
    assert!(max_abs_diff(&solve(&a, &b).unwrap(), &theta_c) < 1e-12);
}

#[test]
fn centralized_reward_is_mean() {
    let prob = five_agent();
    let mean: Vec<f64> = (0..3)
        .map(|s| rewards().iter().map(|r| r[s]).sum::<f64>() / 5.0)
        .collect();
    assert!(max_abs_diff(&prob.centralized_reward(), &mean) < 1e-16);
}

#[test]
fn graph_from_edges_reproduces_printed_laplacian() {
    let g = CommGraph::new(5, &[(1, 2), (2, 5), (3, 5), (4, 5)]).unwrap();
    assert_eq!(g.laplacian(), printed_laplacian());
    assert!(g.is_connected());
    assert_eq!(g.neighbor_set(5).unwrap(), vec![2, 3, 4]);
    assert_eq!(g.neighbor_set(1).unwrap(), vec![2]);
    let (lo, _) = sym_eig_extremes(&g.laplacian()).unwrap();
    assert!(lo.abs() < 1e-8);
    assert_eq!(five_agent().graph(), &g);
}

#[test]
fn lifted_features_are_block_diagonal() {
    let big = kron(&Mat::identity(5), &features());
    assert_eq!((big.rows(), big.cols()), (15, 10));
    for i in 0..5 {
        for j in 0..5 {
            let blk = big.block(3 * i, 2 * j, 3, 2);
            if i == j {
                assert_eq!(blk, features());
            } else {
                assert_eq!(blk.max_abs(), 0.0);
            }
        }
    }
}

#[test]
fn projection_fixes_feature_range() {
    let core = five_agent_core();
    let pi = projection_matrix(&core).unwrap();
    assert!(max_abs_diff(pi.matmul(core.phi()).as_slice(), core.phi().as_slice()) < 1e-9);
    assert!(max_abs_diff(pi.matmul(&pi).as_slice(), pi.as_slice()) < 1e-9);
    let annihilated = core.phi_t_d().matmul(&Mat::identity(3).sub(&pi));
    assert!(annihilated.max_abs() < 1e-9);
}

#[test]
fn mspbe_at_zero_is_projected_reward_norm() {
    let core = five_agent_core();
    let r = &rewards()[0];
    let pi = to_na(&projection_matrix(&core).unwrap());
    let pr = pi * DVector::from_column_slice(r);
    let oracle = 0.5
        * pr.iter()
            .zip(core.d().iter())
            .map(|(x, d)| d * x * x)
            .sum::<f64>();
    let got = mspbe(&core, r, &[0.0, 0.0]).unwrap();
    assert!((got - oracle).abs() < 1e-14, "{got} vs {oracle}");
    let theta = solve_mspbe(&core, r).unwrap();
    assert!(mspbe(&core, r, &theta).unwrap() < 1e-12);
}

#[test]
fn drift_sign_and_eigenvalues_agree_with_nalgebra() {
    let core = five_agent_core();
    let m = core.bellman_drift();
    let sym = m.plus_transpose();
    let (lo, hi) = sym_eig_extremes(&sym).unwrap();
    let na = to_na(&sym).symmetric_eigen().eigenvalues;
    assert!((lo - na.min()).abs() < 1e-12 && (hi - na.max()).abs() < 1e-12);
    assert!(hi < 0.0);

    let prob = five_agent();
    for a in [
        dpflow::build_v1(&prob).a().clone(),
        dpflow::build_v2(&prob).a().clone(),
        v2_theta_drift(&prob),
    ] {
        let ours = eigenvalues(&a).unwrap();
        let theirs = to_na(&a).complex_eigenvalues();
        let abscissa = theirs
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        let radius = theirs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert_eq!(ours.len(), theirs.len());
        assert!((spectral_abscissa(&a).unwrap() - abscissa).abs() < 1e-9);
        assert!((spectral_radius(&a).unwrap() - radius).abs() < 1e-9);
        let mut re_ours: Vec<f64> = ours.iter().map(|z| z.0).collect();
        let mut re_theirs: Vec<f64> = theirs.iter().map(|z| z.re).collect();
        re_ours.sort_by(f64::total_cmp);
        re_theirs.sort_by(f64::total_cmp);
        // Defective eigenvalues (the -1 cluster of the v2 drift) split by O(sqrt(eps)).
        assert!(max_abs_diff(&re_ours, &re_theirs) < 1e-6);
    }
}

#[test]
fn min_norm_solutions_match_pseudo_inverse() {
    let prob = five_agent();
    let st = prob.stack();
    let rhs = prob.disagreement_offset();
    let ours = lstsq_min_norm(&st.l_bar, &rhs);
    let theirs = to_na(&st.l_bar).pseudo_inverse(1e-12).unwrap() * DVector::from_column_slice(&rhs);
    assert!(max_abs_diff(&ours, theirs.as_slice()) < 1e-12);
    assert!(st.l_bar.matvec(&ours).sub(&rhs).norm_inf() < 1e-8);

    let sv = singular_values(&st.l_bar);
    let mut na: Vec<f64> = to_na(&st.l_bar).singular_values().iter().copied().collect();
    na.sort_by(|a, b| b.total_cmp(a));
    assert!(max_abs_diff(&sv, &na) < 1e-12);
}

#[test]
fn equilibria_of_five_agent_problem() {
    let prob = five_agent();
    let theta_c = prob.centralized_solution().unwrap();
    let v1 = equilibrium_v1(&prob).unwrap();
    for (name, r) in &v1.residuals {
        assert!(*r < 1e-8, "{name} = {r}");
    }
    assert_eq!(v1.theta_star, theta_c.repeat(5));

    let v2 = equilibrium_v2(&prob).unwrap();
    for (name, r) in &v2.residuals {
        assert!(*r < 1e-8, "{name} = {r}");
    }
    let mean: Vec<f64> = (0..2)
        .map(|k| (0..5).map(|i| v2.theta_star[2 * i + k]).sum::<f64>() / 5.0)
        .collect();
    assert!(max_abs_diff(&mean, &theta_c) < 1e-8);

    // θ̄_∞ by an independent dense solve of the stacked stationarity equation.
    let st = prob.stack();
    let drift = to_na(&v2_theta_drift(&prob));
    let b =
        to_na(&st.phi_bar.transpose().matmul(&st.d_bar)) * DVector::from_column_slice(&st.r_bar);
    let theta = drift.lu().solve(&(-b)).unwrap();
    assert!(max_abs_diff(&v2.theta_star, theta.as_slice()) < 1e-10);
}

#[test]
fn single_agent_solution_is_value_function_for_square_features() {
    let p = printed_transition().transpose();
    let core = distdp_core::PolicyEvalCore::new(p.clone(), Mat::identity(3), None, 0.5).unwrap();
    let r = [1.0, -2.0, 0.5];
    let theta = solve_mspbe(&core, &r).unwrap();
    let v = (DMatrix::identity(3, 3) - 0.5 * to_na(&p))
        .lu()
        .solve(&DVector::from_column_slice(&r))
        .unwrap();
    assert!(max_abs_diff(&theta, v.as_slice()) < 1e-12);
    let ones = solve_mspbe(&core, &[1.0; 3]).unwrap();
    assert!(max_abs_diff(&ones, &Vector::from(vec![2.0; 3])) < 1e-12);
}
