use alloc::vec;
use alloc::vec::Vec;

use super::{dot, Mat, Vector};
use crate::tolerances::RANK_CUTOFF;

const MAX_SWEEPS: usize = 80;

/// Thin SVD from one-sided (Hestenes) Jacobi rotations.
///
/// Returns the columns `g_j = σ_j u_j` of `A V` together with `V`, both stored
/// column-wise. Requires `rows ≥ cols`.
fn hestenes(a: &Mat) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let (m, n) = (a.rows(), a.cols());
    debug_assert!(m >= n);
    let mut g: Vec<Vec<f64>> = (0..n).map(|j| a.col(j).into_inner()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&g[p], &g[p]);
                let beta = dot(&g[q], &g[q]);
                let gamma = dot(&g[p], &g[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(&mut g, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    (g, v)
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (a, b) = (*xp, *xq);
        *xp = c * a - s * b;
        *xq = s * a + c * b;
    }
}

/// Singular values in decreasing order.
pub fn singular_values(a: &Mat) -> Vector {
    let t;
    let a = if a.rows() >= a.cols() {
        a
    } else {
        t = a.transpose();
        &t
    };
    let (g, _) = hestenes(a);
    let mut s: Vec<f64> = g.iter().map(|c| libm::sqrt(dot(c, c))).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s.into()
}

/// Minimum-norm least-squares solution of `a x ≈ b`.
///
/// Uses a Jacobi SVD and drops singular values below
/// `RANK_CUTOFF · σ_max`, so rank-deficient systems (such as a graph
/// Laplacian) get the pseudo-inverse answer `a⁺ b`. Consistency is not
/// checked here; callers compare `a x` with `b` themselves.
pub fn lstsq_min_norm(a: &Mat, b: &[f64]) -> Vector {
    assert_eq!(a.rows(), b.len(), "lstsq: rhs length");
    let (m, n) = (a.rows(), a.cols());
    if m >= n {
        let (g, v) = hestenes(a);
        let sq: Vec<f64> = g.iter().map(|c| dot(c, c)).collect();
        let cutoff = RANK_CUTOFF * libm::sqrt(sq.iter().cloned().fold(0.0, f64::max));
        let mut x = vec![0.0; n];
        for j in 0..n {
            if sq[j] <= 0.0 || libm::sqrt(sq[j]) <= cutoff {
                continue;
            }
            let coef = dot(&g[j], b) / sq[j];
            for (xi, vij) in x.iter_mut().zip(&v[j]) {
                *xi += coef * vij;
            }
        }
        x.into()
    } else {
        // Aᵀ V = G = U Σ, so A = V Σ Uᵀ and a⁺ b = Σ_j (v_jᵀ b / σ_j²) g_j.
        let (g, v) = hestenes(&a.transpose());
        let sq: Vec<f64> = g.iter().map(|c| dot(c, c)).collect();
        let cutoff = RANK_CUTOFF * libm::sqrt(sq.iter().cloned().fold(0.0, f64::max));
        let mut x = vec![0.0; n];
        for j in 0..m {
            if sq[j] <= 0.0 || libm::sqrt(sq[j]) <= cutoff {
                continue;
            }
            let coef = dot(&v[j], b) / sq[j];
            for (xi, gij) in x.iter_mut().zip(&g[j]) {
                *xi += coef * gij;
            }
        }
        x.into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::max_abs_diff;

    #[test]
    fn identity_returns_rhs() {
        let b = [1.5, -2.0, 3.25];
        assert!(max_abs_diff(&lstsq_min_norm(&Mat::identity(3), &b), &b) < 1e-15);
    }

    #[test]
    fn laplacian_zero_rhs_is_zero() {
        let l = Mat::from_rows(&[[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]]).unwrap();
        assert_eq!(lstsq_min_norm(&l, &[0.0; 3]).norm_inf(), 0.0);
    }

    #[test]
    fn laplacian_solution_is_orthogonal_to_ones() {
        let l = Mat::from_rows(&[[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]]).unwrap();
        let b = [1.0, 0.5, -1.5];
        let x = lstsq_min_norm(&l, &b);
        assert!(max_abs_diff(&l.matvec(&x), &b) < 1e-12);
        assert!(x.sum().abs() < 1e-12);
    }

    #[test]
    fn wide_underdetermined() {
        // x + y = 2 has minimum-norm solution (1, 1).
        let a = Mat::from_rows(&[[1.0, 1.0]]).unwrap();
        let x = lstsq_min_norm(&a, &[2.0]);
        assert!(max_abs_diff(&x, &[1.0, 1.0]) < 1e-14);
    }

    #[test]
    fn overdetermined_least_squares() {
        // Fit through (0,1),(1,2),(2,2): normal equations give slope 0.5, intercept 7/6.
        let a = Mat::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]).unwrap();
        let x = lstsq_min_norm(&a, &[1.0, 2.0, 2.0]);
        assert!(max_abs_diff(&x, &[7.0 / 6.0, 0.5]) < 1e-13);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let a = Mat::from_rows(&[[0.0, 3.0], [-2.0, 0.0], [0.0, 0.0]]).unwrap();
        let s = singular_values(&a);
        assert!(max_abs_diff(&s, &[3.0, 2.0]) < 1e-14);
    }
}
