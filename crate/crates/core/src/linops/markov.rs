use alloc::format;

use super::{norm_inf, Mat, Vector};
use crate::tolerances::{POWER_MAX_ITERS, ROW_SUM, STATIONARY_RESIDUAL};
use crate::{Error, Result};

/// Checks that `p` is square, nonnegative and has unit row sums.
pub(crate) fn check_row_stochastic(p: &Mat) -> Result<()> {
    if !p.is_square() {
        return Err(Error::NotStochastic {
            reason: format!("{}x{} matrix is not square", p.rows(), p.cols()),
        });
    }
    for i in 0..p.rows() {
        let row = p.row(i);
        if let Some(j) = row.iter().position(|&x| x < 0.0) {
            return Err(Error::NotStochastic {
                reason: format!("entry ({}, {}) is negative", i + 1, j + 1),
            });
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > ROW_SUM {
            return Err(Error::NotStochastic {
                reason: format!("row {} sums to {s}", i + 1),
            });
        }
    }
    Ok(())
}

/// `‖dᵀ p − dᵀ‖∞`.
fn left_residual(p: &Mat, d: &[f64]) -> f64 {
    let dp = p.transpose().matvec(d);
    norm_inf(&dp.sub(d))
}

/// Stationary distribution of a row-stochastic matrix.
///
/// Runs the lazy power iteration `d ← ½(d + pᵀ d)` from the uniform vector,
/// which shares its fixed point with `pᵀ` and also converges on periodic
/// chains. Stops once `‖dᵀp − dᵀ‖∞` is far below [`STATIONARY_RESIDUAL`].
pub fn power_stationary(p: &Mat) -> Result<Vector> {
    check_row_stochastic(p)?;
    left_fixed_point(p)
}

/// The power iteration behind [`power_stationary`] without the
/// stochasticity check. The result is normalized to unit sum.
pub fn left_fixed_point(p: &Mat) -> Result<Vector> {
    let n = p.rows();
    if n == 0 || !p.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "left fixed point of a {}x{} matrix",
            p.rows(),
            p.cols()
        )));
    }
    let pt = p.transpose();
    let mut d = Vector::ones(n).scale(1.0 / n as f64);
    let mut next = Vector::zeros(n);
    let stop = STATIONARY_RESIDUAL * 1e-2;
    let mut residual = f64::INFINITY;
    for it in 0..POWER_MAX_ITERS {
        pt.matvec_into(&d, &mut next);
        if it % 16 == 0 {
            residual = norm_inf(&next.sub(&d));
            if residual <= stop {
                break;
            }
        }
        let mut total = 0.0;
        for (a, b) in d.iter_mut().zip(next.iter()) {
            *a = 0.5 * (*a + b);
            total += *a;
        }
        if !(total.is_finite() && total != 0.0) {
            return Err(Error::NoConvergence {
                iterations: it,
                residual,
            });
        }
        d.iter_mut().for_each(|x| *x /= total);
    }
    let residual = left_residual(p, &d);
    if !(residual <= STATIONARY_RESIDUAL) {
        return Err(Error::NoConvergence {
            iterations: POWER_MAX_ITERS,
            residual,
        });
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::max_abs_diff;

    #[test]
    fn swap_chain_is_uniform() {
        let p = Mat::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(max_abs_diff(&power_stationary(&p).unwrap(), &[0.5, 0.5]) < 1e-15);
    }

    #[test]
    fn doubly_stochastic_is_uniform() {
        let p = Mat::from_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        assert!(max_abs_diff(&power_stationary(&p).unwrap(), &[0.5, 0.5]) < 1e-15);
    }

    #[test]
    fn two_state_chain_closed_form() {
        // Stationary law of [[1-a, a], [b, 1-b]] is (b, a) / (a + b).
        let (a, b) = (0.3, 0.1);
        let p = Mat::from_rows(&[[1.0 - a, a], [b, 1.0 - b]]).unwrap();
        let d = power_stationary(&p).unwrap();
        assert!(max_abs_diff(&d, &[b / (a + b), a / (a + b)]) < 1e-11);
    }

    #[test]
    fn periodic_three_cycle() {
        let p = Mat::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).unwrap();
        let d = power_stationary(&p).unwrap();
        assert!(max_abs_diff(&d, &[1.0 / 3.0; 3]) < 1e-12);
    }

    #[test]
    fn rejects_non_stochastic() {
        let p = Mat::from_rows(&[[0.5, 0.6], [0.5, 0.5]]).unwrap();
        assert!(matches!(
            power_stationary(&p),
            Err(Error::NotStochastic { .. })
        ));
        let p = Mat::from_rows(&[[1.5, -0.5], [0.5, 0.5]]).unwrap();
        assert!(matches!(
            power_stationary(&p),
            Err(Error::NotStochastic { .. })
        ));
    }
}
