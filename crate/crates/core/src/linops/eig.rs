use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{Mat, Vector};
use crate::tolerances::SYMMETRY;
use crate::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;
const QR_MAX_ITERS: usize = 60;

fn require_square(a: &Mat) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )))
    }
}

/// All eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi
/// rotations.
pub fn sym_eigenvalues(a: &Mat) -> Result<Vector> {
    require_square(a)?;
    let asym = a.asymmetry();
    if asym > SYMMETRY {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let n = a.rows();
    let mut m = a.plus_transpose().scale(0.5);
    let total: f64 = m.as_slice().iter().map(|x| x * x).sum();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off == 0.0 || off <= 1e-32 * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t =
                    libm::copysign(1.0, theta) / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev.into())
}

/// Smallest and largest eigenvalue of a symmetric matrix.
///
/// Rejects inputs whose asymmetry exceeds [`SYMMETRY`].
pub fn sym_eig_extremes(a: &Mat) -> Result<(f64, f64)> {
    let ev = sym_eigenvalues(a)?;
    match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Err(Error::DimensionMismatch(
            "empty matrix has no eigenvalues".into(),
        )),
    }
}

/// Reduces `a` to upper Hessenberg form by stabilized elementary similarity
/// transforms. Entries below the subdiagonal are zeroed.
fn hessenberg(a: &mut Mat) {
    let n = a.rows();
    for m in 1..n.saturating_sub(1) {
        let mut x: f64 = 0.0;
        let mut piv = m;
        for j in m..n {
            if a[(j, m - 1)].abs() > x.abs() {
                x = a[(j, m - 1)];
                piv = j;
            }
        }
        if piv != m {
            for j in m - 1..n {
                let t = a[(piv, j)];
                a[(piv, j)] = a[(m, j)];
                a[(m, j)] = t;
            }
            for j in 0..n {
                let t = a[(j, piv)];
                a[(j, piv)] = a[(j, m)];
                a[(j, m)] = t;
            }
        }
        if x != 0.0 {
            for i in m + 1..n {
                let mut y = a[(i, m - 1)];
                if y != 0.0 {
                    y /= x;
                    a[(i, m - 1)] = y;
                    for j in m..n {
                        a[(i, j)] -= y * a[(m, j)];
                    }
                    for j in 0..n {
                        a[(j, m)] += y * a[(j, i)];
                    }
                }
            }
        }
    }
    for i in 2..n {
        for j in 0..i - 1 {
            a[(i, j)] = 0.0;
        }
    }
}

/// Eigenvalues of a general real matrix as `(re, im)` pairs, via Hessenberg
/// reduction and Francis double-shift QR. Order is unspecified.
pub fn eigenvalues(a: &Mat) -> Result<Vec<(f64, f64)>> {
    require_square(a)?;
    let n = a.rows();
    let mut h = a.clone();
    hessenberg(&mut h);
    let mut out = vec![(0.0, 0.0); n];
    if n == 0 {
        return Ok(out);
    }

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += h[(i, j)].abs();
        }
    }
    let eps = f64::EPSILON;
    let mut nn = n as isize - 1;
    let mut shift = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let top = nn as usize;
            // Look for a small subdiagonal element to split at.
            let mut l = top;
            while l > 0 {
                let mut s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if h[(l, l - 1)].abs() <= eps * s {
                    h[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = h[(top, top)];
            if l == top {
                out[top] = (x + shift, 0.0);
                nn -= 1;
                break;
            }
            let mut y = h[(top - 1, top - 1)];
            let mut w = h[(top, top - 1)] * h[(top - 1, top)];
            if l + 1 == top {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = libm::sqrt(q.abs());
                x += shift;
                if q >= 0.0 {
                    let z = p + libm::copysign(z, p);
                    out[top - 1] = (x + z, 0.0);
                    out[top] = if z != 0.0 {
                        (x - w / z, 0.0)
                    } else {
                        (x + z, 0.0)
                    };
                } else {
                    out[top] = (x + p, -z);
                    out[top - 1] = (x + p, z);
                }
                nn -= 2;
                break;
            }
            if its == QR_MAX_ITERS {
                return Err(Error::NoConvergence {
                    iterations: its,
                    residual: h[(top, top - 1)].abs(),
                });
            }
            if its == 10 || its == 20 {
                // Exceptional shift.
                shift += x;
                for i in 0..=top {
                    h[(i, i)] -= x;
                }
                let s = h[(top, top - 1)].abs() + h[(top - 1, top - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            let (mut p, mut q, mut r);
            let mut m = top - 2;
            loop {
                let z = h[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - rr - ss;
                r = h[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = h[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m..top - 1 {
                h[(i + 2, i)] = 0.0;
                if i != m {
                    h[(i + 2, i - 1)] = 0.0;
                }
            }
            let mut k = m;
            while k < top {
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if k + 1 != top { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = libm::copysign(libm::sqrt(p * p + q * q + r * r), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            h[(k, k - 1)] = -h[(k, k - 1)];
                        }
                    } else {
                        h[(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=top {
                        let mut pp = h[(k, j)] + q * h[(k + 1, j)];
                        if k + 1 != top {
                            pp += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= pp * z;
                        }
                        h[(k + 1, j)] -= pp * y;
                        h[(k, j)] -= pp * x;
                    }
                    let mmin = if top < k + 3 { top } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * h[(i, k)] + y * h[(i, k + 1)];
                        if k + 1 != top {
                            pp += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= pp * r;
                        }
                        h[(i, k + 1)] -= pp * q;
                        h[(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(out)
}

/// Largest real part over all eigenvalues; negative iff `a` is Hurwitz.
pub fn spectral_abscissa(a: &Mat) -> Result<f64> {
    Ok(eigenvalues(a)?
        .into_iter()
        .map(|(re, _)| re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Largest eigenvalue magnitude.
pub fn spectral_radius(a: &Mat) -> Result<f64> {
    Ok(eigenvalues(a)?
        .into_iter()
        .map(|(re, im)| libm::hypot(re, im))
        .fold(0.0, f64::max))
}
