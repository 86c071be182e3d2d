//! Dense linear algebra and jet-level Newton solves.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::jet::{JetMap, JetPoint};

/// Singular values below `REL_RANK_TOL · σ_max` count as zero.
pub const REL_RANK_TOL: f64 = 1e-7;
/// Singular values below this count as zero regardless of scale.
pub const ABS_RANK_TOL: f64 = 1e-10;

const NEWTON_MAX_ITERS: usize = 60;

/// Jacobian at `x` from first-order pushforwards, one column per input.
pub fn jacobian(f: &dyn JetMap, x: &[f64]) -> Result<DMatrix<f64>> {
    let a = f.arity();
    let b = f.coarity();
    let mut m = DMatrix::zeros(b, a);
    let mut p = JetPoint::from_base(1, x);
    for j in 0..a {
        p.block_mut(1).fill(0.0);
        p.block_mut(1)[j] = 1.0;
        let y = f.eval_jet(&p)?;
        for i in 0..b {
            m[(i, j)] = y.block(1)[i];
        }
    }
    Ok(m)
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn rank_threshold(s: &[f64]) -> f64 {
    let top = s.first().copied().unwrap_or(0.0);
    (REL_RANK_TOL * top).max(ABS_RANK_TOL)
}

pub fn rank(m: &DMatrix<f64>) -> usize {
    let s = singular_values(m);
    let thr = rank_threshold(&s);
    s.iter().filter(|&&v| v > thr).count()
}

/// Orthonormal basis of the kernel, as columns.
pub fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    // Pad to at least n rows so the SVD returns a full V.
    let rows = m.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    let top = s.iter().fold(0.0f64, |a, &b| a.max(b));
    let thr = (REL_RANK_TOL * top).max(ABS_RANK_TOL);
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| s[i] <= thr)
        .map(|i| v_t.row(i).transpose().into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Minimum-norm least-squares solution of `m · x = r`.
pub fn lstsq(m: &DMatrix<f64>, r: &[f64]) -> Vec<f64> {
    if m.ncols() == 0 {
        return Vec::new();
    }
    let svd = m.clone().svd(true, true);
    let top = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let eps = (1e-12 * top).max(1e-14);
    let b = DVector::from_column_slice(r);
    match svd.solve(&b, eps) {
        Ok(x) => x.iter().copied().collect(),
        Err(_) => vec![0.0; m.ncols()],
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn residual(f: &dyn JetMap, x: &[f64], t: &[f64]) -> Option<Vec<f64>> {
    let y = f.eval(x).ok()?;
    let r: Vec<f64> = y.iter().zip(t).map(|(a, b)| a - b).collect();
    r.iter().all(|v| v.is_finite()).then_some(r)
}

/// Gauss–Newton with minimum-norm steps for `f(x) = t`, starting at `x0`.
pub fn solve_base(f: &dyn JetMap, t: &[f64], x0: &[f64]) -> Result<Vec<f64>> {
    let tol = 1e-11 * (1.0 + max_abs(t));
    let mut x = x0.to_vec();
    let mut r = residual(f, &x, t).ok_or(Error::NewtonDiverged { residual: f64::INFINITY })?;
    let mut rn = max_abs(&r);
    for _ in 0..NEWTON_MAX_ITERS {
        if rn <= tol {
            return Ok(x);
        }
        let j = jacobian(f, &x)?;
        let step = lstsq(&j, &r);
        let mut alpha = 1.0;
        loop {
            let xn: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a - alpha * s).collect();
            if let Some(rr) = residual(f, &xn, t) {
                let rrn = max_abs(&rr);
                if rrn < rn {
                    x = xn;
                    r = rr;
                    rn = rrn;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-6 {
                return Err(Error::NewtonDiverged { residual: rn });
            }
        }
    }
    if rn <= tol {
        Ok(x)
    } else {
        Err(Error::NewtonDiverged { residual: rn })
    }
}

/// Solve `T^n(f)(X) = target` for `X`, with the base point found from `x0`
/// by Gauss–Newton and the tangent blocks by chord sweeps with the
/// pseudo-inverse of `Df` at the base. Fails when any block cannot be
/// matched (the target is not in the image to the given order).
pub fn solve_jet(f: &dyn JetMap, target: &JetPoint, x0: &[f64]) -> Result<JetPoint> {
    let n = target.order();
    let base = solve_base(f, target.base(), x0)?;
    let mut x = JetPoint::from_base(n, &base);
    if n == 0 {
        return Ok(x);
    }
    let j0 = jacobian(f, &base)?;
    for _ in 0..=n {
        let y = f.eval_jet(&x)?;
        for s in 1..x.blocks() {
            let r: Vec<f64> = y.block(s).iter().zip(target.block(s)).map(|(a, b)| a - b).collect();
            let d = lstsq(&j0, &r);
            for (xi, di) in x.block_mut(s).iter_mut().zip(d) {
                *xi -= di;
            }
        }
    }
    let y = f.eval_jet(&x)?;
    let err = y.flat().iter().zip(target.flat()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if err > 1e-9 * (1.0 + target.norm_inf()) {
        return Err(Error::NewtonDiverged { residual: err });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_map;

    #[test]
    fn rank_and_kernel() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(rank(&m), 2);
        let k = null_space(&m);
        assert_eq!(k.ncols(), 1);
        assert!((k[(2, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverts_cube_to_second_order() {
        // f(x) = x^3 + x is invertible; recover X from T²f(X).
        let f = parse_map("x0^3 + x0", 1).unwrap();
        let x = JetPoint::new(2, 1, vec![0.7, 0.3, -1.1, 0.4]).unwrap();
        let y = JetMap::eval_jet(&f, &x).unwrap();
        let back = solve_jet(&f, &y, &[0.0]).unwrap();
        for (a, b) in back.flat().iter().zip(x.flat()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn reports_targets_off_the_image() {
        let f = parse_map("x0, x0^2", 1).unwrap();
        assert!(solve_base(&f, &[1.0, 3.0], &[0.5]).is_err());
    }
}
