//! Small dense linear-algebra helpers for the stationary-state solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value threshold below which a direction counts as a zero
/// mode of a real matrix.
pub const KERNEL_REL_TOL: f64 = 1e-8;

/// Number of singular values of `a` below `rel_tol * sigma_max`. A zero
/// matrix reports full dimension.
pub fn null_space_dimension(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = a.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return a.ncols();
    }
    sv.iter().filter(|&&s| s < rel_tol * smax).count()
}

/// Extracts the unique null direction of a square real matrix.
///
/// Returns the unit right-singular vector of the smallest singular value,
/// polished by two inverse-iteration steps on A^T A + delta I so the result
/// stays accurate even when the smallest nonzero singular value is many
/// orders below the largest. Errors when the number of singular values under
/// `rel_tol * sigma_max` is not exactly one.
pub fn null_vector(a: &DMatrix<f64>, rel_tol: f64) -> Result<DVector<f64>> {
    let n = a.ncols();
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Err(Error::AmbiguousKernel { dim: n });
    }
    let zeros = sv.iter().filter(|&&s| s < rel_tol * smax).count();
    if zeros != 1 {
        return Err(Error::AmbiguousKernel { dim: zeros });
    }
    let v_t = svd.v_t.as_ref().expect("svd requested v_t");
    let (k, _) = sv
        .iter()
        .enumerate()
        .min_by(|(_, x), (_, y)| x.partial_cmp(y).unwrap())
        .unwrap();
    let mut v: DVector<f64> = v_t.row(k).transpose();

    // Inverse iteration on the normal matrix sharpens the null direction;
    // the shift keeps the factorization well posed.
    let ata = a.transpose() * a;
    let delta = (f64::EPSILON * smax).powi(2);
    let shifted = &ata + DMatrix::<f64>::identity(n, n) * delta;
    if let Some(chol) = shifted.clone().cholesky() {
        for _ in 0..2 {
            let w = chol.solve(&v);
            let nw = w.norm();
            if !nw.is_finite() || nw == 0.0 {
                break;
            }
            v = w / nw;
        }
    }
    Ok(v)
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&u, &v)| (u - mx) * (v - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
