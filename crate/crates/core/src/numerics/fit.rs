use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// Least-squares fit of `f(lambda) ~ 1 + c_1/lambda + ... + c_K/lambda^K`.
///
/// Returns `[c_1, ..., c_K]` for `K = order`.
pub fn fit_inverse_powers(samples: &[(Complex64, Complex64)], order: usize) -> Result<Vec<Complex64>> {
    if order < 1 {
        return Err(Error::InvalidArgument("fit order must be at least 1".into()));
    }
    if samples.len() < order.max(4) {
        return Err(Error::FitRejected(format!(
            "{} samples cannot determine {order} coefficients",
            samples.len()
        )));
    }
    if samples.iter().any(|(l, f)| !l.is_finite() || !f.is_finite() || l.norm() == 0.0) {
        return Err(Error::FitRejected("non-finite sample or lambda = 0".into()));
    }
    let m = samples.len();
    let mut a = DMatrix::<Complex64>::zeros(m, order);
    let mut rhs = DVector::<Complex64>::zeros(m);
    for (i, (l, f)) in samples.iter().enumerate() {
        let inv = l.inv();
        let mut p = inv;
        for k in 0..order {
            a[(i, k)] = p;
            p *= inv;
        }
        rhs[i] = f - 1.0;
    }
    // column equilibration keeps high inverse powers from vanishing numerically
    let mut scale = vec![0.0; order];
    for k in 0..order {
        let s = a.column(k).norm();
        if s == 0.0 || !s.is_finite() {
            return Err(Error::FitRejected("degenerate design column".into()));
        }
        scale[k] = s;
        a.column_mut(k).unscale_mut(s);
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-13 * smax) {
        return Err(Error::FitRejected(format!(
            "rank-deficient design (singular values {smin:.3e} / {smax:.3e})"
        )));
    }
    let sol = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::FitRejected(e.to_string()))?;
    Ok((0..order).map(|k| sol[k] / scale[k]).collect())
}
