use num_complex::Complex64;

use super::grid::{ComplexSamples, RealGrid};
use crate::{Error, Result};

/// Treatment of a pole that sits at, or too close to, an end of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PvEndpoint {
    /// Reject poles closer than half a cell to either end.
    Reject,
    /// Accept them, clamping the distances inside the logarithm to half a
    /// cell. Used for collocation at the first and last nodes.
    Clamp,
}

/// Coefficients `c_j` with `PV int f(tau) / (tau - t) dtau ~ sum_j c_j f_j`.
///
/// Subtraction scheme: `int (f - f(t)) / (tau - t) + f(t) ln((b - t)/(t - a))`.
/// If `t` is a node, the removable value there is the mean of the two
/// one-sided difference quotients; otherwise `f(t)` comes from local cubic
/// interpolation.
pub fn pv_row(grid: &RealGrid, t: f64, endpoint: PvEndpoint) -> Result<Vec<f64>> {
    let nodes = grid.nodes();
    let weights = grid.weights();
    let n = nodes.len();
    let (a, b) = (grid.first(), grid.last());
    let half_first = 0.5 * (nodes[1] - nodes[0]);
    let half_last = 0.5 * (nodes[n - 1] - nodes[n - 2]);
    if !t.is_finite() || t < a || t > b {
        return Err(Error::InvalidArgument(format!(
            "principal-value pole {t} lies outside [{a}, {b}]"
        )));
    }
    let (da, db) = match endpoint {
        PvEndpoint::Reject => {
            if t - a < half_first || b - t < half_last {
                return Err(Error::InvalidArgument(format!(
                    "principal-value pole {t} is within half a cell of an endpoint; extend the grid"
                )));
            }
            (t - a, b - t)
        }
        PvEndpoint::Clamp => ((t - a).max(half_first), (b - t).max(half_last)),
    };

    let k = grid.nearest(t);
    let on_node = (t - nodes[k]).abs() <= 1e-12 * t.abs().max(1.0);
    let ft: Vec<(usize, f64)> = if on_node {
        vec![(k, 1.0)]
    } else {
        grid.interpolation_row(t)
    };

    let mut row = vec![0.0; n];
    for j in 0..n {
        if on_node && j == k {
            continue;
        }
        let c = weights[j] / (nodes[j] - t);
        row[j] += c;
        for &(i, l) in &ft {
            row[i] -= c * l;
        }
    }
    if on_node {
        // removable value of (f - f(t)) / (tau - t) at tau = t
        let w = weights[k];
        let mut slopes: Vec<(usize, usize, f64)> = Vec::new();
        if k + 1 < n {
            slopes.push((k + 1, k, nodes[k + 1] - nodes[k]));
        }
        if k > 0 {
            slopes.push((k, k - 1, nodes[k] - nodes[k - 1]));
        }
        let share = w / slopes.len() as f64;
        for (hi, lo, h) in slopes {
            row[hi] += share / h;
            row[lo] -= share / h;
        }
    }
    let log = (db / da).ln();
    for &(i, l) in &ft {
        row[i] += log * l;
    }
    Ok(row)
}

/// Principal value of `int f(tau) / (tau - t) dtau` over the sample grid.
pub fn pv_integrate(f: &ComplexSamples<'_>, t: f64) -> Result<Complex64> {
    let row = pv_row(f.grid, t, PvEndpoint::Reject)?;
    Ok(row.iter().zip(&f.values).map(|(c, v)| v * *c).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn constant_integrand_gives_the_log_term() {
        let g = RealGrid::uniform(0.0, 2.0, 41).unwrap();
        let f = ComplexSamples::from_fn(&g, |_| c(1.0));
        assert!(pv_integrate(&f, 1.0).unwrap().norm() < 1e-14);
        let g = RealGrid::uniform(0.0, 4.0, 41).unwrap();
        let f = ComplexSamples::from_fn(&g, |_| c(1.0));
        assert!((pv_integrate(&f, 1.0).unwrap() - 3f64.ln()).norm() < 1e-13);
    }

    #[test]
    fn linear_integrand() {
        let g = RealGrid::uniform(0.0, 2.0, 41).unwrap();
        let f = ComplexSamples::from_fn(&g, c);
        assert!((pv_integrate(&f, 1.0).unwrap() - 2.0).norm() < 1e-12);
        // pole between nodes
        let t: f64 = 0.8137;
        let exact = 2.0 + t * ((2.0 - t) / t).ln();
        assert!((pv_integrate(&f, t).unwrap() - exact).norm() < 1e-10);
    }

    #[test]
    fn rational_integrand() {
        // PV int_0^2 dtau / ((tau + 1)(tau - 1)) = -ln(3)/2
        let exact = -0.5 * 3f64.ln();
        for g in [
            RealGrid::uniform(0.0, 2.0, 801).unwrap(),
            RealGrid::graded(2.0, 800).unwrap(),
        ] {
            let f = ComplexSamples::from_fn(&g, |x| c(1.0 / (x + 1.0)));
            let v = pv_integrate(&f, 1.0).unwrap();
            assert!((v.re - exact).abs() < 1e-8, "{v}");
        }
    }

    #[test]
    fn endpoint_poles() {
        let g = RealGrid::uniform(0.0, 1.0, 11).unwrap();
        let f = ComplexSamples::from_fn(&g, c);
        assert!(pv_integrate(&f, 1.5).is_err());
        assert!(pv_integrate(&f, 0.01).is_err());
        assert!(pv_integrate(&f, 0.99).is_err());
        assert!(pv_row(&g, 1.0, PvEndpoint::Clamp).is_ok());
    }
}
