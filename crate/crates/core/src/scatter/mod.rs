//! Transition matrix, scattering coefficients and bound states.
//!
//! The transition matrix links the two Jost bases: `u_k = sum_l t_{k,l} v_l`.
//! It is computed from the 3x3 systems `U = T V` built from
//! `[f, f', f'']` at a node, so it inherits `det T = 1` from the equal
//! Wronskians of both bases. With `Kbar` the permutation-type matrix with
//! entries `Kbar_00 = 1`, `Kbar_12 = zeta_2`, `Kbar_21 = zeta_1`, real
//! `lambda` gives `T Kbar T^H = Kbar`, and for every `lambda`
//! `T^{-1}(lambda) = Kbar T(conj lambda)^H Kbar`.

mod bound;

pub use bound::{
    locate_bound_states, BoundPoint, BoundStateOptions, BoundStateReport, BoundStateSet, PointKind,
};

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::jost::{JostBundle, Side};
use crate::rootsys::zeta;
use crate::{Error, Result};

/// `f' g - g' f` from values and first derivatives.
pub fn wronskian(f: (Complex64, Complex64), g: (Complex64, Complex64)) -> Complex64 {
    f.1 * g.0 - g.1 * f.0
}

/// Smallest `|lambda|` accepted by [`transition_matrix`].
pub const LAMBDA_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub lambda: Complex64,
    pub t: Matrix3<Complex64>,
    /// Largest relative difference between the matrices assembled at the
    /// three check nodes.
    pub x_spread: f64,
}

fn kbar() -> Matrix3<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    Matrix3::new(one, z, z, z, z, zeta(2), z, zeta(1), z)
}

fn frame(b: &JostBundle, i: usize) -> Matrix3<Complex64> {
    let mut m = Matrix3::zeros();
    for k in 0..3 {
        let c = b.column(k, i);
        for d in 0..3 {
            m[(k, d)] = c[d];
        }
    }
    m
}

fn rel_diff(a: &Matrix3<Complex64>, b: &Matrix3<Complex64>) -> f64 {
    let num = (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let den = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    num / den.max(1e-300)
}

impl TransitionMatrix {
    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.t[(k, l)]
    }

    pub fn det(&self) -> Complex64 {
        self.t.determinant()
    }

    /// The cube root of unity closest to `det T`, with the distance to it.
    pub fn det_class(&self) -> (usize, f64) {
        let d = self.det();
        (0..3)
            .map(|p| (p, (d - zeta(p)).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap()
    }

    /// The dual transition matrix, the inverse of `T`.
    pub fn dual(&self) -> Result<TransitionMatrix> {
        let inv = self
            .t
            .try_inverse()
            .ok_or_else(|| Error::Inconsistent("transition matrix is singular".into()))?;
        Ok(TransitionMatrix {
            lambda: self.lambda,
            t: inv,
            x_spread: self.x_spread,
        })
    }

    /// Largest entry of `T Kbar T^H - Kbar` (meaningful for real `lambda`).
    pub fn unitarity_residual(&self) -> f64 {
        let k = kbar();
        let r = self.t * k * self.t.adjoint() - k;
        r.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `T^{-1} - Kbar T(conj lambda)^H Kbar`, given the
    /// matrix at the conjugate point.
    pub fn reflection_residual(&self, conjugate: &TransitionMatrix) -> Result<f64> {
        let k = kbar();
        let inv = self.dual()?.t;
        let r = inv - k * conjugate.t.adjoint() * k;
        Ok(r.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }

    /// Residual of the matrix relation in its originally printed form,
    /// `zeta_p J = T J T^H` with `J = diag(1, zeta_1, zeta_2)` and
    /// `det T = conj(zeta_p)`. Reported for comparison only; the relation
    /// that actually holds is [`TransitionMatrix::unitarity_residual`].
    pub fn printed_j_relation_residual(&self) -> f64 {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let j = Matrix3::new(one, z, z, z, zeta(1), z, z, z, zeta(2));
        let zp = zeta(self.det_class().0).conj();
        let r = j * zp - self.t * j * self.t.adjoint();
        r.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `T(lambda)` from a left and a right bundle at the same `lambda`.
///
/// Assembled at `x = 0` and checked at two more nodes; `x_spread` records
/// the disagreement.
pub fn transition_matrix(left: &JostBundle, right: &JostBundle) -> Result<TransitionMatrix> {
    let lambda = right.lambda();
    if lambda.norm() < LAMBDA_FLOOR {
        return Err(Error::InvalidArgument(format!(
            "|lambda| = {:.3e} is below the floor {LAMBDA_FLOOR:e}",
            lambda.norm()
        )));
    }
    if left.lambda() != lambda || left.side() != Side::MinusInfinity || right.side() != Side::PlusInfinity {
        return Err(Error::InvalidArgument(
            "transition matrix needs a left and a right bundle at the same lambda".into(),
        ));
    }
    if left.x().len() != right.x().len() {
        return Err(Error::InvalidArgument("bundles live on different grids".into()));
    }
    let grid = right.grid();
    let i0 = grid.nearest(0.0);
    let step = (grid.len() / 64).max(1);
    let checks = [i0, i0.saturating_sub(step), (i0 + step).min(grid.len() - 1)];
    let mut mats = Vec::with_capacity(3);
    for &i in &checks {
        let u = frame(left, i);
        let v = frame(right, i);
        let vinv = v
            .try_inverse()
            .ok_or_else(|| Error::Inconsistent("right Jost frame is singular".into()))?;
        mats.push(u * vinv);
    }
    let x_spread = rel_diff(&mats[0], &mats[1]).max(rel_diff(&mats[0], &mats[2]));
    if mats[0].iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence(format!("non-finite transition matrix at lambda = {lambda}")));
    }
    Ok(TransitionMatrix {
        lambda,
        t: mats[0],
        x_spread,
    })
}

/// `r_0 = 1/t_00`, `s_l = t_0l / t_00` and the same ratios for the dual matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringCoeffs {
    pub lambda: Complex64,
    pub r0: Complex64,
    pub s1: Complex64,
    pub s2: Complex64,
    pub r0_dual: Complex64,
    pub s1_dual: Complex64,
    pub s2_dual: Complex64,
}

/// Threshold on `|t_00|` (and its dual) below which `lambda` counts as a
/// bound state.
pub const T00_FLOOR: f64 = 1e-12;

pub fn scattering_coefficients(t: &TransitionMatrix) -> Result<ScatteringCoeffs> {
    let t00 = t.get(0, 0);
    if t00.norm() <= T00_FLOOR {
        return Err(Error::NearBoundState(t00.norm()));
    }
    let d = t.dual()?;
    let d00 = d.get(0, 0);
    if d00.norm() <= T00_FLOOR {
        return Err(Error::NearBoundState(d00.norm()));
    }
    Ok(ScatteringCoeffs {
        lambda: t.lambda,
        r0: t00.inv(),
        s1: t.get(0, 1) / t00,
        s2: t.get(0, 2) / t00,
        r0_dual: d00.inv(),
        s1_dual: d.get(0, 1) / d00,
        s2_dual: d.get(0, 2) / d00,
    })
}

impl ScatteringCoeffs {
    /// `|r0|^2 - 1 - zeta_2 s1 conj(s2) - zeta_1 s2 conj(s1)`, zero on the
    /// real axis.
    pub fn unitarity_residual(&self) -> f64 {
        scalar_unitarity(self.r0, self.s1, self.s2)
    }

    /// The same identity for the dual coefficients.
    pub fn dual_unitarity_residual(&self) -> f64 {
        scalar_unitarity(self.r0_dual, self.s1_dual, self.s2_dual)
    }

    /// The identity in its printed form
    /// `zeta_p |r0|^2 - 1 - zeta_1 |s1|^2 - zeta_2 |s2|^2` for the given
    /// determinant class `p`. Reported for comparison only.
    pub fn printed_unitarity_residual(&self, p: usize) -> f64 {
        (zeta(p) * self.r0.norm_sqr() - 1.0 - zeta(1) * self.s1.norm_sqr() - zeta(2) * self.s2.norm_sqr())
            .norm()
    }

    /// Printed dual form, same pattern with the dual coefficients.
    pub fn printed_dual_unitarity_residual(&self, p: usize) -> f64 {
        (zeta(p) * self.r0_dual.norm_sqr()
            - 1.0
            - zeta(1) * self.s1_dual.norm_sqr()
            - zeta(2) * self.s2_dual.norm_sqr())
        .norm()
    }
}

fn scalar_unitarity(r0: Complex64, s1: Complex64, s2: Complex64) -> f64 {
    let rhs = 1.0 + zeta(2) * s1 * s2.conj() + zeta(1) * s2 * s1.conj();
    (r0.norm_sqr() - rhs).norm() / r0.norm_sqr().max(1.0)
}
