//! Reflectionless data: `s1 = s2 = 0` with one bound state of each family.
//!
//! With every jump kernel zero the right representation reduces to
//!
//! ```text
//! psi0+(l, x) = 1 + R  (1/(l - mu)^2 + zeta1 e^{-sqrt3 mu x} / (l - mu zeta2)^2)
//!                 + Rh (1/(l - nu)^2 + zeta2 e^{ sqrt3 nu x} / (l - nu zeta1)^2)
//! ```
//!
//! and `R`, `Rh` follow from requiring a vanishing constant Laurent term at
//! `mu` and at `nu`. [`closed_form`] solves that 2x2 system by Cramer's rule.
//! [`closed_form_printed`] evaluates the published closed expressions
//! verbatim; they do not solve the same system and are kept for comparison.

use num_complex::Complex64;

use crate::inverse::{ConversionConstants, RecoveredPotentials};
use crate::jost::Side;
use crate::potential::PotentialPair;
use crate::rootsys::{zeta, SQRT3};
use crate::{Error, Result};

/// Smallest `|Delta|` accepted by the closed forms.
pub const DELTA_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionlessParams {
    pub mu1: f64,
    pub nu1: f64,
}

impl ReflectionlessParams {
    pub fn new(mu1: f64, nu1: f64) -> Result<Self> {
        if !(mu1 > 0.0) || !(nu1 < 0.0) || !mu1.is_finite() || !nu1.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "reflectionless data need mu1 > 0 and nu1 < 0 (got {mu1}, {nu1})"
            )));
        }
        Ok(ReflectionlessParams { mu1, nu1 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub delta: Complex64,
    pub r1: Complex64,
    pub r1hat: Complex64,
}

/// Coefficient matrix `[[a11, a12], [a21, a22]]` of the system
/// `A (R, Rh)^T = (-1, -1)^T`.
pub fn system_matrix(params: &ReflectionlessParams, x: f64) -> [[Complex64; 2]; 2] {
    let (m, v) = (params.mu1, params.nu1);
    let (z1, z2) = (zeta(1), zeta(2));
    let wm = z1 * (-SQRT3 * m * x).exp();
    let wv = z2 * (SQRT3 * v * x).exp();
    let c = |r: f64| Complex64::new(r, 0.0);
    let a11 = wm / (c(m) - m * z2).powi(2);
    let a12 = c((m - v).powi(-2)) + wv / (c(m) - v * z1).powi(2);
    let a21 = c((v - m).powi(-2)) + wm / (c(v) - m * z2).powi(2);
    let a22 = wv / (c(v) - v * z1).powi(2);
    [[a11, a12], [a21, a22]]
}

fn checked(delta: Complex64, x: f64) -> Result<()> {
    if !delta.is_finite() || delta.norm() < DELTA_FLOOR {
        return Err(Error::Inconsistent(format!(
            "degenerate reflectionless configuration at x = {x}: |Delta| = {:.3e}",
            delta.norm()
        )));
    }
    Ok(())
}

/// `(Delta, R1, Rh1)` solving the Laurent-term conditions at `mu1`, `nu1`.
pub fn closed_form(params: &ReflectionlessParams, x: f64) -> Result<ClosedForm> {
    let [[a11, a12], [a21, a22]] = system_matrix(params, x);
    let delta = a11 * a22 - a12 * a21;
    checked(delta, x)?;
    let r1 = (a12 - a22) / delta;
    let r1hat = (a21 - a11) / delta;
    Ok(ClosedForm { delta, r1, r1hat })
}

/// The published closed expressions for `Delta`, `R1`, `Rh1`, evaluated
/// literally.
pub fn closed_form_printed(params: &ReflectionlessParams, x: f64) -> Result<ClosedForm> {
    let (m, v) = (params.mu1, params.nu1);
    let (z1, z2) = (zeta(1), zeta(2));
    let ev = (SQRT3 * v * x).exp();
    let em = (-SQRT3 * m * x).exp();
    let c = |r: f64| Complex64::new(r, 0.0);
    let b1 = c((m + v).powi(-2)) + z2 * ev / (c(m) + v * z2).powi(2);
    let b2 = c((m - v).powi(-2)) + z1 * em / (c(v) + m * z2).powi(2);
    let delta = c((SQRT3 * (v - m) * x).exp() / (m * v)) - b1 * b2;
    checked(delta, x)?;
    let r1 = (ev / (v * z2) - 1.0 / (m + v) - z2 * ev / (c(m) + v * z2).powi(2)) / delta;
    let r1hat = (em / (z1 * m) - (m - v).powi(-2) - z1 * em / (c(v) - m * z2).powi(2)) / delta;
    if !r1.is_finite() || !r1hat.is_finite() {
        return Err(Error::Inconsistent(format!("printed closed form is singular at x = {x}")));
    }
    Ok(ClosedForm { delta, r1, r1hat })
}

/// Largest residual of the two rows `A (R, Rh)^T = (-1, -1)^T`.
pub fn system_residual(params: &ReflectionlessParams, x: f64, cf: &ClosedForm) -> f64 {
    let a = system_matrix(params, x);
    (0..2)
        .map(|i| (a[i][0] * cf.r1 + a[i][1] * cf.r1hat + 1.0).norm())
        .fold(0.0, f64::max)
}

/// `psi0+(lambda, x)` with the coefficients of [`closed_form`].
pub fn psi0_closed(params: &ReflectionlessParams, lambda: Complex64, x: f64) -> Result<Complex64> {
    let (m, v) = (params.mu1, params.nu1);
    let (z1, z2) = (zeta(1), zeta(2));
    for p in [Complex64::new(m, 0.0), m * z2, Complex64::new(v, 0.0), v * z1] {
        if (lambda - p).norm() < crate::inverse::POLE_EXCLUSION {
            return Err(Error::InvalidArgument(format!("lambda = {lambda} is too close to a pole")));
        }
    }
    let cf = closed_form(params, x)?;
    Ok(1.0
        + cf.r1 * ((lambda - m).powi(-2) + z1 * (-SQRT3 * m * x).exp() * (lambda - m * z2).powi(-2))
        + cf.r1hat * ((lambda - v).powi(-2) + z2 * (SQRT3 * v * x).exp() * (lambda - v * z1).powi(-2)))
}

/// `(c1, c2)` of `psi0+ = 1 + c1/lambda + c2/lambda^2 + ...`: every pole term
/// is `O(1/lambda^2)`, so `c1 = 0`.
pub fn expansion(params: &ReflectionlessParams, x: f64) -> Result<(Complex64, Complex64)> {
    let cf = closed_form(params, x)?;
    let wm = zeta(1) * (-SQRT3 * params.mu1 * x).exp();
    let wv = zeta(2) * (SQRT3 * params.nu1 * x).exp();
    Ok((Complex64::new(0.0, 0.0), cf.r1 * (1.0 + wm) + cf.r1hat * (1.0 + wv)))
}

/// Potentials on the right half-axis generated by the reflectionless data,
/// sampled at the uniformly spaced points `xs`.
pub fn reflectionless_potentials(params: &ReflectionlessParams, xs: &[f64]) -> Result<RecoveredPotentials> {
    let conv = ConversionConstants::reference(Side::PlusInfinity);
    let mut big_p = Vec::with_capacity(xs.len());
    let mut big_q = Vec::with_capacity(xs.len());
    for &x in xs {
        let (c1, c2) = expansion(params, x)?;
        let (p, q) = conv.convert(c1, c2);
        big_p.push(p);
        big_q.push(q);
    }
    RecoveredPotentials::from_primitives(Side::PlusInfinity, xs.to_vec(), big_p, big_q)
}

/// Whole-line pair on `[-x_max, x_max]`: the reflectionless potentials on
/// `x >= 0` and zero on `x < 0`.
pub fn reflectionless_pair(params: &ReflectionlessParams, a: f64, x_max: f64, n: usize) -> Result<PotentialPair> {
    let grid = crate::numerics::RealGrid::uniform(-x_max, x_max, n)?;
    let x = grid.nodes().to_vec();
    let i0 = x.iter().position(|&v| v >= -1e-12).unwrap_or(x.len());
    let rec = reflectionless_potentials(params, &x[i0..])?;
    let mut p = vec![0.0; x.len()];
    let mut q = vec![0.0; x.len()];
    p[i0..].copy_from_slice(&rec.p);
    q[i0..].copy_from_slice(&rec.q);
    PotentialPair::new(grid, p, None, q, a)
}
