//! From the sectorial functions back to the potentials.
//!
//! Along a ray inside the holomorphy sector the solution behaves as
//! `1 + c1/lambda + c2/lambda^2 + ...`. With `P = int_x^inf p`,
//! `Q = -int_x^inf (p' + i q)` on the right and `P = int_-inf^x p`,
//! `Q = int_-inf^x (p' + i q)` on the left, the leading coefficients of the
//! conjugated functions `psi0+`, `phi0+` satisfy
//!
//! ```text
//! P = kappa_p c1,    conj(Q) = kappa_q (c2 - c1^2 / 2)
//! ```
//!
//! The constants are fixed by [`calibrate_constants`] against directly
//! integrated Jost solutions; [`ConversionConstants::reference`] holds the
//! calibrated values.

use num_complex::Complex64;
use rayon::prelude::*;

use super::kernels::JumpKernels;
use super::marchenko::{eval_phi0, eval_psi0, MarchenkoUnknowns};
use crate::jost::Side;
use crate::numerics::fit_inverse_powers;
use crate::oracle::{ode_normalized_at, OdeOptions};
use crate::potential::PotentialSource;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionConstants {
    pub kappa_p: Complex64,
    pub kappa_q: Complex64,
}

impl ConversionConstants {
    /// Calibrated constants for the given side.
    pub fn reference(side: Side) -> Self {
        let kp = match side {
            Side::PlusInfinity => -1.5,
            Side::MinusInfinity => 1.5,
        };
        ConversionConstants {
            kappa_p: Complex64::new(0.0, kp),
            kappa_q: Complex64::new(3.0, 0.0),
        }
    }

    pub fn convert(&self, c1: Complex64, c2: Complex64) -> (Complex64, Complex64) {
        let big_p = self.kappa_p * c1;
        let big_q = (self.kappa_q * (c2 - 0.5 * c1 * c1)).conj();
        (big_p, big_q)
    }
}

/// Sampling ray and fit order for the `1/lambda` expansion.
///
/// The ray is `rho e^{i angle}` for the right problem and its mirror
/// `rho e^{-i angle}` for the left one; `rho` runs geometrically over
/// `[rho_min, rho_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub angle: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub count: usize,
    pub order: usize,
    /// Largest accepted relative residual of the fit.
    pub max_residual: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            angle: std::f64::consts::FRAC_PI_2,
            rho_min: 10.0,
            rho_max: 400.0,
            count: 24,
            order: 8,
            max_residual: 1e-6,
        }
    }
}

impl FitOptions {
    pub fn lambdas(&self, side: Side) -> Vec<Complex64> {
        let s = match side {
            Side::PlusInfinity => 1.0,
            Side::MinusInfinity => -1.0,
        };
        let ratio = self.rho_max / self.rho_min;
        (0..self.count)
            .map(|j| {
                let t = j as f64 / (self.count.max(2) - 1) as f64;
                Complex64::from_polar(self.rho_min * ratio.powf(t), s * self.angle)
            })
            .collect()
    }
}

/// Fits `f ~ 1 + c1/lambda + ...` on the sampling ray and returns `(c1, c2)`.
pub fn fit_leading(
    f: impl Fn(Complex64) -> Result<Complex64>,
    side: Side,
    fit: &FitOptions,
) -> Result<(Complex64, Complex64)> {
    if !(fit.rho_min > 0.0) || !(fit.rho_max > fit.rho_min * 10.0) {
        return Err(Error::InvalidArgument(
            "fit radii must be positive and span at least one decade".into(),
        ));
    }
    let samples = fit
        .lambdas(side)
        .into_iter()
        .map(|l| Ok((l, f(l)?)))
        .collect::<Result<Vec<_>>>()?;
    let c = fit_inverse_powers(&samples, fit.order)?;
    let mut worst: f64 = 0.0;
    for (l, v) in &samples {
        let mut model = Complex64::new(1.0, 0.0);
        let mut p = Complex64::new(1.0, 0.0);
        for ck in &c {
            p /= l;
            model += ck * p;
        }
        worst = worst.max((model - v).norm() / v.norm().max(1.0));
    }
    if !(worst <= fit.max_residual) {
        return Err(Error::FitRejected(format!(
            "fit residual {worst:.2e} exceeds {:.1e}; move the ray away from the sector boundary or refine the grid",
            fit.max_residual
        )));
    }
    Ok((c[0], c[1]))
}

/// Derivative of samples on a uniform grid: five-point centred differences
/// inside, five-point one-sided differences at the two ends nearest each
/// boundary.
pub fn differentiate(x: &[f64], f: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = x.len();
    if n < 5 || f.len() != n {
        return Err(Error::InvalidArgument("differentiation needs at least 5 matching samples".into()));
    }
    let h = (x[n - 1] - x[0]) / (n - 1) as f64;
    if x.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1e-300)) || h <= 0.0 {
        return Err(Error::InvalidArgument("differentiation needs an increasing uniform grid".into()));
    }
    let fwd = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let skew = [-3.0, -10.0, 18.0, -6.0, 1.0];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        d[i] = if i >= 2 && i + 2 < n {
            (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h)
        } else if i == 0 {
            (0..5).map(|k| fwd[k] * f[k]).sum::<Complex64>() / (12.0 * h)
        } else if i == 1 {
            (0..5).map(|k| skew[k] * f[k]).sum::<Complex64>() / (12.0 * h)
        } else if i == n - 1 {
            -(0..5).map(|k| fwd[k] * f[n - 1 - k]).sum::<Complex64>() / (12.0 * h)
        } else {
            -(0..5).map(|k| skew[k] * f[n - 1 - k]).sum::<Complex64>() / (12.0 * h)
        };
    }
    Ok(d)
}

/// Potentials recovered on a half-axis.
#[derive(Debug, Clone)]
pub struct RecoveredPotentials {
    pub side: Side,
    pub x: Vec<f64>,
    pub big_p: Vec<Complex64>,
    pub big_q: Vec<Complex64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Largest imaginary part met when reading off `p`.
    pub p_imag_max: f64,
}

impl RecoveredPotentials {
    /// Differentiates the primitives `P`, `Q` sampled on a uniform grid.
    pub fn from_primitives(side: Side, x: Vec<f64>, big_p: Vec<Complex64>, big_q: Vec<Complex64>) -> Result<Self> {
        let dp = differentiate(&x, &big_p)?;
        let dq = differentiate(&x, &big_q)?;
        let sign = match side {
            Side::PlusInfinity => -1.0,
            Side::MinusInfinity => 1.0,
        };
        let p_c: Vec<Complex64> = dp.iter().map(|v| sign * v).collect();
        let p_imag_max = p_c.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        Ok(RecoveredPotentials {
            side,
            p: p_c.iter().map(|v| v.re).collect(),
            q: dq.iter().map(|v| v.im).collect(),
            x,
            big_p,
            big_q,
            p_imag_max,
        })
    }
}

fn recover(
    side: Side,
    sols: &[(MarchenkoUnknowns, JumpKernels)],
    fit: &FitOptions,
    constants: &ConversionConstants,
) -> Result<RecoveredPotentials> {
    let prims = sols
        .par_iter()
        .map(|(sol, kern)| {
            let (c1, c2) = match side {
                Side::PlusInfinity => fit_leading(|l| eval_psi0(sol, kern, l), side, fit)?,
                Side::MinusInfinity => fit_leading(|l| eval_phi0(sol, kern, l), side, fit)?,
            };
            Ok(constants.convert(c1, c2))
        })
        .collect::<Result<Vec<_>>>()?;
    let x = sols.iter().map(|(s, _)| s.x).collect();
    let (big_p, big_q) = prims.into_iter().unzip();
    RecoveredPotentials::from_primitives(side, x, big_p, big_q)
}

/// `p`, `q` on the right half-axis from solved right systems at increasing,
/// uniformly spaced `x`.
pub fn recover_right(
    sols: &[(MarchenkoUnknowns, JumpKernels)],
    fit: &FitOptions,
    constants: &ConversionConstants,
) -> Result<RecoveredPotentials> {
    if sols.iter().any(|(s, _)| s.side != Side::PlusInfinity) {
        return Err(Error::InvalidArgument("recover_right needs right-side solutions".into()));
    }
    recover(Side::PlusInfinity, sols, fit, constants)
}

/// `p`, `q` on the left half-axis from solved dual systems.
pub fn recover_left(
    sols: &[(MarchenkoUnknowns, JumpKernels)],
    fit: &FitOptions,
    constants: &ConversionConstants,
) -> Result<RecoveredPotentials> {
    if sols.iter().any(|(s, _)| s.side != Side::MinusInfinity) {
        return Err(Error::InvalidArgument("recover_left needs left-side solutions".into()));
    }
    recover(Side::MinusInfinity, sols, fit, constants)
}

/// Outcome of a calibration run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub constants: ConversionConstants,
    /// Largest relative deviation of the per-`x` ratios from the fitted
    /// constants.
    pub spread_p: f64,
    pub spread_q: f64,
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Exact primitives `(P, Q)` of `source` at `x`, with `support` enclosing
/// everything that is not negligible.
pub fn primitives(source: &dyn PotentialSource, side: Side, support: (f64, f64), x: f64) -> (Complex64, Complex64) {
    let n = 4000;
    let (p, _, _) = source.eval(x);
    match side {
        Side::PlusInfinity => {
            let pi = simpson(|t| source.eval(t).0, x, support.1.max(x), n);
            let qi = simpson(|t| source.eval(t).2, x, support.1.max(x), n);
            (Complex64::new(pi, 0.0), Complex64::new(p, -qi))
        }
        Side::MinusInfinity => {
            let pi = simpson(|t| source.eval(t).0, support.0.min(x), x, n);
            let qi = simpson(|t| source.eval(t).2, support.0.min(x), x, n);
            (Complex64::new(pi, 0.0), Complex64::new(p, qi))
        }
    }
}

/// Fits the conversion constants from directly integrated Jost solutions of
/// `source` at the points `xs`. `support` bounds the region where the
/// potentials are not negligible.
pub fn calibrate_constants(
    source: &dyn PotentialSource,
    side: Side,
    support: (f64, f64),
    xs: &[f64],
    fit: &FitOptions,
    ode: &OdeOptions,
) -> Result<Calibration> {
    let rows = xs
        .par_iter()
        .map(|&x| {
            let start = match side {
                Side::PlusInfinity => support.1.max(x),
                Side::MinusInfinity => support.0.min(x),
            };
            let f = |l: Complex64| -> Result<Complex64> {
                let v = ode_normalized_at(l.conj(), 0, source, side, start, x, 1e-3, ode)?;
                Ok(v[0].conj())
            };
            let (c1, c2) = fit_leading(f, side, fit)?;
            let (big_p, big_q) = primitives(source, side, support, x);
            Ok((c1, c2 - 0.5 * c1 * c1, big_p, big_q.conj()))
        })
        .collect::<Result<Vec<_>>>()?;
    let ls = |pairs: &[(Complex64, Complex64)]| -> Result<(Complex64, f64)> {
        let den: f64 = pairs.iter().map(|(c, _)| c.norm_sqr()).sum();
        if den == 0.0 {
            return Err(Error::FitRejected("calibration potential gives vanishing coefficients".into()));
        }
        let k = pairs.iter().map(|(c, t)| c.conj() * t).sum::<Complex64>() / den;
        let scale = pairs.iter().map(|(_, t)| t.norm()).fold(0.0, f64::max);
        let spread = pairs
            .iter()
            .map(|(c, t)| (k * c - t).norm() / scale)
            .fold(0.0, f64::max);
        Ok((k, spread))
    };
    let (kappa_p, spread_p) = ls(&rows.iter().map(|r| (r.0, r.2)).collect::<Vec<_>>())?;
    let (kappa_q, spread_q) = ls(&rows.iter().map(|r| (r.1, r.3)).collect::<Vec<_>>())?;
    Ok(Calibration {
        constants: ConversionConstants { kappa_p, kappa_q },
        spread_p,
        spread_q,
    })
}
