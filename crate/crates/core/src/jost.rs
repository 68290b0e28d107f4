//! Jost solutions from their Volterra integral equations.
//!
//! The first-order form of the spectral problem is
//!
//! ```text
//! y''' = i lambda^3 y + w,    w = 2 p y' + (p' - i q) y.
//! ```
//!
//! With `G(y) = s_2(-i lambda y) / (-i lambda)^2` the right Jost solutions
//! satisfy `v_k = exp(-i lambda zeta_k x) - int_x^inf G(x - t) w_k(t) dt` and
//! the left ones `u_k = exp(-i lambda zeta_k x) + int_-inf^x G(x - t) w_k(t) dt`.
//!
//! Everything is solved in normalised form: with `E_k = exp(-i lambda zeta_k x)`
//! the unknowns are `psi = v/E_k`, `D1 = v'/E_k`, `D2 = v''/E_k`,
//! `omega = w/E_k`, whose kernels stay bounded in the sector where `E_k` is
//! the dominant exponential. Because the kernel vanishes on the diagonal the
//! discretised system is strictly triangular; forward substitution solves it
//! exactly (it is the sum of the nilpotent Neumann series). Plain Neumann
//! iteration is available for comparison.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::numerics::ComplexSamples;
use crate::numerics::RealGrid;
use crate::potential::PotentialPair;
use crate::rootsys::{sp_eval_stable, zeta, zeta_inv_pow};
use crate::{Error, Result};

/// Which end of the line the Jost solutions are normalised at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `v_k`, exponential behaviour as `x -> +inf`.
    PlusInfinity,
    /// `u_k`, exponential behaviour as `x -> -inf`.
    MinusInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolterraMethod {
    /// Exact solution of the discrete triangular system.
    Substitution,
    /// Successive approximations, stopped when the sup-norm increment drops
    /// below `tol * (1 + ||g||)` or after `max_iter` sweeps.
    Neumann { tol: f64, max_iter: usize },
}

impl VolterraMethod {
    pub fn neumann_default() -> Self {
        VolterraMethod::Neumann {
            tol: 1e-12,
            max_iter: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JostOptions {
    pub method: VolterraMethod,
    /// Largest accepted relative residual of the discrete integral equation.
    pub residual_tol: f64,
}

impl Default for JostOptions {
    fn default() -> Self {
        JostOptions {
            method: VolterraMethod::Substitution,
            residual_tol: 1e-8,
        }
    }
}

/// Convergence information for one Volterra solve.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraDiagnostics {
    /// `m(lambda, x) = |p'| + |q| + 2 |lambda| |p|` on the grid.
    pub m_profile: Vec<f64>,
    /// `c(lambda) = ||p' + i q||_1 / |lambda|^2 + 2 ||p||_1 / |lambda|`.
    pub c_lambda: f64,
    /// `M(lambda) = e^{c(lambda)} || e^{2 |lambda| t} m(lambda, t) ||_1`.
    pub m_lambda: f64,
    pub iterations: usize,
    /// Relative sup-norm residual of the discrete equation for `omega`.
    pub final_residual: f64,
    /// Sup norms of `w^{(n)} - w^{(n-1)}` for Neumann sweeps (empty for
    /// substitution).
    pub increments: Vec<f64>,
}

/// The three Jost solutions at one `lambda`, stored in normalised form.
#[derive(Debug, Clone)]
pub struct JostBundle {
    lambda: Complex64,
    side: Side,
    grid: RealGrid,
    psi: [Vec<Complex64>; 3],
    dpsi: [Vec<Complex64>; 3],
    ddpsi: [Vec<Complex64>; 3],
    omega: [Vec<Complex64>; 3],
    diagnostics: [VolterraDiagnostics; 3],
}

impl JostBundle {
    /// Assembles a bundle from normalised values computed elsewhere (the ODE
    /// oracle). `omega` is rebuilt from the potentials.
    pub(crate) fn from_normalized(
        lambda: Complex64,
        side: Side,
        pot: &PotentialPair,
        psi: [Vec<Complex64>; 3],
        dpsi: [Vec<Complex64>; 3],
        ddpsi: [Vec<Complex64>; 3],
    ) -> JostBundle {
        let n = pot.x().len();
        let omega = [0, 1, 2].map(|k| {
            (0..n)
                .map(|i| {
                    2.0 * pot.p()[i] * dpsi[k][i]
                        + Complex64::new(pot.dp()[i], -pot.q()[i]) * psi[k][i]
                })
                .collect()
        });
        JostBundle {
            lambda,
            side,
            grid: pot.grid().clone(),
            psi,
            dpsi,
            ddpsi,
            omega,
            diagnostics: Default::default(),
        }
    }

    /// Replaces the normalised values of solution `k`, leaving derivatives
    /// untouched. Meant for validation harnesses.
    pub fn with_normalized_values(mut self, k: usize, psi: Vec<Complex64>) -> JostBundle {
        assert_eq!(psi.len(), self.psi[k].len());
        self.psi[k] = psi;
        self
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn grid(&self) -> &RealGrid {
        &self.grid
    }

    pub fn x(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn diagnostics(&self, k: usize) -> &VolterraDiagnostics {
        &self.diagnostics[k]
    }

    fn carrier(&self, k: usize, i: usize) -> Complex64 {
        (-Complex64::i() * self.lambda * zeta(k) * self.grid.nodes()[i]).exp()
    }

    /// `psi_k(x_i)` (right) or `phi_k(x_i)` (left): the solution divided by
    /// `exp(-i lambda zeta_k x)`.
    pub fn normalized(&self, k: usize) -> &[Complex64] {
        &self.psi[k]
    }

    /// First and second derivatives divided by `exp(-i lambda zeta_k x)`.
    pub fn normalized_derivatives(&self, k: usize) -> (&[Complex64], &[Complex64]) {
        (&self.dpsi[k], &self.ddpsi[k])
    }

    pub fn val(&self, k: usize, i: usize) -> Complex64 {
        self.psi[k][i] * self.carrier(k, i)
    }

    pub fn d1(&self, k: usize, i: usize) -> Complex64 {
        self.dpsi[k][i] * self.carrier(k, i)
    }

    pub fn d2(&self, k: usize, i: usize) -> Complex64 {
        self.ddpsi[k][i] * self.carrier(k, i)
    }

    pub fn w(&self, k: usize, i: usize) -> Complex64 {
        self.omega[k][i] * self.carrier(k, i)
    }

    /// `[f, f', f'']` of solution `k` at node `i`.
    pub fn column(&self, k: usize, i: usize) -> [Complex64; 3] {
        let e = self.carrier(k, i);
        [self.psi[k][i] * e, self.dpsi[k][i] * e, self.ddpsi[k][i] * e]
    }

    pub fn val_samples(&self, k: usize) -> ComplexSamples<'_> {
        ComplexSamples::from_fn_indexed(&self.grid, |i| self.val(k, i))
    }

    pub fn d1_samples(&self, k: usize) -> ComplexSamples<'_> {
        ComplexSamples::from_fn_indexed(&self.grid, |i| self.d1(k, i))
    }

    pub fn d2_samples(&self, k: usize) -> ComplexSamples<'_> {
        ComplexSamples::from_fn_indexed(&self.grid, |i| self.d2(k, i))
    }

    pub fn w_samples(&self, k: usize) -> ComplexSamples<'_> {
        ComplexSamples::from_fn_indexed(&self.grid, |i| self.w(k, i))
    }

    /// `psi_k` / `phi_k` as samples.
    pub fn normalize(&self) -> [ComplexSamples<'_>; 3] {
        [0, 1, 2].map(|k| ComplexSamples {
            grid: &self.grid,
            values: self.psi[k].clone(),
        })
    }
}

/// Kernel tables for offsets `m = 0, 1, ...` along the solve direction.
struct KernelTable {
    k2: Vec<Complex64>,
    k1: Vec<Complex64>,
    k0: Vec<Complex64>,
}

/// `S_p(y) = exp(i lambda zeta_k y) s_p(-i lambda y)`.
fn shifted_sp(p: usize, lambda: Complex64, k: usize, y: f64) -> Complex64 {
    let i = Complex64::i();
    let z = -i * lambda * y;
    if z.norm() < 1.0 {
        (i * lambda * zeta(k) * y).exp() * sp_eval_stable(p, z)
    } else {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..3 {
            acc += zeta_inv_pow(l, p) * (-i * lambda * (zeta(l) - zeta(k)) * y).exp();
        }
        acc / 3.0
    }
}

fn kernel_table(lambda: Complex64, k: usize, h: f64, len: usize, dir: f64) -> KernelTable {
    let mil = -Complex64::i() * lambda;
    let mut t = KernelTable {
        k2: Vec::with_capacity(len),
        k1: Vec::with_capacity(len),
        k0: Vec::with_capacity(len),
    };
    for m in 0..len {
        // right: y = x_i - x_j = -m h; left: y = +m h
        let y = dir * m as f64 * h;
        t.k2.push(shifted_sp(2, lambda, k, y) / (mil * mil));
        t.k1.push(shifted_sp(1, lambda, k, y) / mil);
        t.k0.push(shifted_sp(0, lambda, k, y));
    }
    t
}

/// Gregory coefficient of node at distance `d` from the start and `e` from
/// the end of an interval of `len` nodes.
#[inline]
fn rule_coef(len: usize, d: usize, e: usize) -> f64 {
    const ENDS: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
    if len < 8 {
        if d == 0 || e == 0 {
            0.5
        } else {
            1.0
        }
    } else if d < 3 {
        ENDS[d]
    } else if e < 3 {
        ENDS[e]
    } else {
        1.0
    }
}

/// Pointwise coefficients in solve order; the boundary condition sits at the
/// end of the arrays.
struct Ordered<'a> {
    p: &'a [f64],
    r: Vec<Complex64>,
    /// `|exp(-i lambda zeta_k x)|` in solve order.
    carrier_abs: Vec<f64>,
    lo: usize,
    hi: usize,
}

struct OrderedSolution {
    psi: Vec<Complex64>,
    d1: Vec<Complex64>,
    d2: Vec<Complex64>,
    omega: Vec<Complex64>,
    iterations: usize,
    residual: f64,
    increments: Vec<f64>,
}

/// Sums `sum_{j = i+1}^{hi} W(i, j) K[j - i] omega_j` for the three kernels.
fn tail_sums(
    tab: &KernelTable,
    omega: &[Complex64],
    i: usize,
    hi: usize,
    n: usize,
    h: f64,
) -> (Complex64, Complex64, Complex64) {
    let len = n - i;
    let mut s2 = Complex64::new(0.0, 0.0);
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s0 = Complex64::new(0.0, 0.0);
    for j in (i + 1)..=hi {
        let m = j - i;
        let w = rule_coef(len, m, n - 1 - j) * h;
        let o = omega[j] * w;
        s2 += tab.k2[m] * o;
        s1 += tab.k1[m] * o;
        s0 += tab.k0[m] * o;
    }
    (s2, s1, s0)
}

/// Solves the normalised system on an index sequence where the integral runs
/// over `j >= i` (towards the boundary at the end of the array), with sign
/// `sigma` in front of the integral.
fn solve_ordered(
    ord: &Ordered<'_>,
    tab: &KernelTable,
    a: Complex64,
    sigma: f64,
    h: f64,
    method: VolterraMethod,
) -> OrderedSolution {
    let n = ord.p.len();
    let (lo, hi) = (ord.lo, ord.hi);
    let mut psi = vec![Complex64::new(1.0, 0.0); n];
    let mut d1 = vec![a; n];
    let mut d2 = vec![a * a; n];
    let mut omega = vec![Complex64::new(0.0, 0.0); n];
    let g = |i: usize| 2.0 * ord.p[i] * a + ord.r[i];
    let g_norm = (lo..=hi).map(|i| g(i).norm()).fold(0.0, f64::max);

    let mut iterations = 0;
    let mut increments = Vec::new();
    match method {
        VolterraMethod::Substitution => {
            for i in (0..=hi).rev() {
                let (s2, s1, _) = tail_sums(tab, &omega, i, hi, n, h);
                psi[i] = 1.0 + sigma * s2;
                d1[i] = a + sigma * s1;
                if i >= lo {
                    omega[i] = 2.0 * ord.p[i] * d1[i] + ord.r[i] * psi[i];
                }
            }
        }
        VolterraMethod::Neumann { tol, max_iter } => {
            for i in lo..=hi {
                omega[i] = g(i);
            }
            while iterations < max_iter {
                let next: Vec<Complex64> = (lo..=hi)
                    .map(|i| {
                        let (s2, s1, _) = tail_sums(tab, &omega, i, hi, n, h);
                        2.0 * ord.p[i] * (a + sigma * s1) + ord.r[i] * (1.0 + sigma * s2)
                    })
                    .collect();
                let diff = next
                    .iter()
                    .zip(&omega[lo..=hi])
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                let raw = next
                    .iter()
                    .zip(&omega[lo..=hi])
                    .zip(&ord.carrier_abs[lo..=hi])
                    .map(|((x, y), c)| (x - y).norm() * c)
                    .fold(0.0, f64::max);
                omega[lo..=hi].copy_from_slice(&next);
                iterations += 1;
                increments.push(raw);
                if diff <= tol * (1.0 + g_norm) {
                    break;
                }
            }
            for i in 0..=hi {
                let (s2, s1, _) = tail_sums(tab, &omega, i, hi, n, h);
                psi[i] = 1.0 + sigma * s2;
                d1[i] = a + sigma * s1;
            }
        }
    }
    let mut residual: f64 = 0.0;
    for i in 0..=hi {
        let (s2, s1, s0) = tail_sums(tab, &omega, i, hi, n, h);
        let w_ii = rule_coef(n - i, 0, n - 1 - i) * h;
        d2[i] = a * a + sigma * (s0 + w_ii * tab.k0[0] * omega[i]);
        if i >= lo {
            let re = 2.0 * ord.p[i] * (a + sigma * s1) + ord.r[i] * (1.0 + sigma * s2);
            residual = residual.max((re - omega[i]).norm());
        }
    }
    OrderedSolution {
        psi,
        d1,
        d2,
        omega,
        iterations,
        residual: residual / (1.0 + g_norm),
        increments,
    }
}

fn diagnostics_for(lambda: Complex64, pot: &PotentialPair) -> (Vec<f64>, f64, f64) {
    let l = lambda.norm();
    let m: Vec<f64> = (0..pot.x().len())
        .map(|i| pot.dp()[i].abs() + pot.q()[i].abs() + 2.0 * l * pot.p()[i].abs())
        .collect();
    let (n1, n2) = pot.l1_norms();
    let c = n1 / (l * l) + 2.0 * n2 / l;
    let w = pot.grid().weights();
    let integral: f64 = (0..m.len())
        .map(|i| w[i] * (2.0 * l * pot.x()[i]).exp() * m[i])
        .sum();
    (m, c, c.exp() * integral)
}

fn solve_side(
    lambda: Complex64,
    pot: &PotentialPair,
    side: Side,
    opts: &JostOptions,
) -> Result<JostBundle> {
    if !(lambda.norm() > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(
            "Jost solutions need a finite nonzero lambda".into(),
        ));
    }
    let n = pot.x().len();
    let h = pot.step();
    let (m_profile, c_lambda, m_lambda) = diagnostics_for(lambda, pot);

    // Reverse the arrays for the left side so both sides integrate towards
    // the end of the array.
    let (p, dp, q): (Vec<f64>, Vec<f64>, Vec<f64>) = match side {
        Side::PlusInfinity => (pot.p().to_vec(), pot.dp().to_vec(), pot.q().to_vec()),
        Side::MinusInfinity => (
            pot.p().iter().rev().cloned().collect(),
            pot.dp().iter().rev().cloned().collect(),
            pot.q().iter().rev().cloned().collect(),
        ),
    };
    let support = pot.support().map(|(lo, hi)| match side {
        Side::PlusInfinity => (lo, hi),
        Side::MinusInfinity => (n - 1 - hi, n - 1 - lo),
    });
    let (dir, sigma) = match side {
        Side::PlusInfinity => (-1.0, -1.0),
        Side::MinusInfinity => (1.0, 1.0),
    };
    let r: Vec<Complex64> = dp
        .iter()
        .zip(&q)
        .map(|(d, qq)| Complex64::new(*d, -*qq))
        .collect();

    let solved: Vec<Result<(OrderedSolution, VolterraDiagnostics)>> = (0..3)
        .into_par_iter()
        .map(|k| {
            let a = -Complex64::i() * lambda * zeta(k);
            let sol = match support {
                None => OrderedSolution {
                    psi: vec![Complex64::new(1.0, 0.0); n],
                    d1: vec![a; n],
                    d2: vec![a * a; n],
                    omega: vec![Complex64::new(0.0, 0.0); n],
                    iterations: 0,
                    residual: 0.0,
                    increments: Vec::new(),
                },
                Some((lo, hi)) => {
                    let tab = kernel_table(lambda, k, h, hi + 1, dir);
                    let carrier_abs = (0..n)
                        .map(|i| {
                            let x = match side {
                                Side::PlusInfinity => pot.x()[i],
                                Side::MinusInfinity => pot.x()[n - 1 - i],
                            };
                            (a * x).exp().norm()
                        })
                        .collect();
                    let ord = Ordered {
                        p: &p,
                        r: r.clone(),
                        carrier_abs,
                        lo,
                        hi,
                    };
                    solve_ordered(&ord, &tab, a, sigma, h, opts.method)
                }
            };
            if !sol.residual.is_finite() || sol.residual > opts.residual_tol {
                return Err(Error::NonConvergence(format!(
                    "Volterra residual {:.3e} at lambda = {lambda} (index {k})",
                    sol.residual
                )));
            }
            if sol.psi.iter().chain(&sol.d2).any(|v| !v.is_finite()) {
                return Err(Error::NonConvergence(format!(
                    "overflow in Jost solution at lambda = {lambda} (index {k})"
                )));
            }
            let diag = VolterraDiagnostics {
                m_profile: m_profile.clone(),
                c_lambda,
                m_lambda,
                iterations: sol.iterations,
                final_residual: sol.residual,
                increments: sol.increments.clone(),
            };
            Ok((sol, diag))
        })
        .collect();

    let mut psi: [Vec<Complex64>; 3] = Default::default();
    let mut dpsi: [Vec<Complex64>; 3] = Default::default();
    let mut ddpsi: [Vec<Complex64>; 3] = Default::default();
    let mut omega: [Vec<Complex64>; 3] = Default::default();
    let mut diagnostics: [VolterraDiagnostics; 3] = Default::default();
    for (k, res) in solved.into_iter().enumerate() {
        let (mut sol, diag) = res?;
        if side == Side::MinusInfinity {
            sol.psi.reverse();
            sol.d1.reverse();
            sol.d2.reverse();
            sol.omega.reverse();
        }
        psi[k] = sol.psi;
        dpsi[k] = sol.d1;
        ddpsi[k] = sol.d2;
        omega[k] = sol.omega;
        diagnostics[k] = diag;
    }
    Ok(JostBundle {
        lambda,
        side,
        grid: pot.grid().clone(),
        psi,
        dpsi,
        ddpsi,
        omega,
        diagnostics,
    })
}

impl Default for VolterraDiagnostics {
    fn default() -> Self {
        VolterraDiagnostics {
            m_profile: Vec::new(),
            c_lambda: 0.0,
            m_lambda: 0.0,
            iterations: 0,
            final_residual: 0.0,
            increments: Vec::new(),
        }
    }
}

/// Right Jost solutions `v_0, v_1, v_2`.
pub fn jost_right(lambda: Complex64, pot: &PotentialPair, opts: &JostOptions) -> Result<JostBundle> {
    solve_side(lambda, pot, Side::PlusInfinity, opts)
}

/// Left Jost solutions `u_0, u_1, u_2`.
pub fn jost_left(lambda: Complex64, pot: &PotentialPair, opts: &JostOptions) -> Result<JostBundle> {
    solve_side(lambda, pot, Side::MinusInfinity, opts)
}

/// `w_k = 2 p v_k' + (p' - i q) v_k` for the right Jost solutions, with
/// diagnostics.
pub fn solve_w_right(
    lambda: Complex64,
    pot: &PotentialPair,
    opts: &JostOptions,
) -> Result<([Vec<Complex64>; 3], [VolterraDiagnostics; 3])> {
    let b = jost_right(lambda, pot, opts)?;
    let n = b.x().len();
    let w = [0, 1, 2].map(|k| (0..n).map(|i| b.w(k, i)).collect());
    Ok((w, b.diagnostics.clone()))
}
