//! Collocation of the singular integral systems.
//!
//! On either side the sectorial function is represented as
//!
//! ```text
//! F(l) = 1 + sum_n R_n A_n(l) + sum_m Rh_m B_m(l)
//!        + 1/(2 pi i) int k0 U1 / (tau - c0 l) + 1/(2 pi i) int k1 U0 / (tau - c1 l)
//!        + 1/(2 pi i) int (k2 U0 + k3 U1) / (tau - c2 l)
//! ```
//!
//! with `(c0, c1, c2) = (i zeta2, i zeta1, i)` on the right and
//! `(-i zeta1, -i zeta2, -i)` on the left. `U0, U1` are the boundary values
//! `psi1+, psi2+` (right, at `-i tau`) or `phi1+, phi2+` (left, at `i tau`).
//! Each double-pole group is `1/(l - b)^2 + w/(l - b')^2` with the partner
//! point `b'` and weight `w` fixed by the residue couplings.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use super::kernels::JumpKernels;
use crate::jost::Side;
use crate::numerics::{solve_dense, RealGrid};
use crate::rootsys::{classify_sector, zeta, SQRT3};
use crate::scatter::BoundStateSet;
use crate::{Error, Result};

/// Smallest admissible distance between an evaluation point and a pole.
pub const POLE_EXCLUSION: f64 = 1e-3;

/// Selects between the self-consistent system and the literal printed one.
///
/// `AsPrinted` flips the half-residue sign of the second boundary row on both
/// sides and, on the right, evaluates the cross bracket of the `mu_p` rows at
/// `mu_p + nu_m`. `Derived` uses the boundary values and Laurent constant
/// terms of the representation itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegularPartForm {
    #[default]
    Derived,
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchenkoOptions {
    pub max_condition: f64,
    pub form: RegularPartForm,
}

impl Default for MarchenkoOptions {
    fn default() -> Self {
        MarchenkoOptions {
            max_condition: 1e12,
            form: RegularPartForm::Derived,
        }
    }
}

/// Solution of one collocated system at a fixed `x`.
#[derive(Debug, Clone)]
pub struct MarchenkoUnknowns {
    pub side: Side,
    pub x: f64,
    /// `psi1+` / `phi1+` on the tau grid.
    pub u1: Vec<Complex64>,
    /// `psi2+` / `phi2+` on the tau grid.
    pub u2: Vec<Complex64>,
    /// `R_n(zeta0, x)` (right) or `R'_n(zeta0, x)` (left).
    pub r: Vec<Complex64>,
    /// `Rh_m(zeta0, x)` (right) or `Rh'_m(zeta0, x)` (left).
    pub rhat: Vec<Complex64>,
    pub bound: BoundStateSet,
    pub condition: f64,
    /// `||A u - b||_inf / ||b||_inf` of the assembled system.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
struct PoleGroup {
    base: f64,
    partner: Complex64,
    weight: Complex64,
}

impl PoleGroup {
    fn value(&self, l: Complex64) -> Complex64 {
        (l - self.base).powi(-2) + self.weight * (l - self.partner).powi(-2)
    }

    /// Constant Laurent term at the base point.
    fn regular_at_base(&self) -> Complex64 {
        self.weight * (self.base - self.partner).powi(-2)
    }
}

struct Geometry {
    c: [Complex64; 3],
    /// Half-residue sign of the row where integral 0 (resp. 1) is singular.
    half: [f64; 2],
    mu: Vec<PoleGroup>,
    nu: Vec<PoleGroup>,
}

fn geometry(side: Side, bound: &BoundStateSet, x: f64, form: RegularPartForm) -> Geometry {
    let i = Complex64::i();
    let (z1, z2) = (zeta(1), zeta(2));
    let flip = if form == RegularPartForm::AsPrinted { -1.0 } else { 1.0 };
    match side {
        Side::PlusInfinity => Geometry {
            c: [i * z2, i * z1, i],
            half: [0.5, -0.5 * flip],
            mu: bound
                .mu
                .iter()
                .map(|&m| PoleGroup {
                    base: m,
                    partner: m * z2,
                    weight: z1 * (-SQRT3 * m * x).exp(),
                })
                .collect(),
            nu: bound
                .nu
                .iter()
                .map(|&v| PoleGroup {
                    base: v,
                    partner: v * z1,
                    weight: z2 * (SQRT3 * v * x).exp(),
                })
                .collect(),
        },
        Side::MinusInfinity => Geometry {
            c: [-i * z1, -i * z2, -i],
            half: [-0.5 * flip, 0.5],
            mu: bound
                .mu
                .iter()
                .map(|&m| PoleGroup {
                    base: m,
                    partner: m * z1,
                    weight: z2 * (SQRT3 * m * x).exp(),
                })
                .collect(),
            nu: bound
                .nu
                .iter()
                .map(|&v| PoleGroup {
                    base: v,
                    partner: v * z2,
                    weight: z1 * (-SQRT3 * v * x).exp(),
                })
                .collect(),
        },
    }
}

fn check_bound(bound: &BoundStateSet) -> Result<()> {
    if bound.mu.iter().any(|m| !(*m > 0.0)) || bound.nu.iter().any(|v| !(*v < 0.0)) {
        return Err(Error::InvalidArgument("bound states need mu > 0 and nu < 0".into()));
    }
    Ok(())
}

/// Four-point Lagrange value and derivative rows at `t`.
fn local_rows(grid: &RealGrid, t: f64) -> Vec<(usize, f64, f64)> {
    let nodes = grid.nodes();
    let n = nodes.len();
    let i = grid.nearest(t);
    let start = i.saturating_sub(2).min(n - 4);
    let idx: Vec<usize> = (start..start + 4).collect();
    idx.iter()
        .map(|&j| {
            let mut v = 1.0;
            let mut d = 0.0;
            for &k in &idx {
                if k == j {
                    continue;
                }
                let den = nodes[j] - nodes[k];
                d = d * (t - nodes[k]) / den + v / den;
                v *= (t - nodes[k]) / den;
            }
            (j, v, d)
        })
        .collect()
}

/// Quadrature coefficients `a_m` with `int_0^T g / (tau - z) ~ sum_m a_m g_m`.
///
/// The first-order Taylor polynomial of `g` at the real point `t0` nearest
/// to `z` is subtracted and integrated exactly, which keeps the rule
/// accurate as `z` approaches the contour.
fn cauchy_weights(grid: &RealGrid, z: Complex64, out: &mut [Complex64]) {
    let (a, b) = (grid.first(), grid.last());
    let log = (b - z).ln() - (a - z).ln();
    taylor_subtracted(grid, z, log, None, out);
}

/// Principal-value coefficients for a pole at the node `i`, built with the
/// same subtraction as [`cauchy_weights`]. At the last node the distance in
/// the logarithm is clamped to half a cell.
fn pv_weights(grid: &RealGrid, i: usize, out: &mut [Complex64]) {
    let tau = grid.nodes();
    let n = tau.len();
    let t = tau[i];
    let (a, b) = (grid.first(), grid.last());
    let half = 0.5 * (tau[n - 1] - tau[n - 2]);
    let log = ((b - t).max(half) / (t - a)).ln();
    taylor_subtracted(grid, Complex64::new(t, 0.0), Complex64::new(log, 0.0), Some(i), out);
}

fn taylor_subtracted(grid: &RealGrid, z: Complex64, log: Complex64, skip: Option<usize>, out: &mut [Complex64]) {
    let tau = grid.nodes();
    let w = grid.weights();
    let (a, b) = (grid.first(), grid.last());
    let t0 = z.re.clamp(a, b);
    let mut s0 = Complex64::new(0.0, 0.0);
    let mut s1 = Complex64::new(0.0, 0.0);
    for m in 0..tau.len() {
        if Some(m) == skip {
            out[m] = Complex64::new(0.0, 0.0);
            continue;
        }
        out[m] = w[m] / (tau[m] - z);
        s0 += out[m];
        s1 += out[m] * (tau[m] - t0);
    }
    let e0 = log - s0;
    // int (tau - t0)/(tau - z) = (b - a) + (z - t0) log
    let e1 = (b - a) + (z - t0) * log - s1;
    for (j, v, d) in local_rows(grid, t0) {
        out[j] += v * e0 + d * e1;
    }
}

/// Coefficients of the three regular Cauchy integrals at the point `l`,
/// applied to the unknown vector layout `[U0 | U1]`.
fn cauchy_row(
    grid: &RealGrid,
    kern: &JumpKernels,
    geo: &Geometry,
    l: Complex64,
    skip: Option<usize>,
    row: &mut [Complex64],
) {
    let n = grid.len();
    let f = Complex64::new(0.0, -1.0 / (2.0 * PI));
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..3 {
        if Some(j) == skip {
            continue;
        }
        cauchy_weights(grid, geo.c[j] * l, &mut a);
        for m in 0..n {
            let d = f * a[m];
            match j {
                0 => row[n + m] += d * kern.k[0][m],
                1 => row[m] += d * kern.k[1][m],
                _ => {
                    row[m] += d * kern.k[2][m];
                    row[n + m] += d * kern.k[3][m];
                }
            }
        }
    }
}

fn extrapolation_weights(t: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        let mut l = 1.0;
        for j in 0..3 {
            if j != i {
                l *= (t[0] - t[j + 1]) / (t[i + 1] - t[j + 1]);
            }
        }
        out[i] = l;
    }
    out
}

fn solve(kern: &JumpKernels, bound: &BoundStateSet, x: f64, opts: &MarchenkoOptions) -> Result<MarchenkoUnknowns> {
    check_bound(bound)?;
    if (kern.x - x).abs() > 1e-12 * (1.0 + x.abs()) {
        return Err(Error::InvalidArgument(format!(
            "kernels were built for x = {} but the system is solved at x = {x}",
            kern.x
        )));
    }
    let grid = &kern.tau_grid;
    let n = grid.len();
    if n < 4 || grid.first() != 0.0 {
        return Err(Error::InvalidArgument("tau grid must start at 0 and have at least 4 nodes".into()));
    }
    let geo = geometry(kern.side, bound, x, opts.form);
    let (nm, nn) = (geo.mu.len(), geo.nu.len());
    let size = 2 * n + nm + nn;
    let mut a = DMatrix::<Complex64>::zeros(size, size);
    let mut b = DVector::<Complex64>::from_element(size, Complex64::new(1.0, 0.0));
    let tau = grid.nodes();
    let f = Complex64::new(0.0, -1.0 / (2.0 * PI));
    let one = Complex64::new(1.0, 0.0);

    let ext = extrapolation_weights(&tau[..4]);
    for blk in 0..2 {
        let r0 = blk * n;
        a[(r0, r0)] = one;
        for (s, e) in ext.iter().enumerate() {
            a[(r0, r0 + s + 1)] = Complex64::new(-e, 0.0);
        }
        b[r0] = Complex64::new(0.0, 0.0);
    }

    let mut row = vec![Complex64::new(0.0, 0.0); size];
    let mut pv = vec![Complex64::new(0.0, 0.0); n];
    for blk in 0..2 {
        // Block 0: integral 0 (acting on U1) is singular, left-hand side U0.
        // Block 1: integral 1 (acting on U0) is singular, left-hand side U1.
        let (own, other) = if blk == 0 { (0, n) } else { (n, 0) };
        for i in 1..n {
            let t = tau[i];
            let l = Complex64::new(t, 0.0) / geo.c[blk];
            row.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            cauchy_row(grid, kern, &geo, l, Some(blk), &mut row[..2 * n]);
            pv_weights(grid, i, &mut pv);
            let ks = &kern.k[blk];
            for m in 0..n {
                row[other + m] += f * pv[m] * ks[m];
            }
            row[other + i] += geo.half[blk] * ks[i];
            for (q, g) in geo.mu.iter().enumerate() {
                row[2 * n + q] = g.value(l);
            }
            for (q, g) in geo.nu.iter().enumerate() {
                row[2 * n + nm + q] = g.value(l);
            }
            let r = own + i;
            for c in 0..size {
                a[(r, c)] = -row[c];
            }
            a[(r, r)] += one;
        }
    }

    let points: Vec<(f64, bool)> = geo
        .mu
        .iter()
        .map(|g| (g.base, true))
        .chain(geo.nu.iter().map(|g| (g.base, false)))
        .collect();
    for (p, &(pt, is_mu)) in points.iter().enumerate() {
        let l = Complex64::new(pt, 0.0);
        row.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        cauchy_row(grid, kern, &geo, l, None, &mut row[..2 * n]);
        for (q, g) in geo.mu.iter().enumerate() {
            row[2 * n + q] = if is_mu && q == p { g.regular_at_base() } else { g.value(l) };
        }
        for (q, g) in geo.nu.iter().enumerate() {
            row[2 * n + nm + q] = if !is_mu && q + nm == p {
                g.regular_at_base()
            } else if is_mu && kern.side == Side::PlusInfinity && opts.form == RegularPartForm::AsPrinted {
                g.value(-l)
            } else {
                g.value(l)
            };
        }
        let r = 2 * n + p;
        for c in 0..size {
            a[(r, c)] = row[c];
        }
        b[r] = -one;
    }

    let sol = solve_dense(a.clone(), &b, opts.max_condition)?;
    let amax = |v: &DVector<Complex64>| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let res = amax(&(&a * &sol.x - &b)) / amax(&b).max(1.0);
    let xs = sol.x.as_slice();
    Ok(MarchenkoUnknowns {
        side: kern.side,
        x,
        u1: xs[..n].to_vec(),
        u2: xs[n..2 * n].to_vec(),
        r: xs[2 * n..2 * n + nm].to_vec(),
        rhat: xs[2 * n + nm..].to_vec(),
        bound: bound.clone(),
        condition: sol.condition,
        residual: res,
    })
}

/// Solves the right system at `x` for `psi1+, psi2+` on the tau grid and the
/// residue coefficients `R_n`, `Rh_m`.
pub fn solve_marchenko_right(
    kernels: &JumpKernels,
    bound: &BoundStateSet,
    x: f64,
    opts: &MarchenkoOptions,
) -> Result<MarchenkoUnknowns> {
    if kernels.side != Side::PlusInfinity {
        return Err(Error::InvalidArgument("right system needs right-side kernels".into()));
    }
    solve(kernels, bound, x, opts)
}

/// Solves the dual (left) system at `x`.
pub fn solve_marchenko_left(
    kernels: &JumpKernels,
    bound: &BoundStateSet,
    x: f64,
    opts: &MarchenkoOptions,
) -> Result<MarchenkoUnknowns> {
    if kernels.side != Side::MinusInfinity {
        return Err(Error::InvalidArgument("left system needs left-side kernels".into()));
    }
    solve(kernels, bound, x, opts)
}

fn evaluate(sol: &MarchenkoUnknowns, kern: &JumpKernels, l: Complex64) -> Result<Complex64> {
    if sol.side != kern.side || (sol.x - kern.x).abs() > 1e-12 * (1.0 + sol.x.abs()) {
        return Err(Error::InvalidArgument("solution and kernels do not match".into()));
    }
    let geo = geometry(sol.side, &sol.bound, sol.x, RegularPartForm::Derived);
    for g in geo.mu.iter().chain(&geo.nu) {
        let d = (l - g.base).norm().min((l - g.partner).norm());
        if d < POLE_EXCLUSION {
            return Err(Error::InvalidArgument(format!(
                "lambda = {l} is within {d:.1e} of a pole"
            )));
        }
    }
    let grid = &kern.tau_grid;
    let n = grid.len();
    let mut row = vec![Complex64::new(0.0, 0.0); 2 * n];
    cauchy_row(grid, kern, &geo, l, None, &mut row);
    let mut v = Complex64::new(1.0, 0.0);
    for m in 0..n {
        v += row[m] * sol.u1[m] + row[n + m] * sol.u2[m];
    }
    for (g, r) in geo.mu.iter().zip(&sol.r) {
        v += r * g.value(l);
    }
    for (g, r) in geo.nu.iter().zip(&sol.rhat) {
        v += r * g.value(l);
    }
    Ok(v)
}

/// `psi0+(lambda, x)` from a solved right system, for `lambda` inside the
/// sector `Omega0^-`.
pub fn eval_psi0(sol: &MarchenkoUnknowns, kernels: &JumpKernels, lambda: Complex64) -> Result<Complex64> {
    if sol.side != Side::PlusInfinity || !classify_sector(lambda)?.in_omega_minus(0) {
        return Err(Error::InvalidArgument(format!(
            "psi0 is represented inside Omega0^- only (lambda = {lambda})"
        )));
    }
    evaluate(sol, kernels, lambda)
}

/// `phi0+(lambda, x)` from a solved left system, for `lambda` inside `Omega0`.
pub fn eval_phi0(sol: &MarchenkoUnknowns, kernels: &JumpKernels, lambda: Complex64) -> Result<Complex64> {
    if sol.side != Side::MinusInfinity || !classify_sector(lambda)?.in_omega(0) {
        return Err(Error::InvalidArgument(format!(
            "phi0 is represented inside Omega0 only (lambda = {lambda})"
        )));
    }
    evaluate(sol, kernels, lambda)
}
