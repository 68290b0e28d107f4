//! Direct ODE integration of the spectral problem, independent of the
//! Volterra pipeline.
//!
//! The normalised first-order system for `psi = y / E`, `D1 = y' / E`,
//! `D2 = y'' / E` with `E = exp(a x)`, `a = -i lambda zeta_k`, reads
//!
//! ```text
//! psi' = D1 - a psi
//! D1'  = D2 - a D1
//! D2'  = i lambda^3 psi + 2 p D1 + (p' - i q) psi - a D2
//! ```
//!
//! and is integrated with an adaptive Dormand-Prince 5(4) pair from the edge
//! of the potential's support (where the free solution is exact) towards
//! the other end of the grid, stopping at every node.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::jost::{JostBundle, Side};
use crate::potential::{PotentialPair, PotentialSource};
use crate::rootsys::zeta;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest admissible step relative to the grid spacing.
    pub min_step_ratio: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-11,
            atol: 1e-13,
            min_step_ratio: 1e-10,
            max_steps: 5_000_000,
        }
    }
}

type State = [Complex64; 3];

struct System<'a> {
    source: &'a dyn PotentialSource,
    a: Complex64,
    il3: Complex64,
}

impl System<'_> {
    fn rhs(&self, x: f64, y: &State) -> State {
        let (p, dp, q) = self.source.eval(x);
        let r = Complex64::new(dp, -q);
        [
            y[1] - self.a * y[0],
            y[2] - self.a * y[1],
            self.il3 * y[0] + 2.0 * p * y[1] + r * y[0] - self.a * y[2],
        ]
    }
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..3 {
            out[i] += k[i] * (h * c);
        }
    }
    out
}

/// One Dormand-Prince step; returns the fifth-order solution and the
/// embedded error estimate.
fn dopri_step(sys: &System<'_>, x: f64, y: &State, h: f64, k1: &State) -> (State, State, State) {
    let k2 = sys.rhs(x + h / 5.0, &axpy(y, h, &[(1.0 / 5.0, k1)]));
    let k3 = sys.rhs(
        x + 3.0 * h / 10.0,
        &axpy(y, h, &[(3.0 / 40.0, k1), (9.0 / 40.0, &k2)]),
    );
    let k4 = sys.rhs(
        x + 4.0 * h / 5.0,
        &axpy(y, h, &[(44.0 / 45.0, k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)]),
    );
    let k5 = sys.rhs(
        x + 8.0 * h / 9.0,
        &axpy(
            y,
            h,
            &[
                (19372.0 / 6561.0, k1),
                (-25360.0 / 2187.0, &k2),
                (64448.0 / 6561.0, &k3),
                (-212.0 / 729.0, &k4),
            ],
        ),
    );
    let k6 = sys.rhs(
        x + h,
        &axpy(
            y,
            h,
            &[
                (9017.0 / 3168.0, k1),
                (-355.0 / 33.0, &k2),
                (46732.0 / 5247.0, &k3),
                (49.0 / 176.0, &k4),
                (-5103.0 / 18656.0, &k5),
            ],
        ),
    );
    let y5 = axpy(
        y,
        h,
        &[
            (35.0 / 384.0, k1),
            (500.0 / 1113.0, &k3),
            (125.0 / 192.0, &k4),
            (-2187.0 / 6784.0, &k5),
            (11.0 / 84.0, &k6),
        ],
    );
    let k7 = sys.rhs(x + h, &y5);
    let e = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let ks = [k1, &k2, &k3, &k4, &k5, &k6, &k7];
    let mut err = [Complex64::new(0.0, 0.0); 3];
    for (c, k) in e.iter().zip(ks) {
        for i in 0..3 {
            err[i] += k[i] * (h * c);
        }
    }
    (y5, err, k7)
}

/// Integrates one normalised solution over `nodes` (in integration order),
/// starting from the free data at `nodes[0]`.
fn integrate(sys: &System<'_>, nodes: &[f64], opts: &OdeOptions, spacing: f64) -> Result<Vec<State>> {
    let mut y: State = [Complex64::new(1.0, 0.0), sys.a, sys.a * sys.a];
    let mut out = Vec::with_capacity(nodes.len());
    out.push(y);
    let mut x = nodes[0];
    let mut h_try = spacing;
    let mut k1 = sys.rhs(x, &y);
    let mut steps = 0usize;
    for &target in &nodes[1..] {
        let dir = (target - x).signum();
        while (target - x) * dir > 0.0 {
            let remaining = (target - x).abs();
            let mut h = h_try.min(remaining);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let (y5, err, k7) = dopri_step(sys, x, &y, dir * h, &k1);
            let mut e: f64 = 0.0;
            for i in 0..3 {
                let sc = opts.atol + opts.rtol * y[i].norm().max(y5[i].norm());
                e = e.max(err[i].norm() / sc);
            }
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::NonConvergence("ODE oracle exceeded its step budget".into()));
            }
            if e <= 1.0 && y5.iter().all(|v| v.is_finite()) {
                x = if last { target } else { x + dir * h };
                y = y5;
                k1 = k7;
                let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || fac < 1.0 {
                    h_try = h * fac;
                }
            } else {
                let fac = if e.is_finite() { (0.9 * e.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h_try = h * fac;
                if h_try < opts.min_step_ratio * spacing {
                    return Err(Error::NonConvergence(format!(
                        "ODE oracle step size underflow near x = {x}: inadmissible lambda/side/index combination"
                    )));
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Jost solutions by direct integration, evaluated on the grid of `pot` with
/// coefficients taken from `source`.
pub fn ode_jost(
    lambda: Complex64,
    pot: &PotentialPair,
    source: &dyn PotentialSource,
    side: Side,
    opts: &OdeOptions,
) -> Result<JostBundle> {
    if !(lambda.norm() > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument("ODE oracle needs a finite nonzero lambda".into()));
    }
    let x = pot.x();
    let n = x.len();
    // start at the support edge on the asymptotic side; beyond it the free
    // data is an exact fixed point of the normalised system
    let (lo, hi) = pot.support().unwrap_or((n - 1, n - 1));
    let order: Vec<usize> = match side {
        Side::PlusInfinity => {
            let start = (hi + 1).min(n - 1);
            (0..=start).rev().collect()
        }
        Side::MinusInfinity => {
            let start = lo.saturating_sub(1);
            (start..n).collect()
        }
    };
    let nodes: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let il3 = Complex64::i() * lambda * lambda * lambda;
    let spacing = pot.step();
    let cols: Vec<Result<Vec<State>>> = (0..3)
        .into_par_iter()
        .map(|k| {
            let sys = System {
                source,
                a: -Complex64::i() * lambda * zeta(k),
                il3,
            };
            integrate(&sys, &nodes, opts, spacing)
        })
        .collect();
    let mut psi: [Vec<Complex64>; 3] = Default::default();
    let mut dpsi: [Vec<Complex64>; 3] = Default::default();
    let mut ddpsi: [Vec<Complex64>; 3] = Default::default();
    for (k, col) in cols.into_iter().enumerate() {
        let col = col?;
        let a = -Complex64::i() * lambda * zeta(k);
        let mut v = vec![Complex64::new(1.0, 0.0); n];
        let mut d1 = vec![a; n];
        let mut d2 = vec![a * a; n];
        for (s, &i) in col.iter().zip(&order) {
            v[i] = s[0];
            d1[i] = s[1];
            d2[i] = s[2];
        }
        psi[k] = v;
        dpsi[k] = d1;
        ddpsi[k] = d2;
    }
    Ok(JostBundle::from_normalized(lambda, side, pot, psi, dpsi, ddpsi))
}

/// Normalised `psi_k(lambda, x)` (right side) at a single `x` by direct
/// integration; used for large `|lambda|` where only a few points are needed.
pub fn ode_normalized_at(
    lambda: Complex64,
    k: usize,
    source: &dyn PotentialSource,
    side: Side,
    x_start: f64,
    x: f64,
    spacing: f64,
    opts: &OdeOptions,
) -> Result<State> {
    let sys = System {
        source,
        a: -Complex64::i() * lambda * zeta(k),
        il3: Complex64::i() * lambda * lambda * lambda,
    };
    let ok = match side {
        Side::PlusInfinity => x_start >= x,
        Side::MinusInfinity => x_start <= x,
    };
    if !ok {
        return Err(Error::InvalidArgument(
            "integration must start on the asymptotic side of the target".into(),
        ));
    }
    if x_start == x {
        return Ok([Complex64::new(1.0, 0.0), sys.a, sys.a * sys.a]);
    }
    let out = integrate(&sys, &[x_start, x], opts, spacing)?;
    Ok(out[1])
}

/// `sup |-i y''' + i (p y)' + i p y' + q y - lambda^3 y| / sup |y|` over
/// interior nodes, with all derivatives taken by finite differences of the
/// values.
pub fn ode_residual(bundle: &JostBundle, pot: &PotentialPair, k: usize) -> f64 {
    let n = pot.x().len();
    let h = pot.step();
    let lambda = bundle.lambda();
    let y: Vec<Complex64> = (0..n).map(|i| bundle.val(k, i)).collect();
    let scale = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let i_ = Complex64::i();
    let mut worst: f64 = 0.0;
    for i in 2..n - 2 {
        let d1 = (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h);
        let d3 = (y[i + 2] - 2.0 * y[i + 1] + 2.0 * y[i - 1] - y[i - 2]) / (2.0 * h * h * h);
        let (p, dp, q) = (pot.p()[i], pot.dp()[i], pot.q()[i]);
        let r = -i_ * d3 + i_ * (dp * y[i] + 2.0 * p * d1) + q * y[i] - lambda * lambda * lambda * y[i];
        worst = worst.max(r.norm());
    }
    worst / scale
}
