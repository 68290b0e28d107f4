//! Potential pairs `(p, q)` sampled on a symmetric uniform grid, and analytic
//! sources that can be evaluated anywhere.

use crate::numerics::RealGrid;
use crate::{Error, Result};

/// Default truncation: `exp(-a X_max) = 1e-12`.
pub fn default_x_max(a: f64) -> f64 {
    (1e12f64).ln() / a
}

pub const DEFAULT_NX: usize = 4097;

/// A potential pair that can be evaluated at any `x`.
pub trait PotentialSource: Send + Sync {
    /// `(p(x), p'(x), q(x))`.
    fn eval(&self, x: f64) -> (f64, f64, f64);
}

/// `p = ap exp(-((x - cp)/wp)^2)`, `q = aq exp(-((x - cq)/wq)^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPair {
    pub p_amp: f64,
    pub p_center: f64,
    pub p_width: f64,
    pub q_amp: f64,
    pub q_center: f64,
    pub q_width: f64,
}

impl GaussianPair {
    pub fn q_only(amp: f64, center: f64, width: f64) -> Self {
        GaussianPair {
            p_amp: 0.0,
            p_center: 0.0,
            p_width: 1.0,
            q_amp: amp,
            q_center: center,
            q_width: width,
        }
    }

    pub fn both(p_amp: f64, q_amp: f64, center: f64, width: f64) -> Self {
        GaussianPair {
            p_amp,
            p_center: center,
            p_width: width,
            q_amp,
            q_center: center,
            q_width: width,
        }
    }
}

impl PotentialSource for GaussianPair {
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let zp = (x - self.p_center) / self.p_width;
        let p = self.p_amp * (-zp * zp).exp();
        let dp = -2.0 * zp / self.p_width * p;
        let zq = (x - self.q_center) / self.q_width;
        let q = self.q_amp * (-zq * zq).exp();
        (p, dp, q)
    }
}

/// Real potentials `p`, `p'`, `q` on a uniform grid over `[-X_max, X_max]`.
#[derive(Debug, Clone)]
pub struct PotentialPair {
    grid: RealGrid,
    p: Vec<f64>,
    dp: Vec<f64>,
    q: Vec<f64>,
    a: f64,
}

impl PotentialPair {
    /// Builds a pair from samples. `dp = None` fills `p'` by centered
    /// differences (one-sided at the ends).
    pub fn new(
        grid: RealGrid,
        p: Vec<f64>,
        dp: Option<Vec<f64>>,
        q: Vec<f64>,
        a: f64,
    ) -> Result<Self> {
        let n = grid.len();
        if p.len() != n || q.len() != n || dp.as_ref().is_some_and(|d| d.len() != n) {
            return Err(Error::InvalidPotential(format!(
                "sample counts differ from the {n} grid nodes"
            )));
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidPotential(format!("decay rate a must be positive, got {a}")));
        }
        let nodes = grid.nodes();
        let h = (grid.last() - grid.first()) / (n - 1) as f64;
        if nodes
            .windows(2)
            .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0))
        {
            return Err(Error::InvalidPotential("x grid must be uniformly spaced".into()));
        }
        let dp = dp.unwrap_or_else(|| centered_difference(&p, h));
        for (name, v) in [("p", &p), ("dp", &dp), ("q", &q)] {
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::InvalidPotential(format!(
                    "{name} is not finite at x = {}",
                    nodes[i]
                )));
            }
        }
        Ok(PotentialPair { grid, p, dp, q, a })
    }

    /// Samples `source` on `n` uniform nodes over `[-x_max, x_max]`.
    pub fn from_source(source: &dyn PotentialSource, a: f64, x_max: f64, n: usize) -> Result<Self> {
        let grid = RealGrid::uniform(-x_max, x_max, n)?;
        let mut p = Vec::with_capacity(n);
        let mut dp = Vec::with_capacity(n);
        let mut q = Vec::with_capacity(n);
        for &x in grid.nodes() {
            let (pv, dpv, qv) = source.eval(x);
            p.push(pv);
            dp.push(dpv);
            q.push(qv);
        }
        PotentialPair::new(grid, p, Some(dp), q, a)
    }

    /// The identically zero pair.
    pub fn zero(a: f64, x_max: f64, n: usize) -> Result<Self> {
        let grid = RealGrid::uniform(-x_max, x_max, n)?;
        PotentialPair::new(grid, vec![0.0; n], Some(vec![0.0; n]), vec![0.0; n], a)
    }

    pub fn grid(&self) -> &RealGrid {
        &self.grid
    }

    pub fn x(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn dp(&self) -> &[f64] {
        &self.dp
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn step(&self) -> f64 {
        (self.grid.last() - self.grid.first()) / (self.grid.len() - 1) as f64
    }

    pub fn x_max(&self) -> f64 {
        self.grid.last()
    }

    /// `max_x max(|p|, |p'|, |q|) e^{a|x|}`.
    pub fn envelope_constant(&self) -> f64 {
        let mut c: f64 = 0.0;
        for (i, &x) in self.x().iter().enumerate() {
            let m = self.p[i].abs().max(self.dp[i].abs()).max(self.q[i].abs());
            c = c.max(m * (self.a * x.abs()).exp());
        }
        c
    }

    /// Checks the samples against the envelope `C e^{-a|x|}`.
    pub fn check_envelope(&self, bound: f64) -> Result<()> {
        let c = self.envelope_constant();
        if c > bound {
            return Err(Error::InvalidPotential(format!(
                "envelope constant {c:.3e} exceeds declared bound {bound:.3e}"
            )));
        }
        Ok(())
    }

    /// Largest deviation of `dp` from centered differences of `p` on
    /// interior nodes, relative to `max |dp|`.
    pub fn derivative_mismatch(&self) -> f64 {
        let fd = centered_difference(&self.p, self.step());
        let scale = self.dp.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return fd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        }
        let n = self.p.len();
        (1..n - 1).fold(0.0f64, |m, i| m.max((fd[i] - self.dp[i]).abs())) / scale
    }

    /// Index range `lo..=hi` outside of which `|p| + |p'| + |q|` is below
    /// `1e-16` of its maximum. `None` if the pair vanishes identically.
    pub fn support(&self) -> Option<(usize, usize)> {
        let m: Vec<f64> = (0..self.p.len())
            .map(|i| self.p[i].abs() + self.dp[i].abs() + self.q[i].abs())
            .collect();
        let peak = m.iter().cloned().fold(0.0, f64::max);
        if peak == 0.0 {
            return None;
        }
        let thr = 1e-16 * peak;
        let lo = m.iter().position(|v| *v > thr)?;
        let hi = m.iter().rposition(|v| *v > thr)?;
        Some((lo, hi))
    }

    /// `||p' + i q||_1` and `||p||_1` (the constants entering `c(lambda)`).
    pub fn l1_norms(&self) -> (f64, f64) {
        let w = self.grid.weights();
        let mut a = 0.0;
        let mut b = 0.0;
        for i in 0..self.p.len() {
            a += w[i] * self.dp[i].hypot(self.q[i]);
            b += w[i] * self.p[i].abs();
        }
        (a, b)
    }
}

/// Cubic interpolation of sampled potentials, so a [`PotentialPair`] can
/// feed the ODE oracle.
impl PotentialSource for PotentialPair {
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        if x < self.grid.first() || x > self.grid.last() {
            return (0.0, 0.0, 0.0);
        }
        let row = self.grid.interpolation_row(x);
        let mut out = (0.0, 0.0, 0.0);
        for (j, c) in row {
            out.0 += c * self.p[j];
            out.1 += c * self.dp[j];
            out.2 += c * self.q[j];
        }
        out
    }
}

fn centered_difference(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    d[0] = (f[1] - f[0]) / h;
    d[n - 1] = (f[n - 1] - f[n - 2]) / h;
    d
}
