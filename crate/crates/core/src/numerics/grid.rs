use num_complex::Complex64;

use crate::{Error, Result};

/// Ascending abscissae with positive quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RealGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Composite-rule coefficients for `n` equally spaced nodes (unit spacing).
///
/// Uses the fourth-order Gregory end corrections
/// `3/8, 7/6, 23/24, 1, ..., 1, 23/24, 7/6, 3/8` when `n >= 8` and the
/// trapezoid rule otherwise.
pub fn gregory_coefficients(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        2..=7 => {
            let mut w = vec![1.0; n];
            w[0] = 0.5;
            w[n - 1] = 0.5;
            w
        }
        _ => {
            let mut w = vec![1.0; n];
            let ends = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
            for (i, e) in ends.iter().enumerate() {
                w[i] = *e;
                w[n - 1 - i] = *e;
            }
            w
        }
    }
}

impl RealGrid {
    /// Builds a grid from explicit nodes and weights, checking the invariants.
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.len() < 2 {
            return Err(Error::InvalidArgument(
                "grid needs at least two nodes and one weight per node".into(),
            ));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("grid nodes must be strictly increasing".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("grid weights must be positive".into()));
        }
        Ok(RealGrid { nodes, weights })
    }

    /// `n` equally spaced nodes on `[a, b]` with Gregory weights.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(b > a) || n < 2 {
            return Err(Error::InvalidArgument(format!(
                "uniform grid needs b > a and n >= 2 (a={a}, b={b}, n={n})"
            )));
        }
        let h = (b - a) / (n - 1) as f64;
        let nodes = (0..n)
            .map(|j| if j + 1 == n { b } else { a + h * j as f64 })
            .collect();
        let weights = gregory_coefficients(n).into_iter().map(|c| c * h).collect();
        RealGrid::new(nodes, weights)
    }

    /// Grid on `[0, t_max]` refined towards the origin.
    ///
    /// Nodes are `tau(s_j)` for `s_j = j/n`, `j = 0..=n`, with
    /// `tau(s) = t_max (s^2 + e s) / (1 + e)`, `e = 1/16`. Weights are the
    /// Gregory coefficients in `s` times `tau'(s)`, so they stay positive and
    /// the rule remains fourth order for smooth integrands.
    pub fn graded(t_max: f64, n: usize) -> Result<Self> {
        if !(t_max > 0.0) || n < 2 {
            return Err(Error::InvalidArgument(format!(
                "graded grid needs t_max > 0 and n >= 2 (t_max={t_max}, n={n})"
            )));
        }
        const E: f64 = 1.0 / 16.0;
        let ds = 1.0 / n as f64;
        let map = |s: f64| t_max * (s * s + E * s) / (1.0 + E);
        let dmap = |s: f64| t_max * (2.0 * s + E) / (1.0 + E);
        let coef = gregory_coefficients(n + 1);
        let mut nodes = Vec::with_capacity(n + 1);
        let mut weights = Vec::with_capacity(n + 1);
        for (j, c) in coef.iter().enumerate() {
            let s = j as f64 * ds;
            nodes.push(if j == n { t_max } else { map(s) });
            weights.push(c * dmap(s) * ds);
        }
        RealGrid::new(nodes, weights)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Index of the node closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        match self.nodes.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.nodes.len() => self.nodes.len() - 1,
            Err(i) => {
                if (x - self.nodes[i - 1]) <= (self.nodes[i] - x) {
                    i - 1
                } else {
                    i
                }
            }
        }
    }

    /// Coefficients `c` such that `sum_j c_j f_j` interpolates `f(x)` with a
    /// local cubic through the four nearest nodes.
    pub fn interpolation_row(&self, x: f64) -> Vec<(usize, f64)> {
        let n = self.nodes.len();
        let m = n.min(4);
        let i = self.nearest(x);
        let start = i.saturating_sub(m / 2).min(n - m);
        let idx: Vec<usize> = (start..start + m).collect();
        idx.iter()
            .map(|&j| {
                let mut l = 1.0;
                for &k in &idx {
                    if k != j {
                        l *= (x - self.nodes[k]) / (self.nodes[j] - self.nodes[k]);
                    }
                }
                (j, l)
            })
            .collect()
    }
}

/// Complex values sampled on a [`RealGrid`].
#[derive(Debug, Clone)]
pub struct ComplexSamples<'a> {
    pub grid: &'a RealGrid,
    pub values: Vec<Complex64>,
}

impl<'a> ComplexSamples<'a> {
    pub fn new(grid: &'a RealGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(ComplexSamples { grid, values })
    }

    pub fn from_fn(grid: &'a RealGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        ComplexSamples { grid, values }
    }

    pub fn from_fn_indexed(grid: &'a RealGrid, f: impl Fn(usize) -> Complex64) -> Self {
        let values = (0..grid.len()).map(f).collect();
        ComplexSamples { grid, values }
    }

    pub fn interpolate(&self, x: f64) -> Complex64 {
        self.grid
            .interpolation_row(x)
            .into_iter()
            .map(|(j, c)| self.values[j] * c)
            .sum()
    }
}

/// `sum_j w_j f_j`.
pub fn integrate_samples(f: &ComplexSamples<'_>) -> Complex64 {
    f.grid
        .weights()
        .iter()
        .zip(&f.values)
        .map(|(w, v)| v * *w)
        .sum()
}
