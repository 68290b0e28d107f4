//! Bound states as double zeros of `t_00` in the sector `Omega_0^-`.
//!
//! Zeros are isolated with the argument principle on annular-sector cells,
//! using phase-tracked contour samples, and polished with Newton's method on
//! the derivative (a double zero is a simple zero of `t_00'`).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::{Error, Result};

/// Function whose zeros are sought.
pub type ZeroTarget<'a> = dyn Fn(Complex64) -> Result<Complex64> + Sync + 'a;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundStateOptions {
    /// Outer radius `R` of the truncated sector.
    pub radius: f64,
    /// Inner radius; keeps the contour away from `lambda = 0`.
    pub inner_radius: f64,
    /// Angular extent in radians (defaults to `Omega_0^-`, 30 to 150 degrees).
    pub angle_min: f64,
    pub angle_max: f64,
    /// Cells smaller than this (absolute) are not split further.
    pub min_cell: f64,
    pub max_depth: usize,
    /// Upper bound on the number of reported bound states.
    pub max_count: usize,
    /// Zeros closer than this to the sector boundary are flagged ambiguous.
    pub boundary_tol: f64,
    /// Angular tolerance (radians) for assigning a zero to a ray family.
    pub ray_tol: f64,
    /// Initial samples per contour edge.
    pub edge_samples: usize,
    /// Largest phase change accepted between neighbouring contour samples.
    pub max_phase_step: f64,
}

impl BoundStateOptions {
    pub fn with_radius(radius: f64) -> Self {
        BoundStateOptions {
            radius,
            inner_radius: 1e-3 * radius,
            angle_min: PI / 6.0,
            angle_max: 5.0 * PI / 6.0,
            min_cell: 1e-4 * radius,
            max_depth: 24,
            max_count: 64,
            boundary_tol: 1e-6,
            ray_tol: 1e-3,
            edge_samples: 24,
            max_phase_step: 0.4,
        }
    }

    /// Defaults for decay rate `a`: `R = a/2`.
    pub fn for_decay_rate(a: f64) -> Self {
        Self::with_radius(0.5 * a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    /// `lambda = mu zeta_1`, `mu > 0`.
    Mu,
    /// `lambda = nu zeta_2`, `nu < 0`.
    Nu,
    /// A zero on neither ray.
    OffRay,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub kind: PointKind,
    /// `mu`, `nu`, or `|lambda|` for off-ray zeros.
    pub value: f64,
    pub lambda: Complex64,
    /// Winding number on a small circle around the zero.
    pub winding: i64,
    /// `|f(lambda)|` at the refined location.
    pub residual: f64,
}

/// The bound-state data entering the inverse problem.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundStateSet {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
}

impl BoundStateSet {
    pub fn new(mut mu: Vec<f64>, mut nu: Vec<f64>) -> Result<Self> {
        if mu.iter().any(|m| !(*m > 0.0)) || nu.iter().any(|n| !(*n < 0.0)) {
            return Err(Error::InvalidArgument(
                "bound states need mu > 0 and nu < 0".into(),
            ));
        }
        mu.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nu.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(BoundStateSet { mu, nu })
    }

    pub fn empty() -> Self {
        BoundStateSet::default()
    }

    pub fn len(&self) -> usize {
        self.mu.len() + self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundStateReport {
    pub set: BoundStateSet,
    pub points: Vec<BoundPoint>,
    /// Winding number of the target over the boundary of the whole search
    /// region.
    pub total_winding: i64,
    /// Cells whose winding was odd (or negative) at the resolution limit:
    /// the double-zero assumption fails there.
    pub multiplicity_violations: Vec<Complex64>,
    /// Zeros within `boundary_tol` of the search-region boundary.
    pub ambiguous: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    r0: f64,
    r1: f64,
    t0: f64,
    t1: f64,
    depth: usize,
}

impl Cell {
    fn size(&self) -> f64 {
        (self.r1 - self.r0).max(self.r1 * (self.t1 - self.t0))
    }
}

struct Evaluator<'a> {
    f: &'a ZeroTarget<'a>,
    cache: Mutex<HashMap<(u64, u64), Complex64>>,
}

impl Evaluator<'_> {
    fn eval_many(&self, zs: &[Complex64]) -> Result<Vec<Complex64>> {
        let todo: Vec<Complex64> = {
            let cache = self.cache.lock().unwrap();
            zs.iter()
                .filter(|z| !cache.contains_key(&(z.re.to_bits(), z.im.to_bits())))
                .cloned()
                .collect()
        };
        let fresh: Vec<Result<Complex64>> = todo.par_iter().map(|z| (self.f)(*z)).collect();
        let mut cache = self.cache.lock().unwrap();
        for (z, v) in todo.iter().zip(fresh) {
            cache.insert((z.re.to_bits(), z.im.to_bits()), v?);
        }
        Ok(zs
            .iter()
            .map(|z| cache[&(z.re.to_bits(), z.im.to_bits())])
            .collect())
    }

    fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_many(&[z])?[0])
    }
}

/// Result of integrating `d log f` along a closed contour.
struct ContourData {
    /// Total phase change / 2 pi.
    winding: f64,
    /// `(1/2 pi i) oint z dlog f` and `(1/2 pi i) oint z^2 dlog f`.
    m1: Complex64,
    m2: Complex64,
    min_abs: f64,
    min_at: Complex64,
    resolved: bool,
}

/// Traces a closed path given by `edges` (each a map `[0,1] -> C`).
fn trace(
    ev: &Evaluator<'_>,
    edges: &[&(dyn Fn(f64) -> Complex64 + Sync)],
    opts: &BoundStateOptions,
) -> Result<ContourData> {
    let mut total = ContourData {
        winding: 0.0,
        m1: Complex64::new(0.0, 0.0),
        m2: Complex64::new(0.0, 0.0),
        min_abs: f64::INFINITY,
        min_at: Complex64::new(0.0, 0.0),
        resolved: true,
    };
    let mut phase = 0.0;
    for edge in edges {
        let n0 = opts.edge_samples.max(2);
        let mut s: Vec<f64> = (0..=n0).map(|j| j as f64 / n0 as f64).collect();
        let mut z: Vec<Complex64> = s.iter().map(|&t| edge(t)).collect();
        let mut fz = ev.eval_many(&z)?;
        for _ in 0..20 {
            let mut insert = Vec::new();
            for j in 0..s.len() - 1 {
                let d = (fz[j + 1] / fz[j]).arg().abs();
                let ratio = (fz[j + 1].norm() / fz[j].norm()).ln().abs();
                if d > opts.max_phase_step || ratio > 1.0 {
                    insert.push(j);
                }
            }
            if insert.is_empty() {
                break;
            }
            let mids: Vec<f64> = insert.iter().map(|&j| 0.5 * (s[j] + s[j + 1])).collect();
            let zm: Vec<Complex64> = mids.iter().map(|&t| edge(t)).collect();
            let fm = ev.eval_many(&zm)?;
            for (k, &j) in insert.iter().enumerate().rev() {
                s.insert(j + 1, mids[k]);
                z.insert(j + 1, zm[k]);
                fz.insert(j + 1, fm[k]);
            }
            if s.windows(2).any(|w| w[1] - w[0] < 1e-12) {
                total.resolved = false;
                break;
            }
        }
        for j in 0..s.len() {
            let a = fz[j].norm();
            if a < total.min_abs {
                total.min_abs = a;
                total.min_at = z[j];
            }
            if !(a > 0.0) || !a.is_finite() {
                total.resolved = false;
            }
        }
        for j in 0..s.len() - 1 {
            let dphi = (fz[j + 1] / fz[j]).arg();
            if dphi.abs() > 2.0 * opts.max_phase_step {
                total.resolved = false;
            }
            let dlog = Complex64::new((fz[j + 1].norm() / fz[j].norm()).ln(), dphi);
            let zm = 0.5 * (z[j] + z[j + 1]);
            // z^2 integrated exactly across the chord
            let z2 = (z[j] * z[j] + z[j] * z[j + 1] + z[j + 1] * z[j + 1]) / 3.0;
            total.m1 += zm * dlog;
            total.m2 += z2 * dlog;
            phase += dphi;
        }
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    total.winding = phase / (2.0 * PI);
    total.m1 /= two_pi_i;
    total.m2 /= two_pi_i;
    Ok(total)
}

fn trace_cell(ev: &Evaluator<'_>, c: &Cell, opts: &BoundStateOptions) -> Result<ContourData> {
    let polar = |r: f64, t: f64| Complex64::from_polar(r, t);
    let outer = |s: f64| polar(c.r1, c.t0 + s * (c.t1 - c.t0));
    let left = |s: f64| polar(c.r1 + s * (c.r0 - c.r1), c.t1);
    let inner = |s: f64| polar(c.r0, c.t1 + s * (c.t0 - c.t1));
    let right = |s: f64| polar(c.r0 + s * (c.r1 - c.r0), c.t0);
    trace(ev, &[&outer, &left, &inner, &right], opts)
}

fn trace_circle(ev: &Evaluator<'_>, z0: Complex64, rho: f64, opts: &BoundStateOptions) -> Result<ContourData> {
    let circle = |s: f64| z0 + Complex64::from_polar(rho, 2.0 * PI * s);
    trace(ev, &[&circle], opts)
}

/// Newton iteration on `f'` with centred differences.
fn polish_double_zero(ev: &Evaluator<'_>, z0: Complex64, scale: f64) -> Result<Complex64> {
    let delta = 1e-4 * scale.max(1e-6);
    let mut z = z0;
    for _ in 0..12 {
        let fp = ev.eval(z + delta)?;
        let fm = ev.eval(z - delta)?;
        let f0 = ev.eval(z)?;
        let d1 = (fp - fm) / (2.0 * delta);
        let d2 = (fp - 2.0 * f0 + fm) / (delta * delta);
        if d2.norm() == 0.0 || !d2.is_finite() {
            break;
        }
        let step = d1 / d2;
        z -= step;
        if step.norm() <= 1e-13 * z.norm().max(scale) {
            break;
        }
        if step.norm() > scale {
            return Ok(z0);
        }
    }
    Ok(z)
}

/// Finds all zeros of `f` in the truncated sector described by `opts`.
pub fn locate_bound_states(f: &ZeroTarget<'_>, opts: &BoundStateOptions) -> Result<BoundStateReport> {
    if !(opts.radius > opts.inner_radius) || !(opts.inner_radius > 0.0) || !(opts.angle_max > opts.angle_min) {
        return Err(Error::InvalidArgument("degenerate bound-state search region".into()));
    }
    let ev = Evaluator {
        f,
        cache: Mutex::new(HashMap::new()),
    };
    let mut report = BoundStateReport::default();

    // shrink the region slightly if its boundary runs through a zero
    let mut root = Cell {
        r0: opts.inner_radius,
        r1: opts.radius,
        t0: opts.angle_min,
        t1: opts.angle_max,
        depth: 0,
    };
    let mut top = trace_cell(&ev, &root, opts)?;
    let mut attempts = 0;
    while !top.resolved && attempts < 4 {
        report.ambiguous.push(top.min_at);
        let eps = 1e-4 * (attempts + 1) as f64;
        root.r1 = opts.radius * (1.0 - eps);
        root.r0 = opts.inner_radius * (1.0 + eps);
        root.t0 = opts.angle_min + eps;
        root.t1 = opts.angle_max - eps;
        top = trace_cell(&ev, &root, opts)?;
        attempts += 1;
    }
    if !top.resolved {
        return Err(Error::NonConvergence(
            "could not trace the boundary of the bound-state search region".into(),
        ));
    }
    report.total_winding = top.winding.round() as i64;

    let mut work = vec![(root, top)];
    let mut found: Vec<(Complex64, f64)> = Vec::new();
    while let Some((cell, data)) = work.pop() {
        let w = data.winding.round() as i64;
        let well_defined = data.resolved && (data.winding - w as f64).abs() < 0.05;
        if well_defined && w == 0 {
            continue;
        }
        let small = cell.size() <= opts.min_cell || cell.depth >= opts.max_depth;
        if well_defined && w == 2 {
            let c = data.m1 / 2.0;
            let spread = (data.m2 / 2.0 - c * c).norm().sqrt() * 2.0;
            if spread <= 0.05 * cell.size() || small {
                found.push((c, cell.size()));
                continue;
            }
        }
        if small {
            if !well_defined || w % 2 != 0 || w < 0 {
                report.multiplicity_violations.push(data.m1 / (w.max(1) as f64));
            } else {
                // an even cluster that cannot be separated further
                found.push((data.m1 / w as f64, cell.size()));
            }
            continue;
        }
        // split unevenly so that cuts avoid the symmetric rays
        let mut children = Vec::new();
        for fr in [0.47, 0.43, 0.53] {
            let rm = cell.r0 + fr * (cell.r1 - cell.r0);
            let tm = cell.t0 + (1.0 - fr) * (cell.t1 - cell.t0);
            let quads = [
                (cell.r0, rm, cell.t0, tm),
                (cell.r0, rm, tm, cell.t1),
                (rm, cell.r1, cell.t0, tm),
                (rm, cell.r1, tm, cell.t1),
            ];
            let mut out = Vec::new();
            let mut ok = true;
            for (r0, r1, t0, t1) in quads {
                let child = Cell {
                    r0,
                    r1,
                    t0,
                    t1,
                    depth: cell.depth + 1,
                };
                let d = trace_cell(&ev, &child, opts)?;
                if !d.resolved {
                    ok = false;
                    break;
                }
                out.push((child, d));
            }
            if ok {
                children = out;
                break;
            }
        }
        if children.is_empty() {
            report.multiplicity_violations.push(data.min_at);
            continue;
        }
        work.extend(children);
        if found.len() > opts.max_count {
            return Err(Error::NonConvergence("too many bound-state candidates".into()));
        }
    }

    let ray_mu = 2.0 * PI / 3.0;
    let ray_nu = PI / 3.0;
    for (c, size) in found {
        let z = polish_double_zero(&ev, c, size)?;
        let z = if (z - c).norm() <= 2.0 * size { z } else { c };
        let residual = ev.eval(z)?.norm();
        let rho = (0.25 * size).max(1e-6 * opts.radius).min(0.1 * z.norm());
        let circle = trace_circle(&ev, z, rho, opts)?;
        let winding = circle.winding.round() as i64;
        let r = z.norm();
        let t = z.arg();
        let kind = if (t - ray_mu).abs() <= opts.ray_tol {
            PointKind::Mu
        } else if (t - ray_nu).abs() <= opts.ray_tol {
            PointKind::Nu
        } else {
            PointKind::OffRay
        };
        let dist_boundary = (opts.radius - r)
            .abs()
            .min(r * (t - opts.angle_min).abs())
            .min(r * (opts.angle_max - t).abs());
        if dist_boundary < opts.boundary_tol {
            report.ambiguous.push(z);
        }
        if winding % 2 != 0 {
            report.multiplicity_violations.push(z);
        }
        let value = match kind {
            PointKind::Mu => r,
            PointKind::Nu => -r,
            PointKind::OffRay => r,
        };
        match kind {
            PointKind::Mu => report.set.mu.push(value),
            PointKind::Nu => report.set.nu.push(value),
            PointKind::OffRay => {}
        }
        report.points.push(BoundPoint {
            kind,
            value,
            lambda: z,
            winding,
            residual,
        });
    }
    report.set.mu.sort_by(|a, b| a.partial_cmp(b).unwrap());
    report.set.nu.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if report.set.len() > opts.max_count {
        return Err(Error::NonConvergence("bound-state count exceeds the configured cap".into()));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::zeta;

    #[test]
    fn constant_function_has_no_zeros() {
        let f = |_z: Complex64| Ok(Complex64::new(1.0, 0.0));
        let r = locate_bound_states(&f, &BoundStateOptions::with_radius(0.5)).unwrap();
        assert!(r.set.is_empty());
        assert_eq!(r.total_winding, 0);
    }

    #[test]
    fn planted_surrogate() {
        let (mu1, nu1) = (0.5, -0.6);
        let f = move |l: Complex64| {
            let a = l - zeta(1) * mu1;
            let b = l - zeta(2) * nu1;
            Ok(a * a * b * b / (l.powi(4) + 1.0))
        };
        let r = locate_bound_states(&f, &BoundStateOptions::with_radius(0.9)).unwrap();
        assert_eq!(r.total_winding, 4);
        assert_eq!(r.set.mu.len(), 1);
        assert_eq!(r.set.nu.len(), 1);
        assert!((r.set.mu[0] - mu1).abs() < 1e-8, "{:?}", r.set);
        assert!((r.set.nu[0] - nu1).abs() < 1e-8, "{:?}", r.set);
        for p in &r.points {
            assert_eq!(p.winding, 2);
            assert!(p.residual <= 1e-8);
        }
        assert!(r.multiplicity_violations.is_empty());
    }

    #[test]
    fn simple_zero_is_flagged() {
        let z0 = Complex64::from_polar(0.3, 1.2);
        let f = move |l: Complex64| Ok(l - z0);
        let r = locate_bound_states(&f, &BoundStateOptions::with_radius(0.5)).unwrap();
        assert_eq!(r.total_winding, 1);
        assert!(!r.multiplicity_violations.is_empty());
    }
}
