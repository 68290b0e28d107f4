//! Inverse problem on the half-axes.
//!
//! Scattering data enter through their values on the six rays
//! `lambda = -i tau zeta_k` ("in") and `lambda = +i tau zeta_k` ("out"),
//! sampled on a common graded `tau` grid. The right problem reads the
//! `zeta1/in` and `zeta2/in` rays, the left problem the three "out" rays.

mod kernels;
mod marchenko;
mod recover;

pub use kernels::{jump_kernels_left, jump_kernels_right, JumpKernels};
pub use marchenko::{
    eval_phi0, eval_psi0, solve_marchenko_left, solve_marchenko_right, MarchenkoOptions,
    MarchenkoUnknowns, RegularPartForm, POLE_EXCLUSION,
};
pub use recover::{
    calibrate_constants, differentiate, fit_leading, primitives, recover_left, recover_right,
    Calibration, ConversionConstants, FitOptions, RecoveredPotentials,
};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::jost::{jost_left, jost_right, JostOptions, Side};
use crate::numerics::RealGrid;
use crate::potential::PotentialPair;
use crate::rootsys::zeta;
use crate::scatter::{
    locate_bound_states, scattering_coefficients, transition_matrix, BoundStateOptions, BoundStateReport,
    BoundStateSet, ScatteringCoeffs,
};
use crate::{Error, Result};

/// Default upper end of the `tau` grid.
pub fn default_t_max(a: f64) -> f64 {
    10.0 * a.max(1.0)
}

/// Default number of `tau` intervals.
pub const DEFAULT_N_TAU: usize = 96;

/// Orientation of a sampling ray: `In` is `-i tau zeta_k`, `Out` is
/// `+i tau zeta_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RayOrientation {
    In,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ray {
    pub k: usize,
    pub orientation: RayOrientation,
}

impl Ray {
    pub const fn new(k: usize, orientation: RayOrientation) -> Self {
        Ray { k, orientation }
    }

    pub fn all() -> [Ray; 6] {
        use RayOrientation::*;
        [
            Ray::new(0, In),
            Ray::new(1, In),
            Ray::new(2, In),
            Ray::new(0, Out),
            Ray::new(1, Out),
            Ray::new(2, Out),
        ]
    }

    pub fn lambda(&self, tau: f64) -> Complex64 {
        let s = match self.orientation {
            RayOrientation::In => -1.0,
            RayOrientation::Out => 1.0,
        };
        Complex64::new(0.0, s * tau) * zeta(self.k)
    }

    /// Label used in scattering files, e.g. `zeta1/in`.
    pub fn label(&self) -> String {
        let o = match self.orientation {
            RayOrientation::In => "in",
            RayOrientation::Out => "out",
        };
        format!("zeta{}/{}", self.k, o)
    }

    pub fn parse(label: &str) -> Option<Ray> {
        let (z, o) = label.split_once('/')?;
        let k = match z {
            "zeta0" => 0,
            "zeta1" => 1,
            "zeta2" => 2,
            _ => return None,
        };
        let orientation = match o {
            "in" => RayOrientation::In,
            "out" => RayOrientation::Out,
            _ => return None,
        };
        Some(Ray::new(k, orientation))
    }
}

/// Rays read by the right problem.
pub const RIGHT_RAYS: [Ray; 2] = [Ray::new(1, RayOrientation::In), Ray::new(2, RayOrientation::In)];
/// Rays read by the left problem.
pub const LEFT_RAYS: [Ray; 3] = [
    Ray::new(0, RayOrientation::Out),
    Ray::new(1, RayOrientation::Out),
    Ray::new(2, RayOrientation::Out),
];

/// Scattering coefficients on a set of rays, one entry per `tau` node.
///
/// `tau = 0` is not an admissible spectral point, so the entry at the first
/// node is a quadratic extrapolation from the next three.
#[derive(Debug, Clone)]
pub struct RayData {
    tau_grid: RealGrid,
    rays: Vec<(Ray, Vec<ScatteringCoeffs>)>,
}

impl RayData {
    pub fn new(tau_grid: RealGrid, rays: Vec<(Ray, Vec<ScatteringCoeffs>)>) -> Result<Self> {
        if tau_grid.len() < 4 || tau_grid.first() != 0.0 {
            return Err(Error::InvalidArgument(
                "ray data need a tau grid starting at 0 with at least 4 nodes".into(),
            ));
        }
        for (ray, c) in &rays {
            if c.len() != tau_grid.len() {
                return Err(Error::InvalidArgument(format!(
                    "ray {} has {} samples for {} tau nodes",
                    ray.label(),
                    c.len(),
                    tau_grid.len()
                )));
            }
        }
        Ok(RayData { tau_grid, rays })
    }

    pub fn tau_grid(&self) -> &RealGrid {
        &self.tau_grid
    }

    pub fn rays(&self) -> &[(Ray, Vec<ScatteringCoeffs>)] {
        &self.rays
    }

    pub fn get(&self, ray: Ray) -> Result<&[ScatteringCoeffs]> {
        self.rays
            .iter()
            .find(|(r, _)| *r == ray)
            .map(|(_, c)| c.as_slice())
            .ok_or_else(|| Error::InvalidArgument(format!("missing samples on ray {}", ray.label())))
    }
}

fn extrapolate(t: &[f64], f: [Complex64; 3], t0: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        let mut l = 1.0;
        for j in 0..3 {
            if j != i {
                l *= (t0 - t[j]) / (t[i] - t[j]);
            }
        }
        acc += f[i] * l;
    }
    acc
}

fn extrapolate_coeffs(t: &[f64], c: &[ScatteringCoeffs]) -> ScatteringCoeffs {
    let e = |g: fn(&ScatteringCoeffs) -> Complex64| extrapolate(t, [g(&c[0]), g(&c[1]), g(&c[2])], 0.0);
    ScatteringCoeffs {
        lambda: Complex64::new(0.0, 0.0),
        r0: e(|s| s.r0),
        s1: e(|s| s.s1),
        s2: e(|s| s.s2),
        r0_dual: e(|s| s.r0_dual),
        s1_dual: e(|s| s.s1_dual),
        s2_dual: e(|s| s.s2_dual),
    }
}

/// Scattering coefficients at one spectral point.
pub fn coefficients_at(lambda: Complex64, pot: &PotentialPair, opts: &JostOptions) -> Result<ScatteringCoeffs> {
    let l = jost_left(lambda, pot, opts)?;
    let r = jost_right(lambda, pot, opts)?;
    debug_assert_eq!(r.side(), Side::PlusInfinity);
    scattering_coefficients(&transition_matrix(&l, &r)?)
}

/// `t_00(lambda)` of `pot`.
pub fn t00_at(lambda: Complex64, pot: &PotentialPair, opts: &JostOptions) -> Result<Complex64> {
    let l = jost_left(lambda, pot, opts)?;
    let r = jost_right(lambda, pot, opts)?;
    Ok(transition_matrix(&l, &r)?.get(0, 0))
}

/// Locates the zeros of `t_00` of `pot` in the region described by `bopts`.
pub fn find_bound_states(
    pot: &PotentialPair,
    opts: &JostOptions,
    bopts: &BoundStateOptions,
) -> Result<BoundStateReport> {
    let f = |l: Complex64| t00_at(l, pot, opts);
    locate_bound_states(&f, bopts)
}

/// Samples the scattering coefficients of `pot` on `rays` at every node of
/// `tau_grid` (which must start at 0).
pub fn sample_rays(
    pot: &PotentialPair,
    tau_grid: &RealGrid,
    rays: &[Ray],
    opts: &JostOptions,
) -> Result<RayData> {
    let t = tau_grid.nodes();
    let jobs: Vec<(usize, usize)> = (0..rays.len())
        .flat_map(|r| (1..t.len()).map(move |j| (r, j)))
        .collect();
    let values: Vec<Result<ScatteringCoeffs>> = jobs
        .par_iter()
        .map(|&(r, j)| coefficients_at(rays[r].lambda(t[j]), pot, opts))
        .collect();
    let mut it = values.into_iter();
    let mut out = Vec::with_capacity(rays.len());
    for ray in rays {
        let mut c = Vec::with_capacity(t.len());
        for _ in 1..t.len() {
            c.push(it.next().expect("one value per job")?);
        }
        let first = extrapolate_coeffs(&t[1..4], &c[..3]);
        c.insert(0, first);
        out.push((*ray, c));
    }
    RayData::new(tau_grid.clone(), out)
}

/// Ray data of a reflectionless configuration: `r0 = 1` and every `s`
/// coefficient zero.
pub fn reflectionless_ray_data(tau_grid: &RealGrid, rays: &[Ray]) -> Result<RayData> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let out = rays
        .iter()
        .map(|ray| {
            let c = tau_grid
                .nodes()
                .iter()
                .map(|&tau| ScatteringCoeffs {
                    lambda: ray.lambda(tau),
                    r0: one,
                    s1: zero,
                    s2: zero,
                    r0_dual: one,
                    s1_dual: zero,
                    s2_dual: zero,
                })
                .collect();
            (*ray, c)
        })
        .collect();
    RayData::new(tau_grid.clone(), out)
}

/// Solves the right (`x >= 0`) or dual (`x <= 0`) system at every point of
/// the uniformly spaced `xs` and recovers the potentials with the reference
/// conversion constants.
pub fn recover_half_line(
    data: &RayData,
    bound: &BoundStateSet,
    side: Side,
    xs: &[f64],
    fit: &FitOptions,
    opts: &MarchenkoOptions,
) -> Result<RecoveredPotentials> {
    let sols = xs
        .par_iter()
        .map(|&x| match side {
            Side::PlusInfinity => {
                let k = jump_kernels_right(data, x)?;
                Ok((solve_marchenko_right(&k, bound, x, opts)?, k))
            }
            Side::MinusInfinity => {
                let k = jump_kernels_left(data, x)?;
                Ok((solve_marchenko_left(&k, bound, x, opts)?, k))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let constants = ConversionConstants::reference(side);
    match side {
        Side::PlusInfinity => recover_right(&sols, fit, &constants),
        Side::MinusInfinity => recover_left(&sols, fit, &constants),
    }
}
