use num_complex::Complex64;

use super::{RayData, LEFT_RAYS, RIGHT_RAYS};
use crate::jost::Side;
use crate::numerics::RealGrid;
use crate::rootsys::zeta;
use crate::Result;

/// The four jump kernels at a fixed `x`, sampled on the `tau` grid at the
/// arguments used by the Cauchy integrals.
///
/// Right side (`x >= 0`): `k[0] = p1(-i tau zeta1)`, `k[1] = p2(-i tau zeta2)`,
/// `k[2] = p3(-i tau)`, `k[3] = p4(-i tau)`.
/// Left side (`x <= 0`): `k[0] = p1(i tau zeta2)`, `k[1] = p2(i tau zeta1)`,
/// `k[2] = p3(i tau)`, `k[3] = p4(i tau)` built from the dual coefficients.
#[derive(Debug, Clone)]
pub struct JumpKernels {
    pub side: Side,
    pub x: f64,
    pub tau_grid: RealGrid,
    pub k: [Vec<Complex64>; 4],
}

impl JumpKernels {
    /// All four kernels identically zero.
    pub fn zero(side: Side, tau_grid: &RealGrid, x: f64) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); tau_grid.len()];
        JumpKernels {
            side,
            x,
            tau_grid: tau_grid.clone(),
            k: [z.clone(), z.clone(), z.clone(), z],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.k.iter().flatten().all(|v| *v == Complex64::new(0.0, 0.0))
    }
}

/// Kernels of the right problem from `s1` on `zeta1/in` and `s2` on
/// `zeta2/in`:
///
/// ```text
/// p1(l) = zeta1 s2(l zeta1) e^{-i l zeta1 x}
/// p2(l) = -zeta2 s1(l zeta2) e^{-i l zeta2 x}
/// p3(l) = e^{i l zeta2 x} zeta1 (s1(l zeta1) e^{i l zeta1 x} - e^{i l zeta2 x})
/// p4(l) = e^{i l zeta1 x} zeta2 (e^{i l zeta1 x} - s2(l zeta2) e^{i l zeta2 x})
/// ```
pub fn jump_kernels_right(data: &RayData, x: f64) -> Result<JumpKernels> {
    let s1 = data.get(RIGHT_RAYS[0])?;
    let s2 = data.get(RIGHT_RAYS[1])?;
    let (z1, z2) = (zeta(1), zeta(2));
    let tau = data.tau_grid().nodes();
    let n = tau.len();
    let mut k: [Vec<Complex64>; 4] = Default::default();
    for j in 0..n {
        let t = tau[j];
        // s1(-i t zeta1) and s2(-i t zeta2).
        let a1 = s1[j].s1;
        let a2 = s2[j].s2;
        let e1 = (t * z1 * x).exp();
        let e2 = (t * z2 * x).exp();
        k[0].push(z1 * a2 * (-t * z2 * x).exp());
        k[1].push(-z2 * a1 * (-t * z1 * x).exp());
        k[2].push(e2 * z1 * (a1 * e1 - e2));
        k[3].push(e1 * z2 * (e1 - a2 * e2));
    }
    Ok(JumpKernels {
        side: Side::PlusInfinity,
        x,
        tau_grid: data.tau_grid().clone(),
        k,
    })
}

/// Kernels of the left problem from the dual coefficients on the "out" rays:
///
/// ```text
/// p1(l) = zeta1 s2~(l zeta1) e^{i l (1 - zeta1) x}
/// p2(l) = zeta2 s1~(l zeta2) e^{i l (1 - zeta2) x}
/// p3(l) = e^{i l zeta1 x} (e^{i l zeta1 x} - zeta1 s1~(l zeta1) e^{i l zeta2 x})
/// p4(l) = e^{i l zeta2 x} (zeta2 s2~(l zeta2) e^{i l zeta1 x} - e^{i l zeta2 x})
/// ```
pub fn jump_kernels_left(data: &RayData, x: f64) -> Result<JumpKernels> {
    let r0 = data.get(LEFT_RAYS[0])?;
    let r1 = data.get(LEFT_RAYS[1])?;
    let r2 = data.get(LEFT_RAYS[2])?;
    let (z1, z2) = (zeta(1), zeta(2));
    let one = Complex64::new(1.0, 0.0);
    let tau = data.tau_grid().nodes();
    let mut k: [Vec<Complex64>; 4] = Default::default();
    for (j, &t) in tau.iter().enumerate() {
        // i l x for l = i t: -t x.
        let e1 = (-t * z1 * x).exp();
        let e2 = (-t * z2 * x).exp();
        // p1 at i t zeta2: argument l zeta1 = i t; exponent i l (1 - zeta1) x.
        k[0].push(z1 * r0[j].s2_dual * (-t * z2 * (one - z1) * x).exp());
        k[1].push(z2 * r0[j].s1_dual * (-t * z1 * (one - z2) * x).exp());
        k[2].push(e1 * (e1 - z1 * r1[j].s1_dual * e2));
        k[3].push(e2 * (z2 * r2[j].s2_dual * e1 - e2));
    }
    Ok(JumpKernels {
        side: Side::MinusInfinity,
        x,
        tau_grid: data.tau_grid().clone(),
        k,
    })
}
