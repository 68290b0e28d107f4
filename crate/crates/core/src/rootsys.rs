//! Cube roots of unity, the generalized trigonometric functions `s_p` and the
//! sector geometry of the spectral plane.
//!
//! The functions
//!
//! ```text
//! s_p(z) = 1/3 * sum_k zeta_k^{-p} exp(z * zeta_k),   p = 0, 1, 2
//! ```
//!
//! form the fundamental system of `y''' = y` normalised at the origin by
//! `s_p^{(n)}(0) = [n == p]`. They play the role of `cos`/`sin` for the
//! third-order problem.
//!
//! The plane is cut by six rays `i*l_{zeta_k}` (pointing away from the
//! origin) and `i*l^_{zeta_k}` (pointing towards it). The three open sectors
//! `Omega_k` are 120 degrees wide and bounded by the `i*l_{zeta_k}` rays; their
//! negatives `Omega_k^-` are bounded by the `i*l^_{zeta_k}` rays. Every open
//! 60 degree wedge between consecutive rays therefore lies in exactly one
//! `Omega_k` and exactly one `Omega_j^-`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// `zeta_0 = 1`, `zeta_1 = -1/2 + i*sqrt(3)/2`, `zeta_2 = conj(zeta_1)`.
pub const ZETA: [Complex64; 3] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(-0.5, 0.5 * SQRT3),
    Complex64::new(-0.5, -0.5 * SQRT3),
];

/// The roots of `z^3 = 1`, bundled with the handful of identities that the
/// rest of the crate leans on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnityRoots {
    pub zeta0: Complex64,
    pub zeta1: Complex64,
    pub zeta2: Complex64,
}

impl Default for UnityRoots {
    fn default() -> Self {
        UnityRoots {
            zeta0: ZETA[0],
            zeta1: ZETA[1],
            zeta2: ZETA[2],
        }
    }
}

impl UnityRoots {
    pub fn as_array(&self) -> [Complex64; 3] {
        [self.zeta0, self.zeta1, self.zeta2]
    }

    /// `zeta_k^{-p}`; since `zeta_k^3 = 1` this is `zeta_{(-k*p) mod 3}`.
    pub fn inv_pow(k: usize, p: usize) -> Complex64 {
        ZETA[(3 - (k * p) % 3) % 3]
    }
}

/// `zeta_k^{-p}` for `k, p` in `0..3`.
#[inline]
pub fn zeta_inv_pow(k: usize, p: usize) -> Complex64 {
    UnityRoots::inv_pow(k, p)
}

/// `zeta_{k mod 3}`.
#[inline]
pub fn zeta(k: usize) -> Complex64 {
    ZETA[k % 3]
}

/// Evaluates `s_p(z)` by direct three-term summation.
///
/// Panics if `p > 2`.
pub fn sp_eval(p: usize, z: Complex64) -> Complex64 {
    assert!(p < 3, "s_p is defined for p in 0..=2, got {p}");
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..3 {
        acc += zeta_inv_pow(k, p) * (z * ZETA[k]).exp();
    }
    acc / 3.0
}

/// `s_p(z)` computed from the Taylor series `sum_{n = p mod 3} z^n / n!` when
/// `|z| < 1`, and by direct summation otherwise.
///
/// Near the origin the three exponentials in the direct sum cancel down to
/// `z^p / p!`, which costs `s_1` and `s_2` most of their relative accuracy.
/// Volterra kernels divide `s_2` by `lambda^2`, so this matters for small
/// spectral parameters.
pub fn sp_eval_stable(p: usize, z: Complex64) -> Complex64 {
    assert!(p < 3, "s_p is defined for p in 0..=2, got {p}");
    if z.norm() >= 1.0 {
        return sp_eval(p, z);
    }
    let z3 = z * z * z;
    let mut term = match p {
        0 => Complex64::new(1.0, 0.0),
        1 => z,
        _ => z * z * 0.5,
    };
    let mut acc = term;
    let mut n = p;
    // |z| < 1, so 14 terms (degree ~ 42) is far past double precision.
    for _ in 0..14 {
        term *= z3 / (((n + 1) * (n + 2) * (n + 3)) as f64);
        n += 3;
        acc += term;
        if term.norm() < 1e-18 * acc.norm().max(1e-300) {
            break;
        }
    }
    acc
}

/// `|s_0^3 + s_1^3 + s_2^3 - 3 s_0 s_1 s_2 - 1|` at `z`.
///
/// The polynomial is evaluated in double-double arithmetic: at `|z| = 5` the
/// single cubes are of order `1e5`, so plain `f64` evaluation would bury
/// the residual in rounding.
pub fn cubic_identity_residual(z: Complex64) -> f64 {
    let s: Vec<dd::C> = (0..3).map(|p| dd::C::from(sp_eval(p, z))).collect();
    let cube = |c: dd::C| c.mul(c).mul(c);
    let v = cube(s[0])
        .add(cube(s[1]))
        .add(cube(s[2]))
        .sub(s[0].mul(s[1]).mul(s[2]).scale(3.0))
        .sub(dd::C::from(Complex64::new(1.0, 0.0)));
    v.value().norm()
}

mod dd {
    use num_complex::Complex64;

    #[derive(Clone, Copy)]
    pub struct D(f64, f64);

    fn two_sum(a: f64, b: f64) -> D {
        let s = a + b;
        let bb = s - a;
        D(s, (a - (s - bb)) + (b - bb))
    }

    impl D {
        fn add(self, o: D) -> D {
            let s = two_sum(self.0, o.0);
            let t = two_sum(s.1, self.1 + o.1);
            let u = two_sum(s.0, t.0);
            two_sum(u.0, u.1 + t.1)
        }

        fn neg(self) -> D {
            D(-self.0, -self.1)
        }

        fn mul(self, o: D) -> D {
            let p = self.0 * o.0;
            let e = self.0.mul_add(o.0, -p);
            two_sum(p, e + self.0 * o.1 + self.1 * o.0)
        }
    }

    #[derive(Clone, Copy)]
    pub struct C(D, D);

    impl C {
        pub fn from(z: Complex64) -> C {
            C(D(z.re, 0.0), D(z.im, 0.0))
        }

        pub fn add(self, o: C) -> C {
            C(self.0.add(o.0), self.1.add(o.1))
        }

        pub fn sub(self, o: C) -> C {
            C(self.0.add(o.0.neg()), self.1.add(o.1.neg()))
        }

        pub fn mul(self, o: C) -> C {
            C(self.0.mul(o.0).add(self.1.mul(o.1).neg()), self.0.mul(o.1).add(self.1.mul(o.0)))
        }

        pub fn scale(self, k: f64) -> C {
            C(self.0.mul(D(k, 0.0)), self.1.mul(D(k, 0.0)))
        }

        pub fn value(self) -> Complex64 {
            Complex64::new(self.0 .0 + self.0 .1, self.1 .0 + self.1 .1)
        }
    }
}

/// Region label for a nonzero point of the spectral plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SectorLabel {
    /// Open 60 degree wedge, identified by the unique `Omega_k` and
    /// `Omega_j^-` that contain it.
    Wedge { omega: usize, omega_minus: usize },
    /// The ray `i*l_{zeta_k}` = `{ i t zeta_k : t > 0 }`.
    RayL(usize),
    /// The ray `i*l^_{zeta_k}` = `{ -i t zeta_k : t > 0 }`.
    RayLHat(usize),
}

impl SectorLabel {
    /// Whether the label lies in the open sector `Omega_k`, with the ray
    /// `i*l^_{zeta_k}` counted as part of it.
    pub fn in_omega(&self, k: usize) -> bool {
        match *self {
            SectorLabel::Wedge { omega, .. } => omega == k,
            SectorLabel::RayLHat(j) => omega_owning_hat_ray(j) == k,
            SectorLabel::RayL(_) => false,
        }
    }

    /// Whether the label lies in `Omega_k^-`, with the ray `i*l_{zeta_k}`
    /// (the negative of `i*l^_{zeta_k}`) counted as part of it.
    pub fn in_omega_minus(&self, k: usize) -> bool {
        match *self {
            SectorLabel::Wedge { omega_minus, .. } => omega_minus == k,
            SectorLabel::RayL(j) => omega_owning_hat_ray(j) == k,
            SectorLabel::RayLHat(_) => false,
        }
    }

    /// The label of `-lambda`.
    pub fn negated(&self) -> SectorLabel {
        match *self {
            SectorLabel::Wedge { omega, omega_minus } => SectorLabel::Wedge {
                omega: omega_minus,
                omega_minus: omega,
            },
            SectorLabel::RayL(k) => SectorLabel::RayLHat(k),
            SectorLabel::RayLHat(k) => SectorLabel::RayL(k),
        }
    }
}

// Omega_0 owns i*l^_{zeta_0}, Omega_1 owns i*l^_{zeta_2}, Omega_2 owns i*l^_{zeta_1}.
fn omega_owning_hat_ray(k: usize) -> usize {
    (3 - k) % 3
}

/// Angle of `z` in degrees, mapped to `[0, 360)`.
fn angle_deg(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re) * 180.0 / PI;
    if a < 0.0 {
        a + 360.0
    } else {
        a
    }
}

/// Classifies a nonzero `lambda` into its wedge or boundary ray.
///
/// Rays sit at 30 + 60*j degrees. The six wedges, counter-clockwise from
/// the positive real axis, are `(Omega_2, Omega_1^-)`, `(Omega_2, Omega_0^-)`,
/// `(Omega_1, Omega_0^-)`, `(Omega_1, Omega_2^-)`, `(Omega_0, Omega_2^-)`,
/// `(Omega_0, Omega_1^-)`.
pub fn classify_sector(lambda: Complex64) -> Result<SectorLabel> {
    if lambda.norm() == 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument(
            "sector classification needs a finite nonzero lambda".into(),
        ));
    }
    let ang = angle_deg(lambda);
    // Rays: 30 -> il^_{z1}, 90 -> il_{z0}, 150 -> il^_{z2},
    //       210 -> il_{z1}, 270 -> il^_{z0}, 330 -> il_{z2}.
    const RAYS: [(f64, SectorLabel); 6] = [
        (30.0, SectorLabel::RayLHat(1)),
        (90.0, SectorLabel::RayL(0)),
        (150.0, SectorLabel::RayLHat(2)),
        (210.0, SectorLabel::RayL(1)),
        (270.0, SectorLabel::RayLHat(0)),
        (330.0, SectorLabel::RayL(2)),
    ];
    for (deg, label) in RAYS {
        if (ang - deg).abs() < 1e-10 {
            return Ok(label);
        }
    }
    let shifted = (ang + 30.0) % 360.0;
    let wedge = (shifted / 60.0).floor() as usize % 6;
    const WEDGES: [(usize, usize); 6] = [(2, 1), (2, 0), (1, 0), (1, 2), (0, 2), (0, 1)];
    let (omega, omega_minus) = WEDGES[wedge];
    Ok(SectorLabel::Wedge { omega, omega_minus })
}

/// Unit direction of the ray `i*l_{zeta_k}` (`sign = +1`) or `i*l^_{zeta_k}`
/// (`sign = -1`).
pub fn ray_direction(k: usize, sign: f64) -> Complex64 {
    Complex64::new(0.0, sign) * zeta(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unity_root_identities() {
        let r = UnityRoots::default();
        for z in r.as_array() {
            assert!((z * z * z - 1.0).norm() < 1e-15);
        }
        assert!((r.zeta0 + r.zeta1 + r.zeta2).norm() < 1e-15);
        assert_eq!(r.zeta1, r.zeta2.conj());
        assert!((zeta(2) - zeta(1) - c(0.0, -SQRT3)).norm() < 1e-15);
    }

    #[test]
    fn sp_at_origin() {
        assert!((sp_eval(0, c(0.0, 0.0)) - 1.0).norm() < 1e-15);
        assert!(sp_eval(1, c(0.0, 0.0)).norm() < 1e-15);
        assert!(sp_eval(2, c(0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sp0_at_one_matches_series() {
        // 1 + 1/3! + 1/6! + 1/9! + ... summed in long form
        let mut acc = 0.0f64;
        let mut fact = 1.0f64;
        for n in 0..40usize {
            if n > 0 {
                fact *= n as f64;
            }
            if n % 3 == 0 {
                acc += 1.0 / fact;
            }
        }
        let s = sp_eval(0, c(1.0, 0.0));
        assert!((s.re - acc).abs() < 1e-14);
        assert!(s.im.abs() < 1e-15);
        assert!((s.re - 1.168_058_4).abs() < 1e-7);
    }

    #[test]
    fn stable_and_direct_agree() {
        for &z in &[c(0.3, -0.2), c(0.9, 0.1), c(-0.5, 0.7), c(1e-4, 2e-4)] {
            for p in 0..3 {
                let a = sp_eval(p, z);
                let b = sp_eval_stable(p, z);
                assert!((a - b).norm() < 1e-13, "p={p} z={z}");
            }
        }
        // direct summation loses s_2 near zero, the series does not
        let z = c(1e-6, 0.0);
        assert!((sp_eval_stable(2, z).re - 0.5e-12).abs() < 1e-26);
    }

    #[test]
    fn sector_examples() {
        // -i lies on i*l^_{zeta_0}
        assert_eq!(classify_sector(c(0.0, -1.0)).unwrap(), SectorLabel::RayLHat(0));
        // the open wedge sqrt3*Im < Re, sqrt3*Im < -Re is Omega_0
        for &z in &[c(0.5, -2.0), c(-1.0, -1.0), c(1.0, -0.7)] {
            assert!(z.im * SQRT3 < z.re && z.im * SQRT3 < -z.re);
            let l = classify_sector(z).unwrap();
            assert!(l.in_omega(0), "{z} -> {l:?}");
            let neg = classify_sector(-z).unwrap();
            assert!(neg.in_omega_minus(0));
            assert_eq!(neg, l.negated());
        }
        assert!(classify_sector(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn bound_state_rays_lie_in_omega0_minus() {
        let mu = 0.7;
        let nu = -0.4;
        assert!(classify_sector(zeta(1) * mu).unwrap().in_omega_minus(0));
        assert!(classify_sector(zeta(2) * nu).unwrap().in_omega_minus(0));
    }
}
