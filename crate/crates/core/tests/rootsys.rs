use proptest::prelude::*;
use trioscatter::rootsys::{sp_eval, zeta};
use trioscatter::Complex64;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

impl Dd {
    fn from(a: f64) -> Dd {
        Dd { hi: a, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(s.lo, self.lo + o.lo);
        let u = two_sum(s.hi, t.hi);
        two_sum(u.hi, u.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        two_sum(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }
}

#[derive(Clone, Copy)]
struct Cdd {
    re: Dd,
    im: Dd,
}

impl Cdd {
    fn from(z: Complex64) -> Cdd {
        Cdd { re: Dd::from(z.re), im: Dd::from(z.im) }
    }

    fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    fn scale(self, k: f64) -> Cdd {
        Cdd { re: self.re.mul(Dd::from(k)), im: self.im.mul(Dd::from(k)) }
    }

    fn value(self) -> Complex64 {
        Complex64::new(self.re.hi + self.re.lo, self.im.hi + self.im.lo)
    }
}

/// `sum_{n = p mod 3} z^n / n!`, term by term.
fn series(p: usize, z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..120usize {
        if n > 0 {
            term *= z / n as f64;
        }
        if n % 3 == p {
            acc += term;
        }
    }
    acc
}

fn point() -> impl Strategy<Value = Complex64> {
    (0.0..5.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, th)| Complex64::from_polar(r, th))
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(200)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn direct_sum_matches_the_taylor_series(z in point()) {
        for p in 0..3 {
            let a = sp_eval(p, z);
            let b = series(p, z);
            prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0), "p={} z={}", p, z);
        }
    }

    #[test]
    fn derivative_cycles_the_index(z in point()) {
        let h = 1e-3;
        for p in 0..3 {
            let f = |d: f64| sp_eval(p, z + d);
            let d = (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
            let expect = sp_eval((p + 2) % 3, z);
            prop_assert!((d - expect).norm() <= 1e-7, "p={} z={} err={:e}", p, z, (d - expect).norm());
        }
    }

    #[test]
    fn cubic_identity(z in point()) {
        let s: Vec<Cdd> = (0..3).map(|p| Cdd::from(sp_eval(p, z))).collect();
        let cube = |c: Cdd| c.mul(c).mul(c);
        let v = cube(s[0])
            .add(cube(s[1]))
            .add(cube(s[2]))
            .add(s[0].mul(s[1]).mul(s[2]).scale(-3.0))
            .value();
        prop_assert!((v - 1.0).norm() <= 1e-12, "z={} err={:e}", z, (v - 1.0).norm());
    }

    #[test]
    fn solves_the_third_order_equation(z in point()) {
        let h = 1e-2;
        for p in 0..3 {
            let f = |d: f64| sp_eval(p, z + d);
            let d3 = (-f(3.0 * h) + 8.0 * f(2.0 * h) - 13.0 * f(h) + 13.0 * f(-h) - 8.0 * f(-2.0 * h)
                + f(-3.0 * h))
                / (8.0 * h * h * h);
            let r = (d3 - f(0.0)).norm();
            prop_assert!(r <= 1e-6, "p={} z={} residual={:e}", p, z, r);
        }
    }

    #[test]
    fn bounded_by_the_modulus_exponential(z in point()) {
        for p in 0..3 {
            prop_assert!(sp_eval(p, z).norm() <= z.norm().exp() * (1.0 + 1e-14));
        }
    }

    #[test]
    fn real_arguments_give_real_values(x in -5.0..5.0f64) {
        for p in 0..3 {
            prop_assert!(sp_eval(p, Complex64::new(x, 0.0)).im.abs() <= 1e-13 * x.abs().exp());
        }
    }
}

#[test]
fn rotation_by_a_root_permutes_the_family() {
    // s_p(zeta z) = zeta^p s_p(z)
    for z in [Complex64::new(0.7, -1.2), Complex64::new(-2.0, 0.4)] {
        for p in 0..3 {
            let lhs = sp_eval(p, zeta(1) * z);
            let rhs = zeta(1).powu(p as u32) * sp_eval(p, z);
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }
}

#[test]
fn library_cubic_residual_agrees_with_the_test_evaluation() {
    for z in [Complex64::new(5.0, 0.0), Complex64::new(-3.0, 3.9), Complex64::new(0.2, -4.8)] {
        let r = trioscatter::rootsys::cubic_identity_residual(z);
        assert!(r <= 1e-12, "{z}: {r:e}");
    }
}
