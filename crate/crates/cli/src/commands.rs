use std::fmt::Write as _;
use std::path::PathBuf;

use trioscatter::inverse::{
    find_bound_states, recover_half_line, reflectionless_ray_data, sample_rays, MarchenkoOptions, Ray, LEFT_RAYS,
    RIGHT_RAYS,
};
use trioscatter::jost::{jost_left, jost_right, JostBundle, JostOptions, Side};
use trioscatter::numerics::RealGrid;
use trioscatter::oracle::{ode_jost, OdeOptions};
use trioscatter::potential::PotentialPair;
use trioscatter::reflectionless::{reflectionless_pair, ReflectionlessParams};
use trioscatter::rootsys::{cubic_identity_residual, sp_eval, zeta};
use trioscatter::scatter::{scattering_coefficients, transition_matrix, BoundPoint, BoundStateOptions, PointKind};
use trioscatter::Complex64;

use crate::config::RunConfig;
use crate::io;
use crate::Failure;

fn solver(stage: &str) -> impl Fn(trioscatter::Error) -> Failure + '_ {
    move |e| Failure::Solver(format!("{stage}: {e}"))
}

fn out(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

fn jost_options(cfg: &RunConfig) -> JostOptions {
    JostOptions { residual_tol: cfg.tol("jost_residual"), ..JostOptions::default() }
}

fn data_rays() -> Vec<Ray> {
    RIGHT_RAYS.iter().chain(LEFT_RAYS.iter()).copied().collect()
}

fn tau_grid(cfg: &RunConfig) -> Result<RealGrid, Failure> {
    RealGrid::graded(cfg.t_max, cfg.n_tau).map_err(|e| Failure::Input(e.to_string()))
}

pub fn direct(cfg: &RunConfig) -> Result<(), Failure> {
    let path = cfg
        .potential_file
        .as_ref()
        .ok_or_else(|| Failure::Input("direct needs a potential file (--potential or potential_file)".into()))?;
    let pot = io::read_potential(path, cfg.a)?;
    cfg.check_truncation(pot.x_max())?;
    let opts = jost_options(cfg);
    let data = sample_rays(&pot, &tau_grid(cfg)?, &data_rays(), &opts).map_err(solver("ray sampling"))?;
    let report = find_bound_states(&pot, &opts, &BoundStateOptions::for_decay_rate(cfg.a))
        .map_err(solver("bound-state search"))?;
    if !report.multiplicity_violations.is_empty() {
        eprintln!(
            "warning: {} zero(s) of t00 are not double",
            report.multiplicity_violations.len()
        );
    }
    io::write_file(&out(cfg, "scattering.csv"), &io::scattering_csv(&data))?;
    io::write_file(&out(cfg, "bound_states.csv"), &io::bound_states_csv(&report.points))?;
    println!(
        "direct: {} rays x {} tau nodes, {} bound state(s), total winding {}",
        data.rays().len(),
        data.tau_grid().len(),
        report.points.len(),
        report.total_winding
    );
    Ok(())
}

fn half_axis(x: f64, m: usize, side: Side) -> Vec<f64> {
    (0..m)
        .map(|i| {
            let t = x * i as f64 / (m - 1) as f64;
            match side {
                Side::PlusInfinity => t,
                Side::MinusInfinity => t - x,
            }
        })
        .collect()
}

pub fn inverse(cfg: &RunConfig) -> Result<(), Failure> {
    let scat = cfg
        .scattering_file
        .as_ref()
        .ok_or_else(|| Failure::Input("inverse needs --scattering".into()))?;
    let data = io::read_scattering(scat)?;
    for ray in data_rays() {
        if data.get(ray).is_err() {
            return Err(Failure::Input(format!("{}: missing ray {}", scat.display(), ray.label())));
        }
    }
    let bound = match &cfg.bound_states_file {
        Some(p) => io::read_bound_states(p)?,
        None => trioscatter::scatter::BoundStateSet::empty(),
    };
    let fit = cfg.fit_options();
    let opts = MarchenkoOptions::default();
    let mut parts = Vec::new();
    for side in [Side::MinusInfinity, Side::PlusInfinity] {
        let xs = half_axis(cfg.recover_x, cfg.recover_points, side);
        let r = recover_half_line(&data, &bound, side, &xs, &fit, &opts).map_err(solver("inverse problem"))?;
        parts.push(r);
    }
    let refs: Vec<_> = parts.iter().collect();
    io::write_file(&out(cfg, "recovered_potentials.csv"), &io::recovered_csv(&refs))?;
    println!(
        "inverse: recovered p, q on [-{x}, 0] and [0, {x}] ({} points each)",
        cfg.recover_points,
        x = cfg.recover_x
    );
    Ok(())
}

pub fn reflectionless(cfg: &RunConfig) -> Result<(), Failure> {
    let (Some(mu1), Some(nu1)) = (cfg.mu1, cfg.nu1) else {
        return Err(Failure::Input("reflectionless needs --mu1 and --nu1".into()));
    };
    let params = ReflectionlessParams::new(mu1, nu1).map_err(|e| Failure::Input(e.to_string()))?;
    cfg.check_truncation(cfg.x_max)?;
    let pair = reflectionless_pair(&params, cfg.a, cfg.x_max, cfg.n_x).map_err(solver("reflectionless potentials"))?;
    let data = reflectionless_ray_data(&tau_grid(cfg)?, &data_rays()).map_err(solver("ray data"))?;
    let points = [
        BoundPoint { kind: PointKind::Mu, value: mu1, lambda: zeta(1) * mu1, winding: 2, residual: 0.0 },
        BoundPoint { kind: PointKind::Nu, value: nu1, lambda: zeta(2) * nu1, winding: 2, residual: 0.0 },
    ];
    io::write_file(&out(cfg, "potential.csv"), &io::potential_csv(&pair))?;
    io::write_file(&out(cfg, "scattering.csv"), &io::scattering_csv(&data))?;
    io::write_file(&out(cfg, "bound_states.csv"), &io::bound_states_csv(&points))?;
    println!("reflectionless: mu1 = {mu1}, nu1 = {nu1}");
    Ok(())
}

struct Check {
    name: String,
    value: f64,
    tol: f64,
    note: String,
}

impl Check {
    fn pass(&self) -> bool {
        self.value <= self.tol
    }
}

fn rel_sup(a: &JostBundle, b: &JostBundle, k: usize) -> f64 {
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for i in 0..a.x().len() {
        num = num.max((a.val(k, i) - b.val(k, i)).norm());
        den = den.max(a.val(k, i).norm());
    }
    num / den
}

fn special_function_checks(cfg: &RunConfig, checks: &mut Vec<Check>) {
    // a deterministic spiral through |z| <= 5
    let pts: Vec<Complex64> = (0..200)
        .map(|j| Complex64::from_polar(5.0 * (j as f64 + 0.5) / 200.0, 2.399_963 * j as f64))
        .collect();
    let (mut der, mut cub, mut ode) = (0.0f64, 0.0f64, 0.0f64);
    for &z in &pts {
        for p in 0..3 {
            let f = |d: f64| sp_eval(p, z + d);
            let h = 1e-3;
            let d1 = (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
            der = der.max((d1 - sp_eval((p + 2) % 3, z)).norm());
            let h = 1e-2;
            let d3 = (-f(3.0 * h) + 8.0 * f(2.0 * h) - 13.0 * f(h) + 13.0 * f(-h) - 8.0 * f(-2.0 * h)
                + f(-3.0 * h))
                / (8.0 * h * h * h);
            ode = ode.max((d3 - f(0.0)).norm());
        }
        cub = cub.max(cubic_identity_residual(z));
    }
    let note = "200 points, |z| <= 5".to_string();
    checks.push(Check { name: "sp_derivative".into(), value: der, tol: cfg.tol("sp_derivative"), note: note.clone() });
    checks.push(Check { name: "sp_cubic".into(), value: cub, tol: cfg.tol("sp_cubic"), note: note.clone() });
    checks.push(Check { name: "sp_ode".into(), value: ode, tol: cfg.tol("sp_ode"), note });
}

fn failed(name: &str, tol: f64, e: impl std::fmt::Display) -> Check {
    Check { name: name.into(), value: f64::INFINITY, tol, note: format!("error: {e}") }
}

fn scattering_checks(cfg: &RunConfig, pot: &PotentialPair, checks: &mut Vec<Check>) {
    let opts = jost_options(cfg);
    let is_zero = pot.p().iter().chain(pot.q()).chain(pot.dp()).all(|v| *v == 0.0);
    let half = 0.45 * cfg.a;
    let lambdas: Vec<f64> = (0..10).map(|j| -half + 2.0 * half * (j as f64 + 0.5) / 10.0).collect();
    let (mut det, mut uni, mut ident) = (0.0f64, 0.0f64, 0.0f64);
    let mut classes = Vec::new();
    let mut err = None;
    for &l in &lambdas {
        let lam = Complex64::new(l, 0.0);
        let res = (|| -> trioscatter::Result<()> {
            let t = transition_matrix(&jost_left(lam, pot, &opts)?, &jost_right(lam, pot, &opts)?)?;
            let (p, d) = t.det_class();
            classes.push(p);
            det = det.max(d).max(t.x_spread);
            let s = scattering_coefficients(&t)?;
            uni = uni
                .max(t.unitarity_residual())
                .max(s.unitarity_residual())
                .max(s.dual_unitarity_residual());
            for k in 0..3 {
                for j in 0..3 {
                    let e = if k == j { 1.0 } else { 0.0 };
                    ident = ident.max((t.get(k, j) - e).norm());
                }
            }
            ident = ident.max(s.s1.norm()).max(s.s2.norm());
            Ok(())
        })();
        if let Err(e) = res {
            err = Some(format!("lambda = {l}: {e}"));
            break;
        }
    }
    if let Some(e) = err {
        checks.push(failed("determinant", cfg.tol("determinant"), &e));
        checks.push(failed("unitarity", cfg.tol("unitarity"), &e));
        return;
    }
    if classes.windows(2).any(|w| w[0] != w[1]) {
        det = f64::INFINITY;
    }
    let note = format!("10 real lambda in [-{half}, {half}]");
    checks.push(Check { name: "determinant".into(), value: det, tol: cfg.tol("determinant"), note: note.clone() });
    checks.push(Check { name: "unitarity".into(), value: uni, tol: cfg.tol("unitarity"), note: note.clone() });
    if is_zero {
        checks.push(Check { name: "identity".into(), value: ident, tol: cfg.tol("identity"), note });
    }
}

fn oracle_check(cfg: &RunConfig, pot: &PotentialPair, checks: &mut Vec<Check>) {
    let opts = jost_options(cfg);
    let r = 0.4 * cfg.a;
    let lambdas = [0.3, 1.9, 3.4, 5.0].map(|th: f64| Complex64::from_polar(r, th));
    let mut worst = 0.0f64;
    for lam in lambdas {
        for side in [Side::PlusInfinity, Side::MinusInfinity] {
            let res = (|| -> trioscatter::Result<f64> {
                let v = match side {
                    Side::PlusInfinity => jost_right(lam, pot, &opts)?,
                    Side::MinusInfinity => jost_left(lam, pot, &opts)?,
                };
                let o = ode_jost(lam, pot, pot, side, &OdeOptions::default())?;
                Ok((0..3).map(|k| rel_sup(&v, &o, k)).fold(0.0, f64::max))
            })();
            match res {
                Ok(d) => worst = worst.max(d),
                Err(e) => {
                    checks.push(failed("oracle", cfg.tol("oracle"), format!("lambda = {lam}: {e}")));
                    return;
                }
            }
        }
    }
    checks.push(Check {
        name: "oracle".into(),
        value: worst,
        tol: cfg.tol("oracle"),
        note: format!("Volterra vs ODE, 4 lambda with |lambda| = {r}, both sides"),
    });
}

/// Runs the invariant suite; returns whether every check passed.
pub fn verify(cfg: &RunConfig) -> Result<bool, Failure> {
    let pot = match &cfg.potential_file {
        Some(p) => io::read_potential(p, cfg.a)?,
        None => PotentialPair::zero(cfg.a, cfg.x_max, cfg.n_x).map_err(|e| Failure::Input(e.to_string()))?,
    };
    cfg.check_truncation(pot.x_max())?;
    let mut checks = Vec::new();
    special_function_checks(cfg, &mut checks);
    scattering_checks(cfg, &pot, &mut checks);
    oracle_check(cfg, &pot, &mut checks);
    let mut text = String::new();
    let source = cfg
        .potential_file
        .as_ref()
        .map_or_else(|| "zero potential".to_string(), |p| p.display().to_string());
    let _ = writeln!(text, "potential: {source}");
    let _ = writeln!(text, "a = {}, X_max = {}, n_x = {}", cfg.a, pot.x_max(), pot.x().len());
    for c in &checks {
        let _ = writeln!(
            text,
            "{} {:<14} value={:.3e} tol={:.1e} ({})",
            if c.pass() { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tol,
            c.note
        );
    }
    let ok = checks.iter().all(Check::pass);
    let _ = writeln!(text, "{}", if ok { "all checks passed" } else { "some checks failed" });
    io::write_file(&out(cfg, "report.txt"), &text)?;
    print!("{text}");
    Ok(ok)
}
