use std::fmt::Write as _;
use std::path::Path;

use trioscatter::inverse::{RayData, Ray, RecoveredPotentials};
use trioscatter::numerics::RealGrid;
use trioscatter::potential::PotentialPair;
use trioscatter::scatter::{BoundPoint, BoundStateSet, PointKind, ScatteringCoeffs};
use trioscatter::Complex64;

use crate::Failure;

pub const SCATTERING_HEADER: [&str; 14] = [
    "ray", "tau", "r0_re", "r0_im", "s1_re", "s1_im", "s2_re", "s2_im", "r0_dual_re", "r0_dual_im", "s1_dual_re",
    "s1_dual_im", "s2_dual_re", "s2_dual_im",
];
pub const BOUND_HEADER: [&str; 6] = ["kind", "value", "lambda_re", "lambda_im", "winding", "residual"];
pub const RECOVERED_HEADER: [&str; 8] = ["side", "x", "P_re", "P_im", "Q_re", "Q_im", "p", "q"];

/// Fixed 17-significant-digit formatting.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>, Failure> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn headers(path: &Path, r: &mut csv::Reader<std::fs::File>) -> Result<Vec<String>, Failure> {
    Ok(r
        .headers()
        .map_err(|e| Failure::Input(format!("{}:1: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect())
}

/// Rows of a CSV file with the line number of each row.
fn rows(path: &Path, r: &mut csv::Reader<std::fs::File>, width: usize) -> Result<Vec<(u64, Vec<String>)>, Failure> {
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| {
            let ln = e.position().map_or(0, |p| p.line());
            Failure::Input(format!("{}:{ln}: {e}", path.display()))
        })?;
        let ln = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(Failure::Input(format!(
                "{}:{ln}: expected {width} fields, found {}",
                path.display(),
                rec.len()
            )));
        }
        out.push((ln, rec.iter().map(str::to_string).collect()));
    }
    Ok(out)
}

fn parse_f64(path: &Path, ln: u64, col: &str, s: &str) -> Result<f64, Failure> {
    let v: f64 = s
        .parse()
        .map_err(|_| Failure::Input(format!("{}:{ln}: column `{col}`: `{s}` is not a number", path.display())))?;
    if !v.is_finite() {
        return Err(Failure::Input(format!("{}:{ln}: column `{col}` is not finite", path.display())));
    }
    Ok(v)
}

/// Reads `x,p,dp,q` (or `x,p,q`, with `dp` filled by finite differences).
pub fn read_potential(path: &Path, a: f64) -> Result<PotentialPair, Failure> {
    let mut r = reader(path)?;
    let h = headers(path, &mut r)?;
    let with_dp = match h.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["x", "p", "dp", "q"] => true,
        ["x", "p", "q"] => false,
        _ => {
            return Err(Failure::Input(format!(
                "{}:1: header must be `x,p,dp,q` or `x,p,q`, found `{}`",
                path.display(),
                h.join(",")
            )))
        }
    };
    let (mut x, mut p, mut dp, mut q) = (vec![], vec![], vec![], vec![]);
    for (ln, row) in rows(path, &mut r, h.len())? {
        let v: Vec<f64> = row
            .iter()
            .zip(&h)
            .map(|(s, c)| parse_f64(path, ln, c, s))
            .collect::<Result<_, _>>()?;
        if let Some(&last) = x.last() {
            if v[0] <= last {
                return Err(Failure::Input(format!("{}:{ln}: x must increase", path.display())));
            }
        }
        x.push(v[0]);
        p.push(v[1]);
        if with_dp {
            dp.push(v[2]);
        }
        q.push(v[h.len() - 1]);
    }
    let n = x.len();
    if n < 5 {
        return Err(Failure::Input(format!("{}: need at least 5 rows, found {n}", path.display())));
    }
    let grid = RealGrid::uniform(x[0], x[n - 1], n).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let h = grid.nodes()[1] - grid.nodes()[0];
    if let Some(i) = x.iter().zip(grid.nodes()).position(|(a, b)| (a - b).abs() > 1e-9 * h.max(1.0)) {
        return Err(Failure::Input(format!(
            "{}:{}: x nodes must be uniformly spaced",
            path.display(),
            i + 2
        )));
    }
    if (x[0] + x[n - 1]).abs() > 1e-9 * x[n - 1].abs().max(1.0) {
        return Err(Failure::Input(format!(
            "{}: x grid must be symmetric about 0 (found [{}, {}])",
            path.display(),
            x[0],
            x[n - 1]
        )));
    }
    PotentialPair::new(grid, p, with_dp.then_some(dp), q, a)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn potential_csv(pot: &PotentialPair) -> String {
    let mut s = line(&["x", "p", "dp", "q"].map(String::from));
    for i in 0..pot.x().len() {
        s.push_str(&line(&[num(pot.x()[i]), num(pot.p()[i]), num(pot.dp()[i]), num(pot.q()[i])]));
    }
    s
}

fn push_c(out: &mut Vec<String>, z: Complex64) {
    out.push(num(z.re));
    out.push(num(z.im));
}

pub fn scattering_csv(data: &RayData) -> String {
    let mut s = line(&SCATTERING_HEADER.map(String::from));
    for (ray, coeffs) in data.rays() {
        for (tau, c) in data.tau_grid().nodes().iter().zip(coeffs) {
            let mut f = vec![ray.label(), num(*tau)];
            for z in [c.r0, c.s1, c.s2, c.r0_dual, c.s1_dual, c.s2_dual] {
                push_c(&mut f, z);
            }
            s.push_str(&line(&f));
        }
    }
    s
}

/// Reads a scattering file. Every ray must carry the same `tau` nodes, and
/// those must be the graded grid with the same end point and node count.
pub fn read_scattering(path: &Path) -> Result<RayData, Failure> {
    let mut r = reader(path)?;
    let h = headers(path, &mut r)?;
    if h != SCATTERING_HEADER {
        return Err(Failure::Input(format!(
            "{}:1: header must be `{}`",
            path.display(),
            SCATTERING_HEADER.join(",")
        )));
    }
    let mut rays: Vec<(Ray, Vec<f64>, Vec<ScatteringCoeffs>)> = Vec::new();
    for (ln, row) in rows(path, &mut r, h.len())? {
        let ray = Ray::parse(&row[0])
            .ok_or_else(|| Failure::Input(format!("{}:{ln}: unknown ray `{}`", path.display(), row[0])))?;
        let v: Vec<f64> = row[1..]
            .iter()
            .zip(&h[1..])
            .map(|(s, c)| parse_f64(path, ln, c, s))
            .collect::<Result<_, _>>()?;
        let z = |i: usize| Complex64::new(v[1 + 2 * i], v[2 + 2 * i]);
        let tau = v[0];
        let c = ScatteringCoeffs {
            lambda: ray.lambda(tau),
            r0: z(0),
            s1: z(1),
            s2: z(2),
            r0_dual: z(3),
            s1_dual: z(4),
            s2_dual: z(5),
        };
        match rays.iter_mut().find(|(r, _, _)| *r == ray) {
            Some((_, t, cs)) => {
                if tau <= *t.last().unwrap() {
                    return Err(Failure::Input(format!("{}:{ln}: tau must increase along a ray", path.display())));
                }
                t.push(tau);
                cs.push(c);
            }
            None => rays.push((ray, vec![tau], vec![c])),
        }
    }
    let Some((_, tau, _)) = rays.first() else {
        return Err(Failure::Input(format!("{}: no data rows", path.display())));
    };
    let tau = tau.clone();
    for (ray, t, _) in &rays {
        if *t != tau {
            return Err(Failure::Input(format!(
                "{}: ray {} uses a different tau grid",
                path.display(),
                ray.label()
            )));
        }
    }
    if tau.len() < 5 || tau[0] != 0.0 {
        return Err(Failure::Input(format!("{}: tau grid must start at 0 with at least 5 nodes", path.display())));
    }
    let grid = RealGrid::graded(*tau.last().unwrap(), tau.len() - 1)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if grid.nodes().iter().zip(&tau).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0)) {
        return Err(Failure::Input(format!(
            "{}: tau nodes are not the graded grid on [0, {}]",
            path.display(),
            grid.last()
        )));
    }
    RayData::new(grid, rays.into_iter().map(|(r, _, c)| (r, c)).collect())
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn bound_states_csv(points: &[BoundPoint]) -> String {
    let mut s = line(&BOUND_HEADER.map(String::from));
    for p in points {
        let kind = match p.kind {
            PointKind::Mu => "mu",
            PointKind::Nu => "nu",
            PointKind::OffRay => "off_ray",
        };
        s.push_str(&line(&[
            kind.to_string(),
            num(p.value),
            num(p.lambda.re),
            num(p.lambda.im),
            p.winding.to_string(),
            num(p.residual),
        ]));
    }
    s
}

/// Reads the `mu` and `nu` rows of a bound-state file; `off_ray` rows are
/// reported and skipped.
pub fn read_bound_states(path: &Path) -> Result<BoundStateSet, Failure> {
    let mut r = reader(path)?;
    let h = headers(path, &mut r)?;
    if h != BOUND_HEADER {
        return Err(Failure::Input(format!("{}:1: header must be `{}`", path.display(), BOUND_HEADER.join(","))));
    }
    let (mut mu, mut nu) = (vec![], vec![]);
    for (ln, row) in rows(path, &mut r, h.len())? {
        let value = parse_f64(path, ln, "value", &row[1])?;
        match row[0].as_str() {
            "mu" if value > 0.0 => mu.push(value),
            "nu" if value < 0.0 => nu.push(value),
            "mu" | "nu" => {
                return Err(Failure::Input(format!(
                    "{}:{ln}: mu must be positive and nu negative, got {} = {value}",
                    path.display(),
                    row[0]
                )))
            }
            "off_ray" => eprintln!("warning: {}:{ln}: skipping off-ray zero", path.display()),
            k => return Err(Failure::Input(format!("{}:{ln}: unknown kind `{k}`", path.display()))),
        }
    }
    BoundStateSet::new(mu, nu).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn recovered_csv(parts: &[&RecoveredPotentials]) -> String {
    let mut s = line(&RECOVERED_HEADER.map(String::from));
    for r in parts {
        let side = match r.side {
            trioscatter::jost::Side::PlusInfinity => "right",
            trioscatter::jost::Side::MinusInfinity => "left",
        };
        for i in 0..r.x.len() {
            let mut f = vec![side.to_string(), num(r.x[i])];
            push_c(&mut f, r.big_p[i]);
            push_c(&mut f, r.big_q[i]);
            f.push(num(r.p[i]));
            f.push(num(r.q[i]));
            s.push_str(&line(&f));
        }
    }
    s
}

/// Plain-text diagnostics block.
pub fn diagnostics(lines: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in lines {
        let _ = writeln!(s, "{k}: {v}");
    }
    s
}
