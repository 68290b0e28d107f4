use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trioscatter"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(dir: &Path, out: &str) -> Output {
    run(
        &[
            "reflectionless", "--mu1", "1.0", "--nu1", "-1.0", "--x-max", "14", "--n-x", "281", "--n-tau", "12",
            "--output-dir", out,
        ],
        dir,
    )
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let j = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(j).unwrap().to_string()).collect()
}

#[test]
fn verify_on_the_zero_potential_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--n-x", "1025", "--output-dir", "out"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = std::fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    for name in ["sp_derivative", "sp_cubic", "sp_ode", "determinant", "unitarity", "identity", "oracle"] {
        assert!(report.lines().any(|l| l.starts_with("PASS") && l.contains(name)), "{name}:\n{report}");
    }
}

#[test]
fn verify_reports_failures_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--n-x", "1025", "--tol", "sp_ode=1e-15"], dir.path());
    assert_eq!(code(&o), 1);
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.lines().any(|l| l.starts_with("FAIL") && l.contains("sp_ode")));
}

#[test]
fn malformed_potential_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("x,p,dp,q\n");
    for i in 0..11 {
        let x = -15.0 + 3.0 * i as f64;
        if i == 2 {
            text.push_str(&format!("{x},0.0,zero,0.0\n"));
        } else {
            text.push_str(&format!("{x},0.0,0.0,0.0\n"));
        }
    }
    std::fs::write(dir.path().join("pot.csv"), text).unwrap();
    let o = run(&["direct", "--potential", "pot.csv"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("pot.csv:4:"), "{}", stderr(&o));
}

#[test]
fn bad_header_and_short_truncation_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("h.csv"), "x,q,p\n-1,0,0\n0,0,0\n1,0,0\n").unwrap();
    let o = run(&["direct", "--potential", "h.csv"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("h.csv:1:"));
    let text: String = std::iter::once("x,p,q\n".to_string())
        .chain((0..21).map(|i| format!("{},0,0\n", -5.0 + 0.5 * i as f64)))
        .collect();
    std::fs::write(dir.path().join("short.csv"), text).unwrap();
    let o = run(&["direct", "--potential", "short.csv"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("truncation"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["verify", "--tol", "nonsense=1"], dir.path())), 2);
    assert_eq!(code(&run(&["verify", "--tol", "oracle"], dir.path())), 2);
    std::fs::write(dir.path().join("c.toml"), "a = 1.0\nunknown_key = 3\n").unwrap();
    assert_eq!(code(&run(&["verify", "--config", "c.toml"], dir.path())), 2);
    let o = bin().args(["verify"]).env("TRIOSCATTER_THREADS", "zero").current_dir(dir.path()).output().unwrap();
    assert_eq!(code(&o), 2);
    assert_eq!(code(&run(&["reflectionless", "--mu1", "1.0"], dir.path())), 2);
    assert_eq!(code(&run(&["reflectionless", "--mu1", "-1.0", "--nu1", "-1.0"], dir.path())), 2);
}

#[test]
fn config_file_values_apply_and_flags_override_them() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "n_x = 1025\noutput_dir = \"from_config\"\n[tolerances]\nsp_ode = 1e-15\n",
    )
    .unwrap();
    let o = run(&["verify", "--config", "c.toml"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(dir.path().join("from_config/report.txt").exists());
    let o = run(&["verify", "--config", "c.toml", "--tol", "sp_ode=1e-6", "--output-dir", "flag"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("flag/report.txt").exists());
}

#[test]
fn reflectionless_fixture_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&fixture(dir.path(), "a")), 0);
    let o = bin()
        .args([
            "reflectionless", "--mu1", "1.0", "--nu1", "-1.0", "--x-max", "14", "--n-x", "281", "--n-tau", "12",
            "--output-dir", "b",
        ])
        .env("TRIOSCATTER_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    for f in ["potential.csv", "scattering.csv", "bound_states.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let bound = std::fs::read_to_string(dir.path().join("a/bound_states.csv")).unwrap();
    assert_eq!(column(&bound, "kind"), ["mu", "nu"]);
    assert_eq!(column(&bound, "winding"), ["2", "2"]);
    // 17 significant digits
    let x = column(&std::fs::read_to_string(dir.path().join("a/potential.csv")).unwrap(), "x");
    assert_eq!(x[0], "-1.4000000000000000e1");
}

#[test]
fn reflectionless_then_direct_gives_vanishing_s_columns() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&fixture(dir.path(), "fx")), 0);
    let o = run(
        &["direct", "--potential", "fx/potential.csv", "--n-tau", "12", "--output-dir", "dr"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let scat = std::fs::read_to_string(dir.path().join("dr/scattering.csv")).unwrap();
    let rays = column(&scat, "ray");
    for r in ["zeta1/in", "zeta2/in", "zeta0/out", "zeta1/out", "zeta2/out"] {
        assert_eq!(rays.iter().filter(|v| *v == r).count(), 13, "{r}");
    }
    for name in ["s1_re", "s1_im", "s2_re", "s2_im", "s1_dual_re", "s1_dual_im", "s2_dual_re", "s2_dual_im"] {
        for v in column(&scat, name) {
            assert!(v.parse::<f64>().unwrap().abs() <= 1e-3, "{name} = {v}");
        }
    }
}

#[test]
fn inverse_reads_the_fixture_files() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&fixture(dir.path(), "fx")), 0);
    let o = run(
        &[
            "inverse", "--scattering", "fx/scattering.csv", "--bound-states", "fx/bound_states.csv",
            "--recover-points", "11", "--output-dir", "inv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rec = std::fs::read_to_string(dir.path().join("inv/recovered_potentials.csv")).unwrap();
    assert_eq!(rec.lines().next().unwrap(), "side,x,P_re,P_im,Q_re,Q_im,p,q");
    let side = column(&rec, "side");
    assert_eq!(side.iter().filter(|s| *s == "left").count(), 11);
    assert_eq!(side.iter().filter(|s| *s == "right").count(), 11);
}

#[test]
fn corrupted_scattering_file_is_rejected_with_line() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&fixture(dir.path(), "fx")), 0);
    let text = std::fs::read_to_string(dir.path().join("fx/scattering.csv")).unwrap();
    let bad: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| if i == 5 { l.replacen("zeta1/in", "zeta7/in", 1) } else { l.to_string() } + "\n")
        .collect();
    std::fs::write(dir.path().join("bad.csv"), bad).unwrap();
    let o = run(&["inverse", "--scattering", "bad.csv"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bad.csv:6:"), "{}", stderr(&o));
}

#[test]
fn solver_failure_exits_with_three_and_dumps_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&fixture(dir.path(), "fx")), 0);
    let o = run(
        &[
            "inverse", "--scattering", "fx/scattering.csv", "--bound-states", "fx/bound_states.csv",
            "--recover-points", "11", "--tol", "fit_residual=1e-300", "--output-dir", "inv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let diag = std::fs::read_to_string(dir.path().join("inv/diagnostics.txt")).unwrap();
    assert!(diag.contains("command: inverse") && diag.contains("fit"));
}
