use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use trioscatter::inverse::{default_t_max, FitOptions, DEFAULT_N_TAU};
use trioscatter::potential::{default_x_max, DEFAULT_NX};

use crate::Failure;

/// Names accepted by `--tol` and the `[tolerances]` table, with defaults.
pub const TOLERANCES: [(&str, f64); 9] = [
    ("sp_derivative", 1e-7),
    ("sp_cubic", 1e-12),
    ("sp_ode", 1e-6),
    ("identity", 1e-10),
    ("determinant", 1e-6),
    ("unitarity", 1e-6),
    ("oracle", 1e-6),
    ("jost_residual", 1e-8),
    ("fit_residual", 1e-6),
];

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub potential_file: Option<PathBuf>,
    pub scattering_file: Option<PathBuf>,
    pub bound_states_file: Option<PathBuf>,
    pub a: Option<f64>,
    pub x_max: Option<f64>,
    pub t_max: Option<f64>,
    pub n_x: Option<usize>,
    pub n_tau: Option<usize>,
    pub lambda_ray_angle: Option<f64>,
    pub fit_lambda_min: Option<f64>,
    pub fit_lambda_count: Option<usize>,
    pub recover_x: Option<f64>,
    pub recover_points: Option<usize>,
    pub mu1: Option<f64>,
    pub nu1: Option<f64>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }
}

/// Resolved settings for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential_file: Option<PathBuf>,
    pub scattering_file: Option<PathBuf>,
    pub bound_states_file: Option<PathBuf>,
    pub a: f64,
    pub x_max: f64,
    pub t_max: f64,
    pub n_x: usize,
    pub n_tau: usize,
    pub lambda_ray_angle: f64,
    pub fit_lambda_min: f64,
    pub fit_lambda_count: usize,
    pub recover_x: f64,
    pub recover_points: usize,
    pub mu1: Option<f64>,
    pub nu1: Option<f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn resolve(file: FileConfig, tol_overrides: &[String]) -> Result<Self, Failure> {
        let a = file.a.unwrap_or(1.0);
        if !(a > 0.0) || !a.is_finite() {
            return Err(Failure::Input(format!("a must be positive, got {a}")));
        }
        let mut tolerances: BTreeMap<String, f64> =
            TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let mut set = |name: &str, v: f64| -> Result<(), Failure> {
            if !tolerances.contains_key(name) {
                return Err(Failure::Input(format!("unknown tolerance `{name}`")));
            }
            if !(v > 0.0) || !v.is_finite() {
                return Err(Failure::Input(format!("tolerance `{name}` must be positive, got {v}")));
            }
            tolerances.insert(name.to_string(), v);
            Ok(())
        };
        for (k, v) in &file.tolerances {
            set(k, *v)?;
        }
        for s in tol_overrides {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Failure::Input(format!("--tol expects name=value, got `{s}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Failure::Input(format!("--tol {k}: `{v}` is not a number")))?;
            set(k.trim(), v)?;
        }
        let fit = FitOptions::default();
        let cfg = RunConfig {
            potential_file: file.potential_file,
            scattering_file: file.scattering_file,
            bound_states_file: file.bound_states_file,
            a,
            x_max: file.x_max.unwrap_or_else(|| default_x_max(a)),
            t_max: file.t_max.unwrap_or_else(|| default_t_max(a)),
            n_x: file.n_x.unwrap_or(DEFAULT_NX),
            n_tau: file.n_tau.unwrap_or(DEFAULT_N_TAU),
            lambda_ray_angle: file.lambda_ray_angle.unwrap_or(fit.angle),
            fit_lambda_min: file.fit_lambda_min.unwrap_or(fit.rho_min),
            fit_lambda_count: file.fit_lambda_count.unwrap_or(fit.count),
            recover_x: file.recover_x.unwrap_or(3.0),
            recover_points: file.recover_points.unwrap_or(61),
            mu1: file.mu1,
            nu1: file.nu1,
            tolerances,
            output_dir: file.output_dir.unwrap_or_else(|| PathBuf::from(".")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        let positive = [
            ("x_max", self.x_max),
            ("t_max", self.t_max),
            ("fit_lambda_min", self.fit_lambda_min),
            ("recover_x", self.recover_x),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Failure::Input(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_x < 5 || self.n_tau < 4 || self.recover_points < 5 || self.fit_lambda_count < 10 {
            return Err(Failure::Input(
                "grid sizes too small (n_x >= 5, n_tau >= 4, recover_points >= 5, fit_lambda_count >= 10)".into(),
            ));
        }
        Ok(())
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    pub fn fit_options(&self) -> FitOptions {
        let base = FitOptions::default();
        FitOptions {
            angle: self.lambda_ray_angle,
            rho_min: self.fit_lambda_min,
            rho_max: self.fit_lambda_min * (base.rho_max / base.rho_min),
            count: self.fit_lambda_count,
            max_residual: self.tol("fit_residual"),
            ..base
        }
    }

    /// `e^{-a X}` must be at most 1e-6; values above 1e-12 only warn.
    pub fn check_truncation(&self, x_extent: f64) -> Result<(), Failure> {
        let tail = (-self.a * x_extent).exp();
        if tail > 1e-6 {
            return Err(Failure::Input(format!(
                "truncation too short: exp(-a X_max) = {tail:.3e} > 1e-6 (a = {}, X_max = {x_extent})",
                self.a
            )));
        }
        if tail > 1e-12 * (1.0 + 1e-9) {
            eprintln!("warning: exp(-a X_max) = {tail:.3e} exceeds 1e-12");
        }
        Ok(())
    }
}
