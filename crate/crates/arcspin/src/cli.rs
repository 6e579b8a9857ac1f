//! Configuration parsing, deterministic seeding and result serialisation for
//! the `arcspin` binary.
//!
//! Runs are described by flat `key = value` text files (see the README for
//! the full key table). Every command writes a `manifest.json` that echoes
//! the complete configuration with 17-significant-digit floats, so parsing a
//! manifest back reproduces the exact `RunConfig`. Statistical commands split
//! their seed into per-replica ChaCha streams by the replica index, so
//! replica `k` sees the same randomness no matter how many replicas run or
//! how they are scheduled.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discretization::{dobrushin_certificate, DiscreteConfig};
use crate::dynamics::{simulate, FieldSchedule, RateMode, SimOptions};
use crate::gibbs::discrete_marginal;
use crate::lattice::{build_coupling_table, Boundary, LatticeSpec};
use crate::model::ModelParams;
use crate::rates::{rate_mc, rate_quadrature, McOptions, RateEstimate};
use crate::verify::{
    forward_backward_constancy, orbit_tracking, rotation_residual, stationarity_residual,
    uniqueness_check, FbOptions, OrbitOptions, RotationOptions, StationarityOptions,
    UniquenessOptions,
};
use crate::{Budget, Error, Result};

/// Full description of one run; two runs with equal configs produce
/// identical outputs (identical statistical outputs given equal seeds).
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dimension: usize,
    pub extent: Vec<usize>,
    pub boundary: String,
    pub exterior_radius: usize,
    pub alpha: f64,
    pub beta: f64,
    pub h: f64,
    pub theta: f64,
    pub q: usize,
    pub m: usize,
    pub sign: String,
    pub samples: usize,
    pub replicas: usize,
    pub sweeps: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub parallelism: usize,
    pub t_end: Option<f64>,
    pub eps_fd: f64,
    pub s_points: usize,
    pub substeps: usize,
    pub tolerance: Option<f64>,
    pub snapshot_interval: Option<f64>,
    pub kernel_rate: f64,
    pub field_speed: f64,
    pub field_schedule: String,
    pub initial_labels: String,
    pub site: usize,
    pub method: String,
    pub mc_rate_samples: usize,
    pub mc_burn_in: usize,
    pub mc_inner_order: usize,
    pub equilibration_sweeps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dimension: 1,
            extent: vec![3],
            boundary: "torus".into(),
            exterior_radius: 1,
            alpha: 1.5,
            beta: 0.3,
            h: 0.0,
            theta: 0.0,
            q: 4,
            m: 64,
            sign: "ferromagnetic".into(),
            samples: 100_000,
            replicas: 200,
            sweeps: 100,
            seed: 20_240_817,
            out: PathBuf::from("out"),
            parallelism: 0,
            t_end: None,
            eps_fd: 1e-4,
            s_points: 6,
            substeps: 500,
            tolerance: None,
            snapshot_interval: None,
            kernel_rate: 0.0,
            field_speed: 1.0,
            field_schedule: "static".into(),
            initial_labels: String::new(),
            site: 0,
            method: "quadrature".into(),
            mc_rate_samples: 96,
            mc_burn_in: 6,
            mc_inner_order: 24,
            equilibration_sweeps: 150,
        }
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt_f64(x),
        None => "auto".into(),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value.parse().map_err(|_| Error::Config {
        key: key.into(),
        message: format!("`{value}` is not a number"),
    })
}

fn parse_opt_f64(key: &str, value: &str) -> Result<Option<f64>> {
    if value == "auto" {
        Ok(None)
    } else {
        parse_f64(key, value).map(Some)
    }
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| Error::Config {
        key: key.into(),
        message: format!("`{value}` is not a nonnegative integer"),
    })
}

impl RunConfig {
    /// Flat key/value view; the inverse of [`RunConfig::from_pairs`].
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut kv = BTreeMap::new();
        kv.insert("dimension".into(), self.dimension.to_string());
        kv.insert(
            "extent".into(),
            self.extent.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","),
        );
        kv.insert("boundary".into(), self.boundary.clone());
        kv.insert("exterior_radius".into(), self.exterior_radius.to_string());
        kv.insert("alpha".into(), fmt_f64(self.alpha));
        kv.insert("beta".into(), fmt_f64(self.beta));
        kv.insert("h".into(), fmt_f64(self.h));
        kv.insert("theta".into(), fmt_f64(self.theta));
        kv.insert("q".into(), self.q.to_string());
        kv.insert("m".into(), self.m.to_string());
        kv.insert("sign".into(), self.sign.clone());
        kv.insert("samples".into(), self.samples.to_string());
        kv.insert("replicas".into(), self.replicas.to_string());
        kv.insert("sweeps".into(), self.sweeps.to_string());
        kv.insert("seed".into(), self.seed.to_string());
        kv.insert("out".into(), self.out.display().to_string());
        kv.insert("parallelism".into(), self.parallelism.to_string());
        kv.insert("t_end".into(), fmt_opt(self.t_end));
        kv.insert("eps_fd".into(), fmt_f64(self.eps_fd));
        kv.insert("s_points".into(), self.s_points.to_string());
        kv.insert("substeps".into(), self.substeps.to_string());
        kv.insert("tolerance".into(), fmt_opt(self.tolerance));
        kv.insert("snapshot_interval".into(), fmt_opt(self.snapshot_interval));
        kv.insert("kernel_rate".into(), fmt_f64(self.kernel_rate));
        kv.insert("field_speed".into(), fmt_f64(self.field_speed));
        kv.insert("field_schedule".into(), self.field_schedule.clone());
        kv.insert("initial_labels".into(), self.initial_labels.clone());
        kv.insert("site".into(), self.site.to_string());
        kv.insert("method".into(), self.method.clone());
        kv.insert("mc_rate_samples".into(), self.mc_rate_samples.to_string());
        kv.insert("mc_burn_in".into(), self.mc_burn_in.to_string());
        kv.insert("mc_inner_order".into(), self.mc_inner_order.to_string());
        kv.insert(
            "equilibration_sweeps".into(),
            self.equilibration_sweeps.to_string(),
        );
        kv
    }

    /// Apply key/value pairs on top of the defaults; unknown keys are
    /// rejected with the offending key named.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut cfg = RunConfig::default();
        for (key, value) in pairs {
            match key {
                "dimension" => cfg.dimension = parse_usize(key, value)?,
                "extent" => {
                    let mut extent = Vec::new();
                    for part in value.split(',') {
                        extent.push(parse_usize(key, part.trim())?);
                    }
                    cfg.extent = extent;
                }
                "boundary" => cfg.boundary = value.into(),
                "exterior_radius" => cfg.exterior_radius = parse_usize(key, value)?,
                "alpha" => cfg.alpha = parse_f64(key, value)?,
                "beta" => cfg.beta = parse_f64(key, value)?,
                "h" => cfg.h = parse_f64(key, value)?,
                "theta" => cfg.theta = parse_f64(key, value)?,
                "q" => cfg.q = parse_usize(key, value)?,
                "m" => cfg.m = parse_usize(key, value)?,
                "sign" => cfg.sign = value.into(),
                "samples" => cfg.samples = parse_usize(key, value)?,
                "replicas" => cfg.replicas = parse_usize(key, value)?,
                "sweeps" => cfg.sweeps = parse_usize(key, value)?,
                "seed" => {
                    cfg.seed = value.parse().map_err(|_| Error::Config {
                        key: key.into(),
                        message: format!("`{value}` is not a 64-bit integer"),
                    })?
                }
                "out" => cfg.out = PathBuf::from(value),
                "parallelism" => cfg.parallelism = parse_usize(key, value)?,
                "t_end" => cfg.t_end = parse_opt_f64(key, value)?,
                "eps_fd" => cfg.eps_fd = parse_f64(key, value)?,
                "s_points" => cfg.s_points = parse_usize(key, value)?,
                "substeps" => cfg.substeps = parse_usize(key, value)?,
                "tolerance" => cfg.tolerance = parse_opt_f64(key, value)?,
                "snapshot_interval" => cfg.snapshot_interval = parse_opt_f64(key, value)?,
                "kernel_rate" => cfg.kernel_rate = parse_f64(key, value)?,
                "field_speed" => cfg.field_speed = parse_f64(key, value)?,
                "field_schedule" => cfg.field_schedule = value.into(),
                "initial_labels" => cfg.initial_labels = value.into(),
                "site" => cfg.site = parse_usize(key, value)?,
                "method" => cfg.method = value.into(),
                "mc_rate_samples" => cfg.mc_rate_samples = parse_usize(key, value)?,
                "mc_burn_in" => cfg.mc_burn_in = parse_usize(key, value)?,
                "mc_inner_order" => cfg.mc_inner_order = parse_usize(key, value)?,
                "equilibration_sweeps" => cfg.equilibration_sweeps = parse_usize(key, value)?,
                _ => {
                    return Err(Error::Config {
                        key: key.into(),
                        message: "unknown configuration key".into(),
                    })
                }
            }
        }
        Ok(cfg)
    }

    /// Parse a `key = value` text file (blank lines and `#` comments
    /// allowed).
    pub fn from_text(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config {
                    key: format!("line {}", lineno + 1),
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            pairs.push((key.trim(), value.trim()));
        }
        Self::from_pairs(pairs.iter().map(|(k, v)| (*k, *v)))
    }

    pub fn lattice_spec(&self) -> Result<LatticeSpec> {
        let boundary = match self.boundary.as_str() {
            "torus" => Boundary::Torus,
            "fixed-exterior" => Boundary::FixedExterior {
                radius: self.exterior_radius,
            },
            other => {
                return Err(Error::Config {
                    key: "boundary".into(),
                    message: format!("`{other}` is not `torus` or `fixed-exterior`"),
                })
            }
        };
        let spec = LatticeSpec {
            dimension: self.dimension,
            extent: self.extent.clone(),
            boundary,
            alpha: self.alpha,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn model_params(&self) -> Result<(LatticeSpec, ModelParams)> {
        let spec = self.lattice_spec()?;
        let table = build_coupling_table(&spec)?;
        let mut params =
            ModelParams::new(self.beta, self.h, self.theta, std::sync::Arc::new(table))?;
        params.sign = match self.sign.as_str() {
            "ferromagnetic" => crate::model::InteractionSign::Ferromagnetic,
            "antiferromagnetic" => crate::model::InteractionSign::Antiferromagnetic,
            other => {
                return Err(Error::Config {
                    key: "sign".into(),
                    message: format!("`{other}` is not `ferromagnetic` or `antiferromagnetic`"),
                })
            }
        };
        Ok((spec, params))
    }

    fn initial_state(&self) -> Result<DiscreteConfig> {
        let n: usize = self.extent.iter().product();
        if self.initial_labels.is_empty() {
            return DiscreteConfig::constant(self.q, n, 1);
        }
        let mut labels = Vec::new();
        for part in self.initial_labels.split('-') {
            labels.push(parse_usize("initial_labels", part.trim())?);
        }
        if labels.len() != n {
            return Err(Error::Config {
                key: "initial_labels".into(),
                message: format!("expected {n} labels, got {}", labels.len()),
            });
        }
        DiscreteConfig::new(self.q, labels)
    }
}

/// Manifest echoed next to every experiment's outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Manifest {
            tool: "arcspin".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: config.to_pairs(),
        }
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        RunConfig::from_pairs(self.config.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }
}

/// The experiment drivers exposed by the binary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Certify,
    Marginal,
    Rates,
    Simulate,
    VerifyStationarity,
    VerifyRotation,
    VerifyForwardBackward,
    VerifyOrbit,
    VerifyUniqueness,
}

impl Command {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "certify" => Command::Certify,
            "marginal" => Command::Marginal,
            "rates" => Command::Rates,
            "simulate" => Command::Simulate,
            "verify-stationarity" => Command::VerifyStationarity,
            "verify-rotation" => Command::VerifyRotation,
            "verify-forward-backward" => Command::VerifyForwardBackward,
            "verify-orbit" => Command::VerifyOrbit,
            "verify-uniqueness" => Command::VerifyUniqueness,
            other => {
                return Err(Error::Config {
                    key: "command".into(),
                    message: format!("unknown command `{other}`"),
                })
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Certify => "certify",
            Command::Marginal => "marginal",
            Command::Rates => "rates",
            Command::Simulate => "simulate",
            Command::VerifyStationarity => "verify-stationarity",
            Command::VerifyRotation => "verify-rotation",
            Command::VerifyForwardBackward => "verify-forward-backward",
            Command::VerifyOrbit => "verify-orbit",
            Command::VerifyUniqueness => "verify-uniqueness",
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn write_manifest(command: Command, config: &RunConfig) -> Result<()> {
    let manifest = Manifest::new(command.name(), config);
    write_file(&config.out, "manifest.json", &serde_json::to_string_pretty(&manifest)?)
}

fn rate_csv_row(state: &DiscreteConfig, site: usize, est: &RateEstimate) -> String {
    let labels: Vec<String> = state.labels().iter().map(|l| l.to_string()).collect();
    let method = match est.method {
        crate::rates::RateMethod::Quadrature => "quadrature",
        crate::rates::RateMethod::MonteCarlo => "monte_carlo",
    };
    format!(
        "{},{},{},{:.16e},{:.16e},{}\n",
        labels.join("-"),
        site,
        method,
        est.value,
        est.stderr,
        est.samples
    )
}

/// Execute a command; returns true when the experiment's pass criterion
/// holds (plain data commands always pass).
fn execute(command: Command, config: &RunConfig) -> Result<bool> {
    let budget = Budget::default();
    match command {
        Command::Certify => {
            let (spec, params) = config.model_params()?;
            let cert = dobrushin_certificate(&params, &spec, config.q)?;
            write_file(&config.out, "certificate.json", &serde_json::to_string_pretty(&cert)?)?;
            write_manifest(command, config)?;
            Ok(cert.passes)
        }
        Command::Marginal => {
            let (_, params) = config.model_params()?;
            let marginal = discrete_marginal(&params, config.q, config.m, &budget)?;
            write_file(&config.out, "marginal.csv", &marginal.to_csv())?;
            write_manifest(command, config)?;
            Ok(true)
        }
        Command::Rates => {
            let (_, params) = config.model_params()?;
            let state = config.initial_state()?;
            let mut csv = String::from("state,site,method,value,stderr,samples\n");
            let do_quad = matches!(config.method.as_str(), "quadrature" | "both");
            let do_mc = matches!(config.method.as_str(), "mc" | "both");
            if !(do_quad || do_mc) {
                return Err(Error::Config {
                    key: "method".into(),
                    message: format!("`{}` is not `quadrature`, `mc` or `both`", config.method),
                });
            }
            if do_quad {
                let est = rate_quadrature(&state, config.site, &params, config.m, &budget)?;
                csv.push_str(&rate_csv_row(&state, config.site, &est));
            }
            if do_mc {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                let opts = McOptions {
                    burn_in_sweeps: config.sweeps,
                    ..Default::default()
                };
                let est = rate_mc(&state, config.site, &params, config.samples, &mut rng, &opts)?;
                csv.push_str(&rate_csv_row(&state, config.site, &est));
            }
            write_file(&config.out, "rates.csv", &csv)?;
            write_manifest(command, config)?;
            Ok(true)
        }
        Command::Simulate => {
            let (_, params) = config.model_params()?;
            let state = config.initial_state()?;
            let t_end = config.t_end.unwrap_or(10.0);
            let rate_mode = match config.method.as_str() {
                "quadrature" => RateMode::Quadrature { m: config.m },
                "mc" => RateMode::MonteCarlo {
                    samples: config.mc_rate_samples,
                    burn_in_sweeps: config.mc_burn_in,
                    inner_order: config.mc_inner_order,
                },
                other => {
                    return Err(Error::Config {
                        key: "method".into(),
                        message: format!("`{other}` is not `quadrature` or `mc`"),
                    })
                }
            };
            let field_schedule = match config.field_schedule.as_str() {
                "static" => None,
                "rotating" => Some(FieldSchedule::Rotating {
                    speed: config.field_speed,
                }),
                other => {
                    return Err(Error::Config {
                        key: "field_schedule".into(),
                        message: format!("`{other}` is not `static` or `rotating`"),
                    })
                }
            };
            let opts = SimOptions {
                t_end,
                rate_mode,
                field_schedule,
                kernel_rate: config.kernel_rate,
                kernel_order: config.m.min(32),
                snapshot_interval: config.snapshot_interval,
                budget,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let traj = simulate(&state, &params, &opts, &mut rng)?;
            write_file(&config.out, "trajectory.csv", &traj.events_csv())?;
            if !traj.snapshots.is_empty() {
                write_file(&config.out, "snapshots.csv", &traj.snapshots_csv())?;
            }
            write_manifest(command, config)?;
            Ok(true)
        }
        Command::VerifyStationarity => {
            let (_, params) = config.model_params()?;
            let opts = StationarityOptions {
                m: config.m,
                tolerance: config.tolerance.unwrap_or(1e-8),
                budget,
            };
            let report = stationarity_residual(&params, config.q, &opts)?;
            write_file(&config.out, "report.json", &report.to_json()?)?;
            write_file(&config.out, "residuals.csv", &report.to_csv())?;
            write_manifest(command, config)?;
            Ok(report.pass)
        }
        Command::VerifyRotation => {
            let (_, params) = config.model_params()?;
            let opts = RotationOptions {
                m: config.m,
                eps_fd: config.eps_fd,
                tolerance: config.tolerance.unwrap_or(1e-6),
                budget,
            };
            let report = rotation_residual(&params, config.q, &opts)?;
            write_file(&config.out, "report.json", &report.to_json()?)?;
            write_file(&config.out, "residuals.csv", &report.to_csv())?;
            write_manifest(command, config)?;
            Ok(report.pass)
        }
        Command::VerifyForwardBackward => {
            let (_, params) = config.model_params()?;
            let t = config.t_end.unwrap_or(0.5);
            let points = config.s_points.max(2);
            let s_grid: Vec<f64> = (0..points)
                .map(|k| t * k as f64 / (points - 1) as f64)
                .collect();
            let opts = FbOptions {
                m: config.m,
                substeps: config.substeps,
                tolerance: config.tolerance.unwrap_or(1e-5),
                budget,
            };
            let outcome = forward_backward_constancy(&params, config.q, t, &s_grid, &opts)?;
            write_file(&config.out, "report.json", &outcome.report.to_json()?)?;
            write_file(&config.out, "forward_backward.csv", &outcome.to_csv())?;
            write_manifest(command, config)?;
            Ok(outcome.report.pass)
        }
        Command::VerifyOrbit => {
            let (_, params) = config.model_params()?;
            let opts = OrbitOptions {
                replicas: config.replicas,
                t_end: config.t_end.unwrap_or(std::f64::consts::TAU),
                snapshot_interval: config
                    .snapshot_interval
                    .unwrap_or(std::f64::consts::TAU / 64.0),
                field_speed: config.field_speed,
                mc_samples: config.mc_rate_samples,
                mc_burn_in: config.mc_burn_in,
                mc_inner_order: config.mc_inner_order,
                equilibration_sweeps: config.equilibration_sweeps,
                slope_window: (0.95, 1.05),
                histogram_bins: config.q,
            };
            let report = orbit_tracking(&params, config.q, &opts, config.seed)?;
            write_file(&config.out, "report.json", &report.to_json()?)?;
            write_file(&config.out, "psi_mean.csv", &report.psi_csv())?;
            write_manifest(command, config)?;
            Ok(report.pass)
        }
        Command::VerifyUniqueness => {
            let (_, params) = config.model_params()?;
            let opts = UniquenessOptions {
                m: config.m,
                tolerance_tv: config.tolerance.unwrap_or(1e-8),
                singular_floor: 1e-8,
                budget,
            };
            let report = uniqueness_check(&params, config.q, &opts)?;
            write_file(&config.out, "report.json", &report.to_json()?)?;
            write_manifest(command, config)?;
            Ok(report.pass)
        }
    }
}

/// Run a parsed command: exit status 0 on pass, 1 on fail, 2 on usage or
/// validation errors.
pub fn run(command: Command, config: &RunConfig) -> u8 {
    let body = || -> Result<bool> {
        if config.parallelism > 0 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(config.parallelism)
                .build()
                .map_err(|e| Error::Config {
                    key: "parallelism".into(),
                    message: e.to_string(),
                })?;
            pool.install(|| execute(command, config))
        } else {
            execute(command, config)
        }
    };
    match body() {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Parse argv (without the program name) and run. Flags: `--config PATH`,
/// `--seed N`, `--out DIR`.
pub fn run_cli(args: &[String]) -> u8 {
    match parse_cli(args) {
        Ok((command, config)) => run(command, &config),
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!(
                "usage: arcspin <certify|marginal|rates|simulate|verify-stationarity|\
                 verify-rotation|verify-forward-backward|verify-orbit|verify-uniqueness> \
                 [--config PATH] [--seed N] [--out DIR]"
            );
            2
        }
    }
}

fn parse_cli(args: &[String]) -> Result<(Command, RunConfig)> {
    let mut it = args.iter();
    let name = it.next().ok_or_else(|| Error::Config {
        key: "command".into(),
        message: "missing command".into(),
    })?;
    let command = Command::parse(name)?;
    let mut config: Option<RunConfig> = None;
    let mut seed: Option<u64> = None;
    let mut out: Option<PathBuf> = None;
    while let Some(arg) = it.next() {
        let mut take = |key: &str| -> Result<&String> {
            it.next().ok_or_else(|| Error::Config {
                key: key.into(),
                message: "missing value".into(),
            })
        };
        match arg.as_str() {
            "--config" => {
                let path = take("--config")?;
                let text = std::fs::read_to_string(path)?;
                config = Some(RunConfig::from_text(&text)?);
            }
            "--seed" => {
                let v = take("--seed")?;
                seed = Some(v.parse().map_err(|_| Error::Config {
                    key: "--seed".into(),
                    message: format!("`{v}` is not a 64-bit integer"),
                })?);
            }
            "--out" => {
                out = Some(PathBuf::from(take("--out")?));
            }
            other => {
                return Err(Error::Config {
                    key: other.into(),
                    message: "unknown flag".into(),
                })
            }
        }
    }
    let mut config = config.unwrap_or_default();
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(o) = out {
        config.out = o;
    }
    Ok((command, config))
}
