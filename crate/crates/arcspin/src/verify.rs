//! The verification experiment suite.
//!
//! All identity checks run on the rotating-field finite-volume family: the
//! discrete marginal at field angle `theta + s` is exactly the rotation of
//! the marginal at `theta`, so the family plays the role the rotated extremal
//! states play in infinite volume. The identities checked here are exact in
//! finite volume; the reported residuals measure only quadrature,
//! finite-difference and time-integration error.
//!
//! * stationarity: with `h = 0` the discretised Gibbs measure annihilates the
//!   generator, `mu'(Lf) = 0`.
//! * infinitesimal rotation: `d/d eps mu'_{theta+eps}(f) = mu'_theta(L_theta f)`.
//! * forward–backward: `F(s) = mu'_{theta+s}(U(s,t) f)` is constant in `s`,
//!   where `U` is the time-ordered propagator of the rotating-field dynamics,
//!   integrated by midpoint-frozen exponential substeps.
//! * orbit tracking: with `theta(t) = t`, the magnetisation angle drifts at
//!   unit speed and the phase distribution returns after one period.
//! * uniqueness: the generator graph is strongly connected and its stationary
//!   null space is one-dimensional.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::discretization::{ArcScheme, DiscreteConfig, StateSpace};
use crate::dynamics::{
    build_generator_from_engine, expm, total_variation, FieldSchedule, GeneratorMatrix,
    RateMode, SimOptions,
};
use crate::gibbs::{ConstraintMask, GibbsSampler, TensorEngine};
use crate::model::ModelParams;
use crate::stats;
use crate::{Budget, Error, Result};

/// Outcome of one residual experiment: named residuals, the tolerance they
/// were checked against, and the provenance needed to re-run bit-identically.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub experiment: String,
    pub residuals: Vec<(String, f64)>,
    pub tolerance: f64,
    pub pass: bool,
    pub provenance: BTreeMap<String, String>,
}

impl ResidualReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// CSV rows `observable,residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("observable,residual\n");
        for (name, r) in &self.residuals {
            out.push_str(&format!("{},{:.16e}\n", name, r));
        }
        out
    }

    fn finish(mut self) -> Self {
        self.pass = self.max_residual() <= self.tolerance;
        self
    }
}

fn base_provenance(params: &ModelParams, q: usize, m: usize) -> BTreeMap<String, String> {
    let mut p = BTreeMap::new();
    p.insert("beta".into(), format!("{:.16e}", params.beta));
    p.insert("h".into(), format!("{:.16e}", params.h));
    p.insert("theta".into(), format!("{:.16e}", params.theta));
    p.insert("n_sites".into(), params.n_sites().to_string());
    p.insert("q".into(), q.to_string());
    p.insert("m".into(), m.to_string());
    p
}

/// Sum a state-indexed vector over every single-site indicator
/// `1[label_x = k]`, returning `(observable name, sum)` pairs.
fn indicator_sums(space: StateSpace, v: &[f64]) -> Vec<(String, f64)> {
    let n = space.n_sites();
    let q = space.q();
    let mut acc = vec![0.0; n * q];
    for idx in 0..space.n_states() {
        let state = space.state(idx);
        for x in 0..n {
            acc[x * q + state.label(x) - 1] += v[idx];
        }
    }
    let mut out = Vec::with_capacity(n * q);
    for x in 0..n {
        for k in 1..=q {
            out.push((format!("site{x}_label{k}"), acc[x * q + k - 1]));
        }
    }
    out
}

/// Shared engine wrapper: one set of quadrature tables serving marginals and
/// generators across field angles.
struct System {
    engine: TensorEngine,
    space: StateSpace,
}

impl System {
    fn new(params: &ModelParams, q: usize, m: usize, budget: &Budget) -> Result<Self> {
        let n = params.n_sites();
        budget.check_states(q, n)?;
        budget.check_tensor(n, m)?;
        Ok(System {
            engine: TensorEngine::new(params, q, m)?,
            space: StateSpace::new(q, n),
        })
    }

    fn set_theta(&mut self, theta: f64) {
        self.engine.set_theta(theta);
    }

    fn marginal(&self) -> Vec<f64> {
        let dim = self.space.n_states();
        let mut probs = vec![0.0; dim];
        for (idx, p) in probs.iter_mut().enumerate() {
            *p = self.engine.z_state(self.space.state(idx).labels());
        }
        let norm: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= norm);
        probs
    }

    fn generator(&self) -> GeneratorMatrix {
        build_generator_from_engine(&self.engine, self.space.n_sites(), self.space.q())
    }
}

/// Options for [`stationarity_residual`].
#[derive(Clone, Copy, Debug)]
pub struct StationarityOptions {
    pub m: usize,
    pub tolerance: f64,
    pub budget: Budget,
}

impl Default for StationarityOptions {
    fn default() -> Self {
        StationarityOptions {
            m: 64,
            tolerance: 1e-8,
            budget: Budget::default(),
        }
    }
}

/// Residuals `|mu'(L f)|` over all single-site indicators for the symmetric
/// (`h = 0`) system; exact stationarity makes these pure quadrature error.
pub fn stationarity_residual(
    params: &ModelParams,
    q: usize,
    opts: &StationarityOptions,
) -> Result<ResidualReport> {
    if params.h != 0.0 {
        return Err(Error::InvalidParameter {
            name: "h",
            message: format!("stationarity check requires h = 0, got {}", params.h),
        });
    }
    let system = System::new(params, q, opts.m, &opts.budget)?;
    let mu = system.marginal();
    let generator = system.generator();
    // mu'(Lf) = (mu G) . f for every indicator f
    let mu_g = generator.apply_left(&mu);
    let residuals: Vec<(String, f64)> = indicator_sums(system.space, &mu_g)
        .into_iter()
        .map(|(name, v)| (name, v.abs()))
        .collect();
    let report = ResidualReport {
        experiment: "stationarity".into(),
        residuals,
        tolerance: opts.tolerance,
        pass: false,
        provenance: base_provenance(params, q, opts.m),
    };
    Ok(report.finish())
}

/// Options for [`rotation_residual`].
#[derive(Clone, Copy, Debug)]
pub struct RotationOptions {
    pub m: usize,
    pub eps_fd: f64,
    pub tolerance: f64,
    pub budget: Budget,
}

impl Default for RotationOptions {
    fn default() -> Self {
        RotationOptions {
            m: 64,
            eps_fd: 1e-4,
            tolerance: 1e-6,
            budget: Budget::default(),
        }
    }
}

/// Residuals of the infinitesimal rotation identity
/// `d/d eps mu'_{theta+eps}(f) = mu'_theta(L_theta f)` with the left side by
/// central finite differences over the field angle.
pub fn rotation_residual(
    params: &ModelParams,
    q: usize,
    opts: &RotationOptions,
) -> Result<ResidualReport> {
    if !(1e-6..=1e-2).contains(&opts.eps_fd) {
        return Err(Error::InvalidParameter {
            name: "eps_fd",
            message: format!("finite-difference step must be in [1e-6, 1e-2], got {}", opts.eps_fd),
        });
    }
    let mut system = System::new(params, q, opts.m, &opts.budget)?;
    let eps = opts.eps_fd;

    system.set_theta(params.theta + eps);
    let plus = indicator_sums(system.space, &system.marginal());
    system.set_theta(params.theta - eps);
    let minus = indicator_sums(system.space, &system.marginal());
    system.set_theta(params.theta);
    let mu = system.marginal();
    let generator = system.generator();
    let mu_g = indicator_sums(system.space, &generator.apply_left(&mu));

    let residuals: Vec<(String, f64)> = plus
        .iter()
        .zip(&minus)
        .zip(&mu_g)
        .map(|(((name, p), (_, m)), (_, g))| {
            let lhs = (p - m) / (2.0 * eps);
            (name.clone(), (lhs - g).abs())
        })
        .collect();

    let mut provenance = base_provenance(params, q, opts.m);
    provenance.insert("eps_fd".into(), format!("{:.16e}", eps));
    let report = ResidualReport {
        experiment: "rotation".into(),
        residuals,
        tolerance: opts.tolerance,
        pass: false,
        provenance,
    };
    Ok(report.finish())
}

/// Options for [`forward_backward_constancy`].
#[derive(Clone, Copy, Debug)]
pub struct FbOptions {
    pub m: usize,
    /// Number of midpoint-frozen exponential substeps across `[0, t]`.
    pub substeps: usize,
    pub tolerance: f64,
    pub budget: Budget,
}

impl Default for FbOptions {
    fn default() -> Self {
        FbOptions {
            m: 64,
            substeps: 500,
            tolerance: 1e-5,
            budget: Budget::default(),
        }
    }
}

/// Forward–backward experiment output: the residual report plus the raw
/// `F(s)` values per grid point and observable.
#[derive(Clone, Debug, Serialize)]
pub struct FbOutcome {
    pub report: ResidualReport,
    /// Snapped grid values actually used.
    pub s_grid: Vec<f64>,
    /// Observable names, in the order of the inner vectors of `f_values`.
    pub observables: Vec<String>,
    /// `f_values[k][o]` is `F_{obs o}(s_k)`.
    pub f_values: Vec<Vec<f64>>,
}

impl FbOutcome {
    /// CSV rows `s,observable,f_value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,observable,f_value\n");
        for (k, s) in self.s_grid.iter().enumerate() {
            for (o, name) in self.observables.iter().enumerate() {
                out.push_str(&format!("{:.16e},{},{:.16e}\n", s, name, self.f_values[k][o]));
            }
        }
        out
    }
}

/// Constancy of `F(s) = mu'_{theta+s}(U(s,t) f)` along the rotating-field
/// family, with `U` the time-ordered propagator of the rotating-field
/// generator family, approximated by `substeps` midpoint-frozen exponentials.
/// Grid points are snapped to the substep lattice.
pub fn forward_backward_constancy(
    params: &ModelParams,
    q: usize,
    t: f64,
    s_grid: &[f64],
    opts: &FbOptions,
) -> Result<FbOutcome> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            message: format!("horizon must be nonnegative, got {t}"),
        });
    }
    if s_grid.iter().any(|&s| s < 0.0 || s > t) {
        return Err(Error::InvalidParameter {
            name: "s_grid",
            message: "grid points must lie in [0, t]".into(),
        });
    }
    let mut system = System::new(params, q, opts.m, &opts.budget)?;
    let space = system.space;
    let n_obs = space.n_sites() * space.q();

    // degenerate horizon: F(s) = mu'_theta(f) for every grid point
    if t == 0.0 {
        let values = indicator_sums(space, &system.marginal());
        let observables: Vec<String> = values.iter().map(|(n, _)| n.clone()).collect();
        let f0: Vec<f64> = values.iter().map(|(_, v)| *v).collect();
        let report = ResidualReport {
            experiment: "forward_backward".into(),
            residuals: observables.iter().map(|n| (n.clone(), 0.0)).collect(),
            tolerance: opts.tolerance,
            pass: false,
            provenance: base_provenance(params, q, opts.m),
        };
        let mut outcome = FbOutcome {
            report: report.finish(),
            s_grid: s_grid.to_vec(),
            observables,
            f_values: vec![f0; s_grid.len()],
        };
        outcome.report.pass = true;
        return Ok(outcome);
    }

    let substeps = opts.substeps.max(s_grid.len().max(2));
    let dt = t / substeps as f64;
    // snap grid points onto substep boundaries, keep them sorted and unique
    let mut grid_steps: Vec<usize> = s_grid
        .iter()
        .map(|&s| ((s / dt).round() as usize).min(substeps))
        .collect();
    grid_steps.sort_unstable();
    grid_steps.dedup();

    let theta0 = params.theta;
    let dim = space.n_states();
    // tail product V(j) = prod_{step >= j} exp(dt G(midpoint)), assembled
    // right-to-left; F is evaluated whenever a grid boundary is crossed
    let mut v = nalgebra::DMatrix::<f64>::identity(dim, dim);
    let mut f_by_step: BTreeMap<usize, Vec<f64>> = BTreeMap::new();

    let eval_f = |system: &mut System, v: &nalgebra::DMatrix<f64>, s: f64| -> Vec<f64> {
        system.set_theta(theta0 + s);
        let nu = system.marginal();
        // w = nu . V, then contract with each indicator
        let mut w = vec![0.0; dim];
        for j in 0..dim {
            let mut acc = 0.0;
            for i in 0..dim {
                acc += nu[i] * v[(i, j)];
            }
            w[j] = acc;
        }
        indicator_sums(space, &w).into_iter().map(|(_, val)| val).collect()
    };

    if grid_steps.binary_search(&substeps).is_ok() {
        let vals = eval_f(&mut system, &v, t);
        f_by_step.insert(substeps, vals);
    }
    for j in (0..substeps).rev() {
        let mid = (j as f64 + 0.5) * dt;
        system.set_theta(theta0 + mid);
        let g = system.generator();
        let step = expm(&(g.matrix() * dt));
        v = step * v;
        if grid_steps.binary_search(&j).is_ok() {
            let vals = eval_f(&mut system, &v, j as f64 * dt);
            f_by_step.insert(j, vals);
        }
    }

    let s_used: Vec<f64> = grid_steps.iter().map(|&j| j as f64 * dt).collect();
    let f_values: Vec<Vec<f64>> = grid_steps
        .iter()
        .map(|j| f_by_step.remove(j).expect("grid point evaluated"))
        .collect();
    let base = &f_values[0];
    let mut max_dev = vec![0.0f64; n_obs];
    for vals in &f_values[1..] {
        for (o, (v, b)) in vals.iter().zip(base).enumerate() {
            max_dev[o] = max_dev[o].max((v - b).abs());
        }
    }

    let observables: Vec<String> = indicator_sums(space, &vec![0.0; dim])
        .into_iter()
        .map(|(n, _)| n)
        .collect();
    let residuals: Vec<(String, f64)> = observables
        .iter()
        .cloned()
        .zip(max_dev)
        .collect();

    let mut provenance = base_provenance(params, q, opts.m);
    provenance.insert("t".into(), format!("{:.16e}", t));
    provenance.insert("substeps".into(), substeps.to_string());
    provenance.insert(
        "s_grid".into(),
        s_used
            .iter()
            .map(|s| format!("{s:.6}"))
            .collect::<Vec<_>>()
            .join("|"),
    );
    let report = ResidualReport {
        experiment: "forward_backward".into(),
        residuals,
        tolerance: opts.tolerance,
        pass: false,
        provenance,
    };
    Ok(FbOutcome {
        report: report.finish(),
        s_grid: s_used,
        observables,
        f_values,
    })
}

/// Options for [`orbit_tracking`].
#[derive(Clone, Debug)]
pub struct OrbitOptions {
    pub replicas: usize,
    pub t_end: f64,
    pub snapshot_interval: f64,
    /// Field rotation speed; the target drift slope.
    pub field_speed: f64,
    /// Monte Carlo rate budget per acceptance decision.
    pub mc_samples: usize,
    pub mc_burn_in: usize,
    pub mc_inner_order: usize,
    /// Heat-bath sweeps to equilibrate each replica's initial condition.
    pub equilibration_sweeps: usize,
    /// Acceptance window for the fitted slope, as a fraction of
    /// `field_speed`.
    pub slope_window: (f64, f64),
    pub histogram_bins: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions {
            replicas: 200,
            t_end: std::f64::consts::TAU,
            snapshot_interval: std::f64::consts::TAU / 64.0,
            field_speed: 1.0,
            mc_samples: 96,
            mc_burn_in: 6,
            mc_inner_order: 24,
            equilibration_sweeps: 150,
            slope_window: (0.95, 1.05),
            histogram_bins: 12,
        }
    }
}

/// Orbit-tracking report: fitted drift of the magnetisation angle and the
/// period-return test.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitReport {
    pub slope: f64,
    pub slope_stderr: f64,
    pub per_replica_slopes: Vec<f64>,
    /// `(time, mean unwrapped psi, stderr)` rows.
    pub psi_mean: Vec<(f64, f64, f64)>,
    pub hist_start: Vec<usize>,
    pub hist_end: Vec<usize>,
    pub chi2_stat: f64,
    pub chi2_critical: f64,
    pub pass_slope: bool,
    pub pass_return: bool,
    pub pass: bool,
    pub provenance: BTreeMap<String, String>,
}

impl OrbitReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// CSV rows `time,psi_mean,psi_stderr`.
    pub fn psi_csv(&self) -> String {
        let mut out = String::from("time,psi_mean,psi_stderr\n");
        for (t, m, s) in &self.psi_mean {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", t, m, s));
        }
        out
    }
}

/// Magnetisation angle of a label vector, using arc midpoints as
/// representatives.
fn magnetisation_angle(labels: &[usize], scheme: &ArcScheme) -> f64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for &l in labels {
        let a = scheme.midpoint(l);
        re += a.cos();
        im += a.sin();
    }
    im.atan2(re)
}

/// Track the magnetisation angle of the rotating-field dynamics over
/// `replicas` independent runs and fit its drift.
///
/// Replica `k` draws from the ChaCha stream `k + 1` of `seed`, so results do
/// not depend on the number of replicas or the parallelism degree.
pub fn orbit_tracking(
    params: &ModelParams,
    q: usize,
    opts: &OrbitOptions,
    seed: u64,
) -> Result<OrbitReport> {
    if opts.replicas < 2 {
        return Err(Error::InvalidParameter {
            name: "replicas",
            message: "need at least 2 replicas".into(),
        });
    }
    let scheme = ArcScheme::new(q)?;
    let n = params.n_sites();

    struct ReplicaOut {
        psi: Vec<f64>,
        slope: f64,
        start: f64,
        end: f64,
    }

    // the exact snapshot grid the simulator emits: k * dt up to t_end, with
    // t_end appended when the interval does not divide it
    let times: Vec<f64> = {
        let dt = opts.snapshot_interval;
        let mut ts = vec![0.0];
        let mut k = 1usize;
        while dt * k as f64 <= opts.t_end {
            ts.push(dt * k as f64);
            k += 1;
        }
        if *ts.last().expect("nonempty") != opts.t_end {
            ts.push(opts.t_end);
        }
        ts
    };

    let replica_results: Result<Vec<ReplicaOut>> = (0..opts.replicas)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64 + 1);
            // equilibrate a continuous configuration at the initial field
            // angle, then coarse-grain it
            let mask = ConstraintMask::free(q, n)?;
            let mut sampler = GibbsSampler::new(mask, params.clone(), &mut rng);
            for _ in 0..opts.equilibration_sweeps {
                sampler.sweep(&mut rng)?;
            }
            let initial = DiscreteConfig::from_continuous(sampler.config(), q);

            let sim_opts = SimOptions {
                t_end: opts.t_end,
                rate_mode: RateMode::MonteCarlo {
                    samples: opts.mc_samples,
                    burn_in_sweeps: opts.mc_burn_in,
                    inner_order: opts.mc_inner_order,
                },
                field_schedule: Some(FieldSchedule::Rotating {
                    speed: opts.field_speed,
                }),
                kernel_rate: 0.0,
                kernel_order: 16,
                snapshot_interval: Some(opts.snapshot_interval),
                budget: Budget::default(),
            };
            let traj = crate::dynamics::simulate(&initial, params, &sim_opts, &mut rng)?;
            let raw: Vec<f64> = traj
                .snapshots
                .iter()
                .map(|(_, labels)| magnetisation_angle(labels, &scheme))
                .collect();
            let mut psi = Vec::with_capacity(raw.len());
            psi.push(raw[0]);
            for i in 1..raw.len() {
                let prev = *psi.last().expect("nonempty");
                psi.push(prev + stats::wrap_to_pi(raw[i] - raw[i - 1]));
            }
            let ts: Vec<f64> = traj.snapshots.iter().map(|(t, _)| *t).collect();
            let slope = stats::linear_slope(&ts, &psi);
            Ok(ReplicaOut {
                start: raw[0].rem_euclid(std::f64::consts::TAU),
                end: raw[raw.len() - 1].rem_euclid(std::f64::consts::TAU),
                psi,
                slope,
            })
        })
        .collect();
    let replica_results = replica_results?;

    let n_snap = times.len();
    let mut psi_mean = Vec::with_capacity(n_snap);
    for i in 0..n_snap {
        let vals: Vec<f64> = replica_results.iter().map(|r| r.psi[i]).collect();
        psi_mean.push((times[i], stats::mean(&vals), stats::stderr_of_mean(&vals)));
    }
    let mean_series: Vec<f64> = psi_mean.iter().map(|(_, m, _)| *m).collect();
    let slope = stats::linear_slope(&times, &mean_series);
    let per_replica_slopes: Vec<f64> = replica_results.iter().map(|r| r.slope).collect();
    let slope_stderr = stats::stderr_of_mean(&per_replica_slopes);

    let bins = opts.histogram_bins.max(2);
    let mut hist_start = vec![0usize; bins];
    let mut hist_end = vec![0usize; bins];
    for r in &replica_results {
        let b0 = ((r.start / std::f64::consts::TAU * bins as f64) as usize).min(bins - 1);
        let b1 = ((r.end / std::f64::consts::TAU * bins as f64) as usize).min(bins - 1);
        hist_start[b0] += 1;
        hist_end[b1] += 1;
    }
    let (chi2_stat, df) = stats::two_sample_chi2(&hist_start, &hist_end);
    let chi2_critical = stats::chi2_critical(df.max(1), 0.99);

    let (lo, hi) = opts.slope_window;
    let pass_slope = slope >= lo * opts.field_speed && slope <= hi * opts.field_speed;
    let pass_return = chi2_stat < chi2_critical;

    let mut provenance = base_provenance(params, q, opts.mc_inner_order);
    provenance.insert("seed".into(), seed.to_string());
    provenance.insert("replicas".into(), opts.replicas.to_string());
    provenance.insert("t_end".into(), format!("{:.16e}", opts.t_end));
    provenance.insert("field_speed".into(), format!("{:.16e}", opts.field_speed));
    provenance.insert("mc_samples".into(), opts.mc_samples.to_string());

    Ok(OrbitReport {
        slope,
        slope_stderr,
        per_replica_slopes,
        psi_mean,
        hist_start,
        hist_end,
        chi2_stat,
        chi2_critical,
        pass_slope,
        pass_return,
        pass: pass_slope && pass_return,
        provenance,
    })
}

/// Options for [`uniqueness_check`].
#[derive(Clone, Copy, Debug)]
pub struct UniquenessOptions {
    pub m: usize,
    /// Total-variation tolerance against the discrete marginal (symmetric
    /// case only).
    pub tolerance_tv: f64,
    /// The second-smallest singular value must exceed this floor.
    pub singular_floor: f64,
    pub budget: Budget,
}

impl Default for UniquenessOptions {
    fn default() -> Self {
        UniquenessOptions {
            m: 64,
            tolerance_tv: 1e-8,
            singular_floor: 1e-8,
            budget: Budget::default(),
        }
    }
}

/// Uniqueness report for the finite-state dynamics.
#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    pub strongly_connected: bool,
    pub smallest_singular: f64,
    pub second_smallest_singular: f64,
    pub stationary: Vec<f64>,
    /// TV distance between the stationary vector and the discrete marginal;
    /// a sharp identity only when `h = 0`.
    pub tv_to_marginal: f64,
    pub symmetric_case: bool,
    pub tolerance_tv: f64,
    pub pass: bool,
    pub provenance: BTreeMap<String, String>,
}

impl UniquenessReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Strong connectivity, a one-dimensional stationary null space, and (in the
/// symmetric case) agreement of the stationary vector with the discrete
/// marginal.
pub fn uniqueness_check(
    params: &ModelParams,
    q: usize,
    opts: &UniquenessOptions,
) -> Result<UniquenessReport> {
    let system = System::new(params, q, opts.m, &opts.budget)?;
    let marginal = system.marginal();
    let generator = system.generator();
    let strongly_connected = generator.is_strongly_connected();
    let (s0, s1) = generator.null_space_gap();
    let stationary = generator.stationary_distribution();
    let tv = total_variation(&stationary, &marginal);
    let symmetric_case = params.h == 0.0;
    let pass =
        strongly_connected && s1 > opts.singular_floor && (!symmetric_case || tv <= opts.tolerance_tv);
    Ok(UniquenessReport {
        strongly_connected,
        smallest_singular: s0,
        second_smallest_singular: s1,
        stationary,
        tv_to_marginal: tv,
        symmetric_case,
        tolerance_tv: opts.tolerance_tv,
        pass,
        provenance: base_provenance(params, q, opts.m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_coupling_table, LatticeSpec};
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn ring_params(n: usize, alpha: f64, beta: f64, h: f64, theta: f64) -> ModelParams {
        let table = build_coupling_table(&LatticeSpec::ring(n, alpha)).unwrap();
        ModelParams::new(beta, h, theta, Arc::new(table)).unwrap()
    }

    #[test]
    fn stationarity_is_exact_at_beta_zero() {
        let params = ring_params(3, 1.5, 0.0, 0.0, 0.0);
        let report =
            stationarity_residual(&params, 4, &StationarityOptions::default()).unwrap();
        assert!(report.pass);
        assert!(report.max_residual() <= 1e-13, "residual {}", report.max_residual());
    }

    #[test]
    fn stationarity_holds_on_the_three_ring() {
        let params = ring_params(3, 1.5, 0.3, 0.0, 0.0);
        let report =
            stationarity_residual(&params, 4, &StationarityOptions::default()).unwrap();
        assert!(report.pass, "max residual {}", report.max_residual());
    }

    #[test]
    fn stationarity_residual_shrinks_under_refinement() {
        let params = ring_params(3, 1.5, 0.3, 0.0, 0.0);
        let coarse = stationarity_residual(
            &params,
            4,
            &StationarityOptions {
                m: 16,
                ..Default::default()
            },
        )
        .unwrap()
        .max_residual();
        let fine = stationarity_residual(
            &params,
            4,
            &StationarityOptions {
                m: 32,
                ..Default::default()
            },
        )
        .unwrap()
        .max_residual();
        assert!(fine <= coarse.max(1e-12), "coarse {coarse}, fine {fine}");
    }

    #[test]
    fn stationarity_requires_zero_field() {
        let params = ring_params(3, 1.5, 0.3, 0.1, 0.0);
        assert!(stationarity_residual(&params, 4, &StationarityOptions::default()).is_err());
    }

    #[test]
    fn rotation_identity_reduces_to_stationarity_without_field() {
        let params = ring_params(3, 1.5, 0.3, 0.0, 0.0);
        let stat = stationarity_residual(&params, 4, &StationarityOptions::default()).unwrap();
        let rot = rotation_residual(&params, 4, &RotationOptions::default()).unwrap();
        assert_eq!(stat.pass, rot.pass);
        // h = 0: the finite-difference side vanishes identically, so the two
        // residual sets agree up to the FD noise floor
        for ((_, a), (_, b)) in stat.residuals.iter().zip(&rot.residuals) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn rotation_identity_holds_with_field() {
        let params = ring_params(3, 1.5, 0.3, 0.2, 0.0);
        let report = rotation_residual(&params, 4, &RotationOptions::default()).unwrap();
        assert!(report.pass, "max residual {}", report.max_residual());
    }

    #[test]
    fn rotation_residual_scales_quadratically_in_the_step() {
        let params = ring_params(3, 1.5, 0.3, 0.2, 0.0);
        let mut residuals = Vec::new();
        for eps in [1e-3, 5e-4, 2.5e-4] {
            let r = rotation_residual(
                &params,
                4,
                &RotationOptions {
                    eps_fd: eps,
                    ..Default::default()
                },
            )
            .unwrap();
            residuals.push(r.max_residual());
        }
        for w in residuals.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(
                (order - 2.0).abs() <= 0.4,
                "observed order {order} from {residuals:?}"
            );
        }
    }

    #[test]
    fn rotation_rejects_out_of_range_step() {
        let params = ring_params(3, 1.5, 0.3, 0.2, 0.0);
        for eps in [1e-7, 0.5] {
            assert!(rotation_residual(
                &params,
                4,
                &RotationOptions {
                    eps_fd: eps,
                    ..Default::default()
                }
            )
            .is_err());
        }
    }

    #[test]
    fn forward_backward_trivial_cases() {
        let params = ring_params(2, 1.5, 0.0, 0.0, 0.0);
        // t = 0
        let out = forward_backward_constancy(&params, 4, 0.0, &[0.0], &FbOptions::default())
            .unwrap();
        assert!(out.report.pass);
        assert!(out.report.max_residual() == 0.0);
        // beta = 0: constant rates, uniform marginal
        let grid = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
        let out = forward_backward_constancy(
            &params,
            4,
            0.5,
            &grid,
            &FbOptions {
                m: 16,
                substeps: 100,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(out.report.max_residual() <= 1e-12, "{}", out.report.max_residual());
    }

    #[test]
    fn forward_backward_is_constant_with_field() {
        let params = ring_params(2, 1.5, 0.3, 0.2, 0.0);
        let grid = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
        let out = forward_backward_constancy(
            &params,
            4,
            0.5,
            &grid,
            &FbOptions {
                m: 32,
                substeps: 250,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(out.report.pass, "max residual {}", out.report.max_residual());
        // halving the substep should not move the result at tolerance scale
        let finer = forward_backward_constancy(
            &params,
            4,
            0.5,
            &grid,
            &FbOptions {
                m: 32,
                substeps: 500,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            (out.report.max_residual() - finer.report.max_residual()).abs() <= 1e-6,
            "integration error not converged: {} vs {}",
            out.report.max_residual(),
            finer.report.max_residual()
        );
    }

    #[test]
    fn forward_backward_validates_grid() {
        let params = ring_params(2, 1.5, 0.1, 0.0, 0.0);
        assert!(forward_backward_constancy(&params, 4, 0.5, &[0.6], &FbOptions::default())
            .is_err());
    }

    #[test]
    fn uniqueness_on_the_symmetric_three_ring() {
        let params = ring_params(3, 1.5, 0.3, 0.0, 0.0);
        let report = uniqueness_check(&params, 4, &UniquenessOptions::default()).unwrap();
        assert!(report.strongly_connected);
        assert!(report.smallest_singular <= 1e-10);
        assert!(report.second_smallest_singular > 1e-8);
        assert!(report.tv_to_marginal <= 1e-8, "tv {}", report.tv_to_marginal);
        assert!(report.pass);
    }

    #[test]
    fn uniqueness_uniform_at_beta_zero() {
        let params = ring_params(2, 1.5, 0.0, 0.0, 0.0);
        let report = uniqueness_check(&params, 4, &UniquenessOptions::default()).unwrap();
        for &p in &report.stationary {
            assert_abs_diff_eq!(p, 1.0 / 16.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn reports_serialize_and_are_deterministic() {
        let params = ring_params(3, 1.5, 0.3, 0.0, 0.0);
        let a = stationarity_residual(&params, 4, &StationarityOptions::default()).unwrap();
        let b = stationarity_residual(&params, 4, &StationarityOptions::default()).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn stationarity_holds_on_a_2d_torus() {
        // the identity is dimension-agnostic; check a 2x2 torus at q = 3
        let table = build_coupling_table(&LatticeSpec::torus_2d(2, 2, 3.0)).unwrap();
        let params = ModelParams::new(0.25, 0.0, 0.0, Arc::new(table)).unwrap();
        let report = stationarity_residual(
            &params,
            3,
            &StationarityOptions {
                m: 16,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(report.pass, "max residual {}", report.max_residual());
    }

    #[test]
    fn orbit_slope_stderr_scales_with_replicas() {
        // quartering the replica pool should double the error bar; average
        // the four quarter estimates to tame the sd-of-sd noise
        let params = ring_params(3, 1.5, 0.4, 0.4, 0.0);
        let opts = OrbitOptions {
            replicas: 128,
            t_end: 2.0,
            snapshot_interval: 0.25,
            mc_samples: 32,
            mc_burn_in: 2,
            mc_inner_order: 8,
            equilibration_sweeps: 20,
            histogram_bins: 4,
            ..Default::default()
        };
        let report = orbit_tracking(&params, 4, &opts, 11).unwrap();
        let slopes = &report.per_replica_slopes;
        let se_full = stats::stderr_of_mean(slopes);
        let quarter = slopes.len() / 4;
        let se_quarter_avg: f64 = (0..4)
            .map(|i| stats::stderr_of_mean(&slopes[i * quarter..(i + 1) * quarter]))
            .sum::<f64>()
            / 4.0;
        let ratio = se_quarter_avg / se_full;
        assert!(
            (ratio - 2.0).abs() <= 0.4,
            "stderr ratio {ratio} not within 20% of 2"
        );
    }

    #[test]
    fn orbit_tracking_smoke_small_system() {
        // a light configuration exercising the full path: slope should be
        // near the field speed
        let params = ring_params(4, 1.5, 0.8, 0.5, 0.0);
        let opts = OrbitOptions {
            replicas: 24,
            snapshot_interval: std::f64::consts::TAU / 32.0,
            mc_samples: 48,
            mc_burn_in: 4,
            mc_inner_order: 16,
            equilibration_sweeps: 60,
            histogram_bins: 8,
            ..Default::default()
        };
        let report = orbit_tracking(&params, 8, &opts, 424242).unwrap();
        assert!(
            (report.slope - 1.0).abs() < 0.2,
            "slope {} +- {}",
            report.slope,
            report.slope_stderr
        );
        assert_eq!(report.per_replica_slopes.len(), 24);
    }
}
