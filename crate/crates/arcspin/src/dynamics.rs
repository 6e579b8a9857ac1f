//! Continuous-time Markov dynamics: exact simulation by thinning, explicit
//! generator matrices for tiny systems, and the reversible heat-bath
//! perturbation kernel.
//!
//! Thinning (uniformization) is the right tool here because every rate
//! changes after any event of the long-range dynamics, while the analytic
//! envelope `exp(2 sup|H_x|) q / (2 pi)` is valid uniformly in time — field
//! rotation leaves `sup|H_x|` unchanged. Proposals arrive at the summed
//! envelope rate, a site is chosen proportional to its envelope, and the
//! proposal is accepted with probability `rate / envelope`. A sharper
//! certified envelope is interposed as a second thinning stage so that the
//! expensive rate evaluation only runs on proposals that have a realistic
//! chance to be accepted; the accept probability per proposal is unchanged.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::discretization::{arc_endpoints, DiscreteConfig, Label, StateSpace};
use crate::gibbs::{masked_local_energy, ConstraintMask, GibbsSampler, TensorEngine};
use crate::quadrature::GaussLegendre;
use crate::rates::{rate_tight_bound, rate_upper_bound};
use crate::model::ModelParams;
use crate::{Budget, Error, Result};

/// What kind of move an event was.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Irreversible `label -> label + 1` rotation step.
    Rotation,
    /// Heat-bath resampling by the perturbation kernel.
    Resample,
}

/// One accepted transition.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TrajectoryEvent {
    pub time: f64,
    pub site: usize,
    pub old_label: Label,
    pub new_label: Label,
    pub kind: EventKind,
}

/// Event list plus optional periodic label snapshots.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub events: Vec<TrajectoryEvent>,
    pub snapshots: Vec<(f64, Vec<Label>)>,
}

impl Trajectory {
    /// CSV rows `time,site,old_label,new_label,event_kind`.
    pub fn events_csv(&self) -> String {
        let mut out = String::from("time,site,old_label,new_label,event_kind\n");
        for e in &self.events {
            let kind = match e.kind {
                EventKind::Rotation => "rotation",
                EventKind::Resample => "resample",
            };
            out.push_str(&format!(
                "{:.16e},{},{},{},{}\n",
                e.time, e.site, e.old_label, e.new_label, kind
            ));
        }
        out
    }

    /// CSV rows `time,labels` with dash-separated label vectors.
    pub fn snapshots_csv(&self) -> String {
        let mut out = String::from("time,labels\n");
        for (t, labels) in &self.snapshots {
            let s: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
            out.push_str(&format!("{:.16e},{}\n", t, s.join("-")));
        }
        out
    }
}

/// How transition rates are evaluated during simulation.
#[derive(Clone, Copy, Debug)]
pub enum RateMode {
    /// Exact tensor quadrature with `m` nodes per remaining site. With a
    /// static field and a state space inside the budget the rates are cached.
    Quadrature { m: usize },
    /// Monte Carlo estimates over the constrained Gibbs measure. The
    /// simulation is then approximate (estimated acceptance probabilities)
    /// and is meant for scale demonstrations.
    MonteCarlo {
        samples: usize,
        burn_in_sweeps: usize,
        inner_order: usize,
    },
}

/// Time-dependent external-field angle `theta(t) = theta_0 + speed * t`.
#[derive(Clone, Copy, Debug)]
pub enum FieldSchedule {
    Rotating { speed: f64 },
}

impl FieldSchedule {
    fn theta_at(&self, theta0: f64, t: f64) -> f64 {
        match self {
            FieldSchedule::Rotating { speed } => theta0 + speed * t,
        }
    }
}

/// Simulation controls.
#[derive(Clone, Debug)]
pub struct SimOptions {
    pub t_end: f64,
    pub rate_mode: RateMode,
    pub field_schedule: Option<FieldSchedule>,
    /// Intensity `kappa` of the reversible heat-bath kernel; 0 disables it.
    pub kernel_rate: f64,
    /// Quadrature order for the kernel's conditional weights.
    pub kernel_order: usize,
    pub snapshot_interval: Option<f64>,
    pub budget: Budget,
}

impl SimOptions {
    pub fn quadrature(t_end: f64, m: usize) -> Self {
        SimOptions {
            t_end,
            rate_mode: RateMode::Quadrature { m },
            field_schedule: None,
            kernel_rate: 0.0,
            kernel_order: m,
            snapshot_interval: None,
            budget: Budget::default(),
        }
    }

    pub fn monte_carlo(t_end: f64, samples: usize, burn_in_sweeps: usize, inner_order: usize) -> Self {
        SimOptions {
            t_end,
            rate_mode: RateMode::MonteCarlo {
                samples,
                burn_in_sweeps,
                inner_order,
            },
            field_schedule: None,
            kernel_rate: 0.0,
            kernel_order: 24,
            snapshot_interval: None,
            budget: Budget::default(),
        }
    }
}

/// Quick Monte Carlo rate estimate used inside the thinning loop; no error
/// bar, the caller treats the result as an acceptance probability.
fn mc_rate_quick<R: Rng>(
    state: &DiscreteConfig,
    x: usize,
    params: &ModelParams,
    samples: usize,
    burn_in: usize,
    rule: &GaussLegendre,
    rng: &mut R,
) -> Result<f64> {
    let mask = ConstraintMask::from_state(state).exclude(x);
    let (lo, hi) = arc_endpoints(state.label(x), state.q())?;
    let mut sampler = GibbsSampler::new(mask.clone(), params.clone(), rng);
    for _ in 0..burn_in {
        sampler.sweep(rng)?;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for _ in 0..samples {
        sampler.sweep(rng)?;
        let config = sampler.config();
        num += (-masked_local_energy(x, hi, config, params, &mask)).exp();
        den += rule.integrate(lo, hi, |u| {
            (-masked_local_energy(x, u, config, params, &mask)).exp()
        });
    }
    Ok(num / den)
}

/// Exact thinning simulation of the rotation dynamics, optionally combined
/// with the reversible kernel and a rotating field.
pub fn simulate<R: Rng>(
    initial: &DiscreteConfig,
    params: &ModelParams,
    opts: &SimOptions,
    rng: &mut R,
) -> Result<Trajectory> {
    if !(opts.t_end > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            message: format!("must be positive, got {}", opts.t_end),
        });
    }
    if opts.kernel_rate < 0.0 {
        return Err(Error::InvalidParameter {
            name: "kernel_rate",
            message: "must be nonnegative".into(),
        });
    }
    let n = initial.len();
    let q = initial.q();
    if n != params.n_sites() {
        return Err(Error::InvalidParameter {
            name: "initial",
            message: "configuration size does not match the coupling table".into(),
        });
    }
    if opts.kernel_rate > 0.0 && !matches!(opts.rate_mode, RateMode::Quadrature { .. }) {
        return Err(Error::InvalidParameter {
            name: "kernel_rate",
            message: "the perturbation kernel uses quadrature conditionals only".into(),
        });
    }

    let upper: Vec<f64> = (0..n).map(|x| rate_upper_bound(x, params, q)).collect();
    let tight: Vec<f64> = (0..n).map(|x| rate_tight_bound(x, params, q)).collect();
    let rot_total: f64 = upper.iter().sum();
    let kernel_total = opts.kernel_rate * n as f64;
    let total_rate = rot_total + kernel_total;

    // quadrature machinery, shared across events
    let mut engine = match opts.rate_mode {
        RateMode::Quadrature { m } => {
            opts.budget.check_tensor(n.saturating_sub(1), m)?;
            Some(TensorEngine::new(params, q, m)?)
        }
        RateMode::MonteCarlo { .. } => {
            if opts.kernel_rate > 0.0 {
                opts.budget.check_tensor(n, opts.kernel_order)?;
            }
            None
        }
    };
    let inner_rule = match opts.rate_mode {
        RateMode::MonteCarlo { inner_order, .. } => Some(GaussLegendre::new(inner_order)),
        _ => None,
    };

    // rates depend only on the state when the field is static; cache them
    let space = StateSpace::new(q, n);
    let cacheable = opts.field_schedule.is_none()
        && matches!(opts.rate_mode, RateMode::Quadrature { .. })
        && opts.budget.check_states(q, n).is_ok();
    let mut rate_cache: Vec<f64> = if cacheable {
        vec![f64::NAN; space.n_states() * n]
    } else {
        Vec::new()
    };

    let mut state = initial.clone();
    let mut trajectory = Trajectory::default();
    // snapshot times are k * dt, computed from the index so replicas share a
    // bit-identical grid
    let mut next_snapshot = match opts.snapshot_interval {
        Some(dt) if dt > 0.0 => {
            trajectory.snapshots.push((0.0, state.labels().to_vec()));
            Some((dt, 1usize))
        }
        _ => None,
    };

    let mut t = 0.0;
    let mut last_theta = params.theta;
    loop {
        t += -rng.gen::<f64>().ln() / total_rate;
        if let Some((dt, ref mut k)) = next_snapshot {
            while dt * *k as f64 <= opts.t_end && dt * *k as f64 <= t {
                trajectory.snapshots.push((dt * *k as f64, state.labels().to_vec()));
                *k += 1;
            }
        }
        if t >= opts.t_end {
            break;
        }
        let theta_t = match &opts.field_schedule {
            Some(s) => s.theta_at(params.theta, t),
            None => params.theta,
        };

        let coin = rng.gen::<f64>() * total_rate;
        if coin < kernel_total {
            // reversible kernel event: heat-bath resampling at a uniform site
            let x = rng.gen_range(0..n);
            let engine = engine.as_mut().expect("kernel requires quadrature");
            if theta_t != last_theta {
                engine.set_theta(theta_t);
                last_theta = theta_t;
            }
            let weights = engine.conditional_weights(state.labels(), x);
            let draw = rng.gen::<f64>();
            let mut acc = 0.0;
            let mut new_label = q;
            for (k, w) in weights.iter().enumerate() {
                acc += w;
                if draw < acc {
                    new_label = k + 1;
                    break;
                }
            }
            let old = state.label(x);
            if new_label != old {
                state.set_label(x, new_label);
                trajectory.events.push(TrajectoryEvent {
                    time: t,
                    site: x,
                    old_label: old,
                    new_label,
                    kind: EventKind::Resample,
                });
            }
            continue;
        }

        // rotation proposal: site proportional to its envelope
        let mut pick = coin - kernel_total;
        let mut x = n - 1;
        for (site, &u) in upper.iter().enumerate() {
            if pick < u {
                x = site;
                break;
            }
            pick -= u;
        }

        // stage 1: thin down to the sharper certified envelope
        if rng.gen::<f64>() >= tight[x] / upper[x] {
            continue;
        }

        // stage 2: the actual rate
        let accept_prob = match opts.rate_mode {
            RateMode::Quadrature { .. } => {
                let engine = engine.as_mut().expect("quadrature engine");
                if theta_t != last_theta {
                    // a moving field precludes the cache by construction
                    debug_assert!(!cacheable);
                    engine.set_theta(theta_t);
                    last_theta = theta_t;
                }
                let rate = if cacheable {
                    let key = space.index(&state) * n + x;
                    if rate_cache[key].is_nan() {
                        rate_cache[key] = engine.rate(state.labels(), x);
                    }
                    rate_cache[key]
                } else {
                    engine.rate(state.labels(), x)
                };
                if rate > tight[x] * (1.0 + 1e-9) {
                    return Err(Error::BoundViolation {
                        site: x,
                        rate,
                        bound: tight[x],
                    });
                }
                (rate / tight[x]).min(1.0)
            }
            RateMode::MonteCarlo {
                samples,
                burn_in_sweeps,
                ..
            } => {
                let params_t = params.with_theta(theta_t);
                let rate = mc_rate_quick(
                    &state,
                    x,
                    &params_t,
                    samples,
                    burn_in_sweeps,
                    inner_rule.as_ref().expect("inner rule"),
                    rng,
                )?;
                // estimated rate: clamp at the proven envelope
                (rate / tight[x]).min(1.0)
            }
        };

        if rng.gen::<f64>() < accept_prob {
            let (old, new) = state.increment(x);
            trajectory.events.push(TrajectoryEvent {
                time: t,
                site: x,
                old_label: old,
                new_label: new,
                kind: EventKind::Rotation,
            });
        }
    }

    if let Some((_, _)) = next_snapshot {
        let last = trajectory.snapshots.last().map(|(s, _)| *s);
        if last != Some(opts.t_end) {
            trajectory.snapshots.push((opts.t_end, state.labels().to_vec()));
        }
    }
    Ok(trajectory)
}

/// Resample the label at `x` from the single-site conditional of the
/// discretised specification (the reversible heat-bath kernel move).
pub fn reversible_kernel_step<R: Rng>(
    state: &DiscreteConfig,
    x: usize,
    params: &ModelParams,
    m: usize,
    budget: &Budget,
    rng: &mut R,
) -> Result<DiscreteConfig> {
    budget.check_tensor(params.n_sites(), m)?;
    let engine = TensorEngine::new(params, state.q(), m)?;
    let weights = engine.conditional_weights(state.labels(), x);
    let draw = rng.gen::<f64>();
    let mut acc = 0.0;
    let mut new_label = state.q();
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if draw < acc {
            new_label = k + 1;
            break;
        }
    }
    let mut out = state.clone();
    out.set_label(x, new_label);
    Ok(out)
}

/// Explicit finite-state generator over all `q^N` discrete configurations.
///
/// Off-diagonal entries are transition rates, the diagonal carries negative
/// row sums, so rows sum to zero.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    space: StateSpace,
    m: DMatrix<f64>,
}

impl GeneratorMatrix {
    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Entry-wise sum of two generators on the same state space.
    pub fn add(&self, other: &GeneratorMatrix) -> GeneratorMatrix {
        assert_eq!(self.space, other.space);
        GeneratorMatrix {
            space: self.space,
            m: &self.m + &other.m,
        }
    }

    /// Apply the generator to an observable: `(Lf)(state)`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        let mut out = vec![0.0; dim];
        for i in 0..dim {
            let mut acc = 0.0;
            for j in 0..dim {
                acc += self.m[(i, j)] * f[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Row-vector action `p -> p G` (the forward/adjoint direction).
    pub fn apply_left(&self, p: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        let mut out = vec![0.0; dim];
        for j in 0..dim {
            let mut acc = 0.0;
            for i in 0..dim {
                acc += p[i] * self.m[(i, j)];
            }
            out[j] = acc;
        }
        out
    }

    /// Strong connectivity of the positive-rate transition graph.
    pub fn is_strongly_connected(&self) -> bool {
        let dim = self.dim();
        let reach = |reverse: bool| {
            let mut seen = vec![false; dim];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..dim {
                    let rate = if reverse { self.m[(j, i)] } else { self.m[(i, j)] };
                    if i != j && rate > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(false) && reach(true)
    }

    /// Two smallest singular values of the generator, ascending. A
    /// one-dimensional stationary null space shows up as
    /// `smallest ~ 0 << second`.
    pub fn null_space_gap(&self) -> (f64, f64) {
        let svd = self.m.clone().svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (sv[0], sv[1])
    }

    /// The stationary probability vector `pi` with `pi G = 0`, from the
    /// singular vector of the transpose at its smallest singular value.
    pub fn stationary_distribution(&self) -> Vec<f64> {
        let gt = self.m.transpose();
        let svd = gt.svd(false, true);
        let sv = &svd.singular_values;
        let mut min_idx = 0;
        for i in 1..sv.len() {
            if sv[i] < sv[min_idx] {
                min_idx = i;
            }
        }
        let v_t = svd.v_t.expect("requested right singular vectors");
        let mut pi: Vec<f64> = v_t.row(min_idx).iter().copied().collect();
        let sum: f64 = pi.iter().sum();
        if sum < 0.0 {
            pi.iter_mut().for_each(|v| *v = -*v);
        }
        let mut total = 0.0;
        for v in &mut pi {
            assert!(*v > -1e-9, "stationary vector has a negative entry {v}");
            if *v < 0.0 {
                *v = 0.0;
            }
            total += *v;
        }
        pi.iter_mut().for_each(|v| *v /= total);
        pi
    }
}

/// Build the rotation generator by exact quadrature: entry
/// `(w -> w^x) = c(w, w^x)`, everything else off-diagonal zero.
pub fn build_generator_matrix(
    params: &ModelParams,
    q: usize,
    m: usize,
    budget: &Budget,
) -> Result<GeneratorMatrix> {
    let n = params.n_sites();
    budget.check_states(q, n)?;
    budget.check_tensor(n.saturating_sub(1), m)?;
    let engine = TensorEngine::new(params, q, m)?;
    Ok(build_generator_from_engine(&engine, n, q))
}

pub(crate) fn build_generator_from_engine(
    engine: &TensorEngine,
    n: usize,
    q: usize,
) -> GeneratorMatrix {
    let space = StateSpace::new(q, n);
    let dim = space.n_states();
    let mut mat = DMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let mut state = space.state(idx);
        for x in 0..n {
            let rate = engine.rate(state.labels(), x);
            let (old, _) = state.increment(x);
            let to = space.index(&state);
            state.set_label(x, old);
            mat[(idx, to)] += rate;
            mat[(idx, idx)] -= rate;
        }
    }
    GeneratorMatrix { space, m: mat }
}

/// Build the reversible heat-bath generator `K`: at rate 1 per site, the
/// label is replaced by a draw from the single-site conditional of the
/// discretised specification.
pub fn build_heatbath_generator(
    params: &ModelParams,
    q: usize,
    m: usize,
    budget: &Budget,
) -> Result<GeneratorMatrix> {
    let n = params.n_sites();
    budget.check_states(q, n)?;
    budget.check_tensor(n, m)?;
    let engine = TensorEngine::new(params, q, m)?;
    let space = StateSpace::new(q, n);
    let dim = space.n_states();
    let mut mat = DMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let state = space.state(idx);
        for x in 0..n {
            let weights = engine.conditional_weights(state.labels(), x);
            for (k, &w) in weights.iter().enumerate() {
                let label = k + 1;
                if label == state.label(x) {
                    continue;
                }
                let mut to_state = state.clone();
                to_state.set_label(x, label);
                let to = space.index(&to_state);
                mat[(idx, to)] += w;
                mat[(idx, idx)] -= w;
            }
        }
    }
    Ok(GeneratorMatrix { space, m: mat })
}

/// Matrix exponential by scaling-and-squaring with a truncated Taylor
/// series; ample for the generator norms that fit in the state budget.
pub(crate) fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = a.nrows();
    // induced l1 norm: max absolute column sum
    let norm = (0..a.ncols())
        .map(|j| (0..dim).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let b = a / 2f64.powi(s as i32);
    let mut term = DMatrix::<f64>::identity(dim, dim);
    let mut sum = DMatrix::<f64>::identity(dim, dim);
    for k in 1..=40 {
        term = (&term * &b) / k as f64;
        sum += &term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Exact transient distribution `p0 e^{tG}`, renormalised; entries down to
/// `-1e-12` are clipped to zero, anything lower is a hard failure.
pub fn transient_distribution(g: &GeneratorMatrix, p0: &[f64], t: f64) -> Result<Vec<f64>> {
    let dim = g.dim();
    if p0.len() != dim {
        return Err(Error::InvalidParameter {
            name: "p0",
            message: format!("length {} does not match state space {dim}", p0.len()),
        });
    }
    if t < 0.0 {
        return Err(Error::InvalidParameter {
            name: "t",
            message: format!("time must be nonnegative, got {t}"),
        });
    }
    if t == 0.0 {
        return Ok(p0.to_vec());
    }
    let e = expm(&(g.matrix() * t));
    let mut out = vec![0.0; dim];
    for j in 0..dim {
        let mut acc = 0.0;
        for i in 0..dim {
            acc += p0[i] * e[(i, j)];
        }
        out[j] = acc;
    }
    let mut total = 0.0;
    for v in &mut out {
        assert!(*v >= -1e-12, "transient distribution entry {v} below -1e-12");
        if *v < 0.0 {
            *v = 0.0;
        }
        total += *v;
    }
    out.iter_mut().for_each(|v| *v /= total);
    Ok(out)
}

/// Total-variation distance `(1/2) sum |p - q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::discrete_marginal;
    use crate::lattice::{build_coupling_table, LatticeSpec};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn ring_params(n: usize, alpha: f64, beta: f64, h: f64, theta: f64) -> ModelParams {
        let table = build_coupling_table(&LatticeSpec::ring(n, alpha)).unwrap();
        ModelParams::new(beta, h, theta, Arc::new(table)).unwrap()
    }

    #[test]
    fn free_single_site_generator_is_cyclic() {
        let params = ring_params(1, 1.5, 0.0, 0.0, 0.0);
        let g = build_generator_matrix(&params, 4, 16, &Budget::default()).unwrap();
        let rate = 4.0 / std::f64::consts::TAU;
        for i in 0..4 {
            for j in 0..4 {
                let expect = if j == (i + 1) % 4 {
                    rate
                } else if i == j {
                    -rate
                } else {
                    0.0
                };
                assert_abs_diff_eq!(g.matrix()[(i, j)], expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn generator_rows_sum_to_zero() {
        let params = ring_params(3, 1.5, 0.3, 0.1, 0.4);
        let g = build_generator_matrix(&params, 4, 32, &Budget::default()).unwrap();
        for i in 0..g.dim() {
            let row: f64 = (0..g.dim()).map(|j| g.matrix()[(i, j)]).sum();
            assert_abs_diff_eq!(row, 0.0, epsilon = 1e-12);
            for j in 0..g.dim() {
                if i != j {
                    assert!(g.matrix()[(i, j)] >= 0.0);
                }
            }
        }
    }

    #[test]
    fn generator_graph_is_strongly_connected() {
        let params = ring_params(3, 1.5, 0.3, 0.0, 0.0);
        let g = build_generator_matrix(&params, 4, 24, &Budget::default()).unwrap();
        assert!(g.is_strongly_connected());
    }

    #[test]
    fn transient_at_zero_is_identity() {
        let params = ring_params(2, 1.5, 0.2, 0.0, 0.0);
        let g = build_generator_matrix(&params, 4, 24, &Budget::default()).unwrap();
        let mut p0 = vec![0.0; g.dim()];
        p0[3] = 1.0;
        let p = transient_distribution(&g, &p0, 0.0).unwrap();
        assert_eq!(p, p0);
    }

    #[test]
    fn semigroup_property_holds() {
        let params = ring_params(2, 1.5, 0.4, 0.2, 0.9);
        let g = build_generator_matrix(&params, 4, 24, &Budget::default()).unwrap();
        let mut p0 = vec![0.0; g.dim()];
        p0[0] = 0.25;
        p0[5] = 0.75;
        let one_shot = transient_distribution(&g, &p0, 0.7).unwrap();
        let two_step = {
            let mid = transient_distribution(&g, &p0, 0.3).unwrap();
            transient_distribution(&g, &mid, 0.4).unwrap()
        };
        assert!(total_variation(&one_shot, &two_step) <= 1e-10);
    }

    #[test]
    fn transient_converges_to_stationary_vector() {
        let params = ring_params(2, 1.5, 0.4, 0.0, 0.0);
        let g = build_generator_matrix(&params, 4, 32, &Budget::default()).unwrap();
        let pi = g.stationary_distribution();
        // spectral gap from the eigenvalues of the generator
        let eig = g.matrix().clone().complex_eigenvalues();
        let gap = eig
            .iter()
            .filter(|l| l.re < -1e-9)
            .map(|l| -l.re)
            .fold(f64::INFINITY, f64::min);
        let mut p0 = vec![0.0; g.dim()];
        p0[0] = 1.0;
        let p = transient_distribution(&g, &p0, 50.0 / gap).unwrap();
        assert!(total_variation(&p, &pi) <= 1e-8);
    }

    #[test]
    fn stationary_vector_is_uniform_at_beta_zero() {
        let params = ring_params(2, 1.5, 0.0, 0.0, 0.0);
        let g = build_generator_matrix(&params, 4, 16, &Budget::default()).unwrap();
        let pi = g.stationary_distribution();
        for &p in &pi {
            assert_abs_diff_eq!(p, 1.0 / 16.0, epsilon = 1e-12);
        }
        let (s0, s1) = g.null_space_gap();
        assert!(s0 <= 1e-12);
        assert!(s1 > 1e-8);
    }

    #[test]
    fn event_times_increase_and_labels_step_forward() {
        let params = ring_params(3, 1.5, 0.3, 0.0, 0.0);
        let initial = DiscreteConfig::constant(4, 3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let opts = SimOptions::quadrature(50.0, 24);
        let traj = simulate(&initial, &params, &opts, &mut rng).unwrap();
        assert!(!traj.events.is_empty());
        let mut prev = 0.0;
        for e in &traj.events {
            assert!(e.time > prev);
            prev = e.time;
            assert_eq!(e.new_label, e.old_label % 4 + 1);
            assert_eq!(e.kind, EventKind::Rotation);
        }
    }

    #[test]
    fn beta_zero_event_counts_are_poisson() {
        // site event counts over [0, T] are Poisson(T q / 2 pi): chi-square
        // goodness-of-fit over 200 replicas at the 1% level
        let params = ring_params(2, 1.5, 0.0, 0.0, 0.0);
        let initial = DiscreteConfig::constant(4, 2, 1).unwrap();
        let t_end = std::f64::consts::TAU;
        let lambda = t_end * 4.0 / std::f64::consts::TAU;
        let replicas = 200;
        let mut counts = Vec::with_capacity(replicas);
        for k in 0..replicas {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + k as u64);
            let opts = SimOptions::quadrature(t_end, 8);
            let traj = simulate(&initial, &params, &opts, &mut rng).unwrap();
            counts.push(traj.events.iter().filter(|e| e.site == 0).count());
        }
        // cells 0..=1, 2, 3, 4, 5, 6, 7+
        let edges: Vec<(usize, usize)> =
            vec![(0, 1), (2, 2), (3, 3), (4, 4), (5, 5), (6, 6), (7, usize::MAX)];
        let mut observed = vec![0.0; edges.len()];
        for &c in &counts {
            for (cell, &(lo, hi)) in edges.iter().enumerate() {
                if c >= lo && c <= hi {
                    observed[cell] += 1.0;
                }
            }
        }
        let expected: Vec<f64> = edges
            .iter()
            .map(|&(lo, hi)| {
                let p: f64 = if hi == usize::MAX {
                    1.0 - (0..lo).map(|k| crate::stats::poisson_pmf(k, lambda)).sum::<f64>()
                } else {
                    (lo..=hi).map(|k| crate::stats::poisson_pmf(k, lambda)).sum()
                };
                p * replicas as f64
            })
            .collect();
        let stat = crate::stats::chi2_gof(&observed, &expected);
        let crit = crate::stats::chi2_critical(edges.len() - 1, 0.99);
        assert!(stat < crit, "chi2 {stat} >= {crit}");
    }

    #[test]
    fn beta_zero_marginal_labels_are_uniform() {
        let params = ring_params(2, 1.5, 0.0, 0.0, 0.0);
        let initial = DiscreteConfig::constant(4, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut opts = SimOptions::quadrature(4000.0, 8);
        opts.snapshot_interval = Some(1.0);
        let traj = simulate(&initial, &params, &opts, &mut rng).unwrap();
        // skip the constant-label burn-in
        let mut hist = [0usize; 4];
        let mut total = 0usize;
        for (t, labels) in &traj.snapshots {
            if *t < 50.0 {
                continue;
            }
            for &l in labels {
                hist[l - 1] += 1;
                total += 1;
            }
        }
        for &c in &hist {
            let p = c as f64 / total as f64;
            // snapshots are weakly dependent; 3 nominal standard errors with
            // a correlation allowance
            let se = (0.25 * 0.75 / total as f64).sqrt() * 2.0;
            assert!((p - 0.25).abs() < 3.0 * se, "p = {p}");
        }
    }

    #[test]
    fn occupancy_matches_generator_stationary_vector() {
        // thinning-correctness check on a 16-state system
        let params = ring_params(2, 1.5, 0.4, 0.0, 0.0);
        let q = 4;
        let g = build_generator_matrix(&params, q, 32, &Budget::default()).unwrap();
        let pi = g.stationary_distribution();
        let space = g.space();
        let initial = DiscreteConfig::constant(q, 2, 1).unwrap();
        let replicas = 48;
        let t_end = 400.0;
        let t_skip = 40.0;
        let mut per_replica: Vec<Vec<f64>> = Vec::with_capacity(replicas);
        for k in 0..replicas {
            let mut rng = ChaCha8Rng::seed_from_u64(9000 + k as u64);
            let mut opts = SimOptions::quadrature(t_end, 32);
            opts.snapshot_interval = Some(0.5);
            let traj = simulate(&initial, &params, &opts, &mut rng).unwrap();
            let mut occ = vec![0.0; space.n_states()];
            let mut n = 0.0;
            for (t, labels) in &traj.snapshots {
                if *t < t_skip {
                    continue;
                }
                let state = DiscreteConfig::new(q, labels.clone()).unwrap();
                occ[space.index(&state)] += 1.0;
                n += 1.0;
            }
            occ.iter_mut().for_each(|v| *v /= n);
            per_replica.push(occ);
        }
        for s in 0..space.n_states() {
            let vals: Vec<f64> = per_replica.iter().map(|o| o[s]).collect();
            let mean = crate::stats::mean(&vals);
            let se = crate::stats::stderr_of_mean(&vals);
            assert!(
                (mean - pi[s]).abs() <= 3.0 * se + 1e-4,
                "state {s}: occupancy {mean} vs pi {} (se {se})",
                pi[s]
            );
        }
    }

    #[test]
    fn kernel_resamples_uniformly_at_beta_zero() {
        let params = ring_params(2, 1.5, 0.0, 0.0, 0.0);
        let state = DiscreteConfig::constant(4, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut hist = [0usize; 4];
        let n = 40_000;
        for _ in 0..n {
            let out = reversible_kernel_step(&state, 0, &params, 16, &Budget::default(), &mut rng)
                .unwrap();
            hist[out.label(0) - 1] += 1;
        }
        for &c in &hist {
            let p = c as f64 / n as f64;
            assert!((p - 0.25).abs() < 3.0 * (0.25 * 0.75 / n as f64).sqrt() + 1e-3);
        }
    }

    #[test]
    fn heatbath_kernel_satisfies_detailed_balance() {
        let params = ring_params(2, 1.5, 0.5, 0.0, 0.0);
        let q = 4;
        let budget = Budget::default();
        let marginal = discrete_marginal(&params, q, 48, &budget).unwrap();
        let k = build_heatbath_generator(&params, q, 48, &budget).unwrap();
        let space = k.space();
        for i in 0..space.n_states() {
            for j in 0..space.n_states() {
                if i == j {
                    continue;
                }
                let lhs = marginal.probs()[i] * k.matrix()[(i, j)];
                let rhs = marginal.probs()[j] * k.matrix()[(j, i)];
                assert!(
                    (lhs - rhs).abs() <= 1e-10,
                    "detailed balance broken at ({i},{j}): {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn combined_generator_keeps_the_symmetric_marginal_stationary() {
        let params = ring_params(2, 1.5, 0.5, 0.0, 0.0);
        let q = 4;
        let budget = Budget::default();
        let marginal = discrete_marginal(&params, q, 48, &budget).unwrap();
        let l = build_generator_matrix(&params, q, 48, &budget).unwrap();
        let k = build_heatbath_generator(&params, q, 48, &budget).unwrap();
        let combined = l.add(&k);
        let pi = combined.stationary_distribution();
        assert!(total_variation(&pi, marginal.probs()) <= 1e-8);
    }

    #[test]
    fn rotating_field_statistics_are_period_two_pi() {
        // occupancy histograms over the second and third field periods agree
        let params = ring_params(2, 1.5, 0.3, 0.2, 0.0);
        let q = 4;
        let initial = DiscreteConfig::constant(q, 2, 1).unwrap();
        let space = StateSpace::new(q, 2);
        let tau = std::f64::consts::TAU;
        let mut hist_a = vec![0usize; space.n_states()];
        let mut hist_b = vec![0usize; space.n_states()];
        for k in 0..60u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(5000 + k);
            let mut opts = SimOptions::quadrature(3.0 * tau, 16);
            opts.field_schedule = Some(FieldSchedule::Rotating { speed: 1.0 });
            opts.snapshot_interval = Some(tau / 16.0);
            let traj = simulate(&initial, &params, &opts, &mut rng).unwrap();
            for (t, labels) in &traj.snapshots {
                let state = DiscreteConfig::new(q, labels.clone()).unwrap();
                let idx = space.index(&state);
                if *t >= tau && *t < 2.0 * tau {
                    hist_a[idx] += 1;
                } else if *t >= 2.0 * tau && *t < 3.0 * tau {
                    hist_b[idx] += 1;
                }
            }
        }
        let (stat, df) = crate::stats::two_sample_chi2(&hist_a, &hist_b);
        let crit = crate::stats::chi2_critical(df, 0.99);
        // snapshots within a replica are correlated, so allow a factor on the
        // nominal critical value
        assert!(stat < 3.0 * crit, "chi2 {stat} vs {crit} (df {df})");
    }

    #[test]
    fn combined_dynamics_emits_tagged_resample_events() {
        let params = ring_params(2, 1.5, 0.3, 0.0, 0.0);
        let initial = DiscreteConfig::constant(4, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let mut opts = SimOptions::quadrature(200.0, 16);
        opts.kernel_rate = 1.0;
        let traj = simulate(&initial, &params, &opts, &mut rng).unwrap();
        let rotations = traj.events.iter().filter(|e| e.kind == EventKind::Rotation).count();
        let resamples = traj.events.iter().filter(|e| e.kind == EventKind::Resample).count();
        assert!(rotations > 0 && resamples > 0);
        for e in &traj.events {
            match e.kind {
                EventKind::Rotation => assert_eq!(e.new_label, e.old_label % 4 + 1),
                EventKind::Resample => assert_ne!(e.new_label, e.old_label),
            }
        }
    }

    #[test]
    fn kernel_requires_quadrature_mode() {
        let params = ring_params(2, 1.5, 0.1, 0.0, 0.0);
        let initial = DiscreteConfig::constant(4, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut opts = SimOptions::monte_carlo(1.0, 128, 4, 16);
        opts.kernel_rate = 1.0;
        assert!(simulate(&initial, &params, &opts, &mut rng).is_err());
    }

    #[test]
    fn monte_carlo_mode_runs_and_respects_event_structure() {
        let params = ring_params(3, 1.5, 0.3, 0.1, 0.0);
        let initial = DiscreteConfig::constant(4, 3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut opts = SimOptions::monte_carlo(3.0, 128, 4, 16);
        opts.field_schedule = Some(FieldSchedule::Rotating { speed: 1.0 });
        let traj = simulate(&initial, &params, &opts, &mut rng).unwrap();
        let mut prev = 0.0;
        for e in &traj.events {
            assert!(e.time > prev);
            prev = e.time;
            assert_eq!(e.new_label, e.old_label % 4 + 1);
        }
    }
}
