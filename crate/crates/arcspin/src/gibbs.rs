//! Sampling and exact quadrature for constrained finite-volume Gibbs
//! measures.
//!
//! A [`ConstraintMask`] pins sites to arcs, leaves them free, or excludes
//! them; excluded sites carry no constraint and their interactions are
//! removed from the target measure. That is exactly the structure of the
//! conditional measures behind the discretised specification: the measure on
//! `x^c` given arc labels, with every potential touching `x` set to zero.
//!
//! Two routes to the same measures are kept deliberately independent:
//!
//! * exact rejection sampling (uniform proposal on the arc, acceptance
//!   `exp(-(H_x(u) + sup))`, so no discretisation bias inside the sampler),
//! * Gauss–Legendre tensor quadrature, which is the oracle every sampler and
//!   every rate formula is tested against.

use std::f64::consts::TAU;

use rand::Rng;

use crate::discretization::{arc_endpoints, DiscreteConfig, Label, StateSpace};
use crate::model::{ContinuousConfig, ModelParams};
use crate::quadrature::GaussLegendre;
use crate::{Budget, Error, Result};

/// Per-site constraint in the target measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteConstraint {
    /// Full circle.
    Free,
    /// Pinned to the arc with this label.
    Arc(Label),
    /// Removed from the measure: no constraint, no interactions.
    Excluded,
}

/// Constraint pattern for a whole window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintMask {
    q: usize,
    sites: Vec<SiteConstraint>,
}

impl ConstraintMask {
    /// All sites free.
    pub fn free(q: usize, n_sites: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter {
                name: "q",
                message: format!("need at least 2 arcs, got {q}"),
            });
        }
        Ok(ConstraintMask {
            q,
            sites: vec![SiteConstraint::Free; n_sites],
        })
    }

    /// Every site constrained to the arc of the given discrete configuration.
    pub fn from_state(state: &DiscreteConfig) -> Self {
        ConstraintMask {
            q: state.q(),
            sites: state.labels().iter().map(|&l| SiteConstraint::Arc(l)).collect(),
        }
    }

    pub fn constrain(mut self, x: usize, label: Label) -> Result<Self> {
        if label == 0 || label > self.q {
            return Err(Error::InvalidParameter {
                name: "label",
                message: format!("label {label} outside 1..={}", self.q),
            });
        }
        self.sites[x] = SiteConstraint::Arc(label);
        Ok(self)
    }

    pub fn exclude(mut self, x: usize) -> Self {
        self.sites[x] = SiteConstraint::Excluded;
        self
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn site(&self, x: usize) -> SiteConstraint {
        self.sites[x]
    }

    pub fn is_excluded(&self, x: usize) -> bool {
        self.sites[x] == SiteConstraint::Excluded
    }

    /// Sites that belong to the measure, in index order.
    pub fn active_sites(&self) -> Vec<usize> {
        (0..self.sites.len()).filter(|&x| !self.is_excluded(x)).collect()
    }

    /// Angular support of an active site.
    pub fn support(&self, x: usize) -> Option<(f64, f64)> {
        match self.sites[x] {
            SiteConstraint::Free => Some((0.0, TAU)),
            SiteConstraint::Arc(l) => Some(arc_endpoints(l, self.q).expect("label in range")),
            SiteConstraint::Excluded => None,
        }
    }

    /// Deterministic-midpoint / uniform initial configuration. Excluded sites
    /// are set to angle zero and never touched afterwards.
    pub fn initial_config<R: Rng>(&self, rng: &mut R) -> ContinuousConfig {
        let angles = self
            .sites
            .iter()
            .map(|c| match c {
                SiteConstraint::Free => rng.gen::<f64>() * TAU,
                SiteConstraint::Arc(l) => {
                    let (lo, hi) = arc_endpoints(*l, self.q).expect("label in range");
                    0.5 * (lo + hi)
                }
                SiteConstraint::Excluded => 0.0,
            })
            .collect();
        ContinuousConfig::new(angles)
    }
}

/// `H_x(u, config)` with interactions to excluded sites removed.
pub(crate) fn masked_local_energy(
    x: usize,
    u: f64,
    config: &ContinuousConfig,
    params: &ModelParams,
    mask: &ConstraintMask,
) -> f64 {
    let table = &params.couplings;
    let w = params.sign.pair_weight();
    let mut pair = 0.0;
    for y in 0..table.n_sites() {
        if y == x || mask.is_excluded(y) {
            continue;
        }
        let j = table.coupling(x, y);
        if j != 0.0 {
            pair += j * (u - config.angle(y)).cos();
        }
    }
    -params.beta * (w * pair + params.field_coefficient(x) * (u - params.theta).cos())
}

/// Bound on `|H_x|` in the masked system.
pub(crate) fn masked_local_energy_sup(x: usize, params: &ModelParams, mask: &ConstraintMask) -> f64 {
    let table = &params.couplings;
    let mut s = params.field_coefficient(x);
    for y in 0..table.n_sites() {
        if y != x && !mask.is_excluded(y) {
            s += table.coupling(x, y);
        }
    }
    params.beta * s
}

/// Total masked energy over the active sites, each pair counted once.
pub(crate) fn masked_total_energy(
    config: &ContinuousConfig,
    params: &ModelParams,
    mask: &ConstraintMask,
) -> f64 {
    let table = &params.couplings;
    let n = table.n_sites();
    let w = params.sign.pair_weight();
    let mut pair = 0.0;
    let mut field = 0.0;
    for x in 0..n {
        if mask.is_excluded(x) {
            continue;
        }
        field += params.field_coefficient(x) * (config.angle(x) - params.theta).cos();
        for y in (x + 1)..n {
            if mask.is_excluded(y) {
                continue;
            }
            let j = table.coupling(x, y);
            if j != 0.0 {
                pair += j * (config.angle(x) - config.angle(y)).cos();
            }
        }
    }
    -params.beta * (w * pair + field)
}

fn rejection_cap(sup: f64) -> u64 {
    // acceptance is bounded below by exp(-2 sup); the cap fires with
    // probability ~exp(-50) when the envelope is honest
    let worst = (2.0 * sup).exp();
    (50.0 * worst).max(10_000.0) as u64
}

/// Resample `phi_x` from the conditional density proportional to
/// `exp(-H_x(u, config))` restricted to the site's support. Exact sampling by
/// rejection; all other sites are left unchanged.
pub fn heatbath_step<R: Rng>(
    config: &mut ContinuousConfig,
    x: usize,
    mask: &ConstraintMask,
    params: &ModelParams,
    rng: &mut R,
) -> Result<()> {
    let (lo, hi) = mask.support(x).ok_or_else(|| Error::InvalidParameter {
        name: "site",
        message: format!("site {x} is excluded from the measure"),
    })?;
    let sup = masked_local_energy_sup(x, params, mask);
    let cap = rejection_cap(sup);
    for _ in 0..cap {
        let u = lo + (hi - lo) * rng.gen::<f64>();
        let e = masked_local_energy(x, u, config, params, mask);
        if rng.gen::<f64>() < (-(e + sup)).exp() {
            config.set_angle(x, u);
            return Ok(());
        }
    }
    Err(Error::RejectionCap { site: x, tries: cap })
}

/// Persistent systematic-scan heat-bath chain over the active sites of a
/// mask. Constrained sites start at their arc midpoints, free sites
/// uniformly.
#[derive(Clone, Debug)]
pub struct GibbsSampler {
    mask: ConstraintMask,
    params: ModelParams,
    active: Vec<usize>,
    config: ContinuousConfig,
}

impl GibbsSampler {
    pub fn new<R: Rng>(mask: ConstraintMask, params: ModelParams, rng: &mut R) -> Self {
        let config = mask.initial_config(rng);
        let active = mask.active_sites();
        GibbsSampler {
            mask,
            params,
            active,
            config,
        }
    }

    /// Start from an explicit configuration instead of the default
    /// initialisation.
    pub fn from_config(mask: ConstraintMask, params: ModelParams, config: ContinuousConfig) -> Self {
        let active = mask.active_sites();
        GibbsSampler {
            mask,
            params,
            active,
            config,
        }
    }

    /// One systematic pass over all active sites.
    pub fn sweep<R: Rng>(&mut self, rng: &mut R) -> Result<()> {
        for idx in 0..self.active.len() {
            let x = self.active[idx];
            heatbath_step(&mut self.config, x, &self.mask, &self.params, rng)?;
        }
        Ok(())
    }

    pub fn config(&self) -> &ContinuousConfig {
        &self.config
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn mask(&self) -> &ConstraintMask {
        &self.mask
    }
}

/// Draw one configuration from the constrained Gibbs measure by `sweeps`
/// systematic heat-bath passes.
pub fn sample_constrained_gibbs<R: Rng>(
    mask: &ConstraintMask,
    params: &ModelParams,
    sweeps: usize,
    rng: &mut R,
) -> Result<ContinuousConfig> {
    if sweeps == 0 {
        return Err(Error::InvalidParameter {
            name: "sweeps",
            message: "need at least one sweep".into(),
        });
    }
    let mut sampler = GibbsSampler::new(mask.clone(), params.clone(), rng);
    for _ in 0..sweeps {
        sampler.sweep(rng)?;
    }
    Ok(sampler.config.clone())
}

/// Normalised tensor-product quadrature weights for a constrained measure;
/// the exact oracle for expectations over a handful of sites.
#[derive(Clone, Debug)]
pub struct QuadratureMeasure {
    active: Vec<usize>,
    nodes: Vec<Vec<f64>>,
    shape: Vec<usize>,
    weights: Vec<f64>,
}

impl QuadratureMeasure {
    pub fn active_sites(&self) -> &[usize] {
        &self.active
    }

    /// Normalised weights over the tensor grid, first active site fastest.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Expectation of an observable of the active sites' angles.
    pub fn expectation<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        let k = self.active.len();
        let mut angles = vec![0.0; k];
        let mut acc = 0.0;
        for (flat, &w) in self.weights.iter().enumerate() {
            let mut rem = flat;
            for d in 0..k {
                angles[d] = self.nodes[d][rem % self.shape[d]];
                rem /= self.shape[d];
            }
            acc += w * f(&angles);
        }
        acc
    }
}

/// Build the normalised quadrature weights for the masked measure with `m`
/// Gauss–Legendre nodes per active site.
pub fn quadrature_measure(
    mask: &ConstraintMask,
    params: &ModelParams,
    m: usize,
    budget: &Budget,
) -> Result<QuadratureMeasure> {
    let active = mask.active_sites();
    if active.is_empty() {
        return Err(Error::InvalidParameter {
            name: "mask",
            message: "no active sites in the measure".into(),
        });
    }
    budget.check_tensor(active.len(), m)?;
    let rule = GaussLegendre::new(m);
    let mut nodes = Vec::with_capacity(active.len());
    let mut wts = Vec::with_capacity(active.len());
    for &x in &active {
        let (lo, hi) = mask.support(x).expect("active site");
        let (n, w) = rule.mapped(lo, hi);
        nodes.push(n);
        wts.push(w);
    }
    let shape: Vec<usize> = vec![m; active.len()];
    let total: usize = shape.iter().product();
    let mut weights = vec![0.0; total];
    let mut config = ContinuousConfig::constant(mask.len(), 0.0);
    for (flat, slot) in weights.iter_mut().enumerate() {
        let mut rem = flat;
        let mut wprod = 1.0;
        for d in 0..active.len() {
            let i = rem % m;
            rem /= m;
            config.set_angle(active[d], nodes[d][i]);
            wprod *= wts[d][i];
        }
        *slot = wprod * (-masked_total_energy(&config, params, mask)).exp();
    }
    let norm: f64 = weights.iter().sum();
    assert!(norm > 0.0, "constrained partition function underflow");
    for w in &mut weights {
        *w /= norm;
    }
    Ok(QuadratureMeasure {
        active,
        nodes,
        shape,
        weights,
    })
}

/// Probability table of the coarse-grained measure over all `q^N` discrete
/// configurations, each entry proportional to the constrained partition
/// function of its arcs.
#[derive(Clone, Debug)]
pub struct DiscreteMarginal {
    space: StateSpace,
    probs: Vec<f64>,
}

impl DiscreteMarginal {
    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn prob(&self, state: &DiscreteConfig) -> f64 {
        self.probs[self.space.index(state)]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// CSV rows `state,probability` with dash-separated labels and 17
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,probability\n");
        for idx in 0..self.space.n_states() {
            let state = self.space.state(idx);
            let labels: Vec<String> = state.labels().iter().map(|l| l.to_string()).collect();
            out.push_str(&format!("{},{:.16e}\n", labels.join("-"), self.probs[idx]));
        }
        out
    }
}

/// Compute the discrete marginal by tensor quadrature with `m` nodes per
/// site.
pub fn discrete_marginal(
    params: &ModelParams,
    q: usize,
    m: usize,
    budget: &Budget,
) -> Result<DiscreteMarginal> {
    let n = params.n_sites();
    budget.check_states(q, n)?;
    budget.check_tensor(n, m)?;
    let engine = TensorEngine::new(params, q, m)?;
    let space = StateSpace::new(q, n);
    let mut probs = vec![0.0; space.n_states()];
    for (idx, p) in probs.iter_mut().enumerate() {
        *p = engine.z_state(space.state(idx).labels());
    }
    let norm: f64 = probs.iter().sum();
    assert!(norm > 0.0, "partition function underflow");
    for p in &mut probs {
        *p /= norm;
    }
    let check: f64 = probs.iter().sum();
    debug_assert!((check - 1.0).abs() <= 1e-12);
    Ok(DiscreteMarginal { space, probs })
}

/// Shared tensor-contraction engine for arc-constrained partition functions.
///
/// All states of one `(params, q, m)` family reuse the same per-arc node
/// grids and precomputed pair Boltzmann tables, so only the field factors
/// change when the field angle rotates.
pub(crate) struct TensorEngine {
    q: usize,
    m: usize,
    n: usize,
    params: ModelParams,
    theta: f64,
    arc_nodes: Vec<Vec<f64>>,
    arc_weights: Vec<f64>,
    class_of: Vec<usize>,
    pair_exp: Vec<f64>,
    field: Vec<f64>,
}

const NO_CLASS: usize = usize::MAX;

impl TensorEngine {
    pub(crate) fn new(params: &ModelParams, q: usize, m: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter {
                name: "q",
                message: format!("need at least 2 arcs, got {q}"),
            });
        }
        if m == 0 {
            return Err(Error::InvalidParameter {
                name: "m",
                message: "quadrature order must be positive".into(),
            });
        }
        let n = params.n_sites();
        let rule = GaussLegendre::new(m);
        let mut arc_nodes = Vec::with_capacity(q);
        let mut arc_weights = Vec::new();
        for a in 0..q {
            let (lo, hi) = arc_endpoints(a + 1, q).expect("label in range");
            let (nodes, w) = rule.mapped(lo, hi);
            arc_nodes.push(nodes);
            if a == 0 {
                arc_weights = w;
            }
        }

        // distance classes: distinct positive coupling values
        let table = &params.couplings;
        let mut class_values: Vec<f64> = Vec::new();
        let mut class_of = vec![NO_CLASS; n * n];
        for x in 0..n {
            for y in 0..n {
                let j = table.coupling(x, y);
                if j > 0.0 {
                    let cls = match class_values.iter().position(|v| v.to_bits() == j.to_bits()) {
                        Some(c) => c,
                        None => {
                            class_values.push(j);
                            class_values.len() - 1
                        }
                    };
                    class_of[x * n + y] = cls;
                }
            }
        }

        let w = params.sign.pair_weight();
        let mut pair_exp = vec![0.0; class_values.len() * q * q * m * m];
        for (cls, &j) in class_values.iter().enumerate() {
            let coeff = params.beta * j * w;
            for a in 0..q {
                for b in 0..q {
                    let base = ((cls * q + a) * q + b) * m * m;
                    for i in 0..m {
                        let ua = arc_nodes[a][i];
                        for jj in 0..m {
                            pair_exp[base + i * m + jj] = (coeff * (ua - arc_nodes[b][jj]).cos()).exp();
                        }
                    }
                }
            }
        }

        let mut engine = TensorEngine {
            q,
            m,
            n,
            params: params.clone(),
            theta: params.theta,
            arc_nodes,
            arc_weights,
            class_of,
            pair_exp,
            field: Vec::new(),
        };
        engine.rebuild_field();
        Ok(engine)
    }

    /// Rotate the field angle; only the field factor tables are rebuilt.
    pub(crate) fn set_theta(&mut self, theta: f64) {
        self.theta = crate::model::normalize_angle(theta);
        self.rebuild_field();
    }

    fn rebuild_field(&mut self) {
        let (q, m, n) = (self.q, self.m, self.n);
        let mut field = vec![0.0; n * q * m];
        for x in 0..n {
            let coeff = self.params.beta * self.params.field_coefficient(x);
            for a in 0..q {
                for i in 0..m {
                    field[(x * q + a) * m + i] = self.arc_weights[i]
                        * (coeff * (self.arc_nodes[a][i] - self.theta).cos()).exp();
                }
            }
        }
        self.field = field;
    }

    fn field_vector(&self, x: usize, arc: usize) -> &[f64] {
        let base = (x * self.q + arc) * self.m;
        &self.field[base..base + self.m]
    }

    fn pair_row(&self, site_a: usize, site_b: usize, arc_a: usize, arc_b: usize, i: usize) -> Option<&[f64]> {
        let cls = self.class_of[site_a * self.n + site_b];
        if cls == NO_CLASS {
            return None;
        }
        let base = ((cls * self.q + arc_a) * self.q + arc_b) * self.m * self.m + i * self.m;
        Some(&self.pair_exp[base..base + self.m])
    }

    /// Constrained partition function `Z(labels) = int_{arcs} exp(-H)`.
    pub(crate) fn z_state(&self, labels: &[Label]) -> f64 {
        debug_assert_eq!(labels.len(), self.n);
        let active: Vec<usize> = (0..self.n).collect();
        let base: Vec<Vec<f64>> = active
            .iter()
            .map(|&x| self.field_vector(x, labels[x] - 1).to_vec())
            .collect();
        self.contract(&active, labels, base)
    }

    /// Slice integral `B_x(labels; u)`: the full Boltzmann mass of the arcs
    /// with the spin at `x` pinned to the angle `u`.
    pub(crate) fn slice(&self, labels: &[Label], x: usize, u: f64) -> f64 {
        debug_assert_eq!(labels.len(), self.n);
        let active: Vec<usize> = (0..self.n).filter(|&s| s != x).collect();
        let w = self.params.sign.pair_weight();
        let base: Vec<Vec<f64>> = active
            .iter()
            .map(|&y| {
                let mut v = self.field_vector(y, labels[y] - 1).to_vec();
                let j = self.params.couplings.coupling(x, y);
                if j != 0.0 {
                    let coeff = self.params.beta * j * w;
                    let nodes = &self.arc_nodes[labels[y] - 1];
                    for (vi, &node) in v.iter_mut().zip(nodes) {
                        *vi *= (coeff * (u - node).cos()).exp();
                    }
                }
                v
            })
            .collect();
        let pinned_field = (self.params.beta
            * self.params.field_coefficient(x)
            * (u - self.theta).cos())
        .exp();
        pinned_field * self.contract(&active, labels, base)
    }

    /// `q` single-site conditional probabilities `gamma'_x(k | labels_{x^c})`.
    pub(crate) fn conditional_weights(&self, labels: &[Label], x: usize) -> Vec<f64> {
        let mut scratch = labels.to_vec();
        let mut weights = Vec::with_capacity(self.q);
        for k in 1..=self.q {
            scratch[x] = k;
            weights.push(self.z_state(&scratch));
        }
        let norm: f64 = weights.iter().sum();
        assert!(norm > 0.0, "conditional partition function underflow");
        for w in &mut weights {
            *w /= norm;
        }
        weights
    }

    /// Irreversible rotation rate `c(labels, labels^x)`.
    pub(crate) fn rate(&self, labels: &[Label], x: usize) -> f64 {
        let (_, right) = arc_endpoints(labels[x], self.q).expect("label in range");
        let numerator = self.slice(labels, x, right);
        let z = self.z_state(labels);
        // bounded below by exp(-2 sup) * (2 pi / q)^N analytically
        assert!(z > 0.0 && numerator > 0.0, "degenerate rate denominator");
        numerator / z
    }

    /// Depth-first contraction over the active sites. `base[d]` already
    /// carries the field factor (and any pinned-site factor) of site
    /// `active[d]`; pair factors between active sites are multiplied in level
    /// by level.
    fn contract(&self, active: &[usize], labels: &[Label], base: Vec<Vec<f64>>) -> f64 {
        let k = active.len();
        if k == 0 {
            return 1.0;
        }
        let m = self.m;
        let mut scratch: Vec<Vec<f64>> = vec![vec![0.0; m]; k];
        let mut prefix: Vec<Vec<f64>> = vec![vec![0.0; m]; k];
        let mut idx = vec![0usize; k];
        scratch[0].copy_from_slice(&base[0]);
        self.level(0, active, labels, &base, &mut scratch, &mut prefix, &mut idx)
    }

    #[allow(clippy::too_many_arguments)]
    fn level(
        &self,
        d: usize,
        active: &[usize],
        labels: &[Label],
        base: &[Vec<f64>],
        scratch: &mut Vec<Vec<f64>>,
        prefix: &mut Vec<Vec<f64>>,
        idx: &mut Vec<usize>,
    ) -> f64 {
        let k = active.len();
        let m = self.m;
        if d + 1 == k {
            return scratch[d].iter().sum();
        }
        // pair factors from depths < d toward depth d+1 are fixed here
        {
            let (next_site, next_arc) = (active[d + 1], labels[active[d + 1]] - 1);
            let p = &mut prefix[d + 1];
            p.copy_from_slice(&base[d + 1]);
            for e in 0..d {
                if let Some(row) =
                    self.pair_row(active[e], next_site, labels[active[e]] - 1, next_arc, idx[e])
                {
                    for (pj, rj) in p.iter_mut().zip(row) {
                        *pj *= rj;
                    }
                }
            }
        }
        let mut total = 0.0;
        for i in 0..m {
            let f = scratch[d][i];
            idx[d] = i;
            {
                let (next_site, next_arc) = (active[d + 1], labels[active[d + 1]] - 1);
                let row =
                    self.pair_row(active[d], next_site, labels[active[d]] - 1, next_arc, i);
                let (left, right) = scratch.split_at_mut(d + 1);
                let _ = left;
                let next = &mut right[0];
                match row {
                    Some(row) => {
                        for j in 0..m {
                            next[j] = prefix[d + 1][j] * row[j];
                        }
                    }
                    None => next.copy_from_slice(&prefix[d + 1]),
                }
            }
            total += f * self.level(d + 1, active, labels, base, scratch, prefix, idx);
        }
        total
    }
}
