//! The irreversible single-site rotation rates.
//!
//! The rate for the transition `labels -> labels^x` (label at `x` stepped
//! forward by one) is the ratio
//!
//! ```text
//! c(w, w^x) = E[ exp(-H_x(r, .)) ] / E[ int_{arc(w_x)} exp(-H_x(u, .)) du ]
//! ```
//!
//! where `r` is the right endpoint of `x`'s current arc and both
//! expectations run over the Gibbs measure on `x^c` constrained to the arcs
//! of `w` with every interaction touching `x` removed. The numerator then
//! re-introduces `H_x` at the arc's leading edge, which is what makes the
//! rate a boundary-flux/occupation ratio.
//!
//! Two evaluation routes are provided: exact tensor quadrature for tiny
//! systems and Monte Carlo over the constrained measure for anything larger,
//! with jackknife error bars. The analytic envelope
//! `exp(2 sup|H_x|) q / (2 pi)` caps every rate and doubles as the thinning
//! bound for the simulator.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::discretization::{arc_endpoints, DiscreteConfig};
use crate::gibbs::{masked_local_energy, ConstraintMask, GibbsSampler, TensorEngine};
use crate::model::{local_energy_sup, ModelParams};
use crate::quadrature::GaussLegendre;
use crate::{Budget, Error, Result};

/// How a rate value was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    Quadrature,
    MonteCarlo,
}

/// A transition-rate value with its statistical error.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RateEstimate {
    /// Events per unit time; always positive.
    pub value: f64,
    /// Statistical error; zero for quadrature estimates.
    pub stderr: f64,
    pub method: RateMethod,
    pub samples: usize,
}

/// The envelope `exp(2 sup|H_x|) q / (2 pi)` from the well-definedness proof.
pub fn rate_upper_bound(x: usize, params: &ModelParams, q: usize) -> f64 {
    (2.0 * local_energy_sup(x, params)).exp() * q as f64 / TAU
}

/// Sharper pointwise envelope `(q / 2 pi) exp(sup|dH_x/du| * 2 pi / q)`: the
/// numerator's Boltzmann factor can beat the arc average by at most the
/// oscillation of `H_x` over one arc. Used for nested thinning; never exceeds
/// the rate.
pub(crate) fn rate_tight_bound(x: usize, params: &ModelParams, q: usize) -> f64 {
    let s = local_energy_sup(x, params);
    let osc = (s * TAU / q as f64).exp() * q as f64 / TAU;
    osc.min(rate_upper_bound(x, params, q))
}

/// Exact rate by tensor quadrature with `m` nodes per remaining site.
pub fn rate_quadrature(
    state: &DiscreteConfig,
    x: usize,
    params: &ModelParams,
    m: usize,
    budget: &Budget,
) -> Result<RateEstimate> {
    let n = params.n_sites();
    budget.check_tensor(n.saturating_sub(1), m)?;
    let engine = TensorEngine::new(params, state.q(), m)?;
    let value = engine.rate(state.labels(), x);
    Ok(RateEstimate {
        value,
        stderr: 0.0,
        method: RateMethod::Quadrature,
        samples: 0,
    })
}

/// Monte Carlo budget for [`rate_mc`].
#[derive(Clone, Copy, Debug)]
pub struct McOptions {
    /// Heat-bath sweeps before sampling starts.
    pub burn_in_sweeps: usize,
    /// Gauss–Legendre order of the one-dimensional arc integral in the
    /// denominator.
    pub inner_order: usize,
    /// Number of jackknife blocks for the error bar.
    pub jackknife_blocks: usize,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            burn_in_sweeps: 100,
            inner_order: 64,
            jackknife_blocks: 20,
        }
    }
}

/// Monte Carlo rate estimate over `samples` constrained-Gibbs draws, one
/// heat-bath sweep apart, with a jackknife error bar. The ratio-estimator
/// bias is O(1/samples) and is covered by the reported error at the default
/// budgets.
pub fn rate_mc<R: Rng>(
    state: &DiscreteConfig,
    x: usize,
    params: &ModelParams,
    samples: usize,
    rng: &mut R,
    opts: &McOptions,
) -> Result<RateEstimate> {
    if samples < 100 {
        return Err(Error::InvalidParameter {
            name: "samples",
            message: format!("need at least 100 samples, got {samples}"),
        });
    }
    let mask = ConstraintMask::from_state(state).exclude(x);
    let (lo, hi) = arc_endpoints(state.label(x), state.q())?;
    let rule = GaussLegendre::new(opts.inner_order);
    let mut sampler = GibbsSampler::new(mask.clone(), params.clone(), rng);
    for _ in 0..opts.burn_in_sweeps {
        sampler.sweep(rng)?;
    }
    let mut num = Vec::with_capacity(samples);
    let mut den = Vec::with_capacity(samples);
    for _ in 0..samples {
        sampler.sweep(rng)?;
        let config = sampler.config();
        num.push((-masked_local_energy(x, hi, config, params, &mask)).exp());
        den.push(rule.integrate(lo, hi, |u| {
            (-masked_local_energy(x, u, config, params, &mask)).exp()
        }));
    }
    let num_sum: f64 = num.iter().sum();
    let den_sum: f64 = den.iter().sum();
    let value = num_sum / den_sum;

    // leave-one-block-out jackknife over contiguous blocks
    let blocks = opts.jackknife_blocks.max(2).min(samples);
    let mut leave_out = Vec::with_capacity(blocks);
    let block_len = samples / blocks;
    for b in 0..blocks {
        let start = b * block_len;
        let end = if b + 1 == blocks { samples } else { start + block_len };
        let bn: f64 = num[start..end].iter().sum();
        let bd: f64 = den[start..end].iter().sum();
        leave_out.push((num_sum - bn) / (den_sum - bd));
    }
    let jk_mean = crate::stats::mean(&leave_out);
    let bf = blocks as f64;
    let stderr = ((bf - 1.0) / bf
        * leave_out.iter().map(|v| (v - jk_mean) * (v - jk_mean)).sum::<f64>())
    .sqrt();

    Ok(RateEstimate {
        value,
        stderr,
        method: RateMethod::MonteCarlo,
        samples,
    })
}

/// An explicit cycle of states with its forward and backward rate products.
///
/// The dynamics only ever steps labels forward, so every reversed edge has
/// rate zero and the backward product vanishes identically; any cycle with a
/// positive forward product therefore violates the Kolmogorov criterion.
#[derive(Clone, Debug, Serialize)]
pub struct IrreversibilityWitness {
    /// The visited label vectors, first state repeated at the end.
    pub cycle: Vec<Vec<usize>>,
    pub forward_product: f64,
    pub backward_product: f64,
    /// `|forward - backward|`.
    pub margin: f64,
}

/// Drive the label at site 0 once around the circle and compare forward and
/// backward rate products along the cycle.
pub fn irreversibility_witness(
    params: &ModelParams,
    q: usize,
    m: usize,
    budget: &Budget,
) -> Result<IrreversibilityWitness> {
    let n = params.n_sites();
    budget.check_tensor(n.saturating_sub(1), m)?;
    let engine = TensorEngine::new(params, q, m)?;
    let mut state = DiscreteConfig::constant(q, n, 1)?;
    let mut cycle = vec![state.labels().to_vec()];
    let mut forward_product = 1.0;
    for _ in 0..q {
        forward_product *= engine.rate(state.labels(), 0);
        state.increment(0);
        cycle.push(state.labels().to_vec());
    }
    // backward steps would decrement a label, which is not a transition of
    // this dynamics: rate 0
    let backward_product = 0.0;
    Ok(IrreversibilityWitness {
        cycle,
        forward_product,
        backward_product,
        margin: (forward_product - backward_product).abs(),
    })
}
