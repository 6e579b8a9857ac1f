//! Continuous-spin energies for the long-range XY model.
//!
//! The local energy at site `x` with spin angle `u` is
//!
//! ```text
//! H_x(u, phi) = -beta * sum_{y != x} J(x,y) cos(u - phi_y)
//!               -beta * (h + w_ext(x)) * cos(u - theta)
//! ```
//!
//! with the ferromagnetic sign by default. The uniform field `(h, theta)` is
//! the finite-volume symmetry-breaking device: closed tori are rotation
//! symmetric, so without it the family of rotated measures collapses to a
//! single point. In fixed-exterior mode the frozen exterior spins sit at the
//! field angle `theta` and enter through the per-site weight `w_ext`.
//!
//! `beta` is folded into the energies, so all downstream formulas use
//! `exp(-H)` with no explicit temperature factor.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::lattice::{CouplingTable, Site};
use crate::{Error, Result};

/// Sign of the pair interaction. The model is ferromagnetic; the opposite
/// sign is exposed for experiments only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum InteractionSign {
    #[default]
    Ferromagnetic,
    Antiferromagnetic,
}

impl InteractionSign {
    /// Multiplier applied to `cos(u - phi_y)` inside `exp(-H)`; the
    /// ferromagnetic convention rewards alignment.
    pub(crate) fn pair_weight(self) -> f64 {
        match self {
            InteractionSign::Ferromagnetic => 1.0,
            InteractionSign::Antiferromagnetic => -1.0,
        }
    }
}

/// Inverse temperature, external field and a shared coupling table.
#[derive(Clone, Debug)]
pub struct ModelParams {
    pub beta: f64,
    pub h: f64,
    pub theta: f64,
    pub sign: InteractionSign,
    pub couplings: Arc<CouplingTable>,
}

impl ModelParams {
    /// `beta = 0` is admitted as the exactly solvable reference case.
    pub fn new(beta: f64, h: f64, theta: f64, couplings: Arc<CouplingTable>) -> Result<Self> {
        if !(beta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                message: format!("must be >= 0, got {beta}"),
            });
        }
        if h < 0.0 {
            return Err(Error::InvalidParameter {
                name: "h",
                message: format!("must be >= 0, got {h}"),
            });
        }
        Ok(ModelParams {
            beta,
            h,
            theta: normalize_angle(theta),
            sign: InteractionSign::Ferromagnetic,
            couplings,
        })
    }

    /// Same parameters with the field rotated to `theta` (normalised mod 2π).
    pub fn with_theta(&self, theta: f64) -> Self {
        let mut p = self.clone();
        p.theta = normalize_angle(theta);
        p
    }

    pub fn n_sites(&self) -> usize {
        self.couplings.n_sites()
    }

    /// Effective field coefficient at `x`: the uniform field plus the weight
    /// of the frozen exterior in fixed-exterior mode.
    pub fn field_coefficient(&self, x: Site) -> f64 {
        self.h + self.couplings.exterior_weight(x)
    }
}

/// Normalise an angle into `[0, 2π)`.
pub fn normalize_angle(phi: f64) -> f64 {
    let a = phi.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Angle-valued configuration of the whole window; every entry is kept in
/// `[0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousConfig {
    angles: Vec<f64>,
}

impl ContinuousConfig {
    pub fn new(angles: Vec<f64>) -> Self {
        ContinuousConfig {
            angles: angles.into_iter().map(normalize_angle).collect(),
        }
    }

    pub fn constant(n_sites: usize, angle: f64) -> Self {
        ContinuousConfig {
            angles: vec![normalize_angle(angle); n_sites],
        }
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angle(&self, x: Site) -> f64 {
        self.angles[x]
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn set_angle(&mut self, x: Site, phi: f64) {
        self.angles[x] = normalize_angle(phi);
    }
}

/// Local energy `H_x(u, config)` with the spin at `x` replaced by `u`.
pub fn local_energy(x: Site, u: f64, config: &ContinuousConfig, params: &ModelParams) -> f64 {
    let table = &params.couplings;
    let n = table.n_sites();
    let w = params.sign.pair_weight();
    let mut pair = 0.0;
    for y in 0..n {
        if y == x {
            continue;
        }
        let j = table.coupling(x, y);
        if j != 0.0 {
            pair += j * (u - config.angle(y)).cos();
        }
    }
    -params.beta * (w * pair + params.field_coefficient(x) * (u - params.theta).cos())
}

/// Analytic bound `beta * (sum_y J(x,y) + h + w_ext(x)) >= sup |H_x|`.
pub fn local_energy_sup(x: Site, params: &ModelParams) -> f64 {
    params.beta * (params.couplings.row_sum(x) + params.field_coefficient(x))
}

/// Rotate every spin by `eps`. The field angle is not touched; callers that
/// want the rotated-field analogue rotate `theta` separately.
pub fn rotate_config(config: &ContinuousConfig, eps: f64) -> ContinuousConfig {
    ContinuousConfig::new(config.angles().iter().map(|&a| a + eps).collect())
}

/// Total energy with each pair counted once:
/// `-beta [ sum_{x<y} J cos(phi_x - phi_y) + sum_x (h + w_ext(x)) cos(phi_x - theta) ]`.
pub fn total_energy(config: &ContinuousConfig, params: &ModelParams) -> f64 {
    let table = &params.couplings;
    let n = table.n_sites();
    let w = params.sign.pair_weight();
    let mut pair = 0.0;
    for x in 0..n {
        for y in (x + 1)..n {
            let j = table.coupling(x, y);
            if j != 0.0 {
                pair += j * (config.angle(x) - config.angle(y)).cos();
            }
        }
    }
    let mut field = 0.0;
    for x in 0..n {
        field += params.field_coefficient(x) * (config.angle(x) - params.theta).cos();
    }
    -params.beta * (w * pair + field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_coupling_table, LatticeSpec};
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn ring_params(n: usize, alpha: f64, beta: f64, h: f64, theta: f64) -> ModelParams {
        let table = build_coupling_table(&LatticeSpec::ring(n, alpha)).unwrap();
        ModelParams::new(beta, h, theta, Arc::new(table)).unwrap()
    }

    #[test]
    fn aligned_and_antialigned_pair() {
        let params = ring_params(2, 1.5, 1.0, 0.0, 0.0);
        let aligned = ContinuousConfig::constant(2, 0.0);
        assert_abs_diff_eq!(local_energy(0, 0.0, &aligned, &params), -1.0, epsilon = 1e-15);
        let mut anti = aligned.clone();
        anti.set_angle(1, std::f64::consts::PI);
        assert_abs_diff_eq!(local_energy(0, 0.0, &anti, &params), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn three_ring_local_energy() {
        let params = ring_params(3, 1.5, 0.5, 0.0, 0.0);
        let config = ContinuousConfig::constant(3, 0.0);
        // both neighbours at coupling 1, beta = 0.5
        assert_abs_diff_eq!(local_energy(0, 0.0, &config, &params), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn sup_bound_examples() {
        let params = ring_params(3, 1.5, 1.0, 0.0, 0.0);
        assert_abs_diff_eq!(local_energy_sup(0, &params), 2.0, epsilon = 1e-14);
        let zero_beta = ring_params(3, 1.5, 0.0, 0.7, 0.0);
        assert_abs_diff_eq!(local_energy_sup(0, &zero_beta), 0.0, epsilon = 1e-15);
        let with_field = ring_params(3, 1.5, 0.5, 0.2, 0.0);
        assert_abs_diff_eq!(local_energy_sup(0, &with_field), 1.1, epsilon = 1e-14);
    }

    #[test]
    fn sup_bounds_random_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[2usize, 3, 5] {
            let params = ring_params(n, 1.5, 0.8, 0.3, 1.0);
            for _ in 0..10_000 {
                let config =
                    ContinuousConfig::new((0..n).map(|_| rng.gen::<f64>() * TAU).collect());
                let u = rng.gen::<f64>() * TAU;
                for x in 0..n {
                    assert!(local_energy(x, u, &config, &params).abs() <= local_energy_sup(x, &params) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn rotation_is_a_group_action() {
        let config = ContinuousConfig::new(vec![0.1, 2.3, 4.0]);
        let full = rotate_config(&config, TAU);
        for x in 0..3 {
            assert_abs_diff_eq!(full.angle(x), config.angle(x), epsilon = 1e-12);
        }
        let zeros = ContinuousConfig::constant(4, 0.0);
        let quarter = rotate_config(&zeros, std::f64::consts::FRAC_PI_2);
        for x in 0..4 {
            assert_abs_diff_eq!(quarter.angle(x), std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        }
        let eps = 0.37;
        let twice = rotate_config(&rotate_config(&config, eps), eps);
        let once = rotate_config(&config, 2.0 * eps);
        for x in 0..3 {
            assert_abs_diff_eq!(twice.angle(x), once.angle(x), epsilon = 1e-15);
        }
    }

    #[test]
    fn total_energy_examples() {
        let params = ring_params(3, 1.5, 0.7, 0.0, 0.0);
        let s = params.couplings.row_sum(0);
        let aligned = ContinuousConfig::constant(3, 0.0);
        assert_abs_diff_eq!(
            total_energy(&aligned, &params),
            -0.7 * (3.0 * s / 2.0),
            epsilon = 1e-13
        );
        let zero_beta = ring_params(3, 1.5, 0.0, 0.4, 0.0);
        assert_abs_diff_eq!(total_energy(&aligned, &zero_beta), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn total_energy_matches_local_sum() {
        // total = (1/2) sum_x (H_x - field_x) + sum_x field_x
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params = ring_params(5, 1.5, 0.6, 0.3, 0.9);
        for _ in 0..50 {
            let config = ContinuousConfig::new((0..5).map(|_| rng.gen::<f64>() * TAU).collect());
            let mut acc = 0.0;
            for x in 0..5 {
                let field = -params.beta
                    * params.field_coefficient(x)
                    * (config.angle(x) - params.theta).cos();
                let hx = local_energy(x, config.angle(x), &config, &params);
                acc += 0.5 * (hx - field) + field;
            }
            assert_abs_diff_eq!(total_energy(&config, &params), acc, epsilon = 1e-12);
        }
    }

    #[test]
    fn rotation_covariance_of_total_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let params = ring_params(4, 1.5, 0.5, 0.4, 0.7);
        for _ in 0..50 {
            let config = ContinuousConfig::new((0..4).map(|_| rng.gen::<f64>() * TAU).collect());
            let eps = rng.gen::<f64>() * TAU;
            let rotated = rotate_config(&config, eps);
            let rotated_params = params.with_theta(params.theta + eps);
            assert_abs_diff_eq!(
                total_energy(&rotated, &rotated_params),
                total_energy(&config, &params),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn zero_field_energy_is_rotation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let params = ring_params(4, 1.5, 0.5, 0.0, 0.0);
        for _ in 0..50 {
            let config = ContinuousConfig::new((0..4).map(|_| rng.gen::<f64>() * TAU).collect());
            let eps = rng.gen::<f64>() * TAU;
            assert_abs_diff_eq!(
                total_energy(&rotate_config(&config, eps), &params),
                total_energy(&config, &params),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn rejects_negative_parameters() {
        let table = Arc::new(build_coupling_table(&LatticeSpec::ring(2, 1.5)).unwrap());
        assert!(ModelParams::new(-0.1, 0.0, 0.0, table.clone()).is_err());
        assert!(ModelParams::new(1.0, -0.2, 0.0, table).is_err());
    }
}
