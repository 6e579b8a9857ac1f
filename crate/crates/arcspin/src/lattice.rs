//! Lattice geometry and precomputed long-range coupling tables.
//!
//! Couplings decay as `J(x,y) = |x-y|^{-alpha}` with `alpha` strictly inside
//! `(d, 2d)`; slower decay makes the interaction non-summable, faster decay
//! loses the long-range phase transition the model is built around. On a
//! torus every pair interacts once through its minimum-image displacement. In
//! fixed-exterior mode the window sits inside the infinite lattice with the
//! exterior spins frozen; their couplings are accumulated per site up to a
//! truncation radius `R` and the remainder is covered by a certified integral
//! tail bound.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Flattened site index within a lattice window.
pub type Site = usize;

/// Boundary handling for the finite window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// Periodic wrap-around; distances use the minimum image per axis.
    Torus,
    /// Open window inside the infinite lattice. Interactions with the frozen
    /// exterior are summed out to Euclidean radius `radius` and the rest is
    /// reported through an integral tail bound.
    FixedExterior { radius: usize },
}

/// Geometry of the finite system: dimension, per-axis extent, boundary mode
/// and the coupling decay exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dimension: usize,
    pub extent: Vec<usize>,
    pub boundary: Boundary,
    pub alpha: f64,
}

impl LatticeSpec {
    /// One-dimensional ring of `n` sites.
    pub fn ring(n: usize, alpha: f64) -> Self {
        LatticeSpec {
            dimension: 1,
            extent: vec![n],
            boundary: Boundary::Torus,
            alpha,
        }
    }

    /// Two-dimensional torus of `nx` by `ny` sites.
    pub fn torus_2d(nx: usize, ny: usize, alpha: f64) -> Self {
        LatticeSpec {
            dimension: 2,
            extent: vec![nx, ny],
            boundary: Boundary::Torus,
            alpha,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.extent.iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension != 1 && self.dimension != 2 {
            return Err(Error::InvalidParameter {
                name: "dimension",
                message: format!("must be 1 or 2, got {}", self.dimension),
            });
        }
        if self.extent.len() != self.dimension {
            return Err(Error::InvalidParameter {
                name: "extent",
                message: format!(
                    "expected {} axis lengths, got {}",
                    self.dimension,
                    self.extent.len()
                ),
            });
        }
        if self.extent.iter().any(|&n| n == 0) {
            return Err(Error::InvalidParameter {
                name: "extent",
                message: "every axis must have at least one site".into(),
            });
        }
        let d = self.dimension as f64;
        if !(self.alpha > d && self.alpha < 2.0 * d) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                message: format!(
                    "alpha must lie strictly in (d, 2d) = ({}, {}), got {}",
                    d,
                    2.0 * d,
                    self.alpha
                ),
            });
        }
        if let Boundary::FixedExterior { radius } = self.boundary {
            if radius == 0 {
                return Err(Error::InvalidParameter {
                    name: "exterior_radius",
                    message: "truncation radius must be at least 1".into(),
                });
            }
        }
        Ok(())
    }

    /// Integer coordinates of a flattened site index (row-major).
    pub fn coords(&self, site: Site) -> [i64; 2] {
        match self.dimension {
            1 => [site as i64, 0],
            _ => {
                let ny = self.extent[1];
                [(site / ny) as i64, (site % ny) as i64]
            }
        }
    }

    fn displacement_norm(&self, a: [i64; 2], b: [i64; 2]) -> f64 {
        let mut sq = 0.0;
        for axis in 0..self.dimension {
            let mut d = (a[axis] - b[axis]).abs();
            if self.boundary == Boundary::Torus {
                let len = self.extent[axis] as i64;
                d = d.min(len - d);
            }
            sq += (d * d) as f64;
        }
        sq.sqrt()
    }
}

/// Symmetric pairwise couplings with cached row sums and, in fixed-exterior
/// mode, the per-site weight of the truncated exterior.
#[derive(Clone, Debug)]
pub struct CouplingTable {
    n_sites: usize,
    j: Vec<f64>,
    row_sums: Vec<f64>,
    exterior_weight: Vec<f64>,
    exterior_tail_bound: f64,
}

impl CouplingTable {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// `J(x,y)`; zero on the diagonal.
    pub fn coupling(&self, x: Site, y: Site) -> f64 {
        self.j[x * self.n_sites + y]
    }

    /// `sum_{y != x} J(x,y)` over the window, exactly as stored.
    pub fn row_sum(&self, x: Site) -> f64 {
        self.row_sums[x]
    }

    /// Total coupling from site `x` to the truncated frozen exterior
    /// (zero on a torus).
    pub fn exterior_weight(&self, x: Site) -> f64 {
        self.exterior_weight[x]
    }

    /// Certified upper bound on the exterior couplings dropped beyond the
    /// truncation radius (zero on a torus).
    pub fn exterior_tail_bound(&self) -> f64 {
        self.exterior_tail_bound
    }
}

/// Build the coupling table for a validated lattice spec.
pub fn build_coupling_table(spec: &LatticeSpec) -> Result<CouplingTable> {
    spec.validate()?;
    let n = spec.n_sites();
    let mut j = vec![0.0; n * n];
    let mut row_sums = vec![0.0; n];
    for x in 0..n {
        let cx = spec.coords(x);
        for y in 0..n {
            if x == y {
                continue;
            }
            let r = spec.displacement_norm(cx, spec.coords(y));
            j[x * n + y] = r.powf(-spec.alpha);
        }
        row_sums[x] = (0..n).map(|y| j[x * n + y]).sum();
    }

    let mut exterior_weight = vec![0.0; n];
    let mut exterior_tail_bound = 0.0;
    if let Boundary::FixedExterior { radius } = spec.boundary {
        let r = radius as i64;
        for x in 0..n {
            let cx = spec.coords(x);
            let mut w = 0.0;
            let (ax_lo, ax_hi) = (cx[0] - r, cx[0] + r);
            let (ay_lo, ay_hi) = if spec.dimension == 2 {
                (cx[1] - r, cx[1] + r)
            } else {
                (0, 0)
            };
            for a in ax_lo..=ax_hi {
                for b in ay_lo..=ay_hi {
                    let inside_x = a >= 0 && (a as usize) < spec.extent[0];
                    let inside = if spec.dimension == 2 {
                        inside_x && b >= 0 && (b as usize) < spec.extent[1]
                    } else {
                        inside_x
                    };
                    if inside {
                        continue;
                    }
                    let dist = spec.displacement_norm(cx, [a, b]);
                    if dist > 0.0 && dist <= radius as f64 {
                        w += dist.powf(-spec.alpha);
                    }
                }
            }
            exterior_weight[x] = w;
        }
        // Everything beyond the truncation radius is dropped; bound it by the
        // full-lattice tail, which over-counts only window sites.
        let (_, tail) = lattice_tail_sum(spec.alpha, spec.dimension, radius)?;
        exterior_tail_bound = tail;
    }

    Ok(CouplingTable {
        n_sites: n,
        j,
        row_sums,
        exterior_weight,
        exterior_tail_bound,
    })
}

/// Partial sum of `sum_{0 < |x| <= cutoff} |x|^{-alpha}` over the infinite
/// lattice `Z^d` (Euclidean norm) together with a rigorous upper bound on the
/// remainder `sum_{|x| > cutoff} |x|^{-alpha}`.
///
/// In `d = 1` the remainder is bounded by the integral comparison
/// `2 * cutoff^{1-alpha} / (alpha - 1)`. In `d = 2` the sites with
/// `|x| > cutoff` but `|x|_inf <= cutoff` are summed exactly and the rest is
/// grouped into sup-norm shells of `8m` sites at Euclidean distance at least
/// `m`, giving the bound `8 * cutoff^{2-alpha} / (alpha - 2)`.
pub fn lattice_tail_sum(alpha: f64, d: usize, cutoff: usize) -> Result<(f64, f64)> {
    if d != 1 && d != 2 {
        return Err(Error::InvalidParameter {
            name: "dimension",
            message: format!("must be 1 or 2, got {d}"),
        });
    }
    if alpha <= d as f64 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            message: format!("alpha must exceed d = {d} for a summable tail, got {alpha}"),
        });
    }
    if cutoff == 0 {
        return Err(Error::InvalidParameter {
            name: "cutoff",
            message: "cutoff must be at least 1".into(),
        });
    }
    let c = cutoff as f64;
    match d {
        1 => {
            let partial: f64 = (1..=cutoff).map(|n| 2.0 * (n as f64).powf(-alpha)).sum();
            let tail = 2.0 * c.powf(1.0 - alpha) / (alpha - 1.0);
            Ok((partial, tail))
        }
        _ => {
            let m = cutoff as i64;
            let mut partial = 0.0;
            let mut annulus = 0.0;
            for a in -m..=m {
                for b in -m..=m {
                    if a == 0 && b == 0 {
                        continue;
                    }
                    let r = ((a * a + b * b) as f64).sqrt();
                    let term = r.powf(-alpha);
                    if r <= c {
                        partial += term;
                    } else {
                        annulus += term;
                    }
                }
            }
            let shell_bound = 8.0 * c.powf(2.0 - alpha) / (alpha - 2.0);
            Ok((partial, annulus + shell_bound))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn coupling_follows_power_law() {
        let spec = LatticeSpec::ring(8, 1.5);
        let table = build_coupling_table(&spec).unwrap();
        // |x-y| = 2 at alpha = 1.5
        assert_abs_diff_eq!(table.coupling(0, 2), 0.35355339059327373, epsilon = 1e-15);
        assert_abs_diff_eq!(table.coupling(0, 1), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn torus_uses_minimum_image() {
        let spec = LatticeSpec::ring(6, 1.5);
        let table = build_coupling_table(&spec).unwrap();
        // sites 0 and 5 are adjacent through the wrap
        assert_abs_diff_eq!(table.coupling(0, 5), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(table.coupling(0, 3), 3.0f64.powf(-1.5), epsilon = 1e-15);
    }

    #[test]
    fn row_sums_match_brute_force() {
        for &n in &[1usize, 2, 3, 5, 8] {
            let spec = LatticeSpec::ring(n, 1.7);
            let table = build_coupling_table(&spec).unwrap();
            for x in 0..n {
                let brute: f64 = (0..n).filter(|&y| y != x).map(|y| table.coupling(x, y)).sum();
                assert_abs_diff_eq!(table.row_sum(x), brute, epsilon = 1e-12);
            }
        }
        let spec = LatticeSpec::torus_2d(3, 4, 2.5);
        let table = build_coupling_table(&spec).unwrap();
        for x in 0..spec.n_sites() {
            let brute: f64 = (0..spec.n_sites())
                .filter(|&y| y != x)
                .map(|y| table.coupling(x, y))
                .sum();
            assert_abs_diff_eq!(table.row_sum(x), brute, epsilon = 1e-12);
        }
    }

    #[test]
    fn three_ring_row_sum() {
        // every pair on the 3-ring sits at minimum-image distance 1
        let spec = LatticeSpec::ring(3, 1.5);
        let table = build_coupling_table(&spec).unwrap();
        for x in 0..3 {
            assert_abs_diff_eq!(table.row_sum(x), 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn torus_couplings_are_translation_invariant() {
        for spec in [LatticeSpec::ring(7, 1.3), LatticeSpec::torus_2d(4, 3, 3.1)] {
            let n = spec.n_sites();
            let table = build_coupling_table(&spec).unwrap();
            // translate both endpoints by every lattice vector
            for shift in 0..n {
                for x in 0..n {
                    for y in 0..n {
                        let tx = translate(&spec, x, shift);
                        let ty = translate(&spec, y, shift);
                        assert_abs_diff_eq!(
                            table.coupling(x, y),
                            table.coupling(tx, ty),
                            epsilon = 1e-15
                        );
                    }
                }
            }
            for x in 0..n {
                for y in 0..n {
                    assert_eq!(table.coupling(x, y), table.coupling(y, x));
                }
                assert_eq!(table.coupling(x, x), 0.0);
            }
        }
    }

    fn translate(spec: &LatticeSpec, site: Site, shift: usize) -> Site {
        match spec.dimension {
            1 => (site + shift) % spec.extent[0],
            _ => {
                let ny = spec.extent[1];
                let (i, j) = (site / ny, site % ny);
                let (si, sj) = (shift / ny, shift % ny);
                ((i + si) % spec.extent[0]) * ny + (j + sj) % ny
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LatticeSpec::ring(3, 2.5).validate().is_err());
        assert!(LatticeSpec::ring(3, 1.0).validate().is_err());
        assert!(LatticeSpec::ring(0, 1.5).validate().is_err());
        assert!(LatticeSpec::torus_2d(3, 3, 1.5).validate().is_err());
        assert!(LatticeSpec::torus_2d(3, 3, 3.0).validate().is_ok());
        let bad = LatticeSpec {
            dimension: 1,
            extent: vec![4],
            boundary: Boundary::FixedExterior { radius: 0 },
            alpha: 1.5,
        };
        assert!(bad.validate().is_err());
        assert!(lattice_tail_sum(1.5, 1, 0).is_err());
        assert!(lattice_tail_sum(0.9, 1, 10).is_err());
    }

    #[test]
    fn tail_sum_small_cutoffs() {
        let (p, _) = lattice_tail_sum(1.5, 1, 1).unwrap();
        assert_abs_diff_eq!(p, 2.0, epsilon = 1e-15);
        let (p, _) = lattice_tail_sum(3.0, 2, 1).unwrap();
        assert_abs_diff_eq!(p, 4.0, epsilon = 1e-15);
    }

    #[test]
    fn tail_sum_reaches_zeta_limit() {
        // sum_{n != 0} |n|^{-3/2} = 2 zeta(3/2) = 5.2247506973709767
        let (p, t) = lattice_tail_sum(1.5, 1, 1_000_000).unwrap();
        assert!(t < 5e-3);
        assert_abs_diff_eq!(p + t, 5.2247506973709767, epsilon = 1e-8);
    }

    #[test]
    fn tail_bounds_are_monotone() {
        for d in [1usize, 2] {
            let alpha = if d == 1 { 1.5 } else { 3.0 };
            let mut prev_tail = f64::INFINITY;
            let mut prev_total = f64::INFINITY;
            for cutoff in [1usize, 2, 4, 8, 16, 32] {
                let (p, t) = lattice_tail_sum(alpha, d, cutoff).unwrap();
                assert!(t <= prev_tail);
                assert!(p + t <= prev_total + 1e-12);
                prev_tail = t;
                prev_total = p + t;
            }
        }
    }

    #[test]
    fn fixed_exterior_accumulates_truncated_couplings() {
        let spec = LatticeSpec {
            dimension: 1,
            extent: vec![4],
            boundary: Boundary::FixedExterior { radius: 3 },
            alpha: 1.5,
        };
        let table = build_coupling_table(&spec).unwrap();
        // site 0 sees exterior sites -1, -2, -3 within radius 3
        let expect: f64 = (1..=3).map(|n| (n as f64).powf(-1.5)).sum();
        assert_abs_diff_eq!(table.exterior_weight(0), expect, epsilon = 1e-14);
        // site 1 sees -1, -2 on the left and site 4 at distance 3 on the right
        let expect1: f64 =
            2.0f64.powf(-1.5) + 3.0f64.powf(-1.5) + 3.0f64.powf(-1.5);
        assert_abs_diff_eq!(table.exterior_weight(1), expect1, epsilon = 1e-14);
        assert!(table.exterior_tail_bound() > 0.0);
        // interior couplings use plain distances, no wrap
        assert_abs_diff_eq!(table.coupling(0, 3), 3.0f64.powf(-1.5), epsilon = 1e-15);
    }
}
